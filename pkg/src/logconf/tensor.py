"""Small dense tensor algebra and the Jacobi eigensolver.

Symmetric tensors travel through the package as plain ``(d, d)`` numpy
arrays; :class:`SymTensor` is the Voigt-stored value type used at the
edges (configs, CSV rows, Newton unknowns).  Voigt order is
``(11, 22, 12)`` for d=2 and ``(11, 22, 33, 12, 13, 23)`` for d=3, with
off-diagonal entries stored unscaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonFinite

VOIGT_PAIRS = {
    2: ((0, 0), (1, 1), (0, 1)),
    3: ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)),
}
VOIGT_LABELS = {
    2: ("11", "22", "12"),
    3: ("11", "22", "33", "12", "13", "23"),
}

JACOBI_MAX_SWEEPS = 32
JACOBI_REL_TOL = 1e-14


def voigt_size(dim: int) -> int:
    return dim * (dim + 1) // 2


def dim_from_voigt(m: int) -> int:
    for d, pairs in VOIGT_PAIRS.items():
        if len(pairs) == m:
            return d
    raise DimensionMismatch(f"no supported dimension has {m} Voigt entries")


def to_voigt(a) -> np.ndarray:
    """Read the upper triangle of a symmetric matrix in Voigt order."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d) or d not in VOIGT_PAIRS:
        raise DimensionMismatch(f"expected a 2x2 or 3x3 matrix, got {a.shape}")
    return np.array([a[i, j] for i, j in VOIGT_PAIRS[d]])


def from_voigt(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    d = dim_from_voigt(v.shape[0])
    a = np.empty((d, d))
    for k, (i, j) in enumerate(VOIGT_PAIRS[d]):
        a[i, j] = a[j, i] = v[k]
    return a


@dataclass(frozen=True)
class SymTensor:
    """A d x d real symmetric tensor stored in Voigt form."""

    dim: int
    voigt: tuple

    def __post_init__(self):
        if self.dim not in VOIGT_PAIRS:
            raise DimensionMismatch(f"dim must be 2 or 3, got {self.dim}")
        v = tuple(float(x) for x in self.voigt)
        if len(v) != voigt_size(self.dim):
            raise DimensionMismatch(
                f"dim={self.dim} needs {voigt_size(self.dim)} Voigt entries, got {len(v)}"
            )
        object.__setattr__(self, "voigt", v)

    @classmethod
    def from_matrix(cls, a) -> "SymTensor":
        a = np.asarray(a, dtype=float)
        return cls(a.shape[0], tuple(to_voigt(a)))

    @classmethod
    def zeros(cls, dim: int) -> "SymTensor":
        return cls(dim, (0.0,) * voigt_size(dim))

    @classmethod
    def identity(cls, dim: int) -> "SymTensor":
        return cls(dim, (1.0,) * dim + (0.0,) * (voigt_size(dim) - dim))

    @property
    def matrix(self) -> np.ndarray:
        return from_voigt(self.voigt)

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)


@dataclass(frozen=True)
class FullTensor:
    """A general (possibly non-symmetric) d x d tensor."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got {e.shape}")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class Spectral:
    """Ascending eigenvalues and the matching rank-1 projectors."""

    eigenvalues: np.ndarray
    projectors: np.ndarray  # shape (d, d, d); projectors[i] = e_i e_i^T

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ijk->jk", self.eigenvalues, self.projectors)


def as_matrix(a) -> np.ndarray:
    """Coerce a SymTensor, FullTensor or array-like into a float matrix."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def check_same_dim(*mats) -> int:
    d = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape != (d, d):
            raise DimensionMismatch(f"dimension mismatch: {mats[0].shape} vs {m.shape}")
    return d


def check_finite(a, what="input"):
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{what} contains NaN or Inf")


def frob(a) -> float:
    return float(np.linalg.norm(a))


def symmetrize(a) -> np.ndarray:
    return 0.5 * (a + a.T)


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi on a small symmetric matrix.

    Returns (eigenvalues, eigenvector columns), unsorted.  Plain Python
    floats are used because numpy call overhead dominates at d <= 3.
    """
    d = a.shape[0]
    m = a.tolist()
    v = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]
    norm = math.sqrt(sum(x * x for row in m for x in row))
    tol = JACOBI_REL_TOL * norm
    pairs = [(p, q) for p in range(d) for q in range(p + 1, d)]
    for _ in range(JACOBI_MAX_SWEEPS + 1):
        off = math.sqrt(2.0 * sum(m[p][q] * m[p][q] for p, q in pairs))
        if off <= tol:
            return [m[i][i] for i in range(d)], v
        for p, q in pairs:
            apq = m[p][q]
            if apq == 0.0:
                continue
            theta = (m[q][q] - m[p][p]) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            m[p][p] -= t * apq
            m[q][q] += t * apq
            m[p][q] = m[q][p] = 0.0
            for r in range(d):
                if r != p and r != q:
                    arp, arq = m[r][p], m[r][q]
                    m[r][p] = m[p][r] = c * arp - s * arq
                    m[r][q] = m[q][r] = s * arp + c * arq
            for r in range(d):
                vrp, vrq = v[r][p], v[r][q]
                v[r][p] = c * vrp - s * vrq
                v[r][q] = s * vrp + c * vrq
    raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def _eigenbasis(a):
    """Ascending eigenvalues and orthonormal eigenvector columns of ``a``.

    Internal companion of :func:`eig_sym` for the spectral formulas,
    which contract in the eigenbasis instead of forming projectors.
    """
    a = as_matrix(a)
    check_finite(a)
    lam, v = _jacobi(a)
    order = sorted(range(len(lam)), key=lam.__getitem__)
    lam = np.array([lam[i] for i in order])
    vecs = np.array(v)[:, order]
    return lam, vecs


def eig_sym(a) -> Spectral:
    """Eigendecomposition of a symmetric 2x2 or 3x3 tensor into projectors."""
    lam, vecs = _eigenbasis(a)
    projectors = np.einsum("ki,li->ikl", vecs, vecs)
    return Spectral(lam, projectors)


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    check_same_dim(a, b)
    return a @ b - b @ a


def iterated_commutator(a, b, n: int) -> np.ndarray:
    """n-fold nested commutator [a, [a, ... [a, b]]]; n=0 returns b."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, c = as_matrix(a), as_matrix(b).copy()
    check_same_dim(a, c)
    for _ in range(n):
        c = a @ c - c @ a
    return c
