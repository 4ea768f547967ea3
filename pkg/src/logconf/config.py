"""Experiment configuration: TOML text -> validated ExperimentConfig.

Grammar (TOML, all tables optional, unknown keys rejected)::

    kind = "sweep"            # verify | steady | sweep | transient | wake
    seed = 42
    dim = 3                   # 2 or 3
    output_path = "sweep.csv"
    wi_list = [0.1, 0.2, 0.3] # sweep only, strictly ascending

    [model]
    name = "giesekus"         # oldroyd-b | giesekus
    lambda = 1.0
    alpha = 0.1               # must be 0 (or absent) for oldroyd-b
    beta = 0.5

    [flow]
    type = "shear"            # shear | extension (steady, sweep, transient)
    rate = 1.0                # strain rate; Wi = lambda * rate

    [transient]
    t_end = 10.0
    dt = 0.001
    output_every = 100

    [wake]
    u_bar = 1.0
    kappa = 0.3
    r_sphere = 1.0
    x_start = 1.1             # defaults to 1.1 * r_sphere
    x_end = 12.0              # defaults to 12 * r_sphere
    dx = 0.001                # defaults to 1e-3 * r_sphere
    psi0 = 0.0                # defaults to the quasi-static inlet value
    plateau_rate = 7.5        # optional: frozen u_x, top-hat strain rate
    plateau_start = 1.6
    plateau_end = 11.5

    [tolerances]
    newton_abs_tol = 1e-12
    newton_max_iter = 50
    newton_step_tol = 1e-4
    verify_cases = 20

For sweeps the flow rate is ignored: each row uses rate = Wi / lambda.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .constitutive import Model, ModelParams
from .errors import ParseError, ValidationError
from .solvers import NewtonSettings
from .wake import WakeProfile

KINDS = ("verify", "steady", "sweep", "transient", "wake")
FLOW_TYPES = ("shear", "extension")

_TOP_KEYS = {"kind", "seed", "dim", "output_path", "wi_list", "model", "flow", "transient", "wake", "tolerances"}
_TABLE_KEYS = {
    "model": {"name", "lambda", "alpha", "beta"},
    "flow": {"type", "rate"},
    "transient": {"t_end", "dt", "output_every"},
    "wake": {
        "u_bar", "kappa", "r_sphere", "x_start", "x_end", "dx", "psi0",
        "plateau_rate", "plateau_start", "plateau_end",
    },
    "tolerances": {"newton_abs_tol", "newton_max_iter", "newton_step_tol", "verify_cases"},
}


@dataclass(frozen=True)
class FlowSpec:
    type: str = "shear"
    rate: float = 1.0


@dataclass(frozen=True)
class TransientSpec:
    t_end: float = 10.0
    dt: float = 1e-3
    output_every: int = 100


@dataclass(frozen=True)
class WakeSpec:
    profile: WakeProfile = field(default_factory=WakeProfile)
    dx: Optional[float] = None
    psi0: Optional[float] = None


@dataclass(frozen=True)
class Tolerances:
    newton: NewtonSettings = field(default_factory=NewtonSettings)
    verify_cases: int = 20


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "verify"
    model: ModelParams = field(default_factory=ModelParams)
    flow: FlowSpec = field(default_factory=FlowSpec)
    wi_list: Tuple[float, ...] = ()
    dim: int = 3
    output_path: str = ""
    seed: int = 0
    transient: TransientSpec = field(default_factory=TransientSpec)
    wake: WakeSpec = field(default_factory=WakeSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    """Collects every violation instead of stopping at the first one."""

    def __init__(self):
        self.violations: List[str] = []

    def fail(self, name, msg):
        self.violations.append(f"{name}: {msg}")

    def get(self, table: Dict[str, Any], key, prefix, default, kind="num", check=None, msg=""):
        name = f"{prefix}{key}"
        if key not in table:
            return default
        v = table[key]
        ok = {"num": _is_num, "int": _is_int, "str": lambda x: isinstance(x, str)}[kind](v)
        if not ok:
            self.fail(name, f"expected {'a number' if kind == 'num' else 'an integer' if kind == 'int' else 'a string'}")
            return default
        if kind == "num":
            v = float(v)
        if check is not None and not check(v):
            self.fail(name, msg)
            return default
        return v

    def table(self, doc, key):
        t = doc.get(key, {})
        if not isinstance(t, dict):
            self.fail(key, "expected a table")
            return {}
        for extra in sorted(set(t) - _TABLE_KEYS[key]):
            self.fail(f"{key}.{extra}", "unknown key")
        return t


def parse_config(text: str, kind: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate a config document.

    ``kind`` (from the command line) fills in a missing ``kind`` key and
    must agree with it when both are given.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(
            getattr(exc, "msg", str(exc)), getattr(exc, "lineno", None), getattr(exc, "colno", None)
        ) from None
    return config_from_dict(doc, kind)


def config_from_dict(doc: Dict[str, Any], kind: Optional[str] = None) -> ExperimentConfig:
    c = _Checker()
    for extra in sorted(set(doc) - _TOP_KEYS):
        c.fail(extra, "unknown key")

    file_kind = c.get(doc, "kind", "", None, "str", lambda v: v in KINDS, f"must be one of {', '.join(KINDS)}")
    if kind is not None and kind not in KINDS:
        c.fail("kind", f"must be one of {', '.join(KINDS)}")
    if kind is not None and file_kind is not None and file_kind != kind:
        c.fail("kind", f"config says {file_kind!r} but {kind!r} was requested")
    kind = kind or file_kind or "verify"

    seed = c.get(doc, "seed", "", 0, "int", lambda v: v >= 0, "must be a non-negative integer")
    dim = c.get(doc, "dim", "", 3, "int", lambda v: v in (2, 3), "must be 2 or 3")
    output_path = c.get(doc, "output_path", "", f"{kind}.csv", "str", lambda v: v != "", "must not be empty")

    m = c.table(doc, "model")
    name = c.get(m, "name", "model.", "oldroyd-b", "str", lambda v: v in [x.value for x in Model],
                 "must be 'oldroyd-b' or 'giesekus'")
    lam = c.get(m, "lambda", "model.", 1.0, check=lambda v: v > 0, msg="lambda must be > 0")
    alpha_default = 0.1 if name == Model.GIESEKUS.value else 0.0
    alpha = c.get(m, "alpha", "model.", alpha_default, check=lambda v: 0.0 <= v <= 1.0, msg="alpha ∈ [0,1]")
    if name == Model.OLDROYD_B.value and alpha != 0.0:
        c.fail("model.alpha", "must be 0 for oldroyd-b")
        alpha = 0.0
    beta = c.get(m, "beta", "model.", 0.5, check=lambda v: 0.0 < v <= 1.0, msg="beta ∈ (0,1]")

    f = c.table(doc, "flow")
    ftype = c.get(f, "type", "flow.", "shear", "str", lambda v: v in FLOW_TYPES, "must be 'shear' or 'extension'")
    rate = c.get(f, "rate", "flow.", 1.0, check=lambda v: v >= 0, msg="must be >= 0")

    wi_list: Tuple[float, ...] = ()
    if "wi_list" in doc:
        raw = doc["wi_list"]
        if not isinstance(raw, list) or not all(_is_num(v) for v in raw):
            c.fail("wi_list", "expected an array of numbers")
        else:
            wi_list = tuple(float(v) for v in raw)
            if any(v < 0 for v in wi_list):
                c.fail("wi_list", "entries must be >= 0")
            if any(b <= a for a, b in zip(wi_list, wi_list[1:])):
                c.fail("wi_list", "must be strictly ascending")
    if kind == "sweep" and not wi_list:
        c.fail("wi_list", "required for sweep (non-empty array)")

    t = c.table(doc, "transient")
    t_end = c.get(t, "t_end", "transient.", 10.0, check=lambda v: v > 0, msg="must be > 0")
    dt = c.get(t, "dt", "transient.", 1e-3, check=lambda v: v > 0, msg="must be > 0")
    every = c.get(t, "output_every", "transient.", 100, "int", lambda v: v >= 1, "must be >= 1")
    if t_end > 0 and dt > 0 and abs(round(t_end / dt) * dt - t_end) > 1e-9 * t_end:
        c.fail("transient.t_end", "must be an integer multiple of dt")

    w = c.table(doc, "wake")
    wkw = {}
    for key in ("u_bar", "kappa", "r_sphere"):
        wkw[key] = c.get(w, key, "wake.", 1.0 if key != "kappa" else 0.3, check=lambda v: v > 0, msg="must be > 0")
    for key in ("x_start", "x_end", "plateau_rate", "plateau_start", "plateau_end"):
        wkw[key] = c.get(w, key, "wake.", None)
    dx = c.get(w, "dx", "wake.", None, check=lambda v: v > 0, msg="must be > 0")
    psi0 = c.get(w, "psi0", "wake.", None)
    profile = None
    try:
        profile = WakeProfile(**wkw)
    except ValueError as exc:
        c.fail("wake", str(exc))

    tol = c.table(doc, "tolerances")
    newton = dict(
        abs_tol=c.get(tol, "newton_abs_tol", "tolerances.", 1e-12, check=lambda v: v > 0, msg="must be > 0"),
        max_iter=c.get(tol, "newton_max_iter", "tolerances.", 50, "int", lambda v: v >= 1, "must be >= 1"),
        step_tol=c.get(tol, "newton_step_tol", "tolerances.", 1e-4, check=lambda v: v > 0, msg="must be > 0"),
    )
    cases = c.get(tol, "verify_cases", "tolerances.", 20, "int", lambda v: v >= 1, "must be >= 1")

    if c.violations:
        raise ValidationError(c.violations)

    return ExperimentConfig(
        kind=kind,
        model=ModelParams(Model(name), lam, alpha, beta),
        flow=FlowSpec(ftype, rate),
        wi_list=wi_list,
        dim=dim,
        output_path=output_path,
        seed=seed,
        transient=TransientSpec(t_end, dt, every),
        wake=WakeSpec(profile, dx, psi0),
        tolerances=Tolerances(NewtonSettings(**newton), cases),
    )
