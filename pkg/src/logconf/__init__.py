"""Log-conformation kernels, oracles and reduced viscoelastic models."""

from .constitutive import (
    FlowKinematics,
    Model,
    ModelParams,
    apply_jacobian,
    extension_flow,
    jacobian_psi,
    relaxation_function,
    residual_psi,
    residual_sigma,
    rest_flow,
    shear_flow,
    split_kinematics,
)
from .errors import *  # noqa: F401,F403
from .kernels import KernelThresholds, divided_diff, f_eval, g_eval, three_eig_factor
from .matfun import EXP, LOG, ScalarFunction, F_apply, apply_scalar, d_div_exp, dF_apply, dfun_apply, div_exp
from .solvers import NewtonSettings, NewtonReport, convergence_order, newton_solve, rk4_integrate
from .tensor import FullTensor, Spectral, SymTensor, eig_sym, from_voigt, to_voigt
from .wake import WakeProfile, WakeSolution, extremal_check, profile_eval, wake_integrate

__version__ = "0.1.0"
