"""Simulator and verification harness for the generalized Camassa-Holm
equation ``u_t - u_xxt + 3 u u_x - 2 u_x u_xx - u u_xxx + k (u - u_xx)_x = 0``
on [0, 1] with ``u = u_x = 0`` at both ends."""
from .config import parse_config
from .diagnostics import (
    DiagnosticsRow, agmon_check, conservation_drift, h1_norm_sq, lambda_identity_check,
    poincare_check, riccati_monitor, sup_bound_check,
)
from .dynamics import (
    BlowupReport, SimConfig, StateSnapshot, TrajectoryRecord, choose_dt, detect_blowup,
    integrate, rhs_m_form, rhs_u_form, step_rk4,
)
from .errors import ConfigError, CorruptStateError, PreconditionError
from .experiment import blowup_time_bound, convergence_study, run_blowup_experiment
from .grid import (
    Grid, KernelTable, convolve, diff1, diff2, diff3, helmholtz_residual, kernel_table,
    kernel_value, make_grid,
)
from .initial_data import InitialDataSpec, make_initial_data

__version__ = "0.1.0"
