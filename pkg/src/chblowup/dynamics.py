"""Method-of-lines integration of

    u_t + u u_x + d/dx G*(u^2 + u_x^2/2) + k u_x = 0,   x in [0, 1],

with u = 0 imposed at both ends. The momentum form
``m_t + (u + k) m_x + 2 u_x m = 0``, ``m = u - u_xx``, ``u_t = G*m_t`` is kept
as an independent right-hand side for cross-checking.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import DiagnosticsRow, compute_row
from .errors import ConfigError, CorruptStateError
from .grid import Grid, diff1, diff2, kernel_table
from .initial_data import InitialDataSpec, check_boundary, make_initial_data

log = logging.getLogger(__name__)

RHS_FORMS = ("u_form", "m_form")
TERMINATIONS = ("completed", "blowup_detected", "dt_underflow", "corrupt_state")

DT_EPS = 1e-8
C_BLOW = 0.5
FIT_WINDOW = 20


@dataclass(frozen=True)
class SimConfig:
    k: float
    n: int
    t_end: float
    initial_data: InitialDataSpec
    cfl: float = 0.3
    dt_max: float = 1e-3
    dt_min: float = 1e-12
    blowup_threshold: float = 1e3
    rhs_form: str = "u_form"
    record_stride: int = 10
    x0: float = 0.5
    # resolution guard: stop once the gradient spike is narrower than this many
    # nodes (0 disables). Armed only if min u0' < -sqrt(2)||u0||_1 and while
    # min u_x stays below that slope.
    min_spike_width: int = 7
    out_dir: str | None = None

    def __post_init__(self):
        for name in ("k", "t_end", "cfl", "dt_max", "dt_min", "blowup_threshold", "x0"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite real, got {v!r}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not self.cfl > 0:
            raise ConfigError(f"cfl must be positive, got {self.cfl}")
        if not 0 < self.dt_min < self.dt_max:
            raise ConfigError(f"need 0 < dt_min < dt_max, got {self.dt_min}, {self.dt_max}")
        if not self.blowup_threshold > 0:
            raise ConfigError(f"blowup_threshold must be positive, got {self.blowup_threshold}")
        if self.rhs_form not in RHS_FORMS:
            raise ConfigError(f"rhs_form must be one of {RHS_FORMS}, got {self.rhs_form!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError(f"record_stride must be a positive integer, got {self.record_stride}")
        if int(self.min_spike_width) != self.min_spike_width or self.min_spike_width < 0:
            raise ConfigError(f"min_spike_width must be a non-negative integer, got {self.min_spike_width}")
        grid = Grid(self.n)
        if self.initial_data.symmetric and self.n % 2 == 0:
            raise ConfigError("n must be odd for symmetric families")
        grid.node_index(self.x0)

    @property
    def grid(self) -> Grid:
        return Grid(self.n)


@dataclass(frozen=True)
class StateSnapshot:
    t: float
    u: np.ndarray

    @property
    def grid(self) -> Grid:
        return Grid(len(self.u))

    @property
    def u_x(self) -> np.ndarray:
        return diff1(self.u, self.grid)

    @property
    def u_xx(self) -> np.ndarray:
        return diff2(self.u, self.grid)


@dataclass
class TrajectoryRecord:
    snapshots: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    termination: str = "completed"
    t_final: float = 0.0
    blowup_trigger: str | None = None

    @property
    def energy0(self) -> float:
        return self.rows[0].energy if self.rows else 0.0


@dataclass(frozen=True)
class BlowupReport:
    t_cross: float
    T_est: float | None
    fit_slope: float | None
    trigger: str
    h_cross: float
    T0_bound: float | None = None
    h0: float | None = None
    u0_h1: float | None = None
    criterion_satisfied: bool | None = None
    hypothesis_maintained: bool | None = None
    bound_respected: bool | None = None

    @property
    def extrapolation_available(self) -> bool:
        return self.T_est is not None


def _check_finite(v: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise CorruptStateError(f"non-finite values in {what}")
    return v


def rhs_u_form(u, k: float) -> np.ndarray:
    """``u_t = -(u + k) u_x - d/dx G*(u^2 + u_x^2/2)``."""
    u = _check_finite(np.asarray(u, dtype=float), "u")
    grid = Grid(len(u))
    ux = diff1(u, grid)
    q = kernel_table(grid.n).convolve(u * u + 0.5 * ux * ux)
    return _check_finite(-(u + k) * ux - diff1(q, grid), "u_t")


def rhs_m_form(u, k: float) -> np.ndarray:
    """``u_t = G*m_t`` with ``m_t = -(u + k) m_x - 2 u_x m``, ``m = u - u_xx``."""
    u = _check_finite(np.asarray(u, dtype=float), "u")
    grid = Grid(len(u))
    ux = diff1(u, grid)
    m = u - diff2(u, grid)
    mt = -(u + k) * diff1(m, grid) - 2.0 * ux * m
    return _check_finite(kernel_table(grid.n).convolve(mt), "u_t")


_RHS = {"u_form": rhs_u_form, "m_form": rhs_m_form}


def _dirichlet(v: np.ndarray) -> np.ndarray:
    v[0] = 0.0
    v[-1] = 0.0
    return v


def step_rk4(s: StateSnapshot, dt: float, cfg: SimConfig) -> StateSnapshot:
    """Classical RK4 step; the end values are reset to zero after every stage."""
    rhs = _RHS[cfg.rhs_form]
    k = cfg.k
    u = s.u
    k1 = rhs(u, k)
    k2 = rhs(_dirichlet(u + 0.5 * dt * k1), k)
    k3 = rhs(_dirichlet(u + 0.5 * dt * k2), k)
    k4 = rhs(_dirichlet(u + dt * k3), k)
    new = _dirichlet(u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return StateSnapshot(s.t + dt, _check_finite(new, "u"))


def choose_dt(s: StateSnapshot, cfg: SimConfig, min_ux: float | None = None) -> float:
    """Advective CFL bound, clamped so u_x changes by a bounded fraction per step."""
    h = 1.0 / (len(s.u) - 1)
    if min_ux is None:
        min_ux = float(np.min(s.u_x))
    adv = cfg.cfl * h / (float(np.max(np.abs(s.u))) + abs(cfg.k) + DT_EPS)
    blow = C_BLOW / max(1.0, abs(min_ux))
    return min(cfg.dt_max, adv, blow)


def initial_state(cfg: SimConfig) -> StateSnapshot:
    grid = cfg.grid
    spec = cfg.initial_data
    u0 = make_initial_data(spec, grid)
    # raw samples only have finite-difference slopes at the ends
    slope_tol = 1e-6 * max(1.0, float(np.max(np.abs(u0)))) if spec.family == "custom_samples" else None
    check_boundary(u0, grid, spec, slope_tol=slope_tol)
    return StateSnapshot(0.0, u0)


def _breaking_slope(energy0: float) -> float:
    return -math.sqrt(2.0 * energy0)


def integrate(cfg: SimConfig) -> TrajectoryRecord:
    """Advance from t = 0 until t_end, blow-up detection, dt underflow or a
    corrupt state. One diagnostics row per accepted step, one snapshot every
    ``record_stride`` steps (plus the first and last states)."""
    grid = cfg.grid
    x0i = grid.node_index(cfg.x0)
    s = initial_state(cfg)
    row = compute_row(s.u, 0.0, 0.0, 0.0, x0i, grid)
    energy0 = row.energy
    row = replace(row, energy_drift_rel=0.0)
    traj = TrajectoryRecord(snapshots=[s], rows=[row])
    guard_slope = _breaking_slope(energy0)
    armed = bool(cfg.min_spike_width) and row.min_ux < guard_slope
    steps = 0
    t_tol = 1e-12 * max(1.0, cfg.t_end)

    def tripped(r: DiagnosticsRow):
        if r.min_ux <= -cfg.blowup_threshold:
            return "threshold"
        if armed and r.min_ux < guard_slope and r.spike_width < cfg.min_spike_width:
            return "resolution"
        return None

    trigger = tripped(row)
    while trigger is None:
        remaining = cfg.t_end - s.t
        if remaining <= t_tol:
            break
        dt = choose_dt(s, cfg, row.min_ux)
        if dt < cfg.dt_min:
            traj.termination = "dt_underflow"
            log.warning("dt=%.3e below dt_min at t=%.6g", dt, s.t)
            break
        if remaining < dt:
            if remaining < cfg.dt_min:
                break
            dt = remaining
        try:
            s = step_rk4(s, dt, cfg)
        except CorruptStateError as exc:
            traj.termination = "corrupt_state"
            log.warning("corrupt state at t=%.6g: %s", s.t, exc)
            break
        if remaining == dt:
            s = StateSnapshot(cfg.t_end, s.u)
        steps += 1
        row = compute_row(s.u, s.t, dt, energy0, x0i, grid)
        traj.rows.append(row)
        if steps % cfg.record_stride == 0:
            traj.snapshots.append(s)
        trigger = tripped(row)

    if trigger is not None:
        traj.termination = "blowup_detected"
        traj.blowup_trigger = trigger
    if traj.snapshots[-1].t != s.t:
        traj.snapshots.append(s)
    traj.t_final = s.t
    log.info("integrate: %s at t=%.6g after %d steps", traj.termination, s.t, steps)
    return traj


def detect_blowup(traj: TrajectoryRecord, cfg: SimConfig | None = None) -> BlowupReport | None:
    """Crossing time plus a blow-up time extrapolated from a least-squares line
    through ``1/min u_x`` over the last ``FIT_WINDOW`` rows before the crossing.

    Near breaking ``h' ~ -h^2/2``, so ``1/h`` is close to linear in t with
    slope 1/2 and its zero estimates the blow-up time.
    """
    if traj.termination != "blowup_detected" or not traj.rows:
        return None
    cross = traj.rows[-1]
    before = [r for r in traj.rows[:-1] if r.min_ux < 0][-FIT_WINDOW:]
    trigger = traj.blowup_trigger or "threshold"
    if len(before) < FIT_WINDOW:
        return BlowupReport(cross.t, None, None, trigger, cross.min_ux)
    t = np.array([r.t for r in before])
    inv = 1.0 / np.array([r.min_ux for r in before])
    slope, intercept = np.polyfit(t, inv, 1)
    T_est = -intercept / slope if slope > 0 else None
    return BlowupReport(cross.t, None if T_est is None else float(T_est), float(slope),
                        trigger, cross.min_ux)
