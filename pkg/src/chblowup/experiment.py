"""Breaking-time bound, the end-to-end blow-up experiment and refinement studies."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import conservation_drift, h1_norm_sq, riccati_monitor
from .dynamics import BlowupReport, SimConfig, detect_blowup, integrate
from .errors import ConfigError
from .grid import Grid, diff1, helmholtz_residual, kernel_table
from .initial_data import make_initial_data

BOUND_TOL = 0.02
HYPOTHESIS_TOL = 1e-3


def slope_at(u0, x0: float, grid: Grid | None = None, spec=None) -> float:
    """u0'(x0); analytic for closed-form families, ``diff1`` otherwise."""
    grid = grid or Grid(len(u0))
    i = grid.node_index(x0)
    if spec is not None:
        d = spec.derivative(np.array([x0]))
        if d is not None:
            return float(d[0])
    return float(diff1(u0, grid)[i])


def breaking_criterion(h0: float, u0_norm: float) -> bool:
    """``u0'(x0) < -sqrt(2) ||u0||_1`` (``u0_norm`` is the unsquared norm)."""
    return h0 < -math.sqrt(2.0) * u0_norm


def blowup_time_bound(u0, x0: float, grid: Grid | None = None, h0: float | None = None):
    """Upper bound on the existence time,

        T0 = ln((h0 - s) / (h0 + s)) / s,   s = sqrt(2) ||u0||_1,  h0 = u0'(x0),

    or None when ``h0 >= -s`` and the bound does not apply.
    """
    u0 = np.asarray(u0, dtype=float)
    grid = grid or Grid(len(u0))
    if h0 is None:
        h0 = slope_at(u0, x0, grid)
    s = math.sqrt(2.0 * h1_norm_sq(u0, grid))
    if not breaking_criterion(h0, s / math.sqrt(2.0)):
        return None
    return math.log((h0 - s) / (h0 + s)) / s


def run_blowup_experiment(cfg: SimConfig, x0: float | None = None, traj=None) -> BlowupReport:
    """Integrate, detect breaking and compare the extrapolated time with T0.

    ``traj`` may be passed to reuse an existing integration of ``cfg``.
    """
    x0 = cfg.x0 if x0 is None else x0
    if x0 != cfg.x0:
        cfg = replace(cfg, x0=x0)
    grid = cfg.grid
    u0 = make_initial_data(cfg.initial_data, grid)
    energy0 = h1_norm_sq(u0, grid)
    norm0 = math.sqrt(energy0)
    h0 = slope_at(u0, x0, grid, cfg.initial_data)
    satisfied = breaking_criterion(h0, norm0)
    T0 = blowup_time_bound(u0, x0, grid, h0=h0)

    if traj is None:
        traj = integrate(cfg)
    rep = detect_blowup(traj, cfg)
    if rep is None:
        last = traj.rows[-1]
        rep = BlowupReport(math.nan, None, None, "none", last.min_ux)

    hyp = all(abs(r.uxx_x0) <= HYPOTHESIS_TOL * max(r.max_abs_uxx, 1e-300) for r in traj.rows)
    respected = None
    if satisfied and hyp and rep.T_est is not None and T0 is not None:
        respected = rep.T_est <= T0 * (1.0 + BOUND_TOL)
    return replace(rep, T0_bound=T0, h0=h0, u0_h1=norm0, criterion_satisfied=satisfied,
                   hypothesis_maintained=hyp, bound_respected=respected)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    termination: str
    drift: float
    helmholtz: float
    T_est: float | None
    riccati_worst: float | None


def observed_order(errors, ns) -> list:
    """``log2``-style orders between consecutive resolutions (spacing ratio aware)."""
    out = []
    for (e1, n1), (e2, n2) in zip(zip(errors, ns), zip(errors[1:], ns[1:])):
        if e1 is None or e2 is None or e1 <= 0 or e2 <= 0:
            out.append(None)
            continue
        ratio = (n2 - 1) / (n1 - 1)
        out.append(math.log(e1 / e2) / math.log(ratio))
    return out


def _study_one(cfg: SimConfig) -> ConvergenceRow:
    grid = cfg.grid
    traj = integrate(cfg)
    u0 = traj.snapshots[0].u
    w = kernel_table(grid.n).convolve(u0)
    res = helmholtz_residual(u0, w, grid)
    rep = detect_blowup(traj, cfg)
    ric = riccati_monitor(traj, cfg.x0, traj.energy0)
    return ConvergenceRow(
        n=cfg.n,
        termination=traj.termination,
        drift=conservation_drift(traj),
        helmholtz=res,
        T_est=None if rep is None else rep.T_est,
        riccati_worst=ric.worst_violation if ric.applicable else None,
    )


def convergence_study(cfg: SimConfig, ns, workers: int = 1) -> dict:
    """Run ``cfg`` at each resolution in ``ns``; returns rows and observed orders."""
    ns = [int(n) for n in ns]
    if len(ns) < 3:
        raise ConfigError(f"convergence_study needs at least 3 resolutions, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError(f"resolutions must be strictly increasing without duplicates: {ns}")
    if any(n % 2 == 0 for n in ns):
        raise ConfigError(f"resolutions must all be odd: {ns}")
    cfgs = [replace(cfg, n=n) for n in ns]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_study_one, cfgs))
    else:
        rows = [_study_one(c) for c in cfgs]
    T = [r.T_est for r in rows if r.T_est is not None]
    spread = None
    if len(T) == len(rows):
        spread = (max(T) - min(T)) / float(np.median(T))
    return {
        "rows": rows,
        "drift_order": observed_order([r.drift for r in rows], ns),
        "helmholtz_order": observed_order([r.helmholtz for r in rows], ns),
        "T_est_spread": spread,
    }
