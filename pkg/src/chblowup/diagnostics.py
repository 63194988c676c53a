"""Norms, conservation drift and the functional inequalities behind the
breaking argument, evaluated on sampled fields and recorded trajectories."""
from __future__ import annotations

from dataclasses import dataclass, astuple, fields
import math

import numpy as np

from .errors import PreconditionError
from .grid import Grid, diff1, diff2, diff3, integrate, kernel_table

HOLDS_TOL = 1e-10
SLOPE_TOL = 1e-4
SUP_TOL = 1e-8

# Column order of the time-series CSV.
CSV_COLUMNS = (
    "t", "energy", "energy_drift_rel", "max_abs_u", "min_ux", "h_x0", "uxx_x0",
    "neumann_res_0", "neumann_res_1", "conv_min", "dt",
)


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    energy: float
    energy_drift_rel: float
    max_abs_u: float
    min_ux: float
    h_x0: float
    uxx_x0: float
    neumann_res_0: float
    neumann_res_1: float
    conv_min: float
    dt: float
    # not serialized: needed by the hypothesis monitor and the resolution guard
    max_abs_uxx: float = 0.0
    spike_width: int = 0

    def csv_values(self) -> tuple:
        return astuple(self)[: len(CSV_COLUMNS)]


assert tuple(f.name for f in fields(DiagnosticsRow))[: len(CSV_COLUMNS)] == CSV_COLUMNS


def _grid_of(u) -> Grid:
    return Grid(len(u))


def h1_norm_sq(u, grid: Grid | None = None) -> float:
    """``int_0^1 (u^2 + u_x^2) dx``."""
    u = np.asarray(u, dtype=float)
    grid = grid or _grid_of(u)
    ux = diff1(u, grid)
    return integrate(u * u + ux * ux, grid)


def spike_width(ux) -> int:
    """Number of nodes where u_x sits below half of its (negative) minimum."""
    m = float(np.min(ux))
    if m >= 0:
        return len(ux)
    return int(np.count_nonzero(ux <= 0.5 * m))


def compute_row(u, t: float, dt: float, energy0: float, x0_index: int,
                grid: Grid | None = None) -> DiagnosticsRow:
    u = np.asarray(u, dtype=float)
    grid = grid or _grid_of(u)
    ux = diff1(u, grid)
    uxx = diff2(u, grid)
    energy = integrate(u * u + ux * ux, grid)
    drift = abs(energy - energy0) / energy0 if energy0 > 0 else abs(energy - energy0)
    conv = kernel_table(grid.n).convolve(u * u + 0.5 * ux * ux)
    return DiagnosticsRow(
        t=float(t),
        energy=energy,
        energy_drift_rel=drift,
        max_abs_u=float(np.max(np.abs(u))),
        min_ux=float(np.min(ux)),
        h_x0=float(ux[x0_index]),
        uxx_x0=float(uxx[x0_index]),
        neumann_res_0=float(abs(ux[0])),
        neumann_res_1=float(abs(ux[-1])),
        conv_min=float(np.min(conv)),
        dt=float(dt),
        max_abs_uxx=float(np.max(np.abs(uxx))),
        spike_width=spike_width(ux),
    )


def conservation_drift(traj, until_min_ux: float | None = None) -> float:
    """Largest relative H^1-energy drift over the recorded rows.

    With ``until_min_ux`` only the leading rows with ``min_ux >= until_min_ux``
    are considered (pre-breaking window).
    """
    rows = traj.rows
    if until_min_ux is not None:
        rows = _leading(rows, lambda r: r.min_ux >= until_min_ux)
    if len(rows) < 2:
        return 0.0
    return max(r.energy_drift_rel for r in rows)


def _leading(rows, keep):
    out = []
    for r in rows:
        if not keep(r):
            break
        out.append(r)
    return out


def lambda_identity_check(u, grid: Grid | None = None, tol: float = 1e-8):
    """Integration-by-parts identity for ``Lambda^2 = 1 - d^2/dx^2`` on H^2_{0,1}:

        int (u - u_xx) u + int (u_x - u_xxx) u_x = |u|^2 + 2|u_x|^2 + |u_xx|^2

    Returns ``(lhs, rhs, rel_err)``.
    """
    u = np.asarray(u, dtype=float)
    grid = grid or _grid_of(u)
    ux = diff1(u, grid)
    uxx = diff2(u, grid)
    uxxx = diff3(u, grid)
    scale = max(1.0, float(np.max(np.abs(u))))
    # end slopes from diff1 carry O(h^4) truncation error, so they are judged
    # against the interior gradient rather than an absolute tolerance
    slope_scale = float(np.max(np.abs(ux)))
    bvals = (u[0], u[-1])
    if max(abs(b) for b in bvals) > tol * scale or max(abs(ux[0]), abs(ux[-1])) > SLOPE_TOL * slope_scale:
        raise PreconditionError(
            "lambda identity needs u(0)=u(1)=u_x(0)=u_x(1)=0; got "
            f"{u[0]:.2e}, {u[-1]:.2e}, {ux[0]:.2e}, {ux[-1]:.2e}"
        )
    lhs = integrate((u - uxx) * u, grid) + integrate((ux - uxxx) * ux, grid)
    rhs = integrate(u * u, grid) + 2 * integrate(ux * ux, grid) + integrate(uxx * uxx, grid)
    rel = abs(lhs - rhs) / rhs if rhs > 0 else abs(lhs - rhs)
    return lhs, rhs, rel


def agmon_check(u, grid: Grid | None = None):
    """``int u^2 <= 2 u(0)^2 + 4 int u_x^2``; returns ``(lhs, rhs, holds)``."""
    u = np.asarray(u, dtype=float)
    grid = grid or _grid_of(u)
    ux = diff1(u, grid)
    lhs = integrate(u * u, grid)
    rhs = 2 * u[0] ** 2 + 4 * integrate(ux * ux, grid)
    return lhs, float(rhs), bool(lhs <= rhs + HOLDS_TOL)


def poincare_check(u, grid: Grid | None = None):
    """``max u^2 <= u(0)^2 + 2 sqrt(int u^2) sqrt(int u_x^2)``; returns ``(lhs, rhs, holds)``."""
    u = np.asarray(u, dtype=float)
    grid = grid or _grid_of(u)
    ux = diff1(u, grid)
    lhs = float(np.max(u * u))
    rhs = u[0] ** 2 + 2 * math.sqrt(integrate(u * u, grid)) * math.sqrt(integrate(ux * ux, grid))
    return lhs, float(rhs), bool(lhs <= rhs + HOLDS_TOL)


def sup_bound_check(traj, u0_h1: float) -> bool:
    """``max|u| <= 2 ||u0||_1`` at every recorded time; ``u0_h1`` is the squared norm."""
    bound = 2.0 * math.sqrt(u0_h1) + SUP_TOL
    return all(r.max_abs_u <= bound for r in traj.rows)


@dataclass(frozen=True)
class RiccatiResult:
    applicable: bool
    worst_violation: float
    tol: float
    n_samples: int
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.applicable and self.worst_violation <= self.tol


def _derivative(t, y):
    # centred differences inside, one-sided at the ends (non-uniform spacing)
    return np.gradient(y, t, edge_order=2)


def riccati_monitor(traj, x0: float, u0_h1: float, window_min_ux: float = -100.0,
                    hyp_tol: float = 1e-3, tol_factor: float = 10.0) -> RiccatiResult:
    """Check ``h' <= -h^2/2 + ||u0||_1^2`` for ``h(t) = u_x(x0, t)``.

    ``u0_h1`` is the squared H^1 norm of the initial data. Only rows before the
    first one with ``min_ux < window_min_ux`` are used. The inequality relies on
    ``u_xx(x0, t) = 0``; if that drifts beyond ``hyp_tol * max|u_xx|`` the
    result is flagged inapplicable instead of failed. ``x0`` is informational:
    the rows already carry the samples taken at the configured node.
    """
    rows = _leading(traj.rows, lambda r: r.min_ux >= window_min_ux)
    if len(rows) < 5:
        return RiccatiResult(False, math.nan, math.nan, len(rows), "fewer than 5 samples")
    for r in rows:
        if abs(r.uxx_x0) > hyp_tol * max(r.max_abs_uxx, 1e-300):
            return RiccatiResult(
                False, math.nan, math.nan, len(rows),
                f"u_xx(x0={x0}) drifted to {r.uxx_x0:.3e} at t={r.t:.4g}",
            )
    t = np.array([r.t for r in rows])
    h = np.array([r.h_x0 for r in rows])
    dh = _derivative(t, h)
    excess = dh + 0.5 * h * h - u0_h1
    worst = float(np.max(excess))
    # derivative-estimate error from a stride-2 resampling of the same samples
    dh2 = _derivative(t[::2], h[::2])
    err = float(np.max(np.abs(dh2 - dh[::2]))) if len(t) >= 6 else 0.0
    return RiccatiResult(True, worst, tol_factor * err, len(rows))
