"""Initial-data families on [0, 1], all vanishing with their slope at both ends.

A: ``a (sin 2pi x - sin(4 pi x)/2)``, odd about x = 1/2, breaks for every a > 0.
B: ``a x^2 (1-x)^2 sin 3pi x``, no symmetry.
C: family A with a < 0; the slope at 1/2 is positive, so no breaking criterion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Grid, diff1

FAMILIES = ("A", "B", "C", "custom_samples")
SYMMETRIC_FAMILIES = ("A", "C")
BOUNDARY_TOL = 1e-10


def _family_a(x):
    s = 2 * np.pi * x
    return np.sin(s) - 0.5 * np.sin(2 * s)


def _family_a_dx(x):
    s = 2 * np.pi * x
    return 2 * np.pi * (np.cos(s) - np.cos(2 * s))


def _family_b(x):
    return x**2 * (1 - x) ** 2 * np.sin(3 * np.pi * x)


def _family_b_dx(x):
    return (2 * x * (1 - x) * (1 - 2 * x) * np.sin(3 * np.pi * x)
            + 3 * np.pi * x**2 * (1 - x) ** 2 * np.cos(3 * np.pi * x))


@dataclass(frozen=True)
class InitialDataSpec:
    family: str
    amplitude: float = 1.0
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown initial-data family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "C" and not self.amplitude < 0:
            raise ConfigError(f"family C requires a negative amplitude, got {self.amplitude}")
        if self.family == "custom_samples" and len(self.samples) == 0:
            raise ConfigError("custom_samples needs explicit node values")

    @property
    def symmetric(self) -> bool:
        return self.family in SYMMETRIC_FAMILIES

    def derivative(self, x):
        """Analytic u0'(x) for the closed-form families (None for samples)."""
        if self.family in SYMMETRIC_FAMILIES:
            return self.amplitude * _family_a_dx(np.asarray(x, dtype=float))
        if self.family == "B":
            return self.amplitude * _family_b_dx(np.asarray(x, dtype=float))
        return None


def make_initial_data(spec: InitialDataSpec, grid: Grid) -> np.ndarray:
    x = grid.nodes
    n = grid.n
    if spec.family == "custom_samples":
        u = np.array(spec.samples, dtype=float)
        if u.shape != (n,):
            raise ConfigError(f"custom_samples has {u.size} values, grid has n={n}")
        if not np.all(np.isfinite(u)):
            raise ConfigError("custom_samples contains non-finite values")
        return u
    if spec.symmetric:
        if n % 2 == 0:
            raise ConfigError("n must be odd for symmetric families")
        c = (n - 1) // 2
        u = np.empty(n)
        u[:c] = spec.amplitude * _family_a(x[:c])
        u[c] = 0.0
        u[c + 1:] = -u[:c][::-1]
    else:
        u = spec.amplitude * _family_b(x)
    u[0] = u[-1] = 0.0
    return u


def boundary_values(u, grid: Grid, spec: InitialDataSpec | None = None):
    """``(u(0), u(1), u_x(0), u_x(1))``; slopes are analytic when the family
    has a closed form, otherwise taken from ``diff1``."""
    u = np.asarray(u, dtype=float)
    dx = spec.derivative(np.array([0.0, 1.0])) if spec is not None else None
    if dx is None:
        ux = diff1(u, grid)
        dx = np.array([ux[0], ux[-1]])
    return float(u[0]), float(u[-1]), float(dx[0]), float(dx[1])


def check_boundary(u, grid: Grid, spec: InitialDataSpec | None = None,
                   tol: float = BOUNDARY_TOL, slope_tol: float | None = None) -> None:
    """Raise ConfigError unless u lies in H^2_{0,1} up to the tolerances.

    ``slope_tol`` applies to finite-difference slopes of raw samples, which
    carry the stencil truncation error; it defaults to ``tol``.
    """
    u0, u1, d0, d1 = boundary_values(u, grid, spec)
    stol = tol if slope_tol is None else slope_tol
    bad = []
    if abs(u0) > tol:
        bad.append(f"u(0)={u0:.3e}")
    if abs(u1) > tol:
        bad.append(f"u(1)={u1:.3e}")
    if abs(d0) > stol:
        bad.append(f"u_x(0)={d0:.3e}")
    if abs(d1) > stol:
        bad.append(f"u_x(1)={d1:.3e}")
    if bad:
        raise ConfigError("initial data violates the boundary conditions: " + ", ".join(bad))
