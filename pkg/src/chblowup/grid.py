"""Uniform grid on [0, 1], finite-difference derivatives, quadrature and the
periodic Green's kernel of ``1 - d^2/dx^2``.

Fields are plain 1-D numpy arrays sampled at the grid nodes. Derivative
operators are sparse matrices cached per grid size, so repeated calls inside
the time loop cost one sparse mat-vec each.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import factorial

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError

MIN_NODES = 9

# Interior half-width and one-sided stencil length for each derivative order.
# diff1: 4th order everywhere (5-point centred, 5-point one-sided).
# diff2: 4th order everywhere (5-point centred, 6-point one-sided).
# diff3: 2nd order everywhere (5-point centred, 5-point one-sided).
_STENCILS = {1: (2, 5), 2: (2, 6), 3: (2, 5)}


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = i*h``, ``i = 0..n-1``, with ``h = 1/(n-1)``."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ConfigError(f"n must be an integer, got {self.n!r}")
        if self.n < MIN_NODES:
            raise ConfigError(f"n must be >= {MIN_NODES} (boundary stencils), got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n) * self.h
        x[-1] = 1.0
        x.setflags(write=False)
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        return w

    def node_index(self, x0: float, tol: float = 1e-12) -> int:
        """Index of the node at ``x0``; raises if ``x0`` is not a node."""
        i = int(round(x0 * (self.n - 1)))
        if not 0 <= i < self.n or abs(self.nodes[i] - x0) > tol:
            raise ConfigError(f"x0={x0} is not a node of a grid with n={self.n}")
        return i


def make_grid(n: int) -> Grid:
    return Grid(n)


def fd_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights (unit spacing) for the ``order``-th derivative
    on the given integer ``offsets``, exact for polynomials of degree
    ``len(offsets) - 1``."""
    offs = np.asarray(offsets, dtype=float)
    m = len(offs)
    if order >= m:
        raise ValueError("need more stencil points than the derivative order")
    A = np.vander(offs, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = factorial(order)
    return np.linalg.solve(A, rhs)


@lru_cache(maxsize=None)
def _diff_matrix(n: int, order: int) -> sp.csr_matrix:
    half, width = _STENCILS[order]
    h = 1.0 / (n - 1)
    centred = fd_weights(range(-half, half + 1), order)
    rows, cols, vals = [], [], []
    for i in range(n):
        if i < half:
            offs = np.arange(width) - i
            w = fd_weights(offs, order)
        elif i > n - 1 - half:
            # mirror of the left closure, so odd/even symmetry is exact
            offs = -(np.arange(width) - (n - 1 - i))
            w = fd_weights(-offs, order) * (-1) ** order
        else:
            offs = np.arange(-half, half + 1)
            w = centred
        rows.extend([i] * len(offs))
        cols.extend(i + offs)
        vals.extend(w / h**order)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _apply(f, grid: Grid, order: int) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError(f"field has shape {f.shape}, grid expects ({grid.n},)")
    return _diff_matrix(grid.n, order) @ f


def diff1(f, grid: Grid) -> np.ndarray:
    """First derivative, fourth order at every node."""
    return _apply(f, grid, 1)


def diff2(f, grid: Grid) -> np.ndarray:
    """Second derivative, fourth order at every node."""
    return _apply(f, grid, 2)


def diff3(f, grid: Grid) -> np.ndarray:
    """Third derivative, second order at every node."""
    return _apply(f, grid, 3)


def integrate(f, grid: Grid) -> float:
    """Trapezoidal quadrature of a sampled field over [0, 1]."""
    return float(np.dot(grid.weights, f))


def kernel_value(xi):
    """Periodic Green's kernel ``G(xi) = cosh(frac(xi) - 1/2) / (2 sinh(1/2))``."""
    xi = np.asarray(xi, dtype=float)
    frac = xi - np.floor(xi)
    out = np.cosh(frac - 0.5) / (2.0 * np.sinh(0.5))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel samples ``g_j = G(j*h)`` and the trapezoidal convolution matrix."""

    grid: Grid

    @cached_property
    def g_values(self) -> np.ndarray:
        n = self.grid.n
        j = np.arange(n)
        g = kernel_value(self.grid.nodes)
        # force g_j == g_{n-1-j} bit for bit
        g = np.where(j <= (n - 1) // 2, g, g[::-1])
        g[-1] = g[0]
        g.setflags(write=False)
        return g

    @property
    def quad_weights(self) -> np.ndarray:
        return self.grid.weights

    @cached_property
    def matrix(self) -> np.ndarray:
        # entry (i, j) = w_j * G(x_i - x_j); G(-d*h) = G(1 - d*h) = g_{n-1-d}
        n = self.grid.n
        d = np.subtract.outer(np.arange(n), np.arange(n))
        idx = np.where(d >= 0, d, n - 1 + d)
        m = self.g_values[idx] * self.quad_weights[None, :]
        m.setflags(write=False)
        return m

    def convolve(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.grid.n,):
            raise ValueError(
                f"field of shape {f.shape} does not live on the kernel grid (n={self.grid.n})"
            )
        return self.matrix @ f


@lru_cache(maxsize=8)
def kernel_table(n: int) -> KernelTable:
    """Shared, cached kernel table for grid size ``n``."""
    return KernelTable(Grid(n))


def convolve(kernel: KernelTable, f) -> np.ndarray:
    """``(G*f)(x_i) = int_0^1 G(x_i - y) f(y) dy`` by the trapezoidal rule."""
    return kernel.convolve(f)


def helmholtz_residual(f, w, grid: Grid, skip: int = 3) -> float:
    """Max interior value of ``|w - w'' - f|``; certifies ``(1 - d^2)(G*f) = f``."""
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    r = w - diff2(w, grid) - f
    return float(np.max(np.abs(r[skip:grid.n - skip])))
