import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chblowup.diagnostics import (
    CSV_COLUMNS, DiagnosticsRow, agmon_check, conservation_drift, h1_norm_sq,
    lambda_identity_check, poincare_check, riccati_monitor, spike_width, sup_bound_check,
)
from chblowup.dynamics import TrajectoryRecord
from chblowup.errors import PreconditionError
from chblowup.grid import make_grid

# 5/8 + 4 pi^2 and 5/8 + 8 pi^2 + 40 pi^4, from the sine expansion of family A
FAMILY_A_H1 = 40.10341760435743
FAMILY_A_LAMBDA_RHS = 3975.945476568812


def family_a(n, a=1.0):
    x = make_grid(n).nodes
    return a * (np.sin(2 * np.pi * x) - 0.5 * np.sin(4 * np.pi * x))


def rows_from(pairs):
    """TrajectoryRecord from (t, h) samples with the other columns benign."""
    traj = TrajectoryRecord()
    for t, h in pairs:
        traj.rows.append(DiagnosticsRow(
            t=t, energy=1.0, energy_drift_rel=0.0, max_abs_u=0.0, min_ux=h, h_x0=h,
            uxx_x0=0.0, neumann_res_0=0.0, neumann_res_1=0.0, conv_min=0.0, dt=0.0,
            max_abs_uxx=1.0, spike_width=9))
    return traj


class TestH1Norm:
    def test_zero(self):
        assert h1_norm_sq(np.zeros(33)) == 0.0

    def test_family_a(self):
        assert h1_norm_sq(family_a(1025)) == pytest.approx(FAMILY_A_H1, rel=1e-5)

    @given(st.floats(-100, 100, allow_nan=False))
    def test_homogeneity(self, a):
        u = family_a(129)
        assert h1_norm_sq(a * u) == pytest.approx(a * a * h1_norm_sq(u), rel=1e-12, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_positive_off_zero(self, seed):
        u = np.random.default_rng(seed).standard_normal(33)
        assert h1_norm_sq(u) > 0


class TestDrift:
    def test_single_row(self):
        assert conservation_drift(rows_from([(0.0, -1.0)])) == 0.0

    def test_window(self):
        traj = rows_from([(0.0, -1.0), (0.1, -2.0), (0.2, -60.0)])
        traj.rows[2] = replace(traj.rows[2], energy_drift_rel=0.5)
        assert conservation_drift(traj) == 0.5
        assert conservation_drift(traj, until_min_ux=-50) == 0.0


class TestLambdaIdentity:
    def test_family_a(self):
        lhs, rhs, rel = lambda_identity_check(family_a(513))
        assert rhs == pytest.approx(FAMILY_A_LAMBDA_RHS, rel=1e-3)
        assert rel <= 1e-3

    def test_zero(self):
        lhs, rhs, rel = lambda_identity_check(np.zeros(33))
        assert lhs == rhs == 0.0

    def test_polynomial(self):
        x = make_grid(513).nodes
        lhs, rhs, rel = lambda_identity_check(50 * x**2 * (1 - x) ** 2)
        # 2500 * 0.83968..., quadrature of |v|^2 + 2|v'|^2 + |v''|^2 by mpmath
        assert rhs == pytest.approx(2500 * 0.8396825396825397, rel=1e-4)
        assert rel <= 1e-3

    def test_boundary_precondition(self):
        x = make_grid(65).nodes
        with pytest.raises(PreconditionError):
            lambda_identity_check(np.sin(np.pi * x))
        with pytest.raises(PreconditionError):
            lambda_identity_check(np.ones(65))


class TestInequalities:
    def test_agmon_sin(self):
        lhs, rhs, ok = agmon_check(np.sin(np.pi * make_grid(1025).nodes))
        assert lhs == pytest.approx(0.5, rel=1e-6)
        assert rhs == pytest.approx(2 * np.pi**2, rel=1e-6)
        assert ok

    def test_agmon_zero_and_constant(self):
        assert agmon_check(np.zeros(17))[2]
        lhs, rhs, ok = agmon_check(np.full(17, 3.0))
        assert lhs == pytest.approx(9.0) and rhs == pytest.approx(18.0) and ok

    def test_poincare_sin(self):
        lhs, rhs, ok = poincare_check(np.sin(np.pi * make_grid(1025).nodes))
        assert lhs == pytest.approx(1.0, abs=1e-9)
        assert rhs == pytest.approx(np.pi, rel=1e-6)
        assert ok

    def test_poincare_zero(self):
        lhs, rhs, ok = poincare_check(np.zeros(17))
        assert lhs == rhs == 0.0 and ok

    def test_poincare_family_a(self):
        assert poincare_check(family_a(513))[2]


class TestSupBound:
    def test_zero(self):
        traj = rows_from([(0.0, 0.0), (0.1, 0.0)])
        assert sup_bound_check(traj, 0.0)

    def test_violation(self):
        traj = rows_from([(0.0, 0.0)])
        traj.rows[0] = replace(traj.rows[0], max_abs_u=3.0)
        assert not sup_bound_check(traj, 1.0)
        assert sup_bound_check(traj, 2.25)


class TestRiccati:
    def test_zero_trajectory(self):
        traj = rows_from([(0.01 * i, 0.0) for i in range(10)])
        for i, r in enumerate(traj.rows):
            traj.rows[i] = replace(r, max_abs_uxx=0.0)
        res = riccati_monitor(traj, 0.5, 0.0)
        assert res.applicable
        assert res.worst_violation == 0.0
        assert res.holds

    def test_exact_riccati_solution(self):
        # equality case h' = -h^2/2 + c^2: h = -c sqrt2 coth(b - c t / sqrt2)
        c2 = 4.0
        c = math.sqrt(c2)
        t = np.linspace(0, 0.2, 200)
        h = -c * math.sqrt(2) / np.tanh(0.5 - c * t / math.sqrt(2))
        res = riccati_monitor(rows_from(zip(t, h)), 0.5, c2, window_min_ux=-1e9)
        assert res.applicable
        assert abs(res.worst_violation) <= res.tol + 1e-9

    def test_detects_violation(self):
        t = np.linspace(0, 0.2, 200)
        h = 50 * t  # h' = 50 > 0 + 1 - h^2/2 early on
        res = riccati_monitor(rows_from(zip(t, h)), 0.5, 1.0, window_min_ux=-1e9)
        assert res.applicable and not res.holds

    def test_hypothesis_drift_inapplicable(self):
        traj = rows_from([(0.01 * i, -1.0 - i) for i in range(10)])
        r = traj.rows[5]
        traj.rows[5] = replace(r, uxx_x0=0.5)
        res = riccati_monitor(traj, 0.5, 1.0)
        assert not res.applicable
        assert "drifted" in res.reason


def test_spike_width():
    assert spike_width(np.array([0.0, -1.0, -4.0, -1.0, 0.0])) == 1
    assert spike_width(np.array([1.0, 2.0])) == 2


def test_csv_columns():
    assert ",".join(CSV_COLUMNS) == (
        "t,energy,energy_drift_rel,max_abs_u,min_ux,h_x0,uxx_x0,"
        "neumann_res_0,neumann_res_1,conv_min,dt"
    )
