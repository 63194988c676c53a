"""Acceptance criteria 1 to 11, one test each (criterion 2 is split by k).

Every test records a single ``PASS``/``FAIL`` line before asserting. The lines
are printed inline and repeated in the terminal summary. Run directly with
``python tests/test_acceptance.py`` to get just those lines.
"""
import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from chblowup.diagnostics import (
    agmon_check, conservation_drift, h1_norm_sq, lambda_identity_check, poincare_check,
    riccati_monitor, sup_bound_check,
)
from chblowup.dynamics import SimConfig, integrate
from chblowup.experiment import blowup_time_bound, observed_order, run_blowup_experiment
from chblowup.grid import helmholtz_residual, kernel_table, make_grid
from chblowup.initial_data import InitialDataSpec, make_initial_data

NS = (257, 513, 1025)
RESULTS: list[str] = []
_TIMES: dict = {}


def report(label, ok, detail):
    line = f"criterion {label:>3}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


@lru_cache(maxsize=None)
def sim(family, amplitude, k, n, t_end, rhs_form="u_form"):
    cfg = SimConfig(k=k, n=n, t_end=t_end, initial_data=InitialDataSpec(family, amplitude),
                    rhs_form=rhs_form)
    t0 = time.perf_counter()
    traj = integrate(cfg)
    _TIMES[(family, amplitude, k, n, t_end, rhs_form)] = time.perf_counter() - t0
    return cfg, traj


def wall(*key):
    """Seconds spent on the first integration of ``key``."""
    key = key + ("u_form",) * (6 - len(key))
    sim(*key)
    return _TIMES[key]


@lru_cache(maxsize=None)
def headline(n, amplitude=1.0):
    cfg, traj = sim("A", amplitude, 0.0, n, 0.5)
    return cfg, traj, run_blowup_experiment(cfg, traj=traj)


def fmt_orders(xs):
    return "[" + ", ".join("nan" if x is None else f"{x:.2f}" for x in xs) + "]"


def test_c01_kernel_inversion():
    t0 = time.perf_counter()
    fields = {
        "sin": lambda g: np.sin(2 * np.pi * g.nodes),
        "A": lambda g: make_initial_data(InitialDataSpec("A"), g),
    }
    ok = True
    parts = []
    for name, f in fields.items():
        res = []
        for n in NS:
            g = make_grid(n)
            u = f(g)
            res.append(helmholtz_residual(u, kernel_table(n).convolve(u), g))
        orders = observed_order(res, NS)
        ok &= res[1] <= 5e-3 and min(orders) >= 1.8
        parts.append(f"{name}: res513={res[1]:.2e} orders={fmt_orders(orders)}")
    dev = float(np.max(np.abs(kernel_table(1025).convolve(np.ones(1025)) - 1.0)))
    secs = time.perf_counter() - t0
    ok &= dev <= 1e-5 and secs <= 10
    report(1, ok, "; ".join(parts) + f"; |G*1-1|={dev:.2e}; {secs:.1f}s")


@pytest.mark.parametrize("k", [0.5, 0.0, 2.0])
def test_c02_conservation(k):
    secs = wall("C", -0.1, k, 513, 1.0)
    drifts, terms = [], []
    for n in (513, 1025):
        _, traj = sim("C", -0.1, k, n, 1.0)
        drifts.append(conservation_drift(traj))
        terms.append(traj.termination)
    order = observed_order(drifts, (513, 1025))[0]
    ok = (drifts[0] <= 1e-4 and order is not None and order >= 1.8
          and secs <= 60 and terms == ["completed", "completed"])
    report(f"2{'abc'[[0.5, 0.0, 2.0].index(k)]}", ok,
           f"k={k}: drift513={drifts[0]:.2e} drift1025={drifts[1]:.2e} order={fmt_orders([order])} "
           f"terminations={terms}; {secs:.1f}s")


def test_c03_sup_bound():
    keys = [("C", -0.1, k, n, 1.0) for k in (0.0, 0.5, 2.0) for n in (513, 1025)]
    keys += [("A", 1.0, 0.0, n, 0.5) for n in NS] + [("A", 2.0, 0.0, 1025, 0.5)]
    keys += [("C", -0.1, 0.0, n, 0.05, "m_form") for n in NS]
    keys += [("C", a, 0.0, 513, 0.5) for a in (-0.1, -0.101)]
    ratios = {}
    bad = []
    for key in keys:
        _, traj = sim(*key)
        e0 = traj.energy0
        ratios[key] = max(r.max_abs_u for r in traj.rows) / (2 * math.sqrt(e0))
        if not sup_bound_check(traj, e0):
            bad.append(f"{key[0]} a={key[1]} k={key[2]} n={key[3]}: {ratios[key]:.1f}")
    detail = f"{len(keys)} trajectories; worst max|u| / (2||u0||_1) = {max(ratios.values()):.3f}"
    if bad:
        detail += "; violations: " + ", ".join(bad)
    report(3, not bad, detail)


def test_c04_functional_inequalities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240611)
    g = make_grid(257)
    modes = np.arange(1, 13)
    basis = np.sin(np.pi * np.outer(modes, g.nodes))
    fails = 0
    for _ in range(1000):
        c = rng.standard_normal(modes.size) * rng.random(modes.size) ** 2 * rng.uniform(0.01, 100)
        u = c @ basis
        u[0] = 0.0
        fails += (not agmon_check(u, g)[2]) + (not poincare_check(u, g)[2])
    secs = time.perf_counter() - t0
    report(4, fails == 0 and secs <= 10, f"1000 sine mixtures, {fails} failures; {secs:.1f}s")


def test_c05_lambda_identity():
    fields = {
        "A": lambda g: make_initial_data(InitialDataSpec("A"), g),
        "B": lambda g: make_initial_data(InitialDataSpec("B"), g),
        "x^2(1-x)^2": lambda g: g.nodes**2 * (1 - g.nodes) ** 2,
    }
    ok = True
    parts = []
    for name, f in fields.items():
        rel = [lambda_identity_check(f(make_grid(n)))[2] for n in NS]
        orders = observed_order(rel, NS)
        ok &= rel[1] <= 1e-3 and all(o is not None and o >= 1.8 for o in orders)
        parts.append(f"{name}: rel513={rel[1]:.2e} orders={fmt_orders(orders)}")
    report(5, ok, "; ".join(parts))


def test_c06_form_equivalence():
    gaps = []
    for n in NS:
        _, tu = sim("C", -0.1, 0.0, n, 0.05)
        _, tm = sim("C", -0.1, 0.0, n, 0.05, "m_form")
        su, sm = tu.snapshots[-1], tm.snapshots[-1]
        assert su.t == sm.t == 0.05
        gaps.append(float(np.max(np.abs(su.u - sm.u))))
    orders = observed_order(gaps, NS)
    ok = gaps[1] <= 5e-3 and orders[-1] is not None and orders[-1] >= 1.8
    report(6, ok, f"k=0: gaps={[f'{x:.2e}' for x in gaps]} orders={fmt_orders(orders)}")


def test_c07_blowup_criterion():
    secs = wall("A", 1.0, 0.0, 1025, 0.5)
    cfg, traj, rep = headline(1025)
    T = [headline(n)[2].T_est for n in NS]
    spread = (max(T) - min(T)) / float(np.median(T))
    ok = (traj.termination == "blowup_detected"
          and rep.T_est is not None and rep.T_est <= rep.T0_bound * 1.02
          and spread <= 0.05 and 0.4 <= rep.fit_slope <= 0.6
          and rep.hypothesis_maintained and secs <= 120)
    report(7, ok, f"{traj.termination} ({rep.trigger}) t_cross={rep.t_cross:.4f} T_est={rep.T_est:.4f} "
                  f"T0={rep.T0_bound:.4f} spread={100 * spread:.2f}% slope={rep.fit_slope:.3f} "
                  f"hypothesis={rep.hypothesis_maintained}; {secs:.1f}s")


def test_c08_scaling_law():
    T1 = headline(1025)[2].T_est
    T2 = headline(1025, 2.0)[2].T_est
    ratio = T2 / T1
    report(8, 0.45 <= ratio <= 0.55, f"T_est(2)={T2:.4f} T_est(1)={T1:.4f} ratio={ratio:.4f}")


def test_c09_riccati():
    cfg, traj, _ = headline(1025)
    res = riccati_monitor(traj, cfg.x0, traj.energy0, window_min_ux=-100.0)
    ok = res.applicable and res.worst_violation <= res.tol
    t = np.array([r.t for r in traj.rows])
    h = np.array([r.h_x0 for r in traj.rows])
    slack = np.gradient(h, t, edge_order=2) + h * h / 2 - traj.energy0
    onset = f"{h[np.argmax(slack > 0)]:.1f}" if np.any(slack > 0) else "none"
    report(9, ok, f"worst={res.worst_violation:.4g} tol={res.tol:.3g} samples={res.n_samples} "
                  f"first positive slack at h={onset}, run ends at h={h[-1]:.1f}")


def test_c10_control():
    cfg, traj = sim("C", -0.1, 0.0, 513, 1.0)
    rep = run_blowup_experiment(cfg, traj=traj)
    u0 = traj.snapshots[0].u
    ok = (traj.termination == "completed" and traj.blowup_trigger is None
          and blowup_time_bound(u0, 0.5, cfg.grid) is None and rep.criterion_satisfied is False)
    report(10, ok, f"{traj.termination} at t={traj.t_final}; h0={rep.h0:.4f} criterion={rep.criterion_satisfied}; "
                   f"min u_x={min(r.min_ux for r in traj.rows):.4f}")


def test_c11_continuous_dependence():
    _, ta = sim("C", -0.1, 0.0, 513, 0.5)
    _, tb = sim("C", -0.101, 0.0, 513, 0.5)
    pairs = list(zip(ta.snapshots, tb.snapshots))
    same_times = len(ta.snapshots) == len(tb.snapshots) and all(a.t == b.t for a, b in pairs)
    dist = max(float(np.max(np.abs(a.u - b.u))) for a, b in pairs)
    ok = same_times and ta.t_final == tb.t_final == 0.5 and dist <= 1e-2
    report(11, ok, f"{len(pairs)} shared snapshots up to t=0.5, max distance {dist:.3e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
