from functools import lru_cache

import pytest

from chblowup.dynamics import SimConfig, integrate
from chblowup.experiment import run_blowup_experiment
from chblowup.initial_data import InitialDataSpec


def make_cfg(family="A", amplitude=1.0, k=0.0, n=257, t_end=1.0, **kw):
    return SimConfig(k=k, n=n, t_end=t_end, initial_data=InitialDataSpec(family, amplitude), **kw)


@lru_cache(maxsize=None)
def cached_run(family="A", amplitude=1.0, k=0.0, n=257, t_end=1.0, rhs_form="u_form", record_stride=10):
    cfg = make_cfg(family, amplitude, k, n, t_end, rhs_form=rhs_form, record_stride=record_stride)
    return cfg, integrate(cfg)


@lru_cache(maxsize=None)
def cached_blowup(amplitude=1.0, n=1025, k=0.0):
    cfg, traj = cached_run("A", amplitude, k, n, 0.5)
    return cfg, traj, run_blowup_experiment(cfg, traj=traj)


@pytest.fixture
def run():
    return cached_run


@pytest.fixture
def blowup():
    return cached_blowup


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
