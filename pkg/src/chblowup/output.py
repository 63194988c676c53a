"""CSV time series, JSON run summaries and static plots."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
VERDICTS = ("pass", "fail", "inapplicable")


def verdict(ok) -> str:
    if ok is None:
        return "inapplicable"
    return "pass" if ok else "fail"


def write_timeseries(traj, path) -> Path:
    """One CSV row per recorded step; floats are written with ``repr`` so a
    reload reproduces them exactly."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in traj.rows:
            w.writerow([repr(float(v)) for v in row.csv_values()])
    return path


def read_timeseries(path) -> dict:
    """Column name -> numpy array, for a file written by ``write_timeseries``."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in line] for line in r]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


@dataclass
class RunSummary:
    config: dict
    termination: str
    t_final: float
    max_drift: float
    sup_bound: str
    agmon_u0: str
    poincare_u0: str
    blowup: dict | None = None
    wall_clock_s: float = 0.0
    extra: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdicts"] = {k: d.pop(k) for k in ("sup_bound", "agmon_u0", "poincare_u0")}
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_summary(summary: RunSummary, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(summary.to_dict()), indent=2, sort_keys=True) + "\n")
    return path


def _waterfall(traj, ax):
    snaps = traj.snapshots
    x = np.linspace(0.0, 1.0, len(snaps[0].u))
    step = max(1, len(snaps) // 30)
    shown = snaps[::step]
    scale = max(float(np.max(np.abs(s.u))) for s in shown) or 1.0
    offset = 0.6 * scale
    for i, s in enumerate(shown):
        ax.plot(x, s.u + i * offset, lw=0.7, color="k")
    ax.set_xlabel("x")
    ax.set_ylabel("u(x, t) + offset")
    ax.set_title(f"u at {len(shown)} snapshots, t in [0, {shown[-1].t:.4g}]")


def _energy(traj, ax):
    t = [r.t for r in traj.rows]
    ax.plot(t, [r.energy for r in traj.rows], label="E(t)")
    ax.axhline(traj.rows[0].energy, ls="--", color="gray", label="E(0)")
    ax.set_xlabel("t")
    ax.set_ylabel("int u^2 + u_x^2")
    ax.legend()


def blowup_figure(traj, report=None):
    """min u_x over time; when a report is given also the fitted ``1/h`` line
    (twin axis) and vertical markers at T_est and T0."""
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    t = np.array([r.t for r in traj.rows])
    h = np.array([r.min_ux for r in traj.rows])
    ax.plot(t, h, label="min u_x")
    ax.set_xlabel("t")
    ax.set_ylabel("min u_x")
    if report is not None:
        if report.T_est is not None and report.fit_slope is not None:
            T = report.T_est
            tt = np.linspace(t[0], T, 50)
            ax2 = ax.twinx()
            neg = h < 0
            ax2.plot(t[neg], 1.0 / h[neg], ".", ms=2, color="C1", label="1/min u_x")
            ax2.plot(tt, report.fit_slope * (tt - T), "--", color="C1", label="1/h fit")
            ax2.set_ylabel("1 / min u_x")
            ax.axvline(T, color="C2", ls=":", label=f"T_est = {T:.4g}")
        if report.T0_bound is not None:
            ax.axvline(report.T0_bound, color="C3", ls="-.", label=f"T0 = {report.T0_bound:.4g}")
    ax.legend(loc="lower left")
    return fig


def emit_plots(traj, out_dir, report=None) -> list:
    """Best effort: failures are logged and never raised."""
    if not traj.rows or len(traj.rows) < 2 or not traj.snapshots:
        log.info("empty trajectory, plots skipped")
        return []
    out_dir = Path(out_dir)
    written = []
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        for name, draw in (("waterfall.png", _waterfall), ("energy.png", _energy)):
            fig, ax = plt.subplots(figsize=(7, 4))
            draw(traj, ax)
            fig.tight_layout()
            fig.savefig(out_dir / name, dpi=110)
            plt.close(fig)
            written.append(out_dir / name)
        fig = blowup_figure(traj, report)
        fig.tight_layout()
        fig.savefig(out_dir / "min_ux.png", dpi=110)
        plt.close(fig)
        written.append(out_dir / "min_ux.png")
    except Exception as exc:  # plotting must not abort a run
        log.warning("plotting failed: %s", exc)
    return written
