"""Fidelity sweeps over coupling/crosstalk and detuning/asymmetry grids."""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import mhz_to_rad_per_ns, rad_per_ns_to_mhz
from .dynamics import IntegratorConfig
from .hilbert import DomainError
from .model import ModelParams
from .protocol import InputState, run_transfer

COUPLING_HEADER = ("g_over_2pi_MHz", "g12_ratio", "fidelity")
DETUNING_HEADER = ("delta_over_2pi_MHz", "c", "fidelity")

DEFAULT_G_GRID_MHZ = tuple(float(v) for v in range(10, 201, 10))
DEFAULT_G12_RATIOS = (0.0, 0.1, 1.0)
DEFAULT_DELTA_GRID_MHZ = tuple(float(v) for v in range(-80, 81, 10))
DEFAULT_C_GRID = tuple(round(0.95 + 0.01 * k, 2) for k in range(11))


class SweepError(RuntimeError):
    """A grid point failed; the message identifies it."""


@dataclass(frozen=True)
class SweepTable:
    """Sweep result in grid order.

    ``diagnostics`` holds ``(max_trace_drift, min_eigenvalue)`` per row and is
    not written to CSV.
    """

    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    diagnostics: tuple[tuple[float, float], ...] = ()

    def column(self, name: str) -> np.ndarray:
        return np.array([r[self.header.index(name)] for r in self.rows])

    def lookup(self, *key: float, tol: float = 1e-9) -> float:
        """Fidelity of the row whose leading columns match ``key``."""
        for row in self.rows:
            if all(abs(a - b) <= tol for a, b in zip(row, key)):
                return row[-1]
        raise KeyError(key)


def _evaluate(job):
    label, p, s, cfg = job
    try:
        res = run_transfer(p, s, cfg)
    except Exception as exc:
        raise SweepError(f"grid point {label} failed: {exc}") from exc
    return res.fidelity, (res.max_trace_drift, res.min_eigenvalue)


def _run_grid(jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate(j) for j in jobs]
    # map() yields in submission order, so rows come back in grid order
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, jobs))


def sweep_coupling(
    g_grid,
    g12_ratios,
    base: ModelParams,
    s: InputState,
    cfg: IntegratorConfig = IntegratorConfig(),
    workers: int = 1,
) -> SweepTable:
    """Fidelity over g (rad/ns) x crosstalk ratio g12/g, at zero detuning.

    Rows are ordered g-major and report g/2pi in MHz.
    """
    if base.delta != 0:
        raise DomainError("coupling sweep requires zero detuning in the base parameters")
    jobs, keys = [], []
    for g, r in itertools.product(g_grid, g12_ratios):
        p = replace(base, g_eg_1=g, g_eg_2=g, g_fg_1=g, g_fg_2=g, g12=r * g)
        g_mhz = rad_per_ns_to_mhz(g)
        keys.append((g_mhz, float(r)))
        jobs.append(((f"g/2pi={g_mhz:g} MHz", f"g12/g={r:g}"), p, s, cfg))
    results = _run_grid(jobs, workers)
    return SweepTable(COUPLING_HEADER, tuple((*k, f) for k, (f, _) in zip(keys, results)),
                      tuple(d for _, d in results))


def sweep_detuning_asymmetry(
    delta_grid,
    c_grid,
    base: ModelParams,
    s: InputState,
    cfg: IntegratorConfig = IntegratorConfig(),
    workers: int = 1,
) -> SweepTable:
    """Fidelity over detuning delta (rad/ns) x coupling ratio c = g_fg / g_eg.

    ``g_eg_1`` of ``base`` sets g for both qutrits; the crosstalk and all
    rates are taken from ``base`` unchanged.
    """
    g = base.g_eg_1
    if g <= 0:
        raise DomainError("base.g_eg_1 must be positive")
    jobs, keys = [], []
    for d, c in itertools.product(delta_grid, c_grid):
        p = replace(base, g_eg_1=g, g_eg_2=g, g_fg_1=c * g, g_fg_2=c * g, delta=d)
        d_mhz = rad_per_ns_to_mhz(d)
        keys.append((d_mhz, float(c)))
        jobs.append(((f"delta/2pi={d_mhz:g} MHz", f"c={c:g}"), p, s, cfg))
    results = _run_grid(jobs, workers)
    return SweepTable(DETUNING_HEADER, tuple((*k, f) for k, (f, _) in zip(keys, results)),
                      tuple(d for _, d in results))


def grid_mhz(values_mhz) -> list[float]:
    return [mhz_to_rad_per_ns(v) for v in values_mhz]


def quality_factors(p: ModelParams) -> tuple[float, float]:
    """Q_j = omega_cj / kappa_j."""
    if p.kappa_1 <= 0 or p.kappa_2 <= 0:
        raise DomainError("quality factor needs nonzero resonator decay rates")
    return p.omega_c1 / p.kappa_1, p.omega_c2 / p.kappa_2


def _fmt(x: float) -> str:
    # round-trip through MHz conversion leaves ~1e-14 noise; 10 significant digits hide it
    return format(float(x), ".10g")


def format_csv(t: SweepTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.header)
    for row in t.rows:
        *params, fid = row
        if not (0.0 <= fid <= 1 + 1e-9) or math.isnan(fid):
            raise DomainError(f"fidelity {fid!r} outside [0, 1] in row {row}")
        w.writerow([_fmt(v) for v in params] + [f"{fid:.6f}"])
    return buf.getvalue()


def write_csv(t: SweepTable, path) -> None:
    path = Path(path)
    text = format_csv(t)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write sweep table to {path}: {exc}") from exc
