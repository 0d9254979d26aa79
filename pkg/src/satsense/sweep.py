"""Advantage maps over a log-spaced (n_sat, T) grid and their serialization.

Cells are stored row-major with ``n_sat`` as the outer axis. Each cell warm
starts from the already-finished cells above and to the left of it, so a
sweep is deterministic and can only be parallelized along anti-diagonals.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .errors import BoundaryOptimum, InsufficientColumn, SensingError
from .fisher import Target
from .medium import Medium
from .optimizer import AdvantageResult, OptimizerConfig, quantum_advantage

CSV_HEADER = ("n_sat", "T", "target", "I_coh", "I_sq", "advantage", "R", "theta", "r", "psi",
              "delta_bar", "nbar", "regime", "boundary_flag")
UNITS_NOTE = ("detunings in units of the unbroadened linewidth gamma_0; detuning Fisher "
              "information per gamma_0^2; optical-depth Fisher information dimensionless")


@dataclass(frozen=True)
class AxisSpec:
    min: float
    max: float
    points: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min <= 0:
            raise ValueError(f"axis bounds must be finite and > 0, got {self.min}, {self.max}")
        if self.points < 1 or (self.points >= 2 and not self.max > self.min):
            raise ValueError(f"axis needs max > min and points >= 2, got {self}")
        if self.points == 1 and self.max != self.min:
            raise ValueError("a single-point axis needs min == max")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.min)])
        v = np.logspace(math.log10(self.min), math.log10(self.max), self.points)
        v[0], v[-1] = self.min, self.max
        return v

    @classmethod
    def single(cls, value: float) -> "AxisSpec":
        return cls(value, value, 1)


@dataclass(frozen=True)
class GridSpec:
    n_sat_range: AxisSpec = field(default_factory=lambda: AxisSpec(1e-2, 1e2, 25))
    T_range: AxisSpec = field(default_factory=lambda: AxisSpec(1e-2, 1e2, 25))
    target: Target = Target.DETUNING

    def as_dict(self) -> dict:
        ax = lambda a: {"min": a.min, "max": a.max, "points": a.points}
        return {"n_sat": ax(self.n_sat_range), "T": ax(self.T_range), "target": self.target.value}

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        unknown = set(data) - {"n_sat", "T", "target"}
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        default = cls()
        n_sat = AxisSpec(**data["n_sat"]) if "n_sat" in data else default.n_sat_range
        T = AxisSpec(**data["T"]) if "T" in data else default.T_range
        return cls(n_sat, T, Target.parse(data.get("target", "detuning")))


@dataclass(frozen=True)
class SweepCell:
    n_sat: float
    T: float
    target: Target
    i_sq: float
    i_coh: float
    advantage: float
    sq_state: dict
    sq_delta_bar: float
    sq_nbar: float
    regime: str
    coh_state: dict
    coh_delta_bar: float
    coh_nbar: float
    coh_regime: str
    boundary_flag: bool
    error: str | None = None

    @classmethod
    def from_advantage(cls, n_sat, T, target, adv: AdvantageResult, error=None) -> "SweepCell":
        sq, coh = adv.sq_result, adv.coh_result
        return cls(n_sat, T, target, adv.i_sq, adv.i_coh, adv.advantage,
                   sq.state.as_dict(), sq.delta_bar, sq.nbar, sq.regime.value,
                   coh.state.as_dict(), coh.delta_bar, coh.nbar, coh.regime.value,
                   adv.boundary_flag, error)

    @classmethod
    def failed(cls, n_sat, T, target, error: str) -> "SweepCell":
        nan = math.nan
        blank = {"R": nan, "theta": nan, "r": nan, "psi": nan}
        return cls(n_sat, T, target, nan, nan, nan, blank, nan, nan, "failed",
                   dict(blank), nan, nan, "failed", False, error)

    def csv_row(self) -> list[str]:
        s = self.sq_state
        nums = [self.n_sat, self.T]
        tail = [self.i_coh, self.i_sq, self.advantage, s["R"], s["theta"], s["r"], s["psi"],
                self.sq_delta_bar, self.sq_nbar]
        return ([repr(float(x)) for x in nums] + [self.target.value]
                + [repr(float(x)) for x in tail]
                + [self.regime, "true" if self.boundary_flag else "false"])

    def as_dict(self) -> dict:
        s = self.sq_state
        return {
            "n_sat": self.n_sat, "T": self.T, "target": self.target.value,
            "I_coh": self.i_coh, "I_sq": self.i_sq, "advantage": self.advantage,
            "R": s["R"], "theta": s["theta"], "r": s["r"], "psi": s["psi"],
            "delta_bar": self.sq_delta_bar, "nbar": self.sq_nbar,
            "regime": self.regime, "boundary_flag": self.boundary_flag,
            "coherent": {"R": self.coh_state["R"], "theta": self.coh_state["theta"],
                         "delta_bar": self.coh_delta_bar, "nbar": self.coh_nbar,
                         "regime": self.coh_regime},
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepCell":
        c = d["coherent"]
        return cls(d["n_sat"], d["T"], Target.parse(d["target"]), d["I_sq"], d["I_coh"],
                   d["advantage"], {k: d[k] for k in ("R", "theta", "r", "psi")},
                   d["delta_bar"], d["nbar"], d["regime"],
                   {"R": c["R"], "theta": c["theta"], "r": 0.0, "psi": 0.0},
                   c["delta_bar"], c["nbar"], c["regime"], d["boundary_flag"], d.get("error"))


@dataclass
class SweepTable:
    grid: GridSpec
    cells: list[SweepCell]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = self.grid.n_sat_range.points * self.grid.T_range.points
        if len(self.cells) != expected:
            raise ValueError(f"table has {len(self.cells)} cells, grid needs {expected}")

    def cell(self, i: int, j: int) -> SweepCell:
        return self.cells[i * self.grid.T_range.points + j]

    @property
    def flagged(self) -> int:
        return sum(1 for c in self.cells if c.boundary_flag or c.error)

    def column(self, T: float) -> list[SweepCell]:
        """Cells at the T grid value nearest ``T`` (log distance), ordered by n_sat."""
        Ts = self.grid.T_range.values()
        j = int(np.argmin(np.abs(np.log(Ts) - math.log(T))))
        return [self.cell(i, j) for i in range(self.grid.n_sat_range.points)]


def config_hash(grid: GridSpec, config: OptimizerConfig) -> str:
    blob = json.dumps({"grid": grid.as_dict(), "optimizer": config.as_dict()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _solve_cell(grid, config, i, j, n_sat, T, neighbours):
    medium = Medium(float(T), float(n_sat))
    try:
        adv = quantum_advantage(medium, grid.target, config, extra_seeds=neighbours)
        return SweepCell.from_advantage(float(n_sat), float(T), grid.target, adv), adv
    except BoundaryOptimum as exc:
        return SweepCell.from_advantage(float(n_sat), float(T), grid.target, exc.result), exc.result
    except SensingError as exc:
        return SweepCell.failed(float(n_sat), float(T), grid.target, f"{type(exc).__name__}: {exc}"), None


def run_sweep(grid: GridSpec, config: OptimizerConfig = OptimizerConfig(), threads: int | None = 1,
              progress=None) -> SweepTable:
    """One ``quantum_advantage`` evaluation per grid cell.

    ``threads`` caps the number of cells solved concurrently within a
    wavefront; the result does not depend on it. ``progress`` is called with
    ``(done, total)`` after each wavefront.
    """
    n_vals = grid.n_sat_range.values()
    t_vals = grid.T_range.values()
    ni, nj = len(n_vals), len(t_vals)
    cells: dict[tuple[int, int], SweepCell] = {}
    results: dict[tuple[int, int], AdvantageResult | None] = {}

    def task(ij):
        i, j = ij
        neighbours = [results.get((i - 1, j)), results.get((i, j - 1))]
        return ij, _solve_cell(grid, config, i, j, n_vals[i], t_vals[j], neighbours)

    pool = ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None
    try:
        for wave in range(ni + nj - 1):
            front = [(i, wave - i) for i in range(max(0, wave - nj + 1), min(ni, wave + 1))]
            outputs = pool.map(task, front) if pool else map(task, front)
            for ij, (cell, adv) in outputs:
                cells[ij] = cell
                results[ij] = adv
            if progress:
                progress(len(cells), ni * nj)
    finally:
        if pool:
            pool.shutdown()

    ordered = [cells[(i, j)] for i in range(ni) for j in range(nj)]
    metadata = {
        "tool": "satsense",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config_hash": config_hash(grid, config),
        "optimizer": config.as_dict(),
        "units": UNITS_NOTE,
    }
    return SweepTable(grid, ordered, metadata)


# -- serialization ---------------------------------------------------------------

def table_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in table.cells:
        writer.writerow(cell.csv_row())
    return buf.getvalue()


def table_to_json(table: SweepTable) -> dict:
    return {"metadata": table.metadata, "grid": table.grid.as_dict(),
            "columns": list(CSV_HEADER), "cells": [c.as_dict() for c in table.cells]}


def table_from_json(data: dict) -> SweepTable:
    return SweepTable(GridSpec.from_dict(data["grid"]),
                      [SweepCell.from_dict(c) for c in data["cells"]], data.get("metadata", {}))


def write_table(table: SweepTable, fmt: str, destination) -> None:
    """Write ``table`` as ``csv`` or ``json`` to a path or an open text stream."""
    if fmt == "csv":
        text = table_to_csv(table)
    elif fmt == "json":
        text = json.dumps(table_to_json(table), indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


def read_table(source) -> SweepTable:
    """Read a JSON table written by ``write_table``."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    return table_from_json(json.loads(text))


# -- scaling ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingReport:
    T: float
    slope: float
    intercept: float
    plateau: float
    breakpoint: float
    growth_points: int
    plateau_points: int
    growth_rms: float
    plateau_rms: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def fit_growth_plateau(n_sat, advantage) -> tuple:
    """Continuous broken-stick fit ``log10 A = a + s * min(log10 n_sat, b)``.

    For each breakpoint ``b`` the line is an ordinary least-squares fit; ``b``
    itself is chosen by a grid scan over the data range followed by a bounded
    scalar refinement. Returns ``(slope, intercept, plateau, breakpoint,
    growth_points, growth_rms, plateau_rms)``.
    """
    x = np.log10(np.asarray(n_sat, dtype=float))
    y = np.log10(np.asarray(advantage, dtype=float))

    def fit(b):
        design = np.column_stack([np.ones_like(x), np.minimum(x, b)])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        return float(resid @ resid), coef, resid

    lo, hi = float(x.min()), float(x.max())
    scan = np.linspace(lo, hi, 201)
    sse = [fit(b)[0] for b in scan]
    k = int(np.argmin(sse))
    refined = minimize_scalar(lambda b: fit(b)[0], bounds=(scan[max(k - 1, 0)], scan[min(k + 1, 200)]),
                              method="bounded", options={"xatol": 1e-10})
    b = float(refined.x) if refined.fun <= sse[k] else float(scan[k])
    _, (intercept, slope), resid = fit(b)
    growth = x <= b
    rms = lambda r: float(np.sqrt(np.mean(r * r))) if r.size else 0.0
    plateau = 10 ** (intercept + slope * b)
    return (float(slope), float(intercept), float(plateau), float(10 ** b), int(growth.sum()),
            rms(resid[growth]), rms(resid[~growth]))


def scaling_analysis(table: SweepTable, fixed_T: float, min_points: int = 8,
                     min_decades: float = 3.0) -> ScalingReport:
    column = [c for c in table.column(fixed_T) if c.error is None and c.advantage > 0]
    if len(column) < min_points:
        raise InsufficientColumn(f"need {min_points} usable n_sat points, have {len(column)}")
    n = np.array([c.n_sat for c in column])
    if math.log10(n.max() / n.min()) < min_decades - 1e-9:
        raise InsufficientColumn(f"column spans fewer than {min_decades} decades in n_sat")
    slope, intercept, plateau, bp, k, g_rms, p_rms = fit_growth_plateau(
        n, [c.advantage for c in column])
    return ScalingReport(column[0].T, slope, intercept, plateau, bp, k, len(column) - k, g_rms, p_rms)
