"""Parallel parameter sweeps producing phase-diagram grids.

Every replica of every cell draws its shocks from streams keyed by
``(engine.seed, cell_key, replica, stream_tag)``.  The cell key is derived from
the bit patterns of the cell's two coordinate values, not from its position
in the grid, so results do not depend on worker count, execution order, or
which other cells the plan contains.

With an output directory the sweep is resumable: each finished cell is
written to ``cells/`` and ``manifest.json`` is kept up to date (status
``incomplete`` until the grid CSV has been written).  Re-running the same plan
into the same directory only simulates the missing cells.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import statistics
import struct
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dynamics import accounting_residuals, run
from .indicators import Phase, crisis_report, log10_floor
from .params import ModelParams, as_dict, parse_lines, with_overrides

GRID_COLUMNS = ("axis1", "axis2", "log10_xi_c", "log10_xi_k", "mean_sharpe", "phase", "t_low_mean", "t_high_mean")
LOG_FLOOR = -12.0


def cell_key(v1: float, v2: float) -> tuple[int, ...]:
    words = struct.unpack("<4I", struct.pack("<2d", float(v1), float(v2)))
    return tuple(int(w) for w in words)


@dataclass(frozen=True)
class SweepPlan:
    base: ModelParams
    axis1: tuple[str, tuple[float, ...]]
    axis2: tuple[str, tuple[float, ...]]
    seeds_per_cell: int = 5
    horizon: int = 200_000
    burn_in: int = 2_000

    def __post_init__(self):
        for name, values in (self.axis1, self.axis2):
            if len(values) == 0:
                raise ValueError(f"axis {name!r} has no values")
            with_overrides(self.base, {name: values[0]})  # validates the key
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be >= 1")
        object.__setattr__(self, "axis1", (self.axis1[0], tuple(float(v) for v in self.axis1[1])))
        object.__setattr__(self, "axis2", (self.axis2[0], tuple(float(v) for v in self.axis2[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.axis1[1]), len(self.axis2[1])

    def cell_params(self, i: int, j: int) -> ModelParams:
        return with_overrides(self.base, {
            self.axis1[0]: self.axis1[1][i],
            self.axis2[0]: self.axis2[1][j],
            "engine.horizon": self.horizon,
            "engine.burn_in": self.burn_in,
        })

    def to_dict(self) -> dict:
        return {
            "base": as_dict(self.base),
            "axis1": {"name": self.axis1[0], "values": list(self.axis1[1])},
            "axis2": {"name": self.axis2[0], "values": list(self.axis2[1])},
            "seeds_per_cell": self.seeds_per_cell,
            "horizon": self.horizon,
            "burn_in": self.burn_in,
        }

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def _axis_values(entries: dict[str, str], axis: str) -> tuple[float, ...]:
    if f"{axis}_values" in entries:
        return tuple(float(v) for v in entries[f"{axis}_values"].split(",") if v.strip())
    if f"{axis}_range" in entries:
        start, stop, num = (s.strip() for s in entries[f"{axis}_range"].split(","))
        return tuple(float(v) for v in np.linspace(float(start), float(stop), int(num)))
    raise ValueError(f"plan needs {axis}_values or {axis}_range")


def load_plan(text: str, base: ModelParams) -> SweepPlan:
    """Parse a key-value plan file (``axis1``, ``axis1_values`` or ``axis1_range``, ...)."""
    entries = parse_lines(text)
    known = {"axis1", "axis2", "axis1_values", "axis2_values", "axis1_range", "axis2_range",
             "seeds_per_cell", "horizon", "burn_in"}
    unknown = set(entries) - known
    if unknown:
        raise ValueError(f"unknown plan keys: {sorted(unknown)}")
    return SweepPlan(
        base=base,
        axis1=(entries["axis1"], _axis_values(entries, "axis1")),
        axis2=(entries["axis2"], _axis_values(entries, "axis2")),
        seeds_per_cell=int(entries.get("seeds_per_cell", 5)),
        horizon=int(entries.get("horizon", base.engine.horizon)),
        burn_in=int(entries.get("burn_in", base.engine.burn_in)),
    )


@dataclass
class PhaseCell:
    index: tuple[int, int]
    coords: tuple[float, float]
    reports: list[dict] = field(default_factory=list)
    error: str | None = None
    log10_xi_c: float = math.nan
    log10_xi_k: float = math.nan
    phase: str = "failed"
    mean_sharpe: float = math.nan
    t_low_mean: float | None = None
    t_high_mean: float | None = None

    def aggregate(self) -> "PhaseCell":
        if self.error is not None or not self.reports:
            return self
        rs = self.reports
        self.log10_xi_c = statistics.median(log10_floor(r["xi_c"], LOG_FLOOR) for r in rs)
        self.log10_xi_k = statistics.median(log10_floor(r["xi_k"], LOG_FLOOR) for r in rs)
        self.phase = majority_phase([r["phase"] for r in rs])
        self.mean_sharpe = float(np.mean([r["mean_sharpe"] for r in rs]))
        self.t_low_mean = _median_present(r["t_low_mean"] for r in rs)
        self.t_high_mean = _median_present(r["t_high_mean"] for r in rs)
        return self

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, sort_keys=True, default=_jsonable) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PhaseCell":
        d = json.loads(text)
        d["index"] = tuple(d["index"])
        d["coords"] = tuple(d["coords"])
        return cls(**d)

    def csv_row(self) -> str:
        vals = [self.coords[0], self.coords[1], self.log10_xi_c, self.log10_xi_k, self.mean_sharpe,
                self.phase, self.t_low_mean, self.t_high_mean]
        return ",".join(_fmt(v) for v in vals)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def _median_present(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(statistics.median(vals)) if vals else None


def majority_phase(labels: Sequence[str]) -> str:
    """Most common label; ties go to the earliest in LkLc, LkHc, HkLc, HkHc order."""
    counts = Counter(labels)
    order = [ph.value for ph in Phase]
    return max(order, key=lambda lab: (counts.get(lab, 0), -order.index(lab)))


def simulate_cell(plan: SweepPlan, i: int, j: int) -> PhaseCell:
    coords = (plan.axis1[1][i], plan.axis2[1][j])
    cell = PhaseCell((i, j), coords)
    try:
        p = plan.cell_params(i, j)
        key = cell_key(*coords)
        for replica in range(plan.seeds_per_cell):
            traj = run(p, cell_key=key, replica=replica)
            summary = crisis_report(traj).summary()
            summary["replica"] = replica
            summary["accounting"] = accounting_residuals(traj)
            cell.reports.append(summary)
    except Exception as exc:  # recorded in the cell, never dropped
        cell.reports = []
        cell.error = f"{type(exc).__name__}: {exc}"
    return cell.aggregate()


def _simulate_index(args):
    plan, i, j = args
    return simulate_cell(plan, i, j)


@dataclass
class SweepResult:
    plan: SweepPlan
    cells: list[list[PhaseCell]]

    def iter_cells(self):
        for row in self.cells:
            yield from row

    def to_csv(self) -> str:
        lines = [",".join(GRID_COLUMNS)] + [c.csv_row() for c in self.iter_cells()]
        return "\n".join(lines) + "\n"

    def field_grid(self, name: str) -> np.ndarray:
        return np.array([[np.nan if getattr(c, name) is None else getattr(c, name) for c in row]
                         for row in self.cells], dtype=float)


def code_version() -> str:
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


class _Store:
    def __init__(self, out_dir: Path, plan: SweepPlan):
        self.dir = Path(out_dir)
        self.cells_dir = self.dir / "cells"
        self.plan = plan
        self.manifest_path = self.dir / "manifest.json"

    def open(self) -> dict[tuple[int, int], PhaseCell]:
        self.cells_dir.mkdir(parents=True, exist_ok=True)
        done: dict[tuple[int, int], PhaseCell] = {}
        if self.manifest_path.exists():
            old = json.loads(self.manifest_path.read_text())
            if old.get("plan_hash") != self.plan.digest():
                raise ValueError(f"{self.manifest_path} belongs to a different plan")
            for path in sorted(self.cells_dir.glob("cell_*.json")):
                cell = PhaseCell.from_json(path.read_text())
                done[cell.index] = cell
        self.write_manifest(done, complete=False)
        return done

    def cell_path(self, cell: PhaseCell) -> Path:
        return self.cells_dir / f"cell_{cell.index[0]}_{cell.index[1]}.json"

    def save_cell(self, cell: PhaseCell):
        _atomic_write(self.cell_path(cell), cell.to_json())

    def write_manifest(self, done: dict, complete: bool):
        n1, n2 = self.plan.shape
        manifest = {
            "status": "complete" if complete else "incomplete",
            "plan": self.plan.to_dict(),
            "plan_hash": self.plan.digest(),
            "master_seed": self.plan.base.engine.seed,
            "seed_derivation": "SeedSequence(entropy=master_seed, spawn_key=(*cell_key(axis1, axis2), replica, tag))",
            "code_version": code_version(),
            "cells_total": n1 * n2,
            "cells_done": len(done),
            "failed": [{"index": list(c.index), "coords": list(c.coords), "error": c.error}
                       for _, c in sorted(done.items()) if c.error is not None],
        }
        _atomic_write(self.manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_sweep(plan: SweepPlan, workers: int = 1, out_dir: str | Path | None = None,
              progress: Callable[[int, int], None] | None = None,
              max_cells: int | None = None) -> SweepResult | None:
    """Simulate every cell of ``plan``.

    ``max_cells`` stops after that many newly simulated cells (used to model
    an interrupted run); the call then returns ``None`` and leaves the
    manifest marked incomplete.
    """
    n1, n2 = plan.shape
    store = _Store(Path(out_dir), plan) if out_dir is not None else None
    done = store.open() if store else {}
    todo = [(i, j) for i in range(n1) for j in range(n2) if (i, j) not in done]
    if max_cells is not None:
        todo = todo[:max_cells]
    total = n1 * n2

    def finish(cell: PhaseCell):
        done[cell.index] = cell
        if store:
            store.save_cell(cell)
            store.write_manifest(done, complete=False)
        if progress:
            progress(len(done), total)

    if workers <= 1:
        for i, j in todo:
            finish(simulate_cell(plan, i, j))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_index, (plan, i, j)) for i, j in todo]
            for fut in as_completed(futures):
                finish(fut.result())

    if len(done) < total:
        return None
    result = SweepResult(plan, [[done[(i, j)] for j in range(n2)] for i in range(n1)])
    if store:
        _atomic_write(store.dir / "grid.csv", result.to_csv())
        store.write_manifest(done, complete=True)
    return result


def stderr_progress(done: int, total: int):
    print(f"\rsweep: {done}/{total} cells", end="" if done < total else "\n", file=sys.stderr, flush=True)
