"""Exhaustive grid search over (z1, x2, z2) with analytic minimal powers.

The master x1 follows the beam-centring rule, so three coordinates describe
a formation.  Powers never enter the objective, so each grid point carries
the pointwise-minimal schedule and C9/C11 are checked in closed form.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import comms
from .geometry import Formation, master_x_for, signed_overlap
from .insar_metrics import geometric_slacks
from .scenario import ScenarioConfig

SLACK_NAMES = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11")
DUMP_COLUMNS = ("x1", "z1", "x2", "z2", *SLACK_NAMES, "coverage_m2")


class EmptyGridError(ValueError):
    """The grid specification contains no points."""


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    step: float

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError(f"grid step must be > 0, got {self.step}")

    def values(self) -> np.ndarray:
        if self.stop < self.start:
            return np.zeros(0)
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


@dataclass(frozen=True)
class GridSpec:
    z1: Axis
    x2: Axis
    z2: Axis

    @classmethod
    def default(cls, s: ScenarioConfig, step: float = 1.0) -> "GridSpec":
        th, x_t = s.thresholds, s.mission.target_x
        return cls(Axis(th.z_min, th.z_max, step),
                   Axis(x_t - 1.2 * th.z_max, x_t, step),
                   Axis(th.z_min, th.z_max, step))

    @classmethod
    def coarse(cls, s: ScenarioConfig, divisions: int) -> "GridSpec":
        th, x_t = s.thresholds, s.mission.target_x
        dz = (th.z_max - th.z_min) / divisions
        dx = 1.2 * th.z_max / divisions
        return cls(Axis(th.z_min, th.z_max, dz), Axis(x_t - 1.2 * th.z_max, x_t, dx),
                   Axis(th.z_min, th.z_max, dz))

    @property
    def size(self) -> int:
        return len(self.z1.values()) * len(self.x2.values()) * len(self.z2.values())


@dataclass(frozen=True)
class OracleResult:
    found: bool
    formation: Formation | None
    coverage_m2: float
    objective_tilde: float
    feasible_count: int
    total_count: int
    score: float = math.nan

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "formation": None if self.formation is None else self.formation.to_dict(),
            "coverage_m2": self.coverage_m2 if self.found else None,
            "objective_tilde_m": self.objective_tilde if self.found else None,
            "feasible_count": self.feasible_count,
            "total_count": self.total_count,
        }


def evaluate_points(s: ScenarioConfig, z1, x2, z2, vertical: bool = False,
                    equal_power: bool = False) -> tuple[dict[str, np.ndarray], np.ndarray, np.ndarray]:
    """Slacks, master x1 and signed overlap for broadcastable point arrays."""
    z1 = np.asarray(z1, dtype=float)
    x1 = master_x_for(z1, s.mission.target_x, s.radar.theta_d)
    x2 = np.broadcast_to(x1, np.broadcast(z1, z2).shape) if vertical else np.asarray(x2, float)
    slacks = geometric_slacks(x1, z1, x2, z2, s)
    c9, c11 = [], []
    n_dt = s.mission.num_slots * s.mission.slot_duration
    for uav, (x, z) in enumerate(((x1, z1), (x2, z2))):
        peak_slack, energy_slack = comms.min_energy_slacks(x, z, s, uav)
        if equal_power:
            energy_slack = s.comm.e_com - n_dt * (s.comm.p_com_max - peak_slack)
        c9.append(peak_slack)
        c11.append(energy_slack)
    slacks["C9"] = np.minimum(*c9)
    slacks["C10"] = np.zeros(np.broadcast(*c9).shape)
    slacks["C11"] = np.minimum(*c11)
    shape = np.broadcast(z1, x2, z2).shape
    slacks = {k: np.broadcast_to(v, shape) for k, v in slacks.items()}
    overlap = np.broadcast_to(signed_overlap(x1, z1, x2, z2, s.radar), shape)
    return slacks, np.broadcast_to(x1, shape), overlap


def _normalized_min_slack(s: ScenarioConfig, slacks: dict[str, np.ndarray]) -> np.ndarray:
    zs = s.thresholds.z_max
    scale = {"C1": zs, "C3": zs, "C4": zs, "C5": zs ** 2, "C6": 1.0, "C7": zs, "C8": zs,
             "C9": s.comm.p_com_max, "C11": s.comm.e_com}
    return np.minimum.reduce([slacks[k] / v for k, v in scale.items()])


def _feasible(slacks: dict[str, np.ndarray]) -> np.ndarray:
    mask = np.ones(next(iter(slacks.values())).shape, dtype=bool)
    for v in slacks.values():
        mask &= v >= 0.0
    return mask


@dataclass(frozen=True)
class _Task:
    s: ScenarioConfig
    z1: np.ndarray
    x2: np.ndarray
    z2: np.ndarray
    vertical: bool
    equal_power: bool
    criterion: str
    dump: bool


def _scan(task: _Task):
    """Best point (score, z1, x2, z2), feasible count and optional rows."""
    s = task.s
    best = None
    count = 0
    rows = []
    x2_axis = task.x2[:1] if task.vertical else task.x2
    for z1 in task.z1:
        slacks, x1, overlap = evaluate_points(s, z1, x2_axis[:, None], task.z2[None, :],
                                              task.vertical, task.equal_power)
        mask = _feasible(slacks)
        k = int(mask.sum())
        if k == 0:
            continue
        count += k
        score = overlap if task.criterion == "objective" else _normalized_min_slack(s, slacks)
        masked = np.where(mask, score, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        cand = (float(masked[i, j]), float(z1),
                float(x1[i, j]) if task.vertical else float(x2_axis[i]), float(task.z2[j]))
        if best is None or cand[0] > best[0]:
            best = cand
        if task.dump:
            ii, jj = np.nonzero(mask)
            x2v = x1[ii, jj] if task.vertical else x2_axis[ii]
            cov = s.mission.track_length * np.maximum(0.0, overlap[ii, jj])
            block = np.column_stack([x1[ii, jj], np.full(len(ii), z1), x2v, task.z2[jj],
                                     *(slacks[nm][ii, jj] for nm in SLACK_NAMES), cov])
            rows.append(block)
    return best, count, rows


def _chunks(values: np.ndarray, parts: int) -> list[np.ndarray]:
    parts = max(1, min(parts, len(values)))
    return [c for c in np.array_split(values, parts) if len(c)]


def grid_search(s: ScenarioConfig, g: GridSpec | None = None, vertical: bool = False,
                equal_power: bool = False, criterion: str = "objective",
                dump_path: str | Path | None = None, jobs: int = 1) -> OracleResult:
    """Exhaustive search; ties go to the lexicographically smallest (z1, x2, z2).

    ``criterion="slack"`` instead picks the point with the largest normalized
    minimum constraint margin.
    """
    g = g or GridSpec.default(s)
    z1v, x2v, z2v = g.z1.values(), g.x2.values(), g.z2.values()
    if vertical:
        x2v = np.zeros(1)
    total = len(z1v) * len(x2v) * len(z2v)
    if total == 0:
        raise EmptyGridError("grid specification contains no points")
    dump = dump_path is not None
    tasks = [_Task(s, c, x2v, z2v, vertical, equal_power, criterion, dump)
             for c in _chunks(z1v, jobs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan, tasks))
    else:
        results = [_scan(t) for t in tasks]

    best, count = None, 0
    for b, c, rows in results:
        count += c
        if b is not None and (best is None or b[0] > best[0]):
            best = b
    if dump:
        write_feasible_csv(dump_path, (block for _, _, rows in results for block in rows))
    if best is None:
        return OracleResult(False, None, 0.0, math.nan, 0, total)
    _, z1, x2, z2 = best
    f = Formation((master_x_for(z1, s.mission.target_x, s.radar.theta_d), z1), (x2, z2))
    tilde = float(signed_overlap(f.x1, f.z1, f.x2, f.z2, s.radar))
    return OracleResult(True, f, s.mission.track_length * max(0.0, tilde), tilde, count, total,
                        score=best[0])


def write_feasible_csv(path: str | Path, blocks: Iterable[np.ndarray]) -> int:
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DUMP_COLUMNS)
        for block in blocks:
            for row in block:
                w.writerow([repr(float(v)) for v in row])
                n += 1
    return n


def refine(s: ScenarioConfig, around: Formation, radius: float, step: float,
           vertical: bool = False, equal_power: bool = False) -> OracleResult:
    """Local exhaustive box search centred on ``around`` (centre included)."""
    if not step < radius:
        raise ValueError("refine needs step < radius")
    k = int(math.floor(radius / step + 1e-9))
    offsets = step * np.arange(-k, k + 1)
    th = s.thresholds

    def axis(c: float, lo: float = -np.inf, hi: float = np.inf) -> np.ndarray:
        v = c + offsets
        return v[(v >= lo) & (v <= hi)]

    z1v = axis(around.z1, th.z_min, th.z_max)
    z2v = axis(around.z2, th.z_min, th.z_max)
    x2v = np.zeros(1) if vertical else axis(around.x2, -np.inf, s.mission.target_x)
    task = _Task(s, z1v, x2v, z2v, vertical, equal_power, "objective", False)
    best, count, _ = _scan(task)
    total = len(z1v) * len(x2v) * len(z2v)
    if best is None:
        return OracleResult(False, None, 0.0, math.nan, 0, total)
    _, z1, x2, z2 = best
    f = Formation((master_x_for(z1, s.mission.target_x, s.radar.theta_d), z1), (x2, z2))
    tilde = float(signed_overlap(f.x1, f.z1, f.x2, f.z2, s.radar))
    return OracleResult(True, f, s.mission.track_length * max(0.0, tilde), tilde, count, total,
                        score=best[0])
