"""FDMA UAV-to-ground-station link model and power-schedule checks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .scenario import MissionConfig, ScenarioConfig, along_track_positions


@dataclass(frozen=True)
class PowerSchedule:
    p: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.p, dtype=float)
        if arr.ndim != 1:
            raise ValueError("power schedule must be one-dimensional")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("power schedule entries must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self) -> int:
        return len(self.p)

    def energy(self, slot_duration: float) -> float:
        return float(np.sum(self.p) * slot_duration)


@dataclass(frozen=True)
class LinkGeometry:
    d: np.ndarray


@dataclass(frozen=True)
class PowerCheck:
    c9: bool
    c11: bool
    c9_slack: float
    c11_slack: float


def link_distances(q: Sequence[float], m: MissionConfig) -> LinkGeometry:
    """3D distance from (x, y[n], z) to the ground station for every slot."""
    gx, gy, gz = m.ground_station
    y = along_track_positions(m)
    d = np.sqrt((q[0] - gx) ** 2 + (y - gy) ** 2 + (q[1] - gz) ** 2)
    return LinkGeometry(d)


def throughput(p, d, bandwidth: float, gamma: float):
    # log1p keeps full precision at the tiny SNRs of distant links
    return bandwidth * np.log1p(p * gamma / np.asarray(d, dtype=float) ** 2) / math.log(2.0)


def rate_factor(r_min: float, bandwidth: float) -> float:
    """2^(R_min/B) - 1, evaluated without cancellation for small R_min/B."""
    return math.expm1(r_min / bandwidth * math.log(2.0))


def min_power(r_min, d, bandwidth: float, gamma: float):
    """Smallest power meeting ``r_min`` over distance ``d``."""
    factor = np.expm1(np.asarray(r_min, dtype=float) / bandwidth * math.log(2.0))
    return factor * np.asarray(d, dtype=float) ** 2 / gamma


def min_energy_schedule(lg: LinkGeometry, s: ScenarioConfig, uav: int) -> PowerSchedule:
    """Pointwise-minimal schedule meeting the rate demand of ``uav`` (0 master, 1 slave)."""
    c = s.comm
    return PowerSchedule(min_power(c.r_min[uav], lg.d, c.bandwidth[uav], c.gamma))


def min_energy_for(q: Sequence[float], s: ScenarioConfig, uav: int) -> PowerSchedule:
    return min_energy_schedule(link_distances(q, s.mission), s, uav)


def check_power_constraints(p, s: ScenarioConfig) -> PowerCheck:
    p = np.asarray(p, dtype=float)
    if p.shape != (s.mission.num_slots,):
        raise ValueError(f"expected {s.mission.num_slots} slots, got shape {p.shape}")
    c9_slack = float(min(s.comm.p_com_max - np.max(p), np.min(p)))
    c11_slack = float(s.comm.e_com - np.sum(p) * s.mission.slot_duration)
    return PowerCheck(c9_slack >= 0.0, c11_slack >= 0.0, c9_slack, c11_slack)


def rates(q: Sequence[float], p, s: ScenarioConfig, uav: int) -> np.ndarray:
    d = link_distances(q, s.mission).d
    return throughput(np.asarray(p, dtype=float), d, s.comm.bandwidth[uav], s.comm.gamma)


def rate_slack(q: Sequence[float], p, s: ScenarioConfig, uav: int) -> float:
    """Worst-slot relative rate margin, (R - R_min) / R_min."""
    r_min = s.comm.r_min[uav]
    return float(np.min(rates(q, p, s, uav) - r_min) / r_min)


def track_offsets(s: ScenarioConfig) -> tuple[float, float]:
    """(max, sum) over slots of (y[n] - y_g)^2."""
    y = along_track_positions(s.mission)
    off = (y - s.mission.ground_station[1]) ** 2
    return float(np.max(off)), float(np.sum(off))


def min_energy_slacks(x, z, s: ScenarioConfig, uav: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized C9/C11 slacks of the minimal schedule, in closed form.

    With p*[n] = k d[n]^2 / gamma, the peak is at the slot with the largest
    along-track offset and the energy uses the summed offsets.
    """
    gx, _, gz = s.mission.ground_station
    c = s.comm
    k = rate_factor(c.r_min[uav], c.bandwidth[uav]) / c.gamma
    y_max, y_sum = track_offsets(s)
    h2 = (np.asarray(x) - gx) ** 2 + (np.asarray(z) - gz) ** 2
    peak = k * (h2 + y_max)
    energy = k * (s.mission.num_slots * h2 + y_sum) * s.mission.slot_duration
    return c.p_com_max - peak, c.e_com - energy


SCHEDULE_COLUMNS = ("slot", "p1_watts", "p2_watts", "rate1", "rate2")


def write_schedules_csv(
    path: str | Path,
    p1,
    p2,
    rate1,
    rate2,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEDULE_COLUMNS)
        for n, row in enumerate(zip(p1, p2, rate1, rate2)):
            w.writerow([n, *(repr(float(v)) for v in row)])
