"""Across-track plane geometry for a master/slave UAV pair.

Positions are ``(x, z)`` with x the ground-range coordinate and z the
altitude above flat ground.  Angles (depression, look) are measured from
the vertical.  Most helpers accept scalars or broadcastable numpy arrays so
the grid oracle can reuse them unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import MissionConfig, RadarParams

Position = tuple[float, float]


@dataclass(frozen=True)
class Formation:
    q1: Position
    q2: Position

    def __post_init__(self) -> None:
        for name, q in (("q1", self.q1), ("q2", self.q2)):
            if len(q) != 2:
                raise ValueError(f"{name} must be an (x, z) pair")
            if not (math.isfinite(q[0]) and math.isfinite(q[1])):
                raise ValueError(f"{name} must be finite, got {q}")
            if not q[1] > 0:
                raise ValueError(f"{name} altitude must be > 0, got {q[1]}")
        object.__setattr__(self, "q1", (float(self.q1[0]), float(self.q1[1])))
        object.__setattr__(self, "q2", (float(self.q2[0]), float(self.q2[1])))

    @property
    def x1(self) -> float:
        return self.q1[0]

    @property
    def z1(self) -> float:
        return self.q1[1]

    @property
    def x2(self) -> float:
        return self.q2[0]

    @property
    def z2(self) -> float:
        return self.q2[1]

    def swapped(self) -> "Formation":
        return Formation(self.q2, self.q1)

    def to_dict(self) -> dict[str, list[float]]:
        return {"q1": list(self.q1), "q2": list(self.q2)}


@dataclass(frozen=True)
class FootprintInterval:
    near: float
    far: float

    @property
    def width(self) -> float:
        return self.far - self.near


def baseline(f: Formation) -> float:
    return math.hypot(f.x2 - f.x1, f.z2 - f.z1)


def _edges(x, z, r: RadarParams):
    return x + math.tan(r.theta_near) * z, x + math.tan(r.theta_far) * z


def footprint(q: Position, r: RadarParams) -> FootprintInterval:
    near, far = _edges(q[0], q[1], r)
    return FootprintInterval(float(near), float(far))


def signed_overlap(x1, z1, x2, z2, r: RadarParams):
    """min(far) - max(near) of the two footprints, without clamping.

    This is the single arithmetic path used by both the swath and the
    concave objective surrogate, so the two agree bit for bit when positive.
    """
    n1, f1 = _edges(x1, z1, r)
    n2, f2 = _edges(x2, z2, r)
    return np.minimum(f1, f2) - np.maximum(n1, n2)


def swath(f: Formation, r: RadarParams) -> float:
    return float(max(0.0, signed_overlap(f.x1, f.z1, f.x2, f.z2, r)))


def coverage(f: Formation, m: MissionConfig, r: RadarParams) -> float:
    return m.track_length * swath(f, r)


def slant_ranges(f: Formation, x_t: float) -> tuple[float, float]:
    return math.hypot(f.x1 - x_t, f.z1), math.hypot(f.x2 - x_t, f.z2)


def master_x_for(z1, x_t: float, theta_d: float):
    """Master ground-range position that centres its beam on ``x_t``."""
    return x_t - z1 * math.tan(theta_d)


def look_angle_master(theta_d: float) -> float:
    # Placement forces tan(theta1) = (x_t - x1)/z1 = tan(theta_d).
    return theta_d


def sin_look_angle_slave(q2: Position, x_t: float) -> float:
    r2 = math.hypot(x_t - q2[0], q2[1])
    return (x_t - q2[0]) / r2


def perpendicular_baseline(q2, x_t: float, theta1: float):
    """Distance from the slave to the master line of sight through ``(x_t, 0)``.

    Independent of the master position once the placement rule holds.
    Accepts a position tuple whose entries may be arrays.
    """
    t = math.tan(theta1)
    return np.abs((x_t - q2[0]) - t * q2[1]) / math.sqrt(t * t + 1.0)


def projection_point(q2: Position, x_t: float, theta1: float) -> tuple[float, float]:
    """Foot of the perpendicular from ``q2`` onto the master line of sight."""
    t = math.tan(theta1)
    x2, z2 = q2
    denom = t * t + 1.0
    xp = (t * t * x2 + x_t - t * z2) / denom
    zp = (t * (x_t - x2) + z2) / denom
    return xp, zp
