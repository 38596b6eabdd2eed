"""Interferometric quality metrics and whole-problem constraint evaluation.

Constraint slacks are signed so that a positive value is a satisfied
margin.  Their algebraic forms follow the optimizer's convex rewrites:

C1   min distance of z1, z2 to the [z_min, z_max] box           (m)
C2   1e-6 - |x1 - (x_t - z1 tan theta_d)|                       (m)
C3   r1 - r2                                                     (m)
C4   x_t - x2                                                    (m)
C5   b^2 - b_min^2                                               (m^2)
C6   min over slots of gamma_snr - gamma_snr_min
C7   (x_t - x2) - A sin(theta1) r2                               (m)
C8   distance of b_perp inside [lam r1 s1 / h_max, lam r1 s1 / h_min]  (m)
C9   P_max - max p                                               (W)
C10  min over slots of (R - R_min) / R_min, tolerance 1e-9
C11  E_com - sum p dt                                            (J)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import comms
from .geometry import Formation, master_x_for
from .scenario import ScenarioConfig, radar_constants

C2_TOLERANCE = 1e-6
C10_REL_TOLERANCE = 1e-9

CONSTRAINT_DESCRIPTIONS: dict[str, str] = {
    "C1": "altitude box z_min <= z_i <= z_max",
    "C2": "master beam centred on x_t",
    "C3": "slave slant range not longer than master",
    "C4": "slave side-looking, x2 <= x_t",
    "C5": "minimum separation b >= b_min (squared form)",
    "C6": "SNR coherence at every slot",
    "C7": "baseline-decorrelation coherence",
    "C8": "height of ambiguity window (perpendicular-baseline form)",
    "C9": "per-slot transmit power cap, both UAVs",
    "C10": "per-slot minimum link rate, both UAVs (relative)",
    "C11": "communication energy budget, both UAVs",
}


def _inv_snr1(x1, z1, x_t, c):
    # 1/SNR1 = r1^3 sin(theta1) / c = r1^2 |x_t - x1| / c
    r1_sq = (x1 - x_t) ** 2 + z1 ** 2
    return r1_sq * np.abs(x_t - x1) / c


def _inv_snr2(x1, z1, x2, x_t, c):
    r1_sq = (x1 - x_t) ** 2 + z1 ** 2
    return r1_sq * np.abs(x_t - x2) / c


def _gamma_from_inverse(*inverse_snrs):
    out = 1.0
    for inv in inverse_snrs:
        out = out / np.sqrt(1.0 + inv)
    return out


def snr_master(f: Formation, s: ScenarioConfig, n: int) -> float:
    c = radar_constants(s)[n]
    inv = _inv_snr1(f.x1, f.z1, s.mission.target_x, c)
    return math.inf if inv == 0 else float(1.0 / inv)


def snr_slave(f: Formation, s: ScenarioConfig, n: int) -> float:
    """Slave SNR; ``math.inf`` when the slave sits at nadir over the target."""
    c = radar_constants(s)[n]
    inv = _inv_snr2(f.x1, f.z1, f.x2, s.mission.target_x, c)
    return math.inf if inv == 0 else float(1.0 / inv)


def gamma_snr_from(snr1: float, snr2: float) -> float:
    """Product of 1/sqrt(1 + 1/SNR_i); an infinite SNR contributes exactly 1."""
    inv = [0.0 if math.isinf(v) else 1.0 / v for v in (snr1, snr2)]
    return float(_gamma_from_inverse(*inv))


def gamma_snr(f: Formation, s: ScenarioConfig, n: int) -> float:
    c = radar_constants(s)[n]
    x_t = s.mission.target_x
    return float(_gamma_from_inverse(_inv_snr1(f.x1, f.z1, x_t, c),
                                     _inv_snr2(f.x1, f.z1, f.x2, x_t, c)))


def gamma_rg_from_sines(sin1, sin2, b_p: float):
    return ((2.0 + b_p) * sin2 - (2.0 - b_p) * sin1) / (b_p * (sin1 + sin2))


def _sines(x1, z1, x2, z2, x_t):
    s1 = (x_t - x1) / np.hypot(x_t - x1, z1)
    s2 = (x_t - x2) / np.hypot(x_t - x2, z2)
    return s1, s2


def gamma_rg(q2: Sequence[float], s: ScenarioConfig, q1: Sequence[float] | None = None) -> float:
    """Baseline decorrelation.  Without ``q1`` the master look angle is theta_d."""
    x_t = s.mission.target_x
    if q1 is None:
        sin1 = math.sin(s.radar.theta_d)
    else:
        sin1 = (x_t - q1[0]) / math.hypot(x_t - q1[0], q1[1])
    sin2 = (x_t - q2[0]) / math.hypot(x_t - q2[0], q2[1])
    return float(gamma_rg_from_sines(sin1, sin2, s.radar.b_p))


def rg_factor(s: ScenarioConfig) -> float:
    """A such that gamma_rg >= gamma_min  <=>  sin(theta2) >= A sin(theta1)."""
    g, bp = s.thresholds.gamma_rg_min, s.radar.b_p
    return (-g * bp - 2.0 + bp) / (g * bp - 2.0 - bp)


def _tan_look(x1, z1, x_t):
    return (x_t - x1) / z1


def _b_perp(x1, z1, x2, z2, x_t):
    t = _tan_look(x1, z1, x_t)
    return np.abs((x_t - x2) - t * z2) / np.sqrt(t * t + 1.0)


def height_of_ambiguity(f: Formation, s: ScenarioConfig) -> float:
    """lambda r1 sin(theta1) / b_perp, or ``math.inf`` when b_perp is zero."""
    x_t = s.mission.target_x
    bp = float(_b_perp(f.x1, f.z1, f.x2, f.z2, x_t))
    if bp == 0.0:
        return math.inf
    return s.radar.wavelength * (x_t - f.x1) / bp


@dataclass(frozen=True)
class MetricsReport:
    snr1: np.ndarray
    snr2: np.ndarray
    gamma_snr: np.ndarray
    gamma_rg: float
    h_amb: float
    b_perp: float
    baseline: float

    def to_json(self) -> dict[str, Any]:
        def fin(v: float) -> float | None:
            return None if math.isinf(v) else float(v)
        return {
            "snr1_min": fin(float(np.min(self.snr1))),
            "snr2_min": fin(float(np.min(self.snr2))),
            "gamma_snr_min": float(np.min(self.gamma_snr)),
            "gamma_rg": float(self.gamma_rg),
            "h_amb_m": fin(self.h_amb),
            "b_perp_m": float(self.b_perp),
            "baseline_m": float(self.baseline),
        }


def compute_metrics(f: Formation, s: ScenarioConfig) -> MetricsReport:
    x_t = s.mission.target_x
    c = radar_constants(s)
    inv1 = _inv_snr1(f.x1, f.z1, x_t, c)
    inv2 = _inv_snr2(f.x1, f.z1, f.x2, x_t, c)
    with np.errstate(divide="ignore"):
        snr1 = np.where(inv1 == 0, np.inf, 1.0 / np.where(inv1 == 0, 1.0, inv1))
        snr2 = np.where(inv2 == 0, np.inf, 1.0 / np.where(inv2 == 0, 1.0, inv2))
    s1, s2 = _sines(f.x1, f.z1, f.x2, f.z2, x_t)
    return MetricsReport(
        snr1=snr1,
        snr2=snr2,
        gamma_snr=_gamma_from_inverse(inv1, inv2),
        gamma_rg=float(gamma_rg_from_sines(s1, s2, s.radar.b_p)),
        h_amb=height_of_ambiguity(f, s),
        b_perp=float(_b_perp(f.x1, f.z1, f.x2, f.z2, x_t)),
        baseline=math.hypot(f.x2 - f.x1, f.z2 - f.z1),
    )


def geometric_slacks(x1, z1, x2, z2, s: ScenarioConfig) -> dict[str, np.ndarray]:
    """Vectorized C1-C8 slacks for broadcastable position arrays."""
    th, x_t = s.thresholds, s.mission.target_x
    x1, z1, x2, z2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, z1, x2, z2)))
    r1 = np.hypot(x1 - x_t, z1)
    r2 = np.hypot(x2 - x_t, z2)
    c_min = float(np.min(radar_constants(s)))
    gsnr = _gamma_from_inverse(_inv_snr1(x1, z1, x_t, c_min), _inv_snr2(x1, z1, x2, x_t, c_min))
    s1 = (x_t - x1) / r1
    lam_r1s1 = s.radar.wavelength * (x_t - x1)
    bp = _b_perp(x1, z1, x2, z2, x_t)
    return {
        "C1": np.minimum.reduce([z1 - th.z_min, th.z_max - z1, z2 - th.z_min, th.z_max - z2]),
        "C2": C2_TOLERANCE - np.abs(x1 - master_x_for(z1, x_t, s.radar.theta_d)),
        "C3": r1 - r2,
        "C4": x_t - x2,
        "C5": (x2 - x1) ** 2 + (z2 - z1) ** 2 - th.b_min ** 2,
        "C6": gsnr - th.gamma_snr_min,
        "C7": (x_t - x2) - rg_factor(s) * s1 * r2,
        "C8": np.minimum(bp - lam_r1s1 / th.h_amb_max, lam_r1s1 / th.h_amb_min - bp),
    }


@dataclass(frozen=True)
class ConstraintRecord:
    satisfied: bool
    slack: float
    description: str


@dataclass(frozen=True)
class FeasibilityReport:
    records: Mapping[str, ConstraintRecord] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(r.satisfied for r in self.records.values())

    def violated(self) -> list[str]:
        return [k for k, r in self.records.items() if not r.satisfied]

    def slack(self, name: str) -> float:
        return self.records[name].slack

    def to_json(self) -> dict[str, dict[str, Any]]:
        return {k: {"satisfied": r.satisfied, "slack": r.slack} for k, r in self.records.items()}


def evaluate_constraints(
    f: Formation,
    powers: tuple[np.ndarray, np.ndarray],
    s: ScenarioConfig,
) -> FeasibilityReport:
    """Check C1-C11 for a formation and one power schedule per UAV."""
    geo = geometric_slacks(f.x1, f.z1, f.x2, f.z2, s)
    slacks = {k: float(v) for k, v in geo.items()}
    satisfied = {k: v >= 0.0 for k, v in slacks.items()}

    c9, c10, c11 = [], [], []
    for uav, (q, p) in enumerate(zip((f.q1, f.q2), powers)):
        check = comms.check_power_constraints(np.asarray(p, dtype=float), s)
        c9.append(check.c9_slack)
        c11.append(check.c11_slack)
        c10.append(comms.rate_slack(q, np.asarray(p, dtype=float), s, uav))
    slacks["C9"], slacks["C10"], slacks["C11"] = min(c9), min(c10), min(c11)
    satisfied["C9"] = slacks["C9"] >= 0.0
    satisfied["C10"] = slacks["C10"] >= -C10_REL_TOLERANCE
    satisfied["C11"] = slacks["C11"] >= 0.0
    return FeasibilityReport({
        k: ConstraintRecord(bool(satisfied[k]), slacks[k], CONSTRAINT_DESCRIPTIONS[k])
        for k in CONSTRAINT_DESCRIPTIONS
    })
