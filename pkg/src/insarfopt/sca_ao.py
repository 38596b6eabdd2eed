"""Successive convex approximation and alternating optimization.

The slave step optimizes (x2, z2) and the slave powers with the master
fixed; the master step optimizes z1 (x1 follows the beam-centring rule) and
the master powers with the slave fixed.  Each step repeatedly solves a
convex restriction built around the current point, so every accepted
iterate stays feasible for the original constraints.

Benchmarks reuse the same builders: the vertical formation ties x2 = x1,
and the equal-power scheme collapses each schedule to a single scalar.
"""

from __future__ import annotations

import csv
import datetime as _dt
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import comms
from .convex_core import (
    AffineBlock,
    ConvexProgram,
    NormBlock,
    PolyBlock,
    QuadraticBlock,
    SolveReport,
    check_convexity,
    solve,
)
from .geometry import Formation, coverage, master_x_for, signed_overlap
from .insar_metrics import (
    FeasibilityReport,
    compute_metrics,
    evaluate_constraints,
    rg_factor,
)
from .scenario import ScenarioConfig, fingerprint, radar_constants

__version__ = "0.1.0"
MONOTONE_TOL = 1e-7


class InfeasibleScenarioError(RuntimeError):
    """No feasible formation could be found for the scenario."""


class InfeasibleStartError(ValueError):
    """An SCA expansion point violates the original constraints."""


def objective_tilde(f: Formation, r) -> float:
    """Signed footprint overlap: equals the swath when positive."""
    return float(signed_overlap(f.x1, f.z1, f.x2, f.z2, r))


def surrogate_baseline(q_var: Sequence[float], q_fix: Sequence[float], a: Sequence[float]) -> float:
    """Convex majorizer of -|q_var - q_fix|^2 touching it at ``q_var = a``."""
    qv, qf, aa = (np.asarray(v, dtype=float) for v in (q_var, q_fix, a))
    diff = qv - qf
    return float(diff @ diff - 2.0 * (aa - qf) @ (2.0 * qv - aa - qf))


@dataclass(frozen=True)
class SolverState:
    formation: Formation
    p1: np.ndarray
    p2: np.ndarray

    @classmethod
    def minimal(cls, f: Formation, s: ScenarioConfig, equal_power: bool = False) -> "SolverState":
        p1 = comms.min_energy_for(f.q1, s, 0).p
        p2 = comms.min_energy_for(f.q2, s, 1).p
        if equal_power:
            p1, p2 = np.full_like(p1, p1.max()), np.full_like(p2, p2.max())
        return cls(f, np.array(p1), np.array(p2))

    def feasibility(self, s: ScenarioConfig) -> FeasibilityReport:
        return evaluate_constraints(self.formation, (self.p1, self.p2), s)


class Step(str, enum.Enum):
    SLAVE = "slave"
    MASTER = "master"


@dataclass(frozen=True)
class SubproblemKind:
    """Which side moves; the other side is taken from the current state."""

    tag: Step
    vertical: bool = False
    equal_power: bool = False


@dataclass(frozen=True)
class SCAConfig:
    epsilon: float = 1e-4
    max_iters: int = 50
    max_outer: int = 30
    solver_tol: float = 1e-8
    debug: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.max_iters < 1 or self.max_outer < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class SubproblemProgram(ConvexProgram):
    """A ConvexProgram plus the affine maps back to UAV positions."""

    q1_0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    M1: np.ndarray = field(default_factory=lambda: np.zeros((2, 0)))
    q2_0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    M2: np.ndarray = field(default_factory=lambda: np.zeros((2, 0)))
    power_index: dict[int, np.ndarray] = field(default_factory=dict)
    p_scale: float = 1.0

    def positions(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.q1_0 + self.M1 @ w, self.q2_0 + self.M2 @ w

    def powers(self, w: np.ndarray, uav: int) -> np.ndarray | None:
        idx = self.power_index.get(uav)
        return None if idx is None else w[idx] * self.p_scale


def _check_start(state: SolverState, s: ScenarioConfig) -> None:
    rep = state.feasibility(s)
    if not rep.feasible:
        raise InfeasibleStartError(
            "expansion point violates " + ", ".join(rep.violated()))


def _build(kind: SubproblemKind, state: SolverState, s: ScenarioConfig,
           check: bool = True) -> SubproblemProgram:
    if check:
        _check_start(state, s)
    th, rd, cm, ms = s.thresholds, s.radar, s.comm, s.mission
    x_t = ms.target_x
    t = math.tan(rd.theta_d)
    kappa = math.sqrt(t * t + 1.0)
    f = state.formation
    N = ms.num_slots
    zs = th.z_max  # length scale for residual normalization

    # geometric variables and the affine position maps q = q0 + M w
    if kind.tag is Step.SLAVE and not kind.vertical:
        geo = ["x2", "z2"]
        q1_0, M1g = np.array(f.q1), np.zeros((2, 2))
        q2_0, M2g = np.zeros(2), np.eye(2)
        moves = (False, True)
    elif kind.tag is Step.SLAVE:
        geo = ["z2"]
        q1_0, M1g = np.array(f.q1), np.zeros((2, 1))
        q2_0, M2g = np.array([f.x1, 0.0]), np.array([[0.0], [1.0]])
        moves = (False, True)
    elif not kind.vertical:
        geo = ["z1"]
        q1_0, M1g = np.array([x_t, 0.0]), np.array([[-t], [1.0]])
        q2_0, M2g = np.array(f.q2), np.zeros((2, 1))
        moves = (True, False)
    else:
        geo = ["z1", "z2"]
        q1_0, M1g = np.array([x_t, 0.0]), np.array([[-t, 0.0], [1.0, 0.0]])
        q2_0, M2g = np.array([x_t, 0.0]), np.array([[-t, 0.0], [0.0, 1.0]])
        moves = (True, True)

    names = list(geo) + ["s"]
    power_index: dict[int, np.ndarray] = {}
    for uav in (0, 1):
        if moves[uav]:
            start = len(names)
            if kind.equal_power:
                names.append(f"p{uav + 1}")
                power_index[uav] = np.full(N, start)
            else:
                names.extend(f"p{uav + 1}[{n}]" for n in range(N))
                power_index[uav] = np.arange(start, start + N)
    n = len(names)
    g = len(geo)
    s_idx = g

    def widen(M: np.ndarray) -> np.ndarray:
        out = np.zeros((2, n))
        out[:, :g] = M
        return out

    M1, M2 = widen(M1g), widen(M2g)
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for i, nm in enumerate(geo):
        if nm.startswith("z"):
            lower[i], upper[i] = th.z_min, th.z_max
        elif nm == "x2":
            upper[i] = x_t  # C4
    for idx in power_index.values():
        lower[np.unique(idx)] = 0.0  # C9, powers scaled by P_max
        upper[np.unique(idx)] = 1.0
    objective = np.zeros(n)
    objective[s_idx] = 1.0
    prog = SubproblemProgram(names, objective, lower, upper, q1_0=q1_0, M1=M1, q2_0=q2_0,
                             M2=M2, power_index=power_index, p_scale=cm.p_com_max)

    tn, tf = math.tan(rd.theta_near), math.tan(rd.theta_far)
    e_x = np.array([1.0, 0.0])
    e_z = np.array([0.0, 1.0])

    # epigraph of min(far_i) - max(near_j)
    rows, rhs, labels = [], [], []
    for i, (qi0, Mi) in enumerate(((q1_0, M1), (q2_0, M2)), start=1):
        for j, (qj0, Mj) in enumerate(((q1_0, M1), (q2_0, M2)), start=1):
            far_c = (e_x + tf * e_z) @ Mi
            near_c = (e_x + tn * e_z) @ Mj
            row = near_c - far_c
            row[s_idx] += 1.0
            rows.append(row)
            rhs.append((e_x + tf * e_z) @ qi0 - (e_x + tn * e_z) @ qj0)
            labels.append(f"overlap far{i}-near{j}")
    prog.add(AffineBlock(rows, rhs, labels, scale=zs))

    tgt = np.array([x_t, 0.0])
    r1_const = math.hypot(f.x1 - x_t, f.z1)
    # r1 as affine function of w
    rho = kappa * M1[1] if moves[0] else np.zeros(n)
    r1_0 = 0.0 if moves[0] else r1_const

    # C3: r2 <= r1
    if moves[1]:
        prog.add(NormBlock(M2, q2_0 - tgt, 1.0, -rho, -r1_0, "C3 r2<=r1", scale=zs))
    else:
        r2 = math.hypot(f.x2 - x_t, f.z2)
        prog.add(AffineBlock([-rho], [r1_0 - r2], ["C3 r2<=r1"], scale=zs))

    # C5 via the baseline majorizer, v = q2 - q1
    Mv, v0 = M2 - M1, q2_0 - q1_0
    va = np.array(f.q2) - np.array(f.q1)
    prog.add(QuadraticBlock(Mv, v0, [1.0], [-4.0 * va @ Mv],
                            [4.0 * va @ v0 - 2.0 * va @ va - th.b_min ** 2],
                            ["C5 surrogate"], scale=zs ** 2))

    # C6 (SNR coherence), using the tightest slot
    c_min = float(np.min(radar_constants(s)))
    g2 = 1.0 / th.gamma_snr_min ** 2
    if not moves[0]:
        i1 = r1_const ** 2 * abs(x_t - f.x1) / c_min
        u2_max = c_min * (g2 / (1.0 + i1) - 1.0) / r1_const ** 2
        # x_t - x2 <= u2_max
        prog.add(AffineBlock([-M2[0]], [u2_max - x_t + q2_0[0]], ["C6 slave SNR"], scale=zs))
    else:
        alpha = (t / kappa) / c_min
        if moves[1]:
            coefs = {3: 2.0 * alpha, 6: alpha ** 2}
        else:
            beta = (x_t - f.x2) / c_min
            coefs = {2: beta, 3: alpha, 5: alpha * beta}
        prog.add(PolyBlock(rho, r1_0, coefs, g2 - 1.0, "C6 SNR polynomial in r1",
                           scale=g2 - 1.0))

    # C7: A sin(theta1) r2 - (x_t - x2) <= 0 (second-order cone)
    if moves[1]:
        coef = rg_factor(s) * math.sin(rd.theta_d)
        prog.add(NormBlock(M2, q2_0 - tgt, coef, M2[0], q2_0[0] - x_t, "C7 baseline decorrelation",
                           scale=zs))

    # C8: D = (x_t - x2) - t z2, b_perp = |D| / kappa
    D0 = x_t - q2_0[0] - t * q2_0[1]
    MD = -M2[0] - t * M2[1]
    Da = (x_t - f.x2) - t * f.z2
    z1_0, Mz1 = q1_0[1], M1[1]
    k_hi = kappa * rd.wavelength * t / th.h_amb_min
    k_lo = kappa * rd.wavelength * t / th.h_amb_max
    if not moves[0]:
        prog.add(QuadraticBlock(MD[None, :], [D0], [1.0], [np.zeros(n)], [(k_hi * f.z1) ** 2],
                                ["C8a"], scale=zs ** 2))
    else:
        prog.add(AffineBlock([MD - k_hi * Mz1, -MD - k_hi * Mz1],
                             [k_hi * z1_0 - D0, k_hi * z1_0 + D0],
                             ["C8a upper", "C8a lower"], scale=zs))
    if not np.any(MD):
        prog.add(AffineBlock([k_lo * Mz1], [abs(D0) - k_lo * z1_0], ["C8b"], scale=zs))
    elif not moves[0]:
        # -D^2 linearized at Da
        prog.add(AffineBlock([-2.0 * Da * MD], [-(k_lo * f.z1) ** 2 - Da ** 2 + 2.0 * Da * D0],
                             ["C8b"], scale=zs ** 2))
    else:
        sgn = 1.0 if Da >= 0 else -1.0
        prog.add(AffineBlock([-sgn * MD + k_lo * Mz1], [sgn * D0 - k_lo * z1_0], ["C8b"],
                             scale=zs))

    # C10 and C11 for each moving UAV
    y_off = (comms.along_track_positions(ms) - ms.ground_station[1]) ** 2
    gxz = np.array([ms.ground_station[0], ms.ground_station[2]])
    for uav, idx in power_index.items():
        qi0, Mi = (q1_0, M1) if uav == 0 else (q2_0, M2)
        k = comms.rate_factor(cm.r_min[uav], cm.bandwidth[uav])
        Q = np.zeros((N, n))
        Q[np.arange(N), idx] = -cm.gamma * cm.p_com_max
        prog.add(QuadraticBlock(Mi, qi0 - gxz, np.full(N, k), Q, -k * y_off,
                                [f"C10 uav{uav + 1} slot{m}" for m in range(N)],
                                scale=cm.gamma * cm.p_com_max))
        row = np.zeros(n)
        np.add.at(row, idx, cm.p_com_max * ms.slot_duration)
        prog.add(AffineBlock([row], [cm.e_com], [f"C11 uav{uav + 1}"], scale=cm.e_com))

    # strictly interior start where possible
    x0 = np.zeros(n)
    moving_q = (np.array(f.q1), np.array(f.q2))
    for i, nm in enumerate(geo):
        uav = 0 if nm.endswith("1") else 1
        x0[i] = moving_q[uav][0 if nm[0] == "x" else 1]
    pieces = prog.blocks[0].A[:, :s_idx] @ x0[:s_idx] * -1.0 + prog.blocks[0].b
    x0[s_idx] = float(np.min(pieces)) - 1.0
    for uav, idx in power_index.items():
        cur = state.p1 if uav == 0 else state.p2
        x0[idx] = 0.5 * (np.minimum(cur[: len(idx)] / cm.p_com_max, 1.0) + 1.0) if not kind.equal_power \
            else 0.5 * (min(float(np.max(cur)) / cm.p_com_max, 1.0) + 1.0)
    prog.x_start = x0
    return prog


def build_slave_subproblem(state: SolverState, s: ScenarioConfig, vertical: bool = False,
                           equal_power: bool = False, debug: bool = False) -> SubproblemProgram:
    """Convex restriction of the slave step around ``state`` (master fixed)."""
    prog = _build(SubproblemKind(Step.SLAVE, vertical, equal_power), state, s)
    if debug:
        _assert_convex(prog)
    return prog


def build_master_subproblem(state: SolverState, s: ScenarioConfig, vertical: bool = False,
                            equal_power: bool = False, debug: bool = False) -> SubproblemProgram:
    """Convex restriction of the master step around ``state`` (slave fixed).

    With ``vertical`` the slave is carried along at x2 = x1 so the pair moves
    together; both schedules are then decision variables.
    """
    prog = _build(SubproblemKind(Step.MASTER, vertical, equal_power), state, s)
    if debug:
        _assert_convex(prog)
    return prog


def _assert_convex(prog: ConvexProgram) -> None:
    bad = check_convexity(prog)
    if bad:
        raise AssertionError("convexity spot-check failed for: " + ", ".join(bad))


def build_subproblem(kind: SubproblemKind, state: SolverState, s: ScenarioConfig,
                     debug: bool = False) -> SubproblemProgram:
    builder = build_slave_subproblem if kind.tag is Step.SLAVE else build_master_subproblem
    return builder(state, s, kind.vertical, kind.equal_power, debug)


def _extract(prog: SubproblemProgram, rep: SolveReport, state: SolverState, s: ScenarioConfig,
             kind: SubproblemKind) -> SolverState:
    q1, q2 = prog.positions(rep.x)
    if kind.tag is Step.MASTER:
        # recompute through the placement rule so C2 holds exactly
        q1 = (master_x_for(float(q1[1]), s.mission.target_x, s.radar.theta_d), float(q1[1]))
    if kind.vertical:
        q2 = (q1[0], float(q2[1]))
    f = Formation(tuple(q1), tuple(q2))
    minimal = SolverState.minimal(f, s, kind.equal_power)
    p1 = minimal.p1 if 0 in prog.power_index else state.p1
    p2 = minimal.p2 if 1 in prog.power_index else state.p2
    return SolverState(f, p1, p2)


@dataclass(frozen=True)
class SCAIterate:
    iteration: int
    objective: float
    formation: Formation


@dataclass(frozen=True)
class SCAResult:
    state: SolverState
    iterates: list[SCAIterate]
    status: str
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1


def _rel_change(new: float, old: float) -> float:
    return abs(new - old) / max(abs(old), 1e-12)


def sca_solve(kind: SubproblemKind, cfg: SCAConfig, s: ScenarioConfig,
              start: SolverState) -> SCAResult:
    """Iterate convex restrictions until the relative gain drops below epsilon.

    Candidates that fail the exact constraint re-check or that would lower
    the objective are rejected and end the loop with the last good iterate.
    """
    _check_start(start, s)
    state = start
    obj = objective_tilde(state.formation, s.radar)
    iterates = [SCAIterate(0, obj, state.formation)]
    status, converged = "max-iterations", False
    for j in range(1, cfg.max_iters + 1):
        prog = build_subproblem(kind, state, s, debug=cfg.debug)
        rep = solve(prog, tol=cfg.solver_tol)
        if not rep.optimal:
            status = rep.status
            break
        cand = _extract(prog, rep, state, s, kind)
        if not cand.feasibility(s).feasible:
            status, converged = "rejected-infeasible", True
            break
        new = objective_tilde(cand.formation, s.radar)
        if new < obj:
            # no gain beyond solver noise: the expansion point is a fixed point
            status, converged = ("converged", True) if new >= obj - MONOTONE_TOL \
                else ("rejected-decrease", True)
            break
        change = _rel_change(new, obj)
        state, obj = cand, new
        iterates.append(SCAIterate(j, obj, state.formation))
        if change <= cfg.epsilon:
            status, converged = "converged", True
            break
    return SCAResult(state, iterates, status, converged)


@dataclass(frozen=True)
class AORecord:
    outer: int
    subproblem: str
    objective: float
    formation: Formation
    p1: np.ndarray
    p2: np.ndarray
    inner_iterations: int
    inner_status: str
    slacks: dict[str, float]

    def to_json(self) -> dict[str, Any]:
        return {
            "outer": self.outer,
            "subproblem": self.subproblem,
            "objective": self.objective,
            "formation": self.formation.to_dict(),
            "p1_watts": [float(v) for v in self.p1],
            "p2_watts": [float(v) for v in self.p2],
            "inner_iterations": self.inner_iterations,
            "inner_status": self.inner_status,
            "slacks": self.slacks,
        }


@dataclass
class AOTrace:
    records: list[AORecord] = field(default_factory=list)

    @property
    def objectives(self) -> list[float]:
        return [r.objective for r in self.records]

    def to_json(self) -> list[dict[str, Any]]:
        return [r.to_json() for r in self.records]


TRACE_COLUMNS = ("iteration", "objective", "subproblem")


@dataclass
class RunReport:
    mode: str
    scenario_fingerprint: str
    state: SolverState
    objective_tilde: float
    coverage_m2: float
    converged: bool
    outer_iterations: int
    trace: AOTrace
    feasibility: FeasibilityReport
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def formation(self) -> Formation:
        return self.state.formation

    def to_json(self, s: ScenarioConfig) -> dict[str, Any]:
        metrics = compute_metrics(self.formation, s)
        dt = s.mission.slot_duration
        return {
            "mode": self.mode,
            "scenario_fingerprint": self.scenario_fingerprint,
            "formation": self.formation.to_dict(),
            "objective_tilde_m": self.objective_tilde,
            "coverage_m2": self.coverage_m2,
            "b_perp_m": metrics.b_perp,
            "h_amb_m": metrics.to_json()["h_amb_m"],
            "metrics": metrics.to_json(),
            "energy_j": [float(np.sum(self.state.p1) * dt), float(np.sum(self.state.p2) * dt)],
            "p1_watts": [float(v) for v in self.state.p1],
            "p2_watts": [float(v) for v in self.state.p2],
            "converged": self.converged,
            "outer_iterations": self.outer_iterations,
            "constraints": self.feasibility.to_json(),
            "trace": self.trace.to_json(),
            "metadata": dict(self.metadata),
        }

    def dumps(self, s: ScenarioConfig) -> str:
        return json.dumps(self.to_json(s), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write_json(self, path: str | Path, s: ScenarioConfig) -> None:
        Path(path).write_text(self.dumps(s), encoding="utf-8")

    def write_trace_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for rec in self.trace.records:
                w.writerow([rec.outer, repr(rec.objective), rec.subproblem])

    def write_schedules_csv(self, path: str | Path, s: ScenarioConfig) -> None:
        f = self.formation
        comms.write_schedules_csv(
            path, self.state.p1, self.state.p2,
            comms.rates(f.q1, self.state.p1, s, 0), comms.rates(f.q2, self.state.p2, s, 1))


# ---------------------------------------------------------------- initialization

def documented_initializations(s: ScenarioConfig) -> list[Formation]:
    """Three spread-out feasible starts for robustness checks.

    The master sits at the altitude ceiling.  The slave is displaced
    perpendicular to the master line of sight (away from the target side) by
    25%, 50% and 90% of the way through the allowed perpendicular-baseline
    window, then slid along that line of sight down to 50%, 70% and 95% of
    the master altitude.
    """
    th, x_t = s.thresholds, s.mission.target_x
    t = math.tan(s.radar.theta_d)
    kappa = math.sqrt(t * t + 1.0)
    z1 = th.z_max
    x1 = master_x_for(z1, x_t, s.radar.theta_d)
    lam_r1s1 = s.radar.wavelength * t * z1
    lo, hi = lam_r1s1 / th.h_amb_max, lam_r1s1 / th.h_amb_min
    out = []
    for frac, drop in ((0.25, 0.5), (0.5, 0.3), (0.9, 0.05)):
        bperp = lo + frac * (hi - lo)
        slide = t * bperp + kappa * drop * z1
        x2 = x1 + bperp / kappa + slide * t / kappa
        z2 = z1 + t * bperp / kappa - slide / kappa
        out.append(Formation((x1, z1), (min(x2, x_t), max(z2, th.z_min))))
    return out


def coarse_initial_state(s: ScenarioConfig, mode: str = "proposed",
                         criterion: str = "objective") -> SolverState:
    """Feasible start from a coarse oracle grid, refined if the grid is empty."""
    from .oracle import GridSpec, grid_search

    vertical = mode == "benchmark1"
    equal = mode == "benchmark2"
    for divisions in (40, 80, 160):
        spec = GridSpec.coarse(s, divisions)
        res = grid_search(s, spec, vertical=vertical, equal_power=equal, criterion=criterion)
        if res.found:
            return SolverState.minimal(res.formation, s, equal)
    raise InfeasibleScenarioError("no feasible formation on the initialization grids")


def _initial_state(s: ScenarioConfig, init, mode: str) -> SolverState:
    equal = mode == "benchmark2"
    if init is None:
        return coarse_initial_state(s, mode)
    state = init if isinstance(init, SolverState) else SolverState.minimal(init, s, equal)
    if mode == "benchmark1" and abs(state.formation.x1 - state.formation.x2) > 1e-9:
        f = state.formation
        state = SolverState.minimal(Formation(f.q1, (f.x1, f.z2)), s, equal)
    if not state.feasibility(s).feasible:
        state = coarse_initial_state(s, mode, criterion="slack")
    return state


def _record(outer: int, tag: str, state: SolverState, obj: float, inner: SCAResult | None,
            s: ScenarioConfig) -> AORecord:
    rep = state.feasibility(s)
    return AORecord(outer, tag, obj, state.formation, state.p1, state.p2,
                    0 if inner is None else inner.iterations,
                    "initial" if inner is None else inner.status,
                    {k: r.slack for k, r in rep.records.items()})


def _alternate(s: ScenarioConfig, init, cfg: SCAConfig, mode: str) -> RunReport:
    vertical = mode == "benchmark1"
    equal = mode == "benchmark2"
    state = _initial_state(s, init, mode)
    obj = objective_tilde(state.formation, s.radar)
    trace = AOTrace([_record(0, "init", state, obj, None, s)])
    converged = False
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        start_obj = obj
        for tag in (Step.SLAVE, Step.MASTER):
            res = sca_solve(SubproblemKind(tag, vertical, equal), cfg, s, state)
            state = res.state
            obj = res.iterates[-1].objective
            trace.records.append(_record(outer, tag.value, state, obj, res, s))
        if _rel_change(obj, start_obj) <= cfg.epsilon:
            converged = True
            break
    f = state.formation
    return RunReport(
        mode=mode,
        scenario_fingerprint=fingerprint(s),
        state=state,
        objective_tilde=objective_tilde(f, s.radar),
        coverage_m2=coverage(f, s.mission, s.radar),
        converged=converged,
        outer_iterations=outer,
        trace=trace,
        feasibility=state.feasibility(s),
        metadata={"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                  "version": __version__},
    )


def ao_solve(s: ScenarioConfig, init: Formation | SolverState | None = None,
             epsilon: float = 1e-4, cfg: SCAConfig | None = None) -> RunReport:
    """Alternate slave and master SCA steps until the outer gain falls below epsilon.

    Without ``init`` the start is the best point of a coarse feasibility grid;
    an infeasible ``init`` is replaced by the coarse-grid point with the largest
    normalized constraint margin.
    """
    cfg = cfg or SCAConfig(epsilon=epsilon)
    return _alternate(s, init, cfg, "proposed")


def benchmark1_vertical(s: ScenarioConfig, init: Formation | SolverState | None = None,
                        epsilon: float = 1e-4, cfg: SCAConfig | None = None) -> RunReport:
    cfg = cfg or SCAConfig(epsilon=epsilon)
    return _alternate(s, init, cfg, "benchmark1")


def benchmark2_equal_power(s: ScenarioConfig, init: Formation | SolverState | None = None,
                           epsilon: float = 1e-4, cfg: SCAConfig | None = None) -> RunReport:
    cfg = cfg or SCAConfig(epsilon=epsilon)
    return _alternate(s, init, cfg, "benchmark2")


MODES = {
    "proposed": ao_solve,
    "benchmark1": benchmark1_vertical,
    "benchmark2": benchmark2_equal_power,
}
