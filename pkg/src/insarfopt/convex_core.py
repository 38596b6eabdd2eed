"""Small dense log-barrier interior-point solver.

Programs maximize a linear objective ``c @ x`` over box bounds and a list of
constraint blocks, each a stack of convex scalar functions ``f_k(x) <= 0``:

AffineBlock     A x - b
QuadraticBlock  alpha_k |F x + g|^2 + Q_k x - r_k      (alpha_k >= 0)
NormBlock       coef |G x + h| + a x + b               (coef >= 0)
PolyBlock       sum_j c_j (a x + b)^j - rhs            (c_j >= 0, a x + b >= 0)

Every block carries a positive ``scale`` that divides its rows, so the
barrier sees O(1) residuals.  The solver is deterministic: no randomness,
fixed iteration order, dense numpy linear algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FEASIBILITY_TOL = 1e-7
STRICT_MARGIN = 1e-9


def _as2d(a, n: int) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.shape[1] != n:
        raise ValueError(f"block expects {n} columns, got {arr.shape}")
    return arr


class Block:
    kind = "abstract"
    names: list[str]
    scale: float

    def values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grads(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray, w: np.ndarray) -> np.ndarray | None:
        """Weighted Hessian sum over rows; ``None`` for affine blocks."""
        return None

    def describe(self) -> list[str]:
        raise NotImplementedError

    def in_domain(self, x: np.ndarray) -> bool:
        return True

    def __len__(self) -> int:
        return len(self.names)


class AffineBlock(Block):
    kind = "affine"

    def __init__(self, A, b, names: Sequence[str], scale: float = 1.0, n: int | None = None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        self.A = A if n is None else _as2d(A, n)
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        self.names = list(names)
        self.scale = float(scale)
        if not (len(self.names) == self.A.shape[0] == self.b.shape[0]):
            raise ValueError("affine block row count mismatch")

    def values(self, x):
        return (self.A @ x - self.b) / self.scale

    def grads(self, x):
        return self.A / self.scale

    def describe(self):
        return [f"{nm}: affine  {_fmt(row)} . x <= {bi:.12g}  (scale {self.scale:.3g})"
                for nm, row, bi in zip(self.names, self.A, self.b)]


class QuadraticBlock(Block):
    kind = "convex-quadratic"

    def __init__(self, F, g, alpha, Q, r, names: Sequence[str], scale: float = 1.0):
        self.F = np.atleast_2d(np.asarray(F, dtype=float))
        n = self.F.shape[1]
        self.g = np.atleast_1d(np.asarray(g, dtype=float))
        self.alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        self.Q = _as2d(Q, n)
        self.r = np.atleast_1d(np.asarray(r, dtype=float))
        self.names = list(names)
        self.scale = float(scale)
        if np.any(self.alpha < 0):
            raise ValueError("quadratic block needs alpha >= 0 for convexity")
        m = len(self.names)
        if not (self.alpha.shape[0] == self.Q.shape[0] == self.r.shape[0] == m):
            raise ValueError("quadratic block row count mismatch")
        self._FtF2 = 2.0 * self.F.T @ self.F

    def values(self, x):
        u = self.F @ x + self.g
        return (self.alpha * (u @ u) + self.Q @ x - self.r) / self.scale

    def grads(self, x):
        u = self.F @ x + self.g
        return (np.outer(self.alpha, 2.0 * self.F.T @ u) + self.Q) / self.scale

    def hess(self, x, w):
        return float(w @ self.alpha) / self.scale * self._FtF2

    def describe(self):
        return [f"{nm}: quadratic  {a:.6g}*|F x + g|^2 + {_fmt(q)} . x <= {ri:.12g}"
                f"  F={_fmt(self.F.ravel())} g={_fmt(self.g)} (scale {self.scale:.3g})"
                for nm, a, q, ri in zip(self.names, self.alpha, self.Q, self.r)]


class NormBlock(Block):
    kind = "second-order-cone"

    def __init__(self, G, h, coef: float, a, b: float, name: str, scale: float = 1.0):
        self.G = np.atleast_2d(np.asarray(G, dtype=float))
        self.h = np.atleast_1d(np.asarray(h, dtype=float))
        self.coef = float(coef)
        self.a = np.asarray(a, dtype=float)
        self.b = float(b)
        self.names = [name]
        self.scale = float(scale)
        if self.coef < 0:
            raise ValueError("norm block needs coef >= 0 for convexity")

    def values(self, x):
        u = self.G @ x + self.h
        return np.array([(self.coef * math.sqrt(u @ u) + self.a @ x + self.b) / self.scale])

    def grads(self, x):
        u = self.G @ x + self.h
        nrm = max(math.sqrt(u @ u), 1e-300)
        return ((self.coef * (self.G.T @ u) / nrm + self.a) / self.scale)[None, :]

    def hess(self, x, w):
        u = self.G @ x + self.h
        nrm = max(math.sqrt(u @ u), 1e-12)
        inner = np.eye(len(u)) / nrm - np.outer(u, u) / nrm ** 3
        return float(w[0]) * self.coef / self.scale * (self.G.T @ inner @ self.G)

    def describe(self):
        return [f"{self.names[0]}: norm  {self.coef:.6g}*|G x + h| + {_fmt(self.a)} . x + "
                f"{self.b:.12g} <= 0  G={_fmt(self.G.ravel())} h={_fmt(self.h)}"
                f" (scale {self.scale:.3g})"]


class PolyBlock(Block):
    """Scalar polynomial with nonnegative coefficients in ``u = a x + b >= 0``."""

    kind = "monotone-polynomial"

    def __init__(self, a, b: float, coefs: dict[int, float], rhs: float, name: str,
                 scale: float = 1.0):
        self.a = np.asarray(a, dtype=float)
        self.b = float(b)
        self.coefs = {int(k): float(v) for k, v in sorted(coefs.items())}
        if any(v < 0 for v in self.coefs.values()) or any(k < 0 for k in self.coefs):
            raise ValueError("polynomial block needs nonnegative powers and coefficients")
        self.rhs = float(rhs)
        self.names = [name]
        self.scale = float(scale)

    def _u(self, x) -> float:
        return float(self.a @ x + self.b)

    def in_domain(self, x):
        return self._u(x) >= 0.0

    def values(self, x):
        u = self._u(x)
        return np.array([(sum(c * u ** k for k, c in self.coefs.items()) - self.rhs) / self.scale])

    def grads(self, x):
        u = self._u(x)
        d = sum(k * c * u ** (k - 1) for k, c in self.coefs.items() if k >= 1)
        return (d * self.a / self.scale)[None, :]

    def hess(self, x, w):
        u = self._u(x)
        d2 = sum(k * (k - 1) * c * u ** (k - 2) for k, c in self.coefs.items() if k >= 2)
        return float(w[0]) * d2 / self.scale * np.outer(self.a, self.a)

    def describe(self):
        poly = " + ".join(f"{c:.6g}*u^{k}" for k, c in self.coefs.items())
        return [f"{self.names[0]}: polynomial  {poly} <= {self.rhs:.12g}  "
                f"u = {_fmt(self.a)} . x + {self.b:.12g} (scale {self.scale:.3g})"]


def _fmt(v) -> str:
    return "[" + ", ".join(f"{float(e):.6g}" for e in np.ravel(v)) + "]"


@dataclass
class ConvexProgram:
    """Maximize ``objective @ x`` subject to blocks and ``lower <= x <= upper``."""

    var_names: list[str]
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    blocks: list[Block] = field(default_factory=list)
    x_start: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.var_names)
        self.objective = np.asarray(self.objective, dtype=float).reshape(n)
        self.lower = np.asarray(self.lower, dtype=float).reshape(n)
        self.upper = np.asarray(self.upper, dtype=float).reshape(n)
        if self.x_start is not None:
            self.x_start = np.asarray(self.x_start, dtype=float).reshape(n)

    @property
    def n(self) -> int:
        return len(self.var_names)

    def add(self, block: Block) -> None:
        self.blocks.append(block)

    @property
    def constraint_names(self) -> list[str]:
        return [nm for b in self.blocks for nm in b.names]

    @property
    def num_constraints(self) -> int:
        return sum(len(b) for b in self.blocks)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([b.values(x) for b in self.blocks])

    def bound_violation(self, x: np.ndarray) -> float:
        return float(max(np.max(self.lower - x, initial=-np.inf), np.max(x - self.upper, initial=-np.inf)))


@dataclass
class SolveReport:
    status: str
    x: np.ndarray
    objective: float
    residuals: np.ndarray
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Barrier:
    """Barrier oracle for ``max c x`` with rows f(x) - shift*sigma <= 0."""

    def __init__(self, prog: ConvexProgram, phase1: bool):
        self.prog = prog
        self.phase1 = phase1
        n = prog.n
        if phase1:
            self.c = np.zeros(n + 1)
            self.c[-1] = -1.0
            # a wide box around the start keeps the phase-I barrier bounded below
            x0 = prog.x_start if prog.x_start is not None else np.zeros(n)
            reach = 1e3 * np.maximum(1.0, np.abs(x0))
            lo = np.where(np.isfinite(prog.lower), prog.lower, x0 - reach)
            hi = np.where(np.isfinite(prog.upper), prog.upper, x0 + reach)
            self.lower = np.append(lo, -1.0)
            self.upper = np.append(hi, np.inf)
        else:
            self.c = prog.objective
            self.lower, self.upper = prog.lower, prog.upper
        self.has_lo = np.isfinite(self.lower)
        self.has_hi = np.isfinite(self.upper)
        self.m = prog.num_constraints + int(self.has_lo.sum() + self.has_hi.sum())

    def split(self, y):
        return (y[:-1], y[-1]) if self.phase1 else (y, 0.0)

    def rows(self, y):
        x, sigma = self.split(y)
        return self.prog.residuals(x) - sigma

    def strictly_inside(self, y) -> bool:
        x, _ = self.split(y)
        if not all(b.in_domain(x) for b in self.prog.blocks):
            return False
        if np.any(y[self.has_lo] <= self.lower[self.has_lo]):
            return False
        if np.any(y[self.has_hi] >= self.upper[self.has_hi]):
            return False
        f = self.rows(y)
        return bool(np.all(np.isfinite(f)) and np.all(f < 0))

    def value(self, y, t) -> float:
        f = self.rows(y)
        lo = y[self.has_lo] - self.lower[self.has_lo]
        hi = self.upper[self.has_hi] - y[self.has_hi]
        return float(-t * (self.c @ y) - np.sum(np.log(-f)) - np.sum(np.log(lo)) - np.sum(np.log(hi)))

    def derivatives(self, y, t):
        x, _ = self.split(y)
        n = len(y)
        grad = -t * self.c.copy()
        hess = np.zeros((n, n))
        nx = self.prog.n
        for b in self.prog.blocks:
            f = b.values(x)
            if self.phase1:
                f = f - y[-1]
            w = 1.0 / (-f)
            J = b.grads(x)
            if self.phase1:
                J = np.hstack([J, -np.ones((J.shape[0], 1))])
            grad += J.T @ w
            hess += (J.T * (w * w)) @ J
            h = b.hess(x, w)
            if h is not None:
                hess[:nx, :nx] += h
        lo = np.where(self.has_lo, y - self.lower, np.inf)
        hi = np.where(self.has_hi, self.upper - y, np.inf)
        grad += -1.0 / lo + 1.0 / hi
        hess[np.diag_indices(n)] += 1.0 / lo ** 2 + 1.0 / hi ** 2
        return grad, hess


def _newton_step(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    # Jacobi scaling keeps mixed-unit systems well conditioned.
    d = np.sqrt(np.maximum(np.abs(np.diag(hess)), 1e-300))
    hs = hess / np.outer(d, d)
    gs = grad / d
    try:
        step = np.linalg.solve(hs, -gs)
    except np.linalg.LinAlgError:
        step = np.linalg.lstsq(hs + 1e-12 * np.eye(len(gs)), -gs, rcond=None)[0]
    return step / d


def _center(bar: _Barrier, y: np.ndarray, t: float, max_steps: int, stop=None):
    steps = 0
    for _ in range(max_steps):
        grad, hess = bar.derivatives(y, t)
        dy = _newton_step(hess, grad)
        decrement = float(-grad @ dy)
        if not np.isfinite(decrement) or decrement <= 2e-9:
            break
        phi0 = bar.value(y, t)
        alpha = 1.0
        for _ in range(80):
            cand = y + alpha * dy
            if bar.strictly_inside(cand) and bar.value(cand, t) <= phi0 - 0.25 * alpha * decrement:
                break
            alpha *= 0.5
        else:
            break
        stalled = np.max(np.abs(cand - y)) <= 1e-13 * (1.0 + np.max(np.abs(y)))
        y = cand
        steps += 1
        if stalled:
            break
        if stop is not None and stop(y):
            break
    return y, steps


def _nudge_into_box(prog: ConvexProgram, x: np.ndarray) -> np.ndarray:
    x = x.copy()
    width = prog.upper - prog.lower
    margin = np.where(np.isfinite(width), np.minimum(1e-6 * np.maximum(1.0, width), width / 4), 1e-6)
    lo_ok = np.isfinite(prog.lower)
    hi_ok = np.isfinite(prog.upper)
    x[lo_ok] = np.maximum(x[lo_ok], prog.lower[lo_ok] + margin[lo_ok])
    x[hi_ok] = np.minimum(x[hi_ok], prog.upper[hi_ok] - margin[hi_ok])
    return x


def _empty_box(prog: ConvexProgram) -> bool:
    return bool(np.any(prog.lower >= prog.upper))


def phase1_feasible_point(prog: ConvexProgram, max_steps: int = 2000) -> SolveReport:
    """Find a point satisfying every row with margin >= STRICT_MARGIN.

    A strictly feasible ``x_start`` is returned unchanged.
    """
    n = prog.n
    x0 = prog.x_start if prog.x_start is not None else np.zeros(n)
    if _empty_box(prog):
        return SolveReport("infeasible", x0.copy(), math.nan, prog.residuals(x0), 0)
    if (prog.bound_violation(x0) < 0 and all(b.in_domain(x0) for b in prog.blocks)
            and np.all(prog.residuals(x0) <= -STRICT_MARGIN)):
        return SolveReport("optimal", x0.copy(), float(prog.objective @ x0), prog.residuals(x0), 0)

    x = _nudge_into_box(prog, x0)
    if not all(b.in_domain(x) for b in prog.blocks):
        return SolveReport("infeasible", x, math.nan, prog.residuals(x), 0)
    f = prog.residuals(x)
    sigma = float(np.max(f, initial=0.0)) + 1.0
    bar = _Barrier(prog, phase1=True)
    y = np.append(x, max(sigma, -0.5))
    target = -1e-6

    def done(yy):
        return float(np.max(prog.residuals(yy[:-1]), initial=-1.0)) <= target

    t, total = 1.0, 0
    while total < max_steps:
        y, steps = _center(bar, y, t, 200, stop=done)
        total += steps
        if done(y):
            xs = y[:-1]
            return SolveReport("optimal", xs, float(prog.objective @ xs), prog.residuals(xs), total)
        if bar.m / t < 1e-12:
            break
        t *= 10.0
    xs = y[:-1]
    return SolveReport("infeasible", xs, math.nan, prog.residuals(xs), total)


def solve(prog: ConvexProgram, tol: float = 1e-8, t0: float = 1.0, mu: float = 10.0,
          max_newton: int = 3000) -> SolveReport:
    """Barrier method; stops when the duality-gap bound m/t drops to ``tol``."""
    start = phase1_feasible_point(prog)
    if not start.optimal:
        return start
    bar = _Barrier(prog, phase1=False)
    y = start.x.copy()
    t, total = t0, start.iterations
    status = "max-iterations"
    while total < max_newton:
        y, steps = _center(bar, y, t, 300)
        total += steps
        if bar.m / t <= tol:
            status = "optimal"
            break
        t *= mu
    res = prog.residuals(y)
    if status == "optimal" and np.any(res > FEASIBILITY_TOL):
        status = "max-iterations"
    return SolveReport(status, y, float(prog.objective @ y), res, total)


def dump_program(prog: ConvexProgram) -> str:
    """Text form, one constraint per line, for triage."""
    lines = [f"variables ({prog.n}): " + ", ".join(prog.var_names),
             "maximize " + _fmt(prog.objective) + " . x"]
    for nm, lo, hi in zip(prog.var_names, prog.lower, prog.upper):
        if np.isfinite(lo) or np.isfinite(hi):
            lines.append(f"bound {lo:.12g} <= {nm} <= {hi:.12g}")
    for b in prog.blocks:
        lines.extend(b.describe())
    if prog.x_start is not None:
        lines.append("start " + _fmt(prog.x_start))
    return "\n".join(lines) + "\n"


def check_convexity(prog: ConvexProgram, pairs: int = 32, seed: int = 0) -> list[str]:
    """Midpoint-inequality spot check per block; returns offending row names."""
    rng = np.random.default_rng(seed)
    center = prog.x_start if prog.x_start is not None else np.zeros(prog.n)
    lo = np.where(np.isfinite(prog.lower), prog.lower, center - 10 * (1 + np.abs(center)))
    hi = np.where(np.isfinite(prog.upper), prog.upper, center + 10 * (1 + np.abs(center)))
    bad: list[str] = []
    for b in prog.blocks:
        for _ in range(pairs):
            xa, xb = rng.uniform(lo, hi), rng.uniform(lo, hi)
            xm = 0.5 * (xa + xb)
            if not (b.in_domain(xa) and b.in_domain(xb)):
                continue
            fa, fb, fm = b.values(xa), b.values(xb), b.values(xm)
            slack = 0.5 * (fa + fb) - fm
            tol = 1e-9 * (1.0 + np.abs(fa) + np.abs(fb))
            for nm, s, tl in zip(b.names, slack, tol):
                if s < -tl and nm not in bad:
                    bad.append(nm)
    return bad
