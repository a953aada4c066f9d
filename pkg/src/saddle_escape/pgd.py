"""Projected gradient descent and the saddle-trap demonstration.

Fixed-step projected gradient descent can converge to a strict saddle
with positive probability: on the bundled planar objective over
x + y <= 0, any iterate of the form (x, -x) with x >= 0 and step size
alpha < 2/3 stays on that line forever and slides monotonically into the
origin, a strict saddle.  A whole box of starts

    B_eps = {0.5 - eps <= x <= 0.5,  -0.5 - eps <= y <= -0.5}

lands on the line after a single projected step whenever
``basin_condition(eps, alpha)`` holds, so every start in the box is
trapped.  This module provides the generic PGD loop, the closed-form
on-line recursion, the basin inequality, and checkers for both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Polytope, contains, project_polytope
from .oracles import ObjectiveOracle, Problem, counterexample_problem
from .sofw import (
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STEP_PGD,
    IterationRecord,
    IterationTrace,
)

LEMMA_ALPHA_MAX = 2.0 / 3.0


@dataclass(frozen=True)
class PgdConfig:
    """Constant step size, iteration cap, and movement stopping tolerance."""

    alpha: float
    max_iters: int = 200000
    stop_tol: float = 1e-12

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")

    @property
    def in_lemma_range(self) -> bool:
        return self.alpha < LEMMA_ALPHA_MAX


def pgd_step(oracle: ObjectiveOracle, P: Polytope, x, alpha: float) -> np.ndarray:
    """One projected gradient step from a feasible x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not contains(P, x):
        raise ValueError("x must be feasible")
    return project_polytope(P, x - alpha * oracle.grad(x))


def g_envelope(x: float) -> float:
    """(1 - 2 x^2) exp(-2 x^2); equals 1 at 0 and -exp(-2) at x = +-1,
    and those are its global extremes."""
    x = float(x)
    return (1.0 - 2.0 * x * x) * np.exp(-2.0 * x * x)


def online_update(x_k: float, alpha: float) -> float:
    """Closed-form next abscissa for iterates on the line y = -x.

    For 0 < alpha < 2/3 and x_k >= 0 the projected step from
    (x_k, -x_k) lands on (x_{k+1}, -x_{k+1}) with

        x_{k+1} = x_k - alpha (1 - 2 x_k^2) x_k e^{-2 x_k^2} - (alpha/2) x_k,

    which stays in [0, x_k]; the only fixed point is 0.
    """
    x_k = float(x_k)
    if x_k < 0:
        raise ValueError("on-line recursion requires x_k >= 0")
    if not 0.0 < alpha < LEMMA_ALPHA_MAX:
        raise ValueError("on-line recursion requires 0 < alpha < 2/3")
    e = np.exp(-2.0 * x_k * x_k)
    return x_k - alpha * (1.0 - 2.0 * x_k * x_k) * x_k * e - 0.5 * alpha * x_k


def basin_condition(eps: float, alpha: float) -> bool:
    """Sufficient condition for every start in B_eps to land on the
    line y = -x after one projected step of size alpha."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not 0.0 < alpha < LEMMA_ALPHA_MAX:
        raise ValueError("basin inequality is stated for 0 < alpha < 2/3")
    margin = (-2.0 * eps + 0.5 * alpha
              + alpha * (-3.0 * eps + 4.0 * eps ** 3)
              * np.exp(-0.25) * np.exp(-((0.5 + eps) ** 2)))
    return bool(margin >= 0.0)


def run_pgd(problem: Problem, cfg: PgdConfig) -> IterationTrace:
    """Iterate pgd_step until the movement drops below stop_tol.

    Records f, the iterate, and its distance to the origin per
    iteration; the stationarity columns are left as NaN (classify the
    final point separately when needed).
    """
    oracle, P = problem.oracle, problem.feasible_set
    x = problem.x0.copy()
    trace = IterationTrace()
    for k in range(cfg.max_iters):
        x_next = pgd_step(oracle, P, x, cfg.alpha)
        moved = float(np.linalg.norm(x_next - x))
        trace.records.append(IterationRecord(
            k, float(oracle.eval(x)), np.nan, np.nan, STEP_PGD, moved,
            x.copy(), dist_origin=float(np.linalg.norm(x))))
        x = x_next
        if moved <= cfg.stop_tol:
            trace.records.append(IterationRecord(
                k + 1, float(oracle.eval(x)), np.nan, np.nan, "stop", 0.0,
                x.copy(), dist_origin=float(np.linalg.norm(x))))
            trace.status = STATUS_CONVERGED
            return trace
    trace.records.append(IterationRecord(
        cfg.max_iters, float(oracle.eval(x)), np.nan, np.nan, "stop", 0.0,
        x.copy(), dist_origin=float(np.linalg.norm(x))))
    trace.status = STATUS_MAX_ITERS
    return trace


@dataclass(frozen=True)
class LineCheckReport:
    """Outcome of running the trap dynamics from (x0, -x0)."""

    x0: float
    alpha: float
    iterations: int
    final_x: float
    max_line_defect: float
    max_monotonicity_defect: float
    max_update_mismatch: float
    reached_zero: bool

    @property
    def passed(self) -> bool:
        return (self.max_line_defect <= 1e-12
                and self.max_monotonicity_defect <= 1e-12
                and self.max_update_mismatch <= 1e-12
                and self.reached_zero)


def line_invariance_check(x0: float, alpha: float, max_iters: int = 100000,
                          zero_tol: float = 1e-8) -> LineCheckReport:
    """Run PGD from (x0, -x0) and the scalar recursion side by side.

    Asserted facts (reported as defects): the 2-D iterates keep
    |x + y| <= 1e-12, the abscissa never increases by more than 1e-12,
    both recursions agree to 1e-12, and the abscissa reaches zero_tol.
    """
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    problem = counterexample_problem(x0=(x0, -x0))
    oracle, P = problem.oracle, problem.feasible_set
    z = np.array([float(x0), -float(x0)])
    s = float(x0)
    line_defect = 0.0
    mono_defect = 0.0
    mismatch = 0.0
    k = 0
    while k < max_iters and s > zero_tol:
        z_next = pgd_step(oracle, P, z, alpha)
        s_next = online_update(s, alpha)
        line_defect = max(line_defect, abs(float(z_next[0] + z_next[1])))
        mono_defect = max(mono_defect, float(z_next[0]) - float(z[0]))
        mismatch = max(mismatch,
                       abs(float(z_next[0]) - s_next),
                       abs(float(z_next[1]) + s_next))
        z, s = z_next, s_next
        k += 1
    return LineCheckReport(x0, alpha, k, float(z[0]), line_defect,
                           mono_defect, mismatch, s <= zero_tol)


@dataclass(frozen=True)
class BasinRunResult:
    start: tuple[float, float]
    iterations: int
    final_dist: float
    first_step_on_line: bool
    first_step_x_nonneg: bool


@dataclass(frozen=True)
class BasinSweepResult:
    eps: float
    alpha: float
    target: float
    runs: list[BasinRunResult] = field(default_factory=list)

    @property
    def n_converged(self) -> int:
        return sum(1 for r in self.runs if r.final_dist <= self.target)

    @property
    def all_converged(self) -> bool:
        return self.n_converged == len(self.runs)

    @property
    def all_first_steps_on_line(self) -> bool:
        return all(r.first_step_on_line and r.first_step_x_nonneg for r in self.runs)


def basin_sweep(alpha: float, eps: float, samples: int, seed: int,
                max_iters: int = 200000, target: float = 1e-5) -> BasinSweepResult:
    """Run PGD from seeded uniform starts in B_eps and measure capture.

    Each run reports whether the first iterate landed exactly on the
    line y = -x (within 1e-12, with x >= 0) and how close to the origin
    the run finished within the iteration budget.
    """
    rng = np.random.default_rng(seed)
    problem = counterexample_problem()
    oracle, P = problem.oracle, problem.feasible_set
    runs = []
    for _ in range(samples):
        x0 = rng.uniform(0.5 - eps, 0.5)
        y0 = rng.uniform(-0.5 - eps, -0.5)
        z = np.array([x0, y0])
        z1 = pgd_step(oracle, P, z, alpha)
        on_line = abs(float(z1[0] + z1[1])) <= 1e-12
        x_nonneg = float(z1[0]) >= 0.0
        z = z1
        k = 1
        while k < max_iters and float(np.linalg.norm(z)) > target:
            z_next = pgd_step(oracle, P, z, alpha)
            if float(np.linalg.norm(z_next - z)) <= 1e-16:
                z = z_next
                break
            z = z_next
            k += 1
        runs.append(BasinRunResult((x0, y0), k, float(np.linalg.norm(z)),
                                   on_line, x_nonneg))
    return BasinSweepResult(eps, alpha, target, runs)
