"""Second-order Frank-Wolfe with fixed step sizes and a dynamic direction choice.

Each iteration solves both direction subproblems.  With X the
first-order measure and psi the second-order measure, the step taken is
whichever predicts the larger decrease:

    FO:  x + (X / L_tilde) s_hat          predicted gain X^2 / (2 L_tilde)
    SO:  x + (2 psi / rho_tilde) d_hat    predicted gain 2 psi^3 / (3 rho_tilde^2)

with L_tilde = max(L, g_max) and rho_tilde = max(rho, H_max).  The FO
step length is automatically <= 1 because X <= g_max <= L_tilde; the SO
step length is clamped to 1 to preserve feasibility (the clamp engages
only when psi > rho_tilde / 2, which the bundled problems never reach).
Every iterate stays feasible by convexity: both directions point at
feasible unit steps and the step length lies in [0, 1].

The guaranteed per-step decrease max{X^2/(2 L_tilde), 2 psi^3/(3 rho_tilde^2)}
summed against the gap f(x0) - f_min yields the iteration bounds checked
by ``complexity_bound``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .geometry import Polytope, contains
from .oracles import ObjectiveOracle, OracleConstants, Problem
from .stationarity import first_order_direction, second_order_direction

STEP_FO = "FO"
STEP_SO = "SO"
STEP_TERMINATE = "terminate"
STEP_PGD = "PGD"

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"

# Measures at or below this are treated as exact zeros (skips degenerate
# step-size formulas; eps_g = eps_H = 0 then recovers the exact rule).
EXACT_ZERO = 1e-12

RHO_FLOOR = 1e-8


@dataclass(frozen=True)
class SofwConfig:
    """Step-size constants and termination thresholds."""

    L_tilde: float
    rho_tilde: float
    eps_g: float = 1e-4
    eps_H: float = 1e-4
    max_iters: int = 10000
    clamp_steps: bool = True

    def __post_init__(self):
        if self.L_tilde <= 0 or self.rho_tilde <= 0:
            raise ValueError("L_tilde and rho_tilde must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.eps_g < 0 or self.eps_H < 0:
            raise ValueError("termination thresholds must be nonnegative")

    @classmethod
    def from_constants(cls, constants: OracleConstants, eps_g: float = 1e-4,
                       eps_H: float = 1e-4, max_iters: int = 10000,
                       clamp_steps: bool = True) -> "SofwConfig":
        return cls(
            L_tilde=max(constants.L, constants.g_max),
            rho_tilde=max(constants.rho, constants.H_max, RHO_FLOOR),
            eps_g=eps_g, eps_H=eps_H, max_iters=max_iters,
            clamp_steps=clamp_steps,
        )


@dataclass(frozen=True)
class IterationRecord:
    """One visited iterate and the action taken from it."""

    k: int
    f: float
    x_measure: float
    psi_measure: float
    step_kind: str
    step_length: float
    x: np.ndarray
    dist_origin: float | None = None


@dataclass
class IterationTrace:
    """Per-iteration history of a solver run."""

    records: list[IterationRecord] = field(default_factory=list)
    status: str = STATUS_MAX_ITERS

    def __len__(self):
        return len(self.records)

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def final_x(self) -> np.ndarray:
        return self.final.x

    def f_values(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    def iterates(self) -> np.ndarray:
        return np.vstack([r.x for r in self.records])

    def effective_steps(self) -> int:
        return sum(1 for r in self.records if r.step_kind in (STEP_FO, STEP_SO, STEP_PGD)
                   and r.step_length > 0)

    def to_csv(self, path) -> None:
        """Header row, 17-significant-digit decimals, '# status=...' footer."""
        n = self.records[0].x.shape[0] if self.records else 0
        with_dist = any(r.dist_origin is not None for r in self.records)
        header = ["k", "f", "X", "psi", "step_kind", "step_len"]
        header += [f"x_{i + 1}" for i in range(n)]
        if with_dist:
            header.append("dist_origin")
        fmt = lambda v: "nan" if v is None or np.isnan(v) else f"{v:.17g}"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for r in self.records:
                row = [str(r.k), fmt(r.f), fmt(r.x_measure), fmt(r.psi_measure),
                       r.step_kind, fmt(r.step_length)]
                row += [fmt(v) for v in r.x]
                if with_dist:
                    row.append(fmt(r.dist_origin if r.dist_origin is not None else np.nan))
                writer.writerow(row)
            fh.write(f"# status={self.status}\n")


def _clean(measure: float) -> float:
    return 0.0 if measure <= EXACT_ZERO else measure


def sofw_step(oracle: ObjectiveOracle, P: Polytope, x, cfg: SofwConfig,
              k: int = 0):
    """One dynamic step.  Returns (x_next, record); on termination
    x_next is x itself and the record's step_kind is 'terminate'."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not contains(P, x):
        raise ValueError("iterate left the feasible set")
    s_sol = first_order_direction(oracle, P, x)
    d_sol = second_order_direction(oracle, P, x)
    x_measure = _clean(-s_sol.value)
    psi_measure = _clean(-d_sol.value)
    f_val = float(oracle.eval(x))

    if x_measure <= cfg.eps_g and psi_measure <= cfg.eps_H:
        record = IterationRecord(k, f_val, x_measure, psi_measure,
                                 STEP_TERMINATE, 0.0, x.copy())
        return x, record

    fo_gain = x_measure ** 2 / (2.0 * cfg.L_tilde)
    so_gain = 2.0 * psi_measure ** 3 / (3.0 * cfg.rho_tilde ** 2)
    if fo_gain >= so_gain:
        step = x_measure / cfg.L_tilde
        x_next = x + step * s_sol.direction
        kind = STEP_FO
    else:
        step = 2.0 * psi_measure / cfg.rho_tilde
        if cfg.clamp_steps:
            step = min(1.0, step)
        x_next = x + step * d_sol.direction
        kind = STEP_SO
    if not contains(P, x_next):
        raise RuntimeError("step produced an infeasible iterate")
    record = IterationRecord(k, f_val, x_measure, psi_measure, kind, step, x.copy())
    return x_next, record


def run_sofw(problem: Problem, cfg: SofwConfig) -> IterationTrace:
    """Iterate until both measures pass their thresholds or max_iters."""
    trace = IterationTrace()
    x = problem.x0.copy()
    oracle, P = problem.oracle, problem.feasible_set
    for k in range(cfg.max_iters):
        x, record = sofw_step(oracle, P, x, cfg, k=k)
        trace.records.append(record)
        if record.step_kind == STEP_TERMINATE:
            trace.status = STATUS_CONVERGED
            return trace
    # cap reached: record the final point so the trace ends on an iterate
    s_sol = first_order_direction(oracle, P, x)
    d_sol = second_order_direction(oracle, P, x)
    trace.records.append(IterationRecord(
        cfg.max_iters, float(oracle.eval(x)), _clean(-s_sol.value),
        _clean(-d_sol.value), STATUS_MAX_ITERS, 0.0, x.copy()))
    trace.status = STATUS_MAX_ITERS
    return trace


def verify_decrease(trace: IterationTrace, cfg: SofwConfig,
                    tol: float = 1e-9) -> list[int]:
    """Indices where the guaranteed per-step decrease failed.

    Checks f(x_k) - f(x_{k+1}) >= max{X_k^2/(2 L~), 2 psi_k^3/(3 rho~^2)} - tol
    at every non-terminal step; empty when the constants are valid.
    """
    violations = []
    for i in range(len(trace.records) - 1):
        rec = trace.records[i]
        if rec.step_kind in (STEP_TERMINATE, STATUS_MAX_ITERS):
            continue
        required = max(rec.x_measure ** 2 / (2.0 * cfg.L_tilde),
                       2.0 * rec.psi_measure ** 3 / (3.0 * cfg.rho_tilde ** 2))
        achieved = rec.f - trace.records[i + 1].f
        if achieved < required - tol:
            violations.append(i)
    return violations


def complexity_bound(cfg: SofwConfig, f0: float, f_min: float):
    """Iteration bounds: (first-order bound, joint second-order bound)."""
    if cfg.eps_g <= 0 or cfg.eps_H <= 0:
        raise ValueError("bounds need positive eps_g and eps_H")
    if f0 < f_min:
        raise ValueError("f0 must be at least f_min")
    gap = f0 - f_min
    fo_bound = 2.0 * cfg.L_tilde * gap / cfg.eps_g ** 2
    per_step = min(cfg.eps_g ** 2 / (2.0 * cfg.L_tilde),
                   2.0 * cfg.eps_H ** 3 / (3.0 * cfg.rho_tilde ** 2))
    return fo_bound, gap / per_step
