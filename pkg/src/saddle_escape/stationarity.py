"""First/second-order stationarity measures and point classification.

For a feasible x the first-order measure is the magnitude of the best
linear decrease over feasible unit steps, and the second-order measure
is the magnitude of the most negative feasible curvature subject to a
nonpositive gradient inner product.  A point is an approximate
first-order stationary point when the first measure is at most eps_g,
and an approximate second-order stationary point when additionally the
second measure is at most eps_H.  Both measures vanish exactly at the
corresponding exact stationary points and are continuous in x.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import Polytope, contains
from .oracles import ObjectiveOracle
from .subsolvers import DirectionSolution, solve_lmo, solve_qmo

VERDICT_SOSP = "SOSP"
VERDICT_FOSP = "FOSP"
VERDICT_NEITHER = "neither"


@dataclass(frozen=True)
class StationarityReport:
    """Measures, certifying directions, and the verdict at (eps_g, eps_H)."""

    x_measure: float
    psi_measure: float
    s_hat: np.ndarray
    d_hat: np.ndarray
    eps_g: float
    eps_H: float
    verdict: str

    @property
    def is_fosp(self) -> bool:
        return self.verdict in (VERDICT_FOSP, VERDICT_SOSP)

    @property
    def is_sosp(self) -> bool:
        return self.verdict == VERDICT_SOSP

    def to_dict(self) -> dict:
        return {
            "X": self.x_measure,
            "psi": self.psi_measure,
            "s_hat": self.s_hat.tolist(),
            "d_hat": self.d_hat.tolist(),
            "eps_g": self.eps_g,
            "eps_H": self.eps_H,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def first_order_direction(oracle: ObjectiveOracle, P: Polytope, x) -> DirectionSolution:
    """Solve the linear subproblem at x; the measure is -value."""
    return solve_lmo(oracle.grad(x), P, x)


def second_order_direction(oracle: ObjectiveOracle, P: Polytope, x) -> DirectionSolution:
    """Solve the curvature subproblem at x; the measure is -value."""
    return solve_qmo(oracle.hess(x), oracle.grad(x), P, x)


def first_order_measure(oracle: ObjectiveOracle, P: Polytope, x) -> float:
    return -first_order_direction(oracle, P, x).value


def second_order_measure(oracle: ObjectiveOracle, P: Polytope, x) -> float:
    return -second_order_direction(oracle, P, x).value


def classify(oracle: ObjectiveOracle, P: Polytope, x,
             eps_g: float, eps_H: float) -> StationarityReport:
    """Measure x and classify it at the (eps_g, eps_H) level."""
    if eps_g <= 0 or eps_H <= 0:
        raise ValueError("eps_g and eps_H must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    if not contains(P, x):
        raise ValueError("x must be feasible")
    s = first_order_direction(oracle, P, x)
    d = second_order_direction(oracle, P, x)
    x_measure = -s.value
    psi_measure = -d.value
    if x_measure <= eps_g and psi_measure <= eps_H:
        verdict = VERDICT_SOSP
    elif x_measure <= eps_g:
        verdict = VERDICT_FOSP
    else:
        verdict = VERDICT_NEITHER
    return StationarityReport(x_measure, psi_measure, s.direction, d.direction,
                              eps_g, eps_H, verdict)
