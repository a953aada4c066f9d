"""Objective oracles: values, gradients, Hessians, and smoothness constants.

Every solver consumes an ``ObjectiveOracle`` exposing ``eval``/``grad``/
``hess`` plus the four constants (gradient Lipschitz L, Hessian Lipschitz
rho, gradient bound g_max, Hessian bound H_max) used to size fixed steps.
Bundled here: the planar saddle-trap objective

    f(x, y) = -x y exp(-x^2 - y^2) + y^2 / 2      on  x + y <= 0,

general quadratics f(x) = x' Q x / 2 + c' x, and finite-difference
verification of any oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import Polytope, contains, unconstrained, orthant


@dataclass(frozen=True)
class OracleConstants:
    """Smoothness data: L, rho bound derivative variation, g_max and
    H_max bound the derivatives themselves (2-norms, on the region the
    oracle is meant to be used)."""

    L: float
    rho: float
    g_max: float
    H_max: float

    def __post_init__(self):
        for name in ("L", "rho", "g_max", "H_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def to_dict(self) -> dict:
        return {"L": self.L, "rho": self.rho, "g_max": self.g_max, "H_max": self.H_max}

    @classmethod
    def from_dict(cls, data: dict) -> "OracleConstants":
        return cls(L=float(data["L"]), rho=float(data["rho"]),
                   g_max=float(data["g_max"]), H_max=float(data["H_max"]))


class ObjectiveOracle:
    """Base class for twice-differentiable objectives."""

    constants: OracleConstants

    def eval(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x) -> np.ndarray:
        raise NotImplementedError


# Frozen constants for the saddle-trap objective: dense sampling of the
# derivatives on [-3, 3]^2 (the Gaussian factor is negligible outside),
# times a safety factor of 2.  Sampled maxima: ||grad|| 3.001,
# ||hess||_2 1.838, third-derivative norm 3.151, min f on the feasible
# half-plane -0.0728.
COUNTEREXAMPLE_CONSTANTS = OracleConstants(L=3.675, rho=6.302, g_max=6.002, H_max=3.675)
COUNTEREXAMPLE_F_MIN = -0.173  # sampled minimum minus a 0.1 margin


class CounterexampleOracle(ObjectiveOracle):
    """The saddle-trap objective; closed-form derivatives.

    The origin is a stationary point whose Hessian [[0, -1], [-1, 1]]
    has a feasible negative-curvature direction, so it is a strict
    saddle of the constrained problem.
    """

    def __init__(self):
        self.constants = COUNTEREXAMPLE_CONSTANTS

    def eval(self, x) -> float:
        x, y = float(x[0]), float(x[1])
        return -x * y * np.exp(-x * x - y * y) + 0.5 * y * y

    def grad(self, x) -> np.ndarray:
        x, y = float(x[0]), float(x[1])
        e = np.exp(-x * x - y * y)
        return np.array([
            -(1.0 - 2.0 * x * x) * y * e,
            -(1.0 - 2.0 * y * y) * x * e + y,
        ])

    def hess(self, x) -> np.ndarray:
        x, y = float(x[0]), float(x[1])
        e = np.exp(-x * x - y * y)
        hxx = 2.0 * x * y * (3.0 - 2.0 * x * x) * e
        hxy = -(1.0 - 2.0 * x * x) * (1.0 - 2.0 * y * y) * e
        hyy = 2.0 * x * y * (3.0 - 2.0 * y * y) * e + 1.0
        return np.array([[hxx, hxy], [hxy, hyy]])


class QuadraticOracle(ObjectiveOracle):
    """f(x) = x' Q x / 2 + c' x with exact constants.

    ``x_bound`` is a bound on ||x|| over the region of use; it only
    enters g_max = ||Q||_2 * x_bound + ||c||.  The Hessian is constant,
    so rho = 0.
    """

    def __init__(self, Q, c=None, x_bound: float = 1.0):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-12, rtol=0.0):
            raise ValueError("Q must be symmetric")
        n = Q.shape[0]
        c = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(-1)
        if c.shape[0] != n:
            raise ValueError("c has wrong dimension")
        self.Q = 0.5 * (Q + Q.T)
        self.c = c
        qnorm = float(np.linalg.norm(self.Q, 2)) if n else 0.0
        self.constants = OracleConstants(
            L=qnorm, rho=0.0,
            g_max=qnorm * float(x_bound) + float(np.linalg.norm(c)),
            H_max=qnorm,
        )

    def eval(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.Q @ x) + float(self.c @ x)

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.Q @ x + self.c

    def hess(self, x) -> np.ndarray:
        return self.Q.copy()


def counterexample_oracle() -> CounterexampleOracle:
    return CounterexampleOracle()


def quadratic_oracle(Q, c=None, x_bound: float = 1.0) -> QuadraticOracle:
    return QuadraticOracle(Q, c, x_bound)


def fd_check_gradient(oracle: ObjectiveOracle, x, h: float = 1e-5) -> float:
    """Worst relative error of grad(x) against central differences of eval.

    Component errors are measured relative to max(1, |grad_i|) so that
    exact zeros (stationary points) are checked absolutely.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    g = oracle.grad(x)
    worst = 0.0
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fd = (oracle.eval(x + e) - oracle.eval(x - e)) / (2.0 * h)
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return worst


def fd_check_hessian(oracle: ObjectiveOracle, x, h: float = 1e-5) -> float:
    """Worst relative error of hess(x) against central differences of grad."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    H = oracle.hess(x)
    n = x.shape[0]
    fd = np.zeros((n, n))
    for j in range(n):
        e = np.zeros_like(x)
        e[j] = h
        fd[:, j] = (oracle.grad(x + e) - oracle.grad(x - e)) / (2.0 * h)
    fd = 0.5 * (fd + fd.T)
    return float(np.max(np.abs(fd - H) / np.maximum(1.0, np.abs(H))))


@dataclass(frozen=True)
class Problem:
    """An oracle over a polytope with a feasible start and a lower bound."""

    oracle: ObjectiveOracle
    feasible_set: Polytope
    x0: np.ndarray
    f_min: float
    kind: str = "custom"

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float, copy=True).reshape(-1)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if not contains(self.feasible_set, x0):
            raise ValueError("x0 must be feasible")


def counterexample_problem(x0=(0.5, -0.5)) -> Problem:
    """The saddle-trap objective on the half-plane x + y <= 0."""
    P = Polytope(np.array([[1.0, 1.0]]), np.array([0.0]), names=("x+y<=0",))
    return Problem(counterexample_oracle(), P, np.asarray(x0, dtype=float),
                   COUNTEREXAMPLE_F_MIN, kind="counterexample")


def quad1d_problem() -> Problem:
    """f(x) = x^2 on [-1, 1], started at 0.5."""
    from .geometry import box
    P = box([-1.0], [1.0])
    oracle = QuadraticOracle(np.array([[2.0]]), x_bound=1.0)
    return Problem(oracle, P, np.array([0.5]), 0.0, kind="quadratic")


def copositivity_problem(Q) -> Problem:
    """f(x) = x' Q x / 2 on the nonnegative orthant, started at 0.

    Only the unit ball around the origin matters for the stationarity
    check at x = 0, so constants use x_bound = 1 and the lower bound is
    -||Q||_2 / 2 there.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    oracle = QuadraticOracle(Q, x_bound=1.0)
    return Problem(oracle, orthant(n), np.zeros(n),
                   -0.5 * oracle.constants.H_max, kind="copositivity")


def bundled_problems() -> dict[str, Problem]:
    """Named problems exercised by the verification suite."""
    return {
        "counterexample": counterexample_problem(),
        "quad1d": quad1d_problem(),
        "orthant2": copositivity_problem(np.array([[0.5, -1.0], [-1.0, 0.5]])),
        "triangle3": copositivity_problem(0.5 * np.ones((3, 3))),
    }


def problem_to_dict(problem: Problem) -> dict:
    data = {
        "kind": problem.kind,
        "A": problem.feasible_set.A.tolist(),
        "b": problem.feasible_set.b.tolist(),
        "x0": problem.x0.tolist(),
        "constants": problem.oracle.constants.to_dict(),
        "f_min": problem.f_min,
    }
    if isinstance(problem.oracle, QuadraticOracle):
        data["Q"] = problem.oracle.Q.tolist()
        data["c"] = problem.oracle.c.tolist()
    return data


def problem_from_dict(data: dict) -> Problem:
    """Build a Problem from the JSON schema used by the CLI.

    Schema: {"kind": "counterexample" | "quadratic" | "copositivity",
    "Q": rows, "c": vector, "A": rows, "b": vector, "x0": vector,
    "constants": {"L", "rho", "g_max", "H_max"}, "f_min": scalar}.
    Absent fields fall back to the kind's defaults.
    """
    kind = data.get("kind", "quadratic")
    if kind == "counterexample":
        base = counterexample_problem()
        oracle = base.oracle
        P = base.feasible_set
        f_min = COUNTEREXAMPLE_F_MIN
        x0 = base.x0
    elif kind in ("quadratic", "copositivity"):
        if "Q" not in data:
            raise ValueError(f"kind {kind!r} requires Q")
        Q = np.asarray(data["Q"], dtype=float)
        n = Q.shape[0]
        oracle = QuadraticOracle(Q, data.get("c"), x_bound=float(data.get("x_bound", 1.0)))
        P = orthant(n) if kind == "copositivity" else unconstrained(n)
        f_min = -0.5 * oracle.constants.H_max - oracle.constants.g_max
        x0 = np.zeros(n)
    else:
        raise ValueError(f"unknown problem kind {kind!r}")

    if "A" in data and "b" in data:
        P = Polytope(np.asarray(data["A"], dtype=float), np.asarray(data["b"], dtype=float))
    if "x0" in data:
        x0 = np.asarray(data["x0"], dtype=float)
    if "constants" in data:
        oracle_constants = OracleConstants.from_dict(data["constants"])
        oracle = _with_constants(oracle, oracle_constants)
    if "f_min" in data:
        f_min = float(data["f_min"])
    return Problem(oracle, P, x0, f_min, kind=kind)


def _with_constants(oracle: ObjectiveOracle, constants: OracleConstants) -> ObjectiveOracle:
    import copy

    clone = copy.copy(oracle)
    clone.constants = constants
    return clone


def load_problem(path) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def save_problem(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2, sort_keys=True)
        fh.write("\n")
