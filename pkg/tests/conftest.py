"""Shared instance generators for the unit and acceptance suites."""

import numpy as np
import pytest

from saddle_escape.geometry import Polytope, box, project_polytope
from saddle_escape.oracles import Problem, QuadraticOracle


def random_polytope_point(rng, n_max=4, m_max=3):
    """Nonempty random polytope with a feasible base point, sometimes on
    the boundary."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    A = rng.normal(size=(m, n))
    A = A[np.linalg.norm(A, axis=1) > 1e-6]
    m = len(A)
    x_free = rng.normal(size=n) * 0.5
    b = A @ x_free + rng.uniform(0.05, 1.0, size=m)
    P = Polytope(A, b) if m else Polytope(np.zeros((0, n)), np.zeros(0))
    if m and rng.random() < 0.5:
        x = project_polytope(P, x_free + rng.normal(size=n) * 2.0)
    else:
        x = x_free
    return P, x


def random_direction_instance(rng, n_max=4, m_max=3):
    """(P, x, g, H) for direction-subproblem cross-checks."""
    P, x = random_polytope_point(rng, n_max, m_max)
    n = P.n
    g = rng.normal(size=n) * float(rng.choice([0.0, 1.0, 2.0], p=[0.1, 0.6, 0.3]))
    B = rng.normal(size=(n, n))
    return P, x, g, 0.5 * (B + B.T)


def make_box_quadratic(rng) -> Problem:
    """Nonconvex quadratic over a random box, n <= 4.

    Eigenvalues keep |lambda_min| <= 0.45 * lambda_max so the
    second-order step length 2 psi / rho_tilde never needs clamping.
    """
    n = int(rng.choice([1, 2, 3, 4], p=[0.3, 0.3, 0.25, 0.15]))
    lam = rng.uniform(-0.45, 1.0, size=n)
    lam[int(rng.integers(0, n))] = rng.uniform(-0.45, -0.05)
    j = int(rng.integers(0, n))
    lam[j] = abs(lam[j]) + 0.55
    Vq, _ = np.linalg.qr(rng.normal(size=(n, n)))
    M = Vq @ np.diag(lam) @ Vq.T
    Q = 0.5 * (M + M.T)
    c = rng.normal(size=n) * 0.2
    lo = rng.uniform(-1.2, -0.4, size=n)
    hi = rng.uniform(0.4, 1.2, size=n)
    x0 = rng.uniform(lo, hi)
    R = float(np.sqrt((np.maximum(np.abs(lo), np.abs(hi)) ** 2).sum()))
    oracle = QuadraticOracle(Q, c, x_bound=R)
    f_min = -(0.5 * oracle.constants.H_max * R ** 2
              + float(np.linalg.norm(c)) * R) - 1e-9
    return Problem(oracle, box(lo, hi), x0, f_min, kind="quadratic")


def quadratic_batch_objective(H):
    """Objective d'Hd accepting single directions or (N, n) batches."""
    def objective(D):
        D = np.asarray(D, dtype=float)
        if D.ndim == 2:
            return np.einsum("ij,jk,ik->i", D, H, D)
        return float(D @ H @ D)
    return objective


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
