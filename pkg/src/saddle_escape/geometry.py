"""Polyhedral feasible sets intersected with the unit step ball.

A feasible region is a polytope {x : A x <= b}.  Solvers work with step
sets of the form {d : A(x + d) <= b, ||d|| <= 1}, so this module provides
slack computation, membership tests, exact Euclidean projection by
active-subset enumeration, and orthonormal parametrizations of the affine
slices obtained by forcing a subset of constraints to equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

# Absolute tolerance on constraint slacks; desk-scale data is O(1).
ACTIVITY_TOL = 1e-9

# Rank threshold for dropping dependent rows of an active system.
RANK_TOL = 1e-10

# Hard cap on rows for exact subset enumeration (2^12 = 4096 subsets).
MAX_ENUM_ROWS = 12


class EmptyPolytopeError(RuntimeError):
    """No active subset produced a feasible projection candidate."""


def _as_vector(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class Polytope:
    """Feasible region {x : A x <= b} with optional row labels.

    Rows must be nonzero; m = 0 (no constraints) is allowed.
    """

    A: np.ndarray
    b: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float, copy=True)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        b = np.array(self.b, dtype=float, copy=True).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(
                f"A has {A.shape[0]} rows but b has {b.shape[0]} entries"
            )
        if A.shape[1] < 1:
            raise ValueError("polytope must live in dimension n >= 1")
        row_norms = np.linalg.norm(A, axis=1)
        if np.any(row_norms == 0.0):
            raise ValueError("constraint rows must be nonzero")
        if self.names is not None and len(self.names) != A.shape[0]:
            raise ValueError("one name per row expected")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Polytope":
        return cls(np.asarray(data["A"], dtype=float), np.asarray(data["b"], dtype=float))


def unconstrained(n: int) -> Polytope:
    """Empty constraint system in dimension n (step set is the unit ball)."""
    return Polytope(np.zeros((0, n)), np.zeros(0))


def box(lower, upper) -> Polytope:
    """Axis-aligned box {l <= x <= u} as 2n rows."""
    lower = _as_vector(lower)
    upper = _as_vector(upper)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise ValueError("need lower <= upper componentwise")
    n = lower.shape[0]
    eye = np.eye(n)
    return Polytope(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))


def orthant(n: int) -> Polytope:
    """Nonnegative orthant {x >= 0} written as -x <= 0."""
    return Polytope(-np.eye(n), np.zeros(n))


@dataclass(frozen=True)
class ActiveSet:
    """Certificate naming which rows (and optionally the gradient cut
    <g, d> <= 0) were forced to equality by a subproblem solver.

    Row indices are 0-based and sorted.
    """

    rows: tuple[int, ...] = ()
    grad: bool = False
    tol: float = ACTIVITY_TOL

    def __post_init__(self):
        rows = tuple(sorted(int(i) for i in self.rows))
        if len(set(rows)) != len(rows):
            raise ValueError("duplicate active row indices")
        object.__setattr__(self, "rows", rows)

    def __str__(self):
        parts = [str(i) for i in self.rows] + (["grad"] if self.grad else [])
        return "{" + ",".join(parts) + "}"


@dataclass(frozen=True)
class AffineSlice:
    """Parametrization d = d0 + Z u of an active-set equality system.

    d0 is the minimum-norm solution, Z an orthonormal basis of the
    nullspace, and radius = sqrt(1 - ||d0||^2) so that ||d|| <= 1 is
    exactly ||u|| <= radius (d0 is orthogonal to range(Z)).
    """

    d0: np.ndarray
    Z: np.ndarray
    radius: float

    @property
    def dim(self) -> int:
        return self.Z.shape[1]

    def point(self, u) -> np.ndarray:
        if self.dim == 0:
            return self.d0.copy()
        return self.d0 + self.Z @ _as_vector(u)


def residual(P: Polytope, x) -> np.ndarray:
    """Slacks b - A x (nonnegative entries mean satisfied rows)."""
    x = _as_vector(x)
    if x.shape[0] != P.n:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {P.n}")
    return P.b - P.A @ x


def contains(P: Polytope, x, tol: float = ACTIVITY_TOL) -> bool:
    """True iff every slack is >= -tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if P.m == 0:
        residual(P, x)  # still validates the dimension
        return True
    return bool(residual(P, x).min() >= -tol)


def active_rows(P: Polytope, x, tol: float = ACTIVITY_TOL) -> tuple[int, ...]:
    """Indices of rows whose slack at x is within tol of zero."""
    r = residual(P, x)
    return tuple(int(i) for i in np.flatnonzero(np.abs(r) <= tol))


def project_halfspace(a, b: float, z) -> np.ndarray:
    """Euclidean projection of z onto {x : <a, x> <= b}."""
    a = _as_vector(a)
    z = _as_vector(z)
    nrm2 = float(a @ a)
    if nrm2 == 0.0:
        raise ValueError("halfspace normal must be nonzero")
    viol = float(a @ z) - float(b)
    if viol <= 0.0:
        return z.copy()
    return z - (viol / nrm2) * a


def _affine_projection(A_S: np.ndarray, b_S: np.ndarray, z: np.ndarray):
    """Project z onto {x : A_S x = b_S}; None if the system is inconsistent.

    Dependent rows are harmless: the pseudoinverse (SVD with threshold
    RANK_TOL) drops them, and inconsistency is detected from the residual
    of the returned point.
    """
    correction, *_ = np.linalg.lstsq(A_S, b_S - A_S @ z, rcond=RANK_TOL)
    cand = z + correction
    if np.max(np.abs(A_S @ cand - b_S)) > 1e-8 * max(1.0, float(np.abs(b_S).max())):
        return None
    return cand


def project_polytope(P: Polytope, z) -> np.ndarray:
    """Exact Euclidean projection onto the polytope.

    Enumerates every subset of rows as a candidate active set, projects
    onto the corresponding affine subspace, and keeps the feasible
    candidate closest to z.  Exact because the true projection's active
    set is one of the enumerated subsets.  Requires m <= MAX_ENUM_ROWS.
    """
    z = _as_vector(z)
    if P.m > MAX_ENUM_ROWS:
        raise ValueError(f"projection cap exceeded: m={P.m} > {MAX_ENUM_ROWS}")
    if contains(P, z):
        return z.copy()
    if P.m == 1:
        return project_halfspace(P.A[0], float(P.b[0]), z)

    best = None
    best_dist = np.inf
    for size in range(1, P.m + 1):
        for S in itertools.combinations(range(P.m), size):
            idx = list(S)
            cand = _affine_projection(P.A[idx], P.b[idx], z)
            if cand is None:
                continue
            if not contains(P, cand):
                continue
            dist = float(np.linalg.norm(cand - z))
            if dist < best_dist:
                best = cand
                best_dist = dist
    if best is None:
        raise EmptyPolytopeError("no feasible projection candidate; polytope may be empty")
    return best


# Factorizations of stacked row systems depend only on the rows, not on
# the base point, so iterative solvers reuse them heavily.
_factor_cache: dict = {}
_FACTOR_CACHE_CAP = 8192


def _row_factorization(E: np.ndarray):
    """(pseudo-solve operator, nullspace basis) of a row system E."""
    key = (E.shape, E.tobytes())
    hit = _factor_cache.get(key)
    if hit is not None:
        return hit
    U, sig, Vt = np.linalg.svd(E, full_matrices=True)
    cutoff = RANK_TOL * max(1.0, (sig[0] if sig.size else 0.0))
    rank = int(np.sum(sig > cutoff))
    # columns of Vr span the row space; solve = Vr diag(1/sig) Ur'
    solve = Vt[:rank].T / sig[:rank] @ U[:, :rank].T
    Z = Vt[rank:].T
    if len(_factor_cache) >= _FACTOR_CACHE_CAP:
        _factor_cache.clear()
    _factor_cache[key] = (solve, Z)
    return solve, Z


def slice_polytope(P: Polytope, x, S: ActiveSet, g=None) -> AffineSlice | None:
    """Parametrize {d : A_S d = b_S - A_S x (and <g, d> = 0 if S.grad)}.

    Returns None (infeasible slice) when the equality system is
    inconsistent or when its minimum-norm solution already leaves the
    unit ball.  Dependent rows are dropped by the SVD rank cut.
    """
    x = _as_vector(x)
    if x.shape[0] != P.n:
        raise ValueError(f"point has dimension {x.shape[0]}, expected {P.n}")
    rows = []
    rhs = []
    if S.rows:
        idx = list(S.rows)
        rows.append(P.A[idx])
        rhs.append(P.b[idx] - P.A[idx] @ x)
    if S.grad:
        if g is None:
            raise ValueError("active set includes the gradient row but g was not given")
        g = _as_vector(g)
        rows.append(g.reshape(1, -1))
        rhs.append(np.zeros(1))

    n = P.n
    if not rows:
        return AffineSlice(np.zeros(n), np.eye(n), 1.0)

    E = np.vstack(rows)
    r = np.concatenate(rhs)
    solve, Z = _row_factorization(E)
    # minimum-norm solution; lies in the row space, hence orthogonal to Z
    d0 = solve @ r
    if np.max(np.abs(E @ d0 - r), initial=0.0) > 1e-8 * max(1.0, float(np.abs(r).max(initial=0.0))):
        return None
    nd0_sq = float(d0 @ d0)
    if nd0_sq > (1.0 + 1e-12) ** 2:
        return None
    radius = float(np.sqrt(max(0.0, 1.0 - nd0_sq)))
    return AffineSlice(d0, Z, radius)
