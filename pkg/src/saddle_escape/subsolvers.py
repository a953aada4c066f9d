"""Exact direction subproblems over a polytope intersected with the unit ball.

Two subproblems drive everything:

* LMO:  min <g, s>   s.t.  x + s feasible, ||s|| <= 1
* QMO:  min d' H d   s.t.  x + d feasible, ||d|| <= 1, <g, d> <= 0

Both are solved exactly by enumerating subsets of constraint rows (plus,
for the QMO, the gradient cut) as equalities.  Each subset yields an
affine slice on which the LMO has a closed form and the QMO reduces to a
quadratic over a ball.  The reduced ball problem is solved through its
KKT system in the eigenbasis: for multiplier lam >= 0 the stationary
points satisfy (Q + lam I) u = -c with either ||u|| <= radius (lam = 0)
or ||u|| = radius.  All KKT roots are enumerated, not only the global
one: a constrained optimizer can sit at a non-global stationary point of
its own slice when the discarded inequality rows are what exclude the
slice's global minimizer.  Candidates violating inactive constraints are
dropped; the best survivor is exact.

Enumeration cost is 2^m (2^(m+1) with the gradient cut), so m is capped
at MAX_ENUM_ROWS.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq, linprog, minimize

from .geometry import (
    ACTIVITY_TOL,
    MAX_ENUM_ROWS,
    ActiveSet,
    AffineSlice,
    Polytope,
    contains,
    residual,
    slice_polytope,
)

# Treat |c| components below this (relative to scale) as zero when
# deciding whether a smallest-eigenspace is degenerate (hard case).
DEGENERATE_C_TOL = 1e-10

# Eigenvalues closer than this (relative) are clustered into one group.
EIG_GROUP_TOL = 1e-9

_SCAN_SAMPLES = 65


@dataclass(frozen=True)
class DirectionSolution:
    """Minimizer of a direction subproblem with its active-set certificate."""

    direction: np.ndarray
    value: float
    active: ActiveSet
    ball_active: bool


class TrsSolution(NamedTuple):
    """Global minimizer of  u' Q u + 2 c' u  over ||u|| <= radius."""

    u: np.ndarray
    value: float
    lam: float


def _check_base_point(P: Polytope, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if P.m > MAX_ENUM_ROWS:
        raise ValueError(f"enumeration cap exceeded: m={P.m} > {MAX_ENUM_ROWS}")
    if not contains(P, x, ACTIVITY_TOL):
        raise ValueError("base point is infeasible")
    return x


def _eig_groups(w: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous [start, stop) index ranges of clustered eigenvalues."""
    groups = []
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    start = 0
    for i in range(1, w.shape[0]):
        if w[i] - w[start] > EIG_GROUP_TOL * scale:
            groups.append((start, i))
            start = i
    if w.shape[0]:
        groups.append((start, w.shape[0]))
    return groups


class _DegenerateGroup(NamedTuple):
    """A multiplicity > 1 eigenspace usable as a KKT family at lam >= 0.

    Any unit y gives the stationary point u_perp + tau * (W y) at
    multiplier lam, all with the same objective value.  ``members``
    indexes the +-basis representatives inside the candidate matrix.
    """

    lam: float
    u_perp: np.ndarray
    W: np.ndarray
    tau: float
    value: float
    members: tuple[int, ...]


class _KktCandidates(NamedTuple):
    """Stationary points of a ball-constrained quadratic, as columns."""

    U: np.ndarray          # k x N candidate matrix (original coordinates)
    lams: np.ndarray       # N multipliers, all >= 0
    values: np.ndarray     # N objective values u'Qu + 2c'u
    degenerate: list


def _homogeneous_candidates(w: np.ndarray, V: np.ndarray, radius: float,
                            w_tol: float) -> _KktCandidates:
    """KKT points for c = 0: the origin plus +-radius times every
    eigenvector with eigenvalue <= 0 (multiplier lam = -w >= 0)."""
    k = w.shape[0]
    idx = np.flatnonzero(w <= w_tol)
    n_cand = 1 + 2 * idx.size
    U = np.zeros((k, n_cand))
    lams = np.zeros(n_cand)
    values = np.zeros(n_cand)
    degenerate: list[_DegenerateGroup] = []
    if idx.size:
        U[:, 1:1 + idx.size] = radius * V[:, idx]
        U[:, 1 + idx.size:] = -radius * V[:, idx]
        lams[1:1 + idx.size] = lams[1 + idx.size:] = np.maximum(0.0, -w[idx])
        values[1:1 + idx.size] = values[1 + idx.size:] = radius * radius * w[idx]
        for start, stop in _eig_groups(w):
            if stop - start > 1 and w[stop - 1] <= w_tol:
                members = tuple(
                    1 + offset * idx.size + int(np.searchsorted(idx, j))
                    for j in range(start, stop) for offset in (0, 1))
                degenerate.append(_DegenerateGroup(
                    max(0.0, -float(w[start])), np.zeros(k),
                    V[:, start:stop].copy(), radius,
                    radius * radius * float(w[start]), members))
    return _KktCandidates(U, lams, values, degenerate)


def _ball_kkt_candidates(Q: np.ndarray, c: np.ndarray, radius: float) -> _KktCandidates:
    """All KKT points, lam >= 0, of min u'Qu + 2c'u over ||u|| <= radius.

    Candidates cover the interior stationary solution, every boundary
    multiplier root of ||u(lam)|| = radius on [0, Lam], and the
    degenerate ("hard case") eigenspaces where c has no component; for
    those, +/- each basis vector is emitted and the full family is
    reported for callers that can search it against their own
    constraints.  Values are computed in the eigenbasis.
    """
    k = Q.shape[0]
    if k == 0 or radius <= 0.0:
        return _KktCandidates(np.zeros((k, 1)), np.zeros(1), np.zeros(1), [])

    w, V = np.linalg.eigh(Q)
    ct = V.T @ c
    scale_w = max(1.0, float(np.abs(w).max()))
    norm_c = float(np.sqrt(c @ c))
    c_tol = DEGENERATE_C_TOL * max(1.0, norm_c)
    w_tol = EIG_GROUP_TOL * scale_w

    if norm_c <= DEGENERATE_C_TOL:
        return _homogeneous_candidates(w, V, radius, w_tol)

    cols: list[np.ndarray] = []   # eigen-coordinate candidates
    lams: list[float] = []
    degenerate: list[_DegenerateGroup] = []

    # Interior stationary point: Q u = -c, consistent, inside the ball.
    nonsingular = np.abs(w) > w_tol
    if np.all(np.abs(ct[~nonsingular]) <= c_tol):
        u0 = np.zeros(k)
        u0[nonsingular] = -ct[nonsingular] / w[nonsingular]
        if float(u0 @ u0) <= (radius + 1e-12) ** 2:
            cols.append(u0)
            lams.append(0.0)

    # Boundary roots: phi(lam) = 1/||u(lam)|| - 1/radius on [0, Lam].
    live = np.abs(ct) > c_tol
    if np.any(live):
        w_live = w[live]
        ct_live = ct[live]
        poles = np.unique(-w_live[w_live < 0.0])
        lam_hi = max(0.0, -float(w[0])) + norm_c / radius + 1.0
        breakpoints = [0.0] + [float(p) for p in poles if 0.0 < p < lam_hi] + [lam_hi]

        wl = w_live.tolist()
        cl = ct_live.tolist()
        inv_radius = 1.0 / radius

        def phi_scalar(lam: float) -> float:
            s = 0.0
            for wi, ci in zip(wl, cl):
                t = ci / (wi + lam)
                s += t * t
            return 1.0 / np.sqrt(s) - inv_radius

        theta = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, _SCAN_SAMPLES)))
        for a, b in zip(breakpoints[:-1], breakpoints[1:]):
            if b - a <= 1e-14:
                continue
            pad = max(1e-13, 1e-9 * (b - a))
            grid = (a + pad) + (b - a - 2 * pad) * theta
            with np.errstate(divide="ignore", over="ignore"):
                terms = (ct_live[None, :] / (w_live[None, :] + grid[:, None])) ** 2
                vals = 1.0 / np.sqrt(terms.sum(axis=1)) - inv_radius
            finite = np.isfinite(vals)
            grid, vals = grid[finite], vals[finite]
            roots = [float(grid[i]) for i in np.flatnonzero(vals == 0.0)]
            for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
                roots.append(brentq(phi_scalar, grid[i], grid[i + 1],
                                    xtol=1e-15, rtol=8.9e-16, maxiter=200))
            for lam_star in roots:
                denom = w + lam_star
                if np.any((np.abs(denom) < 1e-12 * scale_w) & live):
                    continue  # root collapsed onto a pole; spurious
                u = np.where(live, -np.divide(ct, denom, out=np.zeros(k), where=live), 0.0)
                cols.append(u)
                lams.append(float(lam_star))

    # Degenerate eigenspaces: lam = -w_group >= 0 with no c component.
    for start, stop in _eig_groups(w):
        lam_g = -float(w[start:stop].mean())
        if lam_g < -w_tol:
            continue
        lam_g = max(lam_g, 0.0)
        if np.any(np.abs(ct[start:stop]) > c_tol):
            continue
        outside = np.ones(k, dtype=bool)
        outside[start:stop] = False
        denom = w + lam_g
        safe = outside & (np.abs(denom) > 1e-12 * scale_w)
        if np.any(outside & ~safe & (np.abs(ct) > c_tol)):
            continue  # another eigenspace is singular here with live c
        u_perp = np.zeros(k)
        u_perp[safe] = -ct[safe] / denom[safe]
        nperp2 = float(u_perp @ u_perp)
        if nperp2 > (radius + 1e-12) ** 2:
            continue
        tau = float(np.sqrt(max(0.0, radius * radius - nperp2)))
        members = []
        for j in range(start, stop):
            for sign in (1.0, -1.0):
                u = u_perp.copy()
                u[j] += sign * tau
                members.append(len(cols))
                cols.append(u)
                lams.append(lam_g)
        if stop - start > 1:
            perp_val = float(w @ (u_perp ** 2) + 2.0 * (ct @ u_perp))
            degenerate.append(_DegenerateGroup(
                lam_g, V @ u_perp, V[:, start:stop].copy(), tau,
                perp_val + w[start] * tau * tau, tuple(members)))

    if not cols:
        cols.append(np.zeros(k))
        lams.append(0.0)
    U_eig = np.column_stack(cols)
    values = (w[:, None] * U_eig ** 2).sum(axis=0) + 2.0 * (ct @ U_eig)
    return _KktCandidates(V @ U_eig, np.asarray(lams), values, degenerate)


def solve_trs(Qr, c, radius: float) -> TrsSolution:
    """Global minimum of  u' Qr u + 2 c' u  over ||u|| <= radius.

    Eigen-based: enumerates the KKT stationary points (secular-equation
    roots plus explicit degenerate-eigenspace handling) and returns the
    best.  The global solution's multiplier satisfies
    lam >= max(0, -lambda_min(Qr)) and the usual complementarity.
    """
    Qr = np.asarray(Qr, dtype=float)
    if Qr.ndim != 2 or Qr.shape[0] != Qr.shape[1]:
        raise ValueError("Qr must be square")
    if not np.allclose(Qr, Qr.T, atol=1e-10, rtol=0.0):
        raise ValueError("Qr must be symmetric")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape[0] != Qr.shape[0]:
        raise ValueError("c has wrong dimension")
    if radius == 0.0 or Qr.shape[0] == 0:
        return TrsSolution(np.zeros(Qr.shape[0]), 0.0, 0.0)
    cands = _ball_kkt_candidates(Qr, c, radius)
    i = int(np.argmin(cands.values))
    u = cands.U[:, i]
    return TrsSolution(u, float(u @ Qr @ u + 2.0 * (c @ u)), float(cands.lams[i]))


def _enumerable_rows(P: Polytope, x: np.ndarray) -> list[int]:
    """Rows reachable from x within a unit step (others cannot go active)."""
    r = residual(P, x)
    norms = np.linalg.norm(P.A, axis=1)
    return [int(i) for i in range(P.m) if r[i] <= norms[i] + ACTIVITY_TOL]


# Slices depend only on (polytope, base point, active rows); sweeps and
# iterative runs revisit identical keys constantly, so memoize.  Bounded
# by a wholesale clear; entries are immutable.
_slice_cache: dict = {}
_SLICE_CACHE_CAP = 16384


def _get_slice(P: Polytope, x: np.ndarray, rows: tuple) -> AffineSlice | None:
    key = (P.A.tobytes(), P.b.tobytes(), x.tobytes(), rows)
    try:
        return _slice_cache[key]
    except KeyError:
        pass
    sl = slice_polytope(P, x, ActiveSet(rows=rows))
    if len(_slice_cache) >= _SLICE_CACHE_CAP:
        _slice_cache.clear()
    _slice_cache[key] = sl
    return sl


def _fold_grad_row(sl: AffineSlice, g: np.ndarray) -> AffineSlice | None:
    """Intersect a slice with the equality <g, d> = 0.

    Reduces the constraint to a single row in the slice coordinates and
    eliminates it with a Householder reflection, so no new factorization
    is needed.  Returns None when the combined system is inconsistent or
    leaves the unit ball; returns sl itself when the row is dependent
    and already satisfied.
    """
    v = sl.Z.T @ g if sl.dim else np.zeros(0)
    beta = -float(g @ sl.d0)
    nv = float(np.sqrt(v @ v))
    if nv <= 1e-10 * max(1.0, float(np.sqrt(g @ g))):
        # g is spanned by the active rows: <g, d> is constant on the slice
        return sl if abs(beta) <= 1e-8 else None
    k = sl.dim
    u0 = (beta / (nv * nv)) * v
    d0 = sl.d0 + sl.Z @ u0
    nd0_sq = float(d0 @ d0)
    if nd0_sq > (1.0 + 1e-12) ** 2:
        return None
    u = v / nv
    w = u.copy()
    w[0] += 1.0 if u[0] >= 0 else -1.0
    Hm = np.eye(k) - (2.0 / float(w @ w)) * np.outer(w, w)
    Z = sl.Z @ Hm[:, 1:]
    radius = float(np.sqrt(max(0.0, 1.0 - nd0_sq)))
    return AffineSlice(d0, Z, radius)


def _row_subsets(rows: list[int], with_grad: bool):
    """Subsets ordered by (cardinality, lexicographic), gradless first."""
    for size in range(len(rows) + 1):
        for S in itertools.combinations(rows, size):
            yield S, False
            if with_grad:
                yield S, True


def _feasible_direction(P: Polytope, x: np.ndarray, d: np.ndarray, g=None) -> bool:
    if np.linalg.norm(d) > 1.0 + ACTIVITY_TOL:
        return False
    if not contains(P, x + d, ACTIVITY_TOL):
        return False
    if g is not None and float(g @ d) > ACTIVITY_TOL:
        return False
    return True


def solve_lmo(g, P: Polytope, x) -> DirectionSolution:
    """Exact linear minimization:  min <g, s>  over feasible unit steps.

    On each active-subset slice the minimizer is
    d0 - radius * Z (Z'g) / ||Z'g||; when Z'g = 0 the objective is
    constant on the slice and the minimum-norm point d0 certifies it.
    The first-order stationarity measure is -value.
    """
    x = _check_base_point(P, x)
    g = np.asarray(g, dtype=float).reshape(-1)
    best_d = np.zeros(P.n)
    best_val = 0.0
    best_rows: tuple = ()
    rows = _enumerable_rows(P, x)
    for S, _ in _row_subsets(rows, with_grad=False):
        sl = _get_slice(P, x, S)
        if sl is None:
            continue
        zg = sl.Z.T @ g if sl.dim else np.zeros(0)
        nzg = float(np.sqrt(zg @ zg))
        if nzg > 1e-14:
            d = sl.d0 - (sl.radius / nzg) * (sl.Z @ zg)
        else:
            d = sl.d0.copy()
        if not _feasible_direction(P, x, d):
            continue
        val = float(g @ d)
        if val < best_val:
            best_d, best_val, best_rows = d, val, S
    ball_active = abs(float(np.sqrt(best_d @ best_d)) - 1.0) <= ACTIVITY_TOL
    return DirectionSolution(best_d, best_val, ActiveSet(rows=best_rows), ball_active)


def _degenerate_family_search(group: _DegenerateGroup, sl: AffineSlice,
                              A: np.ndarray, r0: np.ndarray, g) -> np.ndarray | None:
    """Search a degenerate KKT family for a feasible member via an LP.

    Only the homogeneous case is searchable this way: base point on the
    constraint boundary (d0 ~ 0), no non-degenerate component
    (u_perp ~ 0), so the candidate direction Z W y scales freely.  Tight
    rows (zero slack) become M y <= 0; maximizing the total margin finds
    a nonzero cone member if one exists, which is then scaled to tau.
    """
    if group.tau <= 1e-12:
        return None
    if float(sl.d0 @ sl.d0) > 1e-24 or float(group.u_perp @ group.u_perp) > 1e-24:
        return None
    D = sl.Z @ group.W  # n x gdim, direction = D y
    tight = r0 <= 1e-9
    blocks = []
    if np.any(tight):
        blocks.append(A[tight] @ D)
    if g is not None:
        blocks.append((g @ D).reshape(1, -1))
    if not blocks:
        return None
    M = np.vstack(blocks)
    res = linprog(c=M.sum(axis=0), A_ub=M, b_ub=np.zeros(M.shape[0]),
                  bounds=[(-1.0, 1.0)] * D.shape[1], method="highs")
    if not res.success or res.x is None:
        return None
    y = np.asarray(res.x)
    ny = float(np.sqrt(y @ y))
    if ny <= 1e-9 or float(M.sum(axis=0) @ y) > -1e-12:
        return None
    return D @ (group.tau * y / ny)


def solve_qmo(H, g, P: Polytope, x) -> DirectionSolution:
    """Exact quadratic minimization:  min d' H d  over feasible unit steps
    with the descent cut <g, d> <= 0.

    Enumerates subsets of reachable rows plus the gradient cut as
    equalities; each slice reduces to a ball-constrained quadratic whose
    KKT stationary points are all enumerated and filtered against the
    inactive constraints.  The second-order stationarity measure is
    -value.
    """
    x = _check_base_point(P, x)
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float).reshape(-1)
    use_grad = float(g @ g) > 1e-24
    g_filter = g if use_grad else None
    r0 = residual(P, x)

    lam_min_H = float(np.linalg.eigvalsh(H)[0]) if P.n else 0.0
    if lam_min_H >= 0.0:
        # PSD Hessian: d'Hd >= 0 everywhere and d = 0 is feasible
        return DirectionSolution(np.zeros(P.n), 0.0, ActiveSet(), False)

    best_d = np.zeros(P.n)
    best_val = 0.0
    best_key = ((), False)
    rows = _enumerable_rows(P, x)
    for S, grad_on in _row_subsets(rows, with_grad=use_grad):
        sl = _get_slice(P, x, S)
        if sl is not None and grad_on:
            sl = _fold_grad_row(sl, g)
        if sl is None:
            continue
        # interlacing bound: no point on this slice can beat it
        Hd0 = H @ sl.d0
        const = float(sl.d0 @ Hd0)
        lower = (lam_min_H * sl.radius ** 2
                 - 2.0 * sl.radius * float(np.sqrt(Hd0 @ Hd0)) + const)
        if lower >= best_val:
            continue
        if sl.dim == 0:
            cands = _KktCandidates(np.zeros((0, 1)), np.zeros(1), np.zeros(1), [])
        else:
            Qr = sl.Z.T @ H @ sl.Z
            Qr = 0.5 * (Qr + Qr.T)
            cr = sl.Z.T @ Hd0
            cands = _ball_kkt_candidates(Qr, cr, sl.radius)

        # slice objective d'Hd = u'Qr u + 2 cr'u + d0'H d0
        vals = cands.values + const
        D = sl.d0[:, None] + (sl.Z @ cands.U if sl.dim else
                              np.zeros((P.n, cands.U.shape[1])))
        feas = np.einsum("ij,ij->j", D, D) <= (1.0 + ACTIVITY_TOL) ** 2
        if P.m:
            feas &= np.all(P.A @ D <= r0[:, None] + ACTIVITY_TOL, axis=0)
        if use_grad:
            feas &= g @ D <= ACTIVITY_TOL

        for i in np.argsort(vals, kind="stable"):
            if vals[i] >= best_val:
                break
            if feas[i]:
                d = D[:, i]
                val = float(d @ H @ d)
                if val < best_val:
                    best_d, best_val, best_key = d.copy(), val, (S, grad_on)
                break  # nothing later in this subset can do better

        for group in cands.degenerate:
            if group.value + const >= best_val:
                continue
            if np.any(feas[list(group.members)]):
                continue  # a basis representative already made it
            extra = _degenerate_family_search(group, sl, P.A, r0, g_filter)
            if extra is None:
                continue
            if not _feasible_direction(P, x, extra, g_filter):
                continue
            val = float(extra @ H @ extra)
            if val < best_val:
                best_d, best_val, best_key = extra, val, (S, grad_on)
    ball_active = abs(float(np.sqrt(best_d @ best_d)) - 1.0) <= ACTIVITY_TOL
    return DirectionSolution(best_d, best_val,
                             ActiveSet(rows=best_key[0], grad=best_key[1]),
                             ball_active)


def _grid_points(n: int, resolution: float) -> np.ndarray:
    per_dim = int(round(2.0 / resolution)) + 1
    budget = int(3e5)
    per_dim = min(per_dim, max(5, int(budget ** (1.0 / n))))
    if per_dim % 2 == 0:
        per_dim += 1  # keep 0 on the grid
    axes = [np.linspace(-1.0, 1.0, per_dim)] * n
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    return pts[np.einsum("ij,ij->i", pts, pts) <= 1.0 + 1e-12]


def brute_force_direction(objective: Callable, P: Polytope, x,
                          grad_constraint=None, resolution: float = 1e-2,
                          n_polish: int = 10):
    """Independent reference: dense grid over the feasible unit-step set,
    then local polish (SLSQP) from the best well-separated grid points.

    ``objective`` maps a direction to a scalar; if it accepts an (N, n)
    batch and returns N values, the grid is evaluated in one call.
    Intended for n <= 4 as a testing oracle, accurate to ~1e-3 at the
    default resolution for the Lipschitz objectives used here.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = P.n
    if n > 4:
        raise ValueError("brute-force oracle is limited to n <= 4")
    g = None if grad_constraint is None else np.asarray(grad_constraint, dtype=float)

    pts = _grid_points(n, resolution)
    feas = np.all(P.A @ pts.T <= (residual(P, x) + ACTIVITY_TOL)[:, None], axis=0)
    if g is not None:
        feas &= pts @ g <= ACTIVITY_TOL
    pts = pts[feas]
    if len(pts) == 0:
        pts = np.zeros((1, n))

    try:
        vals = np.asarray(objective(pts), dtype=float)
        if vals.shape != (len(pts),):
            raise TypeError
    except Exception:
        vals = np.array([float(objective(p)) for p in pts])

    order = np.argsort(vals, kind="stable")
    starts = []
    for i in order:
        p = pts[i]
        if all(np.linalg.norm(p - s) > 0.15 for s in starts):
            starts.append(p)
        if len(starts) >= n_polish:
            break

    def scalar_obj(d):
        try:
            return float(objective(d))
        except Exception:
            return float(np.asarray(objective(d.reshape(1, -1)))[0])

    cons = [{"type": "ineq", "fun": lambda d: 1.0 - float(d @ d)}]
    r0 = residual(P, x)
    for i in range(P.m):
        cons.append({"type": "ineq",
                     "fun": lambda d, i=i: float(r0[i] - P.A[i] @ d)})
    if g is not None:
        cons.append({"type": "ineq", "fun": lambda d: float(-(g @ d))})

    best_d = pts[order[0]]
    best_val = float(vals[order[0]])
    for s in starts:
        res = minimize(scalar_obj, s, method="SLSQP", constraints=cons,
                       options={"maxiter": 200, "ftol": 1e-12})
        if res.x is None:
            continue
        d = np.asarray(res.x, dtype=float)
        if np.linalg.norm(d) > 1.0 + 1e-9 or not contains(P, x + d, 1e-9):
            continue
        if g is not None and float(g @ d) > 1e-9:
            continue
        val = scalar_obj(d)
        if val < best_val:
            best_d, best_val = d, val
    return best_d, best_val
