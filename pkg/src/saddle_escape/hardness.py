"""Copositivity instances from graphs and the stable-set correspondence.

From a graph G on n vertices and a target size t, build

    Q = (I + A_G) (t - 1/2) - J,    delta = 1 / (2n + 1),

with J the all-ones matrix.  Then G has a stable set of size t exactly
when  min { x'Qx : x >= 0, ||x|| <= 1 }  <= -delta/sqrt(n); otherwise Q
is copositive and the minimum is 0.  Checking approximate second-order
stationarity of x = 0 for x'Qx/2 over the orthant therefore answers an
NP-complete question once eps_H shrinks below delta/sqrt(n) — the content
of the hardness result, embodied here as a finite-instance checker.

The orthant-ball minimum is computed by the production quadratic
subproblem solver and cross-checkable by an independent support-set
oracle: any negative minimum is an eigenvalue of a principal submatrix
Q_TT whose eigenspace contains an entrywise-nonnegative vector.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .geometry import orthant
from .subsolvers import solve_qmo

MAX_STABLE_SET_N = 20
MAX_EXACT_N = 12


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError("self-loops are not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError("edge endpoint out of range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, pairs) -> "Graph":
        return cls(n, frozenset((int(u), int(v)) for u, v in pairs))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1.0
        return A

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": sorted([list(e) for e in self.edges])}

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        return cls.from_edges(int(data["n"]), data["edges"])

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        """Edge-list format: first line n, then one 'u v' pair per line."""
        lines = [ln for ln in (s.strip() for s in text.splitlines())
                 if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError("empty graph file")
        n = int(lines[0])
        pairs = []
        for ln in lines[1:]:
            u, v = ln.split()
            pairs.append((int(u), int(v)))
        return cls.from_edges(n, pairs)


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return Graph.from_dict(json.loads(text))
    return Graph.from_text(text)


@dataclass(frozen=True)
class CopositivityInstance:
    """Q, target size, and the separation scale delta."""

    graph: Graph
    Q: np.ndarray
    t: int
    delta: float

    @property
    def threshold(self) -> float:
        return -self.delta / np.sqrt(self.graph.n)


def build_instance(G: Graph, t: int) -> CopositivityInstance:
    """Q = (I + A_G)(t - 1/2) - J and delta = 1/(2n + 1)."""
    if not 1 <= t <= G.n:
        raise ValueError(f"t must lie in 1..{G.n}")
    n = G.n
    Q = (np.eye(n) + G.adjacency()) * (t - 0.5) - np.ones((n, n))
    Q.setflags(write=False)
    return CopositivityInstance(G, Q, int(t), 1.0 / (2 * n + 1))


def has_stable_set(G: Graph, t: int) -> bool:
    """Exact by enumeration: some t-subset spans no edge.  n <= 20."""
    if G.n > MAX_STABLE_SET_N:
        raise ValueError(f"exhaustive stable-set check capped at n={MAX_STABLE_SET_N}")
    if not 1 <= t <= G.n:
        raise ValueError(f"t must lie in 1..{G.n}")
    adj = [0] * G.n
    for u, v in G.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    for subset in itertools.combinations(range(G.n), t):
        mask = 0
        ok = True
        for v in subset:
            if adj[v] & mask:
                ok = False
                break
            mask |= 1 << v
        if ok:
            return True
    return False


def min_orthant_ball(Q) -> float:
    """Exact minimum of x'Qx over {x >= 0, ||x|| <= 1} via the quadratic
    subproblem solver at the origin of the orthant (always <= 0)."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if n > MAX_EXACT_N:
        raise ValueError(f"exact orthant-ball minimization capped at n={MAX_EXACT_N}")
    sol = solve_qmo(Q, np.zeros(n), orthant(n), np.zeros(n))
    return float(sol.value)


def _nonnegative_in_span(V: np.ndarray) -> bool:
    """Is there a nonzero entrywise-nonnegative vector in range(V)?

    LP: maximize the entry sum of V y subject to V y >= 0, |y| <= 1.
    A positive optimum certifies one; nonnegative nonzero vectors have
    positive entry sums, so the test is exact.
    """
    res = linprog(c=-V.sum(axis=0), A_ub=-V, b_ub=np.zeros(V.shape[0]),
                  bounds=[(-1.0, 1.0)] * V.shape[1], method="highs")
    return bool(res.success and res.x is not None
                and float(V.sum(axis=0) @ res.x) > 1e-9)


def support_minimum(Q) -> float:
    """Independent oracle for min_orthant_ball.

    Any negative minimizer has unit norm and solves Q_TT v = lambda v on
    its support T with v > 0 and value lambda, so the minimum equals the
    smallest eigenvalue over principal submatrices whose eigenspace
    meets the nonnegative orthant (0 if none is negative).  Eigenvalues
    are clustered before the nonnegativity test so repeated eigenvalues
    from symmetric graphs are searched as a whole eigenspace.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if n > MAX_EXACT_N:
        raise ValueError(f"support enumeration capped at n={MAX_EXACT_N}")
    best = 0.0
    for size in range(1, n + 1):
        for T in itertools.combinations(range(n), size):
            sub = Q[np.ix_(T, T)]
            w, V = np.linalg.eigh(sub)
            scale = max(1.0, float(np.abs(w).max()))
            start = 0
            for i in range(1, size + 1):
                if i == size or w[i] - w[start] > 1e-10 * scale:
                    lam = float(w[start:i].mean())
                    if lam < best:
                        block = V[:, start:i]
                        if i - start == 1:
                            v = block[:, 0]
                            ok = bool(np.all(v >= -1e-10) or np.all(v <= 1e-10))
                        else:
                            ok = _nonnegative_in_span(block)
                        if ok:
                            best = lam
                    start = i
    return best


@dataclass(frozen=True)
class CorrespondenceReport:
    """Outcome of checking one (graph, t) instance."""

    n: int
    t: int
    min_value: float
    threshold: float
    stable_exists: bool
    equivalence_holds: bool

    @property
    def dichotomy_holds(self) -> bool:
        """Minima on these instances never fall strictly between the
        copositive side (0) and the separated side (threshold)."""
        return self.min_value >= -1e-9 or self.min_value <= self.threshold + 1e-9

    def to_dict(self) -> dict:
        return {
            "n": self.n, "t": self.t, "min_value": self.min_value,
            "threshold": self.threshold, "stable_exists": self.stable_exists,
            "equivalence_holds": self.equivalence_holds,
            "dichotomy_holds": self.dichotomy_holds,
        }


def check_correspondence(G: Graph, t: int) -> CorrespondenceReport:
    """Verify the stable-set equivalence on one instance."""
    inst = build_instance(G, t)
    min_value = min_orthant_ball(inst.Q)
    stable = has_stable_set(G, t)
    observed = min_value <= inst.threshold + 1e-9
    return CorrespondenceReport(G.n, int(t), min_value, inst.threshold,
                                stable, observed == stable)


def all_graphs(n: int):
    """Every labeled simple graph on n vertices."""
    slots = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(slots)):
        yield Graph.from_edges(n, [slots[i] for i in range(len(slots))
                                   if mask >> i & 1])


def random_graph(rng: np.random.Generator, n: int, p: float = 0.5) -> Graph:
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2)
             if rng.random() < p]
    return Graph.from_edges(n, pairs)
