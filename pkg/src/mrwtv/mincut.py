"""s-t max-flow / min-cut engine and the set problems built on it.

Every set problem handled here has the form

    energy(A) = sum_{x in A, y not in A} c_xy + sum_{x in A} a_x + sum_{x not in A} b_x

with symmetric ``c_xy = nu_x m_x({y}) >= 0``, which is graph-representable, so a
single max-flow gives the exact global minimum together with the smallest and
the largest minimizing set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .numeric import FLOAT_TOL, Number, coerce
from .space import RandomWalkSpace, SpaceError


class FlowNetwork:
    """Residual graph with Dinic's blocking-flow max-flow.

    Capacities may be ``Fraction`` (exact) or ``float``; in float mode residuals
    below ``tol`` are treated as saturated.
    """

    def __init__(self, n: int, tol: float = 0.0):
        self.n = n
        self.tol = tol
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[Number] = []

    def add_edge(self, u: int, v: int, cap: Number, rev_cap: Number = 0) -> int:
        eid = len(self.to)
        self.to += [v, u]
        self.cap += [cap, rev_cap]
        self.head[u].append(eid)
        self.head[v].append(eid + 1)
        return eid

    def _bfs(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                if self.cap[e] > self.tol and level[self.to[e]] < 0:
                    level[self.to[e]] = level[u] + 1
                    queue.append(self.to[e])
        return level if level[t] >= 0 else None

    def _augment(self, s: int, t: int, level: list[int], it: list[int]) -> Number:
        # iterative DFS for one augmenting path in the level graph
        path: list[int] = []
        u = s
        while True:
            if u == t:
                push = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= push
                    self.cap[e ^ 1] += push
                return push
            advanced = False
            while it[u] < len(self.head[u]):
                e = self.head[u][it[u]]
                v = self.to[e]
                if self.cap[e] > self.tol and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if not path:
                    return 0
                level[u] = -1  # dead end
                e = path.pop()
                u = self.to[e ^ 1]
                it[u] += 1

    def max_flow(self, s: int, t: int) -> Number:
        total = 0
        while True:
            level = self._bfs(s, t)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                pushed = self._augment(s, t, level, it)
                if not pushed:
                    break
                total += pushed

    def source_side(self, s: int) -> set[int]:
        """Nodes reachable from ``s`` in the residual graph (smallest min cut)."""
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > self.tol and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def sink_side(self, t: int) -> set[int]:
        """Nodes that can still reach ``t`` in the residual graph."""
        seen = {t}
        queue = deque([t])
        while queue:
            v = queue.popleft()
            for e in self.head[v]:
                u = self.to[e]
                # arc u->v is e ^ 1
                if self.cap[e ^ 1] > self.tol and u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen


def max_flow(n: int, arcs: Iterable[tuple], source: int, sink: int, maximal: bool = False, tol: float = 0.0):
    """Max-flow value and a source-side min cut on a plain arc list ``(u, v, cap)``.

    ``maximal=False`` returns the smallest source side, ``True`` the largest.
    """
    net = FlowNetwork(n, tol)
    for u, v, c in arcs:
        net.add_edge(u, v, c)
    value = net.max_flow(source, sink)
    if maximal:
        side = set(range(n)) - net.sink_side(sink)
    else:
        side = net.source_side(source)
    return value, frozenset(side)


@dataclass(frozen=True)
class CutSolution:
    minimal: frozenset
    maximal: frozenset
    energy: Number

    @property
    def unique(self) -> bool:
        return self.minimal == self.maximal

    def select(self, which: str = "minimal") -> frozenset:
        if which not in ("minimal", "maximal"):
            raise ValueError(f"select must be 'minimal' or 'maximal', got {which!r}")
        return self.minimal if which == "minimal" else self.maximal


def _tol_for(values: Sequence[Number], exact: bool) -> float:
    if exact:
        return 0.0
    scale = max((abs(float(v)) for v in values), default=1.0)
    return FLOAT_TOL * max(scale, 1.0)


def solve_cut(
    space: RandomWalkSpace,
    in_cost: Sequence[Number],
    out_cost: Sequence[Number] | None = None,
    nodes: Iterable[int] | None = None,
    boundary: bool = True,
) -> CutSolution:
    """Minimize ``P_m(A) + sum_{A} in_cost + sum_{nodes \\ A} out_cost`` over ``A`` within ``nodes``.

    Nodes outside ``nodes`` are fixed out of ``A``; their interaction with
    members of ``A`` counts towards the perimeter unless ``boundary`` is
    False, in which case only the induced sub-graph is cut.
    """
    zero = space.zero()
    region = sorted(set(range(space.n)) if nodes is None else set(nodes))
    pos = {x: i for i, x in enumerate(region)}
    k = len(region)
    s, t = k, k + 1
    a = [in_cost[x] for x in region]
    b = [out_cost[x] for x in region] if out_cost is not None else [zero] * k
    if boundary:
        for x in region:
            for y, c in space.neighbors[x]:
                if y not in pos:
                    a[pos[x]] += c

    arcs = []
    const = zero
    for i in range(k):
        const += min(a[i], b[i])
        if b[i] > a[i]:
            arcs.append((s, i, b[i] - a[i]))
        elif a[i] > b[i]:
            arcs.append((i, t, a[i] - b[i]))
    pair_caps = []
    for x, y, c in space.edges:
        if x in pos and y in pos:
            pair_caps.append((pos[x], pos[y], c))
    tol = _tol_for([c for *_, c in arcs] + [c for *_, c in pair_caps], space.exact)
    net = FlowNetwork(k + 2, tol)
    for u, v, c in arcs:
        net.add_edge(u, v, c)
    for u, v, c in pair_caps:
        net.add_edge(u, v, c, c)
    value = net.max_flow(s, t)
    minimal = frozenset(region[i] for i in net.source_side(s) if i < k)
    maximal = frozenset(region[i] for i in set(range(k)) - net.sink_side(t))
    return CutSolution(minimal, maximal, const + value)


# ---------------------------------------------------------------------------
# geometric problems


def measure_of(space: RandomWalkSpace, A: Iterable[int]) -> Number:
    return sum((space.measure[x] for x in A), space.zero())


def geometric_energy(space: RandomWalkSpace, A: Iterable[int], F: Iterable[int], lam: Number) -> Number:
    """``P_m(A) + lam * nu(A symmetric-difference F)`` evaluated directly."""
    from .geometry import perimeter

    A, F = frozenset(A), frozenset(F)
    return perimeter(space, A) + lam * measure_of(space, A ^ F)


@dataclass(frozen=True)
class GeometricSolution:
    set: frozenset
    energy: Number
    minimal: frozenset
    maximal: frozenset

    @property
    def unique(self) -> bool:
        return self.minimal == self.maximal


def solve_geometric(space: RandomWalkSpace, F: Iterable[int], lam, select: str = "minimal") -> GeometricSolution:
    """Exact minimizer of ``P_m(A) + lam * nu(A symmetric-difference F)`` over all sets."""
    space.require_ergodic()
    lam = coerce(lam, space.exact)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    F = frozenset(F)
    zero = space.zero()
    in_cost = [zero if x in F else lam * space.measure[x] for x in range(space.n)]
    out_cost = [lam * space.measure[x] if x in F else zero for x in range(space.n)]
    sol = solve_cut(space, in_cost, out_cost)
    return GeometricSolution(sol.select(select), sol.energy, sol.minimal, sol.maximal)


def solve_geometric_affine(
    space: RandomWalkSpace,
    weights: Sequence[Number],
    restrict_to: Iterable[int] | None = None,
    select: str = "minimal",
) -> GeometricSolution:
    """Exact minimizer of ``P_m(A) + sum_{x in A} weights_x`` over ``A`` inside ``restrict_to``."""
    weights = [coerce(w, space.exact) for w in weights]
    sol = solve_cut(space, weights, None, restrict_to)
    return GeometricSolution(sol.select(select), sol.energy, sol.minimal, sol.maximal)


def level_sets(f: Sequence[Number]) -> list[tuple[Number, Number, frozenset]]:
    """``(v_i, v_{i+1}, {f > v_i})`` for consecutive distinct values of ``f``."""
    values = sorted(set(f))
    return [(lo, hi, frozenset(x for x, v in enumerate(f) if v > lo)) for lo, hi in zip(values, values[1:])]


class NestednessError(RuntimeError):
    pass


def nested_family(space: RandomWalkSpace, f: Sequence[Number], lam, select: str = "minimal") -> list[frozenset]:
    """Selected minimizers for each level set of ``f``, ordered by increasing level.

    The returned family is checked to be decreasing; a violation raises
    :class:`NestednessError` naming the offending pair of levels.
    """
    f = [coerce(v, space.exact) for v in f]
    family = []
    for lo, hi, F in level_sets(f):
        family.append(solve_geometric(space, F, lam, select).set)
    for i in range(len(family) - 1):
        if not family[i + 1] <= family[i]:
            raise NestednessError(f"minimizers at levels {i} and {i + 1} are not nested")
    return family


# ---------------------------------------------------------------------------
# flow feasibility with node supply intervals (used by optimality certificates)


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    deficit: Number
    flows: dict  # (x, y) -> flow carried from x to y over a free edge


def feasible_flow(
    n: int,
    edges: Sequence[tuple[int, int, Number]],
    lo: Sequence[Number],
    hi: Sequence[Number],
    exact: bool,
) -> FeasibilityResult:
    """Find ``h`` on undirected ``edges`` with ``|h_xy| <= c_xy`` and net outflow of x in ``[lo_x, hi_x]``.

    Reduced to a single max-flow: a ground node feeds each x through an arc
    of capacity ``hi_x - lo_x`` while the fixed part ``lo_x`` becomes a supply.
    """
    zero = Fraction(0) if exact else 0.0
    ground = n
    S, T = n + 1, n + 2
    supply = list(lo) + [-sum(lo, zero)]
    caps = [c for *_, c in edges] + [abs(v) for v in supply] + [h - l for l, h in zip(lo, hi)]
    tol = _tol_for(caps, exact)
    net = FlowNetwork(n + 3, tol)
    edge_ids = []
    for x, y, c in edges:
        edge_ids.append(net.add_edge(x, y, c, c))
    for x in range(n):
        width = hi[x] - lo[x]
        if width < -tol:
            return FeasibilityResult(False, -width, {})
        if width > 0:
            net.add_edge(ground, x, width)
    need = zero
    for v, b in enumerate(supply):
        if b > 0:
            net.add_edge(S, v, b)
            need += b
        elif b < 0:
            net.add_edge(v, T, -b)
    value = net.max_flow(S, T)
    flows = {}
    for (x, y, c), eid in zip(edges, edge_ids):
        flows[(x, y)] = c - net.cap[eid]
    deficit = need - value
    ok = deficit <= (0 if exact else max(tol, FLOAT_TOL * max(float(need), 1.0)) * 10)
    return FeasibilityResult(ok, deficit, flows)


# ---------------------------------------------------------------------------
# lower envelope lam -> min_A P(A) + lam * nu(A symmetric-difference F)


@dataclass(frozen=True)
class EnvelopePiece:
    set: frozenset
    perimeter: Number
    distance: Number  # nu(A symmetric-difference F), the slope of the piece
    lo: Number
    hi: Number


def geometric_envelope(space: RandomWalkSpace, F: Iterable[int], lam_max=None) -> list[EnvelopePiece]:
    """Exact breakpoints of the concave envelope of the geometric energy in ``lam``.

    Pieces are ordered by increasing ``lam`` (decreasing slope); each carries
    the interval on which it is optimal.  Breakpoints are found by recursive
    line intersection, each probe being one cut.
    """
    from .geometry import perimeter

    F = frozenset(F)
    if lam_max is None:
        lam_max = coerce(2, space.exact)

    def probe(lam, select):
        A = solve_geometric(space, F, lam, select).set
        return A, perimeter(space, A), measure_of(space, A ^ F)

    zero = space.zero()
    # the piece active just right of 0 has the smallest slope among the ties
    # at 0; the piece active just left of lam_max has the largest
    left = _extreme_slope(zero, probe, largest=False)
    right = _extreme_slope(lam_max, probe, largest=True)
    lines = {left[0]: left, right[0]: right}

    def refine(p, q):
        # p has slope > q's slope
        if p[2] == q[2]:
            return
        lam = (q[1] - p[1]) / (p[2] - q[2])
        A, P, d = probe(lam, "minimal")
        value = P + lam * d
        if value < p[1] + lam * p[2]:
            lines[A] = (A, P, d)
            refine(p, (A, P, d))
            refine((A, P, d), q)

    refine(left, right)
    ordered = sorted(lines.values(), key=lambda r: -r[2])
    pieces = []
    for i, (A, P, d) in enumerate(ordered):
        lo = zero if i == 0 else (P - ordered[i - 1][1]) / (ordered[i - 1][2] - d)
        hi = float("inf") if i == len(ordered) - 1 else (ordered[i + 1][1] - P) / (d - ordered[i + 1][2])
        pieces.append(EnvelopePiece(A, P, d, lo, hi))
    return pieces


def _extreme_slope(lam, probe, largest):
    cands = [probe(lam, "minimal"), probe(lam, "maximal")]
    return max(cands, key=lambda r: r[2]) if largest else min(cands, key=lambda r: r[2])
