"""Embedded worked examples: the six-vertex chain table and a bridging sweep on a grid window."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction as Fr

from .geometry import curvature, is_calibrable, lambda_ratio, perimeter
from .l1 import (
    check_l1_witness,
    eigenpair_check,
    lambda_star,
    lower_threshold,
    minimizer_interval_bounds,
    solve_l1,
    upper_threshold,
)
from .mincut import geometric_energy, measure_of, solve_geometric
from .numeric import fmt
from .space import EdgeWeightGraph, RandomWalkSpace, from_weighted_graph

CHAIN6_WEIGHTS = {(1, 2): 5, (2, 3): 6, (3, 4): 2, (4, 5): 1, (5, 6): 3}


def chain6(weights: dict | None = None, loops: dict | None = None) -> RandomWalkSpace:
    """The weighted path 1-2-3-4-5-6, optionally with changed weights or self-loops."""
    w = dict(CHAIN6_WEIGHTS)
    w.update(weights or {})
    edges = [(str(a), str(b), Fr(v)) for (a, b), v in sorted(w.items())]
    edges += [(str(v), str(v), Fr(a)) for v, a in sorted((loops or {}).items())]
    return from_weighted_graph(EdgeWeightGraph([str(i) for i in range(1, 7)], edges))


@dataclass
class Check:
    name: str
    expected: str
    got: str
    ok: bool


@dataclass
class ReproReport:
    title: str
    checks: list = field(default_factory=list)
    table: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name, expected, got) -> None:
        self.checks.append(Check(name, _show(expected), _show(got), expected == got))

    def render(self) -> str:
        lines = [self.title, ""]
        lines += self.table
        if self.table:
            lines.append("")
        for c in self.checks:
            mark = "ok  " if c.ok else "FAIL"
            line = f"[{mark}] {c.name}: {c.got}"
            if not c.ok:
                line += f" (expected {c.expected})"
            lines.append(line)
        lines.append("")
        lines.append("ALL CHECKS PASS" if self.ok else "CHECKS FAILED")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [{"name": c.name, "expected": c.expected, "got": c.got, "ok": c.ok} for c in self.checks],
        }


def _show(v) -> str:
    if isinstance(v, (set, frozenset)):
        return "{" + ",".join(str(x) for x in sorted(v)) + "}"
    if isinstance(v, tuple):
        return "(" + ", ".join(_show(x) for x in v) + ")"
    if isinstance(v, Fr):
        return fmt(v)
    return str(v)


def _labels(space, A) -> frozenset:
    return frozenset(int(s) for s in space.labels(A))


def repro_chain6(weights: dict | None = None) -> ReproReport:
    """Recompute the chain example with exact rationals and compare with the known values."""
    S = chain6(weights)
    omega = S.subset(["1", "2"])
    chi = [1 if x in omega else 0 for x in range(S.n)]
    rep = ReproReport("six-vertex chain, datum chi_{1,2}")

    rep.add("P_m({1,2})", Fr(6), perimeter(S, omega))
    rep.add("nu(X)", Fr(34), S.total_measure)

    # minimizers on the open intervals and the segments at the transitions
    regimes = [
        (Fr(1, 10), frozenset(), frozenset()),
        (Fr(1, 5), frozenset(), frozenset({1, 2, 3, 4})),
        (Fr(1, 4), frozenset({1, 2, 3, 4}), frozenset({1, 2, 3, 4})),
        (Fr(1, 3), frozenset({1, 2, 3}), frozenset({1, 2, 3, 4})),
        (Fr(2, 5), frozenset({1, 2, 3}), frozenset({1, 2, 3})),
        (Fr(1, 2), frozenset({1, 2}), frozenset({1, 2, 3})),
        (Fr(1), frozenset({1, 2}), frozenset({1, 2})),
    ]
    rep.table.append(f"{'lambda':>8}  {'minimal':<12} {'maximal':<12} energy")
    for lam, lo, hi in regimes:
        res = solve_l1(S, chi, lam, certify=False)
        got_lo = _labels(S, {x for x, v in enumerate(res.minimal_u) if v == 1})
        got_hi = _labels(S, {x for x, v in enumerate(res.maximal_u) if v == 1})
        rep.table.append(f"{fmt(lam):>8}  {_show(got_lo):<12} {_show(got_hi):<12} {fmt(res.energy)}")
        rep.add(f"extreme minimizers at lambda={fmt(lam)}", (lo, hi), (got_lo, got_hi))

    # the four candidate energies h_1..h_4 as lines P + lam d
    for name, A, P, d in [("h1", {1, 2}, 6, 0), ("h2", {1, 2, 3}, 2, 8), ("h3", {1, 2, 3, 4}, 1, 11), ("h4", set(), 0, 16)]:
        idx = S.subset(str(a) for a in A)
        rep.add(f"{name} = P + lam*d for {_show(frozenset(A))}", (Fr(P), Fr(d)),
                (perimeter(S, idx), measure_of(S, idx ^ omega)))

    rep.add("lambda_Omega^m", Fr(3, 8), lambda_ratio(S, omega))
    rep.add("lambda(Omega)", Fr(1, 2), upper_threshold(S, omega)[0])
    rep.add("lambda^0(Omega)", Fr(1, 5), lower_threshold(S, omega)[0])
    rep.add("lambda_*(Omega)", Fr(3, 4), lambda_star(S, omega))
    rep.add("eigenpair_check({1,2})", False, eigenpair_check(S, omega))
    rep.add("{1,2} calibrable", True, is_calibrable(S, omega))
    E4 = S.subset(["1", "2", "3", "4"])
    rep.add("curvature of {1,2,3,4} at 4", Fr(-1, 3), curvature(S, E4)[S.index("4")])
    rep.add("interval bounds of {1,2,3}", (Fr(1, 3), Fr(1, 2)),
            minimizer_interval_bounds(S, omega, S.subset(["1", "2", "3"])))
    rep.add("interval bounds of {1,2,3,4}", (Fr(1, 5), Fr(1, 3)), minimizer_interval_bounds(S, omega, E4))

    witnesses = [
        (Fr(1, 2), {1, 2}, [Fr(-1, 10), -1, -1, Fr(-1, 2), 0], [Fr(-1, 5), -1, 1, 1, Fr(1, 4), 0]),
        (Fr(1, 3), {1, 2, 3}, [Fr(-1, 5), Fr(-7, 9), -1, -1, 0], [Fr(-3, 5), -1, 1, 1, Fr(3, 4), 0]),
        (Fr(1, 5), {1, 2, 3, 4}, [Fr(-1, 5), Fr(-8, 15), Fr(-4, 5), -1, Fr(-1, 15)], [-1, -1, 1, 1, 1, Fr(1, 3)]),
    ]
    for lam, support, gs, xi in witnesses:
        u = [1 if x + 1 in support else 0 for x in range(S.n)]
        g = {(i, i + 1): Fr(v) for i, v in enumerate(gs)}
        problems = check_l1_witness(S, u, chi, lam, g, xi)
        rep.add(f"witness (g, xi) for chi_{_show(frozenset(support))} at lambda={fmt(lam)}", "valid",
                "valid" if not problems else "; ".join(problems))

    for alpha in (1, 2):
        L = chain6(weights, loops={4: alpha})
        bound = Fr(1, 3 + alpha)
        E = L.subset(["1", "2", "3", "4"])
        x4 = L.index("4")
        got = -curvature(L, E)[x4] - L.loop(x4)
        rep.add(f"loop alpha={alpha}: curvature bound", bound, got)
        bad = [k for k in range(1, 1001) if Fr(k, 1000) > bound
               and _is_minimizer(L, E, L.subset(["1", "2"]), Fr(k, 1000))]
        rep.add(f"loop alpha={alpha}: {{1,2,3,4}} never minimizes above the bound", [], bad)
    return rep


def _is_minimizer(space, E, F, lam) -> bool:
    return geometric_energy(space, E, F, lam) == solve_geometric(space, F, lam).energy


# ---------------------------------------------------------------------------
# grid bridging sweep


def grid_window(size: int) -> RandomWalkSpace:
    """Nearest-neighbour walk on a ``size x size`` window of Z^2, restricted (off-window mass kept as loops)."""
    def name(i, j):
        return f"{i},{j}"

    verts = [name(i, j) for i in range(size) for j in range(size)]
    edges = []
    for i in range(size):
        for j in range(size):
            for di, dj in ((1, 0), (0, 1)):
                if i + di < size and j + dj < size:
                    edges.append((name(i, j), name(i + di, j + dj), 1))
            deg = sum(1 for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)) if 0 <= i + di < size and 0 <= j + dj < size)
            if deg < 4:
                edges.append((name(i, j), name(i, j), 4 - deg))
    return from_weighted_graph(EdgeWeightGraph(verts, edges))


def two_rectangles(size: int, rect=(3, 5), gap: int = 1) -> set:
    """Two ``w x h`` rectangles side by side, ``gap`` columns apart, centred in the window."""
    w, h = rect
    total = 2 * w + gap
    i0 = (size - h) // 2
    j0 = (size - total) // 2
    cells = set()
    for i in range(i0, i0 + h):
        for j in list(range(j0, j0 + w)) + list(range(j0 + w + gap, j0 + total)):
            cells.add(f"{i},{j}")
    return cells


def components(space: RandomWalkSpace, A) -> int:
    A = set(A)
    seen = set()
    count = 0
    for s in A:
        if s in seen:
            continue
        count += 1
        queue = deque([s])
        seen.add(s)
        while queue:
            x = queue.popleft()
            for y, _ in space.neighbors[x]:
                if y in A and y not in seen:
                    seen.add(y)
                    queue.append(y)
    return count


@dataclass
class GridSweep:
    size: int
    gap: int
    rows: list  # (lam, |A|, components, unique)
    bridging: list  # lambdas with a unique connected minimizer strictly containing Omega
    large_ok: bool
    small_ok: bool

    @property
    def ok(self) -> bool:
        return bool(self.bridging) and self.large_ok and self.small_ok


def repro_grid(size: int = 20, rect=(3, 5), gap: int = 1, lambdas=None) -> GridSweep:
    S = grid_window(size)
    omega = S.subset(two_rectangles(size, rect, gap))
    if lambdas is None:
        lambdas = [Fr(k, 100) for k in range(1, 101)] + [Fr(2), Fr(5)]
    rows = []
    bridging = []
    for lam in lambdas:
        sol = solve_geometric(S, omega, lam)
        A = sol.set
        k = components(S, A)
        rows.append((lam, len(A), k, sol.unique))
        if sol.unique and k == 1 and A > omega:
            bridging.append(lam)
    big = solve_geometric(S, omega, Fr(5))
    small = solve_geometric(S, omega, Fr(1, 100))
    return GridSweep(size, gap, rows, bridging, big.unique and big.set == omega, small.unique and not small.set)
