"""Random instance generators and brute-force / LP oracles shared by the tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction as Fr

import numpy as np

from mrwtv.geometry import perimeter, total_variation
from mrwtv.mincut import geometric_energy, measure_of
from mrwtv.space import EdgeWeightGraph, from_epsilon_step, from_kernel_grid, from_weighted_graph

CHAIN6_EDGES = [("1", "2", 5), ("2", "3", 6), ("3", "4", 2), ("4", "5", 1), ("5", "6", 3)]


def chain6_space():
    return from_weighted_graph(EdgeWeightGraph([str(i) for i in range(1, 7)], [(a, b, Fr(w)) for a, b, w in CHAIN6_EDGES]))


def two_node_space():
    return from_weighted_graph(EdgeWeightGraph(["1", "2"], [("1", "2", 1)]))


def random_graph(rng: random.Random, n: int, exact: bool = True, density: float = 0.3, loops: bool = False,
                 wmax: int = 9):
    """Connected graph: random spanning tree plus extra edges, integer (or float) weights."""
    verts = [str(i) for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    edges = {}
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges[(min(a, b), max(a, b))] = rng.randint(1, wmax)
    for a, b in itertools.combinations(range(n), 2):
        if (a, b) not in edges and rng.random() < density:
            edges[(a, b)] = rng.randint(1, wmax)
    out = []
    for (a, b), w in sorted(edges.items()):
        out.append((verts[a], verts[b], Fr(w) if exact else float(w) * (1 + rng.random())))
    if loops:
        for v in range(n):
            if rng.random() < 0.3:
                out.append((verts[v], verts[v], Fr(rng.randint(1, 3)) if exact else float(rng.randint(1, 3))))
    return from_weighted_graph(EdgeWeightGraph(verts, out), exact)


def random_kernel_grid(rng: random.Random):
    dim = rng.choice([1, 2])
    cells = rng.randint(4, 12) if dim == 1 else rng.randint(3, 6)
    radius = rng.uniform(1.2, 2.5) / cells
    kernel = rng.choice(["uniform", "triangle"])
    return from_kernel_grid([[0.0, 1.0]] * dim, cells, kernel, radius)


def random_epsilon_step(rng: random.Random):
    while True:
        n = rng.randint(4, 12)
        pts = [(rng.random(), rng.random()) for _ in range(n)]
        mu = [Fr(rng.randint(1, 5)) for _ in range(n)]
        try:
            return from_epsilon_step(pts, math.dist, mu, 0.55)
        except ValueError:
            continue


def random_subset(rng: random.Random, n: int, nontrivial: bool = False) -> frozenset:
    while True:
        A = frozenset(x for x in range(n) if rng.random() < 0.5)
        if not nontrivial or 0 < len(A) < n:
            return A


def all_subsets(n: int):
    for bits in itertools.product((0, 1), repeat=n):
        yield frozenset(i for i, b in enumerate(bits) if b)


def brute_geometric(space, F, lam):
    """``(min energy, list of minimizers)`` over all 2^n subsets."""
    best, sets = None, []
    for A in all_subsets(space.n):
        e = geometric_energy(space, A, F, lam)
        if best is None or e < best:
            best, sets = e, [A]
        elif e == best:
            sets.append(A)
    return best, sets


def l1_energy_direct(space, u, f, lam):
    return total_variation(space, u) + lam * sum(space.measure[x] * abs(u[x] - f[x]) for x in range(space.n))


def brute_l1(space, f, lam):
    """Minimum over all functions with values among the values of ``f``."""
    vals = sorted(set(f))
    best = None
    for combo in itertools.product(vals, repeat=space.n):
        e = l1_energy_direct(space, combo, f, lam)
        if best is None or e < best:
            best = e
    return best


def lp_l1_min(space, f, lam):
    """LP value of ``min TV(u) + lam int |u - f|`` (scipy HiGHS)."""
    from scipy.optimize import linprog

    n = space.n
    E = space.edges
    m = len(E)
    # variables: u (n), t_e (m), s_x (n)
    nv = n + m + n
    c = np.zeros(nv)
    for k, (_, _, w) in enumerate(E):
        c[n + k] = float(w)
    for x in range(n):
        c[n + m + x] = float(lam) * float(space.measure[x])
    rows, rhs = [], []
    for k, (x, y, _) in enumerate(E):
        for s in (1, -1):
            r = np.zeros(nv)
            r[y], r[x], r[n + k] = s, -s, -1
            rows.append(r)
            rhs.append(0.0)
    for x in range(n):
        for s in (1, -1):
            r = np.zeros(nv)
            r[x], r[n + m + x] = s, -1
            rows.append(r)
            rhs.append(s * float(f[x]))
    bounds = [(None, None)] * n + [(0, None)] * (m + n)
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    assert res.status == 0
    return res.fun


def lp_meyer_norm(space, f):
    """``sup { int f u dnu : TV(u) <= 1, int u dnu = 0 }`` by LP."""
    from scipy.optimize import linprog

    n = space.n
    E = space.edges
    m = len(E)
    nv = n + m
    c = np.zeros(nv)
    for x in range(n):
        c[x] = -float(space.measure[x]) * float(f[x])
    rows, rhs = [], []
    for k, (x, y, _) in enumerate(E):
        for s in (1, -1):
            r = np.zeros(nv)
            r[y], r[x], r[n + k] = s, -s, -1
            rows.append(r)
            rhs.append(0.0)
    r = np.zeros(nv)
    for k, (_, _, w) in enumerate(E):
        r[n + k] = float(w)
    rows.append(r)
    rhs.append(1.0)
    eq = np.zeros((1, nv))
    eq[0, :n] = [float(v) for v in space.measure]
    bounds = [(None, None)] * n + [(0, None)] * m
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=eq, b_eq=[0.0], bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


def brute_cheeger(space, omega):
    best = None
    for A in all_subsets(space.n):
        if A and A <= omega:
            r = perimeter(space, A) / measure_of(space, A)
            if best is None or r < best:
                best = r
    return best


def zero_mean(space, f):
    m = sum(space.measure[x] * f[x] for x in range(space.n)) / space.total_measure
    return [v - m for v in f]


def enumerate_geometric(space, F, lam):
    """Exact enumeration of all 2^n subsets with integer numpy arithmetic.

    Needs integer edge weights and measures (as produced by ``random_graph``).
    Returns ``(min energy, intersection of minimizers, union of minimizers, count)``.
    """
    n = space.n
    lam = Fr(lam)
    p, q = lam.numerator, lam.denominator
    masks = np.arange(1 << n, dtype=np.int64)
    bits = [(masks >> x) & 1 for x in range(n)]
    P = np.zeros(1 << n, dtype=np.int64)
    for x, y, c in space.edges:
        assert Fr(c).denominator == 1
        P += int(c) * (bits[x] ^ bits[y])
    d = np.zeros(1 << n, dtype=np.int64)
    for x in range(n):
        m = Fr(space.measure[x])
        assert m.denominator == 1
        d += int(m) * (bits[x] ^ (1 if x in F else 0))
    E = q * P + p * d
    best = E.min()
    hits = masks[E == best]
    inter = np.bitwise_and.reduce(hits)
    union = np.bitwise_or.reduce(hits)
    as_set = lambda mask: frozenset(x for x in range(n) if (int(mask) >> x) & 1)  # noqa: E731
    return Fr(int(best), q), as_set(inter), as_set(union), len(hits)


def layer_cake_l1_min(space, f, lam):
    """Minimum of the L1 energy by enumerating sets at every level of ``f``."""
    vals = sorted(set(f))
    total = Fr(0)
    for lo, hi in zip(vals, vals[1:]):
        F = frozenset(x for x in range(space.n) if f[x] > lo)
        total += (hi - lo) * enumerate_geometric(space, F, lam)[0]
    return total
