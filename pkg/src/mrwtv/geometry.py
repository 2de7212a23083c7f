"""Set and function functionals of a random walk space.

Sets are iterables of state indices, functions are sequences indexed by state,
and edge fields are dicts keyed by directed pairs ``(x, y)`` with ``m_x({y}) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .mincut import measure_of, solve_geometric_affine
from .numeric import Number, coerce
from .space import RandomWalkSpace, SpaceError


def _as_set(A: Iterable[int]) -> frozenset:
    return A if isinstance(A, frozenset) else frozenset(A)


def interaction(space: RandomWalkSpace, A: Iterable[int], B: Iterable[int]) -> Number:
    """``L_m(A, B) = sum_{x in A} nu_x m_x(B)``."""
    B = _as_set(B)
    total = space.zero()
    for x in _as_set(A):
        row = space.jump[x]
        total += space.measure[x] * sum((p for y, p in row.items() if y in B), space.zero())
    return total


def perimeter(space: RandomWalkSpace, E: Iterable[int]) -> Number:
    """``P_m(E)``: interaction of ``E`` with its complement (sum of cut edge weights)."""
    E = _as_set(E)
    total = space.zero()
    for x in E:
        for y, c in space.neighbors[x]:
            if y not in E:
                total += c
    return total


def perimeter_by_complement(space: RandomWalkSpace, E: Iterable[int]) -> Number:
    """``nu(E) - L_m(E, E)``; an independent route used as a cross-check."""
    E = _as_set(E)
    return measure_of(space, E) - interaction(space, E, E)


def total_variation(space: RandomWalkSpace, u: Sequence[Number]) -> Number:
    """``TV_m(u) = 1/2 sum_{x,y} nu_x m_x({y}) |u(y) - u(x)|``."""
    total = space.zero()
    for x, y, c in space.edges:
        total += c * abs(u[y] - u[x])
    return total


@dataclass(frozen=True)
class CoareaProfile:
    levels: tuple
    perimeters: tuple
    integral: Number


def coarea_profile(space: RandomWalkSpace, u: Sequence[Number]) -> CoareaProfile:
    """Perimeters of the super-level sets ``{u > t_i}`` and ``sum (t_{i+1} - t_i) P(E_{t_i})``."""
    levels = sorted(set(u))
    perims = []
    integral = space.zero()
    for i, t in enumerate(levels):
        P = perimeter(space, (x for x, v in enumerate(u) if v > t))
        perims.append(P)
        if i + 1 < len(levels):
            integral += (levels[i + 1] - t) * P
    return CoareaProfile(tuple(levels), tuple(perims), integral)


def nonlocal_gradient(space: RandomWalkSpace, u: Sequence[Number]) -> dict:
    """``grad u (x, y) = u(y) - u(x)`` on every pair with ``m_x({y}) > 0``."""
    return {(x, y): u[y] - u[x] for x, row in enumerate(space.jump) for y, p in row.items() if p > 0}


def divergence(space: RandomWalkSpace, z: Mapping[tuple, Number]) -> list:
    """``div z (x) = 1/2 sum_y (z(x,y) - z(y,x)) m_x({y})``."""
    out = []
    for x, row in enumerate(space.jump):
        acc = space.zero()
        for y, p in row.items():
            if p == 0:
                continue
            try:
                acc += (z[(x, y)] - z[(y, x)]) * p
            except KeyError as exc:
                raise SpaceError(f"edge field is missing entry {exc.args[0]} on the jump support") from None
        out.append(acc / 2)
    return out


def inner(space: RandomWalkSpace, u: Sequence[Number], v: Sequence[Number]) -> Number:
    """``int u v dnu``."""
    return sum((space.measure[x] * u[x] * v[x] for x in range(space.n)), space.zero())


def edge_inner(space: RandomWalkSpace, a: Mapping[tuple, Number], b: Mapping[tuple, Number]) -> Number:
    """``<a, b>`` in ``L^2(nu (x) m_x)``."""
    total = space.zero()
    for x, row in enumerate(space.jump):
        for y, p in row.items():
            if p > 0:
                total += space.measure[x] * p * a[(x, y)] * b[(x, y)]
    return total


def mass(space: RandomWalkSpace, u: Sequence[Number]) -> Number:
    return sum((space.measure[x] * u[x] for x in range(space.n)), space.zero())


def m_of(space: RandomWalkSpace, x: int, E: frozenset) -> Number:
    return sum((p for y, p in space.jump[x].items() if y in E), space.zero())


def curvature(space: RandomWalkSpace, E: Iterable[int]) -> list:
    """Nonlocal mean curvature ``H_{dE}(x) = 1 - 2 m_x(E)`` at every state."""
    E = _as_set(E)
    return [1 - 2 * m_of(space, x, E) for x in range(space.n)]


def lambda_ratio(space: RandomWalkSpace, omega: Iterable[int]) -> Number:
    """``P_m(Omega) / nu(Omega)``; undefined for the empty set and the whole space."""
    omega = _as_set(omega)
    if not omega or len(omega) == space.n:
        raise SpaceError("lambda_ratio needs 0 < nu(Omega) < nu(X)")
    return perimeter(space, omega) / measure_of(space, omega)


@dataclass(frozen=True)
class CheegerResult:
    value: Number
    set: frozenset
    iterations: int


def cheeger(space: RandomWalkSpace, omega: Iterable[int]) -> CheegerResult:
    """``h_1(Omega) = min_{E subset Omega} P_m(E)/nu(E)`` by Dinkelbach iteration on cuts.

    Each step minimizes ``P_m(E) - lam nu(E)`` over ``E`` inside ``Omega``; the
    returned set is the largest minimizer at the optimal ratio.
    """
    omega = _as_set(omega)
    if not omega:
        raise SpaceError("cheeger needs a non-empty set")
    E = omega
    lam = perimeter(space, E) / measure_of(space, E)
    for it in range(1, 4 * space.n + 10):
        w = [-lam * space.measure[x] for x in range(space.n)]
        sol = solve_geometric_affine(space, w, omega, select="maximal")
        stop = 0 if space.exact else -1e-12 * max(1.0, float(perimeter(space, E)))
        if sol.energy >= stop or not sol.set:
            # lam is optimal; the maximal minimizer at lam is the largest Cheeger set
            if sol.maximal:
                E = sol.maximal
            return CheegerResult(lam, E, it)
        E = sol.set
        lam = perimeter(space, E) / measure_of(space, E)
    raise RuntimeError("Dinkelbach iteration did not terminate")


def is_calibrable(space: RandomWalkSpace, omega: Iterable[int], tol: float = 1e-12) -> bool:
    omega = _as_set(omega)
    h = cheeger(space, omega).value
    lam = perimeter(space, omega) / measure_of(space, omega)
    if space.exact:
        return h == lam
    return abs(h - lam) <= tol * max(1.0, abs(lam))


def median_set(space: RandomWalkSpace, f: Sequence[Number]) -> tuple:
    """Closed interval ``[mu_minus, mu_plus]`` of nu-medians of ``f``."""
    half = space.total_measure / 2
    order = sorted(range(space.n), key=lambda x: f[x])
    values = sorted(set(f))
    # mu is a median iff nu(f < mu) <= half and nu(f > mu) <= half
    below = {}
    acc = space.zero()
    i = 0
    for v in values:
        below[v] = acc  # nu(f < v)
        while i < len(order) and f[order[i]] == v:
            acc += space.measure[order[i]]
            i += 1
    total = space.total_measure
    lo = hi = None
    for v in values:
        le = below[v] + sum((space.measure[x] for x in range(space.n) if f[x] == v), space.zero())
        lt = below[v]
        # nu(f > v) = total - le, nu(f < v) = lt
        if lo is None and total - le <= half:
            lo = v
        if lt <= half:
            hi = v
    # between consecutive values the counts are constant; endpoints are attained at values
    return lo, hi


def l1_deviation(space: RandomWalkSpace, f: Sequence[Number], c: Number) -> Number:
    return sum((space.measure[x] * abs(f[x] - c) for x in range(space.n)), space.zero())
