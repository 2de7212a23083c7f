"""Exact minimization of ``TV_m(u) + sum_x psi_x(u_x)`` for separable convex ``psi``.

Each ``psi_x(t) = q_x/2 (t - v_x)^2 + r_x |t - k_x| + beta_x t`` with ``q_x > 0``.
The solver is a divide-and-conquer on level sets: for a region ``V`` it finds
the best constant ``c`` on ``V``; two min-cuts (right and left derivatives
of ``psi`` at ``c``) then give ``{u > c}`` and ``{u >= c}`` inside ``V``.  The
middle part is settled at ``c``, and the other two are solved recursively
after freezing the pairs across the split into the linear terms ``beta``
(the sign of ``u_y - u_x`` is known for them from then on).

With rational inputs and kinks every step is exact, so the output is the
exact minimizer.  The ROF problem, both implicit flow steps and their
certificates are all instances.
"""

from __future__ import annotations

from typing import Sequence

from .mincut import solve_cut
from .numeric import Number, coerce
from .space import RandomWalkSpace


def _best_constant(space: RandomWalkSpace, V: Sequence[int], q, v, r, k, beta) -> Number:
    """Minimizer of ``c -> sum_{x in V} psi_x(c)`` (a strictly convex scalar problem)."""
    zero = space.zero()
    Q = sum((q[x] for x in V), zero)
    base = sum((q[x] * v[x] - beta[x] for x in V), zero)
    kinked = [x for x in V if r[x] > 0]
    if not kinked:
        return base / Q
    kinks = sorted({k[x] for x in kinked})

    def slope_right(c):
        # right derivative of the sum at c
        return Q * c - base + sum((r[x] if c >= k[x] else -r[x] for x in kinked), zero)

    def slope_left(c):
        return Q * c - base + sum((r[x] if c > k[x] else -r[x] for x in kinked), zero)

    prev = None
    for K in kinks:
        if slope_right(K) >= 0:
            if slope_left(K) <= 0:
                return K
            # the root lies strictly between prev and K, where every sign is fixed
            lin = sum((r[x] if prev is not None and k[x] <= prev else -r[x] for x in kinked), zero)
            return (base - lin) / Q
        prev = K
    lin = sum((r[x] for x in kinked), zero)
    return (base - lin) / Q


def prox_tv(
    space: RandomWalkSpace,
    q: Sequence[Number],
    v: Sequence[Number],
    r: Sequence[Number] | None = None,
    k: Sequence[Number] | None = None,
    beta: Sequence[Number] | None = None,
) -> tuple[list, int]:
    """Return ``(u, cuts)``: the unique minimizer and the number of cut solves used."""
    exact = space.exact
    n = space.n
    zero = space.zero()
    q = [coerce(t, exact) for t in q]
    v = [coerce(t, exact) for t in v]
    r = [zero] * n if r is None else [coerce(t, exact) for t in r]
    k = [zero] * n if k is None else [coerce(t, exact) for t in k]
    beta = [zero] * n if beta is None else [coerce(t, exact) for t in beta]
    if any(t <= 0 for t in q):
        raise ValueError("quadratic coefficients must be positive")
    if any(t < 0 for t in r):
        raise ValueError("absolute-value coefficients must be non-negative")

    u: list = [None] * n
    cuts = 0
    stack = [list(range(n))]
    while stack:
        V = stack.pop()
        c = _best_constant(space, V, q, v, r, k, beta)
        if len(V) == 1:
            u[V[0]] = c
            continue
        right = [zero] * n
        left = [zero] * n
        for x in V:
            d = q[x] * (c - v[x]) + beta[x]
            right[x] = d + (r[x] if c >= k[x] else -r[x])
            left[x] = d + (r[x] if c > k[x] else -r[x])
        above = solve_cut(space, right, None, V, boundary=False).minimal  # {u > c}
        atleast = solve_cut(space, left, None, V, boundary=False).maximal  # {u >= c}
        cuts += 2
        level = [x for x in atleast if x not in above]
        below = [x for x in V if x not in atleast]
        if not above and not below:
            for x in V:
                u[x] = c
            continue
        for x in level:
            u[x] = c
        parts = [sorted(above), sorted(level), below]
        rank = {}
        for i, part in enumerate(parts):
            for x in part:
                rank[x] = i
        for x in V:
            for y, cxy in space.neighbors[x]:
                # pairs split across parts have a known order: u_x > u_y when rank[x] < rank[y]
                if y in rank and rank[x] < rank[y]:
                    beta[x] += cxy
                    beta[y] -= cxy
        for part in (parts[2], parts[0]):
            if part:
                stack.append(part)
    return u, cuts
