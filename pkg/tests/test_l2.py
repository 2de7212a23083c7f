import math
import random
from fractions import Fraction as Fr

import pytest

from helpers import lp_meyer_norm, random_graph, zero_mean
from mrwtv.geometry import divergence, mass, perimeter, total_variation
from mrwtv.l2 import (
    meyer_norm,
    meyer_norm_exact,
    multiscale,
    rof_energy,
    solve_rof,
    solve_rof_dual,
    verify_l2_optimality,
)
from mrwtv.mincut import geometric_energy, solve_geometric_affine
from mrwtv.space import SpaceError


def test_two_node_closed_form(two_node):
    assert solve_rof(two_node, [1, 0], 4).u == [Fr(3, 4), Fr(1, 4)]
    assert solve_rof(two_node, [1, 0], 1).u == [Fr(1, 2), Fr(1, 2)]
    res = solve_rof(two_node, [1, 0], 4)
    assert res.certificate[(0, 1)] == -1
    assert verify_l2_optimality(two_node, [1, 0], res.u, 4).ok


def test_constant_signal(chain6):
    assert solve_rof(chain6, [Fr(7, 3)] * 6, Fr(1, 9)).u == [Fr(7, 3)] * 6


def test_bad_lambda(chain6):
    with pytest.raises(ValueError):
        solve_rof(chain6, [0] * 6, 0)


def test_verify_rejects_non_minimizers(chain6):
    f = [3, 1, 4, 1, 5, 9]
    assert not verify_l2_optimality(chain6, f, f, 1).identity_ok
    mean = mass(chain6, [Fr(t) for t in f]) / chain6.total_measure
    rep = verify_l2_optimality(chain6, f, [mean] * 6, Fr(1, 1000))
    assert rep.identity_ok and rep.ok
    rep = verify_l2_optimality(chain6, f, [mean] * 6, 10)
    assert rep.identity_ok and not rep.certificate_ok and not rep.ok


def test_exact_properties(rng):
    for _ in range(40):
        S = random_graph(rng, rng.randint(2, 9), loops=rng.random() < 0.3)
        f = [Fr(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(S.n)]
        lam = Fr(rng.randint(1, 20), rng.randint(1, 10))
        res = solve_rof(S, f, lam)
        u = res.u
        assert [a - b for a, b in zip(f, u)] == res.v
        assert mass(S, u) == mass(S, f)
        assert min(f) <= min(u) and max(u) <= max(f)
        assert lam * sum(S.measure[x] * (f[x] - u[x]) * u[x] for x in range(S.n)) == total_variation(S, u)
        assert res.certificate is not None
        assert verify_l2_optimality(S, f, u, lam).ok
        # level sets of u solve the affine problems
        vals = sorted(set(u))
        for a, b in zip(vals, vals[1:]):
            s = (a + b) / 2
            w = [lam * S.measure[x] * (s - f[x]) for x in range(S.n)]
            A = frozenset(x for x in range(S.n) if u[x] > s)
            best = solve_geometric_affine(S, w).energy
            assert perimeter(S, A) + sum((w[x] for x in A), Fr(0)) == best


def test_comparison_principle(rng):
    for _ in range(30):
        S = random_graph(rng, rng.randint(2, 8))
        lam = Fr(rng.randint(1, 10), 3)
        f1 = [Fr(rng.randint(-5, 5)) for _ in range(S.n)]
        f2 = [Fr(rng.randint(-5, 5)) for _ in range(S.n)]
        u1, u2 = solve_rof(S, f1, lam).u, solve_rof(S, f2, lam).u
        lhs = sum(S.measure[x] * max(u1[x] - u2[x], 0) ** 2 for x in range(S.n))
        rhs = sum(S.measure[x] * max(f1[x] - f2[x], 0) ** 2 for x in range(S.n))
        assert lhs <= rhs
        if all(a <= b for a, b in zip(f1, f2)):
            assert all(a <= b for a, b in zip(u1, u2))


def test_dual_solver_agrees(rng):
    for _ in range(15):
        S = random_graph(rng, rng.randint(2, 10), exact=False)
        f = [rng.uniform(-3, 3) for _ in range(S.n)]
        lam = rng.uniform(0.2, 5)
        a = solve_rof(S, f, lam, certify=False)
        b = solve_rof_dual(S, f, lam)
        assert abs(float(a.energy) - b.energy) <= 1e-6
        assert float(a.energy) <= rof_energy(S, b.u, f, lam) + 1e-12


def test_meyer_two_node(two_node):
    assert meyer_norm(two_node, [1, -1]) == pytest.approx(1, abs=1e-8)
    assert meyer_norm_exact(two_node, [1, -1]) == 1
    assert meyer_norm(two_node, [0, 0]) == 0
    with pytest.raises(SpaceError, match="G_m"):
        meyer_norm(two_node, [1, 0])


def test_meyer_routes_agree_with_lp(rng):
    for _ in range(20):
        S = random_graph(rng, rng.randint(2, 8))
        f = zero_mean(S, [Fr(rng.randint(-5, 5)) for _ in range(S.n)])
        exact = meyer_norm_exact(S, f)
        assert meyer_norm(S, f) == pytest.approx(float(exact), rel=1e-8)
        assert lp_meyer_norm(S, f) == pytest.approx(float(exact), rel=1e-7, abs=1e-9)


def test_meyer_of_divergence(chain6):
    rng = random.Random(3)
    for _ in range(20):
        z = {}
        for x, row in enumerate(chain6.jump):
            for y in row:
                z[(x, y)] = Fr(rng.randint(-10, 10), 10)
        beta = max(abs(t) for t in z.values())
        f = divergence(chain6, z)
        assert meyer_norm_exact(chain6, f) <= beta


def test_multiscale(two_node, chain6):
    res = multiscale(two_node, [1, 0], [1, 4])
    assert res[0].u == [Fr(1, 2), Fr(1, 2)]
    assert [a + b + c for a, b, c in zip(res[0].u, res[1].u, res[1].v)] == [1, 0]
    assert multiscale(chain6, [2] * 6, [1, 2, 3])[1].u == [0] * 6
    with pytest.raises(ValueError):
        multiscale(chain6, [0] * 6, [2, 1])
    f = [Fr(t) for t in (3, 1, 4, 1, 5, 9)]
    sched = [Fr(1, 10), Fr(1, 2), Fr(2), Fr(8)]
    out = multiscale(chain6, f, sched)
    for k, r in enumerate(out):
        assert meyer_norm(chain6, r.v) <= 1 / float(sched[k]) + 1e-6
