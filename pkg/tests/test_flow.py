import math
import random
from fractions import Fraction as Fr

import pytest

from helpers import random_graph
from mrwtv.flow import decay_report, simulate, step_implicit
from mrwtv.l1 import solve_l1
from mrwtv.l2 import solve_rof

CHI12 = [1, 1, 0, 0, 0, 0]


def qnorm(space, a, q):
    if q == math.inf:
        return max(abs(t) for t in a)
    return sum(float(space.measure[x]) * abs(a[x]) ** q for x in range(space.n)) ** (1 / q)


def test_two_node_decay(two_node):
    target = [float(t) for t in solve_rof(two_node, [1, 0], 4).u]
    traj = simulate(two_node, [0, 1], [1, 0], 4, 2, 1e-3, "l2", target=target)
    rep = decay_report(traj)
    assert rep.ok and max(rep.ratios) <= 1.02
    assert rep.bound == pytest.approx(1 + 5 * 4 * 1e-3)
    assert len(traj.states) == 2001


def test_constant_at_minimizer(chain6):
    u = solve_rof(chain6, [3, 1, 4, 1, 5, 9], 1).u
    traj = simulate(chain6, u, [3, 1, 4, 1, 5, 9], 1, 1, 0.25, "l2", target=u, exact=True)
    assert all(s == u for s in traj.states)
    rep = decay_report(traj)
    assert rep.ok and all(r == 0 for r in rep.ratios)


def test_missing_target(chain6):
    traj = simulate(chain6, [0] * 6, CHI12, 1, 1, 0.5, "l1")
    with pytest.raises(ValueError):
        decay_report(traj)


def test_mass_and_energy(chain6):
    f = [3, 1, 4, 1, 5, 9]
    m = sum(chain6.measure[x] * f[x] for x in range(6))
    v0 = [float(m / 34)] * 6
    traj = simulate(chain6, v0, f, Fr(1, 2), 3, 0.05, "l2")
    assert max(abs(float(t) - float(m)) for t in traj.mass) <= 1e-9
    assert all(b <= a + 1e-12 for a, b in zip(traj.energy, traj.energy[1:]))


def test_l1_reaches_minimizer(chain6):
    traj = simulate(chain6, [0] * 6, CHI12, 1, 20, 0.1, "l1", target=CHI12)
    rep = decay_report(traj)
    assert rep.ok and rep.terminal_distance <= 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(traj.energy, traj.energy[1:]))


def test_exact_step_is_prox_minimizer(chain6):
    v = [Fr(t) for t in (0, 2, 1, 3, 0, 1)]
    for fid in ("l1", "l2"):
        u = step_implicit(chain6, v, Fr(1, 3), CHI12, Fr(1, 2), fid)
        from mrwtv.flow import flow_energy

        def J(w):
            return flow_energy(chain6, w, CHI12, Fr(1, 2), fid) + sum(
                chain6.measure[x] * (w[x] - v[x]) ** 2 for x in range(6)) * Fr(3, 2)

        base = J(u)
        for x in range(6):
            for d in (Fr(1, 997), Fr(-1, 997)):
                w = list(u)
                w[x] += d
                assert J(w) >= base


@pytest.mark.parametrize("q", [1, 2, math.inf])
def test_paired_contraction(q):
    rng = random.Random(5)
    for _ in range(6):
        S = random_graph(rng, rng.randint(3, 8))
        lam = rng.uniform(0.2, 2)
        f = [rng.uniform(-2, 2) for _ in range(S.n)]
        fh = [t + rng.uniform(0, 1) for t in f]
        v0 = [rng.uniform(-3, 3) for _ in range(S.n)]
        w0 = [rng.uniform(-3, 3) for _ in range(S.n)]
        a = simulate(S, v0, f, lam, 1, 0.1, "l2")
        b = simulate(S, w0, fh, lam, 1, 0.1, "l2")
        start = qnorm(S, [max(x - y, 0) for x, y in zip(v0, w0)], q)
        for s, t in zip(a.states, b.states):
            assert qnorm(S, [max(x - y, 0) for x, y in zip(s, t)], q) <= start + 1e-9
        a = simulate(S, v0, f, lam, 1, 0.1, "l1")
        b = simulate(S, w0, f, lam, 1, 0.1, "l1")
        start = qnorm(S, [x - y for x, y in zip(v0, w0)], q)
        for s, t in zip(a.states, b.states):
            assert qnorm(S, [x - y for x, y in zip(s, t)], q) <= start + 1e-9


def test_bad_arguments(chain6):
    with pytest.raises(ValueError):
        simulate(chain6, [0] * 6, CHI12, 1, 1, 0.1, "l3")
    with pytest.raises(ValueError):
        step_implicit(chain6, [0] * 6, 0, CHI12, 1)
    with pytest.raises(ValueError):
        simulate(chain6, [0] * 6, CHI12, 1, 0, 0.1)
