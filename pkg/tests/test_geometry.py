import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import all_subsets, brute_cheeger, random_graph, random_subset
from mrwtv.geometry import (
    cheeger,
    coarea_profile,
    curvature,
    divergence,
    edge_inner,
    inner,
    interaction,
    is_calibrable,
    l1_deviation,
    lambda_ratio,
    median_set,
    nonlocal_gradient,
    perimeter,
    perimeter_by_complement,
    total_variation,
)
from mrwtv.mincut import measure_of
from mrwtv.space import SpaceError

seeds = st.integers(0, 10**6)


def test_chain6_values(chain6):
    om = chain6.subset(["1", "2"])
    assert perimeter(chain6, om) == 6
    assert lambda_ratio(chain6, om) == Fr(3, 8)
    E = chain6.subset(["1", "2", "3", "4"])
    assert curvature(chain6, E)[chain6.index("4")] == Fr(-1, 3)
    assert is_calibrable(chain6, om)
    # {1,4}: ratio 1 and the Cheeger constant is 1 as well
    assert lambda_ratio(chain6, chain6.subset(["1", "4"])) == 1
    assert cheeger(chain6, chain6.subset(["1", "4"])).value == 1


def test_lambda_ratio_rejects_trivial(chain6):
    with pytest.raises(SpaceError):
        lambda_ratio(chain6, [])
    with pytest.raises(SpaceError):
        lambda_ratio(chain6, range(6))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_perimeter_two_routes(seed):
    rng = random.Random(seed)
    S = random_graph(rng, rng.randint(2, 9), loops=True)
    A = random_subset(rng, S.n)
    assert perimeter(S, A) == perimeter_by_complement(S, A) == interaction(S, A, set(range(S.n)) - A)
    rest = frozenset(range(S.n)) - A
    assert perimeter(S, A) == perimeter(S, rest)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_coarea_exact(seed):
    rng = random.Random(seed)
    S = random_graph(rng, rng.randint(2, 9))
    u = [Fr(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(S.n)]
    assert total_variation(S, u) == coarea_profile(S, u).integral


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_green_formula_exact(seed):
    rng = random.Random(seed)
    S = random_graph(rng, rng.randint(2, 9), loops=True)
    u = [Fr(rng.randint(-5, 5)) for _ in range(S.n)]
    z = {k: Fr(rng.randint(-4, 4), 4) for k in nonlocal_gradient(S, u)}
    assert inner(S, u, divergence(S, z)) == -edge_inner(S, nonlocal_gradient(S, u), z) / 2


def test_cheeger_matches_enumeration(rng):
    for _ in range(30):
        S = random_graph(rng, rng.randint(2, 9))
        om = random_subset(rng, S.n, nontrivial=True)
        h = cheeger(S, om)
        assert h.value == brute_cheeger(S, om)
        assert h.set <= om and perimeter(S, h.set) / measure_of(S, h.set) == h.value
        # the returned set is the largest Cheeger set
        for A in all_subsets(S.n):
            if A and A <= om and perimeter(S, A) / measure_of(S, A) == h.value:
                assert A <= h.set


def test_median_set_enumeration(rng):
    for _ in range(40):
        S = random_graph(rng, rng.randint(1, 8) + 1)
        f = [Fr(rng.randint(0, 4)) for _ in range(S.n)]
        lo, hi = median_set(S, f)
        half = S.total_measure / 2
        for v in sorted(set(f)):
            below = sum((S.measure[x] for x in range(S.n) if f[x] < v), Fr(0))
            above = sum((S.measure[x] for x in range(S.n) if f[x] > v), Fr(0))
            assert (below <= half and above <= half) == (lo <= v <= hi)
        best = min(l1_deviation(S, f, v) for v in set(f))
        assert l1_deviation(S, f, lo) == l1_deviation(S, f, hi) == best
