import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from factormatch import oracles
from factormatch.graph import (
    Graph,
    cyclic_group,
    edge_boundary,
    named_graph,
    random_regular_bipartite,
    symmetric_group,
)
from factormatch.matching import Matching, enumerate_chains
from factormatch.suites import default_corpus

# alpha and matching sizes for the corpus, cross-checked against networkx
# (maximum clique of the complement, max_weight_matching) when frozen
FROZEN = {
    "petersen": (4, 5), "complete:4": (1, 2), "complete:5": (1, 2),
    "complete-bipartite:3,3": (3, 3), "complete-bipartite:4,4": (4, 4),
    "cycle:5": (2, 2), "cycle:6": (3, 3), "cycle:7": (3, 3), "cycle:8": (4, 4),
    "hypercube:3": (4, 4), "hypercube:4": (8, 8), "hypercube:5": (16, 16),
    "cayley:symmetric:3/transpositions": (3, 3), "cayley:dihedral:4/r,r^-1,s": (4, 4),
    "cayley:product:2,2,2/basis": (4, 4), "cayley:cyclic:10/1,5,9": (5, 5),
    "cayley:cyclic:9/1,3,6,8": (3, 4), "cayley:symmetric:4/adjacent": (12, 12),
    "random-bipartite:6,3,seed=1": (6, 6), "random-bipartite:10,3,seed=2": (10, 10),
    "random-bipartite:16,4,seed=3": (16, 16), "random-bipartite:20,3,seed=4": (20, 20),
}

PHI = {
    "petersen": Fraction(2, 3), "complete:4": Fraction(4, 3), "complete:5": Fraction(5, 4),
    "complete-bipartite:3,3": Fraction(1), "cycle:5": Fraction(5, 6),
    "cycle:6": Fraction(2, 3), "cycle:7": Fraction(7, 12), "cycle:8": Fraction(1, 2),
    "hypercube:3": Fraction(2, 3), "hypercube:4": Fraction(1, 2),
    "cayley:cyclic:9/1,3,6,8": Fraction(3, 4), "cayley:cyclic:10/1,5,9": Fraction(5, 9),
    "cayley:symmetric:4/adjacent": Fraction(1, 3),
    "random-bipartite:6,3,seed=1": Fraction(4, 9),
}

CORPUS = {g.name: g for g in default_corpus()}


def path4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_corpus_values(name):
    g = CORPUS[name]
    alpha, mm = FROZEN[name]
    res = oracles.max_independent_set(g)
    assert res.value == alpha and oracles.is_independent(g, res.witness)
    assert len(res.witness) == alpha
    mres = oracles.max_matching(g)
    assert mres.value == mm and oracles.is_matching_of(g, mres.witness)


@pytest.mark.parametrize("name", sorted(PHI))
def test_frozen_expansion(name):
    g = CORPUS[name]
    res = oracles.brute_cheeger(g)
    assert res.value == PHI[name]
    B = res.witness
    k = len(B)
    assert Fraction(edge_boundary(g, B) * g.n, g.degree * k * (g.n - k)) == res.value


def test_matching_examples():
    assert oracles.max_matching(named_graph("complete-bipartite:3,3")).value == 3
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert oracles.max_matching(star).value == 1
    res = oracles.max_matching(named_graph("petersen"))
    assert res.value == 5 and res.method == "branch-and-bound"


def test_general_limit():
    with pytest.raises(oracles.OracleLimitError):
        oracles.max_matching(named_graph("complete:21"))


def test_independence_limit():
    with pytest.raises(oracles.OracleLimitError):
        oracles.max_independent_set(named_graph("cycle:41"))


def test_cheeger_examples():
    assert oracles.brute_cheeger(named_graph("complete:4")).value == Fraction(4, 3)
    res = oracles.brute_cheeger(named_graph("cycle:6"))
    assert res.value == Fraction(2, 3)
    assert sorted(res.witness) in ([0, 1, 2], [1, 2, 3], [2, 3, 4], [0, 1, 5], [0, 4, 5], [3, 4, 5])
    res = oracles.brute_cheeger(named_graph("complete-bipartite:3,3"))
    assert res.value == 1 and len(res.witness) in (2, 4)
    with pytest.raises(oracles.OracleLimitError):
        oracles.brute_cheeger(named_graph("cycle:25"))


def test_cheeger_brute_force_python():
    # plain-Python enumeration against the vectorized sweep
    g = named_graph("petersen")
    best = min(Fraction(edge_boundary(g, B) * g.n, 3 * len(B) * (g.n - len(B)))
               for k in range(1, g.n) for B in itertools.combinations(range(g.n), k))
    assert oracles.brute_cheeger(g).value == best


def test_augmenting_examples():
    g = named_graph("hypercube:3")
    perfect = Matching.from_pairs(8, [(0, 1), (2, 3), (4, 5), (6, 7)])
    for L in (1, 3, 5, None):
        assert not oracles.has_augmenting_chain(g, perfect, L)
    assert oracles.has_augmenting_chain(g, Matching.empty(8), 1)
    m = Matching.from_pairs(4, [(1, 2)])
    assert not oracles.has_augmenting_chain(path4(), m, 1)
    assert oracles.has_augmenting_chain(path4(), m, 3)
    assert oracles.shortest_augmenting_chain(path4(), m) == 3


def test_augmenting_non_bipartite():
    # 5-cycle with two matched edges has no augmenting chain; pendant adds one
    c5 = named_graph("cycle:5")
    m = Matching.from_pairs(5, [(0, 1), (2, 3)])
    assert not oracles.has_augmenting_chain(c5, m)
    g = Graph.from_edges(6, list(c5.edges) + [(4, 5)])
    assert oracles.has_augmenting_chain(g, Matching.from_pairs(6, [(0, 1), (2, 3)]), 1)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), mseed=st.integers(0, 2**32), L=st.sampled_from([1, 3, 5, 7, 9]))
def test_oracle_agrees_with_enumeration(seed, mseed, L):
    g, _ = random_regular_bipartite(5, 3, seed)
    rng = np.random.default_rng(mseed)
    pairs, used = [], set()
    for i in rng.permutation(g.m):
        u, v = g.edges[i]
        if u not in used and v not in used and rng.random() < 0.6:
            pairs.append((u, v))
            used.update((u, v))
    m = Matching.from_pairs(g.n, pairs)
    assert bool(enumerate_chains(g, m, L)) == oracles.has_augmenting_chain(g, m, L)


def test_cross_oracle_konig():
    for s in range(5):
        g, _ = random_regular_bipartite(8, 3, s)
        assert oracles.max_matching(g).value == 8
        assert oracles.max_independent_set(g).value >= 8


class TestMassTransport:
    def test_single_generator(self):
        res = oracles.mass_transport_check(cyclic_group(6), lambda z: float(z == 1))
        assert res.sent == res.received == 1 and res.equal

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0, 10, allow_nan=False), min_size=6, max_size=6))
    def test_random_kernel(self, kernel):
        res = oracles.mass_transport_check(symmetric_group(3), kernel)
        assert res.equal
        assert res.sent == pytest.approx(sum(kernel))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            oracles.mass_transport_check(cyclic_group(3), [1.0, -1.0, 0.0])

    def test_nonabelian_inverse(self):
        t = symmetric_group(3)
        k = [0.0] * 6
        k[3] = 2.5  # a 3-cycle; its inverse is a different element
        res = oracles.mass_transport_check(t, k)
        assert res.sent == res.received == 2.5
