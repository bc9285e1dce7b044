"""Typed graphs and their empirical distributions (all exact rationals)."""

from fractions import Fraction

import numpy as np
import pytest

from graphld.graphs import (
    TypedGraph,
    degree_distribution,
    empirical_link_measure,
    empirical_locality_measure,
    empirical_type_measure,
)
from graphld.measures import CountingMeasure, FiniteMeasure, ProbMeasure, dirac, marginal_pair
from helpers import random_typed_graph


def atom(a, counts):
    return (a, CountingMeasure(counts))


def test_graph_validation():
    with pytest.raises(ValueError):
        TypedGraph([], [])
    with pytest.raises(ValueError):
        TypedGraph(["a", "a"], [(1, 1)])  # self-loop
    with pytest.raises(ValueError):
        TypedGraph(["a", "a"], [(1, 3)])  # out of range
    z = TypedGraph(["a", "a"], [(2, 1), (1, 2)])  # normalized and de-duplicated
    assert z.edges == frozenset({(1, 2)})


def test_empirical_type_measure():
    z = TypedGraph(["a", "a", "b", "b"], [(1, 3), (2, 4)])
    assert empirical_type_measure(z) == ProbMeasure({"a": Fraction(1, 2), "b": Fraction(1, 2)})
    assert empirical_type_measure(TypedGraph(["a"] * 3, [])) == dirac("a")
    z3 = TypedGraph(["a", "b", "b"], [])
    assert empirical_type_measure(z3) == ProbMeasure({"a": Fraction(1, 3), "b": Fraction(2, 3)})


def test_empirical_link_measure():
    z = TypedGraph(["a", "a", "b", "b"], [(1, 3), (2, 4)])
    assert empirical_link_measure(z) == FiniteMeasure(
        {("a", "b"): Fraction(1, 2), ("b", "a"): Fraction(1, 2)})
    assert empirical_link_measure(TypedGraph(["a", "b"], [])) == FiniteMeasure({})
    # ordered-pair convention: a single (a,a) edge on n=2 has total mass 2*1/2 = 1
    z2 = TypedGraph(["a", "a"], [(1, 2)])
    assert empirical_link_measure(z2) == FiniteMeasure({("a", "a"): 1})


def test_empirical_locality_measure():
    z = TypedGraph(["a", "a", "b", "b"], [(1, 3), (2, 4)])
    assert empirical_locality_measure(z) == ProbMeasure({
        atom("a", {"b": 1}): Fraction(1, 2),
        atom("b", {"a": 1}): Fraction(1, 2),
    })
    z2 = TypedGraph(["a", "a", "b", "b"], [(1, 3), (1, 4)])
    assert empirical_locality_measure(z2) == ProbMeasure({
        atom("a", {"b": 2}): Fraction(1, 4),
        atom("a", {}): Fraction(1, 4),
        atom("b", {"a": 1}): Fraction(1, 2),
    })
    z3 = TypedGraph(["a"] * 4, [])
    assert empirical_locality_measure(z3) == dirac(atom("a", {}))


def test_degree_distribution():
    cycle = TypedGraph(["a"] * 4, [(1, 2), (2, 3), (3, 4), (1, 4)])
    assert degree_distribution(cycle) == dirac(2)
    assert degree_distribution(TypedGraph(["a"] * 5, [])) == dirac(0)
    path = TypedGraph(["a"] * 3, [(1, 2), (2, 3)])
    dist = degree_distribution(path)
    assert dist == ProbMeasure({1: Fraction(2, 3), 2: Fraction(1, 3)})
    # mean identity: mean = 4/3 = 2|E|/n
    mean = sum(k * w for k, w in dist.items())
    assert mean == Fraction(2 * path.num_edges(), path.n)


def test_degree_mean_identity_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        z = random_typed_graph(rng, max_n=30)
        dist = degree_distribution(z)
        assert sum(k * w for k, w in dist.items()) == Fraction(2 * z.num_edges(), z.n)


def test_marginals_of_locality_measure_match_empirical_pair():
    """The marginal pair of the locality measure is exactly the
    (type, link) empirical pair, in rational arithmetic."""
    rng = np.random.default_rng(11)
    for _ in range(100):
        z = random_typed_graph(rng)
        locality = empirical_locality_measure(z)
        assert marginal_pair(locality) == \
            (empirical_type_measure(z), empirical_link_measure(z))


def test_single_type_locality_equals_degree_law():
    # on one type, (a, {a:k}) <-> k is a weight-preserving bijection
    rng = np.random.default_rng(13)
    for _ in range(20):
        z = random_typed_graph(rng, max_types=1)
        locality = empirical_locality_measure(z)
        degrees = degree_distribution(z)
        assert len(locality) == len(degrees)
        for (label, counts), w in locality.items():
            assert label == "a"
            assert degrees(counts.total()) == w


def test_text_format_round_trip():
    z = TypedGraph(["b", "a", "a"], [(2, 3), (1, 2)])
    text = z.to_text()
    assert text == "typedgraph v1\nn=3\ntypes=b a a\ne 1 2\ne 2 3\n"
    assert TypedGraph.from_text(text) == z


def test_text_format_errors():
    with pytest.raises(ValueError, match="typedgraph v1"):
        TypedGraph.from_text("graph\nn=1\ntypes=a\n")
    with pytest.raises(ValueError, match="expected 2 type labels"):
        TypedGraph.from_text("typedgraph v1\nn=2\ntypes=a\n")
    with pytest.raises(ValueError, match="u < v"):
        TypedGraph.from_text("typedgraph v1\nn=2\ntypes=a a\ne 2 1\n")
