"""Exact enumeration, type classes, event probabilities, exponent gaps."""

import math
from fractions import Fraction

import numpy as np
import pytest

from graphld.graphs import empirical_locality_measure
from graphld.measures import (
    CountingMeasure,
    FiniteMeasure,
    ProbMeasure,
    dirac,
    encode_measure,
    marginal_pair,
)
from graphld.oracle import (
    EnumerationGuardError,
    entropy_neighborhood,
    enumerate_support,
    exact_event_probability,
    lldp_exponent_gap,
    sampled_class_counts,
    support_size,
    type_class_counts,
)
from graphld.rate import ReferenceLaw, relative_entropy
from graphld.sampler import ConditionSpec, binary_cross_spec


def atom(a, counts):
    return (a, CountingMeasure(counts))


def matching_measure():
    return ProbMeasure({atom("a", {"b": 1}): Fraction(1, 2),
                        atom("b", {"a": 1}): Fraction(1, 2)})


def single_type_spec(n, edges):
    return ConditionSpec(n, dirac("a"),
                         FiniteMeasure({("a", "a"): Fraction(2 * edges, n)}))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def test_enumerate_binary_cross_support():
    spec = binary_cross_spec(4)
    graphs = list(enumerate_support(spec))
    assert len(graphs) == 6  # C(4, 2) placements of 2 cross links
    assert len({g.edges for g in graphs}) == 6  # all distinct
    for g in graphs:
        assert marginal_pair(empirical_locality_measure(g)) == \
            (spec.type_law, spec.link_law)


def test_enumerate_degenerate_supports():
    edgeless = ConditionSpec(3, ProbMeasure({"a": Fraction(2, 3), "b": Fraction(1, 3)}),
                             FiniteMeasure({}))
    assert len(list(enumerate_support(edgeless))) == 1
    one_edge = single_type_spec(2, 1)
    graphs = list(enumerate_support(one_edge))
    assert len(graphs) == 1 and graphs[0].edges == frozenset({(1, 2)})


def test_enumeration_guard():
    # single type, n=60, 15 links: C(1770, 15) blows through 1e8
    spec = single_type_spec(60, 15)
    with pytest.raises(EnumerationGuardError, match="100000000"):
        list(enumerate_support(spec))
    with pytest.raises(EnumerationGuardError, match="Monte Carlo"):
        type_class_counts(spec)


def test_support_size_matches_enumeration():
    for spec in (binary_cross_spec(4), binary_cross_spec(6), single_type_spec(4, 3)):
        assert support_size(spec) == len(list(enumerate_support(spec)))


# ---------------------------------------------------------------------------
# Type classes
# ---------------------------------------------------------------------------

def test_binary_cross_type_classes():
    """The 6-graph support splits into three classes of 2: both links at one
    a-node, both at one b-node, and the perfect matchings."""
    report = type_class_counts(binary_cross_spec(4))
    assert report.support_size == 6
    assert sorted(report.class_counts.values()) == [2, 2, 2]
    assert sum(report.class_counts.values()) == report.support_size
    matching_key = encode_measure(matching_measure())
    assert report.class_counts[matching_key] == 2
    assert report.class_probability(matching_key) == Fraction(1, 3)


def test_zero_link_spec_single_class():
    spec = ConditionSpec(4, ProbMeasure({"a": 0.5, "b": 0.5}), FiniteMeasure({}))
    report = type_class_counts(spec)
    assert report.support_size == 1
    only = ProbMeasure({atom("a", {}): Fraction(1, 2), atom("b", {}): Fraction(1, 2)})
    assert report.class_counts == {encode_measure(only): 1}


def test_exact_event_probability():
    spec = binary_cross_spec(4)
    assert exact_event_probability(spec, lambda mu: True) == 1
    target = matching_measure()
    assert exact_event_probability(spec, lambda mu: mu == target) == Fraction(1, 3)


def test_counting_identity():
    # event probability times support size recovers the class count exactly
    spec = binary_cross_spec(6)
    report = type_class_counts(spec)
    target = matching_measure()
    prob = exact_event_probability(spec, lambda mu: mu == target)
    assert prob * report.support_size == report.class_counts[encode_measure(target)]


# ---------------------------------------------------------------------------
# Entropy neighborhoods
# ---------------------------------------------------------------------------

def test_entropy_neighborhood_contains_center():
    spec = binary_cross_spec(4)
    p = matching_measure()
    in_b = entropy_neighborhood(p, spec.type_law, spec.link_law, eps=1e-3)
    assert in_b(p)


def test_entropy_neighborhood_excludes_low_entropy_measures():
    spec = binary_cross_spec(4)
    p = matching_measure()
    reference = ReferenceLaw(spec.type_law, spec.link_law)
    # a near-copy of the reference has entropy ~0 < H(p||q) - eps/2
    mu = reference.truncated(10)
    assert relative_entropy(p, reference) > 0.5
    in_b = entropy_neighborhood(p, spec.type_law, spec.link_law, eps=1e-3)
    assert not in_b(mu)


def test_entropy_neighborhood_event_probability():
    """At small eps only the matching class itself reaches the neighborhood:
    its entropy is 1 while the other two classes sit at 1 - log(2)/4."""
    spec = binary_cross_spec(4)
    p = matching_measure()
    reference = ReferenceLaw(spec.type_law, spec.link_law)
    seen = {}
    for g in enumerate_support(spec):
        mu = empirical_locality_measure(g)
        seen[encode_measure(mu)] = relative_entropy(mu, reference)
    assert seen[encode_measure(p)] == pytest.approx(1.0, abs=1e-12)
    others = [v for k, v in seen.items() if k != encode_measure(p)]
    assert all(v == pytest.approx(1 - math.log(2) / 4, abs=1e-12) for v in others)
    in_b = entropy_neighborhood(p, spec.type_law, spec.link_law, eps=1e-3)
    assert exact_event_probability(spec, in_b) == Fraction(1, 3)


# ---------------------------------------------------------------------------
# Exponent gaps
# ---------------------------------------------------------------------------

def test_exponent_gap_closed_forms_on_binary_family():
    """Independent arithmetic: support C((n/2)^2, n/2), matching class
    (n/2)!, reference entropy exactly 1."""
    specs = [binary_cross_spec(n) for n in (4, 6, 8)]
    gaps = lldp_exponent_gap(specs, matching_measure())
    for (n, gap) in gaps:
        half = n // 2
        count = math.factorial(half)
        support = math.comb(half * half, half)
        expected = abs(-(math.log(count) - math.log(support)) / n - 1.0)
        assert gap == pytest.approx(expected, abs=1e-12)
    assert gaps[0][1] > gaps[1][1] > gaps[2][1]  # shrinks along the family


def test_exponent_gap_single_type_one_edge():
    # support is one graph, probability 1: gap = H(p_2 || q_2) = 1
    spec = single_type_spec(2, 1)
    target = dirac(atom("a", {"a": 1}))
    [(n, gap)] = lldp_exponent_gap([spec], [target])
    assert n == 2
    assert gap == pytest.approx(1.0, abs=1e-12)


def test_exponent_gap_zero_for_edgeless_family():
    specs = []
    targets = []
    for n in (3, 5):
        specs.append(ConditionSpec(n, dirac("a"), FiniteMeasure({})))
        targets.append(dirac(atom("a", {})))
    for (n, gap) in lldp_exponent_gap(specs, targets):
        assert gap == 0.0


def test_exponent_gap_empty_class_raises():
    with pytest.raises(ValueError, match="empty"):
        lldp_exponent_gap([binary_cross_spec(4)],
                          [dirac(atom("a", {"b": 2}))])


# ---------------------------------------------------------------------------
# Sampler agreement
# ---------------------------------------------------------------------------

def test_sampled_class_frequencies_match_exact_probabilities():
    spec = binary_cross_spec(4)
    report = type_class_counts(spec)
    draws = 100_000
    counts = sampled_class_counts(spec, draws, np.random.default_rng(314))
    assert sum(counts.values()) == draws
    for key, count in report.class_counts.items():
        p = count / report.support_size
        se = math.sqrt(p * (1 - p) / draws)
        assert abs(counts.get(key, 0) / draws - p) <= 4 * se
