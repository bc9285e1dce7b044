"""Exact small-scale enumeration of the conditional graph model.

For an admissible :class:`~graphld.sampler.ConditionSpec`, the support of the
conditional model is a cartesian product of per-block pair subsets, so it can
be enumerated outright at desk scale (guarded at 1e8 graphs).  On top of the
enumeration sit:

* ``type_class_counts`` -- group the support by exact empirical locality
  measure (the type classes);
* ``exact_event_probability`` -- the exact rational probability of any
  predicate on the locality measure;
* ``entropy_neighborhood`` -- the relative-entropy sublevel neighborhoods
  used for local event probabilities;
* ``lldp_exponent_gap`` -- the finite-n gap between the exact per-node decay
  exponent of a type class and its relative-entropy rate.

All probabilities are exact rationals (big-integer counts); logarithms are
taken only at the reporting boundary, since the finite-n corrections are
O(log n / n) and would drown in float noise otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .graphs import TypedGraph, empirical_locality_measure, locality_atoms_of
from .measures import CountingMeasure, ProbMeasure, encode_measure
from .rate import ReferenceLaw, relative_entropy
from .sampler import ConditionalSampler, ConditionSpec

#: Enumeration refuses supports larger than this.
ENUMERATION_GUARD = 10**8

EventPredicate = Callable[[ProbMeasure], bool]


class EnumerationGuardError(ValueError):
    """Raised when a spec's support is too large to enumerate."""


def support_size(spec: ConditionSpec) -> int:
    """Exact number of admissible graphs: the product over pair blocks of
    C(capacity, edge_count)."""
    sampler = ConditionalSampler(spec)
    size = 1
    for block in sampler.blocks:
        size *= math.comb(block.capacity, block.edge_count)
    return size


def _guard(spec: ConditionSpec) -> ConditionalSampler:
    sampler = ConditionalSampler(spec)
    size = 1
    for block in sampler.blocks:
        size *= math.comb(block.capacity, block.edge_count)
    if size > ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"support has {size} graphs, more than the enumeration guard "
            f"{ENUMERATION_GUARD}; use Monte Carlo (sample_conditional_graph) instead")
    return sampler


def enumerate_support(spec: ConditionSpec) -> Iterator[TypedGraph]:
    """Yield every admissible graph exactly once, as the cartesian product of
    per-block pair combinations in lexicographic order."""
    sampler = _guard(spec)
    types = sampler.types
    blocks = sampler.blocks
    pools = [
        itertools.combinations(range(block.capacity), block.edge_count)
        for block in blocks
    ]
    for choice in itertools.product(*pools):
        edges = []
        for block, indices in zip(blocks, choice):
            edges.extend(block.pair_at(i) for i in indices)
        yield TypedGraph(types, edges)


# A type class is keyed internally by the sorted multiset of per-node locality
# atoms; two graphs on n nodes have equal locality measures iff these match.
_ClassKey = Tuple[Tuple[Tuple[str, Tuple[Tuple[str, int], ...]], int], ...]


def _class_key(types: Sequence[str], edges) -> _ClassKey:
    counts: Dict = {}
    for atom in locality_atoms_of(types, edges):
        counts[atom] = counts.get(atom, 0) + 1
    return tuple(sorted(counts.items()))


def class_measure(n: int, key: _ClassKey) -> ProbMeasure:
    """Reconstruct the exact locality measure of a type class from its key."""
    return ProbMeasure(
        {(a, CountingMeasure(e)): Fraction(count, n) for (a, e), count in key}
    )


@dataclass(frozen=True)
class EnumerationReport:
    """Exact census of a spec's support, grouped by locality measure.

    ``class_counts`` maps the canonical text encoding of each locality measure
    to the number of graphs realizing it; counts sum to ``support_size`` and
    each class has probability count / support_size.
    """

    spec: ConditionSpec
    support_size: int
    class_counts: Dict[str, int]
    event_probability: Optional[Fraction] = None

    def class_probability(self, key: str) -> Fraction:
        return Fraction(self.class_counts.get(key, 0), self.support_size)

    def to_json_dict(self) -> Dict[str, object]:
        prob = self.event_probability
        return {
            "spec": self.spec.to_json_dict(),
            "support_size": self.support_size,
            "class_counts": dict(sorted(self.class_counts.items())),
            "event_probability": None if prob is None else f"{prob.numerator}/{prob.denominator}",
        }


def type_class_counts(spec: ConditionSpec) -> EnumerationReport:
    """Group the full support by exact empirical locality measure."""
    sampler = _guard(spec)
    types = sampler.types
    blocks = sampler.blocks
    pools = [
        itertools.combinations(range(block.capacity), block.edge_count)
        for block in blocks
    ]
    counts: Dict[_ClassKey, int] = {}
    total = 0
    for choice in itertools.product(*pools):
        edges = []
        for block, indices in zip(blocks, choice):
            edges.extend(block.pair_at(i) for i in indices)
        key = _class_key(types, edges)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    encoded = {
        encode_measure(class_measure(spec.n, key)): count
        for key, count in counts.items()
    }
    return EnumerationReport(spec, total, encoded)


def exact_event_probability(spec: ConditionSpec, event: EventPredicate) -> Fraction:
    """Exact probability that the locality measure of a conditional draw
    satisfies ``event``: (# graphs in the event) / support_size."""
    hits = 0
    total = 0
    for graph in enumerate_support(spec):
        total += 1
        if event(empirical_locality_measure(graph)):
            hits += 1
    return Fraction(hits, total)


def entropy_neighborhood(p: ProbMeasure, type_law: ProbMeasure, link_law,
                         eps: float) -> EventPredicate:
    """Membership test for the entropy neighborhood of ``p``:

        mu in B_p  iff  H(mu || q) > H(p || q) - eps/2,

    with q the product-Poisson reference for (type_law, link_law).  ``p``
    itself always belongs to its neighborhood.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    reference = ReferenceLaw(type_law, link_law)
    threshold = relative_entropy(p, reference) - eps / 2
    return lambda mu: relative_entropy(mu, reference) > threshold


def lldp_exponent_gap(
    specs: Sequence[ConditionSpec],
    targets: Union[ProbMeasure, Sequence[ProbMeasure]],
) -> List[Tuple[int, float]]:
    """Finite-size exponent gaps of a target type class along a spec family:

        gap_n = | -(1/n) log Q{class of p_n} - H(p_n || q_n) |,

    where the class probability is exact (enumeration) and q_n is the
    product-Poisson reference built from the spec's own constraint pair.
    ``targets`` is one locality measure per spec, or a single measure shared
    by all specs (a family whose target class is constant).
    """
    if isinstance(targets, ProbMeasure):
        targets = [targets] * len(specs)
    if len(targets) != len(specs):
        raise ValueError("need one target measure per spec")
    gaps: List[Tuple[int, float]] = []
    for spec, target in zip(specs, targets):
        report = type_class_counts(spec)
        key = encode_measure(target)
        count = report.class_counts.get(key, 0)
        if count == 0:
            raise ValueError(f"target class is empty at n = {spec.n}")
        exponent = -(math.log(count) - math.log(report.support_size)) / spec.n
        entropy = relative_entropy(target, ReferenceLaw(spec.type_law, spec.link_law))
        gaps.append((spec.n, abs(exponent - entropy)))
    return gaps


def sampled_class_counts(spec: ConditionSpec, num_samples: int,
                         rng: np.random.Generator) -> Dict[str, int]:
    """Class frequencies of ``num_samples`` conditional draws, keyed like
    :func:`type_class_counts` (canonical locality-measure encodings).

    Uses the sampler's bare edge path, so a million draws of a small spec
    stay cheap.
    """
    sampler = ConditionalSampler(spec)
    types = sampler.types
    counts: Dict[_ClassKey, int] = {}
    for _ in range(num_samples):
        key = _class_key(types, sampler.sample_edges(rng))
        counts[key] = counts.get(key, 0) + 1
    return {
        encode_measure(class_measure(spec.n, key)): count
        for key, count in counts.items()
    }
