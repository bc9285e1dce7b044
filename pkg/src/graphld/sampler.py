"""Exact-uniform graph samplers.

Two models:

* ``sample_conditional_graph`` -- a typed graph conditioned to have a given
  empirical type law and link law.  Nodes ``1..n_a`` get type ``a`` in
  canonical type order; within each unordered type-pair block a uniformly
  random subset of the candidate node pairs of the required size is chosen,
  independently across blocks.  Every draw reproduces the constraint pair
  exactly, and the law is exactly uniform over the admissible graphs with
  this fixed type assignment.  (All statistics extracted downstream are
  invariant under permuting nodes within a type, so fixing the assignment is
  harmless.)

* ``sample_erdos_renyi`` -- the single-type graph with exactly ``m`` edges,
  a uniform m-subset of all node pairs.

Subsets are drawn with Floyd's algorithm, so memory is O(m) and node counts
up to ~1e5 are practical.  RNG contract: every sampler consumes an explicit
``numpy.random.Generator`` (PCG64 via ``numpy.random.default_rng``); identical
seed + spec produces the identical graph for a fixed numpy version.  Sampling
is pure given the generator state; parallel Monte Carlo must give each worker
an independently seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .graphs import Edge, TypedGraph
from .measures import FiniteMeasure, ProbMeasure, Scalar, TypeAlphabet, decode_key

#: Tolerance when checking that n * weight is an integer for float weights.
COUNT_TOL = 1e-9


class InadmissibleSpecError(ValueError):
    """Raised when a ConditionSpec violates one of its admissibility bounds."""


@dataclass(frozen=True)
class ConditionSpec:
    """A target pair (type law, link law) at a given node count.

    Admissible when ``n * type_law(a)`` is integral for every type, the block
    edge counts ``n * link_law(a, b)`` (off-diagonal) and
    ``n * link_law(a, a) / 2`` (diagonal) are integral, and each block count
    fits its capacity.
    """

    n: int
    type_law: ProbMeasure
    link_law: FiniteMeasure

    def to_json_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "eta": self.type_law.to_json_dict(),
            "pi": self.link_law.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, object]) -> "ConditionSpec":
        try:
            n = int(obj["n"])  # type: ignore[arg-type]
            eta = ProbMeasure.from_json_dict(obj["eta"], "type")  # type: ignore[arg-type]
            pi = FiniteMeasure.from_json_dict(obj["pi"], "pair")  # type: ignore[arg-type]
        except KeyError as exc:
            raise ValueError(f"spec object missing field {exc}") from None
        return cls(n, eta, pi)


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    reason: Optional[str]

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class _Block:
    """One unordered type-pair block of the pair space."""

    a: str
    b: str
    a_start: int  # first node id of the a-segment
    a_size: int
    b_start: int
    b_size: int
    capacity: int
    edge_count: int

    def pair_at(self, index: int) -> Edge:
        if self.a == self.b:
            r, s = _unrank_pair(index, self.a_size)
            return (self.a_start + r, self.a_start + s)
        return (self.a_start + index // self.b_size,
                self.b_start + index % self.b_size)


def _as_count(x: Scalar, what: str) -> int:
    if isinstance(x, Rational):
        if Fraction(x).denominator != 1:
            raise InadmissibleSpecError(f"{what} = {x} is not an integer")
        return int(x)
    rounded = round(x)
    if abs(x - rounded) > COUNT_TOL:
        raise InadmissibleSpecError(f"{what} = {x!r} is not an integer (tol {COUNT_TOL})")
    return int(rounded)


def _analyze(spec: ConditionSpec) -> Tuple[Tuple[str, ...], List[_Block]]:
    """Validate a spec and lay out its node segments and pair blocks.

    Raises InadmissibleSpecError naming the first violated constraint.
    """
    if spec.n < 1:
        raise InadmissibleSpecError(f"n = {spec.n} must be >= 1")
    if spec.type_law.kind() != "type":
        raise InadmissibleSpecError("eta must be a measure over type labels")
    if spec.link_law.kind() not in (None, "pair"):
        raise InadmissibleSpecError("pi must be a measure over type pairs")
    alphabet = TypeAlphabet(spec.type_law.keys())

    sym_tol = 0 if spec.link_law.is_exact() else 1e-12
    for (a, b) in spec.link_law.keys():
        if a not in alphabet or b not in alphabet:
            raise InadmissibleSpecError(f"pi key ({a!r}, {b!r}) outside the type support")
        if abs(spec.link_law((a, b)) - spec.link_law((b, a))) > sym_tol:
            raise InadmissibleSpecError(f"pi is not symmetric at ({a!r}, {b!r})")

    sizes = {a: _as_count(spec.n * spec.type_law(a), f"n*eta({a})") for a in alphabet}
    if sum(sizes.values()) != spec.n:
        raise InadmissibleSpecError(
            f"type counts {sizes} sum to {sum(sizes.values())}, not n = {spec.n}")

    starts = {}
    next_id = 1
    types: List[str] = []
    for a in alphabet:
        starts[a] = next_id
        types.extend([a] * sizes[a])
        next_id += sizes[a]

    blocks: List[_Block] = []
    symbols = alphabet.symbols
    for i, a in enumerate(symbols):
        for b in symbols[i:]:
            if a == b:
                count = _as_count(spec.n * spec.link_law((a, a)) / 2, f"n*pi({a},{a})/2")
                capacity = sizes[a] * (sizes[a] - 1) // 2
            else:
                count = _as_count(spec.n * spec.link_law((a, b)), f"n*pi({a},{b})")
                capacity = sizes[a] * sizes[b]
            if not 0 <= count <= capacity:
                raise InadmissibleSpecError(
                    f"block ({a},{b}) needs {count} pairs but capacity is {capacity}")
            blocks.append(_Block(a, b, starts[a], sizes[a], starts[b], sizes[b],
                                 capacity, count))
    return tuple(types), blocks


def admissible(spec: ConditionSpec) -> AdmissibilityReport:
    """Check the ConditionSpec invariants; the report names the first
    violated constraint."""
    try:
        _analyze(spec)
    except InadmissibleSpecError as exc:
        return AdmissibilityReport(False, str(exc))
    return AdmissibilityReport(True, None)


# ---------------------------------------------------------------------------
# Subset sampling primitives
# ---------------------------------------------------------------------------

def _unrank_pair(k: int, size: int) -> Tuple[int, int]:
    """The k-th pair (r, s), 0 <= r < s < size, in lexicographic order."""
    total = size * (size - 1) // 2
    rem = total - k  # in 1..total
    w = (1 + math.isqrt(8 * rem)) // 2
    while (w - 1) * (w - 2) // 2 >= rem:
        w -= 1
    while w * (w - 1) // 2 < rem:
        w += 1
    r = size - w
    s = r + 1 + (k - (total - w * (w - 1) // 2))
    return r, s


def _sample_subset(rng: np.random.Generator, capacity: int, m: int) -> List[int]:
    """Uniform m-subset of range(capacity) by Floyd's algorithm, O(m) memory."""
    if m == 0:
        return []
    chosen = set()
    # t_j uniform on [0, j] for j = capacity-m .. capacity-1, drawn in one call
    ts = rng.integers(0, np.arange(capacity - m + 1, capacity + 1))
    for j, t in zip(range(capacity - m, capacity), ts):
        t = int(t)
        chosen.add(t if t not in chosen else j)
    return sorted(chosen)


class ConditionalSampler:
    """Prepared sampler for one ConditionSpec; reuse it across many draws."""

    def __init__(self, spec: ConditionSpec):
        self.spec = spec
        self.types, self.blocks = _analyze(spec)  # raises if inadmissible

    def sample_edges(self, rng: np.random.Generator) -> List[Edge]:
        """One draw, as a bare edge list (cheap path for tight loops)."""
        edges: List[Edge] = []
        for block in self.blocks:
            for idx in _sample_subset(rng, block.capacity, block.edge_count):
                edges.append(block.pair_at(idx))
        return edges

    def sample(self, rng: np.random.Generator) -> TypedGraph:
        return TypedGraph(self.types, self.sample_edges(rng))


def sample_conditional_graph(spec: ConditionSpec, rng: np.random.Generator) -> TypedGraph:
    """One exact-uniform draw from the graphs realizing ``spec``.

    The empirical type and link measures of the result equal the spec's pair
    exactly (always, not just in expectation).
    """
    return ConditionalSampler(spec).sample(rng)


def sample_erdos_renyi(n: int, m: int, rng: np.random.Generator,
                       label: str = "a") -> TypedGraph:
    """A uniformly random graph with n nodes and exactly m edges, single type."""
    capacity = n * (n - 1) // 2
    if not 0 <= m <= capacity:
        raise ValueError(f"m = {m} out of range 0..{capacity}")
    edges = []
    for idx in _sample_subset(rng, capacity, m):
        r, s = _unrank_pair(idx, n)
        edges.append((r + 1, s + 1))
    return TypedGraph((label,) * n, edges)


# ---------------------------------------------------------------------------
# Batched degree sampling for Monte Carlo studies
# ---------------------------------------------------------------------------

def _unrank_pairs_np(idx: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized pair unranking over C(n, 2), 0-based nodes."""
    total = n * (n - 1) // 2
    rem = total - idx
    w = np.floor((1.0 + np.sqrt(8.0 * rem)) / 2.0).astype(np.int64)
    w = np.where((w - 1) * (w - 2) // 2 >= rem, w - 1, w)
    w = np.where(w * (w - 1) // 2 < rem, w + 1, w)
    u = n - w
    v = u + 1 + (idx - (total - w * (w - 1) // 2))
    return u, v


def iter_er_degree_histograms(n: int, m: int, count: int, rng: np.random.Generator,
                              batch_size: int = 16384) -> Iterator[np.ndarray]:
    """Degree histograms of ``count`` independent G(n, m) draws, in batches.

    Yields arrays of shape (batch, n): row i holds the number of nodes of each
    degree 0..n-1 in the i-th sampled graph.  Each graph is an exact-uniform
    m-subset of the pair space: batches draw i.i.d. pair indices and redraw
    any row containing a duplicate, which conditions on distinctness.  When
    the collision rate would make rejection wasteful the loop falls back to
    per-row Floyd sampling.

    The generator state fully determines the output, so a fixed (seed,
    batch_size) is reproducible; batch_size is part of the stream layout.
    """
    capacity = n * (n - 1) // 2
    if not 0 <= m <= capacity:
        raise ValueError(f"m = {m} out of range 0..{capacity}")
    # rejection is efficient while P(all distinct) ~ exp(-m^2 / 2C) is not tiny
    use_rejection = m <= 1 or m * (m - 1) <= 8 * capacity
    done = 0
    while done < count:
        b = min(batch_size, count - done)
        if m == 0:
            hist = np.zeros((b, n), dtype=np.int64)
            hist[:, 0] = n
            yield hist
            done += b
            continue
        if use_rejection:
            idx = rng.integers(0, capacity, size=(b, m))
            if m > 1:
                bad = _rows_with_duplicates(idx)
                while bad.size:
                    idx[bad] = rng.integers(0, capacity, size=(bad.size, m))
                    bad_local = _rows_with_duplicates(idx[bad])
                    bad = bad[bad_local]
        else:
            idx = np.empty((b, m), dtype=np.int64)
            for i in range(b):
                idx[i] = _sample_subset(rng, capacity, m)
        u, v = _unrank_pairs_np(idx, n)
        offsets = (np.arange(b, dtype=np.int64) * n)[:, None]
        flat = np.bincount((u + offsets).ravel(), minlength=b * n)
        flat += np.bincount((v + offsets).ravel(), minlength=b * n)
        degrees = flat.reshape(b, n)
        hist = np.zeros((b, n), dtype=np.int64)
        rows = np.repeat(np.arange(b), n)
        np.add.at(hist, (rows, degrees.ravel()), 1)
        yield hist
        done += b


def _rows_with_duplicates(idx: np.ndarray) -> np.ndarray:
    s = np.sort(idx, axis=1)
    return np.flatnonzero(np.any(np.diff(s, axis=1) == 0, axis=1))


# ---------------------------------------------------------------------------
# Named spec families used by experiments and tests
# ---------------------------------------------------------------------------

def binary_cross_spec(n: int) -> ConditionSpec:
    """Two equal type groups joined by n/2 cross links and no within-type
    links (n even, so that group size and link count are integral)."""
    if n % 2 != 0:
        raise ValueError("binary cross family needs even n")
    half = Fraction(1, 2)
    eta = ProbMeasure({"a": half, "b": half})
    pi = FiniteMeasure({("a", "b"): half, ("b", "a"): half})
    return ConditionSpec(n, eta, pi)
