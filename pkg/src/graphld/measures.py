"""Finite measures over a type alphabet and the marginal machinery on them.

The building blocks are:

* ``TypeAlphabet`` -- the finite, lexicographically ordered set of type labels.
* ``CountingMeasure`` -- an integer multiset of types (a node's neighbor-type
  counts), hashable and canonically ordered.
* ``FiniteMeasure`` / ``ProbMeasure`` -- non-negative weight functions over a
  finite key set; keys are type labels, ordered type pairs, locality atoms
  ``(type, CountingMeasure)``, or non-negative integers (degree laws).

On top of these sit the marginal maps: ``type_marginal`` collapses a locality
measure to its type law, ``link_marginal`` to its pair law

    link_marginal(p)(a, b) = sum_e p(a, e) * e(b),

and ``marginal_pair`` returns both at once.  ``is_sub_consistent`` /
``is_consistent`` compare a pair law against the link marginal of a locality
measure, and ``total_variation`` is the test metric used throughout.

All values are immutable after construction and every function here is pure,
so everything in this module is safe to share across threads.

Weights may be exact rationals (``int`` / ``Fraction``) or floats.  Empirical
measures extracted from graphs are exact; exactness is preserved by every
operation in this module and only dropped at serialization boundaries.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Iterable, Iterator, Mapping, Tuple, Union

Scalar = Union[int, float, Fraction]

#: Absolute tolerance on the total mass of a probability measure.
PROB_MASS_TOL = 1e-12

_LABEL_RE = re.compile(r"[A-Za-z0-9_.-]+\Z")


def _check_label(label: str) -> str:
    if not isinstance(label, str) or not _LABEL_RE.match(label):
        raise ValueError(f"invalid type label {label!r} (allowed: [A-Za-z0-9_.-]+)")
    return label


class TypeAlphabet:
    """An ordered finite set of type labels.

    Labels are stored in lexicographic order; that order is the canonical one
    used by every serialization and iteration in the package.
    """

    __slots__ = ("_symbols", "_index")

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(sorted(_check_label(s) for s in symbols))
        if not syms:
            raise ValueError("alphabet must contain at least one label")
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet labels must be unique")
        self._symbols = syms
        self._index = {s: i for i, s in enumerate(syms)}

    @property
    def symbols(self) -> Tuple[str, ...]:
        return self._symbols

    def index(self, label: str) -> int:
        return self._index[label]

    def __len__(self) -> int:
        return len(self._symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self._symbols)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TypeAlphabet) and self._symbols == other._symbols

    def __hash__(self) -> int:
        return hash(self._symbols)

    def __repr__(self) -> str:
        return f"TypeAlphabet({list(self._symbols)!r})"


@dataclass(frozen=True)
class CountingMeasure:
    """An integer multiset of types: ``counts[b]`` copies of type ``b``.

    Stored canonically as a sorted tuple of ``(label, count)`` pairs with all
    zero counts dropped, so equal multisets compare and hash identically.
    """

    counts: Tuple[Tuple[str, int], ...]

    def __init__(self, counts: Union[Mapping[str, int], Iterable[Tuple[str, int]]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        acc: Dict[str, int] = {}
        for label, k in items:
            _check_label(label)
            if not isinstance(k, int) or k < 0:
                raise ValueError(f"count for {label!r} must be a non-negative int, got {k!r}")
            if k:
                acc[label] = acc.get(label, 0) + k
        object.__setattr__(self, "counts", tuple(sorted(acc.items())))

    def __call__(self, label: str) -> int:
        for b, k in self.counts:
            if b == label:
                return k
        return 0

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.counts)

    def total(self) -> int:
        """Number of elements counted with multiplicity."""
        return sum(k for _, k in self.counts)

    def encode(self) -> str:
        """Canonical text form, e.g. ``"a:2,b:1"`` (empty multiset -> ``""``)."""
        return ",".join(f"{b}:{k}" for b, k in self.counts)

    @classmethod
    def decode(cls, text: str) -> "CountingMeasure":
        if not text:
            return cls()
        pairs = []
        for part in text.split(","):
            label, _, count = part.partition(":")
            try:
                pairs.append((label, int(count)))
            except ValueError:
                raise ValueError(f"malformed counting-measure entry {part!r}") from None
        return cls(pairs)

    def __repr__(self) -> str:
        return f"CountingMeasure({dict(self.counts)!r})"


# Measure keys: a type label, an ordered pair of labels, a locality atom
# (label, CountingMeasure), or a non-negative integer (degree laws).
Key = Union[str, int, Tuple[str, str], Tuple[str, CountingMeasure]]


def key_kind(key: Key) -> str:
    """Classify a measure key: 'type', 'pair', 'locality' or 'degree'."""
    if isinstance(key, str):
        return "type"
    if isinstance(key, int):
        return "degree"
    if isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], str):
        if isinstance(key[1], str):
            return "pair"
        if isinstance(key[1], CountingMeasure):
            return "locality"
    raise TypeError(f"unsupported measure key {key!r}")


def encode_key(key: Key) -> str:
    kind = key_kind(key)
    if kind == "type":
        return key  # type: ignore[return-value]
    if kind == "degree":
        return str(key)
    if kind == "pair":
        return f"{key[0]},{key[1]}"
    return f"{key[0]}|{key[1].encode()}"  # type: ignore[union-attr]


def decode_key(text: str, kind: str) -> Key:
    if kind == "type":
        return _check_label(text)
    if kind == "degree":
        return int(text)
    if kind == "pair":
        a, _, b = text.partition(",")
        return (_check_label(a), _check_label(b))
    if kind == "locality":
        a, sep, rest = text.partition("|")
        if not sep:
            raise ValueError(f"locality key {text!r} missing '|' separator")
        return (_check_label(a), CountingMeasure.decode(rest))
    raise ValueError(f"unknown key kind {kind!r}")


def _sort_key(key: Key):
    kind = key_kind(key)
    if kind == "degree":
        return (key,)
    if kind == "locality":
        return (key[0], key[1].encode())
    if kind == "pair":
        return key
    return (key,)


def _format_weight(w: Scalar) -> str:
    return format(float(w), ".17g")


class FiniteMeasure:
    """A non-negative weight function on a finite key set (mass unconstrained).

    Zero-weight keys are dropped at construction, so the support is exactly
    the stored key set and equal measures compare equal.  Instances are
    immutable.
    """

    _is_probability = False

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping[Key, Scalar]):
        w: Dict[Key, Scalar] = {}
        kind = None
        for key, value in weights.items():
            k = key_kind(key)
            if kind is None:
                kind = k
            elif k != kind:
                raise TypeError(f"mixed key kinds in one measure: {kind} and {k}")
            if isinstance(value, float) and value != value:
                raise ValueError(f"NaN weight at key {key!r}")
            if value < 0:
                raise ValueError(f"negative weight {value!r} at key {key!r}")
            if value != 0:
                w[key] = value
        self._w = w
        self._validate()

    def _validate(self) -> None:
        pass

    # -- mapping-style access -------------------------------------------------
    def __call__(self, key: Key) -> Scalar:
        return self._w.get(key, 0)

    def __contains__(self, key: Key) -> bool:
        return key in self._w

    def __len__(self) -> int:
        return len(self._w)

    def __iter__(self) -> Iterator[Key]:
        return iter(self.keys())

    def keys(self) -> Tuple[Key, ...]:
        """Support keys in canonical order."""
        return tuple(sorted(self._w, key=_sort_key))

    def items(self) -> Tuple[Tuple[Key, Scalar], ...]:
        return tuple((k, self._w[k]) for k in self.keys())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteMeasure) and self._w == other._w

    def __repr__(self) -> str:
        name = type(self).__name__
        body = ", ".join(f"{encode_key(k)}: {w}" for k, w in self.items())
        return f"{name}({{{body}}})"

    # -- totals ---------------------------------------------------------------
    def total_mass(self) -> Scalar:
        return sum(self._w.values())

    def kind(self) -> Union[str, None]:
        """Key kind of the support ('type', 'pair', 'locality', 'degree') or None if empty."""
        for key in self._w:
            return key_kind(key)
        return None

    def is_exact(self) -> bool:
        """True if every weight is an exact rational (int or Fraction)."""
        return all(isinstance(v, Rational) for v in self._w.values())

    def normalized(self) -> "ProbMeasure":
        mass = self.total_mass()
        if mass <= 0:
            raise ValueError("cannot normalize a zero measure")
        return ProbMeasure({k: v / mass for k, v in self._w.items()})

    # -- serialization ----------------------------------------------------------
    def to_lines(self) -> str:
        """Line format: one ``key<TAB>weight`` pair per line, canonical key order,
        weights with 17 significant digits."""
        return "".join(f"{encode_key(k)}\t{_format_weight(w)}\n" for k, w in self.items())

    @classmethod
    def from_lines(cls, text: str, kind: str) -> "FiniteMeasure":
        w: Dict[Key, Scalar] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key_text, weight_text = line.split("\t")
                w[decode_key(key_text, kind)] = float(weight_text)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(w)

    def to_json_dict(self) -> Dict[str, float]:
        return {encode_key(k): float(w) for k, w in self.items()}

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Scalar], kind: str) -> "FiniteMeasure":
        return cls({decode_key(k, kind): v for k, v in obj.items()})

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


class ProbMeasure(FiniteMeasure):
    """A FiniteMeasure whose total mass is 1 (within ``PROB_MASS_TOL``)."""

    _is_probability = True

    __slots__ = ()

    def _validate(self) -> None:
        mass = self.total_mass()
        if abs(mass - 1) > PROB_MASS_TOL:
            raise ValueError(f"probability weights sum to {float(mass)!r}, not 1")


def dirac(key: Key) -> ProbMeasure:
    """The point mass at ``key``."""
    return ProbMeasure({key: 1})


# ---------------------------------------------------------------------------
# Marginal maps on locality measures
# ---------------------------------------------------------------------------

def type_marginal(p: ProbMeasure) -> ProbMeasure:
    """Collapse a locality measure to its type law: out(a) = sum_e p(a, e)."""
    out: Dict[Key, Scalar] = {}
    for (a, _e), w in p.items():
        out[a] = out.get(a, 0) + w
    return ProbMeasure(out)


def link_marginal(p: ProbMeasure) -> FiniteMeasure:
    """Pair law carried by a locality measure:

        out(a, b) = sum_e p(a, e) * e(b).

    Keys with value 0 are omitted.
    """
    out: Dict[Key, Scalar] = {}
    for (a, e), w in p.items():
        for b, k in e:
            key = (a, b)
            out[key] = out.get(key, 0) + w * k
    return FiniteMeasure(out)


def marginal_pair(p: ProbMeasure) -> Tuple[ProbMeasure, FiniteMeasure]:
    """Both marginals of a locality measure: ``(type_marginal, link_marginal)``."""
    return type_marginal(p), link_marginal(p)


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of a (sub-)consistency check.

    ``max_residual`` is the largest signed residual (positive means violated)
    and ``worst_key`` the pair key attaining it; both are None when there is
    nothing to compare.
    """

    ok: bool
    max_residual: Union[Scalar, None]
    worst_key: Union[Key, None]

    def __bool__(self) -> bool:
        return self.ok


def _link_residuals(pi: FiniteMeasure, p: ProbMeasure) -> Dict[Key, Scalar]:
    marg = link_marginal(p)
    keys = set(marg.keys()) | set(pi.keys())
    return {key: marg(key) - pi(key) for key in keys}


def is_sub_consistent(pi: FiniteMeasure, p: ProbMeasure, tol: Scalar = 0) -> ConsistencyReport:
    """Check that the link marginal of ``p`` is dominated by ``pi`` pointwise:

        link_marginal(p)(a, b) <= pi(a, b) + tol   for every (a, b).
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    residuals = _link_residuals(pi, p)
    if not residuals:
        return ConsistencyReport(True, None, None)
    worst = max(residuals, key=lambda k: (residuals[k], _sort_key(k)))
    return ConsistencyReport(residuals[worst] <= tol, residuals[worst], worst)


def is_consistent(pi: FiniteMeasure, p: ProbMeasure, tol: Scalar = 0) -> ConsistencyReport:
    """Like :func:`is_sub_consistent` but demanding pointwise equality:
    ``|link_marginal(p)(a, b) - pi(a, b)| <= tol`` for every (a, b)."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    residuals = {k: abs(v) for k, v in _link_residuals(pi, p).items()}
    if not residuals:
        return ConsistencyReport(True, None, None)
    worst = max(residuals, key=lambda k: (residuals[k], _sort_key(k)))
    return ConsistencyReport(residuals[worst] <= tol, residuals[worst], worst)


def total_variation(mu: FiniteMeasure, nu: FiniteMeasure) -> Scalar:
    """Total variation distance ``(1/2) * sum_k |mu(k) - nu(k)|`` over the
    union of supports.  Raises if the two measures live on different key
    spaces."""
    mk, nk = mu.kind(), nu.kind()
    if mk is not None and nk is not None and mk != nk:
        raise TypeError(f"key-space mismatch: {mk} vs {nk}")
    keys = set(mu.keys()) | set(nu.keys())
    total = sum(abs(mu(k) - nu(k)) for k in keys)
    return total / 2


def encode_measure(m: FiniteMeasure) -> str:
    """One-line canonical encoding, exact when the weights are exact.

    Used as the grouping key for type classes: two exact measures encode
    identically iff they are equal.
    """
    parts = []
    for key, w in m.items():
        if isinstance(w, Rational):
            frac = Fraction(w)
            text = str(frac.numerator) if frac.denominator == 1 else f"{frac.numerator}/{frac.denominator}"
        else:
            text = _format_weight(w)
        parts.append(f"{encode_key(key)}={text}")
    return "; ".join(parts)
