"""Relative entropy, the product-Poisson reference law, and rate functions.

Given a type law ``eta`` (positive on every type) and a symmetric link law
``pi``, the reference law on locality atoms is

    q(a, e) = eta(a) * prod_b exp(-r_ab) * r_ab^e(b) / e(b)!,
    r_ab = pi(a, b) / eta(a),

i.e. type ``a`` with probability ``eta(a)`` and then independent Poisson
neighbor counts, one per type ``b``.  Its support is countably infinite, so it
is exposed as a pointwise evaluator (:class:`ReferenceLaw`) and never
materialized; consumers either evaluate it on the finite support of some
measure or sum it over a truncation ball ``{e : total(e) <= K}`` whose missing
mass is the Poisson tail of the row sums.

The rate functions are relative-entropy functionals (natural log; all rates
are per-node exponents in base e):

* ``typed_rate(eta, pi, p)``  = H(p || q) if (pi, p) is sub-consistent and the
  type marginal of p equals eta, else +infinity;
* ``degree_rate(c, p)``       = H(p || Poisson(c)) if mean(p) = c, else
  +infinity -- the single-type reduction of ``typed_rate``.

Feasibility tolerances are explicit: empirical measures from graphs match
their constraints exactly (rational arithmetic, default tol 0) while
analytically constructed measures carry float error (default tol 1e-9).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Iterator, Tuple, Union

from .measures import (
    CountingMeasure,
    FiniteMeasure,
    Key,
    ProbMeasure,
    Scalar,
    TypeAlphabet,
    is_sub_consistent,
    total_variation,
    type_marginal,
)

_INF = float("inf")

#: Default feasibility tolerance for float-valued inputs.
FLOAT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Poisson helpers
# ---------------------------------------------------------------------------

def poisson_pmf(mean: float, k: int) -> float:
    """exp(-mean) * mean^k / k!  (mean >= 0; the mean-0 law is the point mass at 0)."""
    if mean < 0:
        raise ValueError("mean must be >= 0")
    if k < 0:
        return 0.0
    if mean == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(mean) - mean - math.lgamma(k + 1))


def poisson_cdf(mean: float, k: int) -> float:
    """P(X <= k) for X ~ Poisson(mean); plain positive-term summation."""
    return math.fsum(poisson_pmf(mean, j) for j in range(0, k + 1))


def poisson_tail(mean: float, k: int) -> float:
    """P(X > k) for X ~ Poisson(mean)."""
    return max(0.0, 1.0 - poisson_cdf(mean, k))


def truncated_poisson(mean: float, support_cap: int) -> ProbMeasure:
    """Poisson(mean) restricted to {0..support_cap} and renormalized."""
    if support_cap < 0:
        raise ValueError("support_cap must be >= 0")
    w = {k: poisson_pmf(mean, k) for k in range(support_cap + 1)}
    mass = math.fsum(w.values())
    return ProbMeasure({k: v / mass for k, v in w.items() if v > 0})


# ---------------------------------------------------------------------------
# The product-Poisson reference law
# ---------------------------------------------------------------------------

class ReferenceLaw:
    """Pointwise evaluator for the product-Poisson law q(a, e) above.

    ``type_law`` must be positive on its whole support (which defines the
    alphabet) and ``link_law`` must be symmetric with keys inside the
    alphabet's pair space.  A pair rate pi(a, b) = 0 simply forbids
    (a, b)-links: q(a, e) = 0 whenever e(b) > 0 there.
    """

    __slots__ = ("type_law", "link_law", "alphabet", "_log_eta", "_rates", "_row_sums")

    def __init__(self, type_law: ProbMeasure, link_law: FiniteMeasure):
        if type_law.kind() != "type":
            raise ValueError("type_law must be a measure over type labels")
        if link_law.kind() not in (None, "pair"):
            raise ValueError("link_law must be a measure over type pairs")
        alphabet = TypeAlphabet(type_law.keys())
        for a in alphabet:
            if type_law(a) <= 0:
                raise ValueError(f"type_law({a!r}) must be > 0")
        sym_tol = 0 if link_law.is_exact() else 1e-12
        for (a, b) in link_law.keys():
            if a not in alphabet or b not in alphabet:
                raise ValueError(f"link_law key ({a!r}, {b!r}) outside the alphabet")
            if abs(link_law((a, b)) - link_law((b, a))) > sym_tol:
                raise ValueError(f"link_law is not symmetric at ({a!r}, {b!r})")
        self.type_law = type_law
        self.link_law = link_law
        self.alphabet = alphabet
        self._log_eta = {a: math.log(type_law(a)) for a in alphabet}
        self._rates = {
            a: {b: float(link_law((a, b))) / float(type_law(a)) for b in alphabet}
            for a in alphabet
        }
        self._row_sums = {a: math.fsum(self._rates[a].values()) for a in alphabet}

    # -- pointwise evaluation ---------------------------------------------------
    def log_pmf(self, a: str, e: CountingMeasure) -> float:
        if a not in self.alphabet:
            return -_INF
        rates = self._rates[a]
        total = self._log_eta[a] - self._row_sums[a]
        for b, k in e:
            r = rates.get(b, 0.0)
            if r == 0.0:
                return -_INF  # forbidden link type carried by e
            total += k * math.log(r) - math.lgamma(k + 1)
        return total

    def pmf(self, a: str, e: CountingMeasure) -> float:
        lp = self.log_pmf(a, e)
        return math.exp(lp) if lp > -_INF else 0.0

    def __call__(self, key: Key) -> float:
        a, e = key  # type: ignore[misc]
        return self.pmf(a, e)

    # -- truncation to a finite neighbor-count ball ------------------------------
    def row_count_mean(self, a: str) -> float:
        """Mean total neighbor count of a type-``a`` row (a Poisson mean)."""
        return self._row_sums[a]

    def truncation_mass(self, max_total: int) -> float:
        """Mass of {(a, e) : total(e) <= max_total}: the total neighbor count of
        row ``a`` is Poisson(row_count_mean(a)), so this is
        ``sum_a eta(a) * P(Poisson(row_sum_a) <= max_total)``."""
        return math.fsum(
            float(self.type_law(a)) * poisson_cdf(self._row_sums[a], max_total)
            for a in self.alphabet
        )

    def iter_atoms(self, max_total: int) -> Iterator[Tuple[Tuple[str, CountingMeasure], float]]:
        """Yield every atom ``((a, e), q(a, e))`` with ``total(e) <= max_total``."""
        symbols = self.alphabet.symbols
        for a in symbols:
            for vec in _count_vectors(len(symbols), max_total):
                e = CountingMeasure(tuple(zip(symbols, vec)))
                yield (a, e), self.pmf(a, e)

    def truncated(self, max_total: int) -> ProbMeasure:
        """The law restricted to ``total(e) <= max_total`` and renormalized."""
        atoms = {key: mass for key, mass in self.iter_atoms(max_total) if mass > 0}
        total = math.fsum(atoms.values())
        return ProbMeasure({key: mass / total for key, mass in atoms.items()})


def _count_vectors(dims: int, max_total: int) -> Iterator[Tuple[int, ...]]:
    if dims == 0:
        yield ()
        return
    for k in range(max_total + 1):
        for rest in _count_vectors(dims - 1, max_total - k):
            yield (k,) + rest


def reference_pmf(type_law: ProbMeasure, link_law: FiniteMeasure,
                  a: str, e: CountingMeasure) -> float:
    """One-shot q(a, e); build a :class:`ReferenceLaw` for repeated evaluation."""
    return ReferenceLaw(type_law, link_law).pmf(a, e)


# ---------------------------------------------------------------------------
# Relative entropy and rate results
# ---------------------------------------------------------------------------

def relative_entropy(p: ProbMeasure, reference: Callable[[Key], Scalar]) -> float:
    """H(p || q) = sum over the support of p of p(x) * log(p(x) / q(x)).

    ``reference`` is any pointwise evaluator (a measure, a
    :class:`ReferenceLaw`, or a plain callable).  Returns +infinity on an
    absolute-continuity failure, i.e. q(x) = 0 < p(x).
    """
    terms = []
    for key, w in p.items():
        q = float(reference(key))
        if q <= 0.0:
            return _INF
        pw = float(w)
        terms.append(pw * (math.log(pw) - math.log(q)))
    total = math.fsum(terms)
    return 0.0 if -1e-12 < total < 0.0 else total


@dataclass(frozen=True)
class RateResult:
    """A rate-function value with feasibility diagnostics.

    ``value`` is +infinity whenever ``feasible`` is False, and may also be
    +infinity for a feasible measure that is not absolutely continuous with
    respect to the reference.  ``tv_marginal`` is the marginal mismatch (total
    variation against the target type law, or |mean - c| for degree laws) and
    ``subconsistency_violation`` the largest positive link-marginal excess
    (0.0 when none, or when the check does not apply).
    """

    value: float
    feasible: bool
    tv_marginal: float
    subconsistency_violation: float

    def to_json_dict(self) -> Dict[str, Union[str, float, bool]]:
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "feasible": self.feasible,
            "tv_marginal": self.tv_marginal,
            "subconsistency_violation": self.subconsistency_violation,
        }


def _default_tol(*inputs) -> Scalar:
    for x in inputs:
        exact = x.is_exact() if isinstance(x, FiniteMeasure) else isinstance(x, Rational)
        if not exact:
            return FLOAT_TOL
    return 0


def typed_rate(type_law: ProbMeasure, link_law: FiniteMeasure, p: ProbMeasure,
               tol: Union[Scalar, None] = None) -> RateResult:
    """Rate of a locality measure ``p`` under the constraint pair
    ``(type_law, link_law)``:

        H(p || q)   if (link_law, p) is sub-consistent (within tol) and the
                    type marginal of p matches type_law (TV within tol),
        +infinity   otherwise.

    ``tol`` defaults to 0 when all inputs are exact rationals, 1e-9 otherwise.
    """
    reference = ReferenceLaw(type_law, link_law)  # validates type_law > 0
    if tol is None:
        tol = _default_tol(type_law, link_law, p)
    sub = is_sub_consistent(link_law, p, tol)
    tv = total_variation(type_marginal(p), type_law)
    feasible = bool(sub) and tv <= tol
    value = relative_entropy(p, reference) if feasible else _INF
    violation = max(0.0, float(sub.max_residual)) if sub.max_residual is not None else 0.0
    return RateResult(value, feasible, float(tv), violation)


def degree_rate(c: Scalar, p: ProbMeasure, tol: Union[Scalar, None] = None) -> RateResult:
    """Rate of a degree law ``p`` at mean-degree parameter ``c``:

        H(p || Poisson(c))   if mean(p) = c (within tol),
        +infinity            otherwise.
    """
    if c <= 0:
        raise ValueError("c must be > 0")
    if p.kind() not in (None, "degree"):
        raise ValueError("p must be a measure over non-negative integers")
    for k in p.keys():
        if k < 0:
            raise ValueError(f"negative degree {k} in support")
    if tol is None:
        tol = _default_tol(p, c)
    mean = sum(k * w for k, w in p.items())
    mismatch = abs(mean - c)
    feasible = mismatch <= tol
    value = relative_entropy(p, lambda k: poisson_pmf(float(c), k)) if feasible else _INF
    return RateResult(value, feasible, float(mismatch), 0.0)


def embed_degree_law(p: ProbMeasure, label: str = "a") -> ProbMeasure:
    """Lift a degree law to the single-type locality space: k -> (label, {label: k}).

    Under this embedding, ``degree_rate(mean(p), p)`` and ``typed_rate`` with
    the point type law at ``label`` and link mass mean(p) at (label, label)
    agree.
    """
    return ProbMeasure(
        {(label, CountingMeasure({label: k} if k else {})): w for k, w in p.items()}
    )
