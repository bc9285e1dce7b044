"""Experiment runner: sample, measure, rate, enumerate, optimize, and run
decay-rate / exponent-gap studies from the command line.

Subcommands (``graphld <cmd> --config FILE [--seed U64] [--out PATH]
[--format csv|json]``):

* ``sample``    -- draw a conditional or fixed-edge-count graph, write the
                   ``typedgraph v1`` text format;
* ``measure``   -- empirical type / link / locality / degree measures of a
                   graph file, as JSON;
* ``rate``      -- evaluate a rate function on measures given in the config;
* ``enumerate`` -- exact support census of a spec (guarded);
* ``optimize``  -- entropy projection / predicted decay rate for an event;
* ``decay``     -- Monte Carlo decay-rate study over a list of graph sizes;
* ``lldp``      -- exact finite-size exponent gaps along a spec family.

Exit codes: 0 on success, 1 on parse errors, 2 on guard/feasibility errors.

Determinism contract: a stochastic run is sharded into fixed-size blocks of
samples; shard ``i`` for graph size ``n`` consumes the dedicated substream
``numpy.random.default_rng([seed, n, i])``.  Results are reduced by exact
hit-count addition, so identical config + seed gives byte-identical output
regardless of how shards would be distributed over workers.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .graphs import (
    TypedGraph,
    degree_distribution,
    empirical_link_measure,
    empirical_locality_measure,
    empirical_type_measure,
)
from .measures import CountingMeasure, FiniteMeasure, ProbMeasure
from .oracle import EnumerationGuardError, lldp_exponent_gap, type_class_counts
from .optimizer import (
    ConstraintSet,
    InfeasibleConstraintsError,
    Optimum,
    minimize_relative_entropy,
    rate_infimum_for_event,
)
from .rate import degree_rate, typed_rate
from .sampler import (
    ConditionSpec,
    InadmissibleSpecError,
    binary_cross_spec,
    iter_er_degree_histograms,
    sample_conditional_graph,
    sample_erdos_renyi,
)

#: Fixed Monte Carlo shard size (part of the determinism contract).
SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of a decay-rate study.

    ``estimate`` is -(1/n) log(hits/samples) and ``stderr`` its delta-method
    standard error sqrt((1 - P) / hits) / n; both are None when the event was
    never hit (absence is reported rather than an infinite estimate, which
    would corrupt slope fits).
    """

    n: int
    event: str
    estimate: Optional[float]
    stderr: Optional[float]
    predicted: float
    samples: int
    hits: int

    def to_json_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "event": self.event,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "predicted": self.predicted,
            "samples": self.samples,
            "hits": self.hits,
        }


DECAY_CSV_HEADER = "n,event,estimate,stderr,predicted,samples,hits"


def decay_records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    """Fixed-column CSV (header always emitted); event ids are comma-free."""
    lines = [DECAY_CSV_HEADER]
    for rec in records:
        est = "" if rec.estimate is None else repr(rec.estimate)
        err = "" if rec.stderr is None else repr(rec.stderr)
        lines.append(f"{rec.n},{rec.event},{est},{err},{rec.predicted!r},"
                     f"{rec.samples},{rec.hits}")
    return "\n".join(lines) + "\n"


def _shards(total: int) -> List[int]:
    sizes = [SHARD_SIZE] * (total // SHARD_SIZE)
    if total % SHARD_SIZE:
        sizes.append(total % SHARD_SIZE)
    return sizes


def _count_event_hits(n: int, m: int, samples: int, event: ConstraintSet,
                      seed: int) -> int:
    """Hits of a degree-law event over ``samples`` G(n, m) draws, sharded."""
    feq, req = event.eq_arrays()
    fge, rge = event.ge_arrays()
    width = min(event.support_cap + 1, n)
    hits = 0
    for shard_index, count in enumerate(_shards(samples)):
        rng = np.random.default_rng([seed, n, shard_index])
        for hist in iter_er_degree_histograms(n, m, count, rng):
            p = hist[:, :width] / float(n)
            if p.shape[1] < event.support_cap + 1:  # degree law shorter than K
                pad = event.support_cap + 1 - p.shape[1]
                p = np.hstack([p, np.zeros((p.shape[0], pad))])
            ok = np.ones(p.shape[0], dtype=bool)
            if feq.shape[0]:
                ok &= np.all(np.abs(p @ feq.T - req) <= 1e-9, axis=1)
            if fge.shape[0]:
                ok &= np.all(p @ fge.T >= rge - 1e-12, axis=1)
            hits += int(np.count_nonzero(ok))
    return hits


def run_decay_study(c: float, n_list: Sequence[int], samples: int,
                    event: ConstraintSet, seed: int,
                    support_cap: Optional[int] = None) -> List[ExperimentRecord]:
    """Estimate -(1/n) log P{degree law in event} for G(n, nc/2) across
    ``n_list`` and pair each estimate with the optimizer's predicted rate.

    Sizes where n*c/2 is not an integer are skipped with a warning.
    Deterministic given ``seed`` (see the module docstring).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if list(n_list) != sorted(set(n_list)):
        raise ValueError("n_list must be strictly increasing")
    predicted = rate_infimum_for_event(c, event, support_cap).value
    event_id = event.describe()
    records = []
    for n in n_list:
        m_exact = n * c / 2
        m = round(m_exact)
        if abs(m_exact - m) > 1e-9:
            warnings.warn(f"skipping n={n}: n*c/2 = {m_exact!r} is not an integer")
            continue
        hits = _count_event_hits(n, m, samples, event, seed)
        if hits:
            p_hat = hits / samples
            estimate = -math.log(p_hat) / n
            stderr = math.sqrt((1.0 - p_hat) / hits) / n
        else:
            estimate = None
            stderr = None
        records.append(ExperimentRecord(n, event_id, estimate, stderr,
                                        predicted, samples, hits))
    return records


def fit_decay_slope(records: Sequence[ExperimentRecord]) -> float:
    """Least-squares slope of -log(P-hat) against n over the hit-bearing
    records; this is the Monte Carlo estimate of the decay rate."""
    pts = [(r.n, r.estimate * r.n) for r in records if r.estimate is not None]
    if len(pts) < 2:
        raise ValueError("need at least two records with hits to fit a slope")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    return float(np.polyfit(xs, ys, 1)[0])


def matching_measure() -> ProbMeasure:
    """The locality measure of a perfect cross matching in the binary-cross
    family: every node has exactly one neighbor of the opposite type."""
    half = Fraction(1, 2)
    return ProbMeasure({
        ("a", CountingMeasure({"b": 1})): half,
        ("b", CountingMeasure({"a": 1})): half,
    })


def run_lldp_study(specs: Sequence[ConditionSpec],
                   targets: Union[ProbMeasure, Sequence[ProbMeasure]],
                   ) -> List[Tuple[int, float]]:
    """Exact exponent gaps along a spec family; see
    :func:`graphld.oracle.lldp_exponent_gap`."""
    return lldp_exponent_gap(specs, targets)


def lldp_rows_to_csv(rows: Sequence[Tuple[int, float]]) -> str:
    return "n,gap\n" + "".join(f"{n},{gap!r}\n" for n, gap in rows)


def run_measure(graph: TypedGraph) -> Dict[str, object]:
    """All four empirical distributions of a graph, as JSON-ready dicts."""
    return {
        "n": graph.n,
        "type": empirical_type_measure(graph).to_json_dict(),
        "link": empirical_link_measure(graph).to_json_dict(),
        "locality": empirical_locality_measure(graph).to_json_dict(),
        "degree": degree_distribution(graph).to_json_dict(),
    }


def run_rate(config: Dict[str, object]) -> Dict[str, object]:
    """Evaluate a rate function from a config object.

    Degree form: {"c": num, "p": {degree: weight}, "tol": num?}.
    Typed form:  {"eta": {...}, "pi": {...}, "p": {locality-key: weight},
                  "tol": num?}.
    """
    tol = config.get("tol")
    if "c" in config:
        p = ProbMeasure.from_json_dict(config["p"], "degree")
        result = degree_rate(float(config["c"]), p, tol)
    else:
        eta = ProbMeasure.from_json_dict(config["eta"], "type")
        pi = FiniteMeasure.from_json_dict(config["pi"], "pair")
        p = ProbMeasure.from_json_dict(config["p"], "locality")
        result = typed_rate(eta, pi, p, tol)
    return result.to_json_dict()


def run_optimize(config: Dict[str, object]) -> Dict[str, object]:
    """Entropy projection from a config object.

    Event form:     {"c": num, "constraints": {...}, "K": int?} -- predicted
                    decay rate (mean-c equality appended).
    Reference form: {"q": {degree: weight}, "constraints": {...}} -- plain
                    projection onto the constraints.
    """
    cons = ConstraintSet.from_json_dict(config["constraints"])
    if "c" in config:
        cap = config.get("K")
        optimum = rate_infimum_for_event(float(config["c"]), cons,
                                         None if cap is None else int(cap))
    else:
        q_obj = {int(k): float(v) for k, v in config["q"].items()}
        q = [q_obj.get(k, 0.0) for k in range(cons.support_cap + 1)]
        optimum = minimize_relative_entropy(q, cons)
    return optimum.to_json_dict()


# ---------------------------------------------------------------------------
# Command-line wiring
# ---------------------------------------------------------------------------

def _load_config(path: Optional[str]) -> Dict[str, object]:
    if path is None:
        raise ValueError("this command requires --config FILE")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json_text(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _require_seed(seed: Optional[int]) -> int:
    if seed is None:
        raise ValueError("stochastic runs require --seed")
    return seed


def _specs_from_config(config: Dict[str, object]) -> Tuple[List[ConditionSpec], ProbMeasure]:
    if config.get("family") == "binary-cross":
        specs = [binary_cross_spec(int(n)) for n in config["n_list"]]
        return specs, matching_measure()
    specs = [ConditionSpec.from_json_dict(obj) for obj in config["specs"]]
    target = ProbMeasure.from_json_dict(config["target"], "locality")
    return specs, target


def _cmd_sample(config, seed, out, fmt) -> str:
    seed = _require_seed(seed)
    rng = np.random.default_rng(seed)
    if "er" in config:
        er = config["er"]
        graph = sample_erdos_renyi(int(er["n"]), int(er["m"]), rng)
    else:
        spec = ConditionSpec.from_json_dict(config["spec"])
        graph = sample_conditional_graph(spec, rng)
    return graph.to_text()


def _cmd_measure(config, seed, out, fmt) -> str:
    with open(config["graph"], "r", encoding="utf-8") as fh:
        graph = TypedGraph.from_text(fh.read())
    return _json_text(run_measure(graph))


def _cmd_rate(config, seed, out, fmt) -> str:
    return _json_text(run_rate(config))


def _cmd_enumerate(config, seed, out, fmt) -> str:
    spec = ConditionSpec.from_json_dict(config["spec"])
    report = type_class_counts(spec)
    payload = report.to_json_dict()
    target = config.get("target_class")
    if target is not None:
        prob = report.class_probability(str(target))
        payload["event_probability"] = f"{prob.numerator}/{prob.denominator}"
    return _json_text(payload)


def _cmd_optimize(config, seed, out, fmt) -> str:
    return _json_text(run_optimize(config))


def _cmd_decay(config, seed, out, fmt) -> str:
    seed = _require_seed(seed)
    records = run_decay_study(
        c=float(config["c"]),
        n_list=[int(n) for n in config["n_list"]],
        samples=int(config["samples"]),
        event=ConstraintSet.from_json_dict(config["event"]),
        seed=seed,
        support_cap=int(config["K"]) if "K" in config else None,
    )
    if fmt == "json":
        return _json_text([r.to_json_dict() for r in records])
    return decay_records_to_csv(records)


def _cmd_lldp(config, seed, out, fmt) -> str:
    specs, target = _specs_from_config(config)
    rows = run_lldp_study(specs, target)
    if fmt == "json":
        return _json_text([{"n": n, "gap": gap} for n, gap in rows])
    return lldp_rows_to_csv(rows)


_COMMANDS = {
    "sample": _cmd_sample,
    "measure": _cmd_measure,
    "rate": _cmd_rate,
    "enumerate": _cmd_enumerate,
    "optimize": _cmd_optimize,
    "decay": _cmd_decay,
    "lldp": _cmd_lldp,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphld",
        description="Typed random graphs: sampling, empirical measures, "
                    "relative-entropy rates, exact enumeration, and "
                    "decay-rate experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="JSON config file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="64-bit RNG seed (required for stochastic runs)")
        cmd.add_argument("--out", default=None, help="output path (default stdout)")
        cmd.add_argument("--format", choices=("csv", "json"), default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or ("csv" if args.command in ("decay", "lldp") else "json")
    if fmt == "csv" and args.command not in ("decay", "lldp"):
        print(f"error: {args.command} only supports --format json", file=sys.stderr)
        return 1
    try:
        config = _load_config(args.config)
        text = _COMMANDS[args.command](config, args.seed, args.out, fmt)
        _emit(text, args.out)
        return 0
    except (EnumerationGuardError, InadmissibleSpecError, InfeasibleConstraintsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
