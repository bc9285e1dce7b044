"""Typed simple graphs and their empirical distributions.

A ``TypedGraph`` is a set of labelled nodes ``1..n``, each carrying a type
label, plus a simple undirected edge set.  From a graph we extract, in exact
rational arithmetic:

* the empirical type measure    -- fraction of nodes of each type;
* the empirical link measure    -- (1/n) x ordered count of adjacent type
  pairs (symmetric, total mass 2|E|/n);
* the empirical locality measure -- law of (node type, neighbor-type multiset);
* the degree distribution       -- law of node degree, mean exactly 2|E|/n.

Exact arithmetic matters: graphs with equal locality measures must land in the
same equivalence class bit-for-bit, which float weights cannot guarantee.
Graphs are immutable and the extraction functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from .measures import CountingMeasure, FiniteMeasure, ProbMeasure, _check_label

Edge = Tuple[int, int]


@dataclass(frozen=True)
class TypedGraph:
    """A simple undirected graph on nodes ``1..n`` with a type per node.

    ``types[i]`` is the label of node ``i + 1``; edges are stored as a
    frozenset of ``(u, v)`` pairs with ``u < v``.
    """

    n: int
    types: Tuple[str, ...]
    edges: frozenset

    def __init__(self, types: Sequence[str], edges: Iterable[Edge]):
        n = len(types)
        if n < 1:
            raise ValueError("graph needs at least one node")
        for t in types:
            _check_label(t)
        normalized = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) out of node range 1..{n}")
            normalized.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "types", tuple(types))
        object.__setattr__(self, "edges", frozenset(normalized))

    def type_of(self, node: int) -> str:
        return self.types[node - 1]

    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> List[List[int]]:
        """Neighbor lists indexed by node - 1."""
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u - 1].append(v)
            adj[v - 1].append(u)
        return adj

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    # -- text format ----------------------------------------------------------
    def to_text(self) -> str:
        """Bit-exact line format::

            typedgraph v1
            n=<int>
            types=<space-separated labels, node order>
            e <u> <v>          (u < v, lexicographically sorted)
        """
        lines = ["typedgraph v1", f"n={self.n}", "types=" + " ".join(self.types)]
        lines.extend(f"e {u} {v}" for u, v in self.sorted_edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TypedGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 3 or lines[0].strip() != "typedgraph v1":
            raise ValueError("not a 'typedgraph v1' file")
        if not lines[1].startswith("n="):
            raise ValueError("line 2 must be 'n=<int>'")
        n = int(lines[1][2:])
        if not lines[2].startswith("types="):
            raise ValueError("line 3 must be 'types=<labels>'")
        types = lines[2][len("types="):].split()
        if len(types) != n:
            raise ValueError(f"expected {n} type labels, got {len(types)}")
        edges = []
        for lineno, line in enumerate(lines[3:], start=4):
            parts = line.split()
            if len(parts) != 3 or parts[0] != "e":
                raise ValueError(f"line {lineno}: expected 'e <u> <v>', got {line!r}")
            u, v = int(parts[1]), int(parts[2])
            if not u < v:
                raise ValueError(f"line {lineno}: edge must satisfy u < v")
            edges.append((u, v))
        return cls(types, edges)


# ---------------------------------------------------------------------------
# Empirical distributions
# ---------------------------------------------------------------------------

def empirical_type_measure(z: TypedGraph) -> ProbMeasure:
    """out(a) = (1/n) * #{nodes of type a}, exact."""
    counts: Dict[str, int] = {}
    for t in z.types:
        counts[t] = counts.get(t, 0) + 1
    return ProbMeasure({a: Fraction(k, z.n) for a, k in counts.items()})


def empirical_link_measure(z: TypedGraph) -> FiniteMeasure:
    """out(a, b) = (1/n) * #{ordered adjacent pairs typed (a, b)}, exact.

    Both orientations of every edge are counted, so the measure is symmetric
    and its total mass is 2|E|/n.
    """
    counts: Dict[Tuple[str, str], int] = {}
    for u, v in z.edges:
        a, b = z.types[u - 1], z.types[v - 1]
        counts[(a, b)] = counts.get((a, b), 0) + 1
        counts[(b, a)] = counts.get((b, a), 0) + 1
    return FiniteMeasure({k: Fraction(c, z.n) for k, c in counts.items()})


def locality_atoms_of(types: Sequence[str], edges: Iterable[Edge]
                      ) -> List[Tuple[str, Tuple[Tuple[str, int], ...]]]:
    """Per-node locality atoms ``(type, sorted neighbor-type counts)`` for a
    bare (types, edges) description.

    Cheap building block shared by :func:`empirical_locality_measure` and the
    enumeration/sampling class-counting loops, which only need hashable atoms.
    """
    n = len(types)
    neigh: List[Dict[str, int]] = [{} for _ in range(n)]
    for u, v in edges:
        a, b = types[u - 1], types[v - 1]
        nu, nv = neigh[u - 1], neigh[v - 1]
        nu[b] = nu.get(b, 0) + 1
        nv[a] = nv.get(a, 0) + 1
    return [(types[i], tuple(sorted(neigh[i].items()))) for i in range(n)]


def locality_atoms(z: TypedGraph) -> List[Tuple[str, Tuple[Tuple[str, int], ...]]]:
    """Per-node locality atoms of a graph; see :func:`locality_atoms_of`."""
    return locality_atoms_of(z.types, z.edges)


def empirical_locality_measure(z: TypedGraph) -> ProbMeasure:
    """out = (1/n) * sum over nodes v of the point mass at
    ``(type(v), neighbor-type counts of v)``, exact."""
    counts: Dict[Tuple[str, Tuple[Tuple[str, int], ...]], int] = {}
    for atom in locality_atoms(z):
        counts[atom] = counts.get(atom, 0) + 1
    return ProbMeasure(
        {(a, CountingMeasure(e)): Fraction(k, z.n) for (a, e), k in counts.items()}
    )


def degree_distribution(z: TypedGraph) -> ProbMeasure:
    """out(k) = (1/n) * #{nodes of degree k}, exact; mean is 2|E|/n."""
    deg = [0] * z.n
    for u, v in z.edges:
        deg[u - 1] += 1
        deg[v - 1] += 1
    counts: Dict[int, int] = {}
    for d in deg:
        counts[d] = counts.get(d, 0) + 1
    return ProbMeasure({k: Fraction(c, z.n) for k, c in counts.items()})
