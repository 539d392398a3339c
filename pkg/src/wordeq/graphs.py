"""Typed-graph encoding of word equations with global occurrence chains.

Each equation becomes its own graph: an '=' root whose two children are the
first terms of either side, with the remaining terms chained as singly linked
lists. On top of that, every distinct term carries the binary encoding of its
occurrence count ACROSS the whole conjunction, materialized as a chain of
0/1-typed nodes whose head points at every occurrence of the term in this
graph. Counts use the full formula, so per-equation graphs still see global
structure, while unchanged equations keep identical graphs (and cacheable
embeddings) across search steps.

Node type codes are frozen; trained weight files depend on them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .terms import Eq, Formula

NODE_EQ = 0        # '=' root
NODE_LETTER = 1
NODE_VAR = 2
NODE_T0 = 3        # letter-count chain, bit 0
NODE_T1 = 4        # letter-count chain, bit 1
NODE_V0 = 5        # variable-count chain, bit 0
NODE_V1 = 6        # variable-count chain, bit 1
NUM_NODE_TYPES = 7


@dataclass(frozen=True)
class EquationGraph:
    nodes: tuple[int, ...]                 # node type codes
    edges: tuple[tuple[int, int], ...]     # directed (src, dst) index pairs
    root: int                              # index of the '=' node
    term_count: int                        # occurrence nodes (equation length)
    cache_key: tuple | None = None         # embedding-cache key; None if unknown

    def validate(self) -> None:
        if sum(1 for t in self.nodes if t == NODE_EQ) != 1:
            raise ValueError("graph must contain exactly one '=' node")
        if not (0 <= self.root < len(self.nodes)) or self.nodes[self.root] != NODE_EQ:
            raise ValueError("root must index the '=' node")
        n = len(self.nodes)
        for s, d in self.edges:
            if not (0 <= s < n and 0 <= d < n):
                raise ValueError(f"edge ({s},{d}) out of range")
        for t in self.nodes:
            if not 0 <= t < NUM_NODE_TYPES:
                raise ValueError(f"unknown node type {t}")


def occurrence_counts(f: Formula) -> dict[int, int]:
    """Occurrences of every distinct term over ALL conjuncts of ``f``."""
    counts: dict[int, int] = {}
    for eq in f.equations:
        for t in eq.lhs:
            counts[t] = counts.get(t, 0) + 1
        for t in eq.rhs:
            counts[t] = counts.get(t, 0) + 1
    return counts


def encode_equation(eq: Eq, counts: dict[int, int]) -> EquationGraph:
    """Build the typed graph of one equation under the given global counts.

    Construction order is canonical: root, lhs chain, rhs chain, then one
    occurrence chain per distinct term in first-occurrence order.
    """
    nodes: list[int] = [NODE_EQ]
    edges: list[tuple[int, int]] = []
    occurrences: dict[int, list[int]] = {}
    order: list[int] = []

    for side in (eq.lhs, eq.rhs):
        prev = None
        for t in side:
            idx = len(nodes)
            nodes.append(NODE_VAR if t < 0 else NODE_LETTER)
            edges.append((0, idx) if prev is None else (prev, idx))
            prev = idx
            if t not in occurrences:
                occurrences[t] = []
                order.append(t)
            occurrences[t].append(idx)

    for t in order:
        if t not in counts:
            raise ValueError(f"occurrence counts missing term {t}")
        count = counts[t]
        if count <= 0:
            raise ValueError(f"non-positive count for term {t}")
        one, zero = (NODE_V1, NODE_V0) if t < 0 else (NODE_T1, NODE_T0)
        head = len(nodes)
        prev = None
        for bit in bin(count)[2:]:
            idx = len(nodes)
            nodes.append(one if bit == "1" else zero)
            if prev is not None:
                edges.append((prev, idx))
            prev = idx
        for occ in occurrences[t]:
            edges.append((head, occ))

    key = (eq.lhs, eq.rhs, tuple(counts[t] for t in order))
    return EquationGraph(tuple(nodes), tuple(edges), 0,
                         term_count=len(eq.lhs) + len(eq.rhs), cache_key=key)


def encode_formula(f: Formula) -> list[EquationGraph]:
    """One graph per conjunct, all sharing the formula-wide counts."""
    counts = occurrence_counts(f)
    return [encode_equation(eq, counts) for eq in f.equations]


EMPTY_EQUATION_GRAPH = EquationGraph((NODE_EQ,), (), 0, term_count=0,
                                     cache_key=((), (), ()))


# ---------------------------------------------------------------------------
# JSON-lines dataset records


def graph_to_json(g: EquationGraph) -> dict:
    return {"nodes": list(g.nodes), "edges": [list(e) for e in g.edges],
            "root": g.root}


def graph_from_json(obj: dict) -> EquationGraph:
    nodes = tuple(int(t) for t in obj["nodes"])
    edges = tuple((int(s), int(d)) for s, d in obj["edges"])
    g = EquationGraph(nodes, edges, int(obj["root"]),
                      term_count=sum(1 for t in nodes if t in (NODE_LETTER, NODE_VAR)))
    g.validate()
    return g


def record_to_line(graphs: Iterable[EquationGraph],
                   label: list[int] | None = None) -> str:
    rec: dict = {"graphs": [graph_to_json(g) for g in graphs]}
    if label is not None:
        rec["label"] = list(label)
    return json.dumps(rec, separators=(",", ":"))


def record_from_line(line: str) -> tuple[list[EquationGraph], list[int] | None]:
    obj = json.loads(line)
    graphs = [graph_from_json(g) for g in obj["graphs"]]
    label = obj.get("label")
    if label is not None:
        label = [int(x) for x in label]
    return graphs, label
