"""Labeled ranking instances from MUSes and recorded proof trees.

An instance is the list of equation graphs at one rank point plus a one-hot
label marking the conjunct worth processing first. MUS-sourced labels mark
the shortest equation inside the MUS of the original formula; path-sourced
labels mark the equation placed leftmost at each rank point along the
smallest UNSAT root choice of a recorded solve.

Datasets are JSON-lines (one instance per line) with a manifest recording
provenance and the train/validation/test split.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .graphs import EquationGraph, encode_formula, record_from_line, record_to_line
from .solver import DecisionTree, shortest_unsat_path
from .terms import Eq, Formula

SPLIT_RATIOS = (0.8, 0.1, 0.1)
SPLIT_NAMES = ("train", "val", "test")


@dataclass
class LabeledInstance:
    graphs: list[EquationGraph]
    label: list[int]
    source: str = ""          # "mus" | "path"
    problem: str = ""


def label_from_mus(f: Formula, mus: tuple[int, ...] | list[int]) -> list[int]:
    """1 for every MUS member of minimal length, 0 elsewhere (pre
    post-processing, so several 1s are possible)."""
    if not mus:
        raise ValueError("empty MUS")
    eqs = f.equations
    shortest = min(eqs[i].length for i in mus)
    members = set(mus)
    return [1 if (i in members and eqs[i].length == shortest) else 0
            for i in range(len(eqs))]


def label_from_path(tree: DecisionTree) -> list[tuple[tuple[Eq, ...], list[int]]]:
    """(conjuncts, one-hot label) for every rank point on the shortest UNSAT
    path; the 1 marks the equation placed leftmost there."""
    out = []
    for snap in shortest_unsat_path(tree):
        label = [0] * len(snap.conjuncts)
        label[snap.chosen] = 1
        out.append((snap.conjuncts, label))
    return out


def post_process(label: list[int]) -> list[int] | None:
    """Keep only the first 1; drop instances with no positive label."""
    total = sum(label)
    if total == 0:
        return None
    if total == 1:
        return list(label)
    out = []
    seen = False
    for y in label:
        if y == 1 and not seen:
            out.append(1)
            seen = True
        else:
            out.append(0)
    return out


def instance_from_mus(f: Formula, mus: tuple[int, ...],
                      problem: str = "") -> LabeledInstance | None:
    """One instance per problem: graphs of the ORIGINAL conjunct list,
    labeled by MUS membership and length."""
    if len(f.equations) < 2:
        return None
    label = post_process(label_from_mus(f, mus))
    if label is None:
        return None
    return LabeledInstance(encode_formula(f), label, "mus", problem)


def instances_from_tree(tree: DecisionTree, problem: str = "") -> list[LabeledInstance]:
    """Instances for the rank points along the recorded shortest UNSAT path.
    Rank points with a single conjunct carry no decision and are skipped."""
    out = []
    for conjuncts, label in label_from_path(tree):
        if len(conjuncts) < 2:
            continue
        label = post_process(label)
        if label is None:
            continue
        graphs = encode_formula(Formula(conjuncts, tree.table))
        out.append(LabeledInstance(graphs, label, "path", problem))
    return out


# ---------------------------------------------------------------------------
# Dataset export


def export_dataset(instances: list[LabeledInstance], path: str | Path) -> int:
    """Write instances as JSON-lines; returns the number written."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(record_to_line(inst.graphs, inst.label))
            fh.write("\n")
    return len(instances)


def load_dataset(path: str | Path) -> list[tuple[list[EquationGraph], list[int]]]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(record_from_line(line))
    return out


def assign_splits(count: int, seed: int = 0,
                  ratios: tuple[float, float, float] = SPLIT_RATIOS) -> list[str]:
    """Seeded uniform split assignment, one name per instance index."""
    order = list(range(count))
    random.Random(seed).shuffle(order)
    n_train = int(count * ratios[0])
    n_val = int(count * ratios[1])
    names = [""] * count
    for pos, idx in enumerate(order):
        if pos < n_train:
            names[idx] = "train"
        elif pos < n_train + n_val:
            names[idx] = "val"
        else:
            names[idx] = "test"
    return names


def write_manifest(instances: list[LabeledInstance], splits: list[str],
                   path: str | Path) -> None:
    entries = [
        {"line": i, "problem": inst.problem, "source": inst.source,
         "split": split}
        for i, (inst, split) in enumerate(zip(instances, splits))
    ]
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump({"instances": entries}, fh, indent=1)
        fh.write("\n")
