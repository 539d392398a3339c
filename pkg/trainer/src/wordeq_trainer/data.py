"""Dataset loading and batching for equation-graph ranking instances.

The wire format is JSON-lines: each line holds the graphs of one rank point
(``{"nodes": [...], "edges": [[s,d],...], "root": int}`` per graph) plus a
one-hot ``label`` marking the conjunct to prefer. Graphs are batched
block-diagonally: node tensors concatenate, a graph-id vector drives the
segment-mean readout, and undirected-deduped edges with self-loops drive the
neighborhood means.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import torch

NUM_NODE_TYPES = 7
EMPTY_GRAPH = ([0], [])          # single '=' node; the task-3 padding graph


@dataclass
class Instance:
    graphs: list[tuple[list[int], list[tuple[int, int]]]]   # (nodes, edges)
    label: int                                              # positive index
    term_counts: list[int]       # occurrence nodes per graph (types 1 and 2)


def _term_count(nodes: list[int]) -> int:
    return sum(1 for t in nodes if t in (1, 2))


def parse_record(line: str) -> Instance:
    obj = json.loads(line)
    graphs = []
    for g in obj["graphs"]:
        nodes = [int(t) for t in g["nodes"]]
        edges = [(int(s), int(d)) for s, d in g["edges"]]
        graphs.append((nodes, edges))
    label_vec = [int(x) for x in obj["label"]]
    if sum(label_vec) != 1:
        raise ValueError("instance label must be one-hot")
    return Instance(graphs, label_vec.index(1),
                    [_term_count(nodes) for nodes, _ in graphs])


def load_instances(path: str) -> list[Instance]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(parse_record(line))
    return out


def split_instances(instances: list[Instance], ratios=(0.8, 0.1, 0.1),
                    seed: int = 0):
    """Seeded uniform split into train/validation/test lists."""
    order = list(range(len(instances)))
    random.Random(seed).shuffle(order)
    n = len(instances)
    n_train = int(n * ratios[0])
    n_val = int(n * ratios[1])
    train = [instances[i] for i in order[:n_train]]
    val = [instances[i] for i in order[n_train:n_train + n_val]]
    test = [instances[i] for i in order[n_train + n_val:]]
    return train, val, test


@dataclass
class Batch:
    """Block-diagonal packing of every graph in a batch of instances."""

    node_types: torch.Tensor     # (N,) long
    edge_src: torch.Tensor       # (E,) long, symmetrized + self loops, deduped
    edge_dst: torch.Tensor       # (E,) long
    degree: torch.Tensor         # (N, 1) closed-neighborhood sizes
    graph_ids: torch.Tensor      # (N,) long, which graph each node belongs to
    graph_sizes: torch.Tensor    # (G, 1) node counts per graph
    num_graphs: int
    instance_slices: list[tuple[int, int]]   # graph-id ranges per instance
    labels: list[int]
    term_counts: list[list[int]]
    real_counts: list[int]       # graphs per slate that are not padding


def pack_batch(instances: list[Instance],
               pad_to: int | None = None) -> Batch:
    """Concatenate instance graphs; with ``pad_to`` (task 3), trim each
    instance to its shortest ``pad_to`` graphs or pad with empty graphs.

    Trimming keeps the runtime's convention: stable sort by term count
    ascending. Returned labels refer to the packed slate; instances whose
    positive graph was trimmed keep label -1 and must be skipped by the
    caller.
    """
    node_types: list[int] = []
    edges: set[tuple[int, int]] = set()
    graph_ids: list[int] = []
    slices = []
    labels = []
    term_counts = []
    real_counts = []
    gid = 0
    for inst in instances:
        if pad_to is None:
            chosen = list(range(len(inst.graphs)))
            graphs = [inst.graphs[i] for i in chosen]
            label = inst.label
        else:
            k = len(inst.graphs)
            if k > pad_to:
                order = sorted(range(k), key=lambda i: (inst.term_counts[i], i))
                chosen = order[:pad_to]
                graphs = [inst.graphs[i] for i in chosen]
                label = chosen.index(inst.label) if inst.label in chosen else -1
            else:
                chosen = list(range(k))
                graphs = [inst.graphs[i] for i in chosen]
                graphs += [EMPTY_GRAPH] * (pad_to - k)
                label = inst.label
        real_counts.append(len(chosen))
        start = gid
        for nodes, graph_edges in graphs:
            base = len(node_types)
            node_types.extend(nodes)
            graph_ids.extend([gid] * len(nodes))
            for v in range(len(nodes)):
                edges.add((base + v, base + v))
            for s, d in graph_edges:
                edges.add((base + s, base + d))
                edges.add((base + d, base + s))
            gid += 1
        slices.append((start, gid))
        labels.append(label)
        term_counts.append([inst.term_counts[i] for i in chosen])

    src = torch.tensor([e[0] for e in sorted(edges)], dtype=torch.long)
    dst = torch.tensor([e[1] for e in sorted(edges)], dtype=torch.long)
    n = len(node_types)
    degree = torch.zeros(n, dtype=torch.float64)
    degree.index_add_(0, dst, torch.ones(len(dst), dtype=torch.float64))
    gids = torch.tensor(graph_ids, dtype=torch.long)
    sizes = torch.zeros(gid, dtype=torch.float64)
    sizes.index_add_(0, gids, torch.ones(n, dtype=torch.float64))
    return Batch(
        node_types=torch.tensor(node_types, dtype=torch.long),
        edge_src=src, edge_dst=dst,
        degree=degree.unsqueeze(1),
        graph_ids=gids,
        graph_sizes=sizes.unsqueeze(1),
        num_graphs=gid,
        instance_slices=slices,
        labels=labels,
        term_counts=term_counts,
        real_counts=real_counts,
    )
