"""Portable GCN inference: weight loading, graph embedding, conjunct scoring.

The model is a node-type embedding table, T rounds of
``H_v = ReLU(MLP_t(mean over the closed neighborhood))`` with symmetrized
edges, a mean readout per graph, and one task head:

  task 1  scores each equation alone           (head: m -> 2)
  task 2  concatenates a formula-level mean     (head: 2m -> 2)
  task 3  scores a fixed-size slate at once     (head: n_limit*m -> n_limit)

Neighbor and readout sums sort their summands first, so results are bitwise
invariant under node relabeling; scores only ever depend on the multiset of
neighborhoods the graph describes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import EMPTY_EQUATION_GRAPH, NUM_NODE_TYPES, EquationGraph, \
    encode_equation, occurrence_counts

WEIGHT_SCHEMA_VERSION = 1
CACHE_LIMIT = 100_000

Layer = tuple[np.ndarray, np.ndarray]      # (weight out x in, bias out)


class WeightFormatError(ValueError):
    """Weight file rejected: missing field, bad shape, or bad version."""


@dataclass
class ModelWeights:
    task: int
    m: int
    T: int
    n_limit: int | None
    embedding: np.ndarray                  # NUM_NODE_TYPES x m
    rounds: list[list[Layer]]              # T message-passing MLPs
    head: list[Layer]

    def head_input_dim(self) -> int:
        if self.task == 1:
            return self.m
        if self.task == 2:
            return 2 * self.m
        return self.n_limit * self.m


def _parse_mlp(obj: dict, expect_in: int, expect_out: int, name: str) -> list[Layer]:
    try:
        raw = obj["layers"]
    except (KeyError, TypeError):
        raise WeightFormatError(f"{name}: missing 'layers'") from None
    if not raw:
        raise WeightFormatError(f"{name}: empty layer list")
    layers: list[Layer] = []
    cur = expect_in
    for i, layer in enumerate(raw):
        try:
            w = np.asarray(layer["w"], dtype=np.float64)
            b = np.asarray(layer["b"], dtype=np.float64)
        except (KeyError, TypeError, ValueError):
            raise WeightFormatError(f"{name} layer {i}: malformed 'w'/'b'") from None
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise WeightFormatError(f"{name} layer {i}: inconsistent shapes")
        if w.shape[1] != cur:
            raise WeightFormatError(
                f"{name} layer {i}: expected input {cur}, got {w.shape[1]}")
        layers.append((w, b))
        cur = w.shape[0]
    if cur != expect_out:
        raise WeightFormatError(f"{name}: expected output {expect_out}, got {cur}")
    return layers


def weights_from_json(obj: dict) -> ModelWeights:
    for key in ("version", "task", "m", "T", "embedding", "rounds", "head"):
        if key not in obj:
            raise WeightFormatError(f"missing field {key!r}")
    if obj["version"] != WEIGHT_SCHEMA_VERSION:
        raise WeightFormatError(f"unsupported schema version {obj['version']!r}")
    task = obj["task"]
    if task not in (1, 2, 3):
        raise WeightFormatError(f"bad task {task!r}")
    m, T = int(obj["m"]), int(obj["T"])
    if m < 1 or T < 0:
        raise WeightFormatError("m must be >= 1 and T >= 0")
    n_limit = obj.get("n_limit")
    if task == 3:
        if not n_limit or int(n_limit) < 1:
            raise WeightFormatError("task 3 requires positive n_limit")
        n_limit = int(n_limit)
    elif n_limit is not None:
        n_limit = int(n_limit)

    try:
        embedding = np.asarray(obj["embedding"], dtype=np.float64)
    except (TypeError, ValueError):
        raise WeightFormatError("malformed embedding table") from None
    if embedding.shape != (NUM_NODE_TYPES, m):
        raise WeightFormatError(
            f"embedding must be {NUM_NODE_TYPES}x{m}, got {embedding.shape}")

    rounds_raw = obj["rounds"]
    if len(rounds_raw) != T:
        raise WeightFormatError(f"expected {T} rounds, got {len(rounds_raw)}")
    rounds = [_parse_mlp(r, m, m, f"round {i}") for i, r in enumerate(rounds_raw)]

    w = ModelWeights(task, m, T, n_limit, embedding, rounds, [])
    out_dim = 2 if task in (1, 2) else n_limit
    w.head = _parse_mlp(obj["head"], w.head_input_dim(), out_dim, "head")
    return w


def weights_to_json(w: ModelWeights) -> dict:
    def mlp(layers):
        return {"layers": [{"w": wt.tolist(), "b": b.tolist()} for wt, b in layers]}

    obj = {
        "version": WEIGHT_SCHEMA_VERSION,
        "task": w.task,
        "m": w.m,
        "T": w.T,
        "embedding": w.embedding.tolist(),
        "rounds": [mlp(r) for r in w.rounds],
        "head": mlp(w.head),
    }
    if w.n_limit is not None:
        obj["n_limit"] = w.n_limit
    return obj


def load_weights(path: str) -> ModelWeights:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise WeightFormatError(f"not valid JSON: {e}") from None
    return weights_from_json(obj)


def save_weights(w: ModelWeights, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(weights_to_json(w), fh)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Forward pass


def _apply_mlp(layers: list[Layer], x: np.ndarray) -> np.ndarray:
    last = len(layers) - 1
    for i, (w, b) in enumerate(layers):
        x = x @ w.T + b
        if i < last:
            x = np.maximum(x, 0.0)
    return x


def _sorted_mean(block: np.ndarray) -> np.ndarray:
    # Sort each column before summing: the sum then depends only on the
    # multiset of values, making relabelings bitwise reproducible.
    return np.sort(block, axis=0).sum(axis=0) / block.shape[0]


def _closed_neighborhoods(g: EquationGraph) -> list[np.ndarray]:
    nbrs: list[set[int]] = [{v} for v in range(len(g.nodes))]
    for s, d in g.edges:
        nbrs[s].add(d)
        nbrs[d].add(s)
    return [np.fromiter(sorted(ns), dtype=np.intp) for ns in nbrs]


EmbeddingCache = dict


def embed_graph(g: EquationGraph, w: ModelWeights,
                cache: EmbeddingCache | None = None) -> np.ndarray:
    """Run T message-passing rounds and return the mean readout (length m)."""
    key = g.cache_key
    if cache is not None and key is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit

    h = w.embedding[np.fromiter(g.nodes, dtype=np.intp, count=len(g.nodes))]
    if w.rounds:
        hoods = _closed_neighborhoods(g)
        for layers in w.rounds:
            agg = np.empty_like(h)
            for v, idx in enumerate(hoods):
                agg[v] = _sorted_mean(h[idx])
            h = np.maximum(_apply_mlp(layers, agg), 0.0)
    readout = _sorted_mean(h)

    if cache is not None and key is not None and len(cache) < CACHE_LIMIT:
        cache[key] = readout
    return readout


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def score_conjuncts(graphs: list[EquationGraph], w: ModelWeights,
                    cache: EmbeddingCache | None = None) -> list[float]:
    """Score each graph under the model's task; higher means rank earlier.

    Task 3 trims to the n_limit shortest equations (trimmed scores are exactly
    0) or pads with empty-equation graphs, and distributes one unit of
    probability over the real, untrimmed entries.
    """
    if not graphs:
        raise ValueError("score_conjuncts requires at least one graph")
    embs = [embed_graph(g, w, cache) for g in graphs]

    if w.task == 1:
        return [float(_softmax(_apply_mlp(w.head, h))[0]) for h in embs]

    if w.task == 2:
        hg = _sorted_mean(np.stack(embs))
        return [
            float(_softmax(_apply_mlp(w.head, np.concatenate((h, hg))))[0])
            for h in embs
        ]

    nl = w.n_limit
    k = len(graphs)
    if k > nl:
        slots = sorted(range(k), key=lambda i: (graphs[i].term_count, i))[:nl]
        slot_embs = [embs[i] for i in slots]
    else:
        slots = list(range(k)) + [-1] * (nl - k)
        pad = embed_graph(EMPTY_EQUATION_GRAPH, w, cache)
        slot_embs = embs + [pad] * (nl - k)
    logits = _apply_mlp(w.head, np.concatenate(slot_embs))
    real = [j for j, s in enumerate(slots) if s >= 0]
    probs = _softmax(logits[real])
    scores = [0.0] * k
    for p, j in zip(probs, real):
        scores[slots[j]] = float(p)
    return scores


def make_scorer(w: ModelWeights, cache: EmbeddingCache | None = None):
    """Adapter for the solver: scores a priority-5 block with occurrence
    counts taken over the entire formula. Owns one embedding cache."""
    if cache is None:
        cache = {}

    def scorer(formula, block):
        counts = occurrence_counts(formula)
        graphs = [encode_equation(eq, counts) for eq in block]
        return score_conjuncts(graphs, w, cache)

    return scorer
