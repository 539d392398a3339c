"""The trainable ranking model and its portable-weights serialization.

Forward semantics mirror the inference runtime exactly: node-type embedding,
T rounds of ``ReLU(MLP_t(mean over closed neighborhood))``, mean readout per
graph, then one of three heads. Everything runs in float64 so exported
weights reproduce the runtime's scores to well below the contract tolerance.
"""

from __future__ import annotations

import json

import torch
from torch import nn

from .data import NUM_NODE_TYPES, Batch

WEIGHT_SCHEMA_VERSION = 1


def _mlp(n_in: int, hidden: int, n_out: int) -> nn.Sequential:
    return nn.Sequential(nn.Linear(n_in, hidden), nn.ReLU(),
                         nn.Linear(hidden, n_out))


class RankGCN(nn.Module):
    """Embedding + message-passing rounds + a task head (1, 2, or 3)."""

    def __init__(self, task: int, m: int = 128, rounds: int = 2,
                 n_limit: int | None = None, hidden: int | None = None):
        super().__init__()
        if task not in (1, 2, 3):
            raise ValueError(f"bad task {task}")
        if task == 3 and not n_limit:
            raise ValueError("task 3 needs n_limit")
        self.task = task
        self.m = m
        self.n_limit = n_limit
        hidden = hidden or m
        self.embedding = nn.Embedding(NUM_NODE_TYPES, m)
        self.rounds = nn.ModuleList(_mlp(m, hidden, m) for _ in range(rounds))
        if task == 1:
            self.head = _mlp(m, hidden, 2)
        elif task == 2:
            self.head = _mlp(2 * m, hidden, 2)
        else:
            self.head = _mlp(n_limit * m, hidden, n_limit)
        self.double()

    def graph_embeddings(self, batch: Batch) -> torch.Tensor:
        """(num_graphs, m) mean readouts after the message-passing rounds."""
        h = self.embedding(batch.node_types)
        for mlp in self.rounds:
            sums = torch.zeros_like(h)
            sums.index_add_(0, batch.edge_dst, h[batch.edge_src])
            h = torch.relu(mlp(sums / batch.degree))
        pooled = torch.zeros(batch.num_graphs, self.m, dtype=h.dtype)
        pooled.index_add_(0, batch.graph_ids, h)
        return pooled / batch.graph_sizes

    def scores(self, batch: Batch) -> list[torch.Tensor]:
        """Per-instance score vectors (the runtime's ranking outputs).

        Task 1/2 entries are per-equation class-0 probabilities; task 3
        entries are a masked softmax over the slate's real slots.
        """
        emb = self.graph_embeddings(batch)
        out = []
        for idx, (lo, hi) in enumerate(batch.instance_slices):
            h = emb[lo:hi]
            if self.task == 1:
                out.append(torch.softmax(self.head(h), dim=1)[:, 0])
            elif self.task == 2:
                hg = h.mean(dim=0, keepdim=True).expand(h.shape[0], -1)
                out.append(torch.softmax(self.head(torch.cat((h, hg), dim=1)),
                                         dim=1)[:, 0])
            else:
                logits = self.head(h.reshape(-1))
                # pads (and trimmed conjuncts) never receive probability mass
                real = batch.real_counts[idx]
                out.append(torch.softmax(logits[:real], dim=0))
        return out


# ---------------------------------------------------------------------------
# Portable weight file (the contract with the inference runtime)


def _dump_mlp(seq: nn.Sequential) -> dict:
    layers = []
    for layer in seq:
        if isinstance(layer, nn.Linear):
            layers.append({"w": layer.weight.detach().tolist(),
                           "b": layer.bias.detach().tolist()})
    return {"layers": layers}


def export_weights(model: RankGCN, path: str) -> dict:
    obj = {
        "version": WEIGHT_SCHEMA_VERSION,
        "task": model.task,
        "m": model.m,
        "T": len(model.rounds),
        "embedding": model.embedding.weight.detach().tolist(),
        "rounds": [_dump_mlp(r) for r in model.rounds],
        "head": _dump_mlp(model.head),
    }
    if model.n_limit is not None:
        obj["n_limit"] = model.n_limit
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")
    return obj


def _load_mlp(seq: nn.Sequential, obj: dict) -> None:
    linears = [l for l in seq if isinstance(l, nn.Linear)]
    if len(linears) != len(obj["layers"]):
        raise ValueError("layer count mismatch")
    with torch.no_grad():
        for linear, spec in zip(linears, obj["layers"]):
            linear.weight.copy_(torch.tensor(spec["w"], dtype=torch.float64))
            linear.bias.copy_(torch.tensor(spec["b"], dtype=torch.float64))


def import_weights(path: str) -> RankGCN:
    """Rebuild a model from a weight file (sizes are read from the file)."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("version") != WEIGHT_SCHEMA_VERSION:
        raise ValueError(f"unsupported weight schema {obj.get('version')!r}")
    hidden = len(obj["rounds"][0]["layers"][0]["b"]) if obj["rounds"] else None
    model = RankGCN(obj["task"], obj["m"], obj["T"], obj.get("n_limit"),
                    hidden=hidden)
    with torch.no_grad():
        model.embedding.weight.copy_(
            torch.tensor(obj["embedding"], dtype=torch.float64))
    for seq, spec in zip(model.rounds, obj["rounds"]):
        _load_mlp(seq, spec)
    _load_mlp(model.head, obj["head"])
    return model
