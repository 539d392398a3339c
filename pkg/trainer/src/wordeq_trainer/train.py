"""Training loop, evaluation, metrics log, and a small CLI.

The objective is the categorical cross-entropy between the one-hot label and
the model's ranking distribution over conjuncts (task 1/2 scores are
renormalized into a distribution; task 3 already is one). A uniform
prediction over k conjuncts therefore costs exactly ln k. The exported
checkpoint is the epoch with the highest validation accuracy.
"""

from __future__ import annotations

import argparse
import copy
import json
import random
import sys
from dataclasses import dataclass, field

import torch

from .data import Batch, Instance, load_instances, pack_batch, split_instances
from .model import RankGCN, export_weights


@dataclass
class TrainConfig:
    task: int = 1
    m: int = 128
    rounds: int = 2
    n_limit: int | None = None          # task 3 slate width
    hidden: int | None = None
    epochs: int = 30
    lr: float = 1e-3
    batch_size: int = 16
    split_ratios: tuple = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if self.task == 3 and self.n_limit is None:
            self.n_limit = 10


def _pad_to(model: RankGCN) -> int | None:
    return model.n_limit if model.task == 3 else None


def instance_losses(model: RankGCN, batch: Batch) -> tuple[torch.Tensor, int, int]:
    """(summed loss, counted instances, correct argmax predictions).

    Instances whose positive conjunct was trimmed out of a task-3 slate
    cannot contribute a gradient; they are skipped in the loss and counted
    as incorrect.
    """
    score_vectors = model.scores(batch)
    losses = []
    correct = 0
    for scores, label in zip(score_vectors, batch.labels):
        if label < 0:
            continue
        if model.task == 3:
            p = scores
        else:
            p = scores / scores.sum()
        losses.append(-torch.log(torch.clamp(p[label], min=1e-300)))
        if int(torch.argmax(scores)) == label:
            correct += 1
    if not losses:
        return torch.zeros((), dtype=torch.float64), 0, 0
    return torch.stack(losses).sum(), len(losses), correct


def evaluate_instances(model: RankGCN, instances: list[Instance],
                       batch_size: int = 64) -> tuple[float, float]:
    """(accuracy, mean loss) over the given instances."""
    if not instances:
        return 0.0, 0.0
    total_loss = 0.0
    total = correct = 0
    with torch.no_grad():
        for lo in range(0, len(instances), batch_size):
            chunk = instances[lo:lo + batch_size]
            batch = pack_batch(chunk, pad_to=_pad_to(model))
            loss, counted, good = instance_losses(model, batch)
            total_loss += float(loss)
            total += counted
            correct += good
    accuracy = correct / len(instances)
    mean_loss = total_loss / max(total, 1)
    return accuracy, mean_loss


def train(dataset_path: str, cfg: TrainConfig, weights_out: str,
          metrics_out: str | None = None):
    """Optimize the model on the dataset's train split; export the
    checkpoint from the epoch with the highest validation accuracy.

    Returns (model, history) where history holds one row per epoch.
    """
    torch.manual_seed(cfg.seed)
    instances = load_instances(dataset_path)
    if not instances:
        raise ValueError(f"empty dataset {dataset_path}")
    train_set, val_set, _ = split_instances(instances, cfg.split_ratios,
                                            cfg.seed)
    if not train_set:
        train_set = instances
    selection_set = val_set or train_set

    model = RankGCN(cfg.task, cfg.m, cfg.rounds, cfg.n_limit, cfg.hidden)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    rng = random.Random(cfg.seed)

    best_state = copy.deepcopy(model.state_dict())
    best_acc, _ = evaluate_instances(model, selection_set)
    history = []

    order = list(range(len(train_set)))
    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        model.train()
        epoch_loss = 0.0
        counted = 0
        for lo in range(0, len(order), cfg.batch_size):
            chunk = [train_set[i] for i in order[lo:lo + cfg.batch_size]]
            batch = pack_batch(chunk, pad_to=_pad_to(model))
            loss, n, _ = instance_losses(model, batch)
            if n == 0:
                continue
            optimizer.zero_grad()
            (loss / n).backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            counted += n
        model.eval()
        val_acc, val_loss = evaluate_instances(model, selection_set)
        history.append({
            "epoch": epoch,
            "train_loss": epoch_loss / max(counted, 1),
            "val_accuracy": val_acc,
            "val_loss": val_loss,
        })
        if val_acc > best_acc:
            best_acc = val_acc
            best_state = copy.deepcopy(model.state_dict())

    model.load_state_dict(best_state)
    model.eval()
    export_weights(model, weights_out)
    if metrics_out:
        with open(metrics_out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({
                "optimizer": "adam", "lr": cfg.lr, "task": cfg.task,
                "m": cfg.m, "rounds": cfg.rounds, "n_limit": cfg.n_limit,
                "batch_size": cfg.batch_size, "seed": cfg.seed,
                "train": len(train_set), "val": len(val_set),
                "best_val_accuracy": best_acc,
            }) + "\n")
            for row in history:
                fh.write(json.dumps(row) + "\n")
    return model, history


def evaluate(weights_path: str, dataset_path: str,
             cfg: TrainConfig | None = None) -> tuple[float, float]:
    """Deterministic (accuracy, loss) on the dataset's test split."""
    from .model import import_weights

    cfg = cfg or TrainConfig()
    model = import_weights(weights_path)
    instances = load_instances(dataset_path)
    _, _, test_set = split_instances(instances, cfg.split_ratios, cfg.seed)
    return evaluate_instances(model, test_set or instances)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wordeq-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    tp = sub.add_parser("train")
    tp.add_argument("--dataset", required=True)
    tp.add_argument("--task", type=int, choices=(1, 2, 3), required=True)
    tp.add_argument("--out", required=True, help="weight file path")
    tp.add_argument("--metrics", help="metrics log path")
    tp.add_argument("--m", type=int, default=128)
    tp.add_argument("--rounds", type=int, default=2)
    tp.add_argument("--n-limit", type=int, default=None)
    tp.add_argument("--epochs", type=int, default=30)
    tp.add_argument("--lr", type=float, default=1e-3)
    tp.add_argument("--batch-size", type=int, default=16)
    tp.add_argument("--seed", type=int, default=0)

    ep = sub.add_parser("evaluate")
    ep.add_argument("--dataset", required=True)
    ep.add_argument("--weights", required=True)
    ep.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "train":
        cfg = TrainConfig(task=args.task, m=args.m, rounds=args.rounds,
                          n_limit=args.n_limit, epochs=args.epochs,
                          lr=args.lr, batch_size=args.batch_size,
                          seed=args.seed)
        _, history = train(args.dataset, cfg, args.out, args.metrics)
        if history:
            last = history[-1]
            print(f"epochs={len(history)} train_loss={last['train_loss']:.4f} "
                  f"val_accuracy={last['val_accuracy']:.3f}")
        else:
            print("epochs=0 (exported initialized weights)")
        return 0
    acc, loss = evaluate(args.weights, args.dataset,
                         TrainConfig(seed=args.seed))
    print(f"accuracy={acc:.4f} loss={loss:.4f}")
    return 0


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console()
