"""Command-line entry point and batch evaluation harness.

Subcommands:
  solve    decide one problem file, print status/splits/time
  eval     run problems x strategies under a timeout, emit CSV + summary
  gen      write seeded benchmark problem files plus a manifest
  mus      extract a minimal unsatisfiable subset and report it
  extract  full training-data pipeline: solve, MUS, reorder, re-solve, label
  encode   formula -> equation-graph JSON
  score    model scores for a formula (or dataset records)

Exit codes: 0 decided/ok, 2 undecided/no result, 1 error. A JSON config file
(--config or $WORDEQ_CONFIG) can supply oracles/model/timeout; flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .benchgen import PRESETS, generate, problem_seed
from .gcn import WeightFormatError, load_weights
from .mus import (
    DEFAULT_SUBSET_BUDGET, ExternalOracle, InternalOracle, find_mus,
    select_fastest_oracle,
)
from .ranking import ConfigError, Strategy
from .solver import SolveConfig, split_equations
from .terms import ParseError, Status, parse_problem, serialize_problem
from .traindata import (
    assign_splits, export_dataset, instance_from_mus, instances_from_tree,
    write_manifest,
)
from .graphs import encode_formula, graph_to_json, record_from_line

CONFIG_ENV = "WORDEQ_CONFIG"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"bad config file {path}: {e}")
    if not isinstance(cfg, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    return cfg


def _read_problem(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}")
    return parse_problem(text)


def _solve_config(args, config: dict) -> SolveConfig:
    model = None
    model_path = getattr(args, "model", None) or config.get("model")
    if model_path:
        model = load_weights(model_path)
        task = getattr(args, "task", None)
        if task is not None and model.task != task:
            raise CliError(f"model file is for task {model.task}, not {task}")
    timeout = getattr(args, "timeout", None)
    if timeout is None:
        timeout = config.get("timeout", 300.0)
    return SolveConfig(
        strategy=Strategy.parse(getattr(args, "strategy", "re1")),
        timeout_seconds=float(timeout),
        max_splits=getattr(args, "max_splits", None),
        ancestor_cycle_check=not getattr(args, "no_cycle_check", False),
        model=model,
        random_seed=getattr(args, "seed", 0) or 0,
        suffix_rules=getattr(args, "suffix_rules", False),
    )


def _oracles(args, config: dict) -> list:
    oracles = []
    timeout = getattr(args, "oracle_timeout", None) or config.get(
        "oracle_timeout", 10.0)
    for cmd in (getattr(args, "oracle", None) or config.get("oracles") or []):
        oracles.append(ExternalOracle(cmd, float(timeout)))
    if getattr(args, "internal_oracle", False) or not oracles:
        oracles.append(InternalOracle(timeout=float(timeout)))
    return oracles


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args, config) -> int:
    f = _read_problem(args.file)
    res = split_equations(f, _solve_config(args, config))
    print(f"status={res.status} splits={res.splits} time={res.elapsed:.3f}")
    return 0 if res.status is not Status.UNKNOWN else 2


def summarize_rows(rows: list[dict]) -> list[dict]:
    """Per-strategy counts and averages; the commonly-solved average runs
    over problems every strategy decided."""
    strategies = sorted({r["strategy"] for r in rows})
    by_problem: dict[str, dict[str, dict]] = {}
    for r in rows:
        by_problem.setdefault(r["problem"], {})[r["strategy"]] = r
    common = [
        p for p, per in by_problem.items()
        if len(per) == len(strategies)
        and all(x["status"] != "UNKNOWN" for x in per.values())
    ]
    out = []
    for strat in strategies:
        mine = [r for r in rows if r["strategy"] == strat]
        solved = [r for r in mine if r["status"] != "UNKNOWN"]
        entry = {
            "strategy": strat,
            "sat": sum(1 for r in mine if r["status"] == "SAT"),
            "unsat": sum(1 for r in mine if r["status"] == "UNSAT"),
            "unknown": sum(1 for r in mine if r["status"] == "UNKNOWN"),
            "avg_time_common": (
                sum(float(by_problem[p][strat]["seconds"]) for p in common)
                / len(common) if common else 0.0),
            "avg_splits_solved": (
                sum(int(r["splits"]) for r in solved) / len(solved)
                if solved else 0.0),
        }
        out.append(entry)
    return out


def cmd_eval(args, config) -> int:
    problems = sorted(Path(args.problems).glob("*.eq"))
    if not problems:
        raise CliError(f"no .eq problems under {args.problems}")
    strategies = [Strategy.parse(s) for s in args.strategies.split(",")]
    base = _solve_config(args, config)
    for strat in strategies:
        if strat.needs_model and base.model is None:
            raise CliError(f"strategy {strat.value} requires --model")

    def run_one(path: Path) -> list[dict]:
        rows = []
        for strat in strategies:
            try:
                f = _read_problem(str(path))
                cfg = SolveConfig(
                    strategy=strat, timeout_seconds=base.timeout_seconds,
                    max_splits=base.max_splits,
                    ancestor_cycle_check=base.ancestor_cycle_check,
                    model=base.model, random_seed=base.random_seed,
                    suffix_rules=base.suffix_rules)
                res = split_equations(f, cfg)
                rows.append({"problem": path.name, "strategy": strat.value,
                             "status": str(res.status), "splits": res.splits,
                             "seconds": f"{res.elapsed:.6f}"})
            except Exception as e:           # record the failure, keep going
                rows.append({"problem": path.name, "strategy": strat.value,
                             "status": f"ERROR:{type(e).__name__}",
                             "splits": 0, "seconds": "0"})
        return rows

    rows: list[dict] = []
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(run_one, problems):
                rows.extend(chunk)
    else:
        for path in problems:
            rows.extend(run_one(path))

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["problem", "strategy", "status", "splits", "seconds"])
        writer.writeheader()
        writer.writerows(rows)

    for entry in summarize_rows([r for r in rows if not r["status"].startswith("ERROR")]):
        print("strategy={strategy} sat={sat} unsat={unsat} unknown={unknown} "
              "avg_time_common={avg_time_common:.4f} "
              "avg_splits_solved={avg_splits_solved:.1f}".format(**entry))
    return 0


def cmd_gen(args, config) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.benchmark.lower() not in set(PRESETS) | {"c"}:
        raise CliError(f"unknown benchmark {args.benchmark}")
    files = []
    for i in range(args.count):
        f = generate(args.benchmark, problem_seed(args.seed, i))
        name = f"problem_{i:04d}.eq"
        (out / name).write_text(serialize_problem(f), encoding="utf-8")
        files.append(name)
    manifest = {"benchmark": args.benchmark.lower(), "seed": args.seed,
                "count": args.count, "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n",
                                       encoding="utf-8")
    print(f"wrote {args.count} problems to {out}")
    return 0


def cmd_mus(args, config) -> int:
    f = _read_problem(args.file)
    oracles = _oracles(args, config)
    oracle, _ = select_fastest_oracle(f, oracles)
    if oracle is None:
        print(json.dumps({"subset": None, "reason": "formula not proved UNSAT"}))
        return 2
    res = find_mus(f, oracle, max_oracle_calls=args.budget, workers=args.jobs)
    if res is None:
        print(json.dumps({"subset": None, "reason": "budget exhausted"}))
        return 2
    print(json.dumps({
        "subset": list(res.subset),
        "oracle": str(oracle),
        "oracle_calls": res.oracle_calls,
        "unknown_subsets": res.unknown_subsets,
        "total_seconds": round(sum(res.per_subset_times), 6),
    }))
    return 0


def mus_first_order(f, mus: tuple[int, ...]) -> list[int]:
    """Conjunct order for the guided re-solve: MUS members first (short
    ones leading), then the rest in input order."""
    members = sorted(mus, key=lambda i: (f.equations[i].length, i))
    rest = [i for i in range(len(f.equations)) if i not in set(mus)]
    return members + rest


def cmd_extract(args, config) -> int:
    problems = sorted(Path(args.problems).glob("*.eq"))
    if not problems:
        raise CliError(f"no .eq problems under {args.problems}")
    oracles = _oracles(args, config)
    instances = []
    stats = {"problems": 0, "unsolved": 0, "mus": 0, "resolved": 0}

    for path in problems:
        stats["problems"] += 1
        f = _read_problem(str(path))
        first = split_equations(f, SolveConfig(
            timeout_seconds=args.solve_timeout, max_splits=args.max_splits))
        if first.status is not Status.UNKNOWN:
            continue                      # the plain solver already knows it
        stats["unsolved"] += 1

        oracle, _ = select_fastest_oracle(f, oracles)
        if oracle is None:
            continue
        mus = find_mus(f, oracle, max_oracle_calls=args.budget,
                       workers=args.jobs)
        if mus is None:
            continue
        stats["mus"] += 1
        inst = instance_from_mus(f, mus.subset, problem=path.name)
        if inst is not None:
            instances.append(inst)

        order = mus_first_order(f, mus.subset)
        reordered = f.replace(tuple(f.equations[i] for i in order))
        second = split_equations(reordered, SolveConfig(
            timeout_seconds=args.solve_timeout, max_splits=args.max_splits,
            record_tree=True))
        if second.status is Status.UNSAT and second.tree is not None:
            stats["resolved"] += 1
            instances.extend(instances_from_tree(second.tree, problem=path.name))

    count = export_dataset(instances, args.out)
    splits = assign_splits(count, seed=args.seed)
    if args.manifest:
        write_manifest(instances, splits, args.manifest)
    print(json.dumps({"instances": count, **stats}))
    return 0 if count else 2


def cmd_encode(args, config) -> int:
    f = _read_problem(args.file)
    line = json.dumps({"graphs": [graph_to_json(g) for g in encode_formula(f)]},
                      separators=(",", ":"))
    if args.out:
        Path(args.out).write_text(line + "\n", encoding="utf-8")
    else:
        print(line)
    return 0


def cmd_score(args, config) -> int:
    model_path = args.model or config.get("model")
    if not model_path:
        raise CliError("score requires --model")
    weights = load_weights(model_path)
    if args.task is not None and weights.task != args.task:
        raise CliError(f"model file is for task {weights.task}, not {args.task}")
    from .gcn import score_conjuncts

    if args.dataset:
        with open(args.dataset, "r", encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                graphs, _ = record_from_line(raw)
                scores = score_conjuncts(graphs, weights)
                print(json.dumps({"scores": scores}))
        return 0
    if not args.file:
        raise CliError("score needs a problem file or --dataset")
    f = _read_problem(args.file)
    scores = score_conjuncts(encode_formula(f), weights)
    print(json.dumps({"scores": scores}))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    p = _Parser(prog="wordeq", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="JSON config file (or $WORDEQ_CONFIG)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_solver_flags(sp):
        sp.add_argument("--strategy", default="re1",
                        help="ranking strategy re1..re7")
        sp.add_argument("--model", help="GCN weight file (re3..re7)")
        sp.add_argument("--task", type=int, choices=(1, 2, 3))
        sp.add_argument("--timeout", type=float, default=None,
                        help="seconds per proof attempt (default 300)")
        sp.add_argument("--max-splits", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--suffix-rules", action="store_true",
                        help="use last-term rule variants")
        sp.add_argument("--no-cycle-check", action="store_true")

    sp = sub.add_parser("solve", help="decide one problem file")
    add_solver_flags(sp)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("eval", help="batch evaluation, CSV report")
    add_solver_flags(sp)
    sp.add_argument("--problems", required=True)
    sp.add_argument("--strategies", default="re1",
                    help="comma-separated, e.g. re1,re2")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gen", help="generate benchmark problems")
    sp.add_argument("--benchmark", required=True, help="a1|a2|b|c")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_gen)

    def add_oracle_flags(sp):
        sp.add_argument("--oracle", action="append",
                        help="external solver command with {file}; repeatable")
        sp.add_argument("--internal-oracle", action="store_true",
                        help="also use the built-in solver as an oracle")
        sp.add_argument("--oracle-timeout", type=float, default=None)
        sp.add_argument("--budget", type=int, default=DEFAULT_SUBSET_BUDGET,
                        help="max oracle calls for subset enumeration")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("mus", help="minimal unsatisfiable subset")
    add_oracle_flags(sp)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_mus)

    sp = sub.add_parser("extract", help="training-data pipeline")
    add_oracle_flags(sp)
    sp.add_argument("--problems", required=True)
    sp.add_argument("--out", required=True, help="dataset JSON-lines path")
    sp.add_argument("--manifest", help="manifest JSON path")
    sp.add_argument("--solve-timeout", type=float, default=5.0)
    sp.add_argument("--max-splits", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("encode", help="formula to graph JSON")
    sp.add_argument("file")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("score", help="model scores for a formula")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--model")
    sp.add_argument("--task", type=int, choices=(1, 2, 3))
    sp.add_argument("--dataset", help="score dataset records instead")
    sp.set_defaults(func=cmd_score)

    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return args.func(args, config)
    except (CliError, ConfigError, ParseError, WeightFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
