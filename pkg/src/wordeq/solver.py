"""Depth-first split search over conjunctive word equations.

Each node is simplified, ranked, and expanded by the single matching
inference rule; child statuses combine as SAT-if-any / UNSAT-if-all, with
UNKNOWN for timeouts, split budgets, and ancestor repeats. The search is
iterative (explicit stack) because proof depths routinely exceed Python's
recursion limit.

With ``record_tree`` the solve additionally enumerates every root-level
choice of which conjunct goes first, solving each pinned variant and keeping
the rank-point snapshots along its leftmost spine. That recorded structure is
what the training-data extraction consumes.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .calculus import FreshVars, apply_rules, simplify_and_check
from .ranking import ConfigError, RankContext, RankParams, Scorer, Strategy, rank_eqs
from .terms import Eq, Formula, Status, SymbolTable, canonical_form, subst_word

SNAPSHOT_CAP = 10_000


@dataclass
class SolveConfig:
    strategy: Strategy = Strategy.RE1
    timeout_seconds: float = 300.0
    max_splits: int | None = None
    ancestor_cycle_check: bool = True
    record_tree: bool = False
    model: object | None = None      # ModelWeights or a Scorer callable
    random_seed: int = 0
    suffix_rules: bool = False
    rank_params: RankParams = field(default_factory=RankParams)
    # Resource guard: branches whose formulas outgrow this many terms are
    # pruned as UNKNOWN before they can exhaust memory.
    max_formula_terms: int = 1_000_000

    def validate(self) -> None:
        if self.timeout_seconds <= 0:
            raise ConfigError("timeout must be positive")
        if self.strategy.needs_model and self.model is None:
            raise ConfigError(f"strategy {self.strategy.value} requires a model")
        self.rank_params.validate()


@dataclass
class RankSnapshot:
    """One rank point: the conjuncts as they arrived and which one was
    placed leftmost."""

    conjuncts: tuple[Eq, ...]
    chosen: int


@dataclass
class ChoiceRecord:
    """Outcome of solving the root formula with one conjunct pinned first."""

    choice: int
    status: Status
    nodes: int
    spine: list[RankSnapshot]


@dataclass
class DecisionTree:
    root_conjuncts: tuple[Eq, ...]
    choices: list[ChoiceRecord]
    table: SymbolTable


@dataclass
class SolveResult:
    status: Status
    splits: int
    rank_calls: int
    gnn_calls: int
    elapsed: float
    witness: dict[int, tuple[int, ...]] | None = None
    tree: DecisionTree | None = None


def reconstruct_witness(variables: Sequence[int],
                        path_subs: Sequence[Mapping[int, tuple[int, ...]]]
                        ) -> dict[int, tuple[int, ...]]:
    """Compose the rule substitutions along a root-to-SAT-leaf path.

    Restricted to ``variables``; anything still unresolved at the leaf maps
    to the empty word (stripping residual variables is the uniform empty
    assignment, which any SAT leaf admits).
    """
    words: dict[int, tuple[int, ...]] = {v: (v,) for v in variables}
    active = set(variables)
    for sub in path_subs:
        if not sub or not active:
            continue
        for v in tuple(active):
            w = subst_word(words[v], sub)
            words[v] = w
            if all(t >= 0 for t in w):
                active.discard(v)
    return {v: tuple(t for t in w if t >= 0) for v, w in words.items()}


class _Frame:
    __slots__ = ("children", "idx", "sat", "saw_unknown", "sig", "formula",
                 "on_spine")

    def __init__(self, children, sig, formula, on_spine):
        self.children = children
        self.idx = 0
        self.sat = False
        self.saw_unknown = False
        self.sig = sig            # size signature under which the node was
        self.formula = formula    # registered for ancestor-repeat checks
        self.on_spine = on_spine


class _Search:
    """Shared state for one split_equations call (all root choices)."""

    def __init__(self, f: Formula, cfg: SolveConfig, scorer: Scorer | None):
        self.cfg = cfg
        self.scorer = scorer
        self.ctx = RankContext(rng=random.Random(cfg.random_seed),
                               params=cfg.rank_params)
        self.fresh = FreshVars.for_formula(f)
        self.deadline = time.monotonic() + cfg.timeout_seconds
        self.splits = 0
        self.aborted = False
        self.snapshot_budget = SNAPSHOT_CAP
        self.witness_vars = sorted(f.variables_in_use(), reverse=True)

    def _out_of_budget(self) -> bool:
        # Checked before every split: formulas can grow along a branch, so
        # any fixed split-count granularity risks unbounded staleness.
        if self.aborted:
            return True
        cfg = self.cfg
        if cfg.max_splits is not None and self.splits >= cfg.max_splits:
            self.aborted = True
        elif time.monotonic() > self.deadline:
            self.aborted = True
        return self.aborted

    def dfs(self, root: Formula, pinned: RankSnapshot | None,
            record_spine: bool) -> tuple[Status, dict | None, int, list[RankSnapshot]]:
        """One depth-first solve. Returns (status, witness, nodes, spine)."""
        cfg = self.cfg
        cycle_check = cfg.ancestor_cycle_check
        nodes = 0
        # ancestor formulas on the current path, grouped by a cheap size
        # signature; full canonical comparison runs only on signature hits
        path_sigs: dict[tuple, list[Formula]] = {}
        path_subs: list[Mapping[int, tuple[int, ...]]] = []
        spine: list[RankSnapshot] = [pinned] if (pinned and record_spine) else []
        witness: dict | None = None

        def enter(formula: Formula, on_spine: bool, is_root: bool):
            """Process one node; returns (status, None) or (None, frame)."""
            nonlocal nodes, witness
            nodes += 1
            if self.aborted:
                return Status.UNKNOWN, None
            reduced, st = simplify_and_check(formula)
            if st is not Status.UNKNOWN:
                if st is Status.SAT and witness is None:
                    witness = reconstruct_witness(self.witness_vars, path_subs)
                return st, None
            eqs = reduced.equations
            total = 0
            for e in eqs:
                total += e.length
            if total > cfg.max_formula_terms:
                return Status.UNKNOWN, None
            sig = None
            if cycle_check:
                sig = (len(eqs), total, eqs[0].length)
                cands = path_sigs.get(sig)
                if cands:
                    mine = canonical_form(reduced)
                    for anc in cands[-8:]:
                        if canonical_form(anc) == mine:
                            return Status.UNKNOWN, None
            if is_root and pinned is not None:
                # the pinned ordering IS this node's ranking decision
                self.ctx.rank_calls += 1
                ranked = reduced
            else:
                ranked = rank_eqs(reduced, cfg.strategy, self.ctx, self.scorer)
                if record_spine and on_spine and self.snapshot_budget > 0:
                    first = ranked.equations[0]
                    arrived = reduced.equations
                    chosen = next(i for i, e in enumerate(arrived) if e is first)
                    spine.append(RankSnapshot(arrived, chosen))
                    self.snapshot_budget -= 1
            if self._out_of_budget():
                return Status.UNKNOWN, None
            self.splits += 1
            out = apply_rules(ranked, self.fresh, cfg.suffix_rules)
            if out.is_terminal:
                if out.terminal is Status.SAT and witness is None:
                    witness = reconstruct_witness(self.witness_vars, path_subs)
                return out.terminal, None
            if sig is not None:
                path_sigs.setdefault(sig, []).append(reduced)
            return None, _Frame(out.children, sig, reduced, on_spine)

        st, frame = enter(root, True, True)
        if frame is None:
            return st, witness if st is Status.SAT else None, nodes, spine

        stack = [frame]
        final = Status.UNKNOWN
        while stack:
            fr = stack[-1]
            if fr.sat or fr.idx >= len(fr.children):
                if fr.sat:
                    st = Status.SAT
                elif fr.saw_unknown:
                    st = Status.UNKNOWN
                else:
                    st = Status.UNSAT
                if fr.sig is not None:
                    lst = path_sigs[fr.sig]
                    lst.pop()
                    if not lst:
                        del path_sigs[fr.sig]
                stack.pop()
                if stack:
                    parent = stack[-1]
                    path_subs.pop()
                    if st is Status.SAT:
                        parent.sat = True
                    elif st is Status.UNKNOWN:
                        parent.saw_unknown = True
                else:
                    final = st
                continue

            i = fr.idx
            fr.idx += 1
            child_formula, sub = fr.children[i]
            path_subs.append(sub)
            st, child = enter(child_formula, fr.on_spine and i == 0, False)
            if child is None:
                path_subs.pop()
                if st is Status.SAT:
                    fr.sat = True
                elif st is Status.UNKNOWN:
                    fr.saw_unknown = True
            else:
                stack.append(child)

        return final, witness if final is Status.SAT else None, nodes, spine


def _wrap_model(model: object | None) -> Scorer | None:
    if model is None or callable(model):
        return model
    from .gcn import ModelWeights, make_scorer
    if isinstance(model, ModelWeights):
        return make_scorer(model)
    raise ConfigError(f"unusable model object {type(model).__name__}")


def split_equations(f: Formula, cfg: SolveConfig | None = None) -> SolveResult:
    """Decide satisfiability of ``f`` under ``cfg``; UNKNOWN on budget
    exhaustion. SAT results carry a witness substitution over the variables
    occurring in ``f``."""
    cfg = cfg or SolveConfig()
    cfg.validate()
    scorer = _wrap_model(cfg.model)
    start = time.monotonic()
    search = _Search(f, cfg, scorer)

    reduced, st = simplify_and_check(f)
    if st is not Status.UNKNOWN:
        witness = None
        if st is Status.SAT:
            witness = {v: () for v in search.witness_vars}
        tree = DecisionTree(reduced.equations, [], f.table) if cfg.record_tree else None
        return SolveResult(st, 0, 0, 0, time.monotonic() - start,
                           witness=witness, tree=tree)

    if not cfg.record_tree:
        status, witness, _, _ = search.dfs(reduced, None, False)
        return SolveResult(status, search.splits, search.ctx.rank_calls,
                           search.ctx.gnn_calls, time.monotonic() - start,
                           witness=witness)

    conjuncts = reduced.equations
    choices: list[ChoiceRecord] = []
    overall = Status.UNKNOWN
    witness = None
    for i in range(len(conjuncts)):
        pinned_eqs = (conjuncts[i],) + conjuncts[:i] + conjuncts[i + 1:]
        pinned = RankSnapshot(conjuncts, i)
        st_i, wit_i, nodes_i, spine_i = search.dfs(reduced.replace(pinned_eqs),
                                                   pinned, True)
        choices.append(ChoiceRecord(i, st_i, nodes_i, spine_i))
        if st_i is Status.SAT:
            overall = Status.SAT
            witness = wit_i
            break
        if st_i is Status.UNSAT:
            overall = Status.UNSAT
    tree = DecisionTree(conjuncts, choices, f.table)
    return SolveResult(overall, search.splits, search.ctx.rank_calls,
                       search.ctx.gnn_calls, time.monotonic() - start,
                       witness=witness, tree=tree)


def shortest_unsat_path(tree: DecisionTree) -> list[RankSnapshot]:
    """Rank-point snapshots along the smallest UNSAT root choice's leftmost
    spine. Errors unless some root choice was proved UNSAT."""
    unsat = [c for c in tree.choices if c.status is Status.UNSAT]
    if not unsat:
        raise ValueError("decision tree has no UNSAT root choice")
    best = min(unsat, key=lambda c: (c.nodes, c.choice))
    return best.spine
