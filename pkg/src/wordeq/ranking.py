"""Conjunct-ordering strategies for the split search.

RE1 is the deterministic baseline: priority classes 1..4 (decided-soon
shapes) go first, ordered by length, and the residual priority-5 block keeps
its stable token order. RE2 randomizes the block. RE3..RE7 hand the block to
a trained scorer under different invocation policies, trading guidance
against model overhead.

Only the priority-5 block ever differs between strategies; everything ranked
1..4 is ordered exactly as RE1 orders it.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from operator import attrgetter
from typing import Callable, Sequence

from .terms import Eq, Formula


class ConfigError(ValueError):
    """Strategy/configuration mismatch (e.g. a model-backed strategy without
    a model)."""


class Strategy(enum.Enum):
    RE1 = "re1"
    RE2 = "re2"
    RE3 = "re3"
    RE4 = "re4"
    RE5 = "re5"
    RE6 = "re6"
    RE7 = "re7"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(f"unknown strategy {name!r}") from None

    @property
    def needs_model(self) -> bool:
        return self not in (Strategy.RE1, Strategy.RE2)


@dataclass
class RankParams:
    re4_probability: float = 0.5
    re6_period: int = 5000
    re7_threshold: int = 1000

    def validate(self) -> None:
        if not 0.0 <= self.re4_probability <= 1.0:
            raise ConfigError("re4 probability must be in [0,1]")
        if self.re6_period <= 0 or self.re7_threshold <= 0:
            raise ConfigError("strategy periods must be positive")


@dataclass
class RankContext:
    """Per-solve ranking state: call counters, the one-shot latch, and the
    stagnation tracker RE7 uses."""

    rng: random.Random = field(default_factory=lambda: random.Random(0))
    params: RankParams = field(default_factory=RankParams)
    rank_calls: int = 0
    gnn_calls: int = 0
    gnn_used_once: bool = False
    last_first_len: int | None = None
    stagnation: int = 0


# A scorer maps (whole formula, priority-5 block) to one score per block
# equation; higher scores rank earlier. Production scorers wrap the GCN
# runtime; tests inject plain callables.
Scorer = Callable[[Formula, Sequence[Eq]], Sequence[float]]


def priority_of(eq: Eq) -> int:
    """Baseline priority, 1 (handle first) .. 5 (no obvious progress)."""
    return eq.priority


_LOW_KEY = attrgetter("priority", "length", "token")
_TOKEN_KEY = attrgetter("token")


def _scored_order(f: Formula, block: list[Eq], ctx: RankContext,
                  scorer: Scorer) -> list[Eq]:
    ctx.gnn_calls += 1
    scores = scorer(f, block)
    if len(scores) != len(block):
        raise ValueError("scorer returned wrong number of scores")
    keyed = sorted(range(len(block)), key=lambda i: (-scores[i], block[i].token))
    return [block[i] for i in keyed]


def rank_eqs(f: Formula, strategy: Strategy, ctx: RankContext,
             scorer: Scorer | None = None) -> Formula:
    """Stable-reorder the conjuncts of ``f`` according to ``strategy``.

    Returns a permutation of the input equations. Mutates ``ctx`` counters.
    """
    if not f.equations:
        raise ValueError("rank_eqs requires at least one equation")
    if strategy.needs_model and scorer is None:
        raise ConfigError(f"strategy {strategy.value} requires a model")
    ctx.rank_calls += 1

    low = [e for e in f.equations if e.priority < 5]
    block = [e for e in f.equations if e.priority == 5]
    low.sort(key=_LOW_KEY)
    block.sort(key=_TOKEN_KEY)

    if len(block) >= 2:
        if strategy is Strategy.RE2:
            ctx.rng.shuffle(block)
        elif strategy is Strategy.RE3:
            block = _scored_order(f, block, ctx, scorer)
        elif strategy is Strategy.RE4:
            if ctx.rng.random() < ctx.params.re4_probability:
                block = _scored_order(f, block, ctx, scorer)
            else:
                ctx.rng.shuffle(block)
        elif strategy is Strategy.RE5:
            if not ctx.gnn_used_once:
                ctx.gnn_used_once = True
                block = _scored_order(f, block, ctx, scorer)
        elif strategy is Strategy.RE6:
            if ctx.rank_calls % ctx.params.re6_period == 0:
                block = _scored_order(f, block, ctx, scorer)
        elif strategy is Strategy.RE7:
            if ctx.stagnation >= ctx.params.re7_threshold:
                block = _scored_order(f, block, ctx, scorer)
                ctx.stagnation = 0

    ordered = low + block

    if strategy is Strategy.RE7:
        first_len = ordered[0].length
        if ctx.last_first_len is None or first_len < ctx.last_first_len:
            ctx.stagnation = 0
        else:
            ctx.stagnation += 1
        ctx.last_first_len = first_len

    return f.replace(ordered)
