"""Inference rules over the leftmost equation of a conjunction.

Exactly one rule fires for any formula that survives simplify_and_check with
UNKNOWN status. Branching rules substitute into the ENTIRE remaining formula,
since variables recur across conjuncts. The empty-side rules always work on
the first terms; the letter/variable rules switch to last-term (suffix) forms
when requested.

Branch orders are frozen: R7 tries the empty assignment first, R8 tries
"lhs-head extends rhs-head", then the converse, then equality. Identical
inputs always produce identical outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .terms import Eq, Formula, Status, subst_eq, subst_eq_single, subst_word


class RuleId(NamedTuple):
    rule: int            # 1..9 (0 marks the empty-vs-letter closure)
    suffix: bool = False
    symmetric: bool = False

    def __str__(self) -> str:
        name = "R4'" if self.rule == 0 else f"R{self.rule}"
        if self.suffix:
            name += "-suffix"
        if self.symmetric:
            name += "-sym"
        return name


Substitution = dict[int, tuple[int, ...]]
Child = tuple[Formula, Substitution]


@dataclass(frozen=True)
class BranchOutcome:
    """Result of matching the leftmost equation: a terminal status or an
    ordered list of child formulas with the substitution that produced each."""

    rule: RuleId
    terminal: Status | None = None
    children: tuple[Child, ...] = ()

    @property
    def is_terminal(self) -> bool:
        return self.terminal is not None


class FreshVars:
    """Allocates variable ids guaranteed absent from the problem so far."""

    def __init__(self, below: int):
        self._next = below - 1

    @classmethod
    def for_formula(cls, f: Formula) -> "FreshVars":
        low = f.table.min_variable_id()
        for eq in f.equations:
            for v in eq.var_seq:
                if v < low:
                    low = v
        return cls(low)

    def take(self) -> int:
        v = self._next
        self._next -= 1
        return v


def simplify_and_check(f: Formula) -> tuple[Formula, Status]:
    """Drop conjuncts with syntactically identical sides, then decide what
    can be decided for free.

    SAT when nothing remains; UNSAT when any remaining conjunct is trivially
    unsatisfiable (ground and unequal, or one side empty while the other
    contains a letter). Deliberately nothing smarter: no length or
    letter-count filters.
    """
    kept = [eq for eq in f.equations if not eq.sides_equal]
    if not kept:
        return f.replace(()), Status.SAT
    for eq in kept:
        if eq.trivially_unsat:
            return f.replace(kept), Status.UNSAT
    if len(kept) == len(f.equations):
        return f, Status.UNKNOWN
    return f.replace(kept), Status.UNKNOWN


def _child(f: Formula, first: tuple[Eq, ...], rest: tuple[Eq, ...],
           sub: Substitution) -> Child:
    if not sub:
        tail = rest
    elif len(sub) == 1:
        # every rule substitutes at most one variable; keep this path lean
        (var, repl), = sub.items()
        tail = tuple(subst_eq_single(eq, var, repl) for eq in rest)
    else:
        tail = tuple(subst_eq(eq, sub) for eq in rest)
    return f.replace(first + tail), sub


def apply_rules(f: Formula, fresh: FreshVars | None = None,
                suffix: bool = False) -> BranchOutcome:
    """Match and apply the one rule the leftmost equation admits.

    ``fresh`` supplies ids for the variables R7/R8 introduce; when omitted a
    throwaway allocator is derived from the formula. ``suffix`` switches the
    letter/variable rules to operate on last terms.
    """
    eqs = f.equations
    if not eqs:
        return BranchOutcome(RuleId(1), terminal=Status.SAT)
    if fresh is None:
        fresh = FreshVars.for_formula(f)

    eq = eqs[0]
    rest = eqs[1:]
    lhs, rhs = eq.lhs, eq.rhs
    tok = eq.token

    if not lhs and not rhs:
        return BranchOutcome(RuleId(2), children=(_child(f, (), rest, {}),))

    if not lhs or not rhs:
        # Empty-side group; first-term oriented regardless of suffix mode.
        sym = not lhs
        w = rhs if sym else lhs
        head = w[0]
        if head >= 0:
            return BranchOutcome(RuleId(0, symmetric=sym), terminal=Status.UNSAT)
        sub: Substitution = {head: ()}
        if len(w) == 1:
            return BranchOutcome(RuleId(4, symmetric=sym),
                                 children=(_child(f, (), rest, sub),))
        u = subst_word(w[1:], sub)
        first = Eq((), u, tok) if sym else Eq(u, (), tok)
        return BranchOutcome(RuleId(3, symmetric=sym),
                             children=(_child(f, (first,), rest, sub),))

    if suffix:
        return _apply_last(f, eq, rest, fresh)
    return _apply_first(f, eq, rest, fresh)


def _apply_first(f: Formula, eq: Eq, rest: tuple[Eq, ...],
                 fresh: FreshVars) -> BranchOutcome:
    lhs, rhs, tok = eq.lhs, eq.rhs, eq.token
    h1, h2 = lhs[0], rhs[0]
    u, v = lhs[1:], rhs[1:]

    if h1 >= 0 and h2 >= 0:
        if h1 != h2:
            return BranchOutcome(RuleId(6), terminal=Status.UNSAT)
        return BranchOutcome(RuleId(5),
                             children=(_child(f, (Eq(u, v, tok),), rest, {}),))

    if h1 < 0 and h2 < 0:
        if h1 == h2:
            return BranchOutcome(RuleId(9),
                                 children=(_child(f, (Eq(u, v, tok),), rest, {}),))
        x, y = h1, h2
        xp, yp = fresh.take(), fresh.take()
        s1: Substitution = {x: (y, xp)}
        c1 = _child(f, (Eq((xp,) + subst_word(u, s1), subst_word(v, s1), tok),),
                    rest, s1)
        s2: Substitution = {y: (x, yp)}
        c2 = _child(f, (Eq(subst_word(u, s2), (yp,) + subst_word(v, s2), tok),),
                    rest, s2)
        s3: Substitution = {x: (y,)}
        c3 = _child(f, (Eq(subst_word(u, s3), subst_word(v, s3), tok),), rest, s3)
        return BranchOutcome(RuleId(8), children=(c1, c2, c3))

    # One variable head, one letter head.
    sym = h1 >= 0
    x, a = (h2, h1) if sym else (h1, h2)
    s1 = {x: ()}
    s2 = {x: (a, fresh.take())}
    xp = s2[x][1]
    if sym:
        c1 = _child(f, (Eq((a,) + subst_word(u, s1), subst_word(v, s1), tok),),
                    rest, s1)
        c2 = _child(f, (Eq(subst_word(u, s2), (xp,) + subst_word(v, s2), tok),),
                    rest, s2)
    else:
        c1 = _child(f, (Eq(subst_word(u, s1), (a,) + subst_word(v, s1), tok),),
                    rest, s1)
        c2 = _child(f, (Eq((xp,) + subst_word(u, s2), subst_word(v, s2), tok),),
                    rest, s2)
    return BranchOutcome(RuleId(7, symmetric=sym), children=(c1, c2))


def _apply_last(f: Formula, eq: Eq, rest: tuple[Eq, ...],
                fresh: FreshVars) -> BranchOutcome:
    lhs, rhs, tok = eq.lhs, eq.rhs, eq.token
    t1, t2 = lhs[-1], rhs[-1]
    u, v = lhs[:-1], rhs[:-1]

    if t1 >= 0 and t2 >= 0:
        if t1 != t2:
            return BranchOutcome(RuleId(6, suffix=True), terminal=Status.UNSAT)
        return BranchOutcome(RuleId(5, suffix=True),
                             children=(_child(f, (Eq(u, v, tok),), rest, {}),))

    if t1 < 0 and t2 < 0:
        if t1 == t2:
            return BranchOutcome(RuleId(9, suffix=True),
                                 children=(_child(f, (Eq(u, v, tok),), rest, {}),))
        x, y = t1, t2
        xp, yp = fresh.take(), fresh.take()
        s1: Substitution = {x: (xp, y)}
        c1 = _child(f, (Eq(subst_word(u, s1) + (xp,), subst_word(v, s1), tok),),
                    rest, s1)
        s2: Substitution = {y: (yp, x)}
        c2 = _child(f, (Eq(subst_word(u, s2), subst_word(v, s2) + (yp,), tok),),
                    rest, s2)
        s3: Substitution = {x: (y,)}
        c3 = _child(f, (Eq(subst_word(u, s3), subst_word(v, s3), tok),), rest, s3)
        return BranchOutcome(RuleId(8, suffix=True), children=(c1, c2, c3))

    sym = t1 >= 0
    x, a = (t2, t1) if sym else (t1, t2)
    s1 = {x: ()}
    s2 = {x: (fresh.take(), a)}
    xp = s2[x][0]
    if sym:
        c1 = _child(f, (Eq(subst_word(u, s1) + (a,), subst_word(v, s1), tok),),
                    rest, s1)
        c2 = _child(f, (Eq(subst_word(u, s2), subst_word(v, s2) + (xp,), tok),),
                    rest, s2)
    else:
        c1 = _child(f, (Eq(subst_word(u, s1), subst_word(v, s1) + (a,), tok),),
                    rest, s1)
        c2 = _child(f, (Eq(subst_word(u, s2) + (xp,), subst_word(v, s2), tok),),
                    rest, s2)
    return BranchOutcome(RuleId(7, suffix=True, symmetric=sym), children=(c1, c2))
