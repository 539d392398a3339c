"""Terms, words, equations, conjunctive formulas, and the textual problem format.

Symbols are interned per problem: letters get ids 0, 1, 2, ... and variables
get ids -1, -2, -3, ... so a term's kind is just a sign test. Words are plain
tuples of term ids. Equations precompute everything the search loop keeps
asking for (length, baseline priority, triviality flags, a rename-insensitive
hash) so that ranking and simplification never rescan term sequences.

All values are immutable after construction; rewriting produces new objects
and shares untouched ones.
"""

from __future__ import annotations

import enum
from itertools import chain
from typing import Iterable, Iterator, Mapping


def is_variable(term: int) -> bool:
    return term < 0


def is_letter(term: int) -> bool:
    return term >= 0


class ParseError(ValueError):
    """Problem-format syntax or declaration error, with 1-based position."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class SymbolTable:
    """Bidirectional mapping between display names and interned term ids.

    Letters and variables live in disjoint id spaces (non-negative vs
    negative). Insertion order is preserved; serialization relies on it.
    """

    def __init__(self):
        self._letter_ids: dict[str, int] = {}
        self._var_ids: dict[str, int] = {}
        self._letter_names: list[str] = []
        self._var_names: list[str] = []

    def add_letter(self, name: str) -> int:
        if name in self._letter_ids:
            raise ValueError(f"duplicate terminal {name!r}")
        if name in self._var_ids:
            raise ValueError(f"{name!r} already declared as a variable")
        lid = len(self._letter_names)
        self._letter_ids[name] = lid
        self._letter_names.append(name)
        return lid

    def add_variable(self, name: str) -> int:
        if name in self._var_ids:
            raise ValueError(f"duplicate variable {name!r}")
        if name in self._letter_ids:
            raise ValueError(f"{name!r} already declared as a terminal")
        vid = -(len(self._var_names) + 1)
        self._var_ids[name] = vid
        self._var_names.append(name)
        return vid

    def lookup(self, name: str) -> int | None:
        hit = self._letter_ids.get(name)
        if hit is not None:
            return hit
        return self._var_ids.get(name)

    def display(self, term: int) -> str:
        if term >= 0:
            if term < len(self._letter_names):
                return self._letter_names[term]
            return f"_t{term}"
        idx = -term - 1
        if idx < len(self._var_names):
            return self._var_names[idx]
        # fresh variable introduced during search, never declared
        return f"_X{idx}"

    @property
    def letter_names(self) -> tuple[str, ...]:
        return tuple(self._letter_names)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(self._var_names)

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(range(len(self._letter_names)))

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(-(i + 1) for i in range(len(self._var_names)))

    def min_variable_id(self) -> int:
        return -len(self._var_names)


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


class Eq:
    """One word equation. Immutable; rank-relevant facts are precomputed
    with C-level primitives because the search loop constructs these in bulk.

    ``token`` is the stability ordinal: assigned at parse/creation time and
    inherited by equations that rule applications derive from this one.
    """

    __slots__ = (
        "lhs",
        "rhs",
        "token",
        "length",
        "priority",
        "sides_equal",
        "trivially_unsat",
        "_var_seq",
    )

    def __init__(self, lhs: tuple[int, ...], rhs: tuple[int, ...], token: int = 0):
        self.lhs = lhs
        self.rhs = rhs
        self.token = token
        self.length = len(lhs) + len(rhs)
        self.sides_equal = equal = lhs == rhs
        self._var_seq = None

        # Letters are >= 0 and variables < 0, so min/max classify a side.
        if equal:
            self.trivially_unsat = False
        elif not lhs:
            self.trivially_unsat = max(rhs) >= 0    # eps vs word with a letter
        elif not rhs:
            self.trivially_unsat = max(lhs) >= 0
        else:
            # ground (variable-free) and, being unequal, unsatisfiable
            self.trivially_unsat = min(lhs) >= 0 and min(rhs) >= 0

        # Baseline priority ladder; smaller = handled earlier by the search.
        if not lhs and not rhs:
            prio = 1
        elif not lhs or not rhs:
            prio = 2
        else:
            h1, h2, t1, t2 = lhs[0], rhs[0], lhs[-1], rhs[-1]
            if h1 >= 0 and h2 >= 0 and h1 != h2:
                prio = 3
            elif t1 >= 0 and t2 >= 0 and t1 != t2:
                prio = 3
            elif h1 >= 0 and h1 == h2:
                prio = 4
            else:
                prio = 5
        self.priority = prio

    @property
    def var_seq(self) -> tuple[int, ...]:
        """Variable occurrences in order, lhs then rhs (lazy, cached)."""
        vs = self._var_seq
        if vs is None:
            vs = tuple(t for t in self.lhs + self.rhs if t < 0)
            self._var_seq = vs
        return vs

    def with_token(self, token: int) -> "Eq":
        return Eq(self.lhs, self.rhs, token)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Eq):
            return NotImplemented
        return self.lhs == other.lhs and self.rhs == other.rhs

    def __hash__(self) -> int:
        return hash((self.lhs, self.rhs))

    def __repr__(self) -> str:
        return f"Eq({self.lhs} = {self.rhs})"


class Formula:
    """Ordered conjunction of word equations plus the problem's symbol table.

    Order is operationally significant (the leftmost equation is processed)
    but semantically the equations are a conjunction.
    """

    __slots__ = ("equations", "table", "_canon")

    def __init__(self, equations: Iterable[Eq], table: SymbolTable):
        self.equations = tuple(equations)
        self.table = table
        self._canon = None

    def __len__(self) -> int:
        return len(self.equations)

    def __iter__(self) -> Iterator[Eq]:
        return iter(self.equations)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        if self.equations != other.equations:
            return False
        return (
            self.table.letter_names == other.table.letter_names
            and self.table.variable_names == other.table.variable_names
        )

    def __repr__(self) -> str:
        return f"Formula({format_formula(self)!r})"

    def replace(self, equations: Iterable[Eq]) -> "Formula":
        return Formula(equations, self.table)

    @property
    def alphabet(self) -> tuple[int, ...]:
        return self.table.letters

    @property
    def variables(self) -> tuple[int, ...]:
        return self.table.variables

    def variables_in_use(self) -> set[int]:
        used: set[int] = set()
        for eq in self.equations:
            used.update(eq.var_seq)
        return used


def canonical_form(f: Formula) -> tuple:
    """The conjunction with variables renamed in first-occurrence order.

    Two formulas have equal canonical forms iff one is the other under a
    global variable renaming; used to recognize repeated proof states.
    Cached on the formula (computed only when a cheap size signature
    already matched an ancestor).
    """
    canon = f._canon
    if canon is not None:
        return canon
    ren: dict[int, int] = {}
    out = []
    for eq in f.equations:
        sides = []
        for w in (eq.lhs, eq.rhs):
            ww = []
            for t in w:
                if t < 0:
                    r = ren.get(t)
                    if r is None:
                        r = -(len(ren) + 1)
                        ren[t] = r
                    ww.append(r)
                else:
                    ww.append(t)
            sides.append(tuple(ww))
        out.append((sides[0], sides[1]))
    canon = tuple(out)
    f._canon = canon
    return canon


# ---------------------------------------------------------------------------
# Substitutions


def splice_word(word: tuple[int, ...], var: int,
                repl: tuple[int, ...]) -> tuple[int, ...]:
    """Replace every occurrence of one variable; word must contain it."""
    i = word.index(var)
    try:
        j = word.index(var, i + 1)
    except ValueError:
        return word[:i] + repl + word[i + 1:]
    parts = [word[:i], repl]
    start = i + 1
    while True:
        parts.append(word[start:j])
        parts.append(repl)
        start = j + 1
        try:
            j = word.index(var, start)
        except ValueError:
            break
    parts.append(word[start:])
    return tuple(chain.from_iterable(parts))


def subst_word(word: tuple[int, ...], sub: Mapping[int, tuple[int, ...]]) -> tuple[int, ...]:
    """Replace every occurrence of the mapped variables; shares the input
    tuple when nothing matches."""
    if len(sub) == 1:
        (var, repl), = sub.items()
        if var not in word:
            return word
        return splice_word(word, var, repl)
    hit = False
    for t in word:
        if t in sub:
            hit = True
            break
    if not hit:
        return word
    out: list[int] = []
    for t in word:
        repl = sub.get(t)
        if repl is None:
            out.append(t)
        else:
            out.extend(repl)
    return tuple(out)


def subst_eq_single(eq: Eq, var: int, repl: tuple[int, ...]) -> Eq:
    """Single-variable substitution; the search's hot path."""
    lhs, rhs = eq.lhs, eq.rhs
    in_l = var in lhs
    in_r = var in rhs
    if not in_l and not in_r:
        return eq
    if in_l:
        lhs = splice_word(lhs, var, repl)
    if in_r:
        rhs = splice_word(rhs, var, repl)
    return Eq(lhs, rhs, eq.token)


def subst_eq(eq: Eq, sub: Mapping[int, tuple[int, ...]]) -> Eq:
    if len(sub) == 1:
        (var, repl), = sub.items()
        return subst_eq_single(eq, var, repl)
    lhs = subst_word(eq.lhs, sub)
    rhs = subst_word(eq.rhs, sub)
    if lhs is eq.lhs and rhs is eq.rhs:
        return eq
    return Eq(lhs, rhs, eq.token)


def apply_substitution(f: Formula, sub: Mapping[int, tuple[int, ...]]) -> Formula:
    """Apply a variable->word substitution to every conjunct of ``f``.

    Unmapped variables are untouched; equation order and tokens survive.
    """
    if not sub:
        return f
    return f.replace(subst_eq(eq, sub) for eq in f.equations)


def check_witness(f: Formula, sub: Mapping[int, tuple[int, ...]]) -> bool:
    """True iff substituting makes both sides of every conjunct identical.

    ``sub`` must map every variable occurring in ``f`` to a variable-free
    word; anything else is an error rather than a False.
    """
    occurring = f.variables_in_use()
    for v in occurring:
        if v not in sub:
            raise ValueError(f"witness does not map variable {f.table.display(v)}")
    for v, w in sub.items():
        for t in w:
            if t < 0:
                raise ValueError(
                    f"witness maps {f.table.display(v)} to a word containing variables"
                )
    for eq in f.equations:
        if subst_word(eq.lhs, sub) != subst_word(eq.rhs, sub):
            return False
    return True


def is_linear(eq: Eq) -> bool:
    """True iff no variable occurs twice in the equation (both sides counted)."""
    return len(set(eq.var_seq)) == len(eq.var_seq)


# ---------------------------------------------------------------------------
# Problem format
#
# Line 1: ``Variables {A,B,...}``   line 2: ``Terminals {a,b,...}`` then one
# or more ``Equation: <lhs> = <rhs>`` lines with whitespace-separated tokens.
# Lines starting with ``#`` are comments. An empty side is written as nothing.


def _parse_braced(line: str, keyword: str, lineno: int) -> list[str]:
    stripped = line.strip()
    if not stripped.startswith(keyword):
        raise ParseError(f"expected {keyword!r} declaration", lineno)
    rest = stripped[len(keyword):].strip()
    if not (rest.startswith("{") and rest.endswith("}")):
        raise ParseError(f"expected braced list after {keyword!r}", lineno,
                         line.find(keyword) + len(keyword) + 1)
    inner = rest[1:-1].strip()
    if not inner:
        return []
    names = [n.strip() for n in inner.split(",")]
    for n in names:
        if not n or any(c in n for c in "{}, \t") or n == "=":
            raise ParseError(f"bad identifier {n!r}", lineno)
    return names


def parse_problem(text: str) -> Formula:
    """Parse the textual problem format into a Formula.

    Raises ParseError for syntax errors, undeclared symbols, and duplicate
    declarations; positions are 1-based.
    """
    table = SymbolTable()
    lines = text.splitlines()
    content = [
        (i + 1, ln) for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if len(content) < 3:
        raise ParseError("expected Variables, Terminals, and at least one Equation",
                         len(lines) + 1)

    lineno, line = content[0]
    try:
        for name in _parse_braced(line, "Variables", lineno):
            table.add_variable(name)
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), lineno) from None

    lineno, line = content[1]
    try:
        for name in _parse_braced(line, "Terminals", lineno):
            table.add_letter(name)
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), lineno) from None

    equations: list[Eq] = []
    for lineno, line in content[2:]:
        stripped = line.strip()
        if not stripped.startswith("Equation:"):
            raise ParseError("expected 'Equation:' line", lineno)
        body = stripped[len("Equation:"):]
        tokens = body.split()
        if tokens.count("=") != 1:
            raise ParseError("equation needs exactly one '=' separator", lineno,
                             line.find("Equation:") + len("Equation:") + 1)
        sep = tokens.index("=")
        sides = []
        for toks in (tokens[:sep], tokens[sep + 1:]):
            terms = []
            for tok in toks:
                tid = table.lookup(tok)
                if tid is None:
                    raise ParseError(f"undeclared symbol {tok!r}", lineno,
                                     line.find(tok) + 1)
                terms.append(tid)
            sides.append(tuple(terms))
        equations.append(Eq(sides[0], sides[1], token=len(equations)))

    return Formula(equations, table)


def serialize_problem(f: Formula) -> str:
    """Inverse of parse_problem on canonically formatted input."""
    table = f.table
    out = [
        "Variables {" + ",".join(table.variable_names) + "}",
        "Terminals {" + ",".join(table.letter_names) + "}",
    ]
    for eq in f.equations:
        lhs = " ".join(table.display(t) for t in eq.lhs)
        rhs = " ".join(table.display(t) for t in eq.rhs)
        out.append(("Equation: " + lhs + " = " + rhs).rstrip())
    return "\n".join(out) + "\n"


def format_word(word: tuple[int, ...], table: SymbolTable) -> str:
    if not word:
        return '""'
    return "".join(table.display(t) for t in word)


def format_eq(eq: Eq, table: SymbolTable) -> str:
    return f"{format_word(eq.lhs, table)} = {format_word(eq.rhs, table)}"


def format_formula(f: Formula) -> str:
    return " /\\ ".join(format_eq(eq, f.table) for eq in f.equations)
