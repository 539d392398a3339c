"""Seeded benchmark generators.

Families A1/A2 grow an equation from a ground identity ``s = s`` by
repeatedly replacing a random substring on one side with a run of fresh
variables, which keeps every equation linear. Family B draws replacement
variables from the pool with repetition (non-linear equations possible).
Family C plants a fixed highly non-linear template and pads it with
A1-style conjuncts.

Everything is a pure function of (preset, seed); generated files are
byte-identical across runs.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .terms import Eq, Formula, SymbolTable


@dataclass(frozen=True)
class GenParams:
    alphabet_size: int
    variable_pool: int
    max_base_length: int
    replacements: tuple[int, int]          # how many substring replacements
    replacement_width: tuple[int, int]     # variables inserted per replacement
    equations_per_problem: tuple[int, int]
    fresh_variables: bool


PRESETS: dict[str, GenParams] = {
    "a1": GenParams(6, 10, 60, (0, 5), (1, 5), (1, 100), True),
    "a2": GenParams(26, 100, 60, (0, 16), (1, 1), (1, 100), True),
    "b": GenParams(10, 10, 50, (0, 5), (1, 1), (2, 50), False),
}

TEMPLATE_SIZE_RANGE = (1, 10)   # benchmark C template depth
MAX_CONJUNCTS_C = 100


def letter_name(i: int) -> str:
    if i < 26:
        return string.ascii_lowercase[i]
    return f"a{i}"


def make_table(alphabet_size: int, variable_pool: int) -> SymbolTable:
    table = SymbolTable()
    for i in range(variable_pool):
        table.add_variable(f"X{i}")
    for i in range(alphabet_size):
        table.add_letter(letter_name(i))
    return table


def _pick_span(rng: random.Random, k: int) -> tuple[int, int]:
    """Uniform over (start, length >= 1) pairs with start + length <= k."""
    r = rng.randrange(k * (k + 1) // 2)
    for start in range(k):
        cnt = k - start
        if r < cnt:
            return start, r + 1
        r -= cnt
    raise AssertionError("unreachable")


def gen_equation_a(params: GenParams, rng: random.Random,
                   letters: tuple[int, ...], pool: tuple[int, ...],
                   token: int = 0) -> Eq:
    """One equation of the s = s family under the given replacement policy."""
    base = [rng.choice(letters) for _ in range(rng.randint(1, params.max_base_length))]
    sides = [list(base), list(base)]
    used: set[int] = set()
    for _ in range(rng.randint(*params.replacements)):
        m = rng.randint(*params.replacement_width)
        if params.fresh_variables:
            avail = [v for v in pool if v not in used]
            if len(avail) < m:
                break
            repl = rng.sample(avail, m)
            used.update(repl)
        else:
            repl = [rng.choice(pool) for _ in range(m)]
        side = sides[rng.randrange(2)]
        start, length = _pick_span(rng, len(side))
        side[start:start + length] = repl
    return Eq(tuple(sides[0]), tuple(sides[1]), token)


def gen_problem(benchmark: str, seed: int) -> Formula:
    """A conjunctive problem from preset a1, a2, or b."""
    params = PRESETS[benchmark]
    rng = random.Random(seed)
    table = make_table(params.alphabet_size, params.variable_pool)
    letters, pool = table.letters, table.variables
    k = rng.randint(*params.equations_per_problem)
    eqs = [gen_equation_a(params, rng, letters, pool, token=i) for i in range(k)]
    return Formula(eqs, table)


def _template_sides(vars_: list[int], a: int, b: int) -> tuple[list, list]:
    # X_n a X_n b X_{n-1} ... b X_1  =  a X_n X_{n-1} X_{n-1} b ... X_1 X_1 b a a
    n = len(vars_)
    xn = vars_[n - 1]
    lhs = [xn, a, xn]
    rhs = [a, xn]
    for i in range(n - 1, 0, -1):
        xi = vars_[i - 1]
        lhs.extend([b, xi])
        rhs.extend([xi, xi, b])
    rhs.extend([a, a])
    return lhs, rhs


def gen_problem_c(seed: int) -> Formula:
    """Highly non-linear problems: the planted template with every ``b``
    replaced by one side of an A1-style equation, plus A1-style padding."""
    params = PRESETS["a1"]
    rng = random.Random(seed)
    n = rng.randint(*TEMPLATE_SIZE_RANGE)

    table = SymbolTable()
    template_vars = [table.add_variable(f"X{i}") for i in range(n)]
    pool = tuple(table.add_variable(f"X{n + i}") for i in range(params.variable_pool))
    letters = tuple(table.add_letter(letter_name(i)) for i in range(params.alphabet_size))
    a, b = letters[0], letters[1]

    lhs_t, rhs_t = _template_sides(template_vars, a, b)
    sides = []
    for side in (lhs_t, rhs_t):
        out: list[int] = []
        for t in side:
            if t == b:
                filler = gen_equation_a(params, rng, letters, pool)
                out.extend(filler.lhs if rng.random() < 0.5 else filler.rhs)
            else:
                out.append(t)
        sides.append(tuple(out))
    eqs = [Eq(sides[0], sides[1], token=0)]

    extra = min(rng.randint(*params.equations_per_problem), MAX_CONJUNCTS_C - 1)
    for i in range(extra):
        eqs.append(gen_equation_a(params, rng, letters, pool, token=i + 1))
    return Formula(eqs, table)


def generate(benchmark: str, seed: int) -> Formula:
    benchmark = benchmark.lower()
    if benchmark == "c":
        return gen_problem_c(seed)
    if benchmark in PRESETS:
        return gen_problem(benchmark, seed)
    raise ValueError(f"unknown benchmark {benchmark!r}")


def problem_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index
