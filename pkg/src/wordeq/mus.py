"""Minimal unsatisfiable subset extraction over conjunctive word equations.

Subsets are enumerated by increasing cardinality (lexicographic within a
cardinality), so the first unsatisfiable subset found is cardinality-minimal
and therefore an MUS. The satisfiability oracle is pluggable: the internal
split solver, or any external SMT solver reachable through a command
template consuming an SMT-LIB (QF_S) file.

Oracle UNKNOWNs on subsets are treated as not-UNSAT and counted; that can
only overreport MUS size, never produce a non-MUS answer for decided
subsets.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Protocol, Sequence

from .solver import SolveConfig, split_equations
from .terms import Formula, Status

DEFAULT_SUBSET_BUDGET = 1 << 16


# ---------------------------------------------------------------------------
# SMT-LIB emission


def _string_literal(text: str) -> str:
    return '"' + text.replace('"', '""') + '"'


def _side_sexpr(word, table) -> str:
    if not word:
        return '""'
    parts: list[str] = []
    run: list[str] = []
    for t in word:
        if t >= 0:
            run.append(table.display(t))
        else:
            if run:
                parts.append(_string_literal("".join(run)))
                run = []
            parts.append(table.display(t))
    if run:
        parts.append(_string_literal("".join(run)))
    if len(parts) == 1:
        return parts[0]
    return "(str.++ " + " ".join(parts) + ")"


def emit_smtlib(f: Formula) -> str:
    """Render the conjunction in SMT-LIB 2 string-theory syntax."""
    lines = ["(set-logic QF_S)"]
    for name in f.table.variable_names:
        lines.append(f"(declare-const {name} String)")
    for eq in f.equations:
        lhs = _side_sexpr(eq.lhs, f.table)
        rhs = _side_sexpr(eq.rhs, f.table)
        lines.append(f"(assert (= {lhs} {rhs}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Oracles


class SolverOracle(Protocol):
    def check(self, f: Formula) -> tuple[Status, float]: ...


def check_external(f: Formula, command_template: str,
                   timeout: float) -> tuple[Status, float]:
    """Run an external solver on the formula's SMT-LIB rendering.

    The template's ``{file}`` placeholder receives the temp-file path. The
    first stdout line decides: ``sat``/``unsat``; anything else (including a
    timeout kill) is UNKNOWN. Spawn failures propagate.
    """
    start = time.monotonic()
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(emit_smtlib(f))
        path = fh.name
    try:
        argv = [a.replace("{file}", path) for a in shlex.split(command_template)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            return Status.UNKNOWN, time.monotonic() - start
        first = proc.stdout.splitlines()[0].strip() if proc.stdout else ""
        elapsed = time.monotonic() - start
        if first == "sat":
            return Status.SAT, elapsed
        if first == "unsat":
            return Status.UNSAT, elapsed
        return Status.UNKNOWN, elapsed
    finally:
        Path(path).unlink(missing_ok=True)


@dataclass
class ExternalOracle:
    command: str                  # e.g. "z3 {file}"
    timeout: float = 10.0

    def check(self, f: Formula) -> tuple[Status, float]:
        return check_external(f, self.command, self.timeout)

    def __str__(self) -> str:
        return self.command


@dataclass
class InternalOracle:
    """The split solver as a satisfiability oracle, with tight budgets."""

    timeout: float = 5.0
    max_splits: int | None = 50_000

    def check(self, f: Formula) -> tuple[Status, float]:
        res = split_equations(f, SolveConfig(timeout_seconds=self.timeout,
                                             max_splits=self.max_splits))
        return res.status, res.elapsed

    def __str__(self) -> str:
        return "internal"


def select_fastest_oracle(f: Formula, oracles: Sequence[SolverOracle]
                          ) -> tuple[SolverOracle | None, list[tuple[Status, float]]]:
    """Run every oracle on the full formula; return the fastest UNSAT
    responder (None if nobody proves UNSAT) plus all verdicts."""
    results = [oracle.check(f) for oracle in oracles]
    best = None
    best_time = None
    for oracle, (status, elapsed) in zip(oracles, results):
        if status is Status.UNSAT and (best_time is None or elapsed < best_time):
            best, best_time = oracle, elapsed
    return best, results


# ---------------------------------------------------------------------------
# MUS search


@dataclass
class MusResult:
    subset: tuple[int, ...]            # indices into the formula's conjuncts
    oracle_calls: int
    per_subset_times: list[float] = field(default_factory=list)
    unknown_subsets: int = 0


def subformula(f: Formula, indices: Sequence[int]) -> Formula:
    eqs = f.equations
    return f.replace(tuple(eqs[i] for i in indices))


def find_mus(f: Formula, oracle: SolverOracle,
             max_oracle_calls: int = DEFAULT_SUBSET_BUDGET,
             workers: int = 1) -> MusResult | None:
    """First MUS by cardinality-ascending subset enumeration.

    Returns None when the full formula is not UNSAT under the oracle or the
    call budget runs out before a minimal subset is confirmed. With
    ``workers`` > 1, subset checks run concurrently but results merge in
    enumeration order, so the answer never depends on completion timing.
    """
    n = len(f.equations)
    status, elapsed = oracle.check(f)
    calls = 1
    times = [elapsed]
    unknowns = 0
    if status is not Status.UNSAT:
        return None

    def proper_subsets():
        for k in range(1, n):
            yield from combinations(range(n), k)

    if workers <= 1:
        for subset in proper_subsets():
            if calls >= max_oracle_calls:
                return None
            status, elapsed = oracle.check(subformula(f, subset))
            calls += 1
            times.append(elapsed)
            if status is Status.UNSAT:
                return MusResult(subset, calls, times, unknowns)
            if status is Status.UNKNOWN:
                unknowns += 1
    else:
        from concurrent.futures import ThreadPoolExecutor

        gen = proper_subsets()
        exhausted = False
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while not exhausted:
                chunk = []
                while len(chunk) < workers * 2:
                    subset = next(gen, None)
                    if subset is None:
                        exhausted = True
                        break
                    if calls + len(chunk) >= max_oracle_calls:
                        return None        # subsets remain but budget is gone
                    chunk.append(subset)
                if not chunk:
                    break
                futures = [pool.submit(oracle.check, subformula(f, s))
                           for s in chunk]
                hit = None
                for subset, fut in zip(chunk, futures):
                    status, elapsed = fut.result()
                    calls += 1
                    times.append(elapsed)
                    if status is Status.UNSAT and hit is None:
                        hit = subset
                    elif status is Status.UNKNOWN:
                        unknowns += 1
                if hit is not None:
                    return MusResult(hit, calls, times, unknowns)

    # Every proper subset failed to prove UNSAT; the full set is the MUS
    # (its UNSAT status is the gate check above).
    return MusResult(tuple(range(n)), calls, times, unknowns)
