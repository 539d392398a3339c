"""Word-equation solving toolkit.

Conjunctions of word equations are decided by a split search over
first/last-term case analysis, with pluggable conjunct-ranking strategies
(fixed baseline, randomized, or GCN-guided), training-data extraction from
minimal unsatisfiable subsets and recorded proof trees, seeded benchmark
generators, and a portable GCN inference runtime.
"""

from .calculus import BranchOutcome, FreshVars, RuleId, apply_rules, simplify_and_check
from .gcn import ModelWeights, embed_graph, load_weights, save_weights, score_conjuncts
from .graphs import EquationGraph, encode_equation, encode_formula, occurrence_counts
from .mus import ExternalOracle, InternalOracle, MusResult, emit_smtlib, find_mus
from .ranking import RankContext, RankParams, Strategy, priority_of, rank_eqs
from .solver import (
    DecisionTree, SolveConfig, SolveResult, reconstruct_witness,
    shortest_unsat_path, split_equations,
)
from .terms import (
    Eq, Formula, ParseError, Status, SymbolTable, apply_substitution,
    check_witness, is_linear, parse_problem, serialize_problem,
)

__version__ = "0.1.0"
