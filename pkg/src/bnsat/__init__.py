"""SAT solving through boolean network dynamics."""

from .formula import Formula, GenSpec, evaluate_formula, generate, parse_dimacs, write_dimacs
from .mapping import Network, compile_formula, eval_all, eval_node, is_fixed_point
from .solvers import SolveBudget, SolveOutcome, solve, solve_abn, solve_gsat, solve_pbn, solve_sbn

__version__ = "0.1.0"
