"""Decode active sets in an overlapping set system from a part report.

Given a collection of possibly overlapping sets ("wholes") over
elements ("parts") and a binary report saying which parts were listed,
this package infers which wholes are active under the activation rule
that a whole is active exactly when every one of its parts is.  It
provides an exact MAP decoder built on an internal branch-and-bound
integer solver, a penalized Metropolis sampler for posterior marginals,
exhaustive enumeration oracles for small systems, a Fisher-test
baseline, synthetic benchmarks, and GMT/part-list file handling behind
a single command line tool.
"""

from .enrichment import (EnrichmentResult, bh_adjust, fisher_test,
                         log_hypergeom_tail)
from .exact import (AhPriorResult, ExactPosterior, ViolationExpectation,
                    ah_prior_probability, conjecture_gap,
                    enumerate_posterior, expected_violations,
                    violation_grid)
from .files import (GeneListResult, GmtParseError, GmtRecord,
                    parse_gene_list, parse_gmt, write_gmt)
from .ilp import (IlpProblem, IlpSolution, NodeLimitError, solve_binary,
                  solve_lp_relaxation)
from .lp import LpError, LpResult, solve_lp
from .map_ilp import (MapEstimate, ShrinkResult, build_ilp, shrink,
                      solve_map, solve_map_sequential, trim)
from .mcmc import (ChainState, PosteriorSummary, ZeroKeptError, audit_state,
                   merge_summaries, propose_and_apply_swap, run_chain)
from .model import (ModelParams, Observation, ObjectiveCoefficients,
                    induced_activities, inverse_activities,
                    linear_objective_value, log_posterior,
                    objective_coefficients, penalized_log_posterior,
                    project_to_ah, satisfies_ah, violations)
from .simulate import (EXP2_CHILDREN, EXP2_PARENT_RANGES, BenchmarkConfig,
                       SimulationReport, build_experiment1,
                       build_experiment2, evaluate, run_benchmark,
                       sample_gene_list, sample_truth)
from .system import (ConstructionReport, EmptySystemError, IncidenceSystem,
                     build_system)

try:
    from importlib.metadata import version as _pkg_version
    __version__ = _pkg_version("setdecode")
except Exception:  # not installed, e.g. direct source checkout
    __version__ = "0.0.0"

__all__ = [
    "AhPriorResult", "BenchmarkConfig", "ChainState", "ConstructionReport",
    "EXP2_CHILDREN", "EXP2_PARENT_RANGES", "EmptySystemError",
    "EnrichmentResult", "ExactPosterior", "GeneListResult", "GmtParseError",
    "GmtRecord", "IlpProblem", "IlpSolution", "IncidenceSystem", "LpError",
    "LpResult", "MapEstimate", "ModelParams", "NodeLimitError",
    "Observation", "ObjectiveCoefficients", "PosteriorSummary",
    "ShrinkResult", "SimulationReport", "ViolationExpectation",
    "ZeroKeptError", "ah_prior_probability", "audit_state", "bh_adjust",
    "build_experiment1", "build_experiment2", "build_ilp", "build_system",
    "conjecture_gap", "enumerate_posterior", "evaluate",
    "expected_violations", "fisher_test", "induced_activities",
    "inverse_activities", "linear_objective_value", "log_hypergeom_tail",
    "log_posterior", "merge_summaries", "objective_coefficients",
    "parse_gene_list", "parse_gmt", "penalized_log_posterior",
    "project_to_ah", "propose_and_apply_swap", "run_benchmark", "run_chain",
    "sample_gene_list", "sample_truth", "satisfies_ah", "shrink",
    "solve_binary", "solve_lp", "solve_lp_relaxation", "solve_map",
    "solve_map_sequential", "trim", "violation_grid", "violations",
    "write_gmt",
]
