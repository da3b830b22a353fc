"""Greedy (steepest) coordinate descent for composite problems of the form
l(A alpha) + c^T alpha + sum_i g_i(alpha_i), with L1 or unit-box simple
terms, selection by subgradient steepness / step length / model decrease,
and sublinear-time selection via subset maximum inner product search with
an optional hyperplane-hashing backend.
"""

from .data_io import (CorrelatedLasso, Dataset, DiagQuadratic, RandomSvm,
                      SynthSpec, gen_synthetic, normalize_columns,
                      parse_libsvm, train_test_split, write_libsvm)
from .harness import (ExperimentConfig, RunSpec, adaptivity_report,
                      emit_plot_csv, run_experiment)
from .objectives import (CompositeProblem, IterateState, duality_gap,
                         make_elastic_net, make_lasso, make_logistic,
                         make_svm_dual, objective_value)
from .selection import Rule
from .solver import (SmipsEngine, SolverConfig, Trace, run_counters,
                     solve_box, solve_l1)
from .sparse import SparseColMatrix, shrink

__version__ = "0.1.0"

__all__ = [
    "CompositeProblem", "IterateState", "SparseColMatrix", "shrink",
    "make_lasso", "make_svm_dual", "make_logistic", "make_elastic_net",
    "objective_value", "duality_gap", "Rule",
    "SolverConfig", "Trace", "SmipsEngine", "solve_l1", "solve_box",
    "run_counters",
    "Dataset", "SynthSpec", "DiagQuadratic", "CorrelatedLasso", "RandomSvm",
    "parse_libsvm", "write_libsvm", "gen_synthetic", "normalize_columns",
    "train_test_split",
    "ExperimentConfig", "RunSpec", "run_experiment", "adaptivity_report",
    "emit_plot_csv",
]
