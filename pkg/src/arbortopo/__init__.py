"""Neuron tree topology: SWC ingestion, morphometrics, branching models,
and population statistics."""

from ._kernels import USING_NUMBA
from .errors import (ArbortopoError, DivergenceError, FitError, SwcParseError,
                     TreeInvariantError, TruncationError,
                     UndefinedPartitionError)
from .generator import (BranchModel, branching_probability, generate,
                        generate_population, mean_size,
                        simulate_population_stats, solve_homogeneous_p,
                        substream_seed)
from .inference import (BranchingProfilePopulation, FitResult, ShuffleResult,
                        TestResult, estimate_branching_frequencies,
                        f_test_nested, f_test_slope_equality, fit_exp_plateau,
                        fit_exp_zero, fit_power_law, fit_total_length,
                        ks_two_sample, pearson, shuffle_test_dendrite_sizes,
                        t_test_two_sample, t_test_zero_mean)
from .io import (read_neuron_json, read_population_jsonl, read_trees,
                 write_neuron_json, write_population_jsonl)
from .morphometry import (PopulationSummary, TreeMetrics,
                          branch_length_by_order, compute_metrics,
                          conditional_means, excess_asymmetry,
                          partition_asymmetry, read_metrics_csv, summarize,
                          total_length, tree_asymmetry, write_metrics_csv)
from .swc_ingest import SwcFile, SwcPoint, decompose, parse_swc
from .topology_core import (OrderProfile, classify_nodes, order_profile,
                            subtree_counts)
from .tree import Tree, from_parent_list

__version__ = "0.1.0"

__all__ = [
    "ArbortopoError", "BranchModel", "BranchingProfilePopulation",
    "DivergenceError", "FitError", "FitResult", "OrderProfile",
    "PopulationSummary", "ShuffleResult", "SwcFile", "SwcParseError",
    "SwcPoint", "TestResult", "Tree", "TreeInvariantError", "TreeMetrics",
    "TruncationError", "USING_NUMBA", "UndefinedPartitionError",
    "branch_length_by_order", "branching_probability", "classify_nodes",
    "compute_metrics", "conditional_means", "decompose", "excess_asymmetry",
    "estimate_branching_frequencies", "f_test_nested", "f_test_slope_equality",
    "fit_exp_plateau", "fit_exp_zero", "fit_power_law", "fit_total_length",
    "from_parent_list", "generate", "generate_population", "ks_two_sample",
    "mean_size", "order_profile", "parse_swc", "partition_asymmetry",
    "pearson", "read_metrics_csv", "read_neuron_json",
    "read_population_jsonl", "read_trees", "shuffle_test_dendrite_sizes",
    "simulate_population_stats", "solve_homogeneous_p", "substream_seed",
    "subtree_counts", "summarize", "t_test_two_sample", "t_test_zero_mean",
    "total_length", "tree_asymmetry", "write_metrics_csv",
    "write_neuron_json", "write_population_jsonl",
]
