"""Setwise max-margin preference elicitation over constrained configuration
spaces: learn an additive utility from pairwise comparisons by repeatedly
solving a margin-maximizing MILP that proposes diverse, high-scoring
configurations to compare.
"""

from .milp import (Hyperparameters, Preference, PreferenceDataset,
                   SetMarginSolution, STRICT, INDIFFERENT, UnboundedRisk,
                   build_model, export_debug, recommend, solve, solve_setmargin)
from .loop import (ElicitationTrace, LoopConfig, QueryAnswer, UserAbort,
                   answer_to_preferences, cross_validate, run, schedule)
from .problem import (Attribute, Configuration, CostMatrix, DimensionError,
                      InfeasibleSpec, InvalidAssignment, LinearConstraint,
                      ProblemSpec, SpaceTooLarge, WeightBounds, count_feasible,
                      decode, dump_problem, encode, enumerate_feasible,
                      horn_clause, is_feasible, load_problem,
                      reduce_real_attributes, utility)
from .solver import SolverConfig
from .users import (ResponseModelParams, SimulatedUser, UtilityDistribution,
                    noiseless_user, response_probabilities, sample_utility)
from .bench import (ExperimentConfig, MetricRow, best_utility, gen_pc,
                    gen_synthetic, make_spec, run_experiment, seeds_for,
                    utility_loss, write_outputs)

__version__ = "0.1.0"
