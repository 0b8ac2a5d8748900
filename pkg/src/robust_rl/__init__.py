"""Offline reinforcement learning on tabular MDPs via L1 distributionally robust planning."""

from .baselines import LcbConfig, lcb_penalty, lcb_value_iteration, nonrobust_empirical_vi
from .data import (DatasetError, EmpiricalModel, OfflineDataset, behavior_partial,
                   behavior_uniform, estimate_model, load_dataset, random_action,
                   sample_dataset, save_dataset)
from .experiment import (ExperimentConfig, ExperimentResult, emit_tables, load_config,
                         read_tables, run_sweep, suboptimality_gap)
from .garnet import generate_garnet
from .mdp import (ConcentrabilityReport, MdpValidationError, TabularMdp, concentrability,
                  exact_value_iteration, load_mdp, occupancy_measure, policy_evaluation,
                  save_mdp, scalar_value, state_occupancy)
from .robust import (BERNSTEIN, HOEFFDING, EmpiricalRobustModel, RadiusStyle, RobustSolution,
                     TieBreakError, hoeffding_coverage, load_solution, radius_table, robust_bellman_apply,
                     robust_value_iteration, robust_value_iteration_bernstein, save_solution,
                     support_function, support_function_dual, support_function_lp_oracle)

__version__ = "0.1.0"
