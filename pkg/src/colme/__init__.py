"""Seedable simulator and analysis toolkit for communication-constrained,
privacy-protected, decentralized online personalized mean estimation."""

from .bernstein import (BernsteinParams, DistributionSpec, TestSpec, compose,
                        privatized_beta, scaled_sample_mean_params, tail_bound,
                        type2_bound, uniform_beta, z_threshold_exact,
                        z_threshold_simple)
from .engine import (AlphaSchedule, Population, ProtocolError, WorldState,
                     advance_round, alpha_at, assemble_mixing_matrix,
                     average_preservation_check, init_state, mixing_row,
                     simulate_trajectory)
from .experiments import (ConfigError, CurveSeries, ExperimentConfig, RunResult,
                          corollary_holds, emit_csv, ideal_mse, load_config,
                          load_csv, local_mse, pinned_topology, run, sim_series,
                          theorem1_constant, theory_series)
from .privacy import PrivacySpec, calibrate, sample_noise
from .rules import (RuleSpec, ThetaSchedule, bernstein_decide,
                    bernstein_threshold, optimistic_decide, optimistic_radius,
                    oracle_decide, theta_at)
from .topology import (ClassStructure, GenerationError, Graph,
                       assign_classes_uniform, build_class_structure,
                       complete_graph, corollary_rhs, cycle_graph,
                       gen_random_regular, load_edge_list, save_edge_list)

__version__ = "0.1.0"
