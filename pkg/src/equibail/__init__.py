"""Equity cross-holding networks: sampling, solvency equilibria, graphon cutoffs, bailouts."""

from .errors import (EquibailError, NonInteriorError, NumericError,
                     ParameterError, StabilityError)
from .model import (BlockSpec, FiniteNetwork, HoldingsMatrix, SpectralDeviation,
                    block_regular_matrix, book_threshold_from_market,
                    book_to_market, cross_holdings, endowment_vector,
                    labels_for, sample_sbm, spectral_deviation)
from .equilibrium import (EquilibriumResult, FeasibilityResult, LinearValueSolver,
                          ValuationProfile, extremal_equilibrium, feasibility,
                          putative_values)
from .graphon import (BlockGraphon, BlockValues, CutoffVector, SpilloverMatrix,
                      build_graphon, insolvency_overflow, putative_block_values,
                      solve_extremal_cutoffs, spillover_matrix, swap_construct)
from .bailout import (BruteForcePlan, CorePeripheryAnalytics, FiniteInfusion,
                      InfusionPlan, SingleBlockPlan, apply_infusion,
                      brute_force_infusion, core_periphery_analytics,
                      infusion_density, katz_centrality, lift_to_finite,
                      optimal_infusion, post_infusion_aggregates,
                      single_block_plan)

__version__ = "0.1.0"
