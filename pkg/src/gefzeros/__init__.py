"""Zeros of the Gaussian Entire Function under rare zero-count events:
simulation, constrained energy minimization, and the forbidden region."""

__version__ = "0.1.0"

from .series_core import (CoeffVector, TruncationPlan, eval_poly, log_b,
                          make_truncation_plan, regularity_check, sample_coeffs,
                          split_streams, stirling_bounds, tail_envelope)
from .rootfinder import (ZeroConfig, argument_principle_count, count_in_disk,
                         linear_statistics, perturbation_match, roots)
from .radial_measures import (RadialMeasure, b_alpha, catalog, catalog_I,
                              dirichlet_energy, equilibrium, functional_I,
                              functional_J, functional_J_half, jensen_check,
                              lin_stats_gap_bound, log_energy, log_potential)
from .energy_optimizer import (DiskConstraint, ShellGrid, convexity_gap_check,
                               discrete_I, minimize, variational_check)
from .constants import (RateConstant, ginibre_g, jlm_exponent,
                        main_term_logratio, moderate_rate, q_of_p, z_const)
from .conditional_sampler import (JointDensityContext, RareEventSample,
                                  construct_rare_event, functional_I_discrete,
                                  hole_probability_mc, log_joint_density,
                                  make_context, mh_hole_chain, radial_histogram,
                                  smoothed_energy)
