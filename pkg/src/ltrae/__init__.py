"""Optimal LT-code degree distributions for random access under peeling decoding."""

__version__ = "0.1.0"

from .asymptotics import (DecodingCurve, check_g_monotone, curve_area, decoding_curve,
                          decoding_fraction_s, extension_derivative, g, g_prime, gradient_f,
                          hessian_f, hessian_min_eigenvalue, objective_f, theorem2_conditions)
from .bounds import (PI_OVER_4, check_lower_bound, d2_closed_form, dilogarithm,
                     lower_bound_gap, solve_d2)
from .core import (DegreeDistribution, eval_p, eval_p_double_prime, eval_p_prime,
                   make_distribution, perturb, point_mass, uniform_distribution)
from .errors import (CapabilityError, ConfigurationError, DivergenceError, DomainError,
                     EvaluationError, LTRAEError, ValidationError)
from .optimizer import (KKTCertificate, OptimizationResult, SolverConfig,
                        harmonic_extension_bound, kkt_certificate,
                        optimize_degree_distribution, support_extension_test, sweep)
from .quadrature import (QuadratureRule, build_composite_rule, build_log_kernel_rule,
                         default_rule, integrate_log_kernel, integrate_log_kernel_adaptive)
from .simulator import (CodedSymbol, LTEncoder, PeelingState, TrajectoryStats,
                        average_decoding_curve, estimate_rae, peel_incremental,
                        sample_coded_symbol, simulate_trajectory)
