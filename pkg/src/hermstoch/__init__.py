"""Truncated Hermite-Sobolev computation, SDE/SPDE simulation, and
numerical verification of submanifold invariance.

Layers, bottom up: hermite (basis + quadrature), sobolev (coefficient
vectors, graded norms, dual pairing), operators (banded derivative /
multiplication matrices, translation group), distributions (deltas,
atomic measures, polynomials), sde (Euler-Maruyama with reproducible
coupled noise), manifolds (level sets, charts, projectors, Stratonovich
correction), invariance (residual checkers and reports), spde (Galerkin
vs translated-profile integration), models (built-in registry), cli.
"""

from .hermite import (QuadratureRule, TruncationScheme, enumerate_basis,
                      eval_hermite, gauss_hermite_rule, hermite_design_matrix)
from .sobolev import (CoefficientVector, basis_vector, dual_pair, norm_p,
                      apply_hermite_operator, project_function, reconstruct,
                      zero_vector)
from .operators import (derivative_matrix, generator_residual,
                        hermite_operator_matrix, multiplication_matrix,
                        translate, translation_operator)
from .distributions import (atomic_measure_coefficients, delta_coefficients,
                            polynomial_coefficients, translate_atoms)
from .sde import (BlowUpError, SdeModel, Trajectory, coupled_increments,
                  euler_maruyama)
from .manifolds import (ChartManifold, LevelSetManifold, PointSample,
                        apply_first_order, apply_generator, corrected_drift,
                        hyperplane_manifold, newton_projection_sample,
                        sample_sphere, sphere_manifold, spherical_chart,
                        stratonovich_correction, tangent_projector,
                        torus_manifold)
from .invariance import (AmbientFields, InvarianceReport, all_pass,
                         check_chart, check_levelset, check_simultaneous,
                         check_sphere, check_stratonovich, check_tangency,
                         empirical_invariance, fields_from_sde)
from .spde import (SpdeModel, SpdeTrajectory, ambient_fields,
                   as_sde_model, compare_trajectories, galerkin_integrate,
                   orbit_chart, pairing_fields, spde_diffusion, spde_drift,
                   translate_profile, translated_profile_solution)
from .models import (delta_profile_spde, gaussian_profile_spde,
                     hyperplane_tangent_model, make_function, make_manifold,
                     make_sde_model, make_spde_model,
                     ornstein_uhlenbeck_model, stroock_sphere_model,
                     zero_model)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
