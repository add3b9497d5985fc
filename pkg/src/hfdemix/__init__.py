"""Gridless hybrid-field XL-MIMO channel estimation by convex demixing.

The library models a ULA receiving a mixture of far-field (plane-wave)
and near-field (spherical-wave) paths through an analog combining front
end, and estimates the channel by minimizing a weighted sum of two atomic
norms subject to a data-fit ball. The equivalent semidefinite program is
solved by a built-in operator-splitting method; angles come out of
Vandermonde decompositions of the Toeplitz blocks and near-field ranges
from a scale-invariant curvature fit. A two-stage OMP baseline and a
seeded Monte-Carlo benchmark harness round out the package.
"""

__version__ = "0.1.0"

from .demix import DemixEstimate, balanced_tau, estimate_channel, nmse
from .errors import (ConfigurationError, DegenerateInputError, DomainError,
                     HfdemixError, NumericalFailure)
from .measurement import (MeasurementEnsemble, lift_adjoint, lift_apply,
                          noise_bound, observe, random_combiner)
from .model import (ChannelSampling, HybridChannel, PathParams, SystemConfig,
                    assemble_channel, curvature_ramp, element_range,
                    far_steering, near_steering_approx, near_steering_exact,
                    phase_ramp, phi_from_theta, psi_from_theta_range,
                    range_from_psi, sample_hybrid_channel, theta_from_phi)
from .omp import OmpEstimate, PolarDictionary, build_polar_dictionary, hybrid_omp
from .params import (EstimatedPath, EstimatedPaths, estimate_range,
                     extract_paths, fit_curvature, match_paths, phi_to_theta,
                     recover_modulations, vandermonde_decompose)
from .solver import (ConicProgram, SdpSolution, SolverOptions, SolverState,
                     compile_program, psd_project, soc_project, solve, toep)
from .subspace import (SubspaceBasis, build_default_subspace, build_dictionary,
                       build_subspace, default_psi_grid, load_basis, save_basis,
                       subspace_residual)
