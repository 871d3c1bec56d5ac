"""gflowlab: a numerical laboratory for fully nonlinear curvature flows.

Solves and cross-verifies the computable objects attached to rotationally
symmetric flows by 1-homogeneous curvature speeds: the speed/restriction
algebra (F, f, Q), bowl-soliton and self-shrinker profiles with barrier
diagnostics, radial and rescaled graph-flow simulation, and the Hermite
spectral decomposition of the linearized rescaled flow.
"""

from ._accel import NUMBA_ENABLED
from .errors import (BarrierViolation, ConeExit, ConeViolation,
                     DomainViolation, GFlowError, InsufficientTail,
                     NonConvergence, Pinch, QuadratureFailure,
                     StabilityViolation, ToleranceFailure, TruncationWarning,
                     WindowTooNarrow, WindowTooShort)
from .speeds import (CurvatureVector, ImplicitInverse, SpeedFunction,
                     compute_Q, evaluate_speed, invert_f, restriction_F,
                     speed_gradient)
from .solitons import (BowlProfile, EllipticityMonitor, ShrinkerProfile,
                       neck_constants, shrinker_to_bowl_convergence,
                       shrinker_upper_bound_check, shrinker_w_diagnostic,
                       solve_bowl, solve_shrinker)
from .flow import (BoundaryCondition, FlowHistory, RadialFlowState,
                   cylinder_radius, heat_barrier_psi,
                   heat_barrier_psi_quadrature,
                   linearize_rescaled_at_cylinder, run_flow, step_radial,
                   step_rescaled, tip_neck_diagnostics, translation_speed,
                   vertical_to_radial)
from .spectral import (GammaTrace, HermiteBasis, SpectralDecomposition,
                       build_basis, decompose, eigen_table, eigenvalue,
                       gamma_trace_from_run, merle_zaag_classifier)
from .geometry import (CylinderGraph, expansion_error_A, expansion_error_G,
                       trace_gamma)
from .fits import (AsymptoticFit, fit_bowl_expansion, fit_shrinker_neck,
                   measure_rescaled_decay)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
