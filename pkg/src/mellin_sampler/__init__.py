"""Exponential sampling of Mellin band-limited functions.

Lattice-series functions, numerical Mellin transforms, random synthesis of
concentrated band-limited functions, random sampling inequalities and the
closed-form constants that govern them.
"""

from .bounds import (
    bernstein_tail,
    covering_log_bound,
    dimension_bound,
    evaluate_bounds,
    main_theorem_constants,
    min_samples,
    prob_est_failure_bound,
)
from .core import LatticeFunction, SpaceParams, eval_series, lattice_indices, lattice_points, lin_c
from .errors import (
    ConcentrationError,
    ConvergenceError,
    DomainError,
    LatticeSizeError,
    MellinSamplerError,
    NormOverflowError,
    ParameterError,
    RejectionExhaustedError,
)
from .mellin import (
    bandlimit_residual,
    fejer_kernel,
    inverse_mellin,
    jackson_constant,
    jackson_kernel,
    log_gaussian,
    mellin_transform,
    reproduce_integral,
)
from .quadrature import QuadratureSpec
from .sampling import (
    check_inequality,
    draw_uniform,
    empirical_frame,
    monte_carlo_experiment,
    z_statistics,
    z_variable,
)
from .synthesis import (
    ConcentrationCube,
    SynthesisProfile,
    concentration,
    min_N_for_error,
    norm_parseval,
    random_band_function,
    truncate_to_BN,
    truncation_error_bound,
)

__version__ = "0.1.0"
