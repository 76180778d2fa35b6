"""Numerical toolkit for harmonic analysis and dispersive PDE in the
Weinstein (Laplace-Bessel) setting on the half space R^d x (0, inf)."""

from .errors import BlowupAbort, ConfigurationError, GridTooSmallError, UsageError
from .field import Field, Space, gaussian, random_band_limited, read_field, write_field
from .grid import Grid, WeinsteinParams, build_grid, integrate, lp_norm
from .special import BesselOrder, bessel_zero, bessel_zeros, gamma, normalized_bessel_j
from .strichartz import (
    AdmissiblePair,
    Classification,
    MixedNormSpec,
    classify,
    classify_sigma,
    conjugate,
    critical_power,
    mixed_norm,
    strichartz_quotient,
)
from .transform import eigenfunction, forward, forward_direct, inverse, laplacian_symbol_apply
from .translation import convolve, convolve_direct, translate, translation_rule
from .propagator import decay_fit, duhamel, free_evolve, gaussian_closed_form
from .solver import (
    NonlinearitySpec,
    SolverConfig,
    SolverMode,
    Trajectory,
    blowup_monitor,
    evolve,
    nonlinearity_apply,
    picard_solve,
    strang_step,
)

__version__ = "0.1.0"
