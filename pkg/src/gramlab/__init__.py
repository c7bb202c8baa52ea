"""Gram-matrix spectra of finite-width normalized random MLP chains.

Library + CLI for simulating deep fully-connected chains with row
normalization at random init, solving the infinite-width fixed point of
the Gram recurrence, and measuring spectral concentration (transient
decay, width-limited plateau, Marchenko-Pastur bulk, Wishart
determinant collapse).
"""

__version__ = "0.1.0"

from .activations import ACTIVATION_NAMES, Activation, apply, distortion
from .chain import (ChainConfig, GramTrace, NormKind, default_input, gram,
                    normalize_rows, run, run_trial, step)
from .errors import GramlabError
from .experiments import (EXPERIMENTS, MixingEstimate, fit_mixing_rate,
                          run_experiment)
from .linalg import Spectrum, matpow, operator_norm, sym_eig
from .meanfield import (FixedPoint, OddGain, mf_recurrence_trace, mf_step,
                        odd_gain, solve_fixed_point)
from .randprod import (product_chain, union_bound_curve, wishart_det_exact,
                       wishart_det_mean, wishart_logdet_slope)
from .report import ExperimentReport
from .rng import RngStream, derive_base, gaussian_matrix
from .spectra import (MpLaw, concentration_scales, divergence,
                      gaussian_tv_bounds, gram_concentration_tail,
                      mp_band_fraction, mp_ks_distance, ratio_deviation)

__all__ = [
    "ACTIVATION_NAMES", "Activation", "ChainConfig", "EXPERIMENTS",
    "ExperimentReport", "FixedPoint", "GramTrace", "GramlabError",
    "MixingEstimate", "MpLaw", "NormKind", "OddGain", "RngStream",
    "Spectrum", "apply", "concentration_scales", "default_input",
    "derive_base", "distortion", "divergence", "fit_mixing_rate",
    "gaussian_matrix", "gaussian_tv_bounds", "gram",
    "gram_concentration_tail", "matpow", "mf_recurrence_trace", "mf_step",
    "mp_band_fraction", "mp_ks_distance", "normalize_rows", "odd_gain",
    "operator_norm", "product_chain", "ratio_deviation", "run",
    "run_experiment", "run_trial", "solve_fixed_point", "step", "sym_eig",
    "union_bound_curve", "wishart_det_exact", "wishart_det_mean",
    "wishart_logdet_slope",
]
