"""Spectral evaluators: Marchenko-Pastur law, Gram divergences,
Gaussian total-variation bounds, and concentration tail/scale formulas.

Pure functions of their arguments; all randomness lives in the callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .activations import Activation
from .errors import (BadParameter, BadRatio, LengthMismatch,
                     NonPositiveReference, NotPositiveDefinite,
                     TooFewEigenvalues)
from .linalg import matpow, sym_eig

_MIN_KS_POINTS = 5


@dataclass(frozen=True)
class MpLaw:
    """Marchenko-Pastur law with aspect ratio = n/d."""

    ratio: float

    def __post_init__(self):
        if not (0.0 < self.ratio <= 1.0):
            raise BadRatio(f"aspect ratio must be in (0, 1], got {self.ratio}")

    @property
    def support(self) -> tuple[float, float]:
        """Eigenvalue support [(1 - sqrt(ratio))^2, (1 + sqrt(ratio))^2]."""
        r = math.sqrt(self.ratio)
        return ((1.0 - r) ** 2, (1.0 + r) ** 2)

    @property
    def singular_band(self) -> tuple[float, float]:
        """The first-order band [1 - sqrt(ratio), 1 + sqrt(ratio)]."""
        r = math.sqrt(self.ratio)
        return (1.0 - r, 1.0 + r)


def mp_pdf(x, law: MpLaw) -> np.ndarray:
    a, b = law.support
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2.0 * np.pi * law.ratio * xi)
    return out if out.ndim else float(out)


def mp_cdf(x: float, law: MpLaw) -> float:
    a, b = law.support
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    val, _ = integrate.quad(lambda t: mp_pdf(t, law), a, x, limit=200)
    return float(min(max(val, 0.0), 1.0))


def mp_median(law: MpLaw) -> float:
    a, b = law.support
    return float(optimize.brentq(lambda x: mp_cdf(x, law) - 0.5, a, b,
                                 xtol=1e-12))


def default_drop_top(a: Activation) -> int:
    """Non-odd activations push one outlier eigenvalue out of the bulk."""
    return 0 if a.is_odd else 1


def _median_normalized(eigs, drop_top: int) -> np.ndarray:
    lam = np.sort(np.asarray(eigs, dtype=np.float64))[::-1]
    if drop_top < 0:
        raise BadParameter("drop_top must be >= 0")
    if drop_top:
        lam = lam[drop_top:]
    if lam.size < _MIN_KS_POINTS:
        raise TooFewEigenvalues(
            f"need at least {_MIN_KS_POINTS} eigenvalues after dropping "
            f"{drop_top}, have {lam.size}")
    med = float(np.median(lam))
    if med <= 0.0:
        raise NonPositiveReference("median of retained eigenvalues is <= 0")
    return lam[::-1] / med


def mp_ks_distance(eigs, law: MpLaw, drop_top: int = 0) -> float:
    """KS distance of median-normalized eigenvalues to the median-1 MP law."""
    lam = _median_normalized(eigs, drop_top)
    med = mp_median(law)
    cdf = np.array([mp_cdf(v * med, law) for v in lam])
    k = lam.size
    hi = np.abs(np.arange(1, k + 1) / k - cdf).max()
    lo = np.abs(np.arange(0, k) / k - cdf).max()
    return float(max(hi, lo))


def mp_band_fraction(eigs, n: int, d: int, drop_top: int = 0,
                     half_width_mult: float = 3.0) -> float:
    """Fraction of median-normalized eigenvalues within 1 +- mult*sqrt(n/d)."""
    lam = _median_normalized(eigs, drop_top)
    h = half_width_mult * math.sqrt(n / d)
    return float(((lam >= 1.0 - h) & (lam <= 1.0 + h)).mean())


def divergence(C1, C2) -> float:
    """delta = sum_i (lambda_i(C1^{-1} C2) - 1)^2, via symmetric similarity."""
    C1 = np.asarray(C1, dtype=np.float64)
    C2 = np.asarray(C2, dtype=np.float64)
    if np.array_equal(C1, C2):
        return 0.0
    R = matpow(C1, -0.5)
    M = R @ C2 @ R
    lam = sym_eig(M).eigenvalues
    if lam[-1] <= 1e-12:
        raise NotPositiveDefinite("second matrix is not positive definite")
    return float(((lam - 1.0) ** 2).sum())


def gaussian_tv_bounds(C1, C2) -> tuple[float, float]:
    """(delta/100, min(1, 3*delta/2)) clamped to [0, 1]."""
    delta = divergence(C1, C2)
    lo = min(max(delta / 100.0, 0.0), 1.0)
    hi = min(max(1.5 * delta, 0.0), 1.0)
    return (lo, hi)


def ratio_deviation(lams, refs) -> float:
    """max_i |lams_i / refs_i - 1| for matched descending spectra."""
    lams = np.asarray(lams, dtype=np.float64)
    refs = np.asarray(refs, dtype=np.float64)
    if lams.shape != refs.shape:
        raise LengthMismatch(f"{lams.shape} vs {refs.shape}")
    if refs.size and refs.min() <= 0.0:
        raise NonPositiveReference("reference eigenvalues must be positive")
    return float(np.abs(lams / refs - 1.0).max())


def gram_concentration_tail(t: float, n: int, d: int, gamma: float,
                            inv_norm: float) -> float:
    """n * exp(-(t d / 2) / (gamma^2 * inv_norm * n^2 * (1 + sqrt(t/n))))."""
    if t < 0.0:
        raise BadParameter("t must be >= 0")
    if n < 1 or d < 1 or gamma <= 0.0 or inv_norm <= 0.0:
        raise BadParameter("n, d, gamma, inv_norm must be positive")
    if t == 0.0:
        return float(n)
    expo = (t * d / 2.0) / (gamma * gamma * inv_norm * n * n
                            * (1.0 + math.sqrt(t / n)))
    return float(n * math.exp(-expo))


def bernstein_tail(t: float, n: int, sigma2: float, R: float) -> float:
    """n * exp(-(t/2) / (sigma2 + R t / 3)), the displayed tail form."""
    if t < 0.0:
        raise BadParameter("t must be >= 0")
    if n < 1 or sigma2 <= 0.0 or R <= 0.0:
        raise BadParameter("n, sigma2, R must be positive")
    return float(n * math.exp(-(t / 2.0) / (sigma2 + R * t / 3.0)))


@dataclass(frozen=True)
class ConcentrationScales:
    """Width-controlled scales: epsilon, its plateau, one-step TV value."""

    epsilon: float
    plateau: float        # epsilon * ln(1/epsilon)
    one_step_tv: float    # (3 n^2 ||G*^{-1}|| gamma^2 / d) * ln(d / that)
    out_of_regime: bool   # epsilon >= 1: the log scales lose meaning


def concentration_scales(n: int, d: int, gamma: float,
                         inv_sqrt_norm: float) -> ConcentrationScales:
    if n < 1 or d < 1 or gamma <= 0.0 or inv_sqrt_norm <= 0.0:
        raise BadParameter("n, d, gamma, inv_sqrt_norm must be positive")
    eps = n * gamma * inv_sqrt_norm / math.sqrt(d)
    out = eps >= 1.0
    plateau = 0.0 if out else eps * math.log(1.0 / eps)
    inv_norm = inv_sqrt_norm * inv_sqrt_norm
    k = 3.0 * n * n * inv_norm * gamma * gamma / d
    one_step = k * math.log(1.0 / k) if k < 1.0 else 0.0
    return ConcentrationScales(epsilon=float(eps), plateau=float(plateau),
                               one_step_tv=float(one_step),
                               out_of_regime=bool(out))


@dataclass(frozen=True)
class ConcentrationReport:
    """Transient-plus-plateau bound against a measured deviation."""

    epsilon: float
    transient: float      # exp(-alpha_hat * layer / 2)
    plateau: float
    bound: float          # scale * (transient + plateau)
    observed: float
    out_of_regime: bool

    @property
    def holds(self) -> bool:
        return (not self.out_of_regime) and self.observed <= self.bound


def build_concentration_report(n: int, d: int, gamma: float,
                               inv_sqrt_norm: float, alpha_hat: float,
                               layer: int, observed: float,
                               scale: float = 1.0) -> ConcentrationReport:
    sc = concentration_scales(n, d, gamma, inv_sqrt_norm)
    transient = math.exp(-alpha_hat * layer / 2.0)
    return ConcentrationReport(
        epsilon=sc.epsilon, transient=float(transient), plateau=sc.plateau,
        bound=float(scale * (transient + sc.plateau)),
        observed=float(observed), out_of_regime=sc.out_of_regime)
