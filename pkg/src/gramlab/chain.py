"""Finite-width random MLP chain with row normalization.

One layer maps h (d x n) to W @ a(normalize(h)) with fresh W ~ N(0, 1/d)
(d x d), so a step consumes exactly d^2 Gaussian draws.  The recorded
object is the Gram matrix of the normalized image, G = (1/d) x^T x with
x = a(normalize(h)); under the projection/centered normalizers with the
identity activation, trace(G) = n exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .activations import Activation, apply
from .errors import RankDeficientInput, ZeroVarianceRow
from .linalg import Spectrum, matpow, sym_eig
from .rng import RngStream, gaussian_matrix

# Stream id reserved for building inputs; trial t uses stream id t, so
# experiment trial counts stay clear of this value.
INPUT_STREAM_ID = 0x1A9B0

_ZERO_VAR_TOL = 1e-24


class NormKind(enum.Enum):
    """Row normalizers: projection onto the sqrt(n)-sphere, the same after
    row centering, or no normalization at all."""

    PROJECTION = "projection"
    CENTERED = "centered"
    NONE = "none"

    @classmethod
    def from_string(cls, s: str) -> "NormKind":
        try:
            return cls(s.lower())
        except ValueError:
            raise ValueError(f"unknown norm kind {s!r}; "
                             "choose projection, centered or none") from None


@dataclass(frozen=True)
class ChainConfig:
    n: int
    d: int
    depth: int
    activation: Activation
    norm: NormKind
    trials: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.d < self.n:
            raise ValueError("d must be >= n")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def normalize_rows(M, kind: NormKind) -> np.ndarray:
    """Rowwise normalization; raises ZeroVarianceRow on degenerate rows.

    PROJECTION divides each row by sqrt(mean of squares), so output rows
    have squared norm exactly n.  CENTERED subtracts the row mean first
    (population variance, divide by n).  NONE returns the input unchanged.
    """
    if kind is NormKind.NONE:
        return np.asarray(M, dtype=np.float64)
    X = np.asarray(M, dtype=np.float64)
    if kind is NormKind.CENTERED:
        X = X - X.mean(axis=1, keepdims=True)
    ms = (X * X).mean(axis=1)
    bad = np.nonzero(ms <= _ZERO_VAR_TOL)[0]
    if bad.size:
        raise ZeroVarianceRow(int(bad[0]))
    return X / np.sqrt(ms)[:, None]


def _normalized_image(h, cfg: ChainConfig) -> np.ndarray:
    return apply(cfg.activation, normalize_rows(h, cfg.norm))


def gram(h, cfg: ChainConfig) -> np.ndarray:
    """G = (1/d) x^T x for the normalized, activated representation x."""
    x = _normalized_image(h, cfg)
    G = (x.T @ x) / float(cfg.d)
    return 0.5 * (G + G.T)


def step(h, cfg: ChainConfig, stream: RngStream) -> np.ndarray:
    """One layer: fresh W ~ N(0, 1/d) (exactly d^2 draws) times the image."""
    x = _normalized_image(h, cfg)
    W = gaussian_matrix(stream, cfg.d, cfg.d, 1.0 / cfg.d)
    return W @ x


def identity_input(n: int, d: int) -> np.ndarray:
    """First n columns of sqrt(d) * I_d; input Gram is exactly I_n."""
    h = np.zeros((d, n))
    h[:n, :n] = np.sqrt(float(d)) * np.eye(n)
    return h


def orthonormal_input(n: int, d: int, stream: RngStream) -> np.ndarray:
    """sqrt(d) times a random orthonormal d x n frame (no degenerate rows).

    Input Gram is exactly I_n, and rows are generic, so this is the
    default input for the normalized chains, where sqrt(d)*I_d would hand
    the normalizers d-n all-zero rows.
    """
    g = stream.gaussian(n * d).reshape(d, n)
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diag(r))
    sign[sign == 0.0] = 1.0
    return np.sqrt(float(d)) * (q * sign)


def correlated_input(n: int, d: int, stream: RngStream,
                     target_gram: np.ndarray) -> np.ndarray:
    """Frame whose input Gram equals target_gram (must be SPD)."""
    q = orthonormal_input(n, d, stream) / np.sqrt(float(d))
    return np.sqrt(float(d)) * (q @ matpow(target_gram, 0.5))


def default_input(cfg: ChainConfig) -> np.ndarray:
    if cfg.norm is NormKind.NONE:
        return identity_input(cfg.n, cfg.d)
    return orthonormal_input(cfg.n, cfg.d,
                             RngStream(cfg.master_seed, INPUT_STREAM_ID))


@dataclass
class GramTrace:
    """Per-layer Gram record of one trial (layer 0 is the input Gram)."""

    trial: int
    grams: np.ndarray                     # (depth+1, n, n)
    spectra: list[Spectrum] | None        # per layer, descending eigenvalues
    frob_err: np.ndarray | None           # ||G_l - reference||_F per layer

    @property
    def eigenvalues(self) -> np.ndarray:
        if self.spectra is None:
            raise ValueError("trace was recorded without spectra")
        return np.stack([s.eigenvalues for s in self.spectra])


def _check_input(cfg: ChainConfig, h: np.ndarray) -> None:
    if h.shape != (cfg.d, cfg.n):
        raise ValueError(f"input must be d x n = {(cfg.d, cfg.n)}, "
                         f"got {h.shape}")
    scaled = h / np.sqrt(float(cfg.d))
    eigs = sym_eig(scaled.T @ scaled).eigenvalues
    smin = float(np.sqrt(max(eigs[-1], 0.0)))
    if smin <= 1e-8:
        raise RankDeficientInput(
            f"smallest singular value of input/sqrt(d) is {smin:.3e}")


def run_trial(cfg: ChainConfig, trial: int, input=None, reference=None,
              record_spectra: bool = True) -> GramTrace:
    """Run one trial (stream id = trial index) for cfg.depth layers."""
    stream = RngStream(cfg.master_seed, trial)
    h = default_input(cfg) if input is None else np.asarray(input, np.float64)
    _check_input(cfg, h)
    ref = None if reference is None else np.asarray(reference, np.float64)
    grams = np.empty((cfg.depth + 1, cfg.n, cfg.n))
    spectra = [] if record_spectra else None
    errs = None if ref is None else np.empty(cfg.depth + 1)
    d = float(cfg.d)
    for layer in range(cfg.depth + 1):
        x = _normalized_image(h, cfg)
        G = (x.T @ x) / d
        G = 0.5 * (G + G.T)
        grams[layer] = G
        if record_spectra:
            spectra.append(sym_eig(G))
        if errs is not None:
            diff = G - ref
            errs[layer] = np.sqrt((diff * diff).sum())
        if layer < cfg.depth:
            W = gaussian_matrix(stream, cfg.d, cfg.d, 1.0 / cfg.d)
            h = W @ x
    return GramTrace(trial=trial, grams=grams, spectra=spectra, frob_err=errs)


def run(cfg: ChainConfig, input=None, reference=None,
        record_spectra: bool = True) -> list[GramTrace]:
    """All trials sequentially; trial t uses stream id t."""
    return [run_trial(cfg, t, input=input, reference=reference,
                      record_spectra=record_spectra)
            for t in range(cfg.trials)]
