"""Raw Gaussian matrix products: Wishart determinant moments, log-det
decay, rank-1 collapse, and the row-normalization log-det split.

Determinants past a handful of layers underflow double precision, so the
running product is kept factored as B @ T * exp(ls): B a tracked d x n
basis (re-orthogonalized every 25 steps), T an n x n accumulator
(rescaled into [1e-50, 1e50]), ls the log of the peeled-off scale.  All
per-layer metrics come from the n x n matrix T^T (B^T B) T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .chain import identity_input, orthonormal_input
from .errors import BadShape, ZeroRow
from .linalg import sym_eig
from .rng import RngStream, gaussian_matrix

_REORTH_EVERY = 25
_RESCALE_HI = 1e50
_RESCALE_LO = 1e-50
_DET_BATCH = 20_000


def wishart_det_exact(n: int, d: int) -> float:
    """E det(G^T G) for G d x n with N(0, 1/d) entries: prod (d-i)/d."""
    if d < n or n < 1:
        raise BadShape(f"need d >= n >= 1, got n={n}, d={d}")
    out = 1.0
    for i in range(n):
        out *= (d - i) / d
    return out


def wishart_logdet_slope(n: int, d: int) -> float:
    """E log det(G^T G): sum_i [psi((d-i)/2) + ln 2 - ln d]."""
    if d < n or n < 1:
        raise BadShape(f"need d >= n >= 1, got n={n}, d={d}")
    i = np.arange(n)
    return float((special.digamma((d - i) / 2.0) + math.log(2.0)
                  - math.log(d)).sum())


def wishart_det_mean(n: int, d: int, samples: int,
                     stream: RngStream) -> tuple[float, float, float]:
    """(MC mean, stderr, exact) of det(G^T G) over fresh d x n Gaussians."""
    exact = wishart_det_exact(n, d)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(_DET_BATCH, samples - done)
        g = gaussian_matrix(stream, m * d, n, 1.0 / d).reshape(m, d, n)
        dets = np.linalg.det(np.transpose(g, (0, 2, 1)) @ g)
        total += float(dets.sum())
        total_sq += float((dets * dets).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return (mean, math.sqrt(var / samples), exact)


@dataclass
class ProductTrace:
    """Per-layer metrics of one product-chain trial (layer 0 = input)."""

    trial: int
    logdet: np.ndarray
    cond: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    underflow_layer: int | None


def _product_metrics(B, T, ls, n):
    M = T.T @ (B.T @ B) @ T
    lam = sym_eig(M).eigenvalues
    if not np.isfinite(lam).all() or lam[-1] <= 0.0:
        return None
    logdet = 2.0 * n * ls + float(np.log(lam).sum())
    s1 = math.exp(ls) * math.sqrt(lam[0])
    s2 = math.exp(ls) * math.sqrt(lam[1]) if n >= 2 else 0.0
    cond = math.sqrt(lam[0] / lam[-1])
    return logdet, cond, s1, s2


def product_chain(n: int, d: int, depth: int, trials: int,
                  stream: RngStream) -> list[ProductTrace]:
    """Iterate X <- W X from an orthonormal input, tracking the product."""
    if d < n or n < 1:
        raise BadShape(f"need d >= n >= 1, got n={n}, d={d}")
    out = []
    for t in range(trials):
        st = stream.derived(t)
        B = orthonormal_input(n, d, st) / math.sqrt(d)
        T = np.eye(n)
        ls = 0.0
        logdet = np.full(depth + 1, np.nan)
        cond = np.full(depth + 1, np.nan)
        s1 = np.full(depth + 1, np.nan)
        s2 = np.full(depth + 1, np.nan)
        underflow = None
        for layer in range(depth + 1):
            got = _product_metrics(B, T, ls, n)
            if got is None:
                underflow = layer
                break
            logdet[layer], cond[layer], s1[layer], s2[layer] = got
            if layer == depth:
                break
            B = gaussian_matrix(st, d, d, 1.0 / d) @ B
            if (layer + 1) % _REORTH_EVERY == 0:
                q, r = np.linalg.qr(B)
                B, T = q, r @ T
                peak = float(np.abs(T).max())
                if peak > _RESCALE_HI or (0.0 < peak < _RESCALE_LO):
                    T /= peak
                    ls += math.log(peak)
        out.append(ProductTrace(trial=t, logdet=logdet, cond=cond, s1=s1,
                                s2=s2, underflow_layer=underflow))
    return out


def logdet_decomposition_check(X, stream: RngStream) -> float:
    """|log det(Yhat^T Yhat) - (-2 sum_i log||Y_i|| + log det(G^T G)
    + log det(X^T X))| for Y = G X with unit-normalized rows Yhat.

    The split is a determinant product rule; it is exact (up to rounding)
    when Y is square, which is the regime the callers use.
    """
    X = np.asarray(X, dtype=np.float64)
    d, n = X.shape
    G = gaussian_matrix(stream, d, d, 1.0 / d)
    Y = G @ X
    norms = np.sqrt((Y * Y).sum(axis=1))
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise ZeroRow(f"row {int(bad[0])} of the propagated matrix is zero")
    Yhat = Y / norms[:, None]
    lhs = float(np.log(sym_eig(Yhat.T @ Yhat).eigenvalues).sum())
    rhs = (-2.0 * float(np.log(norms).sum())
           + float(np.log(sym_eig(G.T @ G).eigenvalues).sum())
           + float(np.log(sym_eig(X.T @ X).eigenvalues).sum()))
    return abs(lhs - rhs)


@dataclass
class UnionBoundCurve:
    """Empirical E||G_l - I||_op against the exp(3 n l / (2 d)) overlay."""

    n: int
    d: int
    depths: tuple[int, ...]
    values: np.ndarray            # (trials, len(depths))
    bound: np.ndarray             # (len(depths),)

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    @property
    def median(self) -> np.ndarray:
        return np.median(self.values, axis=0)


def union_bound_curve(n: int, d: int, depths, trials: int,
                      stream: RngStream) -> UnionBoundCurve:
    """Operator-norm deviation of the no-norm identity chain's Gram."""
    depths = tuple(sorted(int(v) for v in depths))
    if depths and depths[0] < 0:
        raise BadShape("depths must be nonnegative")
    values = np.empty((trials, len(depths)))
    wanted = {v: i for i, v in enumerate(depths)}
    top = depths[-1] if depths else 0
    for t in range(trials):
        st = stream.derived(t)
        X = identity_input(n, d) / math.sqrt(d)
        for layer in range(top + 1):
            if layer in wanted:
                dev = X.T @ X - np.eye(n)
                lam = sym_eig(dev).eigenvalues
                values[t, wanted[layer]] = max(abs(lam[0]), abs(lam[-1]))
            if layer < top:
                X = gaussian_matrix(st, d, d, 1.0 / d) @ X
    bound = np.array([math.exp(1.5 * n * l / d) for l in depths])
    return UnionBoundCurve(n=n, d=d, depths=depths, values=values,
                           bound=bound)
