"""Infinite-width Gram recurrence and its symmetric fixed points.

In the width limit each row of h_l is an independent N(0, G_l) vector, so
the layer map on Grams is G -> E[(a(normalize(w)))^T (a(normalize(w)))],
estimated here by Monte Carlo.  Exchangeable fixed points have the
two-parameter form G = b((1-c) I + c 11^T); the solver runs a damped
iteration on (b, c) with common random numbers so convergence detection
is not chasing sampling noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import Activation, apply
from .chain import NormKind, normalize_rows
from .errors import BadParameter, DegenerateFixedPoint, NoConvergence, NotOddActivation
from .linalg import matpow
from .rng import RngStream, mvn_rows

DAMPING = 0.5
DEFAULT_SAMPLES = 200_000
DEFAULT_TOL = 2e-3
DEFAULT_MAX_ITER = 200

_DEGENERATE_C = 1.0 - 1e-6


def bsb1_matrix(n: int, b: float, c: float) -> np.ndarray:
    """b((1-c) I + c 11^T): equal diagonal b, equal off-diagonal b*c."""
    return b * ((1.0 - c) * np.eye(n) + c * np.ones((n, n)))


def centering_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the zero-sum subspace (Helmert)."""
    B = np.zeros((n, n - 1))
    for k in range(1, n):
        B[:k, k - 1] = 1.0
        B[k, k - 1] = -float(k)
        B[:, k - 1] /= np.sqrt(float(k * (k + 1)))
    return B


@dataclass(frozen=True)
class MfStepEstimate:
    g_next: np.ndarray
    stderr: float      # max entrywise Monte Carlo standard error
    samples: int


@dataclass(frozen=True)
class FixedPoint:
    """Exchangeable (BSB1-form) fixed point b((1-c) I + c 11^T).

    Under the centered norm c_star can be negative (centering forces row
    sums of the image toward zero), so no sign constraint is imposed.
    """

    n: int
    norm: NormKind
    b_star: float
    c_star: float
    g_star: np.ndarray
    mc_stderr: float
    iterations: int

    def eigenvalues(self) -> np.ndarray:
        """b(1-c) with multiplicity n-1, b(1-c+cn) on the all-ones axis."""
        bulk = self.b_star * (1.0 - self.c_star)
        top = self.b_star * (1.0 - self.c_star + self.c_star * self.n)
        return np.sort(np.r_[np.full(self.n - 1, bulk), top])[::-1].copy()

    def centered_eigenvalues(self) -> np.ndarray:
        """Spectrum of B^T G* B on the zero-sum subspace: n-1 equal values."""
        return np.full(self.n - 1, self.b_star * (1.0 - self.c_star))

    def inverse_operator_norm(self) -> float:
        """||G*^{-1}||_op, on the centered subspace when norm is CENTERED."""
        if self.norm is NormKind.CENTERED:
            lo = float(self.centered_eigenvalues().min())
        else:
            lo = float(self.eigenvalues().min())
        if lo <= 0.0:
            raise DegenerateFixedPoint(
                f"fixed point not invertible (min eigenvalue {lo:.3e})")
        return 1.0 / lo


def _image_from_z(z: np.ndarray, G: np.ndarray, a: Activation,
                  kind: NormKind, basis: np.ndarray | None) -> np.ndarray:
    """Rows ~ N(0, G) from standard-normal z, then normalize + activate.

    For the centered norm the draw lives on the zero-sum subspace
    (z @ (B^T G B)^{1/2} @ B^T): centering kills the all-ones component
    anyway, and this keeps the solver away from the structurally singular
    direction of centered fixed points.
    """
    if kind is NormKind.CENTERED:
        w = (z @ matpow(basis.T @ G @ basis, 0.5)) @ basis.T
    else:
        w = z @ matpow(G, 0.5)
    return apply(a, normalize_rows(w, kind))


def _estimate(x: np.ndarray) -> tuple[np.ndarray, float]:
    m = float(x.shape[0])
    G = (x.T @ x) / m
    G = 0.5 * (G + G.T)
    xx = x * x
    second = (xx.T @ xx) / m
    var = np.maximum(second - G * G, 0.0)
    return G, float(np.sqrt(var / m).max())


def mf_step(G, a: Activation, kind: NormKind, samples: int = DEFAULT_SAMPLES,
            stream: RngStream | None = None) -> MfStepEstimate:
    """One Monte Carlo step of the width-limit Gram recurrence."""
    if samples < 1000:
        raise BadParameter("mf_step needs samples >= 1000")
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    stream = RngStream(0, 0) if stream is None else stream
    if kind is NormKind.CENTERED:
        basis = centering_basis(n)
        z = mvn_rows(stream, samples, np.eye(n - 1))
    else:
        basis = None
        z = mvn_rows(stream, samples, np.eye(n))
    x = _image_from_z(z, G, a, kind, basis)
    g_next, err = _estimate(x)
    return MfStepEstimate(g_next=g_next, stderr=err, samples=samples)


def mf_recurrence_trace(G0, a: Activation, kind: NormKind, layers: int,
                        samples: int = DEFAULT_SAMPLES,
                        stream: RngStream | None = None) -> np.ndarray:
    """Trajectory [G0, G1, ..., G_layers] of repeated mf_step calls."""
    G0 = np.asarray(G0, dtype=np.float64)
    out = np.empty((layers + 1,) + G0.shape)
    out[0] = G0
    stream = RngStream(0, 0) if stream is None else stream
    for l in range(layers):
        out[l + 1] = mf_step(out[l], a, kind, samples, stream).g_next
    return out


def solve_fixed_point(a: Activation, kind: NormKind, n: int,
                      samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER,
                      stream: RngStream | None = None) -> FixedPoint:
    """Damped two-scalar iteration for the exchangeable fixed point.

    The BSB1 closure property lets the whole matrix iteration collapse to
    (diagonal mean, off-diagonal mean): each step runs mf_step on the
    current BSB1 matrix and re-extracts the scalars.  One set of base
    Gaussian draws is reused across iterations (common random numbers), so
    the update map is deterministic and the stop rule |change| < tol is
    meaningful despite MC noise.
    """
    if n < 2:
        raise BadParameter("fixed point needs n >= 2")
    if samples < 1000:
        raise BadParameter("solve_fixed_point needs samples >= 1000")
    stream = RngStream(0, 0) if stream is None else stream
    dim = n - 1 if kind is NormKind.CENTERED else n
    basis = centering_basis(n) if kind is NormKind.CENTERED else None
    z = stream.gaussian(samples * dim).reshape(samples, dim)
    off_mask = ~np.eye(n, dtype=bool)
    b, c = 1.0, 0.0
    err = float("nan")
    for it in range(1, max_iter + 1):
        G = bsb1_matrix(n, b, c)
        x = _image_from_z(z, G, a, kind, basis)
        g_next, err = _estimate(x)
        b_new = float(np.diag(g_next).mean())
        c_new = float(g_next[off_mask].mean() / b_new)
        if c_new > _DEGENERATE_C:
            raise DegenerateFixedPoint(
                f"iteration collapsed to perfect correlation (c={c_new:.6f})")
        db = DAMPING * (b_new - b)
        dc = DAMPING * (c_new - c)
        b += db
        c += dc
        if abs(db) < tol and abs(dc) < tol:
            return FixedPoint(n=n, norm=kind, b_star=b, c_star=c,
                              g_star=bsb1_matrix(n, b, c), mc_stderr=err,
                              iterations=it)
    raise NoConvergence(
        f"no fixed point after {max_iter} iterations (b={b:.6f}, c={c:.6f})",
        last_iterate={"b": b, "c": c, "stderr": err, "iterations": max_iter})


@dataclass(frozen=True)
class OddGain:
    """Monte Carlo estimate of E[a(w_1 / sqrt(mean_j w_j^2))^2], w iid N(0,1)."""

    value: float
    stderr: float
    samples: int


def odd_gain(a: Activation, n: int, samples: int = DEFAULT_SAMPLES,
             stream: RngStream | None = None) -> OddGain:
    """Diagonal scale of the fixed point for odd activations (c* = 0 there)."""
    if not a.is_odd:
        raise NotOddActivation(f"{a.name} is not odd")
    if n < 2:
        raise BadParameter("odd gain needs n >= 2")
    stream = RngStream(0, 0) if stream is None else stream
    w = stream.gaussian(samples * n).reshape(samples, n)
    x = normalize_rows(w, NormKind.PROJECTION)
    v = apply(a, x[:, :1]).ravel() ** 2
    value = float(v.mean())
    stderr = float(v.std() / np.sqrt(samples))
    return OddGain(value=value, stderr=stderr, samples=samples)
