"""Elementwise activations and their distortion constant on the sqrt(n)-sphere.

The distortion of an activation is sup ||a(x)|| / ||x|| over the sphere of
radius sqrt(n); it is estimated from below by projected gradient ascent
with random restarts.  For a scaled activation c*a the distortion is
exactly c times that of a.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772
CELU_ALPHA = 1.0

ACTIVATION_NAMES = ("identity", "relu", "tanh", "sigmoid", "sin", "selu", "celu")
ODD_NAMES = ("identity", "tanh", "sin")

# |a(x)| <= C|x| + D per activation.  sigmoid has no through-zero linear
# bound (a(0) = 1/2), hence its nonzero offset; selu's negative branch is
# steeper than its positive one, giving C = lambda*alpha.
LINEAR_BOUND = {
    "identity": (1.0, 0.0),
    "relu": (1.0, 0.0),
    "tanh": (1.0, 0.0),
    "sin": (1.0, 0.0),
    "celu": (1.0, 0.0),
    "selu": (SELU_LAMBDA * SELU_ALPHA, 0.0),
    "sigmoid": (0.25, 0.5),
}


@dataclass(frozen=True)
class Activation:
    """An elementwise map, optionally post-scaled by a constant factor."""

    name: str
    scale: float = 1.0
    params: tuple = field(default=())  # (("lambda", v), ("alpha", v)) overrides

    def __post_init__(self):
        if self.name not in ACTIVATION_NAMES:
            raise ValueError(f"unknown activation {self.name!r}; "
                             f"choose from {ACTIVATION_NAMES}")

    def param(self, key: str, default: float) -> float:
        for k, v in self.params:
            if k == key:
                return float(v)
        return default

    @property
    def is_odd(self) -> bool:
        return self.name in ODD_NAMES


def apply(a: Activation, M) -> np.ndarray:
    """Elementwise image of M under a; shape preserved."""
    x = np.asarray(M, dtype=np.float64)
    if a.name == "identity":
        y = x.copy()
    elif a.name == "relu":
        y = np.maximum(x, 0.0)
    elif a.name == "tanh":
        y = np.tanh(x)
    elif a.name == "sigmoid":
        y = 1.0 / (1.0 + np.exp(-x))
    elif a.name == "sin":
        y = np.sin(x)
    elif a.name == "selu":
        lam = a.param("lambda", SELU_LAMBDA)
        alpha = a.param("alpha", SELU_ALPHA)
        y = lam * np.where(x > 0.0, x, alpha * np.expm1(x))
    else:  # celu
        alpha = a.param("alpha", CELU_ALPHA)
        y = np.where(x > 0.0, x, alpha * np.expm1(x / alpha))
    if a.scale != 1.0:
        y *= a.scale
    return y


@dataclass(frozen=True)
class DistortionEstimate:
    """Lower-bound estimate of the distortion, with its maximizer."""

    gamma: float
    maximizer: np.ndarray
    restarts_used: int


def _sphere_ratio(a: Activation, x: np.ndarray) -> float:
    return float(np.sqrt((apply(a, x) ** 2).sum() / (x * x).sum()))


def distortion(a: Activation, n: int, restarts: int = 64,
               stream: RngStream | None = None) -> DistortionEstimate:
    """Projected gradient ascent for sup ||a(x)||/||x|| on the sqrt(n)-sphere.

    Finite-difference gradients, projection back to the sphere each step,
    step 0.1 halved on non-improvement, 500 steps cap, one derived
    substream per restart.  The result is a lower bound by construction;
    ties across restarts keep the lowest restart index.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if stream is None:
        stream = RngStream(0, 0)
    sqrt_n = np.sqrt(float(n))
    h = 1e-5
    best_f = -np.inf
    best_x = None
    for r in range(restarts):
        sub = stream.derived(r)
        x = sub.gaussian(n)
        norm = np.sqrt((x * x).sum())
        while norm == 0.0:  # probability zero; keep the stream usable
            x = sub.gaussian(n)
            norm = np.sqrt((x * x).sum())
        x = x * (sqrt_n / norm)
        f = _sphere_ratio(a, x)
        step = 0.1
        for _ in range(500):
            probe = np.vstack([x + h * np.eye(n), x - h * np.eye(n)])
            vals = np.sqrt((apply(a, probe) ** 2).sum(axis=1))
            grad = (vals[:n] - vals[n:]) / (2.0 * h)
            grad -= (grad @ x / float(n)) * x  # tangent component
            gnorm = np.sqrt((grad * grad).sum())
            if gnorm == 0.0 or step < 1e-12:
                break
            cand = x + (step / gnorm) * grad
            cand *= sqrt_n / np.sqrt((cand * cand).sum())
            fc = _sphere_ratio(a, cand)
            if fc > f:
                x, f = cand, fc
            else:
                step *= 0.5
        if f > best_f:
            best_f = f
            best_x = x
    gamma = _sphere_ratio(a, best_x)  # exact ratio at the reported maximizer
    return DistortionEstimate(gamma=gamma, maximizer=best_x,
                              restarts_used=restarts)
