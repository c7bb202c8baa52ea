"""One-shot oracle computations whose outputs are frozen into the test suite.

Run from the repo root:  python3 tools/frozen_oracles.py

Every value here is computed by a route independent of the library code
(numpy's own PCG64 generator, scipy quadrature, dense grid integration),
then pasted as a literal into tests/ next to the assertion that uses it.
"""

import numpy as np
from scipy import integrate


def odd_gain_mc(fn, n, samples, seed):
    """E[fn(w_1 / sqrt(mean_j w_j^2))^2] for w ~ N(0, I_n), brute force."""
    rng = np.random.default_rng(seed)
    total = 0.0
    total2 = 0.0
    block = 1_000_000
    done = 0
    while done < samples:
        b = min(block, samples - done)
        w = rng.standard_normal((b, n))
        r = w[:, 0] / np.sqrt((w * w).mean(axis=1))
        v = fn(r) ** 2
        total += v.sum()
        total2 += (v * v).sum()
        done += b
    mean = total / samples
    var = total2 / samples - mean * mean
    return mean, np.sqrt(var / samples)


def sin_gain_quadrature():
    """n=2 case reduces to a 1-D integral: w1*sqrt(2)/||w|| = sqrt(2)*cos(theta)."""
    val, err = integrate.quad(
        lambda th: np.sin(np.sqrt(2.0) * np.cos(th)) ** 2 / np.pi, 0.0, np.pi,
        epsabs=1e-12, epsrel=1e-12)
    return val, err


def tv_1d_numeric(sd1, sd2):
    """Total variation between N(0, sd1^2) and N(0, sd2^2) on a fine grid."""
    x = np.linspace(-40.0, 40.0, 4_000_001)
    p = np.exp(-0.5 * (x / sd1) ** 2) / (sd1 * np.sqrt(2 * np.pi))
    q = np.exp(-0.5 * (x / sd2) ** 2) / (sd2 * np.sqrt(2 * np.pi))
    return 0.5 * np.trapz(np.abs(p - q), x)


def distortion_dense(fn, n, points, seed):
    """Brute-force sup of ||fn(x)||/||x|| over the sqrt(n)-sphere.

    Random sphere points alone undershoot flat maximizers, so the
    candidate set includes signed axis points and the signed
    equal-coordinate points.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    block = 200_000
    done = 0
    while done < points:
        b = min(block, points - done)
        x = rng.standard_normal((b, n))
        x *= np.sqrt(n) / np.linalg.norm(x, axis=1, keepdims=True)
        r = np.linalg.norm(fn(x), axis=1) / np.sqrt(n)
        best = max(best, float(r.max()))
        done += b
    cands = []
    for s in (1.0, -1.0):
        cands.append(s * np.ones(n))                      # equal coordinates
        e = np.zeros(n)
        e[0] = s * np.sqrt(n)
        cands.append(e)                                   # axis spike
    for c in cands:
        r = np.linalg.norm(fn(c[None, :])) / np.sqrt(n)
        best = max(best, float(r))
    return best


def selu(x):
    lam, alpha = 1.0507009873554805, 1.6732632423543772
    return np.where(x > 0, lam * x, lam * alpha * np.expm1(x))


def celu(x):
    return np.where(x > 0, x, np.expm1(x))


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


if __name__ == "__main__":
    v, se = odd_gain_mc(np.tanh, 10, 10_000_000, seed=20240816)
    print(f"odd gain tanh n=10 (1e7 MC):  {v:.10f}  stderr {se:.2e}")

    v, err = sin_gain_quadrature()
    print(f"odd gain sin  n=2 (quad):     {v:.12f}  quad err {err:.1e}")

    v, se = odd_gain_mc(np.sin, 2, 10_000_000, seed=4)
    print(f"odd gain sin  n=2 (1e7 MC):   {v:.10f}  stderr {se:.2e}  (cross-check)")

    tv = tv_1d_numeric(1.0, 2.0)
    print(f"TV( N(0,1), N(0,4) ) numeric: {tv:.10f}")
    delta = (4.0 - 1.0) ** 2
    print(f"  divergence delta = {delta}, bounds ({delta/100}, {min(1.0, 1.5*delta)})")

    for name, fn in [("tanh", np.tanh), ("sin", np.sin), ("selu", selu),
                     ("celu", celu), ("sigmoid", sigmoid)]:
        g5 = distortion_dense(fn, 5, 1_000_000, seed=11)
        print(f"distortion dense oracle {name:8s} n=5: {g5:.10f}")
    print(f"  reference points: tanh(1)={np.tanh(1.0):.10f} sin(1)={np.sin(1.0):.10f}")
