"""Seeded, splittable randomness.

Counter-based generator: output k of a stream with 64-bit base seed B is
``mix64(B + k*GOLD)`` where ``mix64`` is the splitmix64 finalizer.  Stream
derivation is the documented pure function

    base(master_seed, stream_id) = mix64(master_seed + GOLD*(stream_id+1))

and ``RngStream.derived(i)`` applies the same map to its own base.  Normal
variates come from polar Box-Muller on consecutive uniform pairs, both
outputs kept in order; generation is buffered in pairs so the delivered
Gaussian sequence is invariant to how requests are chunked.

Within-implementation bit-exactness is promised (same seed, same machine,
same install -> identical sequences); cross-implementation exactness is not.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonPositiveVariance

MASK64 = (1 << 64) - 1
GOLD = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_DOUBLE = 2.0 ** -53  # top 53 bits -> [0, 1)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_base(master_seed: int, stream_id: int) -> int:
    """Pure 64-bit mixing of (master_seed, stream_id) into a stream base."""
    return mix64((master_seed + GOLD * ((stream_id & MASK64) + 1)) & MASK64)


def _fill_pairs_scalar(seed, counter, out):
    # out has even length; returns the advanced uniform counter.
    gold = np.uint64(GOLD)
    m1 = np.uint64(_M1)
    m2 = np.uint64(_M2)
    k = counter
    i = 0
    m = out.shape[0]
    while i < m:
        k += np.uint64(1)
        z = seed + k * gold
        z = (z ^ (z >> np.uint64(30))) * m1
        z = (z ^ (z >> np.uint64(27))) * m2
        z = z ^ (z >> np.uint64(31))
        u1 = (z >> np.uint64(11)) * _TO_DOUBLE
        k += np.uint64(1)
        z = seed + k * gold
        z = (z ^ (z >> np.uint64(30))) * m1
        z = (z ^ (z >> np.uint64(27))) * m2
        z = z ^ (z >> np.uint64(31))
        u2 = (z >> np.uint64(11)) * _TO_DOUBLE
        v1 = 2.0 * u1 - 1.0
        v2 = 2.0 * u2 - 1.0
        s = v1 * v1 + v2 * v2
        if s >= 1.0 or s == 0.0:
            continue
        f = math.sqrt(-2.0 * math.log(s) / s)
        out[i] = v1 * f
        i += 1
        out[i] = v2 * f
        i += 1
    return k


def _fill_pairs_numpy(seed, counter, out):
    """Vectorized replica of _fill_pairs_scalar (same consumption order)."""
    m = out.shape[0]
    need = m // 2
    filled = 0
    k = int(counter)
    seed_u = np.uint64(int(seed) & MASK64)
    while filled < need:
        batch = max(1024, int((need - filled) * 1.3) + 16)
        ks = (np.uint64((k + 1) & MASK64)
              + np.arange(2 * batch, dtype=np.uint64))
        z = seed_u + ks * np.uint64(GOLD)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
        u = (z >> np.uint64(11)).astype(np.float64) * _TO_DOUBLE
        v1 = 2.0 * u[0::2] - 1.0
        v2 = 2.0 * u[1::2] - 1.0
        s = v1 * v1 + v2 * v2
        ok = np.nonzero((s < 1.0) & (s > 0.0))[0]
        take = min(need - filled, ok.shape[0])
        if take:
            sel = ok[:take]
            f = np.sqrt(-2.0 * np.log(s[sel]) / s[sel])
            out[2 * filled: 2 * (filled + take): 2] = v1[sel] * f
            out[2 * filled + 1: 2 * (filled + take): 2] = v2[sel] * f
            filled += take
        if filled == need:
            # stop exactly at the pair that completed the request
            k = (k + 2 * (int(sel[take - 1]) + 1)) & MASK64
        else:
            k = (k + 2 * batch) & MASK64
    return np.uint64(k)


try:
    from numba import njit

    _fill_pairs = njit(cache=True, fastmath=True)(_fill_pairs_scalar)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _fill_pairs = _fill_pairs_numpy
    HAVE_NUMBA = False


class RngStream:
    """One deterministic Gaussian stream identified by (master_seed, stream_id).

    Value-like: moving a stream to another worker and drawing there gives
    the same numbers as drawing locally.  State is (base, counter, pending
    leftover from the last odd request) and is fully serializable.
    """

    __slots__ = ("base", "_counter", "_pending")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.base = derive_base(master_seed, stream_id)
        self._counter = 0
        self._pending = None

    def derived(self, index: int) -> "RngStream":
        """Child stream; pure function of this stream's identity and index."""
        child = RngStream.__new__(RngStream)
        child.base = mix64((self.base + GOLD * ((index & MASK64) + 1)) & MASK64)
        child._counter = 0
        child._pending = None
        return child

    def state(self) -> tuple:
        return (self.base, self._counter, self._pending)

    @classmethod
    def from_state(cls, state: tuple) -> "RngStream":
        s = cls.__new__(cls)
        s.base, s._counter, s._pending = state
        return s

    def gaussian(self, count: int) -> np.ndarray:
        """Next `count` standard normal draws as a 1-D float64 array."""
        if count < 0:
            raise ValueError("count must be >= 0")
        out = np.empty(count, dtype=np.float64)
        if count == 0:
            return out
        if self._pending is None and (count & 1) == 0:
            # fast path: whole request is complete pairs, fill in place
            self._counter = int(_fill_pairs(np.uint64(self.base),
                                            np.uint64(self._counter), out))
            return out
        pos = 0
        if self._pending is not None:
            out[0] = self._pending
            self._pending = None
            pos = 1
            if count == 1:
                return out
        remaining = count - pos
        gen = remaining + (remaining & 1)
        tmp = np.empty(gen, dtype=np.float64)
        self._counter = int(_fill_pairs(np.uint64(self.base),
                                        np.uint64(self._counter), tmp))
        out[pos:] = tmp[:remaining]
        if gen > remaining:
            self._pending = float(tmp[-1])
        return out


def gaussian_matrix(stream: RngStream, rows: int, cols: int,
                    variance: float = 1.0) -> np.ndarray:
    """rows x cols matrix of i.i.d. N(0, variance) entries."""
    if variance <= 0:
        raise NonPositiveVariance(f"variance must be > 0, got {variance}")
    if rows < 0 or cols < 0:
        raise ValueError("rows and cols must be >= 0")
    out = stream.gaussian(rows * cols).reshape(rows, cols)
    if variance != 1.0:
        out *= math.sqrt(variance)
    return out


def mvn_rows(stream: RngStream, count: int, cov: np.ndarray) -> np.ndarray:
    """count x n matrix whose rows are i.i.d. N(0, cov); cov must be SPD.

    Rows are generated as z @ cov^{1/2} with the symmetric square root,
    so the draw count is exactly count*n standard normals.
    """
    from .linalg import matpow

    cov = np.asarray(cov, dtype=np.float64)
    n = cov.shape[0]
    root = matpow(cov, 0.5)
    if count == 0:
        return np.empty((0, n), dtype=np.float64)
    z = stream.gaussian(count * n).reshape(count, n)
    return z @ root
