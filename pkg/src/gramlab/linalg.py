"""Dense real matrix kernel for small n (n <= 64).

Symmetric eigendecomposition is a hand-rolled cyclic Jacobi sweep: simple,
deterministic, accurate to the fixed tolerances below.  Matrix functions
(powers, log-determinant, condition number, operator norm) are built on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonSquare, NotPositiveDefinite, Singular

# Fixed contract tolerances (not configurable).
_JACOBI_OFF_TOL = 1e-14     # off-diagonal Frobenius mass, relative to ||M||_F
_JACOBI_MAX_SWEEPS = 100
_SPD_MIN_EIG = 1e-12
_SINGULAR_REL = 1e-12


def _jacobi_sweeps(A, V, tol_off, max_sweeps):
    # Cyclic Jacobi on symmetric A (in place); V accumulates rotations.
    n = A.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        off = np.sqrt(2.0 * off)
        if off <= tol_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    arp = A[p, r]
                    arq = A[q, r]
                    A[p, r] = c * arp - s * arq
                    A[q, r] = s * arp + c * arq
                for r in range(n):
                    arp = A[r, p]
                    arq = A[r, q]
                    A[r, p] = c * arp - s * arq
                    A[r, q] = s * arp + c * arq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(n):
                    vrp = V[r, p]
                    vrq = V[r, q]
                    V[r, p] = c * vrp - s * vrq
                    V[r, q] = s * vrp + c * vrq
    return max_sweeps


try:
    from numba import njit

    _jacobi_sweeps = njit(cache=True)(_jacobi_sweeps)
except ImportError:  # pragma: no cover - numba is a declared dependency
    pass


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _check_square_finite(M) -> np.ndarray:
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    return A


def sym_eig(M) -> Spectrum:
    """Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.

    The input is symmetrized by averaging with its transpose first.  Equal
    eigenvalues keep the Jacobi output order (stable sort), so nothing
    downstream may depend on the eigenvector choice inside a degenerate
    eigenspace.
    """
    A = _check_square_finite(M)
    n = A.shape[0]
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    norm = float(np.sqrt((A * A).sum()))
    if n > 1 and norm > 0.0:
        _jacobi_sweeps(A, V, _JACOBI_OFF_TOL * norm, _JACOBI_MAX_SWEEPS)
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return Spectrum(eigenvalues=vals[order], eigenvectors=V[:, order].copy())


def matpow(M, a: float) -> np.ndarray:
    """M^a for symmetric positive-definite M, via the eigendecomposition."""
    spec = sym_eig(M)
    if spec.eigenvalues.min() <= _SPD_MIN_EIG:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {spec.eigenvalues.min():.3e} <= {_SPD_MIN_EIG}")
    v = spec.eigenvectors
    out = (v * spec.eigenvalues ** a) @ v.T
    return 0.5 * (out + out.T)


def singular_values(M) -> np.ndarray:
    """Descending singular values via the eigenvalues of M^T M."""
    A = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    eigs = sym_eig(A.T @ A).eigenvalues
    return np.sqrt(np.clip(eigs, 0.0, None))


def condition_number(M) -> float:
    """s_1 / s_n; raises Singular when the matrix is numerically singular."""
    s = singular_values(M)
    if s[-1] <= _SINGULAR_REL * s[0]:
        raise Singular(f"smallest singular value {s[-1]:.3e} is negligible")
    return float(s[0] / s[-1])


def logdet(M) -> float:
    """Sum of log eigenvalues of a symmetric positive-definite matrix."""
    spec = sym_eig(M)
    if spec.eigenvalues.min() <= 0.0:
        raise NotPositiveDefinite("matrix is not positive definite")
    return float(np.log(spec.eigenvalues).sum())


def matmul(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[0]:
        raise NonSquare(f"inner dimensions mismatch: {A.shape} @ {B.shape}")
    return A @ B


def transpose(M) -> np.ndarray:
    return np.asarray(M, dtype=np.float64).T.copy()


def frobenius_norm(M) -> float:
    A = np.asarray(M, dtype=np.float64)
    return float(np.sqrt((A * A).sum()))


def operator_norm(M) -> float:
    """Largest singular value."""
    s = singular_values(M)
    return float(s[0])


def inverse(M) -> np.ndarray:
    A = _check_square_finite(M)
    s = singular_values(A)
    if s[-1] <= _SINGULAR_REL * s[0] or s[0] == 0.0:
        raise Singular("matrix is numerically singular")
    return np.linalg.inv(A)
