"""Shared in-test oracles and the acceptance-summary terminal hook."""

import numpy as np
import pytest

ACCEPTANCE_KEY = pytest.StashKey()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Mutable list of '[PASS]/[FAIL] criterion ...' lines for the summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


# -- oracles -------------------------------------------------------------------

def char_poly_eigs(M: np.ndarray) -> np.ndarray:
    """Eigenvalues via characteristic-polynomial roots (Faddeev-LeVerrier).

    Deliberately avoids any iterative eigensolver: the coefficients come
    from the trace recursion, the roots from the companion matrix.  Only
    trustworthy for small n; the corpus keeps n <= 4.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    Mk = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk
        c = -np.trace(Mk) / k
        coeffs[k] = c
        Mk = Mk + c * np.eye(n)
    roots = np.roots(coeffs)
    return np.sort(roots.real)[::-1]


def eig_corpus(cases: int = 100, seed: int = 99):
    """Fixed corpus of symmetric matrices with n <= 4 for oracle checks."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(cases):
        n = 2 + i % 3  # n in {2, 3, 4}
        A = rng.standard_normal((n, n))
        M = 0.5 * (A + A.T)
        out.append(M)
    return out


def cofactor_det(M: np.ndarray) -> float:
    """Recursive cofactor determinant, independent of any LU code."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        total += ((-1.0) ** j) * M[0, j] * cofactor_det(minor)
    return total


def random_spd(rng: np.random.Generator, n: int, spread: float = 1.0):
    A = rng.standard_normal((n, n)) * spread
    return A @ A.T + n * np.eye(n) * 0.1
