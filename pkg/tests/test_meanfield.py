"""Width-limit Gram recurrence, fixed-point solver, and odd-activation gain."""

import numpy as np
import pytest

from gramlab import (Activation, FixedPoint, NormKind, mf_recurrence_trace,
                     mf_step, odd_gain, solve_fixed_point)
from gramlab.errors import (BadParameter, DegenerateFixedPoint, NoConvergence,
                            NotOddActivation)
from gramlab.meanfield import bsb1_matrix, centering_basis
from gramlab.rng import RngStream

TANH = Activation("tanh")
IDENT = Activation("identity")
SIN = Activation("sin")
RELU = Activation("relu")

# 1e7-sample Monte Carlo oracle, frozen; stderr of the oracle itself
TANH_GAIN_N10 = 0.4119390008
TANH_GAIN_N10_SE = 9.85e-5
# polar quadrature oracle (absolute error < 1e-13), frozen
SIN_GAIN_N2 = 0.598274047635


def test_bsb1_matrix_structure():
    G = bsb1_matrix(4, 1.0, 0.5)
    assert np.allclose(np.diag(G), 1.0)
    off = G[~np.eye(4, dtype=bool)]
    assert np.allclose(off, 0.5)


def test_centering_basis_orthonormal_zero_sum():
    for n in (2, 3, 7):
        B = centering_basis(n)
        assert B.shape == (n, n - 1)
        assert np.abs(B.T @ B - np.eye(n - 1)).max() <= 1e-12
        assert np.abs(B.T @ np.ones(n)).max() <= 1e-12


# -- mf_step ----------------------------------------------------------------

def test_step_identity_projection_fixes_identity():
    est = mf_step(np.eye(4), IDENT, NormKind.PROJECTION, stream=RngStream(2, 0))
    assert np.abs(est.g_next - np.eye(4)).max() <= 3.0 * est.stderr
    assert np.array_equal(est.g_next, est.g_next.T)


def test_step_identity_centered_hits_scaled_projector():
    ref = (4.0 / 3.0) * (np.eye(4) - np.ones((4, 4)) / 4.0)
    est = mf_step(np.eye(4), IDENT, NormKind.CENTERED, stream=RngStream(2, 0))
    assert np.abs(est.g_next - ref).max() <= 3.0 * est.stderr


def test_step_fixes_relu_centered_fixed_point():
    fp = solve_fixed_point(RELU, NormKind.CENTERED, 10, stream=RngStream(0, 0))
    est = mf_step(fp.g_star, RELU, NormKind.CENTERED, stream=RngStream(2, 5))
    assert np.abs(est.g_next - fp.g_star).max() <= 3.0 * est.stderr


def test_step_bsb1_closure():
    # exchangeable input stays exchangeable within MC error
    est = mf_step(bsb1_matrix(6, 1.3, 0.4), TANH, NormKind.PROJECTION,
                  stream=RngStream(0, 4))
    G = est.g_next
    diag = np.eye(6, dtype=bool)
    assert np.abs(G[diag] - G[diag].mean()).max() < 4.0 * est.stderr
    assert np.abs(G[~diag] - G[~diag].mean()).max() < 4.0 * est.stderr


def test_step_odd_symmetry_and_scale_invariance():
    outs = []
    for beta in (0.5, 1.0, 2.0):
        est = mf_step(beta * np.eye(5), TANH, NormKind.PROJECTION,
                      stream=RngStream(1, 3))
        off = np.abs(est.g_next[~np.eye(5, dtype=bool)]).max()
        assert off <= 3.0 * est.stderr
        outs.append(est.g_next)
    # normalization removes the scale of G up to rounding
    assert np.allclose(outs[0], outs[1], rtol=1e-10)
    assert np.allclose(outs[1], outs[2], rtol=1e-10)


def test_step_sample_floor():
    with pytest.raises(BadParameter):
        mf_step(np.eye(3), TANH, NormKind.PROJECTION, samples=999)


# -- solve_fixed_point --------------------------------------------------------

def test_identity_projection_fixed_point():
    fp = solve_fixed_point(IDENT, NormKind.PROJECTION, 6, stream=RngStream(0, 0))
    assert abs(fp.b_star - 1.0) <= 3.0 * fp.mc_stderr
    assert abs(fp.c_star) <= 3.0 * fp.mc_stderr
    assert np.abs(fp.g_star - bsb1_matrix(6, fp.b_star, fp.c_star)).max() == 0.0


def test_identity_centered_fixed_point_has_negative_correlation():
    # centering kills the all-ones direction: c* = -1/(n-1)
    fp = solve_fixed_point(IDENT, NormKind.CENTERED, 5, stream=RngStream(0, 0))
    assert abs(fp.b_star - 1.0) <= 3.0 * fp.mc_stderr
    assert abs(fp.c_star - (-0.25)) <= 3.0 * fp.mc_stderr


def test_tanh_projection_fixed_point_is_diagonal():
    fp = solve_fixed_point(TANH, NormKind.PROJECTION, 10, stream=RngStream(0, 0))
    assert abs(fp.c_star) < 3.0 * fp.mc_stderr
    gain = odd_gain(TANH, 10, stream=RngStream(1, 0))
    comb = np.hypot(fp.mc_stderr, gain.stderr)
    assert abs(fp.b_star - gain.value) <= 3.0 * comb


def test_sin_projection_fixed_point_is_diagonal():
    fp = solve_fixed_point(SIN, NormKind.PROJECTION, 10, stream=RngStream(0, 0))
    assert abs(fp.c_star) < 3.0 * fp.mc_stderr
    gain = odd_gain(SIN, 10, stream=RngStream(1, 0))
    comb = np.hypot(fp.mc_stderr, gain.stderr)
    assert abs(fp.b_star - gain.value) <= 3.0 * comb


def test_relu_centered_fixed_point_structure():
    fp = solve_fixed_point(RELU, NormKind.CENTERED, 10, stream=RngStream(0, 0))
    se = fp.mc_stderr
    assert abs(fp.b_star - 0.5) <= 3.0 * se
    assert -3.0 * se <= fp.c_star <= 0.5 + 3.0 * se
    # centered-subspace spectrum sits in the predicted band
    ce = fp.centered_eigenvalues()
    assert ce.shape == (9,)
    assert np.all(ce >= 0.25 - 0.01)
    assert np.all(ce <= 0.5 + 0.01)


def test_fixed_point_eigenvalue_formulas():
    fp = FixedPoint(n=4, norm=NormKind.PROJECTION, b_star=1.0, c_star=0.5,
                    g_star=bsb1_matrix(4, 1.0, 0.5), mc_stderr=0.0,
                    iterations=1)
    assert np.allclose(fp.eigenvalues(), [2.5, 0.5, 0.5, 0.5])
    assert np.allclose(fp.centered_eigenvalues(), [0.5, 0.5, 0.5])
    assert fp.inverse_operator_norm() == pytest.approx(2.0, rel=1e-12)


def test_inverse_operator_norm_uses_centered_subspace():
    fp = FixedPoint(n=5, norm=NormKind.CENTERED, b_star=1.0, c_star=-0.25,
                    g_star=bsb1_matrix(5, 1.0, -0.25), mc_stderr=0.0,
                    iterations=1)
    # full-space min eigenvalue is 1-0.25*... the all-ones one: 1(1-0.25*5)=0
    assert fp.eigenvalues().min() == pytest.approx(0.0, abs=1e-12)
    assert fp.inverse_operator_norm() == pytest.approx(1.0 / 1.25, rel=1e-12)


def test_degenerate_fixed_point_not_invertible():
    fp = FixedPoint(n=3, norm=NormKind.PROJECTION, b_star=1.0, c_star=1.0,
                    g_star=bsb1_matrix(3, 1.0, 1.0), mc_stderr=0.0,
                    iterations=1)
    with pytest.raises(DegenerateFixedPoint):
        fp.inverse_operator_norm()


def test_solver_determinism():
    a = solve_fixed_point(TANH, NormKind.PROJECTION, 5, stream=RngStream(3, 0))
    b = solve_fixed_point(TANH, NormKind.PROJECTION, 5, stream=RngStream(3, 0))
    assert (a.b_star, a.c_star, a.iterations) == (b.b_star, b.c_star,
                                                  b.iterations)
    assert np.array_equal(a.g_star, b.g_star)


def test_solver_no_convergence_carries_last_iterate():
    with pytest.raises(NoConvergence) as exc:
        solve_fixed_point(TANH, NormKind.PROJECTION, 6, max_iter=1,
                          stream=RngStream(0, 0))
    last = exc.value.last_iterate
    assert set(last) >= {"b", "c", "stderr", "iterations"}
    assert last["iterations"] == 1
    assert "after 1 iterations" in str(exc.value)


def test_solver_degenerate_collapse_guard(monkeypatch):
    import gramlab.meanfield as mf

    def constant_image(z, G, a, kind, basis):
        return np.ones((z.shape[0], G.shape[0]))

    monkeypatch.setattr(mf, "_image_from_z", constant_image)
    with pytest.raises(DegenerateFixedPoint):
        solve_fixed_point(TANH, NormKind.PROJECTION, 4, stream=RngStream(0, 0))


def test_solver_validation():
    with pytest.raises(BadParameter):
        solve_fixed_point(TANH, NormKind.PROJECTION, 1)
    with pytest.raises(BadParameter):
        solve_fixed_point(TANH, NormKind.PROJECTION, 5, samples=10)


# -- odd gain -----------------------------------------------------------------

def test_odd_gain_identity_is_one():
    g = odd_gain(IDENT, 7, stream=RngStream(0, 0))
    assert abs(g.value - 1.0) <= 3.0 * g.stderr


def test_odd_gain_tanh_matches_frozen_oracle():
    g = odd_gain(TANH, 10, samples=1_000_000, stream=RngStream(0, 0))
    comb = np.hypot(g.stderr, TANH_GAIN_N10_SE)
    assert abs(g.value - TANH_GAIN_N10) <= 3.0 * comb


def test_odd_gain_sin_matches_quadrature_oracle():
    g = odd_gain(SIN, 2, samples=1_000_000, stream=RngStream(0, 0))
    assert abs(g.value - SIN_GAIN_N2) <= 3.0 * g.stderr


def test_odd_gain_rejects_even_activations():
    with pytest.raises(NotOddActivation):
        odd_gain(RELU, 5)
    with pytest.raises(BadParameter):
        odd_gain(TANH, 1)


# -- recurrence trace ----------------------------------------------------------

def test_trace_constant_at_fixed_point():
    fp = solve_fixed_point(TANH, NormKind.PROJECTION, 6, stream=RngStream(0, 0))
    tr = mf_recurrence_trace(fp.g_star, TANH, NormKind.PROJECTION, 5,
                             stream=RngStream(1, 0))
    traces = np.trace(tr, axis1=1, axis2=2)
    assert np.abs(traces - np.trace(fp.g_star)).max() <= 3.0 * 6 * fp.mc_stderr


def test_trace_correlation_decays_monotonically():
    tr = mf_recurrence_trace(bsb1_matrix(4, 1.0, 0.9), TANH,
                             NormKind.PROJECTION, 20, stream=RngStream(2, 0))
    diag = np.eye(4, dtype=bool)
    c = np.array([g[~diag].mean() / g[diag].mean() for g in tr])
    violations = int((np.diff(c) >= 0.0).sum())
    assert violations <= 1
    assert c[-1] < 0.05


def test_trace_random_spd_converges_to_identity():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((4, 4))
    G0 = A @ A.T + 0.4 * np.eye(4)
    tr = mf_recurrence_trace(G0, IDENT, NormKind.PROJECTION, 15,
                             stream=RngStream(3, 0))
    first = np.linalg.norm(tr[0] - np.eye(4))
    last = np.linalg.norm(tr[-1] - np.eye(4))
    assert last < 0.05
    assert last < first / 100.0
