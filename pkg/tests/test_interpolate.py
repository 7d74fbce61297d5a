"""Functional estimation from past and noisy future observations."""

import numpy as np
import pytest

import statinc as si


SPEC = si.IncrementSpec(1, 1)
F_WHITE = si.DensityModel.increment_constant(SPEC, 1.0)
G_WHITE = si.DensityModel.increment_constant(SPEC, 0.25)


def test_flagship_white_noise_mse():
    sol = si.solve_increment_functional(
        SPEC, np.array([3.0, 2.0, 1.0]), F_WHITE, G_WHITE, L=80
    )
    assert sol.mse == pytest.approx(14.0, rel=1e-10)
    assert sol.mse_quadratic == pytest.approx(14.0, rel=1e-10)
    assert np.allclose(sol.c[:3], [3.0, 2.0, 1.0], atol=1e-10)
    assert np.allclose(sol.c[3:], 0.0, atol=1e-10)


def test_solve_functional_equals_increment_route():
    a = np.array([1.0, 1.0, 1.0])
    prob = si.InterpolationProblem(SPEC, a, F_WHITE, G_WHITE, L=80)
    sol1 = si.solve_functional(prob)
    w = si.functional_decomposition(SPEC, a)
    sol2 = si.solve_increment_functional(SPEC, w.b, F_WHITE, G_WHITE, L=80, v=w.v)
    assert sol1.mse == sol2.mse
    assert np.array_equal(sol1.c, sol2.c)


def test_mse_routes_agree_nonwhite():
    f = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [2.0, 0.4, 0.1])
    g = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [3.0, -0.5])
    sol = si.solve_increment_functional(SPEC, np.array([3.0, 2.0, 1.0]), f, g, L=96)
    assert sol.mse == pytest.approx(sol.mse_quadratic, rel=1e-8)


def test_orthogonality_and_leakage_nonwhite():
    f = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [2.0, 0.4, 0.1])
    g = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [3.0, -0.5])
    b = np.array([3.0, 2.0, 1.0])
    sol = si.solve_increment_functional(SPEC, b, f, g, L=96)
    res = si.orthogonality_residuals(sol)
    bound = 1e-6 * np.linalg.norm(b)
    assert np.max(np.abs(res["past"])) <= bound
    assert np.max(np.abs(res["future"])) <= bound
    tw = si.extract_time_weights(sol, tail=60)
    assert tw.leakage <= 1e-6
    assert np.all(tw.past_k <= -1)
    assert np.all(tw.future_k >= sol.shift + 1)


def test_mse_monotone_in_noise():
    # needs a correlated signal: with white f the observations carry no
    # information about the missing band and the mse is flat in g
    f = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [2.0, 0.9])
    b = np.array([3.0, 2.0, 1.0])
    mses = []
    for sg2 in (0.1, 0.25, 1.0, 4.0):
        g = si.DensityModel.increment_constant(SPEC, sg2)
        mses.append(si.solve_increment_functional(SPEC, b, f, g, L=96).mse)
    assert all(m2 > m1 for m1, m2 in zip(mses, mses[1:]))


def test_mse_flat_in_noise_for_white_signal():
    b = np.array([3.0, 2.0, 1.0])
    for sg2 in (0.1, 4.0):
        g = si.DensityModel.increment_constant(SPEC, sg2)
        sol = si.solve_increment_functional(SPEC, b, F_WHITE, g, L=80)
        assert sol.mse == pytest.approx(float(b @ b), rel=1e-10)


def test_characteristic_factor_relation():
    f = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [2.0, 0.4])
    sol = si.solve_increment_functional(SPEC, np.array([1.0, 1.0]), f, G_WHITE, L=64)
    lam = np.array([0.3, 1.1, 2.5])
    phi = (1.0 - np.exp(-1j * lam * SPEC.mu)) / (1j * lam)
    for which in ("h1", "h2"):
        full = si.evaluate_characteristic(sol, which, lam)
        red = si.reduced_characteristic(sol, which, lam)
        assert np.allclose(full, phi**SPEC.n * red, rtol=1e-12)


def test_single_increment_estimation():
    sol = si.solve_single_increment(SPEC, 1, 2, F_WHITE, G_WHITE, L=64)
    assert sol.mse > 0.0
    assert sol.residual_primary <= 1e-8


def test_higher_order_and_step_variants():
    spec2 = si.IncrementSpec(2, 1)
    f2 = si.DensityModel.increment_constant(spec2, 1.0)
    g2 = si.DensityModel.increment_constant(spec2, 0.25)
    sol = si.solve_increment_functional(spec2, np.array([6.0, 3.0, 1.0]), f2, g2, L=80)
    assert sol.mse == pytest.approx(46.0, rel=1e-10)

    spec3 = si.IncrementSpec(1, 2)
    f3 = si.DensityModel.increment_constant(spec3, 1.0)
    g3 = si.DensityModel.increment_constant(spec3, 0.25)
    sol = si.solve_increment_functional(spec3, np.array([2.0, 1.0, 1.0]), f3, g3, L=80)
    assert sol.mse == pytest.approx(6.0, rel=1e-10)


def test_problem_validation():
    with pytest.raises(si.ConfigError):
        si.InterpolationProblem(SPEC, np.array([]), F_WHITE, G_WHITE)
