"""Finite-window projection oracle and Monte-Carlo cross-checks."""

import numpy as np
import pytest

import statinc as si
from statinc import OracleConfig


SPEC = si.IncrementSpec(1, 1)
F = si.DensityModel.from_weighted_inverse_coeffs(SPEC, [2.0, 0.4])
G = si.DensityModel.increment_constant(SPEC, 0.25)
B = np.array([3.0, 2.0, 1.0])


def test_increment_autocovariance_white():
    m = si.DensityModel.increment_constant(SPEC, 2.0)
    R = si.increment_autocovariance(m, 4)
    assert np.allclose(R, [2.0, 0.0, 0.0, 0.0, 0.0], atol=1e-9)


def test_autocovariance_dual_route():
    # independent quadrature route through the structure function
    R = si.increment_autocovariance(F, 5)
    for m in range(6):
        assert R[m] == pytest.approx(si.structure_function(F, m), abs=1e-8)


def test_covariance_block_psd():
    ora = si.projection_oracle(SPEC, B, F, G, OracleConfig(T=40))
    w = np.linalg.eigvalsh(ora.cov)
    assert w.min() >= -1e-8 * np.trace(ora.cov)


def test_oracle_mse_nonincreasing_in_T():
    mses = [
        si.projection_oracle(SPEC, B, F, G, OracleConfig(T=T)).mse
        for T in (10, 25, 60, 120)
    ]
    for m1, m2 in zip(mses, mses[1:]):
        assert m2 <= m1 + 1e-10


def test_oracle_dominates_spectral_optimum():
    sol = si.solve_increment_functional(SPEC, B, F, G, L=96)
    for T in (10, 40, 120):
        ora = si.projection_oracle(SPEC, B, F, G, OracleConfig(T=T))
        assert ora.mse >= sol.mse - 1e-9


def test_compare_spectral_vs_oracle_passes():
    sol = si.solve_increment_functional(SPEC, B, F, G, L=160)
    rep = si.compare_spectral_vs_oracle(sol, OracleConfig(T=160))
    assert rep.passed
    assert rep.rel_gap <= 1e-3


def test_monte_carlo_seeded_and_consistent():
    cfg = OracleConfig(T=60, samples=20000, seed=123)
    ora = si.projection_oracle(SPEC, B, F, G, cfg)
    mc1 = si.monte_carlo_check(ora, B, cfg)
    mc2 = si.monte_carlo_check(ora, B, cfg)
    assert mc1.empirical_mse == mc2.empirical_mse  # bit identical rerun
    assert abs(mc1.empirical_mse - ora.mse) <= 3.0 * mc1.std_error


def test_monte_carlo_seed_sensitivity():
    cfg1 = OracleConfig(T=40, samples=5000, seed=1)
    cfg2 = OracleConfig(T=40, samples=5000, seed=2)
    ora = si.projection_oracle(SPEC, B, F, G, cfg1)
    mc1 = si.monte_carlo_check(ora, B, cfg1)
    mc2 = si.monte_carlo_check(ora, B, cfg2)
    assert mc1.empirical_mse != mc2.empirical_mse
