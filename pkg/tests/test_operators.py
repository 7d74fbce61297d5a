"""Toeplitz/Hankel operator blocks and the coupled coefficient system."""

import numpy as np
import pytest
import scipy.linalg

import statinc as si
from statinc import FourierTable, QuadratureConfig


def _tables(f_head, g_head, K):
    f = FourierTable.from_head(np.asarray(f_head, float), K)
    g = FourierTable.from_head(np.asarray(g_head, float), K)
    return f, g


def test_block_structure_entrywise():
    rng = np.random.default_rng(11)
    L, shift = 12, 4
    fh = rng.normal(size=6) * 0.1
    fh[0] = 2.0
    gh = rng.normal(size=6) * 0.1
    gh[0] = 3.0
    ft, gt = _tables(fh, gh, 2 * L + shift)
    ops = si.build_operator_set(ft, gt, shift, L)
    f = ft.coeffs
    g = gt.coeffs
    for l in range(L):
        for k in range(L):
            assert ops.Fe[l, k] == pytest.approx(f[abs(k - l)])
            assert ops.Ge[l, k] == pytest.approx(g[abs(k - l)])
            assert ops.Gc[l, k] == pytest.approx(g[abs(shift - l - k)])
            assert ops.Fc[l, k] == pytest.approx(f[abs(shift - l - k)])
    assert np.allclose(ops.Fe, ops.Fe.T)
    assert np.allclose(ops.Gc, ops.Gc.T)  # Hankel matrices are symmetric


def test_solve_matches_dense_oracle():
    # Independent route: assemble the two-equation system as one dense
    # block matrix in (c, e) and solve it directly.
    rng = np.random.default_rng(5)
    L, shift = 64, 3
    fh = np.array([2.0, 0.4, 0.1])
    gh = np.array([3.0, -0.5])
    ft, gt = _tables(fh, gh, 2 * L + shift)
    ops = si.build_operator_set(ft, gt, shift, L)
    comp = si.compose(ops)
    b = np.array([3.0, 2.0, 1.0])
    sol = si.solve_coefficients(comp, ops, b)
    assert sol.valid

    bpad = np.zeros(L)
    bpad[: b.size] = b
    big = np.zeros((2 * L, 2 * L))
    big[:L, :L] = ops.Fe + ops.Ge
    big[:L, L:] = -ops.Gc
    big[L:, :L] = ops.Gc
    big[L:, L:] = -ops.Ge
    rhs = np.concatenate([bpad, np.zeros(L)])
    ce = scipy.linalg.solve(big, rhs)
    assert np.allclose(sol.c, ce[:L], atol=1e-10)
    assert np.allclose(sol.e_vec, ce[L:], atol=1e-10)


def test_white_noise_closed_form_coefficients():
    # both sides white: Ge = (1/sg2) I up to the Hankel coupling, and the
    # solution reduces to c = b/(1/sf2 + 1/sg2 - coupling), checked against
    # the flagship hand-solved case c = (3,2,1)/... with mse 14 elsewhere;
    # here we check e = Ge^{-1} Gc c exactly.
    L, shift = 40, 3
    ft, gt = _tables([1.0], [4.0], 2 * L + shift)
    ops = si.build_operator_set(ft, gt, shift, L)
    comp = si.compose(ops)
    b = np.array([3.0, 2.0, 1.0])
    sol = si.solve_coefficients(comp, ops, b)
    e_direct = scipy.linalg.solve(ops.Ge, ops.Gc @ sol.c)
    assert np.allclose(sol.e_vec, e_direct, atol=1e-12)
    assert sol.residual_primary <= 1e-12
    assert sol.residual_coupling <= 1e-12


def test_compose_condition_reported():
    L, shift = 16, 2
    ft, gt = _tables([1.0, 0.2], [2.0, 0.3], 2 * L + shift)
    comp = si.compose(si.build_operator_set(ft, gt, shift, L))
    assert comp.cond_Ge >= 1.0
    assert comp.cond_Fmu >= 1.0
    # Gmu Fmu = Ge^{-1} Gc must hold for the composed pair
    ops = si.build_operator_set(ft, gt, shift, L)
    lhs = comp.Gmu @ comp.Fmu
    rhs = scipy.linalg.solve(ops.Ge, ops.Gc)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_insufficient_table_range():
    ft = FourierTable.from_head(np.array([1.0]), 10)
    with pytest.raises(si.InsufficientFourierRangeError):
        si.build_operator_set(ft, ft, shift=3, L=20)


def test_truncation_sweep_white_converges_early():
    spec = si.IncrementSpec(1, 1)
    f = si.DensityModel.increment_constant(spec, 1.0)
    g = si.DensityModel.increment_constant(spec, 0.25)
    b = np.array([3.0, 2.0, 1.0])

    def solve_at(L):
        return si.solve_increment_functional(spec, b, f, g, L=L)

    rep = si.truncation_sweep(solve_at, [32, 64, 128])
    assert rep.converged and rep.converged_at == 64

    rep2 = si.truncation_sweep(solve_at, [64, 64])
    assert rep2.mse_drifts[0] == 0.0


def test_truncation_sweep_needs_two_values():
    with pytest.raises(si.ConfigError):
        si.truncation_sweep(lambda L: None, [32])
