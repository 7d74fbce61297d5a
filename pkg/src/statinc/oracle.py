"""Independent finite-window checks of the spectral solutions.

The oracle never touches the operator machinery: it builds covariance
matrices of finitely many observed differences directly from the increment
spectral densities, solves the normal equations of the linear projection,
and optionally validates the projection MSE by seeded Monte Carlo
simulation of jointly Gaussian samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
import scipy.linalg

from .errors import ConfigError
from .increments import IncrementSpec
from .interpolate import EstimateSolution, extract_time_weights
from .spectral import DensityModel


@dataclass(frozen=True)
class OracleConfig:
    """Window size T on each side, simulation size, and RNG seed."""

    T: int = 200
    samples: int = 100_000
    seed: int = 0
    jitter: float = 1e-10


def increment_autocovariance(
    model: DensityModel, max_lag: int, grid: int | None = None
) -> np.ndarray:
    """Autocovariance R(0..max_lag) of the differenced sequence.

    Computed as the plain discrete cosine average of the increment density
    on a dense uniform grid; deliberately a different numerical path from
    the Gauss-Legendre machinery used elsewhere.
    """
    if max_lag < 0:
        raise ConfigError(f"max_lag must be >= 0, got {max_lag}")
    M = grid or max(1 << 14, 1 << int(np.ceil(np.log2(32 * (max_lag + 1)))))
    lam = -pi + 2 * pi * (np.arange(M) + 0.5) / M
    dens = model.increment_density(lam)
    if not np.all(np.isfinite(dens)):
        raise ConfigError("increment density not finite on the sampling grid")
    ks = np.arange(max_lag + 1)
    return (np.cos(np.outer(ks, lam)) @ dens) / M


@dataclass(frozen=True)
class OracleResult:
    """Projection weights and MSE for finite observation windows."""

    mse: float
    var_target: float
    past_k: np.ndarray = field(repr=False)
    past: np.ndarray = field(repr=False)
    future_k: np.ndarray = field(repr=False)
    future: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    cov: np.ndarray = field(repr=False)
    cross: np.ndarray = field(repr=False)


def projection_oracle(
    spec: IncrementSpec,
    b: np.ndarray,
    f: DensityModel,
    g: DensityModel,
    cfg: OracleConfig | None = None,
    shift: int | None = None,
) -> OracleResult:
    """Best linear estimate of sum b(k) dx(k) from T exact past differences
    and T noisy future differences, via the normal equations.

    Observations are dx at positions -T..-1 and dx + dn at positions
    shift+1 .. shift+T, where dn is the differenced noise.
    """
    cfg = cfg or OracleConfig()
    b = np.asarray(b, dtype=float)
    if shift is None:
        shift = b.size - 1 + spec.span
    T = cfg.T
    past_k = np.arange(-T, 0)
    future_k = np.arange(shift + 1, shift + T + 1)
    max_lag = shift + 2 * T
    Rf = increment_autocovariance(f, max_lag)
    Rg = increment_autocovariance(g, max_lag)

    def cov_f(i, j):
        return Rf[np.abs(np.subtract.outer(i, j))]

    n_obs = 2 * T
    Sigma = np.zeros((n_obs, n_obs))
    Sigma[:T, :T] = cov_f(past_k, past_k)
    Sigma[:T, T:] = cov_f(past_k, future_k)
    Sigma[T:, :T] = Sigma[:T, T:].T
    Sigma[T:, T:] = cov_f(future_k, future_k) + Rg[
        np.abs(np.subtract.outer(future_k, future_k))
    ]
    bk = np.arange(b.size)
    cross = np.concatenate(
        [cov_f(past_k, bk) @ b, cov_f(future_k, bk) @ b]
    )
    var_target = float(b @ cov_f(bk, bk) @ b)
    jit = cfg.jitter * np.trace(Sigma) / n_obs
    try:
        cho = scipy.linalg.cho_factor(Sigma)
    except scipy.linalg.LinAlgError:
        cho = scipy.linalg.cho_factor(Sigma + jit * np.eye(n_obs))
    weights = scipy.linalg.cho_solve(cho, cross)
    mse = var_target - float(cross @ weights)
    return OracleResult(
        mse=max(mse, 0.0),
        var_target=var_target,
        past_k=past_k,
        past=weights[:T],
        future_k=future_k,
        future=weights[T:],
        weights=weights,
        cov=Sigma,
        cross=cross,
    )


@dataclass(frozen=True)
class MonteCarloResult:
    empirical_mse: float
    std_error: float
    n_samples: int
    seed: int


def monte_carlo_check(
    oracle: OracleResult, b: np.ndarray, cfg: OracleConfig | None = None
) -> MonteCarloResult:
    """Simulate jointly Gaussian (observations, target) pairs and measure
    the empirical MSE of the oracle's weights.

    Sampling uses numpy's Generator with the PCG64 bit generator (normals
    drawn by the ziggurat method), so results are bit-identical across
    reruns with the same seed.  The joint covariance is factorized through
    a symmetric eigendecomposition with negative eigenvalues clipped.
    """
    cfg = cfg or OracleConfig()
    n_obs = oracle.weights.size
    dim = n_obs + 1
    joint = np.zeros((dim, dim))
    joint[:n_obs, :n_obs] = oracle.cov
    joint[:n_obs, -1] = oracle.cross
    joint[-1, :n_obs] = oracle.cross
    joint[-1, -1] = oracle.var_target
    evals, evecs = np.linalg.eigh(joint)
    root = evecs * np.sqrt(np.clip(evals, 0.0, None))
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    err_sq_sum = 0.0
    err_4_sum = 0.0
    n = cfg.samples
    chunk = 20_000
    done = 0
    while done < n:
        m = min(chunk, n - done)
        z = rng.standard_normal((m, dim))
        x = z @ root.T
        err = x[:, -1] - x[:, :n_obs] @ oracle.weights
        e2 = err * err
        err_sq_sum += float(e2.sum())
        err_4_sum += float((e2 * e2).sum())
        done += m
    mean = err_sq_sum / n
    var = max(err_4_sum / n - mean * mean, 0.0)
    return MonteCarloResult(
        empirical_mse=mean,
        std_error=float(np.sqrt(var / n)),
        n_samples=n,
        seed=cfg.seed,
    )


@dataclass(frozen=True)
class ComparisonReport:
    mse_spectral: float
    mse_oracle: float
    rel_gap: float
    weight_gap: float
    passed: bool


def compare_spectral_vs_oracle(
    sol: EstimateSolution,
    cfg: OracleConfig | None = None,
    rel_tol: float = 1e-3,
    weight_window: int | None = None,
) -> ComparisonReport:
    """Compare a spectral solution's MSE and time weights with the oracle.

    The weight comparison uses the first ``weight_window`` positions on
    each side (where both solutions should agree once T is large enough
    for the oracle's window to look infinite).
    """
    cfg = cfg or OracleConfig()
    ora = projection_oracle(
        sol.spec, sol.b, sol.f_model, sol.g_model, cfg, shift=sol.shift
    )
    rel_gap = abs(sol.mse - ora.mse) / max(abs(ora.mse), 1e-300)
    ww = weight_window or min(cfg.T, 30)
    tw = extract_time_weights(sol, tail=max(ww, 1))
    wp = tw.past[-ww:]  # positions -ww..-1
    op = ora.past[-ww:]
    wf = tw.future[:ww]
    of = ora.future[:ww]
    scale = max(np.max(np.abs(ora.weights)), np.linalg.norm(sol.b), 1e-300)
    weight_gap = max(
        np.max(np.abs(wp - op), initial=0.0), np.max(np.abs(wf - of), initial=0.0)
    ) / scale
    return ComparisonReport(
        mse_spectral=float(sol.mse),
        mse_oracle=float(ora.mse),
        rel_gap=float(rel_gap),
        weight_gap=float(weight_gap),
        passed=bool(rel_gap <= rel_tol),
    )
