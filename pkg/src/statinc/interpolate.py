"""Minimum-MSE interpolation of linear functionals of missing values.

The observations are: the raw sequence exactly at all positions <= -1, and
the noise-corrupted sequence at all positions >= N + 1.  In difference
coordinates this means exact differences at positions <= -1 and noisy
differences at positions >= shift + 1 with shift = N + mu*n.  A functional
with weights b on the differenced window 0..len(b)-1 is estimated by

    c  solving  Fmu c = b          (series C on nonnegative powers)
    e = Ge^-1 Gc c                 (series E on powers <= shift)

and the reduced spectral characteristics of the estimate are

    h1_red = B - C * wi_f + (E - C) * wi_g     (past side, powers <= -1)
    h2_red = (C - E) * wi_g                    (future side, powers >= shift+1)

with MSE (1/2pi) int |C|^2 wi_f + (1/2pi) int |C - E|^2 wi_g.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .errors import ConfigError, ResidualFailureError, SupportLeakageError
from .increments import IncrementSpec, functional_decomposition
from .operators import build_operator_set, compose, solve_coefficients
from .spectral import (
    DensityModel,
    FourierTable,
    QuadratureConfig,
    fourier_coefficients,
    oscillatory_nodes,
    require_integrable,
)


@dataclass(frozen=True)
class InterpolationProblem:
    """Weights a(0..N) on the raw missing values plus the two densities."""

    spec: IncrementSpec
    a: np.ndarray
    f: DensityModel
    g: DensityModel
    L: int | None = None
    quad: QuadratureConfig | None = None

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if a.size == 0:
            raise ConfigError("a must have at least one weight")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class EstimateSolution:
    """Solved estimate with coefficient vectors and both MSE evaluations.

    ``mse`` comes from the spectral integrals; ``mse_quadratic`` is the
    independent quadratic-form evaluation through the Fourier tables.
    ``v`` carries boundary weights when the solution came from a raw-value
    functional, else None.
    """

    spec: IncrementSpec
    b: np.ndarray = field(repr=False)
    shift: int
    L: int
    c: np.ndarray = field(repr=False)
    e_vec: np.ndarray = field(repr=False)
    v: np.ndarray | None = field(repr=False)
    mse: float
    mse_quadratic: float
    residual_primary: float
    residual_coupling: float
    f_model: DensityModel = field(repr=False)
    g_model: DensityModel = field(repr=False)
    f_table: FourierTable = field(repr=False)
    g_table: FourierTable = field(repr=False)
    quad: QuadratureConfig = field(repr=False)
    minimax: bool = False


def _series(coeffs: np.ndarray, powers: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """sum_j coeffs[j] exp(i lam powers[j]) evaluated on a node array."""
    return np.exp(1j * np.outer(lam, powers)) @ coeffs


def c_series(sol: EstimateSolution, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return _series(sol.c, np.arange(sol.L), lam)


def e_series(sol: EstimateSolution, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return _series(sol.e_vec, sol.shift - np.arange(sol.L), lam)


def b_series(sol: EstimateSolution, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return _series(sol.b, np.arange(sol.b.size), lam)


def _mse_integral(
    c: np.ndarray,
    e_vec: np.ndarray,
    shift: int,
    f: DensityModel,
    g: DensityModel,
    quad: QuadratureConfig,
) -> float:
    L = c.size
    x, w = oscillatory_nodes(f.spec.mu, quad, L + shift)
    C = _series(c, np.arange(L), x)
    E = _series(e_vec, shift - np.arange(L), x)
    t1 = np.abs(C) ** 2 @ (w * f.weighted_inverse(x))
    t2 = np.abs(C - E) ** 2 @ (w * g.weighted_inverse(x))
    return float((t1 + t2) / (2 * pi))


def _mse_quadratic(
    c: np.ndarray,
    e_vec: np.ndarray,
    shift: int,
    f_table: FourierTable,
    g_table: FourierTable,
) -> float:
    """Same MSE through lag-domain quadratic forms in the Fourier tables."""
    L = c.size
    idx = np.arange(L)
    toe = np.abs(np.subtract.outer(idx, idx))
    t1 = c @ (f_table.coeffs[toe] * 1.0) @ c
    # combined coefficient sequence of C - E on powers shift-L+1 .. L-1
    lo = min(0, shift - L + 1)
    hi = L - 1
    d = np.zeros(hi - lo + 1)
    d[idx - lo] += c
    d[(shift - idx) - lo] -= e_vec
    jdx = np.arange(d.size)
    lags = np.abs(np.subtract.outer(jdx, jdx))
    if lags.max() > g_table.K:
        raise ConfigError("g-table too short for quadratic-form MSE")
    t2 = d @ g_table.coeffs[lags] @ d
    return float(t1 + t2)


def solve_increment_functional(
    spec: IncrementSpec,
    b: np.ndarray,
    f: DensityModel,
    g: DensityModel,
    L: int | None = None,
    quad: QuadratureConfig | None = None,
    shift: int | None = None,
    v: np.ndarray | None = None,
    strict: bool = True,
) -> EstimateSolution:
    """Estimate sum_k b(k) dx(k) from exact past and noisy future differences.

    ``shift`` is the largest difference position not observable on the
    noisy side; it defaults to len(b) - 1 + span, matching a functional
    whose raw-value window ends where the noisy observations begin.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ConfigError(f"b must be a nonempty 1-d array, got shape {b.shape}")
    quad = quad or QuadratureConfig()
    if shift is None:
        shift = b.size - 1 + spec.span
    if b.size - 1 > shift:
        raise ConfigError(
            f"b window 0..{b.size - 1} must lie inside 0..shift={shift}"
        )
    if L is None:
        L = max(4 * (shift + 1), 64)
    if L <= shift:
        raise ConfigError(f"need L > shift, got L={L}, shift={shift}")
    require_integrable(f, quad)
    require_integrable(g, quad)
    K = 2 * L + shift
    f_table = fourier_coefficients(f, K, quad)
    g_table = fourier_coefficients(g, K, quad)
    ops = build_operator_set(f_table, g_table, shift, L)
    comp = compose(ops)
    coeffs = solve_coefficients(comp, ops, b)
    if strict and not coeffs.valid:
        raise ResidualFailureError(
            f"coupled-system residuals {coeffs.residual_primary:.3e}, "
            f"{coeffs.residual_coupling:.3e} exceed 1e-08 relative bound"
        )
    mse = _mse_integral(coeffs.c, coeffs.e_vec, shift, f, g, quad)
    mse_q = _mse_quadratic(coeffs.c, coeffs.e_vec, shift, f_table, g_table)
    return EstimateSolution(
        spec=spec,
        b=coeffs.b,
        shift=shift,
        L=L,
        c=coeffs.c,
        e_vec=coeffs.e_vec,
        v=None if v is None else np.asarray(v, dtype=float),
        mse=mse,
        mse_quadratic=mse_q,
        residual_primary=coeffs.residual_primary,
        residual_coupling=coeffs.residual_coupling,
        f_model=f,
        g_model=g,
        f_table=f_table,
        g_table=g_table,
        quad=quad,
    )


def solve_functional(problem: InterpolationProblem) -> EstimateSolution:
    """Estimate sum_k a(k) x(k) for raw missing values x(0..N).

    The raw functional is first split into difference weights b plus
    boundary weights v on the known past values; only the b part needs
    estimating, so the MSE equals that of the difference functional.
    """
    w = functional_decomposition(problem.spec, problem.a)
    return solve_increment_functional(
        problem.spec,
        w.b,
        problem.f,
        problem.g,
        L=problem.L,
        quad=problem.quad,
        v=w.v,
    )


def solve_single_increment(
    spec: IncrementSpec,
    m: int,
    N: int,
    f: DensityModel,
    g: DensityModel,
    L: int | None = None,
    quad: QuadratureConfig | None = None,
) -> EstimateSolution:
    """Estimate the single difference at position m inside the window 0..N."""
    if not 0 <= m <= N:
        raise ConfigError(f"need 0 <= m <= N, got m={m}, N={N}")
    b = np.zeros(N + 1)
    b[m] = 1.0
    return solve_increment_functional(spec, b, f, g, L=L, quad=quad)


def evaluate_characteristic(sol: EstimateSolution, which: str, lam) -> np.ndarray:
    """Spectral characteristic h1 (past side) or h2 (future side) at lam.

    Includes the order-n step factor ((1 - exp(-i lam mu)) / (i lam))^n
    that maps raw-value spectra to difference coordinates.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    spec = sol.spec
    small = np.abs(lam) < 1e-10
    safe = np.where(small, 1.0, lam)
    phi = np.where(
        small, float(spec.mu), (1.0 - np.exp(-1j * safe * spec.mu)) / (1j * safe)
    )
    red = reduced_characteristic(sol, which, lam)
    return phi**spec.n * red


def reduced_characteristic(sol: EstimateSolution, which: str, lam) -> np.ndarray:
    """Characteristic in difference coordinates, before the step factor."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    C = c_series(sol, lam)
    E = e_series(sol, lam)
    if which == "h1":
        B = b_series(sol, lam)
        wif = sol.f_model.weighted_inverse(lam)
        wig = sol.g_model.weighted_inverse(lam)
        return B - C * wif + (E - C) * wig
    if which == "h2":
        return (C - E) * sol.g_model.weighted_inverse(lam)
    raise ConfigError(f"which must be 'h1' or 'h2', got {which!r}")


@dataclass(frozen=True)
class TimeWeights:
    """Time-domain estimation weights recovered from the characteristics.

    ``past[i]`` multiplies the exact difference at ``past_k[i]`` (all
    <= -1); ``future[i]`` multiplies the noisy difference at
    ``future_k[i]`` (all >= shift + 1).  ``leakage`` is the largest
    coefficient magnitude found inside the forbidden band, relative to the
    largest weight.
    """

    past_k: np.ndarray
    past: np.ndarray
    future_k: np.ndarray
    future: np.ndarray
    leakage: float


def extract_time_weights(
    sol: EstimateSolution, tail: int, leak_bound: float = 1e-6
) -> TimeWeights:
    """Fourier-invert the reduced characteristics on a uniform grid.

    Raises SupportLeakageError when coefficients in the forbidden band
    (past side at positions >= 0, future side at positions <= shift)
    exceed ``leak_bound`` relative to the largest recovered weight.
    """
    if tail < 1:
        raise ConfigError(f"tail must be >= 1, got {tail}")
    M = 1 << max(12, int(np.ceil(np.log2(8 * (sol.L + sol.shift + tail)))))
    lam = -pi + 2 * pi * np.arange(M) / M
    h1 = reduced_characteristic(sol, "h1", lam)
    h2 = reduced_characteristic(sol, "h2", lam)

    def invert(vals, ks):
        spec_coeffs = np.fft.fft(vals) / M
        ks = np.asarray(ks)
        kmod = np.mod(ks, M)
        # grid starts at -pi, so each coefficient picks up a phase (-1)^k
        return np.real(spec_coeffs[kmod] * np.exp(1j * pi * ks))

    past_k = np.arange(-tail, 0)
    future_k = np.arange(sol.shift + 1, sol.shift + tail + 1)
    past = invert(h1, past_k)
    future = invert(h2, future_k)
    band1 = invert(h1, np.arange(0, sol.shift + tail + 1))
    band2 = invert(h2, np.arange(-tail, sol.shift + 1))
    scale = max(np.max(np.abs(past), initial=0.0), np.max(np.abs(future), initial=0.0))
    # an estimate with (near-)zero weights is judged against the size of b
    scale = max(scale, np.max(np.abs(sol.b)), 1e-300)
    leak = max(np.max(np.abs(band1)), np.max(np.abs(band2))) / scale
    if leak > leak_bound:
        raise SupportLeakageError(
            f"forbidden-band leakage {leak:.3e} exceeds {leak_bound:.1e}"
        )
    return TimeWeights(
        past_k=past_k, past=past, future_k=future_k, future=future, leakage=float(leak)
    )


def orthogonality_residuals(
    sol: EstimateSolution,
    lags_past=None,
    lags_future=None,
) -> dict:
    """Fourier coefficients of the reduced characteristics on the bands
    where they must vanish: past side at lags >= 0, future side at lags
    <= shift.  Returned values should be ~0 for a correct solution."""
    if lags_past is None:
        lags_past = np.arange(0, sol.shift + 9)
    if lags_future is None:
        lags_future = np.arange(sol.shift - 8, sol.shift + 1)
    lags_past = np.asarray(list(lags_past), dtype=int)
    lags_future = np.asarray(list(lags_future), dtype=int)
    if lags_past.size and lags_past.min() < 0:
        raise ConfigError("past-side orthogonality lags must be >= 0")
    if lags_future.size and lags_future.max() > sol.shift:
        raise ConfigError("future-side orthogonality lags must be <= shift")
    quad = sol.quad
    x, w = oscillatory_nodes(sol.spec.mu, quad, sol.L + sol.shift)
    h1 = reduced_characteristic(sol, "h1", x)
    h2 = reduced_characteristic(sol, "h2", x)
    r1 = (np.exp(-1j * np.outer(lags_past, x)) * h1) @ w / (2 * pi)
    r2 = (np.exp(-1j * np.outer(lags_future, x)) * h2) @ w / (2 * pi)
    return {
        "lags_past": lags_past,
        "past": np.abs(r1),
        "lags_future": lags_future,
        "future": np.abs(r2),
    }
