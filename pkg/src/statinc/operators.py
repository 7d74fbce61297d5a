"""Truncated operator matrices built from weighted-inverse Fourier tables.

For table entries f(k), g(k) (even in k) and a boundary index ``shift`` the
L x L blocks are

    Ge[l, k] = g(k - l)            (symmetric Toeplitz)
    Fe[l, k] = f(k - l)            (symmetric Toeplitz)
    Gc[l, k] = g(shift - l - k)    (Hankel)
    Fc[l, k] = f(shift - l - k)    (Hankel)

The coefficient series of the optimal estimate solve the coupled system
obtained by truncating the two orthogonality conditions,

    b + Gc e = (Fe + Ge) c,        Gc c = Ge e,

which composes to Fmu c = b with Fmu = Fe + Ge - Gc Ge^-1 Gc and
e = Gmu b with Gmu = Ge^-1 Gc Fmu^-1.  Coefficient solutions are always
judged against the coupled system, never the composed formulas alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    ConfigError,
    InsufficientFourierRangeError,
    NoConvergenceError,
    SingularOperatorError,
)
from .spectral import FourierTable


@dataclass(frozen=True)
class OperatorSet:
    """The truncated blocks plus their construction parameters."""

    Ge: np.ndarray = field(repr=False)
    Fe: np.ndarray = field(repr=False)
    Gc: np.ndarray = field(repr=False)
    Fc: np.ndarray = field(repr=False)
    L: int
    shift: int


def build_operator_set(
    f_table: FourierTable, g_table: FourierTable, shift: int, L: int
) -> OperatorSet:
    """Assemble the truncation-L operator blocks for a given boundary index."""
    if L < 1:
        raise ConfigError(f"truncation L must be >= 1, got {L}")
    if shift < 0:
        raise ConfigError(f"shift must be >= 0, got {shift}")
    max_lag = max(L - 1, shift, abs(shift - 2 * (L - 1)))
    for name, tab in (("f", f_table), ("g", g_table)):
        if tab.K < max_lag:
            raise InsufficientFourierRangeError(
                f"{name}-table has K={tab.K} but lags up to {max_lag} are "
                f"needed for L={L}, shift={shift}"
            )
    idx = np.arange(L)
    toe = np.abs(np.subtract.outer(idx, idx))
    han = np.abs(shift - np.add.outer(idx, idx))
    Ge = g_table.coeffs[toe]
    Fe = f_table.coeffs[toe]
    Gc = g_table.coeffs[han]
    Fc = f_table.coeffs[han]
    return OperatorSet(Ge=Ge, Fe=Fe, Gc=Gc, Fc=Fc, L=L, shift=shift)


@dataclass(frozen=True)
class ComposedOperators:
    """Fmu, Gmu and conditioning diagnostics."""

    Fmu: np.ndarray = field(repr=False)
    Gmu: np.ndarray = field(repr=False)
    cond_Ge: float
    cond_Fmu: float


def compose(ops: OperatorSet, cond_bound: float = 1e12) -> ComposedOperators:
    """Form Fmu = Fe + Ge - Gc Ge^-1 Gc and Gmu = Ge^-1 Gc Fmu^-1."""
    cond_Ge = float(np.linalg.cond(ops.Ge))
    if not np.isfinite(cond_Ge) or cond_Ge > cond_bound:
        raise SingularOperatorError(
            f"Ge condition number {cond_Ge:.3e} exceeds bound {cond_bound:.1e}"
        )
    X = scipy.linalg.solve(ops.Ge, ops.Gc, assume_a="sym")
    Fmu = ops.Fe + ops.Ge - ops.Gc @ X
    cond_Fmu = float(np.linalg.cond(Fmu))
    if not np.isfinite(cond_Fmu) or cond_Fmu > cond_bound:
        raise SingularOperatorError(
            f"Fmu condition number {cond_Fmu:.3e} exceeds bound {cond_bound:.1e}"
        )
    Gmu = X @ np.linalg.inv(Fmu)
    return ComposedOperators(Fmu=Fmu, Gmu=Gmu, cond_Ge=cond_Ge, cond_Fmu=cond_Fmu)


@dataclass(frozen=True)
class CoefficientSolution:
    """Coefficient vectors c, e with residuals of the defining system.

    ``e_vec[j]`` multiplies the exponential at frequency index shift - j,
    so the spike that reproduces single-point weights sits at j = shift.
    ``residual_primary`` is || b + Ge c - (Gc + Fc) e || and
    ``residual_coupling`` is || Gc c - Ge e ||, both relative to ||b||.
    """

    c: np.ndarray = field(repr=False)
    e_vec: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    shift: int
    residual_primary: float
    residual_coupling: float
    valid: bool


def solve_coefficients(
    comp: ComposedOperators,
    ops: OperatorSet,
    b: np.ndarray,
    residual_bound: float = 1e-8,
) -> CoefficientSolution:
    """Solve Fmu c = b, recover e from the coupling equation, and gate on
    the residuals of the original coupled system."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size > ops.L:
        raise ConfigError(
            f"b must be 1-d with at most L={ops.L} entries, got shape {b.shape}"
        )
    bp = np.zeros(ops.L)
    bp[: b.size] = b
    lu = scipy.linalg.lu_factor(comp.Fmu)
    c = scipy.linalg.lu_solve(lu, bp)
    c += scipy.linalg.lu_solve(lu, bp - comp.Fmu @ c)  # one refinement pass
    e = scipy.linalg.solve(ops.Ge, ops.Gc @ c, assume_a="sym")
    bnorm = max(np.linalg.norm(bp), 1e-300)
    r1 = np.linalg.norm(bp + ops.Gc @ e - (ops.Fe + ops.Ge) @ c) / bnorm
    r2 = np.linalg.norm(ops.Gc @ c - ops.Ge @ e) / bnorm
    return CoefficientSolution(
        c=c,
        e_vec=e,
        b=bp,
        shift=ops.shift,
        residual_primary=float(r1),
        residual_coupling=float(r2),
        valid=bool(r1 <= residual_bound and r2 <= residual_bound),
    )


@dataclass(frozen=True)
class TruncationReport:
    L_values: list
    mse_values: list
    mse_drifts: list
    coeff_drifts: list
    converged: bool
    converged_at: int | None


def truncation_sweep(solve_at, L_values, rtol: float = 1e-4) -> TruncationReport:
    """Run ``solve_at(L)`` over increasing L and track MSE/coefficient drift.

    ``solve_at`` must return an object with attributes ``mse`` and ``c``.
    Declares convergence at the first L whose relative MSE drift from the
    previous L is <= rtol; raises NoConvergenceError if that never happens.
    """
    L_values = sorted(int(L) for L in L_values)
    if len(L_values) < 2:
        raise ConfigError("truncation sweep needs at least two L values")
    mses, mdrifts, cdrifts = [], [], []
    prev = None
    converged_at = None
    for L in L_values:
        sol = solve_at(L)
        mses.append(float(sol.mse))
        if prev is not None:
            denom = max(abs(mses[-1]), 1e-300)
            mdrifts.append(abs(mses[-1] - mses[-2]) / denom)
            m = min(prev.c.size, sol.c.size)
            cd = np.linalg.norm(sol.c[:m] - prev.c[:m])
            cd = float(cd / max(np.linalg.norm(sol.c[:m]), 1e-300))
            cdrifts.append(cd)
            if converged_at is None and mdrifts[-1] <= rtol:
                converged_at = L
        prev = sol
    report = TruncationReport(
        L_values=L_values,
        mse_values=mses,
        mse_drifts=mdrifts,
        coeff_drifts=cdrifts,
        converged=converged_at is not None,
        converged_at=converged_at,
    )
    if not report.converged:
        raise NoConvergenceError(
            f"MSE drift never fell below {rtol:.1e}: drifts {mdrifts}"
        )
    return report
