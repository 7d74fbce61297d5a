"""Spectral densities, their weighted inverses, and quadrature utilities.

The operator machinery downstream only ever sees Fourier coefficient tables
of the weighted inverse density

    wi(lam) = lam^(2n) / (|1 - exp(i*lam*mu)|^(2n) * rho(lam)),

so this module's job is to evaluate wi robustly near the removable point
lam = 0 and near the genuine trouble points lam = 2*pi*j/mu, and to compute
cosine-transform tables with a refinement-checked composite Gauss-Legendre
rule whose panels are aligned with those points.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import ceil, pi

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConfigError,
    NonIntegrableDensityError,
    QuadratureConvergenceError,
)
from .increments import IncrementSpec

_NUDGE = 1e-9


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings for integrals over [-pi, pi].

    ``panels`` is the target number of panels across the whole interval
    (boundaries are always placed at 0 and at the points 2*pi*j/mu); the
    rule uses ``order`` nodes per panel.  Integrals are accepted when a
    panel-doubling pass agrees to relative tolerance ``rtol``.
    """

    panels: int = 32
    order: int = 10
    rtol: float = 1e-9

    def __post_init__(self):
        if self.panels < 1 or self.order < 2:
            raise ConfigError("quadrature needs panels >= 1 and order >= 2")


def _breakpoints(mu: int) -> np.ndarray:
    pts = {-pi, 0.0, pi}
    j = 1
    while 2 * pi * j / mu < pi:
        pts.add(2 * pi * j / mu)
        pts.add(-2 * pi * j / mu)
        j += 1
    return np.array(sorted(pts))


def gauss_nodes(mu: int, panels: int, order: int):
    """Nodes and weights of the composite rule aligned to the breakpoints."""
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    bps = _breakpoints(mu)
    nodes, weights = [], []
    total = bps[-1] - bps[0]
    for a, b in zip(bps[:-1], bps[1:]):
        m = max(1, int(round(panels * (b - a) / total)))
        edges = np.linspace(a, b, m + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            nodes.append(0.5 * (lo + hi) + half * base_x)
            weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _panel_scale(quad: QuadratureConfig, max_freq: int) -> int:
    """Panel count adequate for integrands oscillating up to max_freq.

    Roughly 1.5 panels per wavelength keeps the phase change per panel
    near 4 radians, where the per-panel Gauss error is ~1e-14 at order 10.
    """
    need = ceil(1.5 * (max_freq + 4))
    return max(quad.panels, need)


def oscillatory_nodes(mu: int, quad: QuadratureConfig, max_freq: int):
    """Composite nodes and weights sized for harmonics up to max_freq."""
    return gauss_nodes(mu, _panel_scale(quad, max_freq), quad.order)


def integrate(fun, mu: int, quad: QuadratureConfig, max_freq: int = 0):
    """Refinement-checked integral of ``fun`` over [-pi, pi].

    ``fun`` must accept a node array and return values of matching trailing
    dimension; vector-valued integrands are integrated componentwise.
    Raises QuadratureConvergenceError when doubling the panel count moves
    the result by more than ``quad.rtol`` relative to its magnitude.
    """
    p = _panel_scale(quad, max_freq)
    x1, w1 = gauss_nodes(mu, p, quad.order)
    x2, w2 = gauss_nodes(mu, 2 * p, quad.order)
    f2 = np.asarray(fun(x2))
    v1 = np.asarray(fun(x1)) @ w1
    v2 = f2 @ w2
    # scale by the integrand's mass, not just the integral, so exact
    # cancellation (zero integrals) is not flagged as nonconvergence
    scale = max(np.max(np.abs(v2)), np.max(np.abs(f2) @ w2), 1e-300)
    err = np.max(np.abs(v2 - v1)) / scale
    if err > quad.rtol:
        raise QuadratureConvergenceError(
            f"integral moved by relative {err:.3e} under panel doubling "
            f"(panels {p} -> {2 * p}); integrand may be singular"
        )
    return v2


def lambda_ratio_power(lam: np.ndarray, spec: IncrementSpec) -> np.ndarray:
    """The factor lam^(2n) / |1 - exp(i*lam*mu)|^(2n), with its lam=0 limit.

    Equals (lam / (2 sin(lam*mu/2)))^(2n); tends to mu^(-2n) at the origin
    and diverges at the other zeros of the sine.
    """
    lam = np.asarray(lam, dtype=float)
    s = 2.0 * np.sin(0.5 * lam * spec.mu)
    near_zero = np.abs(lam) * spec.mu < 1e-6
    safe = np.where(s == 0.0, 1.0, s)
    ratio = np.where(near_zero, 1.0 / spec.mu, lam / safe)
    bad = (s == 0.0) & ~near_zero
    out = ratio ** (2 * spec.n)
    return np.where(bad, np.inf, out)


def _nudged(lam: np.ndarray, mu: int) -> np.ndarray:
    """Shift points sitting exactly on the sine zeros by a tiny offset."""
    lam = np.asarray(lam, dtype=float)
    s = np.sin(0.5 * lam * mu)
    return np.where(np.abs(s) < 1e-13, lam + _NUDGE, lam)


class DensityModel:
    """Evaluable spectral density rho with its derived spectral functions.

    Instances are built through the classmethod constructors; ``form``
    records which closed relationship is known exactly so that callers can
    pick shortcuts (for instance a weighted inverse that is a trigonometric
    polynomial by construction).
    """

    def __init__(self, spec: IncrementSpec, form: str, **kw):
        self.spec = spec
        self.form = form
        self._kw = kw

    # -- constructors ----------------------------------------------------
    @classmethod
    def increment_constant(cls, spec: IncrementSpec, sigma2: float) -> "DensityModel":
        """Density whose step-mu order-n increment spectrum is flat at sigma2."""
        if sigma2 <= 0:
            raise ConfigError(f"sigma2 must be > 0, got {sigma2}")
        return cls(spec, "increment-constant", sigma2=float(sigma2))

    @classmethod
    def closed_form(cls, spec: IncrementSpec, rho_fn) -> "DensityModel":
        """Density given by a vectorized callable rho(lam) >= 0 on [-pi, pi]."""
        return cls(spec, "closed-form", rho_fn=rho_fn)

    @classmethod
    def from_weighted_inverse_coeffs(
        cls, spec: IncrementSpec, coeffs: np.ndarray
    ) -> "DensityModel":
        """Density whose weighted inverse is the even trigonometric polynomial
        coeffs[0] + 2 * sum_k coeffs[k] cos(k lam)."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ConfigError("weighted-inverse coefficients must be 1-d, nonempty")
        return cls(spec, "wi-poly", coeffs=coeffs.copy())

    @classmethod
    def tabulated(
        cls, spec: IncrementSpec, lam_grid: np.ndarray, rho_vals: np.ndarray
    ) -> "DensityModel":
        """Density interpolated (shape-preserving cubic, clamped at zero)
        from samples on a grid covering [0, pi]; extended evenly."""
        lam_grid = np.asarray(lam_grid, dtype=float)
        rho_vals = np.asarray(rho_vals, dtype=float)
        if lam_grid.ndim != 1 or lam_grid.shape != rho_vals.shape:
            raise ConfigError("tabulated density needs matching 1-d arrays")
        if lam_grid.size < 4:
            raise ConfigError("tabulated density needs at least 4 samples")
        if np.any(np.diff(lam_grid) <= 0):
            raise ConfigError("tabulated grid must be strictly increasing")
        if lam_grid[0] > 1e-12 or lam_grid[-1] < pi - 1e-12:
            raise ConfigError("tabulated grid must cover [0, pi]")
        if np.any(rho_vals < 0):
            raise ConfigError("tabulated density values must be nonnegative")
        interp = PchipInterpolator(lam_grid, rho_vals, extrapolate=True)
        return cls(spec, "tabulated", interp=interp)

    @classmethod
    def from_csv(cls, spec: IncrementSpec, path) -> "DensityModel":
        """Load a tabulated density from a CSV file with header lambda,rho."""
        lam, rho = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [
                c.strip() for c in reader.fieldnames[:2]
            ] != ["lambda", "rho"]:
                raise ConfigError(f"{path}: expected CSV header 'lambda,rho'")
            for row in reader:
                lam.append(float(row["lambda"]))
                rho.append(float(row["rho"]))
        return cls.tabulated(spec, np.array(lam), np.array(rho))

    # -- evaluation -------------------------------------------------------
    def rho(self, lam) -> np.ndarray:
        """The spectral density itself (may be +inf at isolated points)."""
        lam = np.asarray(lam, dtype=float)
        if self.form == "increment-constant":
            return self._kw["sigma2"] * lambda_ratio_power(lam, self.spec)
        if self.form == "closed-form":
            return np.asarray(self._kw["rho_fn"](lam), dtype=float)
        if self.form == "tabulated":
            return np.maximum(self._kw["interp"](np.abs(lam)), 0.0)
        # wi-poly
        lam = _nudged(lam, self.spec.mu)
        return lambda_ratio_power(lam, self.spec) / self._wi_poly(lam)

    def weighted_inverse(self, lam) -> np.ndarray:
        """wi(lam); the removable limit at lam = 0 is taken automatically."""
        lam = np.asarray(lam, dtype=float)
        if self.form == "increment-constant":
            return np.full(lam.shape, 1.0 / self._kw["sigma2"])
        if self.form == "wi-poly":
            return self._wi_poly(lam)
        lam = _nudged(lam, self.spec.mu)
        return lambda_ratio_power(lam, self.spec) / self.rho(lam)

    def increment_density(self, lam) -> np.ndarray:
        """Spectral density of the differenced sequence; reciprocal of wi."""
        lam = np.asarray(lam, dtype=float)
        if self.form == "increment-constant":
            return np.full(lam.shape, self._kw["sigma2"])
        if self.form == "wi-poly":
            return 1.0 / self._wi_poly(lam)
        lam = _nudged(lam, self.spec.mu)
        return self.rho(lam) / lambda_ratio_power(lam, self.spec)

    def _wi_poly(self, lam) -> np.ndarray:
        c = self._kw["coeffs"]
        lam = np.asarray(lam, dtype=float)
        out = np.full(lam.shape, c[0])
        for k in range(1, c.size):
            if c[k] != 0.0:
                out = out + 2.0 * c[k] * np.cos(k * lam)
        return out

    @property
    def wi_coeffs(self):
        """Known weighted-inverse Fourier head, or None."""
        if self.form == "increment-constant":
            return np.array([1.0 / self._kw["sigma2"]])
        if self.form == "wi-poly":
            return self._kw["coeffs"].copy()
        return None


@dataclass(frozen=True)
class FourierTable:
    """Even cosine-coefficient table t(k), k = 0..K, of a weighted inverse."""

    coeffs: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    def lag(self, k: int) -> float:
        k = abs(int(k))
        if k > self.K:
            raise ConfigError(f"lag {k} exceeds table range K={self.K}")
        return float(self.coeffs[k])

    @classmethod
    def from_head(cls, head: np.ndarray, K: int) -> "FourierTable":
        """Table from a finite head, zero-padded out to lag K."""
        head = np.asarray(head, dtype=float)
        if head.size > K + 1:
            K = head.size - 1
        coeffs = np.zeros(K + 1)
        coeffs[: head.size] = head
        return cls(coeffs=coeffs)


def fourier_coefficients(
    model: DensityModel, K: int, quad: QuadratureConfig | None = None
) -> FourierTable:
    """Cosine transform table t(k) = (1/2pi) int wi(lam) cos(k lam) dlam.

    The node budget is scaled with K so the highest harmonic is resolved,
    and the whole table must pass the panel-doubling check.
    """
    if K < 0:
        raise ConfigError(f"K must be >= 0, got {K}")
    quad = quad or QuadratureConfig()
    ks = np.arange(K + 1)

    def fun(x):
        wi = model.weighted_inverse(x)
        return np.cos(np.outer(ks, x)) * wi

    vals = integrate(fun, model.spec.mu, quad, max_freq=K) / (2 * pi)
    return FourierTable(coeffs=np.asarray(vals))


def check_integrability(model: DensityModel, quad: QuadratureConfig | None = None):
    """Decide whether the weighted inverse is integrable on [-pi, pi].

    Combines a panel-refinement ladder on the plain integral of wi with
    pointwise growth probes approaching each sine zero.  Returns
    (ok, diagnostics); diagnostics lists offending points and the ladder.
    """
    quad = quad or QuadratureConfig()
    mu = model.spec.mu
    ladder = []
    for mult in (1, 2, 4, 8):
        x, w = gauss_nodes(mu, quad.panels * mult, quad.order)
        ladder.append(float(model.weighted_inverse(x) @ w))
    rel = [
        abs(ladder[i + 1] - ladder[i]) / max(abs(ladder[i + 1]), 1e-300)
        for i in range(3)
    ]
    converged = rel[-1] < 1e-6

    offending = []
    probes = {}
    points = [p for p in _breakpoints(mu) if abs(abs(p) - pi) > 1e-12]
    points += [pi, -pi]
    for p in points:
        side = -1.0 if p > 0 else 1.0
        ds = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
        vals = model.weighted_inverse(p + side * ds)
        probes[round(p, 12)] = vals.tolist()
        # Growth like d^(-alpha) with alpha >= 1 makes wi non-integrable;
        # check the decade-over-decade ratio against that threshold.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = vals[1:] / vals[:-1]
        if np.any(~np.isfinite(vals)) or (
            np.all(np.isfinite(ratios)) and ratios[-1] > 9.0 and vals[-1] > 1e8
        ):
            offending.append(float(p))
    ok = converged and not offending
    diagnostics = {
        "integral_ladder": ladder,
        "ladder_rel_diffs": rel,
        "offending_points": offending,
        "probes": probes,
    }
    return ok, diagnostics


def require_integrable(model: DensityModel, quad: QuadratureConfig | None = None):
    ok, diag = check_integrability(model, quad)
    if not ok:
        raise NonIntegrableDensityError(
            f"weighted inverse fails integrability check: "
            f"offending points {diag['offending_points']}, "
            f"ladder {diag['integral_ladder']}"
        )
    return diag


def structure_function(
    model: DensityModel,
    m: int,
    mu1: int | None = None,
    mu2: int | None = None,
    quad: QuadratureConfig | None = None,
) -> float:
    """Covariance between order-n differences of steps mu1 and mu2 at lag m.

    With both steps equal to the model's own step this is the lag-m Fourier
    coefficient of the increment spectral density; the general case is
    evaluated through the increment density so the singular factors cancel
    whenever the model step divides both requested steps.
    """
    quad = quad or QuadratureConfig()
    spec = model.spec
    mu1 = spec.mu if mu1 is None else mu1
    mu2 = spec.mu if mu2 is None else mu2

    if mu1 == spec.mu and mu2 == spec.mu:

        def fun(x):
            return np.cos(m * x) * model.increment_density(x)

        return float(integrate(fun, spec.mu, quad, max_freq=abs(m))) / (2 * pi)

    def fun(x):
        x = _nudged(x, spec.mu)
        num = (1.0 - np.exp(-1j * mu1 * x)) ** spec.n * (
            1.0 - np.exp(1j * mu2 * x)
        ) ** spec.n
        den = np.abs(1.0 - np.exp(1j * spec.mu * x)) ** (2 * spec.n)
        return np.real(np.exp(1j * m * x) * num / den) * model.increment_density(x)

    return float(integrate(fun, spec.mu, quad, max_freq=abs(m) + spec.n * max(mu1, mu2))) / (
        2 * pi
    )
