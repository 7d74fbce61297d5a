"""Exact combinatorics of the n-th order step-mu difference operator.

Everything in this module is integer arithmetic on binomial weights; floats
only appear when a caller-supplied weight vector is involved.  The central
objects are the one-sided coefficient sequence d(k) of the inverse operator
power series, the triangular matrix D built from it, and the split of a
finite linear functional into a part acting on differenced values on the
estimation window plus a boundary part on the last mu*n past points.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, comb

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class IncrementSpec:
    """Order n >= 1 and step mu >= 1 of the differencing operator.

    The operator acts on a sequence x as sum_l (-1)^l C(n,l) x[m - l*mu].
    """

    n: int
    mu: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"order n must be a positive integer, got {self.n!r}")
        if not isinstance(self.mu, int) or self.mu < 1:
            raise ConfigError(f"step mu must be a positive integer, got {self.mu!r}")

    @property
    def span(self) -> int:
        """Width mu*n of the difference stencil."""
        return self.mu * self.n


def difference_weights(spec: IncrementSpec) -> np.ndarray:
    """Stencil weights w[l*mu] = (-1)^l C(n,l), length span+1.

    ``apply_difference(spec, x)[m] == sum_j w[j] * x[m - j]``.
    """
    w = np.zeros(spec.span + 1)
    for ell in range(spec.n + 1):
        w[ell * spec.mu] = (-1) ** ell * comb(spec.n, ell)
    return w


def apply_difference(spec: IncrementSpec, x: np.ndarray) -> np.ndarray:
    """n-th order step-mu differences of a sample path.

    Parameters
    ----------
    x : array, shape (T,)
        Values x[0..T-1] of the underlying sequence.

    Returns
    -------
    array, shape (T - span,)
        Entry i is the difference taken at position i + span, i.e. the
        first entry uses exactly the first span+1 samples.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size <= spec.span:
        raise ConfigError(
            f"need more than span={spec.span} samples, got shape {x.shape}"
        )
    w = difference_weights(spec)
    out = np.zeros(x.size - spec.span)
    for j, wj in enumerate(w):
        if wj != 0.0:
            seg = x[spec.span - j : x.size - j]
            out += wj * seg
    return out


def step_decomposition_coefficients(n: int, k: int) -> list[int]:
    """Integer coefficients of (1 + x + ... + x^(k-1))^n.

    Used to rewrite a step-k difference as a window of step-1 differences.
    Returns the n*(k-1)+1 coefficients in ascending powers.
    """
    if n < 1 or k < 1:
        raise ConfigError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    base = [1] * k
    out = [1]
    for _ in range(n):
        nxt = [0] * (len(out) + k - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(base):
                nxt[i + j] += a * b
        out = nxt
    return out


def d_coefficients(spec: IncrementSpec, count: int) -> np.ndarray:
    """First ``count`` coefficients d(0..count-1) of the inverse power series.

    d(mu*k) = C(n - 1 + k, n - 1) and d vanishes off multiples of mu.  These
    are the coefficients of (sum_j x^(mu*j))^n, so convolving d with the
    stencil weights gives the identity sequence.
    """
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    d = np.zeros(count)
    for k in range(ceil(count / spec.mu)):
        idx = spec.mu * k
        if idx < count:
            d[idx] = comb(spec.n - 1 + k, spec.n - 1)
    return d


def build_d_matrix(spec: IncrementSpec, N: int) -> np.ndarray:
    """Upper triangular (N+1) x (N+1) matrix with entry [k, j] = d(j - k).

    Multiplying a weight vector a by this matrix yields the weights b that
    act on differenced values over the same index window.
    """
    if N < 0:
        raise ConfigError(f"N must be >= 0, got {N}")
    d = d_coefficients(spec, N + 1)
    idx = np.subtract.outer(np.arange(N + 1), np.arange(N + 1))  # [k, j] = k - j
    D = np.where(idx <= 0, d[np.clip(-idx, 0, N)], 0.0)
    return D


@dataclass(frozen=True)
class IncrementWeights:
    """Split of a functional with weights a(0..N) into difference coordinates.

    Attributes
    ----------
    b : array, shape (N+1,)
        Weights on the differenced sequence at positions 0..N.
    v : array, shape (span,)
        Boundary weights; ``v[i]`` multiplies the raw value at position
        i - span, so the entries run over positions -span..-1.
    """

    spec: IncrementSpec
    a: np.ndarray
    b: np.ndarray
    v: np.ndarray

    def boundary_positions(self) -> np.ndarray:
        """Raw-sequence positions -span..-1 matching the entries of v."""
        return np.arange(-self.spec.span, 0)


def functional_decomposition(spec: IncrementSpec, a: np.ndarray) -> IncrementWeights:
    """Decompose sum_k a(k) x(k) into difference and boundary parts.

    With b = D a and the boundary weights below, the identity

        sum_{k=0}^{N} a(k) x(k)
            = sum_{k=0}^{N} b(k) dx(k) - sum_{k=-span}^{-1} v(k) x(k)

    holds exactly for every sequence x, where dx is the step-mu order-n
    difference of x.  The identity is pure telescoping, so it is validated
    here in exact rational-free integer-weighted arithmetic by the tests.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ConfigError(f"a must be a nonempty 1-d array, got shape {a.shape}")
    N = a.size - 1
    D = build_d_matrix(spec, N)
    b = D @ a
    span = spec.span
    v = np.zeros(span)
    for i in range(span):
        k = i - span  # position in -span..-1
        total = 0.0
        for ell in range(ceil(-k / spec.mu), spec.n + 1):
            j = ell * spec.mu + k
            if 0 <= j <= N:
                total += (-1) ** ell * comb(spec.n, ell) * b[j]
        v[i] = total
    return IncrementWeights(spec=spec, a=a.copy(), b=b, v=v)
