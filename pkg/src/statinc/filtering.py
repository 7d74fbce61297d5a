"""Estimation of functionals of the unobserved clean values on the noisy side.

Here the target weights sit on raw positions N+1 .. N+mu*n of the clean
sequence, exactly where only noise-corrupted observations exist.  Padding
the weights with zeros over 0..N and differencing on the extended window
reduces the problem to the same coupled system as interpolation, with the
boundary index still at shift = N + mu*n because the observation layout is
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .increments import IncrementSpec, IncrementWeights, functional_decomposition
from .interpolate import EstimateSolution, solve_increment_functional
from .spectral import DensityModel, QuadratureConfig


@dataclass(frozen=True)
class FilteringProblem:
    """Weights a_future(0..span-1) on clean raw values at N+1 .. N+span."""

    spec: IncrementSpec
    N: int
    a_future: np.ndarray
    f: DensityModel
    g: DensityModel
    L: int | None = None
    quad: QuadratureConfig | None = None


def build_extended_weights(problem: FilteringProblem) -> IncrementWeights:
    """Zero-pad the future weights over 0..N and difference on 0..N+span."""
    a_future = np.asarray(problem.a_future, dtype=float)
    span = problem.spec.span
    if a_future.ndim != 1 or a_future.size != span:
        raise ConfigError(
            f"a_future must have span={span} entries "
            f"(positions N+1..N+span), got shape {a_future.shape}"
        )
    if problem.N < 0:
        raise ConfigError(f"N must be >= 0, got {problem.N}")
    a_ext = np.concatenate([np.zeros(problem.N + 1), a_future])
    return functional_decomposition(problem.spec, a_ext)


def solve_filtering(problem: FilteringProblem) -> EstimateSolution:
    """Solve the filtering problem through the extended difference weights.

    The extended window ends at N + span, which coincides with the boundary
    index, so the difference functional is solved with shift = N + span
    rather than the longer default an interpolation target would get.
    """
    w = build_extended_weights(problem)
    shift = problem.N + problem.spec.span
    return solve_increment_functional(
        problem.spec,
        w.b,
        problem.f,
        problem.g,
        L=problem.L,
        quad=problem.quad,
        shift=shift,
        v=w.v,
    )
