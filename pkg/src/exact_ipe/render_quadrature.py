"""Stratified depth sampling along a ray and emission-absorption compositing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidInputError
from .oracle import stream_rng

__all__ = [
    "RaySamples",
    "IntervalRadiance",
    "stratified_ts",
    "composite_weights",
    "composite",
]


@dataclass(frozen=True)
class RaySamples:
    """``N + 1`` sorted depths bounding ``N`` intervals."""

    ts: np.ndarray
    t_near: float
    t_far: float

    @property
    def n_intervals(self) -> int:
        return self.ts.size - 1

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.ts)

    @property
    def intervals(self) -> np.ndarray:
        """(N, 2) array of ``[t_i, t_{i+1}]``."""
        return np.column_stack([self.ts[:-1], self.ts[1:]])


@dataclass(frozen=True)
class IntervalRadiance:
    color: np.ndarray
    density: float

    def __post_init__(self):
        color = np.asarray(self.color, dtype=np.float64)
        if color.shape != (3,):
            raise InvalidInputError("color must be a 3-vector")
        if np.any(color < 0.0) or np.any(color > 1.0):
            raise DomainError("color components must lie in [0, 1]")
        if not self.density >= 0.0:
            raise DomainError("density must be non-negative")
        object.__setattr__(self, "color", color)


def stratified_ts(t_near: float, t_far: float, N: int, seed: int) -> RaySamples:
    """One uniform depth in each of ``N + 1`` equal bins of ``[t_near, t_far]``.

    The ``N + 1`` points delimit ``N`` intervals.
    """
    if not (np.isfinite(t_near) and np.isfinite(t_far)) or t_far <= t_near:
        raise DomainError(f"need finite t_far > t_near, got [{t_near}, {t_far}]")
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    N = int(N)
    edges = np.linspace(t_near, t_far, N + 2)
    u = stream_rng(seed, 0).random(N + 1)
    ts = edges[:-1] + u * (edges[1:] - edges[:-1])
    # rounding could land a point on its upper edge
    ts = np.minimum(ts, np.nextafter(edges[1:], -np.inf))
    return RaySamples(ts, float(t_near), float(t_far))


def composite_weights(densities, deltas) -> tuple[np.ndarray, float]:
    """Per-interval weights ``T_i * (1 - exp(-sigma_i delta_i))`` and the
    transmittance left after the last interval.

    Works on the last axis, so batches of rays are fine.
    """
    sigma = np.asarray(densities, dtype=np.float64)
    delta = np.asarray(deltas, dtype=np.float64)
    if np.any(sigma < 0.0) or np.any(np.isnan(sigma)):
        raise DomainError("densities must be non-negative")
    if np.any(delta < 0.0):
        raise DomainError("interval lengths must be non-negative")
    with np.errstate(invalid="ignore"):
        tau = np.where((sigma == 0.0) | (delta == 0.0), 0.0, sigma * delta)
    accum = np.cumsum(tau, axis=-1)
    T = np.exp(-np.concatenate([np.zeros(accum.shape[:-1] + (1,)), accum[..., :-1]], axis=-1))
    alpha = -np.expm1(-tau)
    return T * alpha, np.exp(-accum[..., -1])


def composite(samples: Sequence[IntervalRadiance], ts: RaySamples) -> np.ndarray:
    """Pixel color from per-interval colors and densities over a black
    background."""
    if len(samples) != ts.n_intervals:
        raise InvalidInputError(f"expected {ts.n_intervals} interval samples, got {len(samples)}")
    colors = np.stack([s.color for s in samples])
    weights, _ = composite_weights([s.density for s in samples], ts.deltas)
    return weights @ colors
