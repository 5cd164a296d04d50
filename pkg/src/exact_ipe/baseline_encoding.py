"""Comparison encoders: point features, the Gaussian approximation of a cone
frustum, its contracted version, and a direct closed form for square pyramids
looking straight down the optical axis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import EncodingVector, check_octaves, join_blocks
from .errors import DomainError, InvalidCovarianceError, InvalidInputError
from .exact_encoding import GUARD_THRESHOLD, eipe_frustum
from .geometry import CameraPose, contract_point, frustum_from_pixel

__all__ = [
    "GaussianRegion",
    "frequency_lift",
    "pe",
    "pe_batch",
    "gaussian_ipe",
    "gaussian_ipe_batch",
    "cone_moments",
    "contract_gaussian",
    "contraction_jacobian",
    "square_pyramid_eipe",
]


@dataclass(frozen=True)
class GaussianRegion:
    """Mean and covariance standing in for a region."""

    mu: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64)
        Sigma = np.array(self.Sigma, dtype=np.float64)
        if mu.shape != (3,) or Sigma.shape != (3, 3):
            raise InvalidInputError("mu must be (3,) and Sigma (3, 3)")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(Sigma))):
            raise InvalidInputError("non-finite Gaussian parameters")
        scale = max(1.0, float(np.max(np.abs(Sigma))))
        if np.max(np.abs(Sigma - Sigma.T)) > 1e-12 * scale:
            raise InvalidCovarianceError("Sigma is not symmetric")
        if np.min(np.linalg.eigvalsh(Sigma)) < -1e-12 * scale:
            raise InvalidCovarianceError("Sigma is not positive semi-definite")
        mu.setflags(write=False)
        Sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", Sigma)


def frequency_lift(L: int) -> np.ndarray:
    """The (3L, 3) matrix stacking ``2**l * I`` for ``l = 0 .. L-1``."""
    L = check_octaves(L)
    return np.kron((2.0 ** np.arange(L))[:, None], np.eye(3))


def pe_batch(x, L: int) -> np.ndarray:
    """Point features of a (..., 3) array of points, shape (..., 6L)."""
    L = check_octaves(L)
    x = np.asarray(x, dtype=np.float64)
    scaled = x[..., None, :] * (2.0 ** np.arange(L))[:, None]
    return join_blocks(np.sin(scaled), np.cos(scaled))


def pe(x, L: int) -> EncodingVector:
    """``[sin(2**l x_k)], [cos(2**l x_k)]`` of a single point."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise InvalidInputError("x must be a finite 3-vector")
    return EncodingVector(pe_batch(x, L), L)


def gaussian_ipe_batch(mu, var_diag, L: int) -> np.ndarray:
    """Expected features under independent per-axis normals.

    Parameters
    ----------
    mu : (..., 3) array
    var_diag : (..., 3) array
        Diagonal of the covariance.
    """
    L = check_octaves(L)
    mu = np.asarray(mu, dtype=np.float64)
    var = np.asarray(var_diag, dtype=np.float64)
    freq = (2.0 ** np.arange(L))[:, None]
    scaled = mu[..., None, :] * freq
    damp = np.exp(-0.5 * var[..., None, :] * freq**2)
    return join_blocks(np.sin(scaled) * damp, np.cos(scaled) * damp)


def gaussian_ipe(g: GaussianRegion, L: int) -> EncodingVector:
    """Expected value of the features for ``x ~ N(mu, Sigma)``.

    Only the diagonal of the lifted covariance enters:
    ``sin(2**l mu_k) * exp(-0.5 * 4**l * Sigma_kk)`` and likewise for cos.
    """
    diag = np.diag(g.Sigma)
    if np.any(diag < 0.0):
        raise InvalidCovarianceError("negative variance on the diagonal")
    return EncodingVector(gaussian_ipe_batch(g.mu, diag, L), L)


def cone_moments(d, o, r_dot: float, t0: float, t1: float) -> GaussianRegion:
    """Mean and covariance of the uniform distribution in a cone frustum.

    The frustum holds the points ``o + t*d + w`` with ``t0 <= t <= t1``,
    ``w`` perpendicular to ``d`` and ``|w| <= r_dot * t``. Uses the
    midpoint/half-width form of the moments, which stays accurate for thin
    frusta.
    """
    d = np.asarray(d, dtype=np.float64)
    o = np.asarray(o, dtype=np.float64)
    vals = np.array([r_dot, t0, t1], dtype=np.float64)
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o)) and np.all(np.isfinite(vals))):
        raise InvalidInputError("non-finite cone parameters")
    if not (t1 > t0 > 0.0) or r_dot <= 0.0 or not np.any(d != 0.0):
        raise DomainError("need t1 > t0 > 0, r_dot > 0 and a non-zero direction")
    mid = 0.5 * (t0 + t1)
    half = 0.5 * (t1 - t0)
    m2, h2 = mid**2, half**2
    denom = 3.0 * m2 + h2
    t_mean = mid + 2.0 * mid * h2 / denom
    t_var = h2 / 3.0 - (4.0 / 15.0) * (h2**2 * (12.0 * m2 - h2)) / denom**2
    r_var = r_dot**2 * (m2 / 4.0 + (5.0 / 12.0) * h2 - (4.0 / 15.0) * h2**2 / denom)
    dd = np.outer(d, d)
    null = np.eye(3) - dd / (d @ d)
    Sigma = t_var * dd + r_var * null
    return GaussianRegion(o + t_mean * d, 0.5 * (Sigma + Sigma.T))


def contraction_jacobian(x) -> np.ndarray:
    """Jacobian of the contraction at ``x``; the identity inside the unit ball."""
    x = np.asarray(x, dtype=np.float64)
    r = float(np.linalg.norm(x))
    if r <= 1.0:
        return np.eye(3)
    g = 2.0 / r - 1.0 / r**2
    dg_over_r = (-2.0 / r**2 + 2.0 / r**3) / r
    return g * np.eye(3) + dg_over_r * np.outer(x, x)


def contract_gaussian(g: GaussianRegion) -> GaussianRegion:
    """Push a Gaussian through the contraction by linearizing at its mean."""
    if np.linalg.norm(g.mu) <= 1.0:
        return g
    J = contraction_jacobian(g.mu)
    Sigma = J @ g.Sigma @ J.T
    return GaussianRegion(contract_point(g.mu), 0.5 * (Sigma + Sigma.T))


# largest tolerated rounding estimate of the four-corner sum before the
# smooth one-dimensional form takes over
CLOSED_FORM_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _depth_quadrature(p, q, k, phase, t0, t1):
    """``int t^2 sinc(p t) sinc(q t) exp(i (k t + phase)) dt`` over [t0, t1].

    The integrand is entire, so Gauss-Legendre on panels spanning at most
    one radian of oscillation each converges to rounding.
    """
    freq = abs(k) + abs(p) + abs(q)
    panels = int(np.ceil(freq * (t1 - t0))) + 1
    edges = np.linspace(t0, t1, panels + 1)
    half = 0.5 * np.diff(edges)
    t = (edges[:-1] + half)[:, None] + half[:, None] * _GL_NODES
    w = half[:, None] * _GL_WEIGHTS
    g = w * t * t * np.sinc(p * t / np.pi) * np.sinc(q * t / np.pi)
    arg = k * t + phase
    return np.sum(g * np.sin(arg)), np.sum(g * np.cos(arg))


def _closed_form_axis(row, o_k, omega, t0, t1, L):
    """Sine and cosine averages along one world axis, or None if singular.

    ``row`` is the matching row of R. Integrates the camera-frame box
    ``|x'|, |y'| <= omega z'/2``, ``t0 <= z' <= t1`` directly. The
    four-corner sum is a mixed second difference in the half-width; when
    its rounding estimate exceeds CLOSED_FORM_TOL (thin pixels, low
    octaves) the same depth integral is evaluated in its smooth form
    ``4 h^2 int z^2 sinc(a h r1 z) sinc(a h r2 z) sin(a (o + r3 z)) dz``.
    """
    r1, r2, r3 = row
    h = 0.5 * omega
    zeta = np.array([h * r1 + h * r2 + r3, -h * r1 + h * r2 + r3, h * r1 - h * r2 + r3, -h * r1 - h * r2 + r3])
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    if min(abs(r1), abs(r2), np.min(np.abs(zeta))) < GUARD_THRESHOLD:
        return None
    vol = omega**2 * (t1**3 - t0**3) / 3.0
    sin_f = np.empty(L)
    cos_f = np.empty(L)
    eps = np.finfo(np.float64).eps
    for l in range(L):
        a = 2.0**l
        far = a * (t1 * zeta + o_k)
        near = a * (t0 * zeta + o_k)
        scale = abs(1.0 / (a**3 * r1 * r2 * vol))
        rounding = eps * scale * np.sum((2.0 + np.abs(far) + np.abs(near)) / np.abs(zeta))
        if rounding > CLOSED_FORM_TOL:
            s, c = _depth_quadrature(a * h * r1, a * h * r2, a * r3, a * o_k, t0, t1)
            sin_f[l] = 4.0 * h * h * s / vol
            cos_f[l] = 4.0 * h * h * c / vol
            continue
        C = np.cos(far) - np.cos(near)
        S = np.sin(far) - np.sin(near)
        pre = 1.0 / (a**3 * r1 * r2)
        sin_f[l] = pre * np.sum(signs * C / zeta) / vol
        cos_f[l] = -pre * np.sum(signs * S / zeta) / vol
    return sin_f, cos_f


def square_pyramid_eipe(pose: CameraPose, t0: float, t1: float, L: int) -> EncodingVector:
    """Exact features of the centered square-pyramid frustum of a camera.

    The frustum is the one swept by the pixel straight ahead
    (``dir_cam = (0, 0, 1)``) between depths ``t0`` and ``t1``. Each world
    axis is integrated in closed form; axes whose rotation entries or corner
    terms fall within 1e-6 of zero are taken from the triangulated surface
    instead.
    """
    L = check_octaves(L)
    t0, t1 = float(t0), float(t1)
    if not (np.isfinite(t0) and np.isfinite(t1)):
        raise InvalidInputError("t0 and t1 must be finite")
    if not (t1 > t0 > 0.0) or (t1 - t0) < GUARD_THRESHOLD * t1:
        raise DomainError(f"need t1 > t0 > 0 with a non-degenerate slab, got [{t0}, {t1}]")
    sin_f = np.empty((L, 3))
    cos_f = np.empty((L, 3))
    fallback = None
    for k in range(3):
        res = _closed_form_axis(pose.R[k], pose.o[k], pose.omega, t0, t1, L)
        if res is None:
            if fallback is None:
                f = frustum_from_pixel(pose, [0.0, 0.0, 1.0], t0, t1)
                fallback = eipe_frustum(f, L)
            sin_f[:, k] = fallback.sin[:, k]
            cos_f[:, k] = fallback.cos[:, k]
        else:
            sin_f[:, k], cos_f[:, k] = res
    return EncodingVector(join_blocks(sin_f, cos_f), L)
