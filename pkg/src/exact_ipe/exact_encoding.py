"""Closed-form volume average of sinusoid features over a triangulated region.

For a closed, outward-oriented triangle surface the divergence theorem turns
``(1/V) * integral of sin(2**l * x_k) dV`` into a sum over triangles of a
per-triangle coefficient times the normal component ``N_k``. With ``a = 2**l``
and the triangle parameterized as ``P0 + u*E1 + v*E2`` on the unit simplex,
the coefficients are::

    sigma = integral over simplex of -cos(a * x(u, v)) du dv
    xi    = integral over simplex of  sin(a * x(u, v)) du dv

and the encodings are::

    sin feature = 6 * sum(sigma * N_k) / (a * sum(P0 . N))
    cos feature = 6 * sum(xi    * N_k) / (a * sum(P0 . N))

Each coefficient is the second divided difference of ``cos(a x) / a**2``
(resp. ``-sin(a x) / a**2``) at the three vertex coordinates, which is the
determinant ratio ``det[1, x, f(a x)] / det[1, x, x**2]`` scaled by ``1/a**2``.
When two or three coordinates coincide the ratio is 0/0 and the confluent
limit is used instead.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Sequence

import numpy as np

from .encoding import EncodingVector, check_octaves, join_blocks
from .errors import ConsistencyError, InvalidInputError, OrientationError
from .geometry import Frustum, TriangleFace, triangle_arrays, triangulate

__all__ = [
    "GUARD_THRESHOLD",
    "BOUND_SLACK",
    "Degeneracy",
    "underflow_guard",
    "classify",
    "snap",
    "sigma_coeff",
    "xi_coeff",
    "coefficients",
    "literal_coefficients",
    "eipe",
    "eipe_frustum",
    "eipe_batch",
    "EIPEResult",
]

GUARD_THRESHOLD = 1e-6
BOUND_SLACK = 1e-9


class Degeneracy(IntEnum):
    """Which vertex coordinates of a triangle coincide along one axis."""

    GENERIC = 0
    X0_X1 = 1
    X0_X2 = 2
    X1_X2 = 3
    ALL_EQUAL = 4


def classify(x, threshold: float = GUARD_THRESHOLD) -> np.ndarray:
    """Degeneracy class of every coordinate triple in a (..., 3) array.

    Pairwise differences with ``|d| < threshold`` count as equal. Two equal
    pairs imply the third (snapping is transitive). ``threshold=0`` only
    recognizes exact ties.
    """
    x = np.asarray(x, dtype=np.float64)
    x0, x1, x2 = x[..., 0], x[..., 1], x[..., 2]
    if threshold > 0.0:
        e01 = np.abs(x0 - x1) < threshold
        e02 = np.abs(x0 - x2) < threshold
        e12 = np.abs(x1 - x2) < threshold
    else:
        e01, e02, e12 = x0 == x1, x0 == x2, x1 == x2
    n_equal = e01.astype(np.int8) + e02 + e12
    cls = np.full(x0.shape, Degeneracy.GENERIC, dtype=np.int8)
    cls = np.where(e12, Degeneracy.X1_X2, cls)
    cls = np.where(e02, Degeneracy.X0_X2, cls)
    cls = np.where(e01, Degeneracy.X0_X1, cls)
    return np.where(n_equal >= 2, Degeneracy.ALL_EQUAL, cls).astype(np.int8)


def underflow_guard(x0: float, x1: float, x2: float) -> Degeneracy:
    """Classify one coordinate triple with the 1e-6 snapping rule."""
    x = np.array([x0, x1, x2], dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("coordinates must be finite")
    return Degeneracy(int(classify(x)))


def snap(x, cls) -> np.ndarray:
    """Replace coordinates that were classified equal by their mean.

    The mean makes the snapping error second order in the discarded
    difference (the first-order terms of the divided difference cancel),
    which keeps thin regions far inside [-1, 1].
    """
    x = np.array(x, dtype=np.float64)
    cls = np.asarray(cls)
    x0, x1, x2 = x[..., 0].copy(), x[..., 1].copy(), x[..., 2].copy()
    m01, m02, m12 = 0.5 * (x0 + x1), 0.5 * (x0 + x2), 0.5 * (x1 + x2)
    m = (x0 + x1 + x2) / 3.0
    x[..., 0] = np.select([cls == Degeneracy.X0_X1, cls == Degeneracy.X0_X2, cls == Degeneracy.ALL_EQUAL], [m01, m02, m], x0)
    x[..., 1] = np.select([cls == Degeneracy.X0_X1, cls == Degeneracy.X1_X2, cls == Degeneracy.ALL_EQUAL], [m01, m12, m], x1)
    x[..., 2] = np.select([cls == Degeneracy.X0_X2, cls == Degeneracy.X1_X2, cls == Degeneracy.ALL_EQUAL], [m02, m12, m], x2)
    return x


def _sinc(u):
    return np.sinc(u / np.pi)


SERIES_TERMS = 19
_INV_FACT2 = 1.0 / np.array([float(np.prod(np.arange(1, n + 3))) for n in range(SERIES_TERMS)])


def _series_integral(alpha, beta):
    """``int_simplex exp(i (u alpha + v beta)) du dv`` for ``|alpha|, |beta| <= 1``.

    Uses ``int u^j v^k = j! k! / (j + k + 2)!``, which sums to
    ``sum_n i^n h_n(alpha, beta) / (n + 2)!`` with ``h_n`` the complete
    homogeneous polynomial. Every term is computed without cancellation.
    """
    re = np.zeros(np.shape(alpha))
    im = np.zeros(np.shape(alpha))
    h = np.ones(np.shape(alpha))
    apow = np.ones(np.shape(alpha))
    for n in range(SERIES_TERMS):
        if n:
            apow = apow * alpha
            h = beta * h + apow
        term = h * _INV_FACT2[n]
        if n % 4 == 0:
            re += term
        elif n % 4 == 1:
            im += term
        elif n % 4 == 2:
            re -= term
        else:
            im -= term
    return re, im


def _stable_coefficients(x, a):
    """sigma and xi from (already snapped) coordinates without cancellation.

    Coordinates are sorted. When ``a`` times the spread is at most 1 the
    simplex integral is summed as a power series around the middle node;
    otherwise the outer division of the divided difference uses the widest
    gap, and the first divided differences use ``cos q - cos p =
    -2 sin(m) sin(h)`` so they stay exact when two nodes coincide.
    """
    s = np.sort(x, axis=-1)
    s0, s1, s2 = s[..., 0], s[..., 1], s[..., 2]

    def first(p, q):
        m = 0.5 * a * (p + q)
        sh = _sinc(0.5 * a * (q - p))
        return -a * np.sin(m) * sh, a * np.cos(m) * sh

    c01, s01 = first(s0, s1)
    c12, s12 = first(s1, s2)
    width = s2 - s0
    small = a * width <= 1.0
    w = np.where(small, 1.0, width)
    sigma = (c12 - c01) / w / (a * a)
    xi = -(s12 - s01) / w / (a * a)

    re, im = _series_integral(np.where(small, a * (s0 - s1), 0.0), np.where(small, a * (s2 - s1), 0.0))
    c, n = np.cos(a * s1), np.sin(a * s1)
    sigma = np.where(small, -(c * re - n * im), sigma)
    xi = np.where(small, n * re + c * im, xi)
    return sigma, xi


def literal_coefficients(x, l: int, cls=None):
    """sigma and xi from the textbook closed forms, evaluated as written.

    The generic case is the three-term Lagrange expression over the product
    of coordinate differences; tied coordinates use the l'Hopital limits.
    No snapping and no rearrangement: near-ties lose precision, which is the
    failure mode the guarded path exists to avoid.

    Parameters
    ----------
    x : (..., 3) array
    l : int
        Octave; frequency is ``2**l``.
    cls : array of Degeneracy, optional
        Defaults to exact-tie classification.
    """
    x = np.asarray(x, dtype=np.float64)
    a = 2.0**l
    a2 = a * a
    if cls is None:
        cls = classify(x, threshold=0.0)
    x0, x1, x2 = x[..., 0], x[..., 1], x[..., 2]
    c0, c1, c2 = np.cos(a * x0), np.cos(a * x1), np.cos(a * x2)
    n0, n1, n2 = np.sin(a * x0), np.sin(a * x1), np.sin(a * x2)

    with np.errstate(divide="ignore", invalid="ignore"):
        den = a2 * (x1 - x0) * (x2 - x0) * (x2 - x1)
        sig_g = ((x2 - x1) * c0 + (x0 - x2) * c1 + (x1 - x0) * c2) / den
        xi_g = -((x2 - x1) * n0 + (x0 - x2) * n1 + (x1 - x0) * n2) / den

        d21 = x2 - x1
        d20 = x2 - x0
        sig_01 = (a * d21 * n1 - c1 + c2) / (a2 * d21 * d21)
        sig_02 = (-a * d21 * n2 + c1 - c2) / (a2 * d21 * d21)
        sig_12 = (-a * d20 * n1 + c0 - c2) / (a2 * d20 * d20)
        xi_01 = (a * d21 * c1 + n1 - n2) / (a2 * d21 * d21)
        xi_02 = (-a * d21 * c2 - n1 + n2) / (a2 * d21 * d21)
        xi_12 = (-a * d20 * c2 - n0 + n2) / (a2 * d20 * d20)

    sigma = np.select(
        [cls == Degeneracy.X0_X1, cls == Degeneracy.X0_X2, cls == Degeneracy.X1_X2, cls == Degeneracy.ALL_EQUAL],
        [sig_01, sig_02, sig_12, -0.5 * c0],
        sig_g,
    )
    xi = np.select(
        [cls == Degeneracy.X0_X1, cls == Degeneracy.X0_X2, cls == Degeneracy.X1_X2, cls == Degeneracy.ALL_EQUAL],
        [xi_01, xi_02, xi_12, 0.5 * n0],
        xi_g,
    )
    return sigma, xi


def coefficients(x, l: int, guard: bool = True):
    """Vectorized sigma and xi for coordinate triples in a (..., 3) array.

    With ``guard`` (the default) differences below 1e-6 are snapped to zero,
    the matching limit branch is taken, and the generic case is evaluated in
    a cancellation-free form. Without it, :func:`literal_coefficients` is
    used with exact-tie detection only.
    """
    x = np.asarray(x, dtype=np.float64)
    if not guard:
        return literal_coefficients(x, l)
    cls = classify(x)
    return _stable_coefficients(snap(x, cls), 2.0**l)


def _scalar(x0, x1, x2, l):
    x = np.array([x0, x1, x2], dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("coordinates must be finite")
    if isinstance(l, bool) or int(l) != l or l < 0:
        raise InvalidInputError(f"octave must be a non-negative integer, got {l!r}")
    return coefficients(x, int(l))


def sigma_coeff(x0: float, x1: float, x2: float, l: int) -> float:
    """Simplex integral of ``-cos(2**l x)`` over one triangle's coordinates.

    Equal to ``det[1, x, cos(2**l x)] / det[1, x, x**2] / 4**l``; tends to
    ``-cos(2**l x0) / 2`` when all three coordinates coincide.

    >>> sigma_coeff(0.0, 0.0, 0.0, 0)
    -0.5
    """
    return float(_scalar(x0, x1, x2, l)[0])


def xi_coeff(x0: float, x1: float, x2: float, l: int) -> float:
    """Simplex integral of ``sin(2**l x)``; the cosine-feature counterpart of
    :func:`sigma_coeff`. Tends to ``sin(2**l x0) / 2`` at a triple tie."""
    return float(_scalar(x0, x1, x2, l)[1])


def _neumaier(terms, axis):
    """Compensated sum along ``axis``."""
    terms = np.moveaxis(np.asarray(terms, dtype=np.float64), axis, 0)
    total = np.zeros(terms.shape[1:])
    comp = np.zeros(terms.shape[1:])
    for t in terms:
        s = total + t
        comp += np.where(np.abs(total) >= np.abs(t), (total - s) + t, (t - s) + total)
        total = s
    return total + comp


class EIPEResult:
    """Raw output of :func:`eipe_batch` before bounds handling.

    Attributes
    ----------
    values : (..., 6L) array
    volume : (...,) array
    guard_activations : (...,) int array
        Number of (triangle, axis) coordinate triples that were snapped.
    """

    def __init__(self, values, volume, guard_activations):
        self.values = values
        self.volume = volume
        self.guard_activations = guard_activations


def _eipe_raw(P, N, L, guard):
    # volume from vertices relative to the first corner: same value for a
    # closed surface, without the |x| / V cancellation of far-away regions
    origin = P[..., :1, :1, :]
    den = _neumaier(np.einsum("...ti,...ti->...t", (P - origin)[..., 0, :], N), axis=-1)
    coords = np.swapaxes(P, -1, -2)  # (..., 12, axis, vertex)
    if guard:
        cls = classify(coords)
        activations = np.count_nonzero(cls != Degeneracy.GENERIC, axis=(-1, -2))
    else:
        activations = np.zeros(P.shape[:-3], dtype=np.int64)
    sin_f = np.empty(P.shape[:-3] + (L, 3))
    cos_f = np.empty(P.shape[:-3] + (L, 3))
    with np.errstate(divide="ignore", invalid="ignore"):
        for l in range(L):
            a = 2.0**l
            sig, xi = coefficients(coords, l, guard=guard)
            scale = 6.0 / (a * den[..., None])
            sin_f[..., l, :] = _neumaier(sig * N, axis=-2) * scale
            cos_f[..., l, :] = _neumaier(xi * N, axis=-2) * scale
    return EIPEResult(join_blocks(sin_f, cos_f), den / 6.0, activations)


def eipe_batch(vertices, L: int, *, guard: bool = True, check: bool = True) -> np.ndarray:
    """Exact encodings of many frusta at once.

    Parameters
    ----------
    vertices : (..., 8, 3) array
        Frusta in the package vertex ordering.
    L : int
        Number of octaves.
    guard : bool
        Apply the 1e-6 snapping guard (see :func:`coefficients`).
    check : bool
        Enforce positive volume and the [-1, 1] bound (slack 1e-9) and clamp.
        Ignored when ``guard`` is off; the unguarded output is returned as is.

    Returns
    -------
    (..., 6L) float64 array in :class:`EncodingVector` layout.
    """
    L = check_octaves(L)
    P, N = triangle_arrays(vertices)
    return _finish(_eipe_raw(P, N, L, guard), guard and check)


def _finish(res, check):
    if not check:
        return res.values
    if np.any(~(res.volume > 0.0)):
        raise OrientationError("non-positive volume: inward normals or self-intersection")
    excess = np.abs(res.values) - 1.0
    if not np.all(excess <= BOUND_SLACK):
        worst = float(np.nanmax(np.where(np.isnan(excess), np.inf, excess)))
        raise ConsistencyError(f"encoding leaves [-1, 1] by {worst:.3g}")
    return np.clip(res.values, -1.0, 1.0)


def eipe(
    tris: Sequence[TriangleFace],
    L: int,
    *,
    guard: bool = True,
    single_precision: bool = False,
) -> EncodingVector:
    """Exact volume-averaged sinusoid encoding of a closed triangulated region.

    Parameters
    ----------
    tris : sequence of TriangleFace
        Closed surface with outward normals, e.g. from ``triangulate``.
    L : int
        Number of octaves; frequencies ``2**0 .. 2**(L-1)``.
    guard : bool
        Snap coordinate differences below 1e-6 and use limit branches. With
        the guard off no bound check is made and values may leave [-1, 1].
    single_precision : bool
        Round the (double precision) result to float32.

    Raises
    ------
    OrientationError
        Non-positive enclosed volume.
    ConsistencyError
        A guarded component exceeds [-1, 1] by more than 1e-9.
    """
    L = check_octaves(L)
    if len(tris) == 0:
        raise InvalidInputError("empty triangle list")
    P = np.stack([t.points for t in tris])
    N = np.stack([t.N for t in tris])
    res = _eipe_raw(P, N, L, guard)
    if not res.volume > 0.0:
        raise OrientationError(f"non-positive volume {float(res.volume)!r}")
    values = _finish(res, guard)
    if single_precision:
        values = values.astype(np.float32)
    return EncodingVector(values, L)


def eipe_frustum(f: Frustum, L: int, **kwargs) -> EncodingVector:
    """:func:`eipe` of the standard 12-triangle surface of ``f``."""
    return eipe(triangulate(f), L, **kwargs)
