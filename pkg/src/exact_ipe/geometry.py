"""Pyramidal frusta: construction from camera pixels, triangulation, volume
and the unbounded-scene contraction.

Vertex ordering used throughout the package::

    v0..v3  front face, counter-clockwise in the camera's (x, y) image plane,
            starting at the (-, -) corner
    v4..v7  back face, same angular order

Each of the six quadrilateral faces ``(a, b, c, d)`` is split into the
triangles ``(a, b, c)`` and ``(a, c, d)``; the quads are listed so that every
triangle normal ``(P1 - P0) x (P2 - P0)`` points out of the frustum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidInputError, OrientationError

__all__ = [
    "CameraPose",
    "PixelSpec",
    "Frustum",
    "TriangleFace",
    "QUADS",
    "TRIANGLES",
    "frustum_from_pixel",
    "box_frustum",
    "triangulate",
    "triangle_arrays",
    "volume",
    "frustum_volume",
    "contract_point",
    "contract_frustum",
    "rotation_matrix",
]

# front (viewed from outside, i.e. from the camera), back, then four sides
QUADS = np.array(
    [
        [0, 3, 2, 1],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ]
)
TRIANGLES = np.concatenate([QUADS[:, [0, 1, 2]], QUADS[:, [0, 2, 3]]], axis=0)
TRIANGLES = TRIANGLES[np.argsort(np.r_[np.arange(6), np.arange(6)], kind="stable")]

# pixel corners in image-plane units of omega, same angular order as v0..v3
_CORNER_SIGNS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def _frozen(a, shape=None, name="array"):
    arr = np.array(a, dtype=np.float64)
    if shape is not None and arr.shape != shape:
        raise InvalidInputError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rotation by ``angle`` radians about ``axis`` (Rodrigues formula)."""
    k = np.asarray(axis, dtype=np.float64)
    k = k / np.linalg.norm(k)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


@dataclass(frozen=True)
class CameraPose:
    """Pinhole camera with square pixels.

    Attributes
    ----------
    R : (3, 3) array
        World-from-camera rotation.
    o : (3,) array
        Optical center in world coordinates.
    omega : float
        Full pixel side length on the image plane at unit focal distance.
    """

    R: np.ndarray
    o: np.ndarray
    omega: float

    def __post_init__(self):
        R = _frozen(self.R, (3, 3), "R")
        o = _frozen(self.o, (3,), "o")
        if np.max(np.abs(R @ R.T - np.eye(3))) > 1e-12:
            raise InvalidInputError("R is not orthonormal to within 1e-12")
        if abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise InvalidInputError("det(R) must be +1")
        omega = float(self.omega)
        if not np.isfinite(omega):
            raise InvalidInputError("omega must be finite")
        if omega <= 0.0:
            raise DomainError("omega must be positive")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "o", o)
        object.__setattr__(self, "omega", omega)

    @classmethod
    def identity(cls, omega: float = 1.0) -> "CameraPose":
        return cls(np.eye(3), np.zeros(3), omega)

    def moved(self, R, t) -> "CameraPose":
        """Pose after the rigid motion ``x -> R x + t`` of the whole scene."""
        R = np.asarray(R, dtype=np.float64)
        return CameraPose(R @ self.R, R @ self.o + np.asarray(t, dtype=np.float64), self.omega)


@dataclass(frozen=True)
class PixelSpec:
    """Viewing direction of a pixel center and the in-plane corner offsets."""

    direction: np.ndarray
    omega: float
    corner_offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        d = _frozen(self.direction, (3,), "direction")
        if d[2] != 1.0:
            raise InvalidInputError("pixel direction must have unit z-component in camera frame")
        object.__setattr__(self, "direction", d)
        offsets = np.zeros((4, 3))
        offsets[:, :2] = 0.5 * self.omega * _CORNER_SIGNS
        offsets.setflags(write=False)
        object.__setattr__(self, "corner_offsets", offsets)

    def corner_rays(self) -> np.ndarray:
        """Camera-frame rays through the four pixel corners, shape (4, 3)."""
        return self.direction + self.corner_offsets


@dataclass(frozen=True)
class Frustum:
    """Eight vertices of a (possibly contracted) pyramidal frustum.

    ``t_near`` and ``t_far`` record the depths that generated the frustum and
    are 0 when it was built directly from vertices.
    """

    vertices: np.ndarray
    t_near: float = 0.0
    t_far: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, (8, 3), "vertices"))
        object.__setattr__(self, "t_near", float(self.t_near))
        object.__setattr__(self, "t_far", float(self.t_far))

    @property
    def front(self) -> np.ndarray:
        return self.vertices[:4]

    @property
    def back(self) -> np.ndarray:
        return self.vertices[4:]

    def transformed(self, R, t=(0.0, 0.0, 0.0)) -> "Frustum":
        """Frustum after the rigid motion ``x -> R x + t``."""
        v = self.vertices @ np.asarray(R, dtype=np.float64).T + np.asarray(t, dtype=np.float64)
        return Frustum(v, self.t_near, self.t_far)


@dataclass(frozen=True)
class TriangleFace:
    """Triangle with its unnormalized normal ``N = (P1 - P0) x (P2 - P0)``."""

    P0: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    N: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("P0", "P1", "P2"):
            object.__setattr__(self, name, _frozen(getattr(self, name), (3,), name))
        N = np.cross(self.P1 - self.P0, self.P2 - self.P0)
        N.setflags(write=False)
        object.__setattr__(self, "N", N)

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.P0, self.P1, self.P2])

    @property
    def area(self) -> float:
        return 0.5 * float(np.linalg.norm(self.N))

    @property
    def centroid(self) -> np.ndarray:
        return (self.P0 + self.P1 + self.P2) / 3.0


def frustum_from_pixel(pose: CameraPose, dir_cam, t_near: float, t_far: float) -> Frustum:
    """Frustum swept by one pixel between camera depths ``t_near`` and ``t_far``.

    Every vertex is ``o + t * R @ (dir_cam + offset)`` for the four corner
    offsets ``(+-omega/2, +-omega/2, 0)`` and ``t`` in ``{t_near, t_far}``.
    ``dir_cam`` is the camera-frame ray through the pixel center and must
    have z-component 1.
    """
    t_near = float(t_near)
    t_far = float(t_far)
    if not (np.isfinite(t_near) and np.isfinite(t_far)):
        raise InvalidInputError("t_near and t_far must be finite")
    if t_near < 0.0 or t_far <= t_near:
        raise DomainError(f"need t_far > t_near >= 0, got [{t_near}, {t_far}]")
    pixel = PixelSpec(dir_cam, pose.omega)
    rays = pixel.corner_rays() @ pose.R.T
    ts = np.array([t_near, t_far])
    verts = pose.o + ts[:, None, None] * rays[None, :, :]
    return Frustum(verts.reshape(8, 3), t_near, t_far)


def box_frustum(lo, hi) -> Frustum:
    """Axis-aligned box ``[lo, hi]`` in the frustum vertex ordering (z is depth)."""
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (3,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (3,))
    if np.any(hi <= lo):
        raise DomainError("box needs hi > lo on every axis")
    xy = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    front = np.column_stack([xy, np.full(4, lo[2])])
    back = np.column_stack([xy, np.full(4, hi[2])])
    return Frustum(np.vstack([front, back]))


def triangle_arrays(vertices) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized triangulation.

    Parameters
    ----------
    vertices : (..., 8, 3) array

    Returns
    -------
    P : (..., 12, 3, 3) array
        ``P[..., t, i, :]`` is vertex ``i`` of triangle ``t``.
    N : (..., 12, 3) array
        Outward unnormalized normals.
    """
    v = np.asarray(vertices, dtype=np.float64)
    P = v[..., TRIANGLES, :]
    N = np.cross(P[..., 1, :] - P[..., 0, :], P[..., 2, :] - P[..., 0, :])
    return P, N


def triangulate(f: Frustum) -> list[TriangleFace]:
    """Split the six faces of ``f`` into 12 outward-oriented triangles."""
    v = f.vertices
    return [TriangleFace(v[a], v[b], v[c]) for a, b, c in TRIANGLES]


def _stack_triangles(tris: Sequence[TriangleFace]) -> tuple[np.ndarray, np.ndarray]:
    if len(tris) == 0:
        raise InvalidInputError("empty triangle list")
    P = np.stack([t.points for t in tris])
    N = np.stack([t.N for t in tris])
    return P, N


def volume(tris: Sequence[TriangleFace]) -> float:
    """Enclosed volume ``(1/6) * sum(P0 . N)`` of a closed triangulated surface.

    Raises
    ------
    OrientationError
        If the result is not positive.
    """
    P, N = _stack_triangles(tris)
    vol = float(np.einsum("ti,ti->", P[:, 0], N)) / 6.0
    if not vol > 0.0:
        raise OrientationError(f"non-positive volume {vol!r}: inward normals or self-intersection")
    return vol


def frustum_volume(vertices) -> np.ndarray:
    """Volume of one or many frusta given as (..., 8, 3) vertex arrays."""
    P, N = triangle_arrays(vertices)
    return np.einsum("...ti,...ti->...", P[..., 0, :], N) / 6.0


def contract_point(x) -> np.ndarray:
    """Map space into the radius-2 ball; identity inside the unit ball.

    Points with norm ``r > 1`` go to ``(2 - 1/r) * x / r``. Works on any
    (..., 3) array.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    outside = r > 1.0
    safe_r = np.where(outside, r, 1.0)
    scale = np.where(outside, (2.0 - 1.0 / safe_r) / safe_r, 1.0)
    return x * scale


def contract_frustum(f: Frustum) -> Frustum:
    """Contract the eight vertices; the result keeps flat faces between them."""
    return Frustum(contract_point(f.vertices), f.t_near, f.t_far)
