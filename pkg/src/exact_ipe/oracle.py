"""Brute-force reference values by Monte-Carlo integration.

Frusta are split into tetrahedra and sampled exactly uniformly; cone frusta
(which have no flat decomposition) use rejection sampling. Random numbers
come from Philox streams keyed by ``(seed, chunk index)`` with a fixed chunk
size, so an estimate does not depend on how many workers computed it.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .encoding import check_octaves, join_blocks
from .errors import InvalidInputError, UnsupportedRegionError
from .geometry import TRIANGLES, Frustum, triangle_arrays

__all__ = [
    "CHUNK",
    "TetDecomposition",
    "OracleEstimate",
    "MomentEstimate",
    "decompose",
    "is_convex",
    "stream_rng",
    "sample_uniform",
    "mc_encoding",
    "mc_moments",
    "polyhedron_moments",
]

CHUNK = 1 << 16
CONVEXITY_TOL = 1e-9


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one ``(seed, stream)`` pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


@dataclass(frozen=True)
class TetDecomposition:
    """Tetrahedra partitioning a convex polyhedron.

    ``tets[i]`` holds four vertices; ``cumulative`` is the running sum of
    their volumes (last entry is the total).
    """

    tets: np.ndarray
    volumes: np.ndarray
    cumulative: np.ndarray
    face_points: np.ndarray
    face_normals: np.ndarray
    diameter: float

    @property
    def total_volume(self) -> float:
        return float(self.cumulative[-1])

    def contains(self, x, tol: float = CONVEXITY_TOL) -> np.ndarray:
        """Half-space test against every bounding triangle plane."""
        N = self.face_normals
        norms = np.linalg.norm(N, axis=-1)
        keep = norms > 0.0
        unit = N[keep] / norms[keep, None]
        x = np.asarray(x, dtype=np.float64)
        dist = np.einsum("...ti,ti->...t", x[..., None, :] - self.face_points[keep, 0], unit)
        return np.all(dist <= tol * self.diameter, axis=-1)


@dataclass(frozen=True)
class OracleEstimate:
    """Per-component sample mean and standard error."""

    mean: np.ndarray
    std_error: np.ndarray
    n_samples: int
    seed: int


@dataclass(frozen=True)
class MomentEstimate:
    """Sample moments with standard errors of every entry."""

    mean: np.ndarray
    cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    n_samples: int
    acceptance: float


def is_convex(vertices, tol: float = CONVEXITY_TOL) -> bool:
    """All vertices on the inner side of every triangle plane."""
    v = np.asarray(vertices, dtype=np.float64)
    P, N = triangle_arrays(v)
    norms = np.linalg.norm(N, axis=-1)
    keep = norms > 0.0
    unit = N[keep] / norms[keep, None]
    dist = np.einsum("vti,ti->vt", v[:, None, :] - P[keep, 0], unit)
    diameter = np.max(np.linalg.norm(v[:, None] - v[None], axis=-1))
    return bool(np.all(dist <= tol * diameter))


def decompose(f: Frustum) -> TetDecomposition:
    """Fan of tetrahedra from vertex v0 over the triangles not touching it.

    Raises
    ------
    UnsupportedRegionError
        If the frustum is not convex (tolerance 1e-9 of its diameter).
    """
    v = f.vertices
    if not is_convex(v):
        raise UnsupportedRegionError("oracle sampling needs a convex frustum")
    P, N = triangle_arrays(v)
    far = ~np.any(TRIANGLES == 0, axis=1)
    tets = np.concatenate([np.broadcast_to(v[0], (int(far.sum()), 1, 3)), P[far]], axis=1)
    vols = np.einsum("ti,ti->t", tets[:, 1] - tets[:, 0], np.cross(tets[:, 2] - tets[:, 0], tets[:, 3] - tets[:, 0])) / 6.0
    keep = vols > 0.0
    tets, vols = tets[keep], vols[keep]
    diameter = float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))
    return TetDecomposition(tets, vols, np.cumsum(vols), P, N, diameter)


def _fold(u):
    """Map the unit cube onto the unit simplex (uniform to uniform)."""
    s, t, w = u[:, 0], u[:, 1], u[:, 2]
    m = s + t > 1.0
    s, t = np.where(m, 1.0 - s, s), np.where(m, 1.0 - t, t)
    m1 = t + w > 1.0
    m2 = ~m1 & (s + t + w > 1.0)
    s, t, w = (
        np.where(m2, 1.0 - t - w, s),
        np.where(m1, 1.0 - w, t),
        np.where(m1, 1.0 - s - t, np.where(m2, s + t + w - 1.0, w)),
    )
    return np.column_stack([1.0 - s - t - w, s, t, w])


def _sample_chunk(td: TetDecomposition, n: int, rng: np.random.Generator) -> np.ndarray:
    # column 0 picks the tetrahedron, columns 1..3 place the point in it
    u = rng.random((n, 4))
    pick = np.searchsorted(td.cumulative, u[:, 0] * td.cumulative[-1], side="right")
    pick = np.minimum(pick, len(td.volumes) - 1)
    bary = _fold(u[:, 1:])
    return np.einsum("nk,nkj->nj", bary, td.tets[pick])


@numba.njit(cache=True)
def _feature_sums(tets, cumulative, u, L):
    """Fused sampling and accumulation of sin/cos sums for octaves 0..L.

    Consumes ``u`` exactly like :func:`_sample_chunk`.
    """
    m = tets.shape[0]
    total = cumulative[m - 1]
    sums = np.zeros((L + 1, 2, 3))
    for i in range(u.shape[0]):
        r = u[i, 0] * total
        k = 0
        while k < m - 1 and cumulative[k] <= r:
            k += 1
        s = u[i, 1]
        t = u[i, 2]
        w = u[i, 3]
        if s + t > 1.0:
            s = 1.0 - s
            t = 1.0 - t
        if t + w > 1.0:
            s, t, w = s, 1.0 - w, 1.0 - s - t
        elif s + t + w > 1.0:
            s, t, w = 1.0 - t - w, t, s + t + w - 1.0
        b0 = 1.0 - s - t - w
        for ax in range(3):
            x = b0 * tets[k, 0, ax] + s * tets[k, 1, ax] + t * tets[k, 2, ax] + w * tets[k, 3, ax]
            sn = np.sin(x)
            cs = np.cos(x)
            for l in range(L + 1):
                sums[l, 0, ax] += sn
                sums[l, 1, ax] += cs
                sn, cs = 2.0 * sn * cs, (cs - sn) * (cs + sn)
    return sums


def _chunks(n):
    full, rest = divmod(int(n), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def sample_uniform(td: TetDecomposition, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform points in the decomposed polyhedron, shape (n, 3).

    Deterministic in ``(seed, n)``; the first ``k * CHUNK`` points do not
    depend on ``n``.
    """
    if int(n) < 1:
        raise InvalidInputError("n must be at least 1")
    return np.concatenate([_sample_chunk(td, m, stream_rng(seed, i)) for i, m in enumerate(_chunks(n))])


def _encoding_sums(td, L, n, seed, stream):
    u = stream_rng(seed, stream).random((n, 4))
    return _feature_sums(td.tets, td.cumulative, u, L)


def _encoding_task(args):
    return _encoding_sums(*args)


def _run(fn, tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def mc_encoding(f: Frustum, L: int, n: int, seed: int, jobs: int = 1) -> OracleEstimate:
    """Monte-Carlo mean of the point features over a convex frustum.

    Standard errors come from the sample variance; ``sin(y)**2`` is obtained
    as ``(1 - cos(2y)) / 2`` from the next octave's cosine sums.
    """
    L = check_octaves(L)
    td = f if isinstance(f, TetDecomposition) else decompose(f)
    sizes = _chunks(n)
    tasks = [(td, L, m, seed, i) for i, m in enumerate(sizes)]
    parts = _run(_encoding_task, tasks, jobs)
    total = np.sum(np.stack(parts), axis=0) / float(n)
    mean_sin, mean_cos = total[:L, 0], total[:L, 1]
    cos2 = total[1 : L + 1, 1]
    sq_sin = 0.5 * (1.0 - cos2)
    sq_cos = 0.5 * (1.0 + cos2)
    corr = n / max(n - 1, 1)
    var_sin = np.maximum(sq_sin - mean_sin**2, 0.0) * corr
    var_cos = np.maximum(sq_cos - mean_cos**2, 0.0) * corr
    mean = join_blocks(mean_sin, mean_cos)
    se = np.sqrt(join_blocks(var_sin, var_cos) / n)
    return OracleEstimate(mean, se, int(n), int(seed))


def _perp_basis(d):
    d = d / np.linalg.norm(d)
    helper = np.eye(3)[np.argmin(np.abs(d))]
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def _moment_sums(d, o, r_dot, t0, t1, n, seed, stream):
    rng = stream_rng(seed, stream)
    t = t0 + (t1 - t0) * rng.random(n)
    rad = r_dot * t1 * np.sqrt(rng.random(n))
    ang = 2.0 * np.pi * rng.random(n)
    ok = rad <= r_dot * t
    e1, e2 = _perp_basis(d)
    t, rad, ang = t[ok], rad[ok], ang[ok]
    x = o + t[:, None] * d + (rad * np.cos(ang))[:, None] * e1 + (rad * np.sin(ang))[:, None] * e2
    return x, int(ok.sum())


def mc_moments(d, o, r_dot: float, t0: float, t1: float, n: int, seed: int) -> MomentEstimate:
    """Sample mean and covariance of uniform points in a cone frustum.

    ``n`` candidates are drawn uniformly in the enclosing cylinder slab
    (radius ``r_dot * t1``) and those outside the cone are rejected.
    Covariance standard errors use the sample fourth moments. Two passes over
    the same chunked streams keep memory bounded for large ``n``.
    """
    d = np.asarray(d, dtype=np.float64)
    o = np.asarray(o, dtype=np.float64)
    if int(n) < 2:
        raise InvalidInputError("n must be at least 2")
    sizes = _chunks(n)

    def chunks():
        for i, m in enumerate(sizes):
            yield _moment_sums(d, o, r_dot, t0, t1, m, seed, i)

    total = np.zeros(3)
    accepted = 0
    for x, k in chunks():
        total += x.sum(axis=0)
        accepted += k
    rate = accepted / float(n)
    if rate < 0.01:
        warnings.warn(f"cone rejection sampling accepted only {rate:.2%} of candidates", RuntimeWarning)
    if accepted < 2:
        raise InvalidInputError("fewer than 2 samples accepted")
    mean = total / accepted
    s2 = np.zeros((3, 3))
    s4 = np.zeros((3, 3))
    for x, _ in chunks():
        dev = x - mean
        prod = dev[:, :, None] * dev[:, None, :]
        s2 += prod.sum(axis=0)
        s4 += (prod**2).sum(axis=0)
    m = accepted
    cov = s2 / (m - 1)
    # variance of the per-sample products dev_i * dev_j
    prod_var = (s4 - s2**2 / m) / (m - 1)
    cov_se = np.sqrt(np.maximum(prod_var, 0.0) / m)
    mean_se = np.sqrt(np.diag(cov) / m)
    return MomentEstimate(mean, cov, mean_se, cov_se, m, rate)


def polyhedron_moments(f: Frustum) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean and covariance of the uniform distribution in ``f``."""
    td = decompose(f)
    w = td.volumes / td.total_volume
    s = td.tets.sum(axis=1)
    second = (np.einsum("tki,tkj->tij", td.tets, td.tets) + np.einsum("ti,tj->tij", s, s)) / 20.0
    mean = np.einsum("t,ti->i", w, s / 4.0)
    cov = np.einsum("t,tij->ij", w, second) - np.outer(mean, mean)
    return mean, 0.5 * (cov + cov.T)
