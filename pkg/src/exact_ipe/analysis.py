"""Exact-vs-Gaussian comparison sweeps, random frustum corpora and the
underflow scan.

Work is split into fixed-size blocks before it is handed to worker
processes, so results are bit-identical for any number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .baseline_encoding import cone_moments, gaussian_ipe_batch
from .encoding import AXES, split_blocks
from .errors import DomainError
from .exact_encoding import BOUND_SLACK, _eipe_raw, eipe_batch
from .geometry import CameraPose, contract_point, frustum_from_pixel, triangle_arrays
from .io import format_number

__all__ = [
    "MODES",
    "Grid",
    "SweepConfig",
    "SweepRow",
    "SWEEP_HEADER",
    "DEFAULT_POSE",
    "sweep",
    "sweep_csv",
    "mean_abs_error",
    "random_rotations",
    "random_frusta",
    "near_degenerate_frusta",
    "ScanReport",
    "scan_underflow",
]

MODES = ("mu_sweep", "delta_sweep", "small_frustum")
BLOCK = 8
FLAG_TOL = 1e-6

DEFAULT_POSE = CameraPose.identity(0.01)
SWEEP_HEADER = "mu_t,delta_i,l,axis,eipe_sin,eipe_cos,ipe_sin,ipe_cos,abs_err_sin,abs_err_cos,underflow_flag"


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise DomainError("grid needs at least 2 points")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise DomainError("grid needs finite hi > lo")
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.lo <= 0.0:
            raise DomainError("log spacing needs a positive lower bound")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


_DEFAULTS = {
    "mu_sweep": (0.02, Grid(0.5, 6.0, 100)),
    "delta_sweep": (3.0, Grid(0.01, 2.0, 100)),
    "small_frustum": (5e-4, Grid(0.01, 0.5, 100)),
}


@dataclass(frozen=True)
class SweepConfig:
    """One comparison sweep.

    ``fixed`` is the frustum length for ``mu_sweep`` and ``small_frustum``
    (the grid then runs over the mid-depth ``mu_t``) and the mid-depth for
    ``delta_sweep`` (the grid runs over the length). ``L_list`` holds
    encoding sizes; an entry ``L`` is reported at its top octave
    ``l = L - 1``.
    """

    mode: str = "mu_sweep"
    fixed: float | None = None
    grid: Grid | None = None
    L_list: tuple[int, ...] = (1, 2, 3, 4, 5)
    pose: CameraPose = DEFAULT_POSE
    dir_cam: tuple[float, float, float] = (0.0, 0.0, 1.0)
    seed: int = 0
    pose_label: str = field(default="identity", compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown sweep mode {self.mode!r}")
        fixed, grid = _DEFAULTS[self.mode]
        if self.fixed is None:
            object.__setattr__(self, "fixed", fixed)
        if self.grid is None:
            object.__setattr__(self, "grid", grid)
        if not np.isfinite(self.fixed) or self.fixed <= 0.0:
            raise DomainError("fixed sweep parameter must be positive")
        if not self.L_list or any(int(L) != L or L < 1 for L in self.L_list):
            raise DomainError("L_list needs positive integers")
        object.__setattr__(self, "L_list", tuple(sorted({int(L) for L in self.L_list})))

    def depths(self) -> tuple[np.ndarray, np.ndarray]:
        """Mid-depth and length of every frustum in the sweep."""
        g = self.grid.values()
        fixed = np.full_like(g, self.fixed)
        return (fixed, g) if self.mode == "delta_sweep" else (g, fixed)

    def echo(self) -> str:
        g = self.grid
        return (
            f"mode={self.mode} fixed={format_number(self.fixed)} "
            f"grid={format_number(g.lo)}:{format_number(g.hi)}:{g.count}:{g.spacing} "
            f"L={','.join(map(str, self.L_list))} seed={self.seed} pose={self.pose_label} "
            f"omega={format_number(self.pose.omega)} dir={','.join(format_number(d) for d in self.dir_cam)}"
        )


@dataclass(frozen=True)
class SweepRow:
    mu_t: float
    delta_i: float
    l: int
    axis: str
    eipe_sin: float
    eipe_cos: float
    ipe_sin: float
    ipe_cos: float
    abs_err_sin: float
    abs_err_cos: float
    underflow_flag: int

    def csv(self) -> str:
        nums = (self.eipe_sin, self.eipe_cos, self.ipe_sin, self.ipe_cos, self.abs_err_sin, self.abs_err_cos)
        return ",".join(
            [format_number(self.mu_t), format_number(self.delta_i), str(self.l), self.axis]
            + [format_number(v) for v in nums]
            + [str(self.underflow_flag)]
        )


def _sweep_block(cfg: SweepConfig, mu_t: np.ndarray, delta: np.ndarray) -> list[SweepRow]:
    L = max(cfg.L_list)
    t0 = mu_t - 0.5 * delta
    t1 = mu_t + 0.5 * delta
    if np.any(t0 <= 0.0):
        raise DomainError("frustum would start behind the camera (mu_t - delta/2 <= 0)")
    verts = np.stack([frustum_from_pixel(cfg.pose, cfg.dir_cam, a, b).vertices for a, b in zip(t0, t1)])
    exact = eipe_batch(verts, L)
    literal = eipe_batch(verts, L, guard=False)
    d_world = cfg.pose.R @ np.asarray(cfg.dir_cam, dtype=np.float64)
    gauss = [cone_moments(d_world, cfg.pose.o, cfg.pose.omega, a, b) for a, b in zip(t0, t1)]
    ipe = gaussian_ipe_batch(np.stack([g.mu for g in gauss]), np.stack([np.diag(g.Sigma) for g in gauss]), L)

    e_sin, e_cos = split_blocks(exact, L)
    g_sin, g_cos = split_blocks(ipe, L)
    r_sin, r_cos = split_blocks(literal, L)
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(r_sin - e_sin) <= FLAG_TOL) | ~(np.abs(r_cos - e_cos) <= FLAG_TOL)
    rows = []
    for i in range(len(mu_t)):
        for Lq in cfg.L_list:
            l = Lq - 1
            for k, name in enumerate(AXES):
                es, ec = float(e_sin[i, l, k]), float(e_cos[i, l, k])
                gs, gc = float(g_sin[i, l, k]), float(g_cos[i, l, k])
                rows.append(
                    SweepRow(
                        float(mu_t[i]), float(delta[i]), l, name,
                        es, ec, gs, gc, abs(es - gs), abs(ec - gc), int(bad[i, l, k]),
                    )
                )
    return rows


def _block_task(args):
    return _sweep_block(*args)


def sweep(cfg: SweepConfig, jobs: int = 1) -> list[SweepRow]:
    """Exact and Gaussian features along the configured grid.

    Rows come out sorted by grid value, then octave, then axis.
    """
    mu_t, delta = cfg.depths()
    tasks = [(cfg, mu_t[i : i + BLOCK], delta[i : i + BLOCK]) for i in range(0, len(mu_t), BLOCK)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_block_task, tasks))
    else:
        blocks = [_block_task(t) for t in tasks]
    return [row for block in blocks for row in block]


def sweep_csv(rows: list[SweepRow], cfg: SweepConfig) -> str:
    lines = [f"# exact_ipe {__version__} sweep schema=1", f"# {cfg.echo()}", SWEEP_HEADER]
    lines += [r.csv() for r in rows]
    return "\n".join(lines) + "\n"


def mean_abs_error(rows, l: int | None = None) -> dict[float, float]:
    """Mean of both abs_err columns per grid value, optionally for one octave."""
    acc: dict[float, list[float]] = {}
    for r in rows:
        if l is not None and r.l != l:
            continue
        key = r.mu_t if len({x.delta_i for x in rows}) == 1 else r.delta_i
        acc.setdefault(key, []).extend([r.abs_err_sin, r.abs_err_cos])
    return {k: float(np.mean(v)) for k, v in acc.items()}


def random_rotations(count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation matrices from random unit quaternions."""
    q = rng.normal(size=(count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    R = np.empty((count, 3, 3))
    R[:, 0] = np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], axis=1)
    R[:, 1] = np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], axis=1)
    R[:, 2] = np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], axis=1)
    return R


@dataclass(frozen=True)
class FrustumCorpus:
    vertices: np.ndarray
    poses: list
    dirs: np.ndarray
    mu_t: np.ndarray
    delta: np.ndarray


def random_frusta(
    count: int,
    seed: int,
    mu_range=(0.5, 8.0),
    delta_range=(1e-3, 2.0),
    omega_range=(1e-3, 0.2),
) -> FrustumCorpus:
    """Random pixel frusta: uniform mid-depth, log-uniform length and pixel
    width, random rotation, center in [-1, 1]^3 and pixel direction within
    +-0.5 of the optical axis. Lengths are capped at 1.9 * mid-depth so the
    frustum stays in front of the camera."""
    rng = np.random.default_rng(seed)
    Rs = random_rotations(count, rng)
    origins = rng.uniform(-1.0, 1.0, size=(count, 3))
    omega = np.exp(rng.uniform(*np.log(omega_range), size=count))
    mu_t = rng.uniform(*mu_range, size=count)
    delta = np.exp(rng.uniform(*np.log(delta_range), size=count))
    delta = np.minimum(delta, 1.9 * mu_t)
    dirs = np.column_stack([rng.uniform(-0.5, 0.5, size=(count, 2)), np.ones(count)])
    poses, verts = [], []
    for i in range(count):
        pose = CameraPose(Rs[i], origins[i], omega[i])
        poses.append(pose)
        verts.append(frustum_from_pixel(pose, dirs[i], mu_t[i] - delta[i] / 2, mu_t[i] + delta[i] / 2).vertices)
    return FrustumCorpus(np.stack(verts), poses, dirs, mu_t, delta)


def near_degenerate_frusta(count: int, seed: int, noise: float = 1e-8) -> np.ndarray:
    """Contracted axis-aligned frusta with coordinate jitter of size ``noise``.

    Axis-aligned faces put exactly equal coordinates on many triangles;
    after contraction and jitter those become differences of about
    ``noise``, far below the 1e-6 guard threshold.
    """
    rng = np.random.default_rng(seed)
    pose = CameraPose.identity(0.01)
    out = []
    for _ in range(count):
        mu = rng.uniform(1.5, 40.0)
        delta = rng.uniform(0.01, 1.0)
        f = frustum_from_pixel(pose, [0.0, 0.0, 1.0], mu - delta / 2, mu + delta / 2)
        v = contract_point(f.vertices)
        out.append(v + noise * rng.standard_normal(v.shape))
    return np.stack(out)


@dataclass
class ScanReport:
    """Components outside [-1, 1] (by more than the 1e-9 slack) per region."""

    guard: bool
    L: int
    n_regions: int
    violations: list = field(default_factory=list)
    guard_activations: int = 0

    @property
    def n_violations(self) -> int:
        return len(self.violations)

    def csv(self, echo: str = "") -> str:
        head = f"# guard={'on' if self.guard else 'off'} L={self.L} regions={self.n_regions}"
        lines = [
            f"# exact_ipe {__version__} underflow-scan schema=1",
            f"{head} {echo}".rstrip(),
            "region,l,axis,func,value",
        ]
        for region, l, axis, func, value in self.violations:
            lines.append(f"{region},{l},{axis},{func},{format_number(value)}")
        lines.append(f"# violations={self.n_violations}")
        lines.append(f"# guard_activations={self.guard_activations}")
        return "\n".join(lines) + "\n"


def scan_underflow(vertices, L: int, guard: bool = True) -> ScanReport:
    """Evaluate the exact encoding of every region and list out-of-range
    components (non-finite values count as out of range)."""
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 8, 3)
    report = ScanReport(guard=guard, L=L, n_regions=len(vertices))
    if len(vertices) == 0:
        return report
    P, N = triangle_arrays(vertices)
    res = _eipe_raw(P, N, L, guard)
    report.guard_activations = int(np.sum(res.guard_activations))
    sin_f, cos_f = split_blocks(res.values, L)
    for func, block in (("sin", sin_f), ("cos", cos_f)):
        with np.errstate(invalid="ignore"):
            bad = ~(np.abs(block) <= 1.0 + BOUND_SLACK)
        for region, l, k in zip(*np.nonzero(bad)):
            report.violations.append((int(region), int(l), AXES[k], func, float(block[region, l, k])))
    report.violations.sort()
    return report


def with_pose(cfg: SweepConfig, pose: CameraPose, label: str) -> SweepConfig:
    return replace(cfg, pose=pose, pose_label=label)
