"""Command-line front end.

Subcommands print CSV (UTF-8, ``\\n`` line endings, ``#`` comment lines
carrying the package version and a config echo):

``encode``          features of one region
``sweep``           exact-vs-Gaussian comparison along a depth or length grid
``underflow-scan``  out-of-range components over a set of regions
``oracle``          Monte-Carlo reference features of one region

Exit codes: 0 ok, 2 parse error, 3 domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    MODES,
    Grid,
    SweepConfig,
    near_degenerate_frusta,
    random_frusta,
    scan_underflow,
    sweep,
    sweep_csv,
)
from .baseline_encoding import (
    GaussianRegion,
    cone_moments,
    contract_gaussian,
    gaussian_ipe,
    pe,
    square_pyramid_eipe,
)
from .encoding import EncodingVector
from .errors import DomainError, ExactIPEError, FormatError
from .exact_encoding import eipe_frustum
from .geometry import CameraPose, box_frustum, contract_frustum, contract_point, frustum_from_pixel
from .io import format_number, read_poses, read_regions
from .oracle import mc_encoding, polyhedron_moments

ENCODERS = ("pe", "ipe", "eipe", "square_pyramid")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(2)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _triple(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(float(p) for p in parts)


def _int_list(text):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def _add_common(p, L_default=4):
    p.add_argument("--L", type=_positive_int, default=L_default, help="number of octaves")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (output does not depend on it)")
    p.add_argument("--output", "-o", help="write here instead of standard output")


def _add_region(p):
    g = p.add_argument_group("region (pick one; default is a pixel frustum)")
    g.add_argument("--cube", type=float, metavar="H", help="axis-aligned cube [-H, H]^3")
    g.add_argument("--region-file", help="file of 24-number vertex records")
    g.add_argument("--region-index", type=int, default=0)
    g.add_argument("--pose-file", help="file of 13-number pose records; the first pose is used")
    g.add_argument("--omega", type=float, default=0.01, help="pixel width for the built-in identity pose")
    g.add_argument("--dir", type=_triple, default=(0.0, 0.0, 1.0), help="pixel direction in camera frame, z = 1")
    g.add_argument("--t-near", type=float, default=1.0)
    g.add_argument("--t-far", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exact-ipe", description="Exact and Gaussian integrated positional encodings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="features of one region")
    _add_common(p)
    _add_region(p)
    p.add_argument("--encoder", choices=ENCODERS, default="eipe")
    p.add_argument("--contract", action="store_true", help="apply the scene contraction first")
    p.add_argument("--guard", choices=("on", "off"), default="on")

    p = sub.add_parser("sweep", help="exact vs Gaussian features along a grid")
    _add_common(p)
    p.add_argument("--mode", choices=MODES, default="mu_sweep")
    p.add_argument("--fixed", type=float, help="length (mu/small sweeps) or mid-depth (delta sweep)")
    p.add_argument("--min", dest="grid_min", type=float)
    p.add_argument("--max", dest="grid_max", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--L-list", type=_int_list, default=(1, 2, 3, 4, 5))
    p.add_argument("--pose-file")
    p.add_argument("--omega", type=float, default=0.01)
    p.add_argument("--dir", type=_triple, default=(0.0, 0.0, 1.0))

    p = sub.add_parser("underflow-scan", help="out-of-range components over a region set")
    _add_common(p, L_default=8)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--region-file")
    src.add_argument("--corpus", choices=("random", "degenerate"), default="random")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--contract", action="store_true")
    p.add_argument("--guard", choices=("on", "off"), default="on")

    p = sub.add_parser("oracle", help="Monte-Carlo reference features of one region")
    _add_common(p)
    _add_region(p)
    p.add_argument("--n", type=_positive_int, default=1_000_000, help="number of samples")
    return parser


def _pose(args) -> tuple[CameraPose, str]:
    if args.pose_file:
        poses = read_poses(args.pose_file)
        if not poses:
            raise FormatError(f"{args.pose_file}: no pose records")
        return poses[0], f"file:{Path(args.pose_file).name}"
    return CameraPose.identity(args.omega), "identity"


def _region(args):
    """Resolve the region flags to ``(frustum, pixel, echo)``; ``pixel`` is
    ``(pose, t_near, t_far)`` for pixel frusta and None otherwise."""
    if args.cube is not None:
        if not args.cube > 0.0:
            raise DomainError("cube half-width must be positive")
        h = args.cube
        return box_frustum([-h, -h, -h], [h, h, h]), None, f"cube={format_number(h)}"
    if args.region_file:
        regions = read_regions(args.region_file)
        if not 0 <= args.region_index < len(regions):
            raise DomainError(f"region index {args.region_index} out of range (file has {len(regions)})")
        return regions[args.region_index], None, f"region={Path(args.region_file).name}:{args.region_index}"
    pose, label = _pose(args)
    f = frustum_from_pixel(pose, args.dir, args.t_near, args.t_far)
    echo = (
        f"pose={label} omega={format_number(pose.omega)} dir={','.join(format_number(d) for d in args.dir)} "
        f"t={format_number(args.t_near)}:{format_number(args.t_far)}"
    )
    return f, (pose, args.t_near, args.t_far), echo


def _encode(args) -> str:
    f, pixel, echo = _region(args)
    L = args.L
    if args.encoder == "eipe":
        region = contract_frustum(f) if args.contract else f
        enc = eipe_frustum(region, L, guard=args.guard == "on")
    elif args.encoder == "square_pyramid":
        if pixel is None or tuple(args.dir) != (0.0, 0.0, 1.0):
            raise DomainError("square_pyramid needs the straight-ahead pixel frustum (--dir 0,0,1)")
        if args.contract:
            raise DomainError("square_pyramid has no contracted form")
        pose, t0, t1 = pixel
        enc = square_pyramid_eipe(pose, t0, t1, L)
    else:
        if pixel is not None:
            pose, t0, t1 = pixel
            d = pose.R @ np.asarray(args.dir, dtype=np.float64)
            g = cone_moments(d, pose.o, pose.omega, t0, t1)
        else:
            g = GaussianRegion(*polyhedron_moments(f))
        if args.encoder == "pe":
            mu = contract_point(g.mu) if args.contract else g.mu
            enc = pe(mu, L)
        else:
            enc = gaussian_ipe(contract_gaussian(g) if args.contract else g, L)
    lines = [
        f"# exact_ipe {__version__} encode schema=1",
        f"# encoder={args.encoder} L={L} contract={int(args.contract)} guard={args.guard} {echo}",
        "l,axis,func,value",
    ]
    lines += [f"{l},{axis},{func},{format_number(v)}" for l, axis, func, v in enc.rows()]
    return "\n".join(lines) + "\n"


def _sweep(args) -> str:
    defaults = SweepConfig(mode=args.mode)
    g = defaults.grid
    grid = Grid(
        g.lo if args.grid_min is None else args.grid_min,
        g.hi if args.grid_max is None else args.grid_max,
        g.count if args.count is None else args.count,
        g.spacing if args.spacing is None else args.spacing,
    )
    pose, label = _pose(args)
    cfg = SweepConfig(
        mode=args.mode,
        fixed=args.fixed,
        grid=grid,
        L_list=args.L_list,
        pose=pose,
        dir_cam=tuple(args.dir),
        seed=args.seed,
        pose_label=label,
    )
    return sweep_csv(sweep(cfg, jobs=args.jobs), cfg)


def _scan(args) -> tuple[str, int]:
    if args.region_file:
        verts = np.array([f.vertices for f in read_regions(args.region_file)]).reshape(-1, 8, 3)
        source = f"file:{Path(args.region_file).name}"
    elif args.corpus == "degenerate":
        verts = near_degenerate_frusta(args.count, args.seed)
        source = f"degenerate:{args.count}:{args.seed}"
    else:
        verts = random_frusta(args.count, args.seed).vertices
        source = f"random:{args.count}:{args.seed}"
    if args.contract and len(verts):
        verts = contract_point(verts)
    report = scan_underflow(verts, args.L, guard=args.guard == "on")
    text = report.csv(f"source={source} contract={int(args.contract)}")
    status = 3 if report.guard and report.n_violations else 0
    return text, status


def _oracle(args) -> str:
    f, _, echo = _region(args)
    est = mc_encoding(f, args.L, args.n, args.seed, jobs=args.jobs)
    mean = EncodingVector(est.mean, args.L)
    se = EncodingVector(est.std_error, args.L)
    lines = [
        f"# exact_ipe {__version__} oracle schema=1",
        f"# L={args.L} n={args.n} seed={args.seed} {echo}",
        "l,axis,func,mean,std_error",
    ]
    for (l, axis, func, m), (*_, s) in zip(mean.rows(), se.rows()):
        lines.append(f"{l},{axis},{func},{format_number(m)},{format_number(s)}")
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    status = 0
    try:
        if args.command == "encode":
            text = _encode(args)
        elif args.command == "sweep":
            text = _sweep(args)
        elif args.command == "underflow-scan":
            text, status = _scan(args)
        else:
            text = _oracle(args)
        _emit(text, args.output)
    except FormatError as exc:
        print(f"exact-ipe: parse error: {exc}", file=sys.stderr)
        return 2
    except ExactIPEError as exc:
        print(f"exact-ipe: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"exact-ipe: I/O error: {exc}", file=sys.stderr)
        return 4
    if status:
        print("exact-ipe: guard enabled but out-of-range components were found", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
