"""Line-oriented text records for poses and frustum vertices.

A pose record is 13 whitespace-separated numbers: R row-major (9), the
optical center (3) and the pixel width omega (1). A region record is 24
numbers: the eight vertices in frustum order, x y z each. Blank lines and
anything after ``#`` are ignored. Numbers are written with ``repr`` so every
float64 round-trips exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError
from .geometry import CameraPose, Frustum

__all__ = ["parse_records", "parse_poses", "parse_regions", "read_poses", "read_regions", "format_pose", "format_region", "format_number"]


def format_number(x: float) -> str:
    return repr(float(x))


def parse_records(text: str, width: int, what: str = "record") -> list[np.ndarray]:
    """Split ``text`` into records of exactly ``width`` floats, one per line."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.replace(",", " ").split()
        if len(fields) != width:
            raise FormatError(f"line {lineno}: {what} needs {width} numbers, got {len(fields)}")
        try:
            values = np.array([float(f) for f in fields])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        records.append(values)
    return records


def parse_poses(text: str) -> list[CameraPose]:
    return [CameraPose(r[:9].reshape(3, 3), r[9:12], r[12]) for r in parse_records(text, 13, "pose")]


def parse_regions(text: str) -> list[Frustum]:
    return [Frustum(r.reshape(8, 3)) for r in parse_records(text, 24, "region")]


def read_poses(path) -> list[CameraPose]:
    return parse_poses(Path(path).read_text(encoding="utf-8"))


def read_regions(path) -> list[Frustum]:
    return parse_regions(Path(path).read_text(encoding="utf-8"))


def format_pose(pose: CameraPose) -> str:
    values: Iterable[float] = [*pose.R.ravel(), *pose.o, pose.omega]
    return " ".join(format_number(v) for v in values)


def format_region(f: Frustum) -> str:
    return " ".join(format_number(v) for v in f.vertices.ravel())
