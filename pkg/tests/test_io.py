import numpy as np
import pytest

from exact_ipe.errors import FormatError
from exact_ipe.geometry import CameraPose, frustum_from_pixel, rotation_matrix
from exact_ipe.io import format_pose, format_region, parse_poses, parse_regions, read_regions


def test_pose_round_trip():
    pose = CameraPose(rotation_matrix([1, 2, 3], 0.7), [0.1, -1 / 3, 2.5], 0.013)
    (back,) = parse_poses(format_pose(pose) + "\n")
    assert np.array_equal(back.R, pose.R) and np.array_equal(back.o, pose.o) and back.omega == pose.omega


def test_region_round_trip(tmp_path):
    f = frustum_from_pixel(CameraPose.identity(0.1), [0.3, 0.1, 1.0], 1 / 3, 2.0)
    path = tmp_path / "regions.txt"
    path.write_text("# two regions\n" + format_region(f) + "\n\n" + format_region(f) + "  # again\n")
    regions = read_regions(path)
    assert len(regions) == 2 and np.array_equal(regions[1].vertices, f.vertices)


def test_commas_and_blank_file():
    assert parse_regions("") == []
    assert len(parse_regions(",".join(["0"] * 24))) == 1


@pytest.mark.parametrize("text", ["1 2 3", " ".join(["x"] * 24)])
def test_bad_records(text):
    with pytest.raises(FormatError):
        parse_regions(text)
