"""Scene model and validation checks."""

from __future__ import annotations

import pytest

from crossview import (
    CandidateMount,
    GridSpec,
    Occluder,
    RegionOfInterest,
    Scene,
    SensorSpec,
    cell_center,
    validate_scene,
)

from conftest import WIDE_LIDAR, WIDE_RADAR, square_scene


def test_cell_center_row_major():
    grid = GridSpec(origin_xy=(10.0, 20.0), cell_size=4.0, nx=3, ny=2)
    assert cell_center(grid, 0) == (12.0, 22.0, 0.0)
    assert cell_center(grid, 2) == (20.0, 22.0, 0.0)
    # Index 3 wraps to the second row.
    assert cell_center(grid, 3) == (12.0, 26.0, 0.0)
    assert cell_center(grid, 5) == (20.0, 26.0, 0.0)


def test_cell_center_out_of_range():
    grid = GridSpec(origin_xy=(0.0, 0.0), cell_size=1.0, nx=3, ny=2)
    with pytest.raises(IndexError):
        cell_center(grid, 6)
    with pytest.raises(IndexError):
        cell_center(grid, -1)


def test_grid_n_cells():
    assert GridSpec(origin_xy=(0.0, 0.0), cell_size=1.0, nx=7, ny=5).n_cells == 35


def test_valid_scene_has_no_violations():
    assert validate_scene(square_scene()) == []


def test_roi_weight_defaults_to_one():
    roi = RegionOfInterest(cells=frozenset({1, 2}), weights={2: 3.0})
    assert roi.weight_of(1) == 1.0
    assert roi.weight_of(2) == 3.0


def test_roi_cell_outside_grid_reported():
    scene = square_scene()
    bad = Scene(
        grid=scene.grid,
        roi=RegionOfInterest(cells=frozenset({0, scene.grid.n_cells}), weights={}),
        occluders=(),
        lidar_candidates=scene.lidar_candidates,
        radar_candidates=scene.radar_candidates,
    )
    violations = validate_scene(bad)
    assert any("out of grid bounds" in v for v in violations)


def test_duplicate_candidate_ids_reported():
    scene = square_scene()
    dup = scene.lidar_candidates[0]
    clone = CandidateMount(dup.id, (3.0, 3.0, 5.0), dup.spec)
    bad = Scene(
        grid=scene.grid,
        roi=scene.roi,
        occluders=(),
        lidar_candidates=scene.lidar_candidates + (clone,),
        radar_candidates=scene.radar_candidates,
    )
    assert any("duplicate id" in v for v in validate_scene(bad))


def test_candidate_on_ground_reported():
    scene = square_scene()
    grounded = CandidateMount("L9", (5.0, 5.0, 0.0), WIDE_LIDAR)
    bad = Scene(
        grid=scene.grid,
        roi=scene.roi,
        occluders=(),
        lidar_candidates=scene.lidar_candidates + (grounded,),
        radar_candidates=scene.radar_candidates,
    )
    assert any("position.z must be > 0" in v for v in validate_scene(bad))


def test_spec_violations_reported():
    scene = square_scene()
    checks = [
        (SensorSpec("lidar", 360.0, 45.0, 90.0, 20.0, beams=1), "beams"),
        (SensorSpec("lidar", 400.0, 45.0, 90.0, 20.0, beams=16), "hfov"),
        (SensorSpec("lidar", 360.0, 185.0, 90.0, 20.0, beams=16), "vfov"),
        (SensorSpec("lidar", 360.0, 45.0, -1.0, 20.0, beams=16), "max_range"),
        (SensorSpec("lidar", 360.0, 45.0, 90.0, 0.0, beams=16), "rate"),
        (SensorSpec("lidar", 360.0, 45.0, 90.0, 20.0, unit_cost=-5.0, beams=16), "cost"),
    ]
    for spec, needle in checks:
        bad = Scene(
            grid=scene.grid,
            roi=scene.roi,
            occluders=(),
            lidar_candidates=(CandidateMount("LX", (5.0, 5.0, 5.0), spec),),
            radar_candidates=scene.radar_candidates,
        )
        violations = validate_scene(bad)
        assert any(needle in v for v in violations), (needle, violations)


def test_radar_with_beams_reported():
    scene = square_scene()
    spec = SensorSpec("radar", 120.0, 28.0, 90.0, 20.0, beams=16)
    bad = Scene(
        grid=scene.grid,
        roi=scene.roi,
        occluders=(),
        lidar_candidates=scene.lidar_candidates,
        radar_candidates=(CandidateMount("RX", (5.0, 5.0, 3.0), spec),),
    )
    assert any("beams" in v for v in validate_scene(bad))


def test_modality_mismatch_reported():
    scene = square_scene()
    bad = Scene(
        grid=scene.grid,
        roi=scene.roi,
        occluders=(),
        lidar_candidates=(CandidateMount("LX", (5.0, 5.0, 5.0), WIDE_RADAR),),
        radar_candidates=scene.radar_candidates,
    )
    assert any("modality" in v for v in validate_scene(bad))


def test_occluder_corner_order_reported():
    scene = square_scene()
    bad = Scene(
        grid=scene.grid,
        roi=scene.roi,
        occluders=(Occluder((5.0, 5.0, 2.0), (4.0, 6.0, 3.0)),),
        lidar_candidates=scene.lidar_candidates,
        radar_candidates=scene.radar_candidates,
    )
    assert any("corner" in v for v in validate_scene(bad))
