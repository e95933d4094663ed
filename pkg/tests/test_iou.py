"""Oriented-box geometry: construction rules and exact IoU."""

from __future__ import annotations

import math

import numpy as np
import pytest

from crossview import DetectionBox, center_distance_bev, iou_3d

from conftest import random_box
from oracles import mc_iou_3d


def box(center=(0.0, 0.0, 1.0), size=(4.0, 2.0, 2.0), yaw=0.0,
        class_label="car", score=0.9, source="lidar", velocity=None):
    return DetectionBox(center=center, size=size, yaw=yaw,
                        class_label=class_label, score=score,
                        source=source, velocity=velocity)


def test_identical_boxes_have_iou_exactly_one():
    a = box(yaw=0.7)
    assert iou_3d(a, a) == 1.0
    b = box(yaw=0.7)
    assert iou_3d(a, b) == 1.0


def test_disjoint_boxes_have_iou_zero():
    assert iou_3d(box(), box(center=(100.0, 0.0, 1.0))) == 0.0


def test_vertical_separation_kills_overlap():
    a = box(center=(0.0, 0.0, 1.0), size=(4.0, 2.0, 2.0))
    b = box(center=(0.0, 0.0, 5.0), size=(4.0, 2.0, 2.0))
    assert iou_3d(a, b) == 0.0
    # Touching faces share zero volume.
    c = box(center=(0.0, 0.0, 3.0), size=(4.0, 2.0, 2.0))
    assert iou_3d(a, c) == 0.0


def test_axis_aligned_partial_overlap():
    # 2x2x2 cubes offset by 1 m in x: intersection 1*2*2 = 4,
    # union 8 + 8 - 4 = 12, IoU = 1/3.
    a = box(size=(2.0, 2.0, 2.0))
    b = box(center=(1.0, 0.0, 1.0), size=(2.0, 2.0, 2.0))
    assert iou_3d(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_quarter_turn_of_square_is_identity():
    a = box(size=(2.0, 2.0, 2.0))
    b = box(size=(2.0, 2.0, 2.0), yaw=math.pi / 2.0)
    assert iou_3d(a, b) == pytest.approx(1.0, abs=1e-12)


def test_square_rotated_45_degrees():
    # A square rotated 45 degrees about its center overlaps the original
    # in a regular octagon of area 2*(sqrt(2)-1)*s^2.
    s = 2.0
    a = box(size=(s, s, 2.0))
    b = box(size=(s, s, 2.0), yaw=math.pi / 4.0)
    octagon = 2.0 * (math.sqrt(2.0) - 1.0) * s * s
    expected = octagon / (2.0 * s * s - octagon)
    assert iou_3d(a, b) == pytest.approx(expected, abs=1e-12)


def test_contained_box():
    outer = box(size=(4.0, 4.0, 4.0), center=(0.0, 0.0, 2.0))
    inner = box(size=(2.0, 2.0, 2.0), center=(0.0, 0.0, 2.0), yaw=0.3)
    assert iou_3d(outer, inner) == pytest.approx(8.0 / 64.0, abs=1e-12)


def test_iou_symmetry_is_bitwise():
    rng = np.random.default_rng(9)
    for _ in range(200):
        a = random_box(rng, spread=3.0)
        b = random_box(rng, spread=3.0)
        assert iou_3d(a, b) == iou_3d(b, a)


def test_iou_stays_in_unit_interval():
    rng = np.random.default_rng(10)
    for _ in range(300):
        a = random_box(rng, spread=4.0)
        b = random_box(rng, spread=4.0)
        v = iou_3d(a, b)
        assert 0.0 <= v <= 1.0


def test_iou_matches_monte_carlo():
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 8:
        a = random_box(rng, spread=2.0)
        b = random_box(rng, spread=2.0)
        exact = iou_3d(a, b)
        if exact < 0.05:
            continue
        approx = mc_iou_3d(a, b, n_samples=200_000, seed=checked)
        assert exact == pytest.approx(approx, abs=0.02)
        checked += 1


def test_center_distance_is_planar():
    a = box(center=(0.0, 0.0, 0.0))
    b = box(center=(3.0, 4.0, 50.0))
    assert center_distance_bev(a, b) == 5.0


def test_yaw_normalization():
    assert box(yaw=3.0 * math.pi).yaw == pytest.approx(math.pi, abs=0.0)
    assert box(yaw=-math.pi).yaw == pytest.approx(math.pi, abs=0.0)
    assert box(yaw=2.0 * math.pi).yaw == pytest.approx(0.0, abs=1e-15)
    assert -math.pi < box(yaw=-0.5).yaw <= math.pi


def test_box_validation():
    with pytest.raises(ValueError):
        box(size=(0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        box(score=1.5)
    with pytest.raises(ValueError):
        box(score=-0.1)
    with pytest.raises(ValueError):
        box(class_label="boat")
    with pytest.raises(ValueError):
        box(source="camera")
    with pytest.raises(ValueError):
        box(center=(math.nan, 0.0, 0.0))
    with pytest.raises(ValueError):
        box(velocity=(1.0,))
    with pytest.raises(ValueError):
        box(velocity=(math.inf, 0.0))


def test_rotation_preserves_iou_structure():
    # Rotating both boxes and their offset by the same angle must not
    # change the overlap (the clip is purely relative geometry).
    rng = np.random.default_rng(77)
    for _ in range(50):
        a = random_box(rng, spread=2.0)
        b = random_box(rng, spread=2.0)
        base = iou_3d(a, b)
        theta = float(rng.uniform(0, 2 * math.pi))
        c, s = math.cos(theta), math.sin(theta)

        def rotated(x):
            px, py, pz = x.center
            return DetectionBox(
                center=(px * c - py * s, px * s + py * c, pz),
                size=x.size,
                yaw=x.yaw + theta,
                class_label=x.class_label,
                score=x.score,
                source=x.source,
                velocity=x.velocity,
            )

        assert iou_3d(rotated(a), rotated(b)) == pytest.approx(base, abs=1e-9)
