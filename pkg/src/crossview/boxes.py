"""Oriented 3D detection boxes and exact rotated-box IoU.

Boxes are axis-up cuboids: a BEV rectangle (length along the heading,
width across it, yaw about +z) extruded vertically around the center.
Intersection volume is therefore the clipped-footprint area times the
vertical overlap, which Sutherland-Hodgman clipping computes exactly for
convex rectangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

CLASSES = ("car", "truck", "motorcycle", "bus", "pedestrian", "golf_cart")
SOURCES = ("lidar", "radar", "fused", "ground_truth")

_TWO_PI = 2.0 * math.pi


def normalize_yaw(yaw: float) -> float:
    """Map any angle to (-pi, pi]."""
    y = yaw % _TWO_PI
    if y > math.pi:
        y -= _TWO_PI
    return y


@dataclass(frozen=True)
class DetectionBox:
    """One detection or ground-truth object.

    center: (x, y, z) of the box centroid in meters.
    size: (length, width, height), all positive; length runs along yaw.
    yaw: heading in radians, stored normalized to (-pi, pi].
    velocity: optional planar (vx, vy); radar keeps it, lidar has none.
    """

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float
    class_label: str
    score: float
    source: str
    velocity: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if len(self.center) != 3:
            raise ValueError("center must have exactly three components")
        if len(self.size) != 3:
            raise ValueError("size must have exactly three components")
        for v in (*self.center, *self.size, self.yaw, self.score):
            if not math.isfinite(v):
                raise ValueError("box fields must be finite numbers")
        if min(self.size) <= 0:
            raise ValueError("size components must be positive")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")
        if self.class_label not in CLASSES:
            raise ValueError(f"unknown class_label {self.class_label!r}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.velocity is not None:
            if len(self.velocity) != 2:
                raise ValueError("velocity must be planar (vx, vy)")
            if not all(math.isfinite(v) for v in self.velocity):
                raise ValueError("velocity components must be finite")
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))

    def sort_key(self) -> tuple:
        """Total deterministic order used for canonical tie-breaking."""
        return (self.center, self.size, self.yaw, self.class_label,
                self.score, self.source)


def footprint(box: DetectionBox) -> list[tuple[float, float]]:
    """BEV corner loop, counterclockwise."""
    cx, cy, _ = box.center
    hl = box.size[0] / 2.0
    hw = box.size[1] / 2.0
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    corners = []
    for lx, ly in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        corners.append((cx + lx * c - ly * s, cy + lx * s + ly * c))
    return corners


def _polygon_area(poly: list[tuple[float, float]]) -> float:
    if len(poly) < 3:
        return 0.0
    total = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        total += x1 * y2 - x2 * y1
    return abs(total) / 2.0


def _clip_polygon(
    subject: list[tuple[float, float]],
    clip: list[tuple[float, float]],
) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of subject by a convex CCW polygon.

    Points exactly on an edge count as inside, so clipping a polygon by
    itself returns it unchanged.
    """
    output = subject
    for i in range(len(clip)):
        if not output:
            return []
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % len(clip)]
        ex, ey = bx - ax, by - ay
        dots = [ex * (py - ay) - ey * (px - ax) for px, py in output]
        clipped: list[tuple[float, float]] = []
        for k in range(len(output)):
            k2 = (k + 1) % len(output)
            d1, d2 = dots[k], dots[k2]
            if d1 >= 0.0:
                clipped.append(output[k])
                if d2 < 0.0:
                    t = d1 / (d1 - d2)
                    p1, p2 = output[k], output[k2]
                    clipped.append((p1[0] + t * (p2[0] - p1[0]),
                                    p1[1] + t * (p2[1] - p1[1])))
            elif d2 >= 0.0:
                t = d1 / (d1 - d2)
                p1, p2 = output[k], output[k2]
                clipped.append((p1[0] + t * (p2[0] - p1[0]),
                                p1[1] + t * (p2[1] - p1[1])))
        output = clipped
    return output


def _volume(box: DetectionBox) -> float:
    # Area via the same shoelace path as the intersection, so identical
    # boxes produce an IoU of exactly 1.
    return _polygon_area(footprint(box)) * box.size[2]


def iou_3d(a: DetectionBox, b: DetectionBox) -> float:
    """Exact intersection-over-union of two oriented boxes; symmetric."""
    if b.sort_key() < a.sort_key():
        a, b = b, a
    lo = max(a.center[2] - a.size[2] / 2.0, b.center[2] - b.size[2] / 2.0)
    hi = min(a.center[2] + a.size[2] / 2.0, b.center[2] + b.size[2] / 2.0)
    dz = hi - lo
    if dz <= 0.0:
        return 0.0
    inter_bev = _polygon_area(_clip_polygon(footprint(a), footprint(b)))
    if inter_bev <= 0.0:
        return 0.0
    inter = inter_bev * dz
    union = _volume(a) + _volume(b) - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def center_distance_bev(a: DetectionBox, b: DetectionBox) -> float:
    """Planar distance between box centers, ignoring height."""
    return math.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
