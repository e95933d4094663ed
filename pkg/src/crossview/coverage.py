"""Central-coverage summaries and side-by-side configuration comparisons.

Coverage here is the blunt deployment metric: the fraction of ROI cells
with any nonzero (above-theta) visibility from at least one selected mount
of either modality.  It intentionally ignores the seen threshold used by
the optimizer so thinly covered cells still count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .placement import PlacementProblem, Selection
from .scene import LIDAR, RADAR


@dataclass(frozen=True)
class CoverageReport:
    config_name: str
    central_coverage: float
    covered_cells: int
    total_roi_cells: int
    total_cost: float
    per_modality_cost: dict[str, float] = field(default_factory=dict)
    per_modality_covered: dict[str, int] = field(default_factory=dict)
    theta: float = 0.0

    def to_record(self) -> dict:
        return {
            "config_name": self.config_name,
            "central_coverage": self.central_coverage,
            "covered_cells": self.covered_cells,
            "total_roi_cells": self.total_roi_cells,
            "total_cost": self.total_cost,
            "per_modality_cost": dict(self.per_modality_cost),
            "per_modality_covered": dict(self.per_modality_covered),
            "theta": self.theta,
        }


def _modality_covered(matrix: np.ndarray, ids: frozenset[int], theta: float) -> np.ndarray:
    if not ids:
        return np.zeros(matrix.shape[1], dtype=bool)
    return matrix[sorted(ids)].max(axis=0) > theta


def coverage_report(
    problem: PlacementProblem,
    selection: Selection,
    config_name: str = "config",
    theta: float = 0.0,
) -> CoverageReport:
    """Fraction of ROI cells visible above theta from any selected mount."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    lidar_cov = _modality_covered(problem.lidar_vis, selection.lidar_ids, theta)
    radar_cov = _modality_covered(problem.radar_vis, selection.radar_ids, theta)
    either = lidar_cov | radar_cov
    total = problem.n_cells
    if problem.budget_mode == "cost":
        assert problem.lidar_costs is not None and problem.radar_costs is not None
        lidar_cost = float(sum(problem.lidar_costs[i] for i in sorted(selection.lidar_ids)))
        radar_cost = float(sum(problem.radar_costs[i] for i in sorted(selection.radar_ids)))
    else:
        lidar_cost = float(len(selection.lidar_ids))
        radar_cost = float(len(selection.radar_ids))
    return CoverageReport(
        config_name=config_name,
        central_coverage=float(either.sum()) / total if total else 0.0,
        covered_cells=int(either.sum()),
        total_roi_cells=total,
        total_cost=lidar_cost + radar_cost,
        per_modality_cost={LIDAR: lidar_cost, RADAR: radar_cost},
        per_modality_covered={LIDAR: int(lidar_cov.sum()), RADAR: int(radar_cov.sum())},
        theta=theta,
    )


@dataclass(frozen=True)
class PairDelta:
    """Coverage and cost movement from a base config to another."""

    base: str
    other: str
    coverage_delta: float
    cost_reduction_pct: float | None

    def to_record(self) -> dict:
        return {
            "base": self.base,
            "other": self.other,
            "coverage_delta": self.coverage_delta,
            "cost_reduction_pct": self.cost_reduction_pct,
        }


@dataclass(frozen=True)
class ConfigComparison:
    reports: tuple[CoverageReport, ...]
    pairs: tuple[PairDelta, ...]

    def to_record(self) -> dict:
        return {
            "reports": [r.to_record() for r in self.reports],
            "pairs": [p.to_record() for p in self.pairs],
        }

    def to_text(self) -> str:
        lines = []
        header = f"{'config':<20} {'coverage':>9} {'cells':>12} {'cost':>10}"
        lines.append(header)
        lines.append("-" * len(header))
        for r in self.reports:
            cells = f"{r.covered_cells}/{r.total_roi_cells}"
            lines.append(
                f"{r.config_name:<20} {r.central_coverage:>8.1%} {cells:>12}"
                f" {r.total_cost:>10.2f}"
            )
        lines.append("")
        for p in self.pairs:
            if p.cost_reduction_pct is None:
                cost_part = "cost reduction undefined (base cost is 0)"
            else:
                cost_part = f"cost reduction {p.cost_reduction_pct:.1f}%"
            lines.append(
                f"{p.base} -> {p.other}: coverage {p.coverage_delta:+.1%}, {cost_part}"
            )
        return "\n".join(lines) + "\n"


def compare_configs(reports: list[CoverageReport]) -> ConfigComparison:
    """Pairwise deltas for every ordered pair (i earlier than j in input)."""
    if len(reports) < 2:
        raise ValueError("comparison needs at least two coverage reports")
    pairs = []
    for a in range(len(reports)):
        for b in range(a + 1, len(reports)):
            base, other = reports[a], reports[b]
            if base.total_cost > 0:
                reduction = (base.total_cost - other.total_cost) / base.total_cost * 100.0
            else:
                reduction = None
            pairs.append(
                PairDelta(
                    base=base.config_name,
                    other=other.config_name,
                    coverage_delta=other.central_coverage - base.central_coverage,
                    cost_reduction_pct=reduction,
                )
            )
    return ConfigComparison(reports=tuple(reports), pairs=tuple(pairs))
