"""Budget-constrained roadside lidar/radar placement and evaluation.

The library splits into scene modeling, ray-cast visibility, exact budgeted
mount selection, coverage reporting, detection-box geometry with late
fusion, AP/mAP metrics, text file formats, and a seeded traffic simulator.
The ``crossview`` console script drives the same stages from files.
"""

from .boxes import CLASSES, SOURCES, DetectionBox, center_distance_bev, iou_3d
from .coverage import (
    ConfigComparison,
    CoverageReport,
    PairDelta,
    compare_configs,
    coverage_report,
)
from .formats import (
    MatrixFile,
    ParseError,
    SolutionFile,
    file_sha256,
    load_frame_pairs,
    load_frames,
    load_manifest,
    load_matrix,
    load_report,
    load_scene,
    load_solution,
    save_frames,
    save_manifest,
    save_matrix,
    save_report,
    save_scene,
    save_solution,
    scene_hash,
)
from .fusion import FusionConfig, fuse_late
from .lp_export import export_milp
from .metrics import (
    DEFAULT_CENTER_THRESHOLD,
    DEFAULT_IOU_THRESHOLDS,
    APResult,
    FramePair,
    MapResult,
    evaluate_ap,
    evaluate_map,
    pair_frames,
)
from .placement import (
    InstanceTooLargeError,
    PlacementProblem,
    PlacementSolution,
    Selection,
    evaluate_selection,
    solve_branch_bound,
    solve_exhaustive,
    solve_greedy,
)
from .scenario import (
    CLASS_SIZES,
    NoiseSpec,
    ScenarioConfig,
    ScenarioFrames,
    generate_scenario,
)
from .scene import (
    LIDAR,
    MODALITIES,
    RADAR,
    CandidateMount,
    GridSpec,
    Occluder,
    RegionOfInterest,
    Scene,
    SensorSpec,
    cell_center,
    validate_scene,
)
from .visibility import (
    VisibilityConfig,
    VisibilityMatrix,
    beam_elevations,
    build_visibility,
    cell_visibility,
    log_visibility,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSES",
    "CLASS_SIZES",
    "DEFAULT_CENTER_THRESHOLD",
    "DEFAULT_IOU_THRESHOLDS",
    "LIDAR",
    "MODALITIES",
    "RADAR",
    "SOURCES",
    "APResult",
    "CandidateMount",
    "ConfigComparison",
    "CoverageReport",
    "DetectionBox",
    "FramePair",
    "FusionConfig",
    "GridSpec",
    "InstanceTooLargeError",
    "MapResult",
    "MatrixFile",
    "NoiseSpec",
    "Occluder",
    "PairDelta",
    "ParseError",
    "PlacementProblem",
    "PlacementSolution",
    "RegionOfInterest",
    "Scene",
    "ScenarioConfig",
    "ScenarioFrames",
    "Selection",
    "SensorSpec",
    "SolutionFile",
    "VisibilityConfig",
    "VisibilityMatrix",
    "beam_elevations",
    "build_visibility",
    "cell_center",
    "cell_visibility",
    "center_distance_bev",
    "compare_configs",
    "coverage_report",
    "evaluate_ap",
    "evaluate_map",
    "evaluate_selection",
    "export_milp",
    "file_sha256",
    "fuse_late",
    "generate_scenario",
    "iou_3d",
    "load_frame_pairs",
    "load_frames",
    "load_manifest",
    "load_matrix",
    "load_report",
    "load_scene",
    "load_solution",
    "log_visibility",
    "pair_frames",
    "save_frames",
    "save_manifest",
    "save_matrix",
    "save_report",
    "save_scene",
    "save_solution",
    "scene_hash",
    "solve_branch_bound",
    "solve_exhaustive",
    "solve_greedy",
    "validate_scene",
]
