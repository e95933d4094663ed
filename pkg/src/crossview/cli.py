"""Command line front end.

Subcommands mirror the library stages: visibility, optimize, export-milp,
coverage, compare, simulate, fuse, evaluate, and an end-to-end pipeline.
Options come from flags first, then an optional --config JSON file, then
built-in defaults.

Every command that writes files also writes a ``<first-output>.manifest``
sidecar recording the command, input digests, effective config and wall
time; data files reference the manifest by name.  Exit codes: 0 success,
2 usage, 3 unreadable or malformed input file, 4 invalid values or scene,
5 instance too large for the requested solver, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .boxes import CLASSES
from .coverage import CoverageReport, compare_configs, coverage_report
from .formats import (
    MatrixFile,
    ParseError,
    SolutionFile,
    file_sha256,
    load_frame_pairs,
    load_frames,
    load_matrix,
    load_report,
    load_scene,
    load_solution,
    save_frames,
    save_manifest,
    save_matrix,
    save_report,
    save_solution,
    scene_hash,
)
from .fusion import FusionConfig, fuse_late
from .lp_export import export_milp
from .metrics import MATCHING_MODES, evaluate_map, pair_frames
from .placement import (
    InstanceTooLargeError,
    PlacementProblem,
    Selection,
    solve_branch_bound,
    solve_exhaustive,
    solve_greedy,
)
from .scenario import NoiseSpec, ScenarioConfig, generate_scenario
from .scene import LIDAR, RADAR, validate_scene
from .visibility import VisibilityConfig, build_visibility

SOLVERS = {
    "branch-bound": solve_branch_bound,
    "exhaustive": solve_exhaustive,
    "greedy": solve_greedy,
}


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON config: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return obj


def _pick(flag_value, config: dict, key: str, default):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _manifest_record(command: str, inputs, outputs, config: dict, started: float) -> dict:
    return {
        "command": command,
        "tool_version": __version__,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": [Path(o).name for o in outputs],
        "config": config,
        "wall_time_s": time.perf_counter() - started,
    }


def _checked_scene(path):
    scene = load_scene(path)
    violations = validate_scene(scene)
    if violations:
        raise ValueError("; ".join(f"scene: {v}" for v in violations))
    return scene


def _visibility_config(config: dict, args) -> VisibilityConfig:
    sample_height = _pick(getattr(args, "sample_height", None), config, "sample_height_m", None)
    return VisibilityConfig(
        samples_per_cell=int(_pick(getattr(args, "samples_per_cell", None),
                                   config, "samples_per_cell", 9)),
        object_height_m=float(_pick(getattr(args, "object_height", None),
                                    config, "object_height_m", 1.7)),
        sample_height_m=None if sample_height is None else float(sample_height),
        epsilon=float(_pick(getattr(args, "epsilon", None), config, "epsilon", 1e-6)),
    )


def _matrix_files(scene, lidar, radar, digest: str, manifest: str) -> tuple[MatrixFile, MatrixFile]:
    cells = tuple(scene.roi.sorted_cells())
    weights = np.array([scene.roi.weight_of(j) for j in cells])
    lf = MatrixFile(
        matrix=lidar,
        scene_hash=digest,
        cells=cells,
        weights=weights,
        costs=np.array([m.spec.unit_cost for m in scene.lidar_candidates]),
        ids=tuple(m.id for m in scene.lidar_candidates),
        manifest=manifest,
    )
    rf = MatrixFile(
        matrix=radar,
        scene_hash=digest,
        cells=cells,
        weights=weights,
        costs=np.array([m.spec.unit_cost for m in scene.radar_candidates]),
        ids=tuple(m.id for m in scene.radar_candidates),
        manifest=manifest,
    )
    return lf, rf


def cmd_visibility(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    scene = _checked_scene(args.scene)
    vis_cfg = _visibility_config(config, args)
    workers = int(_pick(args.workers, config, "workers", 1))
    if workers < 1:
        raise ValueError("workers must be at least 1")
    lidar, radar = build_visibility(scene, vis_cfg, workers)
    digest = scene_hash(scene)
    manifest_path = f"{args.out_lidar}.manifest"
    lf, rf = _matrix_files(scene, lidar, radar, digest, Path(manifest_path).name)
    save_matrix(args.out_lidar, lf)
    save_matrix(args.out_radar, rf)
    effective = {
        "samples_per_cell": vis_cfg.samples_per_cell,
        "object_height_m": vis_cfg.object_height_m,
        "sample_height_m": vis_cfg.sample_height_m,
        "epsilon": vis_cfg.epsilon,
        "workers": workers,
    }
    save_manifest(
        manifest_path,
        _manifest_record("visibility", [args.scene],
                         [args.out_lidar, args.out_radar], effective, started),
    )
    print(f"wrote {args.out_lidar} ({lidar.n_candidates}x{lidar.n_cells})")
    print(f"wrote {args.out_radar} ({radar.n_candidates}x{radar.n_cells})")
    return 0


def _load_matrix_pair(lidar_path, radar_path):
    lf = load_matrix(lidar_path)
    rf = load_matrix(radar_path)
    if lf.matrix.modality != LIDAR:
        raise ValueError(f"{lidar_path} holds a {lf.matrix.modality!r} matrix, expected lidar")
    if rf.matrix.modality != RADAR:
        raise ValueError(f"{radar_path} holds a {rf.matrix.modality!r} matrix, expected radar")
    if lf.scene_hash != rf.scene_hash:
        _warn("matrix scene hashes differ; they may come from different scenes")
    if lf.cells != rf.cells:
        raise ValueError("matrices disagree on ROI cells")
    if not np.array_equal(lf.weights, rf.weights):
        raise ValueError("matrices disagree on cell weights")
    return lf, rf


def _problem_from_files(lf: MatrixFile, rf: MatrixFile, budget: float,
                        budget_mode: str, threshold: float) -> PlacementProblem:
    return PlacementProblem.from_matrices(
        lf.matrix,
        rf.matrix,
        lf.weights,
        budget=budget,
        seen_threshold=threshold,
        budget_mode=budget_mode,
        lidar_costs=lf.costs,
        radar_costs=rf.costs,
    )


def _optimize_settings(args, config: dict) -> tuple[float, str, float, str]:
    budget = _pick(args.budget, config, "budget", None)
    if budget is None:
        raise ValueError("budget is required (flag --budget or config key 'budget')")
    budget_mode = _pick(args.budget_mode, config, "budget_mode", "count")
    threshold = float(_pick(args.threshold, config, "seen_threshold", 1.0))
    solver = _pick(getattr(args, "solver", None), config, "solver", "branch-bound")
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}")
    return float(budget), budget_mode, threshold, solver


def cmd_optimize(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    lf, rf = _load_matrix_pair(args.lidar, args.radar)
    budget, budget_mode, threshold, solver = _optimize_settings(args, config)
    problem = _problem_from_files(lf, rf, budget, budget_mode, threshold)
    solution = SOLVERS[solver](problem)
    sel = solution.selection
    manifest_path = f"{args.out}.manifest"
    sol_file = SolutionFile(
        lidar_ids=tuple(sorted(sel.lidar_ids)),
        radar_ids=tuple(sorted(sel.radar_ids)),
        lidar_candidate_ids=tuple(lf.ids[i] for i in sorted(sel.lidar_ids)),
        radar_candidate_ids=tuple(rf.ids[i] for i in sorted(sel.radar_ids)),
        objective=solution.objective,
        optimal=solution.optimal,
        budget=budget,
        budget_mode=budget_mode,
        seen_threshold=threshold,
        scene_hash=lf.scene_hash,
        manifest=Path(manifest_path).name,
    )
    save_solution(args.out, sol_file)
    effective = {"budget": budget, "budget_mode": budget_mode,
                 "seen_threshold": threshold, "solver": solver}
    save_manifest(
        manifest_path,
        _manifest_record("optimize", [args.lidar, args.radar], [args.out],
                         effective, started),
    )
    lidar_names = ", ".join(sol_file.lidar_candidate_ids) or "-"
    radar_names = ", ".join(sol_file.radar_candidate_ids) or "-"
    print(f"objective {solution.objective:.9g} ({'optimal' if solution.optimal else 'heuristic'})")
    print(f"lidar: {lidar_names}")
    print(f"radar: {radar_names}")
    print(f"wrote {args.out}")
    return 0


def cmd_export_milp(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    lf, rf = _load_matrix_pair(args.lidar, args.radar)
    budget, budget_mode, threshold, _ = _optimize_settings(args, config)
    problem = _problem_from_files(lf, rf, budget, budget_mode, threshold)
    text = export_milp(problem)
    Path(args.out).write_text(text)
    manifest_path = f"{args.out}.manifest"
    effective = {"budget": budget, "budget_mode": budget_mode, "seen_threshold": threshold}
    save_manifest(
        manifest_path,
        _manifest_record("export-milp", [args.lidar, args.radar], [args.out],
                         effective, started),
    )
    print(f"wrote {args.out} ({len(text.splitlines())} lines)")
    return 0


def _selection_from_solution(sol: SolutionFile, lf: MatrixFile, rf: MatrixFile) -> Selection:
    for i in sol.lidar_ids:
        if not 0 <= i < lf.matrix.n_candidates:
            raise ValueError(f"solution lidar index {i} out of range for the matrix")
    for i in sol.radar_ids:
        if not 0 <= i < rf.matrix.n_candidates:
            raise ValueError(f"solution radar index {i} out of range for the matrix")
    return Selection.of(sol.lidar_ids, sol.radar_ids)


def cmd_coverage(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    lf, rf = _load_matrix_pair(args.lidar, args.radar)
    sol = load_solution(args.solution)
    if sol.scene_hash != lf.scene_hash:
        _warn("solution scene hash differs from the matrices")
    selection = _selection_from_solution(sol, lf, rf)
    theta = float(_pick(args.theta, config, "theta", 0.0))
    name = _pick(args.name, config, "name", Path(args.solution).stem)
    problem = _problem_from_files(lf, rf, sol.budget, sol.budget_mode, sol.seen_threshold)
    report = coverage_report(problem, selection, config_name=name, theta=theta)
    manifest_path = f"{args.out}.manifest"
    save_report(args.out, "coverage", report.to_record(), Path(manifest_path).name)
    save_manifest(
        manifest_path,
        _manifest_record("coverage", [args.lidar, args.radar, args.solution],
                         [args.out], {"theta": theta, "name": name}, started),
    )
    print(
        f"{name}: coverage {report.central_coverage:.1%}"
        f" ({report.covered_cells}/{report.total_roi_cells}), cost {report.total_cost:.2f}"
    )
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    started = time.perf_counter()
    reports = []
    for path in args.reports:
        kind, record = load_report(path)
        if kind != "coverage":
            raise ValueError(f"{path} is a {kind!r} report, expected coverage")
        try:
            reports.append(CoverageReport(**record))
        except TypeError as exc:
            raise ParseError(f"{path}: malformed coverage record: {exc}") from exc
    comparison = compare_configs(reports)
    print(comparison.to_text(), end="")
    if args.out:
        manifest_path = f"{args.out}.manifest"
        save_report(args.out, "coverage_comparison", comparison.to_record(),
                    Path(manifest_path).name)
        save_manifest(
            manifest_path,
            _manifest_record("compare", list(args.reports), [args.out], {}, started),
        )
        print(f"wrote {args.out}")
    return 0


def _noise_spec(record, where: str) -> NoiseSpec:
    if not isinstance(record, dict):
        raise ValueError(f"{where} must be an object of sigma fields")
    allowed = {"position_sigma", "size_sigma", "yaw_sigma", "velocity_sigma"}
    for key in record:
        if key not in allowed:
            raise ValueError(f"{where}: unknown noise field {key!r}")
    return NoiseSpec(**{k: float(v) for k, v in record.items()})


def _scenario_config(args, config: dict) -> ScenarioConfig:
    class_mix = config.get("class_mix", None)
    speed_ranges = config.get("speed_ranges", None)
    kwargs = {}
    if class_mix is not None:
        kwargs["class_mix"] = {str(k): float(v) for k, v in class_mix.items()}
    if speed_ranges is not None:
        kwargs["speed_ranges"] = {
            str(k): (float(v[0]), float(v[1])) for k, v in speed_ranges.items()
        }
    return ScenarioConfig(
        seed=int(_pick(args.seed, config, "seed", 0)),
        duration_frames=int(_pick(args.frames, config, "duration_frames", 100)),
        frame_dt_s=float(_pick(args.dt, config, "frame_dt_s", 0.1)),
        lidar_noise=_noise_spec(config.get("lidar_noise", {}), "lidar_noise"),
        radar_noise=_noise_spec(config.get("radar_noise", {}), "radar_noise"),
        dropout_rule=_pick(args.dropout, config, "dropout_rule", "visibility"),
        **kwargs,
    )


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    scene = _checked_scene(args.scene)
    lf, rf = _load_matrix_pair(args.lidar, args.radar)
    if lf.scene_hash != scene_hash(scene):
        _warn("matrices were not built from this scene file")
    sol = load_solution(args.solution)
    if sol.scene_hash != lf.scene_hash:
        _warn("solution scene hash differs from the matrices")
    selection = _selection_from_solution(sol, lf, rf)
    scenario_cfg = _scenario_config(args, config)
    result = generate_scenario(scene, lf.matrix, rf.matrix, selection, scenario_cfg)
    manifest_path = f"{args.out_truth}.manifest"
    manifest_name = Path(manifest_path).name
    save_frames(args.out_truth, result.ground_truth, manifest_name)
    save_frames(args.out_lidar, result.lidar, manifest_name)
    save_frames(args.out_radar, result.radar, manifest_name)
    effective = {
        "seed": scenario_cfg.seed,
        "duration_frames": scenario_cfg.duration_frames,
        "frame_dt_s": scenario_cfg.frame_dt_s,
        "dropout_rule": scenario_cfg.dropout_rule,
    }
    save_manifest(
        manifest_path,
        _manifest_record(
            "simulate",
            [args.scene, args.lidar, args.radar, args.solution],
            [args.out_truth, args.out_lidar, args.out_radar],
            effective,
            started,
        ),
    )
    n_truth = sum(len(b) for b in result.ground_truth.values())
    n_lidar = sum(len(b) for b in result.lidar.values())
    n_radar = sum(len(b) for b in result.radar.values())
    print(
        f"simulated {scenario_cfg.duration_frames} frames:"
        f" {n_truth} truth, {n_lidar} lidar, {n_radar} radar boxes"
    )
    return 0


def cmd_fuse(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    lidar = load_frames(args.lidar)
    radar = load_frames(args.radar)
    fusion_cfg = FusionConfig(
        iou_threshold=float(_pick(args.iou_threshold, config, "iou_threshold", 0.3))
    )
    ids = sorted(set(lidar) | set(radar))
    fused = {
        fid: fuse_late(lidar.get(fid, []), radar.get(fid, []), fusion_cfg)
        for fid in ids
    }
    manifest_path = f"{args.out}.manifest"
    save_frames(args.out, fused, Path(manifest_path).name)
    save_manifest(
        manifest_path,
        _manifest_record("fuse", [args.lidar, args.radar], [args.out],
                         {"iou_threshold": fusion_cfg.iou_threshold}, started),
    )
    n_in = sum(len(b) for b in lidar.values()) + sum(len(b) for b in radar.values())
    n_out = sum(len(b) for b in fused.values())
    print(f"fused {n_in} detections into {n_out} boxes ({n_in - n_out} merges)")
    return 0


def _ap_text(ap: float | None) -> str:
    return "undefined" if ap is None else f"{ap:.3f}"


def _evaluation_record(result, classes) -> dict:
    return {
        "matching_mode": result.matching_mode,
        "mean_ap": result.mean_ap,
        "per_class": {
            label: {
                "ap": result.per_class[label].ap,
                "threshold": result.per_class[label].threshold,
                "num_gt": result.per_class[label].num_gt,
                "num_predictions": result.per_class[label].num_predictions,
            }
            for label in classes
        },
    }


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    pairs = load_frame_pairs(args.truth, args.predictions)
    mode = _pick(args.mode, config, "matching_mode", "iou")
    if mode not in MATCHING_MODES:
        raise ValueError(f"unknown matching mode {mode!r}")
    classes_value = _pick(args.classes, config, "classes", None)
    if classes_value is None:
        classes = CLASSES
    elif isinstance(classes_value, str):
        classes = tuple(c.strip() for c in classes_value.split(",") if c.strip())
    else:
        classes = tuple(classes_value)
    thresholds = config.get("thresholds")
    if thresholds is not None:
        thresholds = {str(k): float(v) for k, v in thresholds.items()}
    if args.threshold is not None:
        thresholds = {label: args.threshold for label in classes}
    result = evaluate_map(pairs, classes, mode, thresholds)

    print(f"{'class':<12} {'AP':>9} {'gt':>6} {'preds':>6}")
    for label in classes:
        r = result.per_class[label]
        print(f"{label:<12} {_ap_text(r.ap):>9} {r.num_gt:>6} {r.num_predictions:>6}")
    print(f"mAP {result.mean_ap:.3f} ({mode})")

    record = _evaluation_record(result, classes)
    if args.baseline:
        kind, base = load_report(args.baseline)
        if kind != "evaluation":
            raise ValueError(f"{args.baseline} is a {kind!r} report, expected evaluation")
        base_classes = base.get("per_class", {})
        print()
        print(f"delta vs {Path(args.baseline).name}:")
        deltas = {}
        for label in classes:
            base_ap = base_classes.get(label, {}).get("ap")
            ap = result.per_class[label].ap
            if base_ap is None or ap is None:
                continue
            delta = ap - base_ap
            deltas[label] = delta
            print(f"{label:<12} {base_ap:.3f} -> {ap:.3f}  ({delta * 100.0:+.1f}%)")
        map_delta = result.mean_ap - float(base["mean_ap"])
        print(f"{'mAP':<12} {float(base['mean_ap']):.3f} -> {result.mean_ap:.3f}"
              f"  ({map_delta * 100.0:+.1f}%)")
        record["baseline"] = {
            "report": Path(args.baseline).name,
            "mean_ap": float(base["mean_ap"]),
            "mean_ap_delta": map_delta,
            "per_class_delta": deltas,
        }
    if args.out:
        manifest_path = f"{args.out}.manifest"
        inputs = [args.truth, args.predictions]
        if args.baseline:
            inputs.append(args.baseline)
        save_report(args.out, "evaluation", record, Path(manifest_path).name)
        save_manifest(
            manifest_path,
            _manifest_record("evaluate", inputs, [args.out],
                             {"matching_mode": mode, "classes": list(classes)}, started),
        )
        print(f"wrote {args.out}")
    return 0


def _pipeline_entry(entry: dict, index: int) -> dict:
    if not isinstance(entry, dict):
        raise ValueError(f"pipeline configs[{index}] must be an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise ValueError(f"pipeline configs[{index}] needs a nonempty 'name'")
    safe = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-")
    if not set(name) <= safe:
        raise ValueError(f"pipeline config name {name!r} has unsafe characters")
    if "budget" not in entry:
        raise ValueError(f"pipeline config {name!r} needs a 'budget'")
    return entry


def cmd_pipeline(args) -> int:
    started = time.perf_counter()
    config = _load_config_file(args.config)
    if "scene" not in config:
        raise ValueError("pipeline config requires a 'scene' path")
    scene_file = Path(args.config).parent / config["scene"]
    scene = _checked_scene(scene_file)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = int(_pick(args.workers, config, "workers", 1))
    if workers < 1:
        raise ValueError("workers must be at least 1")

    entries = config.get("configs")
    if not isinstance(entries, list) or not entries:
        raise ValueError("pipeline config requires a nonempty 'configs' list")
    entries = [_pipeline_entry(e, i) for i, e in enumerate(entries)]
    names = [e["name"] for e in entries]
    if len(set(names)) != len(names):
        raise ValueError("pipeline config names must be unique")

    vis_over = config.get("visibility", {})
    vis_cfg = VisibilityConfig(
        samples_per_cell=int(vis_over.get("samples_per_cell", 9)),
        object_height_m=float(vis_over.get("object_height_m", 1.7)),
        sample_height_m=(None if vis_over.get("sample_height_m") is None
                         else float(vis_over["sample_height_m"])),
        epsilon=float(vis_over.get("epsilon", 1e-6)),
    )
    lidar, radar = build_visibility(scene, vis_cfg, workers)
    digest = scene_hash(scene)
    manifest_path = out_dir / "pipeline.manifest"
    manifest_name = manifest_path.name
    lf, rf = _matrix_files(scene, lidar, radar, digest, manifest_name)
    lidar_path = out_dir / "lidar.vismatrix"
    radar_path = out_dir / "radar.vismatrix"
    save_matrix(lidar_path, lf)
    save_matrix(radar_path, rf)

    scenario_base = config.get("scenario", {})
    fusion_cfg = FusionConfig(
        iou_threshold=float(config.get("fusion", {}).get("iou_threshold", 0.3))
    )
    eval_cfg = config.get("evaluation", {})
    eval_mode = eval_cfg.get("matching_mode", "iou")
    if eval_mode not in MATCHING_MODES:
        raise ValueError(f"unknown matching mode {eval_mode!r}")
    eval_thresholds = eval_cfg.get("thresholds")
    if eval_thresholds is not None:
        eval_thresholds = {str(k): float(v) for k, v in eval_thresholds.items()}

    outputs = [lidar_path, radar_path]
    coverage_reports = []
    summary_rows = []
    for entry in entries:
        name = entry["name"]
        budget = float(entry["budget"])
        budget_mode = entry.get("budget_mode", "count")
        threshold = float(entry.get("seen_threshold", 1.0))
        solver = entry.get("solver", "branch-bound")
        if solver not in SOLVERS:
            raise ValueError(f"unknown solver {solver!r} in config {name!r}")
        theta = float(entry.get("theta", 0.0))

        problem = _problem_from_files(lf, rf, budget, budget_mode, threshold)
        solution = SOLVERS[solver](problem)
        sel = solution.selection
        sol_path = out_dir / f"{name}.solution"
        sol_file = SolutionFile(
            lidar_ids=tuple(sorted(sel.lidar_ids)),
            radar_ids=tuple(sorted(sel.radar_ids)),
            lidar_candidate_ids=tuple(lf.ids[i] for i in sorted(sel.lidar_ids)),
            radar_candidate_ids=tuple(rf.ids[i] for i in sorted(sel.radar_ids)),
            objective=solution.objective,
            optimal=solution.optimal,
            budget=budget,
            budget_mode=budget_mode,
            seen_threshold=threshold,
            scene_hash=digest,
            manifest=manifest_name,
        )
        save_solution(sol_path, sol_file)
        outputs.append(sol_path)

        report = coverage_report(problem, sel, config_name=name, theta=theta)
        coverage_reports.append(report)
        cov_path = out_dir / f"{name}.coverage"
        save_report(cov_path, "coverage", report.to_record(), manifest_name)
        outputs.append(cov_path)

        scenario_cfg = _scenario_config(
            argparse.Namespace(seed=None, frames=None, dt=None, dropout=None),
            {**scenario_base, **entry.get("scenario", {})},
        )
        result = generate_scenario(scene, lf.matrix, rf.matrix, sel, scenario_cfg)
        truth_path = out_dir / f"{name}.truth.frames"
        lidar_frames_path = out_dir / f"{name}.lidar.frames"
        radar_frames_path = out_dir / f"{name}.radar.frames"
        save_frames(truth_path, result.ground_truth, manifest_name)
        save_frames(lidar_frames_path, result.lidar, manifest_name)
        save_frames(radar_frames_path, result.radar, manifest_name)
        outputs += [truth_path, lidar_frames_path, radar_frames_path]

        fused = {
            fid: fuse_late(result.lidar.get(fid, []), result.radar.get(fid, []), fusion_cfg)
            for fid in sorted(result.ground_truth)
        }
        fused_path = out_dir / f"{name}.fused.frames"
        save_frames(fused_path, fused, manifest_name)
        outputs.append(fused_path)

        pairs = pair_frames(result.ground_truth, fused)
        eval_result = evaluate_map(pairs, CLASSES, eval_mode, eval_thresholds)
        eval_record = _evaluation_record(eval_result, CLASSES)
        eval_path = out_dir / f"{name}.evaluation"
        save_report(eval_path, "evaluation", eval_record, manifest_name)
        outputs.append(eval_path)

        summary_rows.append(
            {
                "name": name,
                "objective": solution.objective,
                "optimal": solution.optimal,
                "central_coverage": report.central_coverage,
                "total_cost": report.total_cost,
                "mean_ap": eval_result.mean_ap,
            }
        )
        print(
            f"{name}: objective {solution.objective:.9g},"
            f" coverage {report.central_coverage:.1%},"
            f" mAP {eval_result.mean_ap:.3f}"
        )

    summary: dict = {"configs": summary_rows}
    if len(coverage_reports) >= 2:
        comparison = compare_configs(coverage_reports)
        summary["comparison"] = comparison.to_record()
        print()
        print(comparison.to_text(), end="")
    summary_path = out_dir / "summary.report"
    save_report(summary_path, "pipeline_summary", summary, manifest_name)
    outputs.append(summary_path)
    save_manifest(
        manifest_path,
        _manifest_record("pipeline", [scene_file, args.config], outputs,
                         {"workers": workers}, started),
    )
    print(f"wrote {summary_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossview",
        description="Plan and evaluate budget-constrained lidar/radar deployments.",
    )
    parser.add_argument("--version", action="version", version=f"crossview {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", help="ray-cast visibility matrices for a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out-lidar", required=True)
    p.add_argument("--out-radar", required=True)
    p.add_argument("--samples-per-cell", type=int)
    p.add_argument("--object-height", type=float)
    p.add_argument("--sample-height", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("optimize", help="pick mounts under a budget")
    p.add_argument("--lidar", required=True)
    p.add_argument("--radar", required=True)
    p.add_argument("--budget", type=float)
    p.add_argument("--budget-mode", choices=["count", "cost"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--solver", choices=sorted(SOLVERS))
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("export-milp", help="write the selection model as LP text")
    p.add_argument("--lidar", required=True)
    p.add_argument("--radar", required=True)
    p.add_argument("--budget", type=float)
    p.add_argument("--budget-mode", choices=["count", "cost"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_export_milp)

    p = sub.add_parser("coverage", help="coverage report for a solution")
    p.add_argument("--lidar", required=True)
    p.add_argument("--radar", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--name")
    p.add_argument("--theta", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("compare", help="compare coverage reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="synthesize traffic and detections")
    p.add_argument("--scene", required=True)
    p.add_argument("--lidar", required=True)
    p.add_argument("--radar", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--dropout", choices=["visibility", "none"])
    p.add_argument("--out-truth", required=True)
    p.add_argument("--out-lidar", required=True)
    p.add_argument("--out-radar", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fuse", help="late-fuse lidar and radar frames")
    p.add_argument("--lidar", required=True)
    p.add_argument("--radar", required=True)
    p.add_argument("--iou-threshold", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="AP and mAP against ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--mode", choices=list(MATCHING_MODES))
    p.add_argument("--threshold", type=float)
    p.add_argument("--classes")
    p.add_argument("--baseline")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="visibility through evaluation in one go")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        _fail(str(exc))
        return 3
    except FileNotFoundError as exc:
        _fail(f"cannot read {exc.filename}")
        return 3
    except InstanceTooLargeError as exc:
        _fail(str(exc))
        return 5
    except (ValueError, IndexError, KeyError) as exc:
        _fail(str(exc))
        return 4
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception:
        traceback.print_exc()
        return 1
