"""Text file formats: scenes, visibility matrices, frames, reports.

Every file opens with a one-line magic token and format version, e.g.
``crossview.scene 1``.  JSON-bodied formats carry a sha256 content hash of
the canonical (sorted, compact) payload so truncation and hand edits fail
loudly on load.  The matrix format is a plain header plus one text row per
candidate; values are printed with 9 significant digits, which reparses to
the same printed form, so a load/save cycle is byte stable.

Loaders are strict: unknown fields, missing fields, version mismatches and
malformed numbers all raise ParseError naming the offending part.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boxes import DetectionBox
from .metrics import FramePair, pair_frames
from .scene import (
    CandidateMount,
    GridSpec,
    Occluder,
    RegionOfInterest,
    Scene,
    SensorSpec,
)
from .visibility import VisibilityMatrix

SCENE_MAGIC = "crossview.scene"
MATRIX_MAGIC = "crossview.vismatrix"
FRAMES_MAGIC = "crossview.frames"
REPORT_MAGIC = "crossview.report"
SOLUTION_MAGIC = "crossview.solution"
MANIFEST_MAGIC = "crossview.manifest"
FORMAT_VERSION = 1


class ParseError(ValueError):
    """A file failed validation against its declared format."""


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _payload_hash(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()


def _dump_document(magic: str, payload: dict) -> str:
    payload = _jsonable(payload)
    body = {"content_hash": _payload_hash(payload), "payload": payload}
    text = json.dumps(body, sort_keys=True, indent=2, allow_nan=False)
    return f"{magic} {FORMAT_VERSION}\n{text}\n"


def _split_magic(text: str, path) -> tuple[str, str, str]:
    newline = text.find("\n")
    if newline < 0:
        raise ParseError(f"{path}: missing magic line")
    first = text[:newline]
    parts = first.split()
    if len(parts) != 2:
        raise ParseError(f"{path}: malformed magic line {first!r}")
    return parts[0], parts[1], text[newline + 1 :]


def _check_magic(magic: str, version: str, expected: str, path) -> None:
    if magic != expected:
        raise ParseError(f"{path}: expected {expected} file, found {magic!r}")
    if version != str(FORMAT_VERSION):
        raise ParseError(
            f"{path}: unsupported {expected} version {version!r}"
            f" (this build reads version {FORMAT_VERSION})"
        )


def _reject_constant(name: str):
    raise ParseError(f"non-finite JSON constant {name!r} is not allowed")


def _load_document(path, expected_magic: str) -> dict:
    text = Path(path).read_text()
    magic, version, rest = _split_magic(text, path)
    _check_magic(magic, version, expected_magic, path)
    try:
        body = json.loads(rest, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid or truncated JSON body: {exc}") from exc
    if not isinstance(body, dict):
        raise ParseError(f"{path}: JSON body must be an object")
    _require_keys(body, {"content_hash", "payload"}, set(), f"{path} body")
    payload = body["payload"]
    if not isinstance(payload, dict):
        raise ParseError(f"{path}: payload must be an object")
    if _payload_hash(payload) != body["content_hash"]:
        raise ParseError(f"{path}: content hash mismatch; file is corrupt or edited")
    return payload


def _require_keys(d: dict, required: set[str], optional: set[str], where: str) -> None:
    missing = required - d.keys()
    if missing:
        raise ParseError(f"{where}: missing field {sorted(missing)[0]!r}")
    unknown = d.keys() - required - optional
    if unknown:
        raise ParseError(f"{where}: unknown field {sorted(unknown)[0]!r}")


def _as_float_tuple(value, n: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ParseError(f"{where}: expected a list of {n} numbers")
    out = []
    for v in value:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ParseError(f"{where}: expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


# -- scenes -----------------------------------------------------------------

def _spec_record(spec: SensorSpec) -> dict:
    return {
        "modality": spec.modality,
        "hfov_deg": spec.hfov_deg,
        "vfov_deg": spec.vfov_deg,
        "max_range_m": spec.max_range_m,
        "rate_hz": spec.rate_hz,
        "unit_cost": spec.unit_cost,
        "beams": spec.beams,
    }


def _spec_from_record(rec: dict, where: str) -> SensorSpec:
    _require_keys(
        rec,
        {"modality", "hfov_deg", "vfov_deg", "max_range_m", "rate_hz"},
        {"unit_cost", "beams"},
        where,
    )
    beams = rec.get("beams")
    if beams is not None and not isinstance(beams, int):
        raise ParseError(f"{where}: beams must be an integer or null")
    return SensorSpec(
        modality=rec["modality"],
        hfov_deg=float(rec["hfov_deg"]),
        vfov_deg=float(rec["vfov_deg"]),
        max_range_m=float(rec["max_range_m"]),
        rate_hz=float(rec["rate_hz"]),
        unit_cost=float(rec.get("unit_cost", 0.0)),
        beams=beams,
    )


def _candidate_record(mount: CandidateMount) -> dict:
    return {
        "id": mount.id,
        "position": list(mount.position),
        "yaw_deg": mount.yaw_deg,
        "pitch_deg": mount.pitch_deg,
        "spec": _spec_record(mount.spec),
    }


def _candidate_from_record(rec: dict, where: str) -> CandidateMount:
    _require_keys(rec, {"id", "position", "spec"}, {"yaw_deg", "pitch_deg"}, where)
    if not isinstance(rec["id"], str) or not rec["id"]:
        raise ParseError(f"{where}: id must be a nonempty string")
    return CandidateMount(
        id=rec["id"],
        position=_as_float_tuple(rec["position"], 3, f"{where}.position"),
        spec=_spec_from_record(rec["spec"], f"{where}.spec"),
        yaw_deg=float(rec.get("yaw_deg", 0.0)),
        pitch_deg=float(rec.get("pitch_deg", 0.0)),
    )


def scene_payload(scene: Scene) -> dict:
    weights = {str(j): w for j, w in sorted(scene.roi.weights.items())}
    return {
        "grid": {
            "origin_xy": list(scene.grid.origin_xy),
            "cell_size": scene.grid.cell_size,
            "nx": scene.grid.nx,
            "ny": scene.grid.ny,
        },
        "roi": {"cells": scene.roi.sorted_cells(), "weights": weights},
        "occluders": [
            {"min_corner": list(o.min_corner), "max_corner": list(o.max_corner)}
            for o in scene.occluders
        ],
        "lidar_candidates": [_candidate_record(m) for m in scene.lidar_candidates],
        "radar_candidates": [_candidate_record(m) for m in scene.radar_candidates],
    }


def scene_hash(scene: Scene) -> str:
    """Stable provenance digest of a scene's canonical payload."""
    return _payload_hash(_jsonable(scene_payload(scene)))


def save_scene(path, scene: Scene) -> None:
    Path(path).write_text(_dump_document(SCENE_MAGIC, scene_payload(scene)))


def load_scene(path) -> Scene:
    payload = _load_document(path, SCENE_MAGIC)
    where = str(path)
    _require_keys(
        payload,
        {"grid", "roi", "occluders", "lidar_candidates", "radar_candidates"},
        set(),
        where,
    )
    grid_rec = payload["grid"]
    _require_keys(grid_rec, {"origin_xy", "cell_size", "nx", "ny"}, set(), f"{where}.grid")
    if not isinstance(grid_rec["nx"], int) or not isinstance(grid_rec["ny"], int):
        raise ParseError(f"{where}.grid: nx and ny must be integers")
    grid = GridSpec(
        origin_xy=_as_float_tuple(grid_rec["origin_xy"], 2, f"{where}.grid.origin_xy"),
        cell_size=float(grid_rec["cell_size"]),
        nx=grid_rec["nx"],
        ny=grid_rec["ny"],
    )
    roi_rec = payload["roi"]
    _require_keys(roi_rec, {"cells"}, {"weights"}, f"{where}.roi")
    cells = roi_rec["cells"]
    if not isinstance(cells, list) or not all(isinstance(c, int) for c in cells):
        raise ParseError(f"{where}.roi.cells must be a list of integers")
    weights = {}
    for key, value in roi_rec.get("weights", {}).items():
        try:
            j = int(key)
        except ValueError as exc:
            raise ParseError(f"{where}.roi.weights: bad cell key {key!r}") from exc
        weights[j] = float(value)
    occluders = []
    for k, rec in enumerate(payload["occluders"]):
        o_where = f"{where}.occluders[{k}]"
        _require_keys(rec, {"min_corner", "max_corner"}, set(), o_where)
        occluders.append(
            Occluder(
                min_corner=_as_float_tuple(rec["min_corner"], 3, o_where),
                max_corner=_as_float_tuple(rec["max_corner"], 3, o_where),
            )
        )
    lidar = [
        _candidate_from_record(rec, f"{where}.lidar_candidates[{k}]")
        for k, rec in enumerate(payload["lidar_candidates"])
    ]
    radar = [
        _candidate_from_record(rec, f"{where}.radar_candidates[{k}]")
        for k, rec in enumerate(payload["radar_candidates"])
    ]
    return Scene(
        grid=grid,
        roi=RegionOfInterest(cells=frozenset(cells), weights=weights),
        occluders=tuple(occluders),
        lidar_candidates=tuple(lidar),
        radar_candidates=tuple(radar),
    )


# -- visibility matrices ----------------------------------------------------

@dataclass(frozen=True)
class MatrixFile:
    """A visibility matrix plus everything needed to optimize from it."""

    matrix: VisibilityMatrix
    scene_hash: str
    cells: tuple[int, ...]
    weights: np.ndarray
    costs: np.ndarray
    ids: tuple[str, ...]
    manifest: str | None = None


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def save_matrix(path, mf: MatrixFile) -> None:
    rows, cols = mf.matrix.values.shape
    if len(mf.cells) != cols:
        raise ValueError("cells length must match matrix columns")
    if mf.weights.shape != (cols,):
        raise ValueError("weights length must match matrix columns")
    if mf.costs.shape != (rows,) or len(mf.ids) != rows:
        raise ValueError("costs and ids length must match matrix rows")
    lines = [f"{MATRIX_MAGIC} {FORMAT_VERSION}"]
    lines.append(f"modality {mf.matrix.modality}")
    lines.append(f"rows {rows}")
    lines.append(f"cols {cols}")
    lines.append(f"epsilon {_fmt(mf.matrix.epsilon)}")
    lines.append(f"scene_hash {mf.scene_hash}")
    lines.append("cells " + " ".join(str(c) for c in mf.cells))
    lines.append("weights " + " ".join(_fmt(w) for w in mf.weights))
    lines.append("costs " + " ".join(_fmt(c) for c in mf.costs))
    lines.append("ids " + " ".join(mf.ids))
    if mf.manifest is not None:
        lines.append(f"manifest {mf.manifest}")
    for i in range(rows):
        lines.append(" ".join(_fmt(v) for v in mf.matrix.values[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_floats(text: str, n: int, where: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != n:
        raise ParseError(f"{where}: expected {n} values, found {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ParseError(f"{where}: malformed number: {exc}") from exc


def load_matrix(path) -> MatrixFile:
    text = Path(path).read_text()
    magic, version, rest = _split_magic(text, path)
    _check_magic(magic, version, MATRIX_MAGIC, path)
    lines = rest.splitlines()
    header: dict[str, str] = {}
    required = {"modality", "rows", "cols", "epsilon", "scene_hash",
                "cells", "weights", "costs", "ids"}
    optional = {"manifest"}
    pos = 0
    while pos < len(lines):
        key = lines[pos].split(" ", 1)[0]
        if key not in required and key not in optional:
            break
        if key in header:
            raise ParseError(f"{path}: duplicate header field {key!r}")
        parts = lines[pos].split(" ", 1)
        header[key] = parts[1] if len(parts) == 2 else ""
        pos += 1
    _require_keys(header, required, optional, str(path))
    try:
        rows = int(header["rows"])
        cols = int(header["cols"])
    except ValueError as exc:
        raise ParseError(f"{path}: rows/cols must be integers") from exc
    if rows < 0 or cols < 0:
        raise ParseError(f"{path}: rows/cols must be nonnegative")
    modality = header["modality"]
    epsilon = float(_parse_floats(header["epsilon"], 1, f"{path}: epsilon")[0])

    cell_parts = header["cells"].split()
    if len(cell_parts) != cols:
        raise ParseError(f"{path}: cells lists {len(cell_parts)} entries, expected {cols}")
    try:
        cells = tuple(int(c) for c in cell_parts)
    except ValueError as exc:
        raise ParseError(f"{path}: cells must be integers") from exc
    weights = _parse_floats(header["weights"], cols, f"{path}: weights")
    costs = _parse_floats(header["costs"], rows, f"{path}: costs")
    ids = tuple(header["ids"].split())
    if len(ids) != rows:
        raise ParseError(f"{path}: ids lists {len(ids)} entries, expected {rows}")

    data_lines = [ln for ln in lines[pos:] if ln.strip()]
    if len(data_lines) != rows:
        raise ParseError(f"{path}: found {len(data_lines)} matrix rows, expected {rows}")
    values = np.zeros((rows, cols))
    for i, line in enumerate(data_lines):
        values[i] = _parse_floats(line, cols, f"{path}: matrix row {i}")
    if values.size and (values.min() < 0.0 or values.max() >= 1.0):
        raise ParseError(f"{path}: matrix entries must lie in [0, 1)")
    return MatrixFile(
        matrix=VisibilityMatrix(modality, values, epsilon),
        scene_hash=header["scene_hash"],
        cells=cells,
        weights=weights,
        costs=costs,
        ids=ids,
        manifest=header.get("manifest"),
    )


# -- detection frames -------------------------------------------------------

def _box_record(box: DetectionBox) -> dict:
    return {
        "center": list(box.center),
        "size": list(box.size),
        "yaw": box.yaw,
        "class_label": box.class_label,
        "score": box.score,
        "source": box.source,
        "velocity": None if box.velocity is None else list(box.velocity),
    }


def _box_from_record(rec: dict, where: str) -> DetectionBox:
    _require_keys(
        rec,
        {"center", "size", "yaw", "class_label", "score", "source"},
        {"velocity"},
        where,
    )
    velocity = rec.get("velocity")
    if velocity is not None:
        velocity = _as_float_tuple(velocity, 2, f"{where}.velocity")
    try:
        return DetectionBox(
            center=_as_float_tuple(rec["center"], 3, f"{where}.center"),
            size=_as_float_tuple(rec["size"], 3, f"{where}.size"),
            yaw=float(rec["yaw"]),
            class_label=rec["class_label"],
            score=float(rec["score"]),
            source=rec["source"],
            velocity=velocity,
        )
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def save_frames(path, frames: dict[str, list[DetectionBox]], manifest: str | None = None) -> None:
    records = []
    for frame_id in sorted(frames):
        boxes = sorted(frames[frame_id], key=lambda b: (-b.score, b.sort_key()))
        records.append(
            {"frame_id": frame_id, "boxes": [_box_record(b) for b in boxes]}
        )
    payload: dict = {"frames": records}
    if manifest is not None:
        payload["manifest"] = manifest
    Path(path).write_text(_dump_document(FRAMES_MAGIC, payload))


def load_frames(path) -> dict[str, list[DetectionBox]]:
    payload = _load_document(path, FRAMES_MAGIC)
    where = str(path)
    _require_keys(payload, {"frames"}, {"manifest"}, where)
    if not isinstance(payload["frames"], list):
        raise ParseError(f"{where}: frames must be a list")
    out: dict[str, list[DetectionBox]] = {}
    for k, rec in enumerate(payload["frames"]):
        f_where = f"{where}.frames[{k}]"
        _require_keys(rec, {"frame_id", "boxes"}, set(), f_where)
        frame_id = rec["frame_id"]
        if not isinstance(frame_id, str):
            raise ParseError(f"{f_where}: frame_id must be a string")
        if frame_id in out:
            raise ParseError(f"{f_where}: duplicate frame_id {frame_id!r}")
        out[frame_id] = [
            _box_from_record(b, f"{f_where}.boxes[{i}]")
            for i, b in enumerate(rec["boxes"])
        ]
    return out


def load_frame_pairs(ground_truth_path, predictions_path) -> list[FramePair]:
    """Join two frames files on frame id; missing sides become empty."""
    return pair_frames(load_frames(ground_truth_path), load_frames(predictions_path))


# -- reports, solutions, manifests -------------------------------------------

def save_report(path, kind: str, record: dict, manifest: str | None = None) -> None:
    payload: dict = {"kind": kind, "record": record}
    if manifest is not None:
        payload["manifest"] = manifest
    Path(path).write_text(_dump_document(REPORT_MAGIC, payload))


def load_report(path) -> tuple[str, dict]:
    payload = _load_document(path, REPORT_MAGIC)
    _require_keys(payload, {"kind", "record"}, {"manifest"}, str(path))
    return payload["kind"], payload["record"]


@dataclass(frozen=True)
class SolutionFile:
    lidar_ids: tuple[int, ...]
    radar_ids: tuple[int, ...]
    lidar_candidate_ids: tuple[str, ...]
    radar_candidate_ids: tuple[str, ...]
    objective: float
    optimal: bool
    budget: float
    budget_mode: str
    seen_threshold: float
    scene_hash: str
    manifest: str | None = None


def save_solution(path, sol: SolutionFile) -> None:
    payload = {
        "lidar_ids": list(sol.lidar_ids),
        "radar_ids": list(sol.radar_ids),
        "lidar_candidate_ids": list(sol.lidar_candidate_ids),
        "radar_candidate_ids": list(sol.radar_candidate_ids),
        "objective": sol.objective,
        "optimal": sol.optimal,
        "budget": sol.budget,
        "budget_mode": sol.budget_mode,
        "seen_threshold": sol.seen_threshold,
        "scene_hash": sol.scene_hash,
        "manifest": sol.manifest,
    }
    Path(path).write_text(_dump_document(SOLUTION_MAGIC, payload))


def load_solution(path) -> SolutionFile:
    payload = _load_document(path, SOLUTION_MAGIC)
    where = str(path)
    _require_keys(
        payload,
        {"lidar_ids", "radar_ids", "lidar_candidate_ids", "radar_candidate_ids",
         "objective", "optimal", "budget", "budget_mode", "seen_threshold",
         "scene_hash"},
        {"manifest"},
        where,
    )
    for key in ("lidar_ids", "radar_ids"):
        if not all(isinstance(i, int) for i in payload[key]):
            raise ParseError(f"{where}: {key} must be integers")
    return SolutionFile(
        lidar_ids=tuple(payload["lidar_ids"]),
        radar_ids=tuple(payload["radar_ids"]),
        lidar_candidate_ids=tuple(payload["lidar_candidate_ids"]),
        radar_candidate_ids=tuple(payload["radar_candidate_ids"]),
        objective=float(payload["objective"]),
        optimal=bool(payload["optimal"]),
        budget=float(payload["budget"]),
        budget_mode=payload["budget_mode"],
        seen_threshold=float(payload["seen_threshold"]),
        scene_hash=payload["scene_hash"],
        manifest=payload.get("manifest"),
    )


def save_manifest(path, record: dict) -> None:
    required = {"command", "tool_version", "inputs", "outputs", "config", "wall_time_s"}
    missing = required - record.keys()
    if missing:
        raise ValueError(f"manifest record missing {sorted(missing)[0]!r}")
    Path(path).write_text(_dump_document(MANIFEST_MAGIC, record))


def load_manifest(path) -> dict:
    payload = _load_document(path, MANIFEST_MAGIC)
    _require_keys(
        payload,
        {"command", "tool_version", "inputs", "outputs", "config", "wall_time_s"},
        set(),
        str(path),
    )
    return payload
