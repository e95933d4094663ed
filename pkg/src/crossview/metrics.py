"""Average precision and mean AP over framed detection sets.

Predictions are matched to ground truth per frame, greedily in descending
score order, each ground-truth box usable once.  Matches can be judged by
3D IoU (per-class thresholds) or by BEV center distance.  AP is the
101-point interpolated area under the precision-recall curve; classes with
no ground truth anywhere have undefined AP and are skipped by the mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import CLASSES, DetectionBox, center_distance_bev, iou_3d

DEFAULT_IOU_THRESHOLDS = {
    "car": 0.5,
    "truck": 0.5,
    "bus": 0.5,
    "golf_cart": 0.5,
    "motorcycle": 0.25,
    "pedestrian": 0.25,
}

DEFAULT_CENTER_THRESHOLD = 2.0

MATCHING_MODES = ("iou", "center_distance")


@dataclass(frozen=True)
class FramePair:
    """Predictions and ground truth sharing one frame id."""

    frame_id: str
    predictions: tuple[DetectionBox, ...]
    ground_truth: tuple[DetectionBox, ...]

    @staticmethod
    def of(frame_id, predictions, ground_truth) -> "FramePair":
        return FramePair(str(frame_id), tuple(predictions), tuple(ground_truth))


@dataclass(frozen=True)
class APResult:
    class_label: str
    ap: float | None
    precision_curve: tuple[float, ...]
    recall_curve: tuple[float, ...]
    matching_mode: str
    threshold: float
    num_gt: int
    num_predictions: int


@dataclass(frozen=True)
class MapResult:
    per_class: dict[str, APResult]
    mean_ap: float
    matching_mode: str


def pair_frames(
    ground_truth: dict[str, list[DetectionBox]],
    predictions: dict[str, list[DetectionBox]],
) -> list[FramePair]:
    """Join per-frame box maps on frame id; a missing side is empty."""
    ids = sorted(set(ground_truth) | set(predictions))
    return [
        FramePair.of(fid, predictions.get(fid, ()), ground_truth.get(fid, ()))
        for fid in ids
    ]


def _check_frames(frames: list[FramePair]) -> None:
    ids = [f.frame_id for f in frames]
    if len(set(ids)) != len(ids):
        raise ValueError("frame ids must be unique across the evaluation set")


def _match_frame(
    predictions: list[DetectionBox],
    ground_truth: list[DetectionBox],
    mode: str,
    threshold: float,
) -> list[bool]:
    """True/false-positive flags for predictions in score order."""
    taken = [False] * len(ground_truth)
    flags = []
    for pred in predictions:
        best = -1
        best_metric = None
        for g, gt in enumerate(ground_truth):
            if taken[g]:
                continue
            if mode == "iou":
                m = iou_3d(pred, gt)
                if m < threshold:
                    continue
                if best_metric is None or m > best_metric:
                    best, best_metric = g, m
            else:
                m = center_distance_bev(pred, gt)
                if m > threshold:
                    continue
                if best_metric is None or m < best_metric:
                    best, best_metric = g, m
        if best >= 0:
            taken[best] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _interpolated_ap(recall: np.ndarray, precision: np.ndarray) -> float:
    # Precision envelope from the right, sampled at recall = 0.00 .. 1.00.
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    points = []
    for k in range(101):
        r = k / 100.0
        idx = int(np.searchsorted(recall, r, side="left"))
        points.append(0.0 if idx >= recall.shape[0] else float(envelope[idx]))
    return float(np.sum(np.asarray(points)) / 101.0)


def evaluate_ap(
    frames: list[FramePair],
    class_label: str,
    matching_mode: str = "iou",
    threshold: float | None = None,
) -> APResult:
    """AP for one class over all frames; None if the class has no truth."""
    if class_label not in CLASSES:
        raise ValueError(f"unknown class_label {class_label!r}")
    if matching_mode not in MATCHING_MODES:
        raise ValueError(f"unknown matching_mode {matching_mode!r}")
    if threshold is None:
        if matching_mode == "iou":
            threshold = DEFAULT_IOU_THRESHOLDS[class_label]
        else:
            threshold = DEFAULT_CENTER_THRESHOLD
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    _check_frames(frames)

    outcomes = []  # (score, frame_id, rank) -> tp flag
    num_gt = 0
    num_pred = 0
    for frame in frames:
        preds = [b for b in frame.predictions if b.class_label == class_label]
        gts = [b for b in frame.ground_truth if b.class_label == class_label]
        preds.sort(key=lambda b: (-b.score, b.sort_key()))
        gts.sort(key=lambda b: b.sort_key())
        num_gt += len(gts)
        num_pred += len(preds)
        for rank, flag in enumerate(_match_frame(preds, gts, matching_mode, threshold)):
            outcomes.append((preds[rank].score, frame.frame_id, rank, flag))

    if num_gt == 0:
        return APResult(class_label, None, (), (), matching_mode, threshold, 0, num_pred)
    if not outcomes:
        return APResult(class_label, 0.0, (), (), matching_mode, threshold, num_gt, 0)

    outcomes.sort(key=lambda o: (-o[0], o[1], o[2]))
    tp = np.cumsum([1.0 if o[3] else 0.0 for o in outcomes])
    fp = np.cumsum([0.0 if o[3] else 1.0 for o in outcomes])
    precision = tp / (tp + fp)
    recall = tp / num_gt
    ap = _interpolated_ap(recall, precision)
    return APResult(
        class_label=class_label,
        ap=ap,
        precision_curve=tuple(float(p) for p in precision),
        recall_curve=tuple(float(r) for r in recall),
        matching_mode=matching_mode,
        threshold=threshold,
        num_gt=num_gt,
        num_predictions=num_pred,
    )


def evaluate_map(
    frames: list[FramePair],
    classes: tuple[str, ...] = CLASSES,
    matching_mode: str = "iou",
    thresholds: dict[str, float] | None = None,
) -> MapResult:
    """Per-class AP plus the mean over classes that have ground truth."""
    per_class = {}
    for label in classes:
        threshold = None if thresholds is None else thresholds.get(label)
        per_class[label] = evaluate_ap(frames, label, matching_mode, threshold)
    defined = [r.ap for r in per_class.values() if r.ap is not None]
    if not defined:
        raise ValueError("no evaluable classes: every class lacks ground truth")
    mean_ap = float(np.sum(np.asarray(defined)) / len(defined))
    return MapResult(per_class=per_class, mean_ap=mean_ap, matching_mode=matching_mode)
