"""Grounding datasets, accuracy metrics and error breakdowns."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .executor import Trace
from .geometry import iou
from .scene import Aabb, Scene, SceneFormatError, vec3_from

TAGS = ("easy", "hard", "view_dep", "view_indep")
SPLITS = ("unique", "multiple", "easy", "hard", "view_dep", "view_indep")
WRONG_TARGET = "wrong-target"
DEFAULT_THRESHOLDS = (0.25, 0.5)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class GroundingRecord:
    scene_id: str
    query: str
    gt_object_id: Optional[int] = None
    gt_box: Optional[Aabb] = None
    tags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))
        if self.gt_object_id is None and self.gt_box is None:
            raise DatasetError(f"record {self.query!r} has neither gt_object_id nor gt_box")
        unknown = self.tags - set(TAGS)
        if unknown:
            raise DatasetError(f"unknown tags {sorted(unknown)}")
        if {"easy", "hard"} <= self.tags or {"view_dep", "view_indep"} <= self.tags:
            raise DatasetError(f"contradictory tags {sorted(self.tags)}")

    def describe(self, index: int) -> str:
        return f"record {index} (scene {self.scene_id!r}, query {self.query!r})"


def record_from_dict(d: dict) -> GroundingRecord:
    box = None
    if d.get("gt_box") is not None:
        try:
            box = Aabb(vec3_from(d["gt_box"]["center"], "gt_box.center"),
                       vec3_from(d["gt_box"]["size"], "gt_box.size"))
        except (KeyError, TypeError, SceneFormatError) as exc:
            raise DatasetError(f"bad gt_box: {exc}") from exc
    gid = d.get("gt_object_id")
    if gid is not None and (isinstance(gid, bool) or not isinstance(gid, int)):
        raise DatasetError(f"gt_object_id must be an integer, got {gid!r}")
    return GroundingRecord(str(d["scene_id"]), str(d["query"]), gid, box, frozenset(d.get("tags") or ()))


def load_dataset(data: bytes | str) -> list:
    try:
        doc = json.loads(data)
        rows = doc["records"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DatasetError(f"malformed dataset document: {exc}") from exc
    out = []
    for i, row in enumerate(rows):
        try:
            out.append(record_from_dict(row))
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"record {i}: missing or malformed field {exc}") from exc
        except DatasetError as exc:
            raise DatasetError(f"record {i}: {exc}") from exc
    return out


def check_threshold(t: float) -> float:
    if not 0.0 < t < 1.0:
        raise ValueError(f"IoU threshold must lie in (0, 1), got {t}")
    return t


def acc_at(pairs: Sequence[tuple], iou_threshold: float) -> float:
    """Fraction of (gt_box, predicted_box) pairs with IoU strictly above the threshold.

    A ``None`` prediction is a failed grounding and counts as wrong.
    """
    check_threshold(iou_threshold)
    if not pairs:
        raise ValueError("no predictions to score")
    hits = sum(1 for gt, pred in pairs if pred is not None and iou(pred, gt) > iou_threshold)
    return hits / len(pairs)


def top1_accuracy(pairs: Sequence[tuple]) -> float:
    """Fraction of (gt_id, predicted_id) pairs that agree."""
    if not pairs:
        raise ValueError("no predictions to score")
    for gt, _ in pairs:
        if gt is None:
            raise ValueError("top-1 accuracy needs a ground-truth object id for every record")
    return sum(1 for gt, pred in pairs if pred == gt) / len(pairs)


def unique_multiple_split(scene: Scene, record: GroundingRecord) -> str:
    if record.gt_object_id not in scene.by_id:
        raise DatasetError(f"gt object {record.gt_object_id} not in scene {scene.scene_id!r}")
    label = scene.by_id[record.gt_object_id].label.lower()
    same = sum(1 for o in scene.objects if o.label.lower() == label)
    return "unique" if same == 1 else "multiple"


def gt_box_for(record: GroundingRecord, scene: Scene, index: int = 0) -> Aabb:
    if record.gt_object_id is not None and record.gt_object_id not in scene.by_id:
        raise DatasetError(f"{record.describe(index)}: gt object {record.gt_object_id} "
                           f"is not in scene {scene.scene_id!r}")
    if record.gt_box is not None:
        return record.gt_box
    return scene.by_id[record.gt_object_id].box


def _key(t: float) -> str:
    return f"{t:g}"


@dataclass
class SplitStats:
    n: int
    accuracy: dict
    top1: Optional[float]

    def to_dict(self) -> dict:
        return {"n": self.n, "accuracy": self.accuracy, "top1": self.top1}


@dataclass
class EvalReport:
    n: int
    thresholds: tuple
    accuracy: dict
    top1: Optional[float]
    splits: dict
    error_breakdown: dict
    rows: list = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(self.error_breakdown.values())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "thresholds": list(self.thresholds),
            "accuracy": self.accuracy,
            "top1": self.top1,
            "splits": {k: v.to_dict() for k, v in self.splits.items()},
            "error_breakdown": self.error_breakdown,
            "rows": self.rows,
        }


def _split_stats(rows: list, thresholds: Iterable[float]) -> SplitStats:
    n = len(rows)
    acc = {_key(t): (sum(r["correct"][_key(t)] for r in rows) / n if n else None) for t in thresholds}
    with_id = [r for r in rows if r["gt_object_id"] is not None]
    top1 = sum(r["top1_correct"] for r in with_id) / len(with_id) if with_id else None
    return SplitStats(n, acc, top1)


def report(records: Sequence[GroundingRecord], traces: Sequence[Trace], scenes: dict,
           thresholds: Iterable[float] = DEFAULT_THRESHOLDS) -> EvalReport:
    """Score one trace per record.

    ``scenes`` maps scene ids to scenes. A record counts as an error when its
    trace failed (tallied by failure stage) or grounded the wrong object
    (tallied as wrong-target). Wrongness uses the object id when the record
    has one, otherwise IoU at the largest threshold.
    """
    thresholds = tuple(check_threshold(t) for t in thresholds)
    if not thresholds:
        raise ValueError("at least one IoU threshold is required")
    if len(records) != len(traces):
        raise ValueError(f"{len(records)} records but {len(traces)} traces")
    strictest = max(thresholds)
    rows = []
    breakdown: dict = {}
    for i, (rec, trace) in enumerate(zip(records, traces)):
        if rec.scene_id not in scenes:
            raise DatasetError(f"{rec.describe(i)}: unknown scene")
        scene = scenes[rec.scene_id]
        gt = gt_box_for(rec, scene, i)
        pred_box = trace.outcome.box if trace.success else None
        overlap = iou(pred_box, gt) if pred_box is not None else 0.0
        row = {
            "index": i,
            "scene_id": rec.scene_id,
            "query": rec.query,
            "gt_object_id": rec.gt_object_id,
            "predicted_id": trace.target_id if trace.success else None,
            "status": trace.outcome.status,
            "iou": overlap,
            "correct": {_key(t): pred_box is not None and overlap > t for t in thresholds},
            "top1_correct": trace.success and rec.gt_object_id is not None
                            and trace.target_id == rec.gt_object_id,
            "split": unique_multiple_split(scene, rec) if rec.gt_object_id is not None else None,
            "tags": sorted(rec.tags),
            "error": None,
        }
        if not trace.success:
            row["error"] = trace.failure_stage
        elif rec.gt_object_id is not None:
            row["error"] = None if row["top1_correct"] else WRONG_TARGET
        elif not row["correct"][_key(strictest)]:
            row["error"] = WRONG_TARGET
        if row["error"]:
            breakdown[row["error"]] = breakdown.get(row["error"], 0) + 1
        rows.append(row)

    with_id = [r for r in rows if r["gt_object_id"] is not None]
    splits = {}
    for name in SPLITS:
        members = [r for r in rows if r["split"] == name or name in r["tags"]]
        splits[name] = _split_stats(members, thresholds)
    return EvalReport(
        n=len(rows),
        thresholds=thresholds,
        accuracy={_key(t): sum(r["correct"][_key(t)] for r in rows) / len(rows) if rows else None
                  for t in thresholds},
        top1=sum(r["top1_correct"] for r in with_id) / len(with_id) if with_id else None,
        splits=splits,
        error_breakdown=dict(sorted(breakdown.items())),
        rows=rows,
    )


def format_report(rep: EvalReport) -> str:
    def pct(v):
        return "  -  " if v is None else f"{100 * v:5.1f}"

    keys = [_key(t) for t in rep.thresholds]
    lines = [f"records: {rep.n}"]
    header = f"{'split':<12}{'n':>5}" + "".join(f"{'Acc@' + k:>10}" for k in keys) + f"{'top-1':>10}"
    lines.append(header)
    lines.append(f"{'overall':<12}{rep.n:>5}" + "".join(f"{pct(rep.accuracy[k]):>10}" for k in keys)
                 + f"{pct(rep.top1):>10}")
    for name, s in rep.splits.items():
        lines.append(f"{name:<12}{s.n:>5}" + "".join(f"{pct(s.accuracy[k]):>10}" for k in keys)
                     + f"{pct(s.top1):>10}")
    if rep.error_breakdown:
        lines.append("errors: " + ", ".join(f"{k}={v}" for k, v in rep.error_breakdown.items()))
    else:
        lines.append("errors: none")
    return "\n".join(lines)
