"""Spatial relation modules over sets of scene objects.

Filtering relations (NEAR, LEFT, FRONT, ...) never return an empty set:
when nothing passes the filter they fall back to the single best-ranked
target and mark the result with ``fallback=True``. Selectors (CLOSEST,
LEFTMOST, MIN, ...) always return one object. Ties go to the lowest id;
values within ``EPS`` of each other count as tied.

View-dependent relations look at the scene through a virtual camera placed
at the room center and aimed at the centroid of the anchors, with +z up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .geometry import (
    MIN_ANGLE, MIN_DIRECTION, CameraPose, centroid, center_distance,
    footprints_overlap, lookat, project,
)
from .scene import ObjectInstance, Scene, Vec3, room_center

EPS = 1e-9
UP = Vec3(0.0, 0.0, 1.0)
EYE_NUDGE = Vec3(0.0, -1e-3, 0.0)


class RelationError(ValueError):
    pass


class EmptySetError(RelationError):
    pass


class DegenerateSegmentError(RelationError):
    pass


@dataclass(frozen=True)
class RelationConfig:
    near_threshold: float = 1.5
    contact_gap: float = 0.15
    lr_deadzone: float = 0.0
    between_max_offset: float = 1.0

    def __post_init__(self):
        for name in ("near_threshold", "contact_gap", "lr_deadzone", "between_max_offset"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite number >= 0, got {v!r}")


DEFAULT_CONFIG = RelationConfig()


@dataclass(frozen=True)
class ObjectSet:
    scene: Scene = field(repr=False)
    members: tuple = ()
    fallback: bool = field(default=False, compare=False)
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        unique = {o.id: o for o in self.members}
        for oid, o in unique.items():
            if self.scene.by_id.get(oid) != o:
                raise ValueError(f"object {oid} does not belong to scene {self.scene.scene_id!r}")
        object.__setattr__(self, "members", tuple(unique[i] for i in sorted(unique)))

    @classmethod
    def of_ids(cls, scene: Scene, ids: Iterable[int]) -> "ObjectSet":
        return cls(scene, tuple(scene.get(i) for i in ids))

    @classmethod
    def everything(cls, scene: Scene) -> "ObjectSet":
        return cls(scene, scene.objects)

    @property
    def ids(self) -> tuple:
        return tuple(o.id for o in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


# -- helpers ------------------------------------------------------------------

def _require(*sets: ObjectSet):
    for s in sets:
        if not s.members:
            raise EmptySetError("relation applied to an empty object set")


def argbest(objs: Iterable[ObjectInstance], key: Callable[[ObjectInstance], float], maximize: bool = False):
    objs = list(objs)
    values = [key(o) for o in objs]
    best = max(values) if maximize else min(values)
    for o, v in zip(objs, values):
        if v == best or abs(v - best) <= EPS:
            return o
    raise AssertionError("unreachable")


def _single(targets: ObjectSet, obj: ObjectInstance, fallback: bool = False, notes: tuple = ()) -> ObjectSet:
    return ObjectSet(targets.scene, (obj,), fallback=fallback, notes=notes)


def _filtered(targets: ObjectSet, keep, fallback_obj: Callable[[], ObjectInstance], notes: tuple = ()) -> ObjectSet:
    kept = tuple(t for t in targets if keep(t))
    if kept:
        return ObjectSet(targets.scene, kept, notes=notes)
    return _single(targets, fallback_obj(), fallback=True, notes=notes)


def _min_anchor_distance(t: ObjectInstance, anchors: ObjectSet) -> float:
    # an object is never its own anchor
    return min((center_distance(t.box, a.box) for a in anchors if a.id != t.id), default=math.inf)


def _z(o: ObjectInstance) -> float:
    return o.box.center.z


# -- view-independent ---------------------------------------------------------

def closest(targets: ObjectSet, anchors: ObjectSet) -> ObjectSet:
    _require(targets, anchors)
    return _single(targets, argbest(targets, lambda t: _min_anchor_distance(t, anchors)))


def farthest(targets: ObjectSet, anchors: ObjectSet) -> ObjectSet:
    _require(targets, anchors)
    return _single(targets, argbest(targets, lambda t: _min_anchor_distance(t, anchors), maximize=True))


def near(targets: ObjectSet, anchors: ObjectSet, threshold: Optional[float] = None,
         cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _require(targets, anchors)
    thr = cfg.near_threshold if threshold is None else threshold
    return _filtered(
        targets,
        lambda t: _min_anchor_distance(t, anchors) <= thr + EPS,
        lambda: closest(targets, anchors).members[0],
    )


def far(targets: ObjectSet, anchors: ObjectSet, threshold: Optional[float] = None,
        cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _require(targets, anchors)
    thr = cfg.near_threshold if threshold is None else threshold
    return _filtered(
        targets,
        lambda t: _min_anchor_distance(t, anchors) > thr + EPS,
        lambda: farthest(targets, anchors).members[0],
    )


def _overlapping(t: ObjectInstance, anchors: ObjectSet) -> list:
    return [a for a in anchors if a.id != t.id and footprints_overlap(t.box, a.box, EPS)]


def _vertical_fallback(targets: ObjectSet, anchors: ObjectSet, maximize: bool) -> ObjectInstance:
    stacked = [t for t in targets if _overlapping(t, anchors)]
    return argbest(stacked or targets.members, _z, maximize=maximize)


def above(targets: ObjectSet, anchors: ObjectSet) -> ObjectSet:
    _require(targets, anchors)
    return _filtered(
        targets,
        lambda t: any(_z(t) > _z(a) + EPS for a in _overlapping(t, anchors)),
        lambda: _vertical_fallback(targets, anchors, maximize=True),
    )


def below(targets: ObjectSet, anchors: ObjectSet) -> ObjectSet:
    _require(targets, anchors)
    return _filtered(
        targets,
        lambda t: any(_z(t) < _z(a) - EPS for a in _overlapping(t, anchors)),
        lambda: _vertical_fallback(targets, anchors, maximize=False),
    )


def _gap(t: ObjectInstance, a: ObjectInstance) -> float:
    """Bottom of t minus top of a."""
    return t.box.min_corner.z - a.box.max_corner.z


def on(targets: ObjectSet, anchors: ObjectSet, cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _require(targets, anchors)
    gap = cfg.contact_gap

    def supports(t):
        return [a for a in _overlapping(t, anchors) if _z(t) > _z(a) + EPS]

    def fallback():
        resting = [t for t in targets if supports(t)]
        if resting:
            return argbest(resting, lambda t: min(abs(_gap(t, a)) for a in supports(t)))
        return _vertical_fallback(targets, anchors, maximize=True)

    return _filtered(
        targets,
        lambda t: any(abs(_gap(t, a)) <= gap + EPS for a in supports(t)),
        fallback,
    )


def higher(targets: ObjectSet, anchors: Optional[ObjectSet] = None) -> ObjectSet:
    _require(targets)
    return _single(targets, argbest(targets, _z, maximize=True))


def lower(targets: ObjectSet, anchors: Optional[ObjectSet] = None) -> ObjectSet:
    _require(targets)
    return _single(targets, argbest(targets, _z))


def middle(targets: ObjectSet, anchors: Optional[ObjectSet] = None) -> ObjectSet:
    _require(targets)
    anchors = ObjectSet.everything(targets.scene) if anchors is None else anchors
    _require(anchors)
    c = centroid(a.box.center for a in anchors)
    return _single(targets, argbest(targets, lambda t: math.dist(t.box.center, c)))


# -- view-dependent -----------------------------------------------------------

def egocentric_camera(scene: Scene, anchors: ObjectSet) -> CameraPose:
    """Camera at the room center looking at the anchor centroid.

    When the anchor centroid coincides with the eye, or sits straight above
    or below it, the eye is moved 1 mm along -y so the view is well defined.
    """
    eye = room_center(scene)
    look = centroid(a.box.center for a in anchors)
    d = look - eye
    norm = math.hypot(*d)
    if norm <= MIN_DIRECTION or math.hypot(d.x, d.y) <= norm * math.sin(MIN_ANGLE):
        eye = eye + EYE_NUDGE
    return lookat(eye, look, UP)


def _view(targets: ObjectSet, anchors: Optional[ObjectSet]):
    same = anchors is None or anchors.ids == targets.ids
    anchors = targets if anchors is None else anchors
    _require(targets, anchors)
    pose = egocentric_camera(targets.scene, anchors)
    proj = {t.id: project(pose, t.box.center) for t in targets}
    notes = ("targets-as-anchors",) if same else ()
    return pose, proj, same, anchors, notes


def left(targets: ObjectSet, anchors: Optional[ObjectSet] = None,
         cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _, proj, same, _, notes = _view(targets, anchors)
    leftmost_obj = argbest(targets, lambda t: proj[t.id].u)
    if same:
        return _single(targets, leftmost_obj, notes=notes)
    return _filtered(targets, lambda t: proj[t.id].u < -cfg.lr_deadzone - EPS, lambda: leftmost_obj)


def right(targets: ObjectSet, anchors: Optional[ObjectSet] = None,
          cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _, proj, same, _, notes = _view(targets, anchors)
    rightmost_obj = argbest(targets, lambda t: proj[t.id].u, maximize=True)
    if same:
        return _single(targets, rightmost_obj, notes=notes)
    return _filtered(targets, lambda t: proj[t.id].u > cfg.lr_deadzone + EPS, lambda: rightmost_obj)


def leftmost(targets: ObjectSet) -> ObjectSet:
    return left(targets, None)


def rightmost(targets: ObjectSet) -> ObjectSet:
    return right(targets, None)


def _anchor_depth(pose: CameraPose, anchors: ObjectSet) -> float:
    return project(pose, centroid(a.box.center for a in anchors)).w


def front(targets: ObjectSet, anchors: Optional[ObjectSet] = None) -> ObjectSet:
    pose, proj, _, anchors, notes = _view(targets, anchors)
    wa = _anchor_depth(pose, anchors)
    return _filtered(
        targets,
        lambda t: proj[t.id].w < wa - EPS,
        lambda: argbest(targets, lambda t: proj[t.id].w),
        notes=notes,
    )


def behind(targets: ObjectSet, anchors: Optional[ObjectSet] = None) -> ObjectSet:
    pose, proj, _, anchors, notes = _view(targets, anchors)
    wa = _anchor_depth(pose, anchors)
    return _filtered(
        targets,
        lambda t: proj[t.id].w > wa + EPS,
        lambda: argbest(targets, lambda t: proj[t.id].w, maximize=True),
        notes=notes,
    )


def segment_coordinates(p, a, b) -> tuple[float, float, float]:
    """(s, line distance, segment distance) of point p against segment ab.

    s is the projection parameter along ab (0 at a, 1 at b).
    """
    ab = Vec3(*b) - a
    ap = Vec3(*p) - a
    length2 = ab.x * ab.x + ab.y * ab.y + ab.z * ab.z
    if math.sqrt(length2) <= EPS:
        raise DegenerateSegmentError("between anchors have coincident centroids")
    s = (ap.x * ab.x + ap.y * ab.y + ap.z * ab.z) / length2
    foot = Vec3(*a) + ab.scale(s)
    d_line = math.dist(p, foot)
    if s < 0:
        d_seg = math.dist(p, a)
    elif s > 1:
        d_seg = math.dist(p, b)
    else:
        d_seg = d_line
    return s, d_line, d_seg


def between(targets: ObjectSet, anchors_a: ObjectSet, anchors_b: ObjectSet,
            cfg: RelationConfig = DEFAULT_CONFIG) -> ObjectSet:
    _require(targets, anchors_a, anchors_b)
    a = centroid(o.box.center for o in anchors_a)
    b = centroid(o.box.center for o in anchors_b)
    coords = {t.id: segment_coordinates(t.box.center, a, b) for t in targets}

    def inside(t):
        return -EPS <= coords[t.id][0] <= 1 + EPS

    def fallback():
        spanned = [t for t in targets if inside(t)]
        if spanned:
            return argbest(spanned, lambda t: coords[t.id][1])
        return argbest(targets, lambda t: coords[t.id][2])

    return _filtered(
        targets,
        lambda t: inside(t) and coords[t.id][1] <= cfg.between_max_offset + EPS,
        fallback,
    )


# -- functional ---------------------------------------------------------------

PROPERTY_KEYS: dict[str, Callable[[ObjectInstance], float]] = {
    "SIZE": lambda o: o.box.volume,
    "LENGTH": lambda o: max(o.box.size.x, o.box.size.y),
    "WIDTH": lambda o: min(o.box.size.x, o.box.size.y),
    "HEIGHT": lambda o: o.box.size.z,
}


def extremal(targets: ObjectSet, which: str, prop: str) -> ObjectSet:
    _require(targets)
    which, prop = which.upper(), prop.upper()
    if which not in ("MIN", "MAX"):
        raise ValueError(f"which must be MIN or MAX, got {which!r}")
    if prop not in PROPERTY_KEYS:
        raise ValueError(f"unknown property {prop!r}")
    return _single(targets, argbest(targets, PROPERTY_KEYS[prop], maximize=which == "MAX"))
