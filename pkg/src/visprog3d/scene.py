"""Scenes as sets of labeled axis-aligned boxes (z is up)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, NamedTuple


class SceneFormatError(ValueError):
    pass


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, other):  # type: ignore[override]
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)


@dataclass(frozen=True)
class Aabb:
    center: Vec3
    size: Vec3  # full extents (width, length, height)

    def __post_init__(self):
        object.__setattr__(self, "center", Vec3(*map(float, self.center)))
        object.__setattr__(self, "size", Vec3(*map(float, self.size)))
        if not all(math.isfinite(c) for c in (*self.center, *self.size)):
            raise SceneFormatError("box values must be finite")
        if any(s <= 0 for s in self.size):
            raise SceneFormatError(f"box size must be positive, got {tuple(self.size)}")

    @property
    def min_corner(self) -> Vec3:
        return Vec3(*(c - s / 2 for c, s in zip(self.center, self.size)))

    @property
    def max_corner(self) -> Vec3:
        return Vec3(*(c + s / 2 for c, s in zip(self.center, self.size)))

    @property
    def volume(self) -> float:
        return self.size.x * self.size.y * self.size.z

    @classmethod
    def from_corners(cls, lo: Iterable[float], hi: Iterable[float]) -> "Aabb":
        lo, hi = tuple(lo), tuple(hi)
        return cls(Vec3(*((a + b) / 2 for a, b in zip(lo, hi))),
                   Vec3(*(b - a for a, b in zip(lo, hi))))


@dataclass(frozen=True)
class ObjectInstance:
    id: int
    label: str
    box: Aabb
    attributes: frozenset = frozenset()
    image_refs: tuple = ()

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id < 0:
            raise SceneFormatError(f"object id must be a non-negative integer, got {self.id!r}")
        label = str(self.label).strip().lower()
        if not label:
            raise SceneFormatError(f"object {self.id} has an empty label")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "attributes", frozenset(str(a).strip().lower() for a in self.attributes))
        object.__setattr__(self, "image_refs", tuple(str(r) for r in self.image_refs))


@dataclass(frozen=True)
class Scene:
    scene_id: str
    objects: tuple = ()
    up_axis: str = field(default="z")

    def __post_init__(self):
        objs = tuple(sorted(self.objects, key=lambda o: o.id))
        object.__setattr__(self, "objects", objs)
        if self.up_axis != "z":
            raise SceneFormatError(f"unsupported up_axis {self.up_axis!r}; only 'z' is allowed")
        seen = set()
        for o in objs:
            if o.id in seen:
                raise SceneFormatError(f"duplicate object id {o.id}")
            seen.add(o.id)

    @cached_property
    def by_id(self) -> dict:
        return {o.id: o for o in self.objects}

    def get(self, object_id: int) -> ObjectInstance:
        try:
            return self.by_id[object_id]
        except KeyError:
            raise KeyError(f"scene {self.scene_id!r} has no object {object_id}") from None

    @property
    def labels(self) -> set:
        return {o.label for o in self.objects}

    def room_box(self) -> Aabb:
        if not self.objects:
            raise ValueError(f"scene {self.scene_id!r} has no objects")
        lo = [min(o.box.min_corner[i] for o in self.objects) for i in range(3)]
        hi = [max(o.box.max_corner[i] for o in self.objects) for i in range(3)]
        return Aabb.from_corners(lo, hi)


def room_center(scene: Scene) -> Vec3:
    """Center of the tightest box enclosing every object box."""
    return scene.room_box().center


def narrate(scene: Scene) -> str:
    lines = []
    for o in scene.objects:
        c, s = o.box.center, o.box.size
        lines.append(
            f"Object {o.id} is a {o.label} located at ({c.x:.2f}, {c.y:.2f}, {c.z:.2f}) "
            f"with sizes ({s.x:.2f}, {s.y:.2f}, {s.z:.2f})."
        )
    return "\n".join(lines)


# -- interchange format -------------------------------------------------------

def vec3_from(value: Any, what: str) -> Vec3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SceneFormatError(f"{what} must be a list of 3 numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SceneFormatError(f"{what} must contain numbers, got {v!r}")
        out.append(float(v))
    return Vec3(*out)


def object_from_dict(d: dict) -> ObjectInstance:
    if not isinstance(d, dict):
        raise SceneFormatError("each object must be a mapping")
    missing = {"id", "label", "center", "size"} - d.keys()
    if missing:
        raise SceneFormatError(f"object missing fields: {sorted(missing)}")
    attrs = d.get("attributes") or []
    refs = d.get("image_refs") or []
    if not isinstance(attrs, list) or not isinstance(refs, list):
        raise SceneFormatError("attributes and image_refs must be lists")
    if not isinstance(d["label"], str):
        raise SceneFormatError("label must be a string")
    return ObjectInstance(
        id=d["id"],
        label=d["label"],
        box=Aabb(vec3_from(d["center"], "center"), vec3_from(d["size"], "size")),
        attributes=frozenset(attrs),
        image_refs=tuple(refs),
    )


def object_to_dict(o: ObjectInstance) -> dict:
    d: dict = {
        "id": o.id,
        "label": o.label,
        "center": list(o.box.center),
        "size": list(o.box.size),
    }
    if o.attributes:
        d["attributes"] = sorted(o.attributes)
    if o.image_refs:
        d["image_refs"] = list(o.image_refs)
    return d


def scene_from_dict(doc: Any) -> Scene:
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a mapping")
    if "scene_id" not in doc or not isinstance(doc["scene_id"], str):
        raise SceneFormatError("scene_id must be a string")
    if doc.get("up_axis", "z") != "z":
        raise SceneFormatError(f"unknown up_axis {doc.get('up_axis')!r}")
    objs = doc.get("objects")
    if not isinstance(objs, list) or not objs:
        raise SceneFormatError("objects must be a nonempty list")
    return Scene(doc["scene_id"], tuple(object_from_dict(o) for o in objs))


def scene_to_dict(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "up_axis": scene.up_axis,
        "objects": [object_to_dict(o) for o in scene.objects],
    }


def load_scene(data: bytes | str) -> Scene:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SceneFormatError(f"malformed scene document: {exc}") from exc
    return scene_from_dict(doc)


def save_scene(scene: Scene) -> bytes:
    return json.dumps(scene_to_dict(scene), indent=2).encode()
