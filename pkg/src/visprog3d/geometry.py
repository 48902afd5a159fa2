"""Box overlap, distances and the egocentric look-at camera.

Camera convention: depth axis f points from the eye to the look target,
u axis r = f x up points to the viewer's right, v axis = r x f points up.
Projection is orthographic: (u, v, w) = diag(su, sv, 1) (R p + t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import Aabb, Vec3

ORTHO_TOL = 1e-9
MIN_DIRECTION = 1e-9
MIN_ANGLE = 1e-6


class DegenerateCameraError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CameraPose:
    """World-to-camera transform: camera coords = rotation @ p + translation.

    Only orthonormality is checked. Poses built by ``lookat`` map the
    right-handed world onto (right, up, forward) axes, which makes them
    reflections with determinant -1.
    """
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(R.T @ R, np.eye(3), rtol=0, atol=ORTHO_TOL):
            raise ValueError("rotation is not orthonormal")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))


@dataclass(frozen=True)
class Intrinsics:
    scale_u: float = 1.0
    scale_v: float = 1.0

    def __post_init__(self):
        if not (self.scale_u > 0 and self.scale_v > 0):
            raise ValueError("intrinsic scales must be positive")


@dataclass(frozen=True)
class Projection:
    u: float
    v: float
    w: float


IDENTITY = Intrinsics()


def lookat(eye, target, up=(0.0, 0.0, 1.0)) -> CameraPose:
    eye = np.asarray(eye, dtype=float)
    d = np.asarray(target, dtype=float) - eye
    n = math.sqrt(float(d @ d))
    if n <= MIN_DIRECTION:
        raise DegenerateCameraError("look direction is degenerate (eye == target)")
    f = d / n
    up = np.asarray(up, dtype=float)
    up_n = math.sqrt(float(up @ up))
    if up_n == 0.0:
        raise DegenerateCameraError("up vector is zero")
    side = np.cross(f, up / up_n)
    s = math.sqrt(float(side @ side))
    # |f x up| = sin(angle between them)
    if s <= math.sin(MIN_ANGLE):
        raise DegenerateCameraError("up vector is parallel to the view direction")
    r = side / s
    u = np.cross(r, f)
    R = np.stack([r, u, f])
    return CameraPose(R, -R @ eye)


def project(pose: CameraPose, p, intr: Intrinsics = IDENTITY) -> Projection:
    c = pose.rotation @ np.asarray(p, dtype=float) + pose.translation
    return Projection(float(c[0] * intr.scale_u), float(c[1] * intr.scale_v), float(c[2]))


def project_many(pose: CameraPose, points, intr: Intrinsics = IDENTITY) -> np.ndarray:
    """Rows of (u, v, w) for an (n, 3) array of points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = pts @ pose.rotation.T + pose.translation
    out[:, 0] *= intr.scale_u
    out[:, 1] *= intr.scale_v
    return out


def intersection_volume(a: Aabb, b: Aabb) -> float:
    vol = 1.0
    for lo_a, hi_a, lo_b, hi_b in zip(a.min_corner, a.max_corner, b.min_corner, b.max_corner):
        overlap = min(hi_a, hi_b) - max(lo_a, lo_b)
        if overlap <= 0:
            return 0.0
        vol *= overlap
    return vol


def iou(a: Aabb, b: Aabb) -> float:
    inter = intersection_volume(a, b)
    if inter == 0.0:
        return 0.0
    if a == b:
        return 1.0
    # distinct boxes never round up to a perfect match
    return min(inter / (a.volume + b.volume - inter), math.nextafter(1.0, 0.0))


def footprint_overlap(a: Aabb, b: Aabb) -> float:
    """Area of the xy-plane intersection of two boxes."""
    area = 1.0
    for i in (0, 1):
        overlap = min(a.max_corner[i], b.max_corner[i]) - max(a.min_corner[i], b.min_corner[i])
        if overlap <= 0:
            return 0.0
        area *= overlap
    return area


def footprints_overlap(a: Aabb, b: Aabb, tol: float = 0.0) -> bool:
    """True when the xy footprints overlap by more than ``tol`` along both axes."""
    for i in (0, 1):
        if min(a.max_corner[i], b.max_corner[i]) - max(a.min_corner[i], b.min_corner[i]) <= tol:
            return False
    return True


def distance(p, q) -> float:
    return math.dist(p, q)


def center_distance(a: Aabb, b: Aabb) -> float:
    return math.dist(a.center, b.center)


def centroid(points) -> Vec3:
    pts = list(points)
    if not pts:
        raise ValueError("centroid of an empty point set")
    n = len(pts)
    return Vec3(sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n, sum(p[2] for p in pts) / n)
