"""Text-region placement on the partner's face plane, and display projection.

The text region hangs from the eye line: its top edge is centered on the
midpoint of the outer eye corners and it extends toward the nose, which
keeps it inside the triangle spanned by the eyes and the nose base. All
face-space quantities are millimeters in the camera frame (x right,
y down, z forward); pixel output follows the usual image convention
(origin top-left, v grows downward).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import CameraModel, GeometryConfig

_EPS = 1e-9


class DegenerateFace(ValueError):
    """Landmarks do not define a usable face plane."""


class BehindCamera(ValueError):
    """A region corner has non-positive depth; projection undefined."""


@dataclass(frozen=True)
class FaceObservation:
    t_ms: int
    left_eye_outer: tuple[float, float, float]
    right_eye_outer: tuple[float, float, float]
    nose_base: tuple[float, float, float]


@dataclass(frozen=True)
class TextRegion:
    origin: tuple[float, float, float]       # top-center, unshifted
    right_axis: tuple[float, float, float]   # unit, along the eye line
    down_axis: tuple[float, float, float]    # unit, in-plane toward the nose
    width_mm: float
    height_mm: float
    shift_mm: float = 0.0


@dataclass(frozen=True)
class PixelRect:
    x: float
    y: float
    w: float
    h: float

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


def _vec(p: tuple[float, float, float]) -> np.ndarray:
    return np.asarray(p, dtype=np.float64)


def face_plane_region(obs: FaceObservation, cfg: GeometryConfig) -> TextRegion:
    """Construct the unshifted text region from one landmark observation.

    right_axis runs eye-to-eye; down_axis is the in-plane unit vector
    perpendicular to it on the nose side; the origin is the eye midpoint.
    """
    le, re, nb = _vec(obs.left_eye_outer), _vec(obs.right_eye_outer), _vec(obs.nose_base)
    eye_vec = re - le
    eye_len = float(np.linalg.norm(eye_vec))
    if eye_len < _EPS:
        raise DegenerateFace("eye corners coincide")
    right = eye_vec / eye_len
    origin = (le + re) / 2.0
    nose_vec = nb - origin
    down_vec = nose_vec - float(np.dot(nose_vec, right)) * right
    down_len = float(np.linalg.norm(down_vec))
    if down_len < _EPS:
        raise DegenerateFace("nose base lies on the eye line")
    down = down_vec / down_len
    return TextRegion(
        origin=tuple(origin),
        right_axis=tuple(right),
        down_axis=tuple(down),
        width_mm=cfg.region_width_mm,
        height_mm=cfg.region_height_mm,
        shift_mm=0.0,
    )


def apply_shift(region: TextRegion, lowered: bool, cfg: GeometryConfig) -> TextRegion:
    """Set the downward display offset: cfg.shift_distance_mm when lowered, else 0."""
    return replace(region, shift_mm=cfg.shift_distance_mm if lowered else 0.0)


def region_corners(region: TextRegion) -> np.ndarray:
    """Displayed 3D corners (4, 3): top-left, top-right, bottom-right, bottom-left."""
    origin = _vec(region.origin) + region.shift_mm * _vec(region.down_axis)
    right = _vec(region.right_axis)
    down = _vec(region.down_axis)
    half_w = region.width_mm / 2.0
    top_left = origin - half_w * right
    top_right = origin + half_w * right
    drop = region.height_mm * down
    return np.stack([top_left, top_right, top_right + drop, top_left + drop])


def project(region: TextRegion, cam: CameraModel) -> PixelRect:
    """Axis-aligned pixel bounding box of the projected region corners.

    Pinhole model: u = focal_px * x / z + cx, v = focal_px * y / z + cy.
    """
    corners = region_corners(region)
    z = corners[:, 2]
    if np.any(z <= 0.0):
        raise BehindCamera(f"corner depth min {z.min():.3f} mm")
    cx, cy = cam.principal_point
    u = cam.focal_px * corners[:, 0] / z + cx
    v = cam.focal_px * corners[:, 1] / z + cy
    x0, x1 = float(u.min()), float(u.max())
    y0, y1 = float(v.min()), float(v.max())
    return PixelRect(x=x0, y=y0, w=x1 - x0, h=y1 - y0)


def world_fixed_region(first_obs: FaceObservation, cfg: GeometryConfig) -> TextRegion:
    """Freeze a region beside the head at the first observation.

    The region is the face-plane region offset by cfg.fixed_offset_mm along
    its right axis; it never follows later observations.
    """
    region = face_plane_region(first_obs, cfg)
    origin = _vec(region.origin) + cfg.fixed_offset_mm * _vec(region.right_axis)
    return replace(region, origin=tuple(origin))
