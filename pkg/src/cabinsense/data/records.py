"""Core record types for cabin frames and per-person annotations.

Coordinate conventions used throughout the package:

* Continuous image coordinates: pixel ``(row r, col c)`` covers the unit
  square ``[c, c+1) x [r, r+1)`` with its center at ``(c + 0.5, r + 0.5)``.
  An image of width W spans ``x in [0, W]``.
* Bounding boxes ``(x, y, w, h)`` are rectangles ``[x, x+w] x [y, y+h]``.
* Raster lookups at a keypoint use nearest-pixel rounding of ``(x, y)``.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..errors import SchemaError

# Canonical upper-body keypoint set (13 joints, fixed order).
KEYPOINT_NAMES = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
)
NUM_KEYPOINTS = len(KEYPOINT_NAMES)
KEYPOINT_INDEX = {name: i for i, name in enumerate(KEYPOINT_NAMES)}

# Left/right partner indices, used by horizontal-flip augmentation.
FLIP_PAIRS = (
    (1, 2),  # eyes
    (3, 4),  # ears
    (5, 6),  # shoulders
    (7, 8),  # elbows
    (9, 10),  # wrists
    (11, 12),  # hips
)

# Tree connectivity over the 13 joints (12 edges), rooted at the nose.
SKELETON_EDGES = (
    ("nose", "left_eye"),
    ("nose", "right_eye"),
    ("left_eye", "left_ear"),
    ("right_eye", "right_ear"),
    ("nose", "left_shoulder"),
    ("nose", "right_shoulder"),
    ("left_shoulder", "left_elbow"),
    ("left_elbow", "left_wrist"),
    ("right_shoulder", "right_elbow"),
    ("right_elbow", "right_wrist"),
    ("left_shoulder", "left_hip"),
    ("right_shoulder", "right_hip"),
)

SEAT_ROLES = ("driver", "passenger")
BELT_STATUSES = ("normal", "abnormal")
CLOTHES_CLASSES = ("jacket_longsleeve", "shortsleeve", "winter")

# Sanity envelope for annotated keypoint depths (mm).
DEPTH_LABEL_MIN_MM = 200.0
DEPTH_LABEL_MAX_MM = 1500.0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels for one camera frame."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_w: int
    image_h: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise SchemaError("focal lengths must be positive", field="fx/fy")
        if not (0 <= self.cx < self.image_w):
            raise SchemaError("principal point x outside frame", field="cx")
        if not (0 <= self.cy < self.image_h):
            raise SchemaError("principal point y outside frame", field="cy")


@dataclass(frozen=True)
class Keypoint:
    """One annotated joint: full-frame pixels, visibility and absolute depth.

    Visibility: 0 = absent, 1 = occluded but labeled, 2 = visible.
    ``depth_mm`` is only meaningful when ``v > 0``.
    """

    name: str
    x: float
    y: float
    v: int
    depth_mm: float = 0.0

    def __post_init__(self):
        if self.name not in KEYPOINT_INDEX:
            raise SchemaError(f"unknown keypoint name {self.name!r}", field="name")
        if self.v not in (0, 1, 2):
            raise SchemaError(f"visibility must be 0, 1 or 2, got {self.v}", field="v")

    def validate_against(self, intrinsics: CameraIntrinsics, record=None):
        """Check in-frame and depth-envelope invariants for labeled joints."""
        if self.v == 0:
            return
        if not (0 <= self.x < intrinsics.image_w and 0 <= self.y < intrinsics.image_h):
            raise SchemaError(
                f"keypoint {self.name} at ({self.x:.1f}, {self.y:.1f}) outside frame",
                field="keypoints", record=record,
            )
        if not (DEPTH_LABEL_MIN_MM <= self.depth_mm <= DEPTH_LABEL_MAX_MM):
            raise SchemaError(
                f"keypoint {self.name} depth {self.depth_mm:.1f} mm outside "
                f"[{DEPTH_LABEL_MIN_MM:.0f}, {DEPTH_LABEL_MAX_MM:.0f}]",
                field="keypoint_depths", record=record,
            )


@dataclass(frozen=True)
class PersonAnnotation:
    """All labels for one person instance in one frame."""

    person_id: int
    seat_role: str
    bbox: tuple  # (x, y, w, h) in full-frame pixels
    keypoints: tuple  # 13 Keypoint in canonical order
    belt_polygons: tuple = ()  # tuple of vertex tuples ((x, y), ...)
    belt_status: str = "normal"
    clothes_class: str = "jacket_longsleeve"

    def __post_init__(self):
        if self.seat_role not in SEAT_ROLES:
            raise SchemaError(f"unknown seat_role {self.seat_role!r}",
                              field="seat_role", record=self.person_id)
        if self.belt_status not in BELT_STATUSES:
            raise SchemaError(f"unknown belt_status {self.belt_status!r}",
                              field="belt_status", record=self.person_id)
        if self.clothes_class not in CLOTHES_CLASSES:
            raise SchemaError(f"unknown clothes_class {self.clothes_class!r}",
                              field="clothes_class", record=self.person_id)
        if len(self.keypoints) != NUM_KEYPOINTS:
            raise SchemaError("keypoints length != 13",
                              field="keypoints", record=self.person_id)
        for kp, name in zip(self.keypoints, KEYPOINT_NAMES):
            if kp.name != name:
                raise SchemaError(
                    f"keypoint order violated: expected {name}, got {kp.name}",
                    field="keypoints", record=self.person_id)
        x, y, w, h = self.bbox
        if w <= 0 or h <= 0:
            raise SchemaError("bbox must have positive size",
                              field="bbox", record=self.person_id)
        for poly in self.belt_polygons:
            if len(poly) < 3:
                raise SchemaError("belt polygon needs >= 3 vertices",
                                  field="segmentation", record=self.person_id)

    def validate_against(self, intrinsics: CameraIntrinsics):
        x, y, w, h = self.bbox
        if x < 0 or y < 0 or x + w > intrinsics.image_w or y + h > intrinsics.image_h:
            raise SchemaError("bbox outside frame", field="bbox", record=self.person_id)
        for kp in self.keypoints:
            kp.validate_against(intrinsics, record=self.person_id)

    def keypoint(self, name: str) -> Keypoint:
        return self.keypoints[KEYPOINT_INDEX[name]]

    def keypoint_array(self) -> np.ndarray:
        """(13, 4) array of x, y, v, depth_mm."""
        return np.array([(k.x, k.y, k.v, k.depth_mm) for k in self.keypoints],
                        dtype=np.float64)


@dataclass(frozen=True)
class SampleRecord:
    """One cabin frame: IR raster, ToF depth raster and person annotations."""

    image_id: int
    ir_image: np.ndarray  # (H, W) uint8
    tof_depth: np.ndarray  # (H, W) uint16, millimeters
    persons: tuple  # tuple of PersonAnnotation
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        if self.ir_image.shape != self.tof_depth.shape:
            raise SchemaError("IR and depth rasters must share dimensions",
                              field="ir/depth", record=self.image_id)
        h, w = self.ir_image.shape
        if (w, h) != (self.intrinsics.image_w, self.intrinsics.image_h):
            raise SchemaError("raster size does not match intrinsics",
                              field="intrinsics", record=self.image_id)

    def validate(self, depth_tolerance_mm: float = 1.0):
        """Full invariant check, including depth-label/raster consistency."""
        for ann in self.persons:
            ann.validate_against(self.intrinsics)
            for kp in ann.keypoints:
                if kp.v == 0:
                    continue
                r, c = int(round(kp.y)), int(round(kp.x))
                r = min(max(r, 0), self.tof_depth.shape[0] - 1)
                c = min(max(c, 0), self.tof_depth.shape[1] - 1)
                raster_mm = float(self.tof_depth[r, c])
                if abs(raster_mm - kp.depth_mm) > depth_tolerance_mm:
                    raise SchemaError(
                        f"keypoint {kp.name} depth label {kp.depth_mm:.1f} mm "
                        f"disagrees with raster {raster_mm:.1f} mm",
                        field="keypoint_depths", record=ann.person_id)


@dataclass(frozen=True)
class CropTransform:
    """Affine map from crop coordinates to full-frame coordinates.

    ``x_full = x0 + sx * x_crop`` and likewise for y. Always invertible
    (``sx, sy > 0``).
    """

    x0: float
    y0: float
    sx: float
    sy: float

    def __post_init__(self):
        if self.sx <= 0 or self.sy <= 0:
            raise SchemaError("crop transform scales must be positive", field="transform")

    def to_full(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        out = np.empty_like(pts)
        out[..., 0] = self.x0 + self.sx * pts[..., 0]
        out[..., 1] = self.y0 + self.sy * pts[..., 1]
        return out

    def to_crop(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        out = np.empty_like(pts)
        out[..., 0] = (pts[..., 0] - self.x0) / self.sx
        out[..., 1] = (pts[..., 1] - self.y0) / self.sy
        return out

    def inverse(self) -> "CropTransform":
        return CropTransform(-self.x0 / self.sx, -self.y0 / self.sy,
                             1.0 / self.sx, 1.0 / self.sy)

    def compose(self, inner: "CropTransform") -> "CropTransform":
        """Transform equal to applying ``inner`` first, then this one."""
        return CropTransform(self.x0 + self.sx * inner.x0,
                             self.y0 + self.sy * inner.y0,
                             self.sx * inner.sx, self.sy * inner.sy)


@dataclass(frozen=True)
class PersonCrop:
    """Normalized square grayscale crop of a single person."""

    pixels: np.ndarray  # (S, S) float in [0, 1]
    transform: CropTransform  # crop -> full-frame
    source: tuple  # (image_id, person_id)

    @property
    def crop_size(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BeltMask:
    """Binary seat-belt mask at an arbitrary resolution."""

    mask: np.ndarray  # (h, w) uint8 in {0, 1}

    @property
    def resolution(self):
        return self.mask.shape

    def __post_init__(self):
        vals = np.unique(self.mask)
        if not np.isin(vals, (0, 1)).all():
            raise SchemaError("belt mask must be binary", field="mask")


def pelvis_center(ann: PersonAnnotation) -> Optional[tuple]:
    """Mean of the two hip keypoints (x, y, depth); None if neither labeled."""
    hips = [ann.keypoint("left_hip"), ann.keypoint("right_hip")]
    pts = [(k.x, k.y, k.depth_mm) for k in hips if k.v > 0]
    if not pts:
        return None
    arr = np.mean(np.asarray(pts), axis=0)
    return tuple(arr)
