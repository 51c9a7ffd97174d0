"""Geometric transforms between full-frame, crop and camera-millimeter spaces."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import CropError
from .records import (
    BeltMask,
    CameraIntrinsics,
    CropTransform,
    PersonAnnotation,
    PersonCrop,
    SampleRecord,
)


def normalize_ir(raw: np.ndarray) -> np.ndarray:
    """Min/max-normalize an IR raster to [0, 1]; constant inputs map to zeros."""
    raw = np.asarray(raw, dtype=np.float64)
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def sample_depth_at(depth_raster: np.ndarray, points: Sequence) -> list:
    """Nearest-pixel depth lookup: ``raster[round(y), round(x)]`` per point."""
    h, w = depth_raster.shape
    out = []
    for i, (x, y) in enumerate(points):
        r, c = int(round(float(y))), int(round(float(x)))
        if not (0 <= r < h and 0 <= c < w):
            raise IndexError(f"point {i} at ({x}, {y}) outside raster {w}x{h}")
        out.append(float(depth_raster[r, c]))
    return out


def bilinear_resample(image: np.ndarray, transform: CropTransform, size: int) -> np.ndarray:
    """Resample ``image`` onto a size x size grid through a crop transform.

    Output pixel centers (c + 0.5, r + 0.5) are mapped to full-frame
    coordinates and sampled bilinearly between source pixel centers, with
    borders clamped.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    cs = np.arange(size, dtype=np.float64) + 0.5
    xs = transform.x0 + transform.sx * cs - 0.5  # source pixel-index space
    ys = transform.y0 + transform.sy * cs - 0.5
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    # Outer products via broadcasting: rows index y, cols index x.
    tl = img[np.ix_(y0c, x0c)]
    tr = img[np.ix_(y0c, x1c)]
    bl = img[np.ix_(y1c, x0c)]
    br = img[np.ix_(y1c, x1c)]
    fxr = fx[None, :]
    fyr = fy[:, None]
    top = tl * (1 - fxr) + tr * fxr
    bot = bl * (1 - fxr) + br * fxr
    return top * (1 - fyr) + bot * fyr


def crop_window(bbox: tuple, frame_w: int, frame_h: int, margin: float) -> tuple:
    """Square window around a bbox, intersected with the frame.

    Returns (wx0, wy0, wx1, wy1) in continuous full-frame coordinates.
    """
    bx, by, bw, bh = bbox
    cx = bx + bw / 2.0
    cy = by + bh / 2.0
    side = max(bw, bh) * margin
    wx0 = max(cx - side / 2.0, 0.0)
    wy0 = max(cy - side / 2.0, 0.0)
    wx1 = min(cx + side / 2.0, float(frame_w))
    wy1 = min(cy + side / 2.0, float(frame_h))
    if wx1 <= wx0 or wy1 <= wy0:
        raise CropError(f"bbox {bbox} does not intersect the {frame_w}x{frame_h} frame")
    return wx0, wy0, wx1, wy1


def crop_person(sample: SampleRecord, ann: PersonAnnotation, crop_size: int,
                margin: float = 1.25):
    """Cut a normalized square crop around one person.

    The bbox is padded to a square, enlarged by ``margin`` about its center,
    clipped to the frame and resampled bilinearly. Returns the crop, the
    keypoints mapped into crop coordinates ((13, 4) array of x, y, v, depth)
    and the belt polygons mapped the same way.
    """
    wx0, wy0, wx1, wy1 = crop_window(
        ann.bbox, sample.intrinsics.image_w, sample.intrinsics.image_h, margin)
    transform = CropTransform(wx0, wy0,
                              (wx1 - wx0) / crop_size, (wy1 - wy0) / crop_size)
    pixels = bilinear_resample(sample.ir_image, transform, crop_size)
    pixels = normalize_ir(pixels)
    crop = PersonCrop(pixels=pixels, transform=transform,
                      source=(sample.image_id, ann.person_id))

    kps = ann.keypoint_array()
    kps[:, :2] = transform.to_crop(kps[:, :2])
    polys = tuple(transform.to_crop(np.asarray(p, dtype=np.float64))
                  for p in ann.belt_polygons)
    return crop, kps, polys


def polygon_interior_mask(vertices: np.ndarray, resolution: tuple) -> np.ndarray:
    """Even-odd interior test at pixel centers for one polygon.

    Crossing-number ray cast along +x, vectorized over the polygon's pixel
    bounding box.
    """
    h, w = resolution
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return np.zeros((h, w), dtype=bool)
    c0 = max(int(np.floor(v[:, 0].min() - 0.5)), 0)
    c1 = min(int(np.ceil(v[:, 0].max() + 0.5)), w)
    r0 = max(int(np.floor(v[:, 1].min() - 0.5)), 0)
    r1 = min(int(np.ceil(v[:, 1].max() + 0.5)), h)
    out = np.zeros((h, w), dtype=bool)
    if c1 <= c0 or r1 <= r0:
        return out
    px = np.arange(c0, c1, dtype=np.float64) + 0.5
    py = np.arange(r0, r1, dtype=np.float64) + 0.5
    gx = px[None, :]
    gy = py[:, None]
    inside = np.zeros((r1 - r0, c1 - c0), dtype=bool)
    xj, yj = v[-1]
    for xi, yi in v:
        crosses = (yi > gy) != (yj > gy)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = (xj - xi) * (gy - yi) / (yj - yi) + xi
        inside ^= crosses & (gx < x_at)
        xj, yj = xi, yi
    out[r0:r1, c0:c1] = inside
    return out


def rasterize_polygons(polygons: Sequence, transform: CropTransform,
                       resolution: tuple) -> BeltMask:
    """Fill the union of polygons into a binary mask.

    ``transform`` maps mask coordinates to the space the polygon vertices
    live in; each polygon is pulled into mask space before the even-odd fill.
    An empty polygon list yields an all-zero mask.
    """
    h, w = resolution
    acc = np.zeros((h, w), dtype=bool)
    for poly in polygons:
        pts = np.asarray(poly, dtype=np.float64)
        if pts.shape[0] < 3:
            continue
        acc |= polygon_interior_mask(transform.to_crop(pts), (h, w))
    return BeltMask(mask=acc.astype(np.uint8))


def pixel_to_camera_mm(x: float, y: float, depth_mm: float,
                       intrinsics: CameraIntrinsics) -> tuple:
    """Pinhole back-projection of a pixel with known depth into camera mm."""
    if depth_mm <= 0:
        raise ValueError(f"depth must be positive, got {depth_mm}")
    X = (x - intrinsics.cx) * depth_mm / intrinsics.fx
    Y = (y - intrinsics.cy) * depth_mm / intrinsics.fy
    return X, Y, depth_mm


def camera_mm_to_pixel(X: float, Y: float, Z: float,
                       intrinsics: CameraIntrinsics) -> tuple:
    """Forward pinhole projection; inverse of :func:`pixel_to_camera_mm`."""
    if Z <= 0:
        raise ValueError(f"depth must be positive, got {Z}")
    x = X * intrinsics.fx / Z + intrinsics.cx
    y = Y * intrinsics.fy / Z + intrinsics.cy
    return x, y


def backproject_keypoints(kps_xyvd: np.ndarray,
                          intrinsics: CameraIntrinsics) -> np.ndarray:
    """(13, 4) x, y, v, depth -> (13, 3) camera-mm XYZ (invalid rows zeroed)."""
    out = np.zeros((kps_xyvd.shape[0], 3), dtype=np.float64)
    for i, (x, y, v, d) in enumerate(kps_xyvd):
        if v > 0 and d > 0:
            out[i] = pixel_to_camera_mm(x, y, d, intrinsics)
    return out
