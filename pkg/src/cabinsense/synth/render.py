"""Raster synthesis: depth-buffered capsule figures, belt ribbons, IR shading.

The ToF raster keeps the nearest surface depth per pixel (z-buffer). IR
intensity falls off linearly with depth and is modulated by a per-surface
albedo, then Gaussian noise is added. Keypoint depth labels are sampled from
the *final* depth raster, which makes the label/raster consistency invariant
hold by construction.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from ..data.geometry import sample_depth_at
from ..data.records import (
    KEYPOINT_NAMES,
    CameraIntrinsics,
    Keypoint,
    PersonAnnotation,
    SampleRecord,
)
from ..errors import DegenerateSceneError
from .config import GeneratorConfig
from .scene import SceneSpec
from .skeleton import Skeleton

CLOTHES_ALBEDO = {"jacket_longsleeve": 0.80, "shortsleeve": 1.00, "winter": 0.62}
SKIN_ALBEDO = 1.08
BELT_ALBEDO = 1.40
BACKGROUND_ALBEDO = 0.70
BELT_STANDOFF_MM = 18.0
OCCLUSION_TOLERANCE_MM = 35.0


def _intensity(depth_mm):
    return np.clip(228.0 - 0.13 * (np.asarray(depth_mm, dtype=np.float32) - 350.0),
                   18.0, 255.0)


class _Canvas:
    def __init__(self, w: int, h: int, bg_depth: np.ndarray):
        self.w = w
        self.h = h
        self.zbuf = bg_depth.astype(np.float32)
        self.albedo = np.full((h, w), BACKGROUND_ALBEDO, dtype=np.float32)

    def paint(self, r0, r1, c0, c1, mask, depth, albedo):
        if r1 <= r0 or c1 <= c0:
            return
        zwin = self.zbuf[r0:r1, c0:c1]
        upd = mask & (depth < zwin)
        zwin[upd] = depth[upd]
        awin = self.albedo[r0:r1, c0:c1]
        awin[upd] = albedo


def _window(canvas, xs, ys, pad):
    c0 = max(int(math.floor(min(xs) - pad)), 0)
    c1 = min(int(math.ceil(max(xs) + pad)) + 1, canvas.w)
    r0 = max(int(math.floor(min(ys) - pad)), 0)
    r1 = min(int(math.ceil(max(ys) + pad)) + 1, canvas.h)
    return r0, r1, c0, c1


def _grid(r0, r1, c0, c1):
    gy, gx = np.mgrid[r0:r1, c0:c1]
    return (gx + 0.5).astype(np.float32), (gy + 0.5).astype(np.float32)


def draw_capsule(canvas, p0, p1, z0, z1, radius_px, albedo):
    """Segment p0-p1 (pixels) swept by a disc; depth interpolates endpoints."""
    r0, r1, c0, c1 = _window(canvas, (p0[0], p1[0]), (p0[1], p1[1]), radius_px + 1)
    if r1 <= r0 or c1 <= c0:
        return
    gx, gy = _grid(r0, r1, c0, c1)
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    seg2 = dx * dx + dy * dy
    if seg2 < 1e-12:
        t = np.zeros_like(gx)
    else:
        t = np.clip(((gx - p0[0]) * dx + (gy - p0[1]) * dy) / seg2, 0.0, 1.0)
    px = p0[0] + t * dx
    py = p0[1] + t * dy
    dist2 = (gx - px) ** 2 + (gy - py) ** 2
    mask = dist2 <= radius_px * radius_px
    depth = (z0 + t * (z1 - z0)).astype(np.float32)
    canvas.paint(r0, r1, c0, c1, mask, depth, albedo)


def draw_disc(canvas, center, radius_px, depth_mm, albedo):
    r0, r1, c0, c1 = _window(canvas, (center[0],), (center[1],), radius_px + 1)
    if r1 <= r0 or c1 <= c0:
        return
    gx, gy = _grid(r0, r1, c0, c1)
    mask = (gx - center[0]) ** 2 + (gy - center[1]) ** 2 <= radius_px * radius_px
    depth = np.full_like(gx, depth_mm, dtype=np.float32)
    canvas.paint(r0, r1, c0, c1, mask, depth, albedo)


def draw_triangle(canvas, verts_px, depths, albedo):
    """Filled triangle with barycentric depth interpolation."""
    (x0, y0), (x1, y1), (x2, y2) = verts_px
    r0, r1, c0, c1 = _window(canvas, (x0, x1, x2), (y0, y1, y2), 1)
    if r1 <= r0 or c1 <= c0:
        return
    gx, gy = _grid(r0, r1, c0, c1)
    den = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2)
    if abs(den) < 1e-9:
        return
    l0 = ((y1 - y2) * (gx - x2) + (x2 - x1) * (gy - y2)) / den
    l1 = ((y2 - y0) * (gx - x2) + (x0 - x2) * (gy - y2)) / den
    l2 = 1.0 - l0 - l1
    mask = (l0 >= 0) & (l1 >= 0) & (l2 >= 0)
    depth = (l0 * depths[0] + l1 * depths[1] + l2 * depths[2]).astype(np.float32)
    canvas.paint(r0, r1, c0, c1, mask, depth, albedo)


def _ribbon_quad(e0_px, e1_px, halfwidth):
    d = np.asarray(e1_px, dtype=np.float64) - np.asarray(e0_px, dtype=np.float64)
    n = np.linalg.norm(d)
    if n < 1e-9:
        return None
    d = d / n
    perp = np.array([-d[1], d[0]]) * halfwidth
    e0 = np.asarray(e0_px, dtype=np.float64)
    e1 = np.asarray(e1_px, dtype=np.float64)
    return np.array([e0 + perp, e1 + perp, e1 - perp, e0 - perp])


def draw_ribbon(canvas, e0_px, e1_px, z0, z1, halfwidth, albedo):
    """Quad strip between two endpoints, depth lerped along the strip axis."""
    quad = _ribbon_quad(e0_px, e1_px, halfwidth)
    if quad is None:
        return
    r0, r1, c0, c1 = _window(canvas, quad[:, 0], quad[:, 1], 1)
    if r1 <= r0 or c1 <= c0:
        return
    gx, gy = _grid(r0, r1, c0, c1)
    dx, dy = e1_px[0] - e0_px[0], e1_px[1] - e0_px[1]
    seg2 = dx * dx + dy * dy
    t = ((gx - e0_px[0]) * dx + (gy - e0_px[1]) * dy) / seg2
    px = e0_px[0] + t * dx
    py = e0_px[1] + t * dy
    dist2 = (gx - px) ** 2 + (gy - py) ** 2
    mask = (t >= 0.0) & (t <= 1.0) & (dist2 <= halfwidth * halfwidth)
    depth = (z0 + np.clip(t, 0.0, 1.0) * (z1 - z0)).astype(np.float32)
    canvas.paint(r0, r1, c0, c1, mask, depth, albedo)


def clip_polygon_to_frame(poly: np.ndarray, w: int, h: int) -> np.ndarray:
    """Sutherland-Hodgman clipping against the frame rectangle."""
    def clip_edge(pts, inside, intersect):
        out = []
        n = len(pts)
        for i in range(n):
            cur, prv = pts[i], pts[i - 1]
            cin, pin = inside(cur), inside(prv)
            if cin:
                if not pin:
                    out.append(intersect(prv, cur))
                out.append(cur)
            elif pin:
                out.append(intersect(prv, cur))
        return out

    def x_cross(p, q, x):
        t = (x - p[0]) / (q[0] - p[0])
        return (x, p[1] + t * (q[1] - p[1]))

    def y_cross(p, q, y):
        t = (y - p[1]) / (q[1] - p[1])
        return (p[0] + t * (q[0] - p[0]), y)

    pts = [tuple(p) for p in poly]
    for inside, intersect in (
            (lambda p: p[0] >= 0, lambda p, q: x_cross(p, q, 0.0)),
            (lambda p: p[0] <= w, lambda p, q: x_cross(p, q, float(w))),
            (lambda p: p[1] >= 0, lambda p, q: y_cross(p, q, 0.0)),
            (lambda p: p[1] <= h, lambda p, q: y_cross(p, q, float(h)))):
        if not pts:
            break
        pts = clip_edge(pts, inside, intersect)
    return np.asarray(pts, dtype=np.float64)


def _project(pt, intr: CameraIntrinsics):
    return (pt[0] * intr.fx / pt[2] + intr.cx, pt[1] * intr.fy / pt[2] + intr.cy)


def belt_geometry(skel: Skeleton, belt_mode: str, intr: CameraIntrinsics):
    """Ribbon endpoints ((x, y) px + depths) for a belt mode; None if absent."""
    if belt_mode == "absent":
        return None
    pts = skel.project(intr)
    names = list(KEYPOINT_NAMES)
    l_sho, r_sho = names.index("left_shoulder"), names.index("right_shoulder")
    l_hip, r_hip = names.index("left_hip"), names.index("right_hip")
    off_sho = l_sho if abs(pts[l_sho, 0] - intr.cx) >= abs(pts[r_sho, 0] - intr.cx) else r_sho
    same_side_hip = l_hip if off_sho == l_sho else r_hip
    inner_hip = r_hip if off_sho == l_sho else l_hip

    j = skel.joints
    if belt_mode == "normal":
        a, b = j[off_sho], j[inner_hip]
    elif belt_mode == "under_arm":
        a = j[off_sho] + 0.38 * (j[same_side_hip] - j[off_sho])
        b = j[inner_hip]
    elif belt_mode == "behind_back":
        lift = 0.10 * (skel.shoulder_center - skel.hip_center)
        a, b = j[l_hip] + lift, j[r_hip] + lift
    else:
        raise ValueError(f"unknown belt mode {belt_mode!r}")
    za = float(a[2]) - BELT_STANDOFF_MM
    zb = float(b[2]) - BELT_STANDOFF_MM
    return _project(a, intr), _project(b, intr), za, zb


def _background_depth(w, h, rng) -> np.ndarray:
    base = 1150.0 + rng.uniform(-40.0, 40.0)
    tilt = rng.uniform(-60.0, 60.0)
    rows = np.linspace(0.0, 1.0, h, dtype=np.float32)[:, None]
    cols = np.linspace(-0.5, 0.5, w, dtype=np.float32)[None, :]
    return base + 260.0 * rows + tilt * cols


def _draw_occupant(canvas, occ, intr):
    skel = occ.skeleton()
    pts = skel.project(intr)
    j = skel.joints
    names = list(KEYPOINT_NAMES)
    idx = {n: names.index(n) for n in names}
    body_albedo = CLOTHES_ALBEDO[occ.clothes_class]

    # Torso: two triangles over the shoulder/hip quad, widened in pixel space.
    quad_ids = [idx["left_shoulder"], idx["right_shoulder"],
                idx["right_hip"], idx["left_hip"]]
    quad_px = pts[quad_ids]
    centroid = quad_px.mean(axis=0)
    quad_wide = centroid + 1.15 * (quad_px - centroid)
    zq = [float(j[i, 2]) for i in quad_ids]
    draw_triangle(canvas, (quad_wide[0], quad_wide[1], quad_wide[2]),
                  (zq[0], zq[1], zq[2]), body_albedo)
    draw_triangle(canvas, (quad_wide[0], quad_wide[2], quad_wide[3]),
                  (zq[0], zq[2], zq[3]), body_albedo)

    # Neck and head.
    sc_px = _project(skel.shoulder_center, intr)
    hc_px = _project(skel.head_center, intr)
    z_head = float(skel.head_center[2])
    head_r_px = skel.head_radius_mm * intr.fx / z_head
    draw_capsule(canvas, sc_px, hc_px, float(skel.shoulder_center[2]), z_head,
                 head_r_px * 0.35, SKIN_ALBEDO)
    draw_disc(canvas, hc_px, head_r_px, z_head, SKIN_ALBEDO)

    # Arms.
    fore_albedo = SKIN_ALBEDO if occ.clothes_class == "shortsleeve" else body_albedo
    for side in ("left", "right"):
        s, e, w = idx[f"{side}_shoulder"], idx[f"{side}_elbow"], idx[f"{side}_wrist"]
        draw_capsule(canvas, pts[s], pts[e], float(j[s, 2]), float(j[e, 2]),
                     occ.limb_thickness_px, body_albedo)
        draw_capsule(canvas, pts[e], pts[w], float(j[e, 2]), float(j[w, 2]),
                     occ.limb_thickness_px * 0.85, fore_albedo)

    # Belt ribbon, drawn nearer than the torso surface.
    belt = belt_geometry(skel, occ.belt_mode, intr)
    polygons = ()
    if belt is not None:
        e0, e1, z0, z1 = belt
        halfwidth = occ.joint_angles["belt_halfwidth_px"]
        draw_ribbon(canvas, e0, e1, z0, z1, halfwidth, BELT_ALBEDO)
        quad = _ribbon_quad(e0, e1, halfwidth)
        clipped = clip_polygon_to_frame(quad, canvas.w, canvas.h)
        if len(clipped) >= 3:
            polygons = (tuple((float(x), float(y)) for x, y in clipped),)
    return skel, pts, polygons


def render_sample(scene: SceneSpec, config: GeneratorConfig,
                  first_person_id: int = 1, image_id: int = 0) -> SampleRecord:
    """Render one scene to IR + depth rasters with full annotations."""
    intr = scene.intrinsics
    w, h = intr.image_w, intr.image_h
    rng = np.random.default_rng([scene.seed, 0x5EED])

    canvas = _Canvas(w, h, _background_depth(w, h, rng))
    drawn = [_draw_occupant(canvas, occ, intr) for occ in scene.occupants]

    surface_depth = canvas.zbuf.copy()
    depth_noisy = surface_depth + rng.normal(
        0.0, config.depth_noise_sigma_mm, size=surface_depth.shape).astype(np.float32)
    tof = np.clip(np.rint(depth_noisy), 0, 65535).astype(np.uint16)

    ir = _intensity(surface_depth) * canvas.albedo
    ir = ir + rng.normal(0.0, config.ir_noise_sigma, size=ir.shape).astype(np.float32)
    ir = np.clip(np.rint(ir), 0, 255).astype(np.uint8)

    persons = []
    pid = first_person_id
    for occ, (skel, pts, polygons) in zip(scene.occupants, drawn):
        if (pts[:, 0] < 0).any() or (pts[:, 0] >= w).any() \
                or (pts[:, 1] < 0).any() or (pts[:, 1] >= h).any():
            raise DegenerateSceneError(
                f"occupant {occ.seat_role} projects outside the frame")
        depths = sample_depth_at(tof, pts)
        kps = []
        for i, name in enumerate(KEYPOINT_NAMES):
            kin_z = float(skel.joints[i, 2])
            surf = float(surface_depth[int(round(pts[i, 1])), int(round(pts[i, 0]))])
            visible = surf >= kin_z - OCCLUSION_TOLERANCE_MM
            kps.append(Keypoint(name=name, x=float(pts[i, 0]), y=float(pts[i, 1]),
                                v=2 if visible else 1, depth_mm=float(depths[i])))

        hc_px = _project(skel.head_center, intr)
        head_r_px = skel.head_radius_mm * intr.fx / float(skel.head_center[2])
        pad = occ.limb_thickness_px + 3.0
        x0 = min(pts[:, 0].min(), hc_px[0] - head_r_px) - pad
        x1 = max(pts[:, 0].max(), hc_px[0] + head_r_px) + pad
        y0 = min(pts[:, 1].min(), hc_px[1] - head_r_px) - pad
        y1 = max(pts[:, 1].max(), hc_px[1] + head_r_px) + pad
        x0, y0 = max(x0, 0.0), max(y0, 0.0)
        x1, y1 = min(x1, float(w)), min(y1, float(h))
        persons.append(PersonAnnotation(
            person_id=pid, seat_role=occ.seat_role,
            bbox=(x0, y0, x1 - x0, y1 - y0), keypoints=tuple(kps),
            belt_polygons=polygons, belt_status=occ.belt_status,
            clothes_class=occ.clothes_class))
        pid += 1

    return SampleRecord(image_id=image_id, ir_image=ir, tof_depth=tof,
                        persons=tuple(persons), intrinsics=intr)
