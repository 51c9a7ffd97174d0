"""Scene sampling: occupant specs with bounded articulation and calibrated depths."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..data.records import CLOTHES_CLASSES, CameraIntrinsics
from ..errors import DegenerateSceneError
from .config import ABNORMAL_MODES, BELT_MODES, GeneratorConfig
from .skeleton import Skeleton, build_skeleton

FRAME_MARGIN_PX = 6.0
KEYPOINT_DEPTH_MIN = 350.0
KEYPOINT_DEPTH_MAX = 1000.0
_MAX_POSE_TRIES = 60


@dataclass(frozen=True)
class OccupantSpec:
    seat_role: str
    joint_angles: dict
    torso_root_depth_mm: float
    clothes_class: str
    belt_mode: str
    limb_thickness_px: float

    @property
    def belt_status(self) -> str:
        return "normal" if self.belt_mode == "normal" else "abnormal"

    def skeleton(self) -> Skeleton:
        return build_skeleton(self.joint_angles, self.torso_root_depth_mm)


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    occupants: tuple  # OccupantSpec, driver first
    intrinsics: CameraIntrinsics


def sample_root_depth(rng: np.random.Generator, cfg: GeneratorConfig) -> float:
    """Draw a hip-center depth from the calibrated core+shoulder mixture."""
    lo, hi = cfg.root_clamp
    if rng.random() < cfg.root_core_weight:
        b0, b1 = cfg.root_core_band
        while True:
            z = rng.normal(cfg.root_core_mu, cfg.root_core_sigma)
            if b0 <= z <= b1:
                break
    else:
        w_low = cfg.root_shoulder_low[1] - cfg.root_shoulder_low[0]
        w_high = cfg.root_shoulder_high[1] - cfg.root_shoulder_high[0]
        band = cfg.root_shoulder_low if rng.random() < w_low / (w_low + w_high) \
            else cfg.root_shoulder_high
        z = rng.uniform(band[0], band[1])
    return float(min(max(z, lo), hi))


def _sample_pose(rng: np.random.Generator, seat_sign: float) -> dict:
    u = rng.uniform
    deg = math.radians
    return {
        "seat_angle": seat_sign * (deg(13.0) + rng.normal(0.0, deg(1.2))),
        "hip_jitter_x": rng.normal(0.0, 0.012),
        "hip_drop": u(0.30, 0.36),
        "torso_yaw": u(-deg(22), deg(22)),
        "torso_pitch": u(-deg(9), deg(7)),
        "torso_roll": u(-deg(7), deg(7)),
        "head_yaw": u(-deg(35), deg(35)),
        "head_pitch": u(-deg(15), deg(15)),
        "torso_len": u(0.37, 0.43),
        "shoulder_w": u(0.30, 0.36),
        "hip_w": u(0.25, 0.30),
        "neck_len": 0.06,
        "head_r": u(0.085, 0.100),
        "upper_len": u(0.25, 0.29),
        "fore_len": u(0.23, 0.28),
        "l_abduction": u(deg(4), deg(20)),
        "l_flexion": u(0.0, deg(40)),
        "l_wrist_vx": u(-0.75, 0.20),
        "l_wrist_vy": u(-0.15, 0.60),
        "l_wrist_vz": u(-0.55, 0.15),
        "r_abduction": u(deg(4), deg(20)),
        "r_flexion": u(0.0, deg(40)),
        "r_wrist_vx": u(-0.75, 0.20),
        "r_wrist_vy": u(-0.15, 0.60),
        "r_wrist_vz": u(-0.55, 0.15),
        "belt_halfwidth_px": u(8.0, 12.0),
    }


def scene_fits_frame(skel: Skeleton, intr: CameraIntrinsics,
                     margin: float = FRAME_MARGIN_PX) -> bool:
    pts = skel.project(intr)
    if not (pts[:, 0] >= margin).all() or not (pts[:, 0] <= intr.image_w - margin).all():
        return False
    if not (pts[:, 1] >= margin).all() or not (pts[:, 1] <= intr.image_h - margin).all():
        return False
    # Head disc must fit too (it extends above the eye/ear keypoints).
    hx = skel.head_center[0] * intr.fx / skel.head_center[2] + intr.cx
    hy = skel.head_center[1] * intr.fy / skel.head_center[2] + intr.cy
    r_px = skel.head_radius_mm * intr.fx / skel.head_center[2]
    return (hx - r_px >= 2 and hx + r_px <= intr.image_w - 2
            and hy - r_px >= 2 and hy + r_px <= intr.image_h - 2)


def depths_in_band(skel: Skeleton) -> bool:
    z = skel.joints[:, 2]
    return bool((z >= KEYPOINT_DEPTH_MIN).all() and (z <= KEYPOINT_DEPTH_MAX).all())


def _sample_occupant(rng: np.random.Generator, role: str,
                     cfg: GeneratorConfig) -> OccupantSpec:
    driver_sign = -1.0 if cfg.driver_side == "left" else 1.0
    seat_sign = driver_sign if role == "driver" else -driver_sign

    clothes = CLOTHES_CLASSES[rng.choice(len(CLOTHES_CLASSES), p=list(cfg.clothes_mix))]
    if rng.random() < cfg.abnormal_belt_rate:
        belt_mode = ABNORMAL_MODES[rng.integers(len(ABNORMAL_MODES))]
    else:
        belt_mode = "normal"
    thickness = float(rng.uniform(9.0, 14.0))

    root = sample_root_depth(rng, cfg)
    intr = cfg.intrinsics
    for attempt in range(_MAX_POSE_TRIES):
        pose = _sample_pose(rng, seat_sign)
        skel = build_skeleton(pose, root)
        if scene_fits_frame(skel, intr) and depths_in_band(skel):
            return OccupantSpec(seat_role=role, joint_angles=pose,
                                torso_root_depth_mm=root, clothes_class=clothes,
                                belt_mode=belt_mode, limb_thickness_px=thickness)
        if attempt % 20 == 19:  # pose ranges exhausted at this depth; nudge the root
            root = sample_root_depth(rng, cfg)
    raise DegenerateSceneError(
        f"could not fit a {role} occupant in frame after {_MAX_POSE_TRIES} tries")


def generate_scene(seed: int, config: GeneratorConfig,
                   force_two: bool = None) -> SceneSpec:
    """Deterministically sample one cabin scene from (seed, config)."""
    rng = np.random.default_rng(seed)
    two = rng.random() < config.two_occupant_prob if force_two is None else force_two
    roles = ("driver", "passenger") if two else ("driver",)
    occupants = tuple(_sample_occupant(rng, role, config) for role in roles)
    return SceneSpec(seed=seed, occupants=occupants, intrinsics=config.intrinsics)


def scene_keypoint_depths(scene: SceneSpec) -> np.ndarray:
    """Depths (mm) of all keypoints of all occupants in the scene."""
    return np.concatenate([occ.skeleton().joints[:, 2] for occ in scene.occupants])


def with_assignments(scene: SceneSpec, clothes=None, belt_modes=None) -> SceneSpec:
    """Replace per-occupant clothes/belt fields (used by dataset-level quotas)."""
    occs = []
    for i, occ in enumerate(scene.occupants):
        kwargs = {}
        if clothes is not None:
            kwargs["clothes_class"] = clothes[i]
        if belt_modes is not None:
            kwargs["belt_mode"] = belt_modes[i]
        occs.append(replace(occ, **kwargs) if kwargs else occ)
    return replace(scene, occupants=tuple(occs))
