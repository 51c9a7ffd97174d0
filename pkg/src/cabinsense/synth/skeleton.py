"""Forward kinematics of the 13-joint stick-figure occupant.

Camera space: x right, y down, z away from the camera (depth), millimeters.
Body dimensions scale linearly with the root depth so that occupants fill a
comparable pixel extent at every depth, which keeps all joints inside the
frame across the whole depth band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data.records import KEYPOINT_NAMES, CameraIntrinsics

# joint_angles keys produced by the scene sampler, all floats:
#   seat_angle, hip_jitter_x, hip_drop,
#   torso_yaw, torso_pitch, torso_roll, head_yaw, head_pitch,
#   torso_len, shoulder_w, hip_w, neck_len, head_r,
#   upper_len, fore_len,
#   {l,r}_abduction, {l,r}_flexion, {l,r}_elbow_bend, {l,r}_bend_dir,
#   belt_halfwidth_px


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


@dataclass(frozen=True)
class Skeleton:
    """Joint positions of one occupant in camera millimeters."""

    joints: np.ndarray  # (13, 3) in canonical keypoint order
    head_center: np.ndarray  # (3,)
    head_radius_mm: float
    shoulder_center: np.ndarray
    hip_center: np.ndarray

    def joint(self, name: str) -> np.ndarray:
        return self.joints[KEYPOINT_NAMES.index(name)]

    def project(self, intr: CameraIntrinsics) -> np.ndarray:
        """(13, 2) pixel coordinates of all joints."""
        z = self.joints[:, 2]
        x = self.joints[:, 0] * intr.fx / z + intr.cx
        y = self.joints[:, 1] * intr.fy / z + intr.cy
        return np.stack([x, y], axis=1)


def _arm_chain(shoulder, right, up, fwd, side_sign, params, upper_len, fore_len):
    a = params["abduction"]
    flex = params["flexion"]
    d1 = (side_sign * right * math.sin(a)
          - up * math.cos(a) * math.cos(flex)
          + fwd * math.cos(a) * math.sin(flex))
    d1 = d1 / np.linalg.norm(d1)
    elbow = shoulder + d1 * upper_len
    # Forearm as a bounded offset in the torso frame: vx > 0 points away from
    # the body midline, vy > 0 down, vz > 0 away from the camera.
    v = np.array([params["wrist_vx"], params["wrist_vy"], params["wrist_vz"]])
    n = np.linalg.norm(v)
    v = v * (min(max(n, 0.45), 1.0) / max(n, 1e-9))
    offset = side_sign * v[0] * right - v[1] * up - v[2] * fwd
    wrist = elbow + fore_len * offset
    return elbow, wrist


def build_skeleton(joint_angles: dict, root_depth_mm: float) -> Skeleton:
    """Place all 13 joints from articulation parameters and the root depth."""
    p = joint_angles
    z = root_depth_mm

    seat_x = z * math.tan(p["seat_angle"])
    hip_center = np.array([seat_x + p["hip_jitter_x"] * z,
                           p["hip_drop"] * z, z])

    rot = _rot_z(p["torso_roll"]) @ _rot_x(p["torso_pitch"]) @ _rot_y(p["torso_yaw"])
    right = rot @ np.array([1.0, 0.0, 0.0])
    up = rot @ np.array([0.0, -1.0, 0.0])
    fwd = rot @ np.array([0.0, 0.0, -1.0])

    torso_len = p["torso_len"] * z
    shoulder_w = p["shoulder_w"] * z
    hip_w = p["hip_w"] * z
    neck_len = p["neck_len"] * z
    head_r = p["head_r"] * z

    shoulder_center = hip_center + up * torso_len
    l_sho = shoulder_center + right * (shoulder_w / 2)
    r_sho = shoulder_center - right * (shoulder_w / 2)
    l_hip = hip_center + right * (hip_w / 2)
    r_hip = hip_center - right * (hip_w / 2)

    head_center = shoulder_center + up * (neck_len + head_r * 0.7)
    hrot = rot @ _rot_x(p["head_pitch"]) @ _rot_y(p["head_yaw"])
    h_right = hrot @ np.array([1.0, 0.0, 0.0])
    h_up = hrot @ np.array([0.0, -1.0, 0.0])
    h_fwd = hrot @ np.array([0.0, 0.0, -1.0])

    nose = head_center + h_fwd * head_r * 0.55 - h_up * head_r * 0.12
    l_eye = head_center + h_right * head_r * 0.34 + h_up * head_r * 0.22 + h_fwd * head_r * 0.38
    r_eye = head_center - h_right * head_r * 0.34 + h_up * head_r * 0.22 + h_fwd * head_r * 0.38
    l_ear = head_center + h_right * head_r * 0.78 + h_up * head_r * 0.02
    r_ear = head_center - h_right * head_r * 0.78 + h_up * head_r * 0.02
    # Face joints share the rendered head disc's depth plane.
    for pt in (nose, l_eye, r_eye, l_ear, r_ear):
        pt[2] = head_center[2]

    upper_len = p["upper_len"] * z
    fore_len = p["fore_len"] * z
    l_elbow, l_wrist = _arm_chain(
        l_sho, right, up, fwd, +1.0,
        {"abduction": p["l_abduction"], "flexion": p["l_flexion"],
         "wrist_vx": p["l_wrist_vx"], "wrist_vy": p["l_wrist_vy"],
         "wrist_vz": p["l_wrist_vz"]},
        upper_len, fore_len)
    r_elbow, r_wrist = _arm_chain(
        r_sho, right, up, fwd, -1.0,
        {"abduction": p["r_abduction"], "flexion": p["r_flexion"],
         "wrist_vx": p["r_wrist_vx"], "wrist_vy": p["r_wrist_vy"],
         "wrist_vz": p["r_wrist_vz"]},
        upper_len, fore_len)

    joints = np.stack([
        nose, l_eye, r_eye, l_ear, r_ear,
        l_sho, r_sho, l_elbow, r_elbow, l_wrist, r_wrist,
        l_hip, r_hip,
    ])
    return Skeleton(joints=joints, head_center=head_center,
                    head_radius_mm=head_r, shoulder_center=shoulder_center,
                    hip_center=hip_center)
