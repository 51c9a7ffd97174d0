"""Configuration for the procedural cabin scene generator."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

from ..data.records import CLOTHES_CLASSES, CameraIntrinsics
from ..errors import ConfigError

BELT_MODES = ("normal", "under_arm", "behind_back", "absent")
ABNORMAL_MODES = ("under_arm", "behind_back", "absent")


def default_intrinsics(image_w: int = 640, image_h: int = 480,
                       fx: float = 500.0, fy: float = 500.0) -> CameraIntrinsics:
    return CameraIntrinsics(fx=fx, fy=fy, cx=image_w / 2.0, cy=image_h / 2.0,
                            image_w=image_w, image_h=image_h)


@dataclass(frozen=True)
class GeneratorConfig:
    """All knobs of the synthetic dataset generator.

    The root-depth mixture parameters were calibrated once against the
    target keypoint-depth fractions (64.26% in 500-800 mm, 96.83% in
    400-900 mm) and are fixed as defaults here.
    """

    n_images: int = 2000
    seed: int = 20240
    two_occupant_prob: float = 0.5
    clothes_mix: tuple = (0.34, 0.33, 0.33)  # order matches CLOTHES_CLASSES
    abnormal_belt_rate: float = 0.30
    ir_noise_sigma: float = 3.0
    depth_noise_sigma_mm: float = 2.0
    crop_size: int = 256
    driver_side: str = "left"

    image_w: int = 640
    image_h: int = 480
    fx: float = 500.0
    fy: float = 500.0

    # Keypoint-depth distribution targets (fractions of all keypoints).
    target_frac_500_800: float = 0.6426
    target_frac_400_900: float = 0.9683

    # Root (hip-center) depth sampling law: truncated-normal core plus a
    # uniform shoulder band on either side. Calibrated defaults.
    root_core_weight: float = 0.57
    root_core_mu: float = 650.0
    root_core_sigma: float = 74.0
    root_core_band: tuple = (510.0, 790.0)
    root_shoulder_low: tuple = (445.0, 510.0)
    root_shoulder_high: tuple = (790.0, 880.0)
    root_clamp: tuple = (435.0, 915.0)

    def __post_init__(self):
        if self.n_images < 1:
            raise ConfigError("n_images must be >= 1")
        if not 0.0 <= self.two_occupant_prob <= 1.0:
            raise ConfigError("two_occupant_prob must be in [0, 1]")
        if len(self.clothes_mix) != len(CLOTHES_CLASSES):
            raise ConfigError("clothes_mix must have one share per clothes class")
        if abs(sum(self.clothes_mix) - 1.0) > 1e-9:
            raise ConfigError("clothes_mix shares must sum to 1")
        if any(p < 0 for p in self.clothes_mix):
            raise ConfigError("clothes_mix shares must be nonnegative")
        if not 0.0 <= self.abnormal_belt_rate <= 1.0:
            raise ConfigError("abnormal_belt_rate must be in [0, 1]")
        if self.driver_side not in ("left", "right"):
            raise ConfigError("driver_side must be 'left' or 'right'")
        if not 0.0 < self.root_core_weight <= 1.0:
            raise ConfigError("root_core_weight must be in (0, 1]")

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return default_intrinsics(self.image_w, self.image_h, self.fx, self.fy)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown generator config keys: {sorted(unknown)}")
        coerced = {}
        for key, value in data.items():
            if isinstance(value, list):
                value = tuple(value)
            coerced[key] = value
        return cls(**coerced)

    def with_overrides(self, **kwargs) -> "GeneratorConfig":
        return replace(self, **kwargs)
