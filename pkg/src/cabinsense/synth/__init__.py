from .config import ABNORMAL_MODES, BELT_MODES, GeneratorConfig, default_intrinsics
from .scene import (
    OccupantSpec,
    SceneSpec,
    generate_scene,
    sample_root_depth,
    scene_keypoint_depths,
    with_assignments,
)
from .skeleton import Skeleton, build_skeleton
from .render import belt_geometry, clip_polygon_to_frame, render_sample
from .generate import (
    DepthStats,
    depth_distribution_stats,
    generate_dataset,
    plan_scenes,
    scene_depth_fractions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
