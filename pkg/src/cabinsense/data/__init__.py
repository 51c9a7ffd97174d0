from .records import (
    BELT_STATUSES,
    CLOTHES_CLASSES,
    DEPTH_LABEL_MAX_MM,
    DEPTH_LABEL_MIN_MM,
    FLIP_PAIRS,
    KEYPOINT_INDEX,
    KEYPOINT_NAMES,
    NUM_KEYPOINTS,
    SEAT_ROLES,
    SKELETON_EDGES,
    BeltMask,
    CameraIntrinsics,
    CropTransform,
    Keypoint,
    PersonAnnotation,
    PersonCrop,
    SampleRecord,
)
from .geometry import (
    backproject_keypoints,
    bilinear_resample,
    camera_mm_to_pixel,
    crop_person,
    crop_window,
    normalize_ir,
    pixel_to_camera_mm,
    polygon_interior_mask,
    rasterize_polygons,
    sample_depth_at,
)
from .io import (
    DatasetIndex,
    ImageEntry,
    depth_file_name,
    index_from_records,
    ir_file_name,
    load_dataset,
    save_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
