"""Dataset-level generation: quota-balanced labels, streaming writes, stats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data.io import DatasetIndex, DatasetWriter, load_dataset
from ..data.records import CLOTHES_CLASSES
from ..errors import DegenerateSceneError
from .config import GeneratorConfig
from .render import render_sample
from .scene import generate_scene, scene_keypoint_depths, with_assignments

_RETRY_STRIDE = 7_777_777


def _largest_remainder_assign(n: int, shares, order) -> list:
    """Assign n items to classes so counts track n*share within one item.

    ``order`` is a permutation of range(n); assignment happens in that order
    so class labels are not correlated with instance position.
    """
    counts = np.zeros(len(shares), dtype=np.int64)
    out = [None] * n
    shares = np.asarray(shares, dtype=np.float64)
    for step, idx in enumerate(order, start=1):
        deficit = shares * step - counts
        cls = int(np.argmax(deficit))
        counts[cls] += 1
        out[idx] = cls
    return out


def plan_scenes(config: GeneratorConfig) -> list:
    """Sample all scenes, then rebalance clothes and belt modes by quota."""
    scenes = [generate_scene(config.seed + i, config) for i in range(config.n_images)]
    instances = [(i, k) for i, s in enumerate(scenes) for k in range(len(s.occupants))]
    n = len(instances)
    rng = np.random.default_rng([config.seed, 0xC10])
    order = rng.permutation(n)

    clothes_ids = _largest_remainder_assign(n, config.clothes_mix, order)
    r = config.abnormal_belt_rate
    belt_shares = (1.0 - r, r / 3.0, r / 3.0, r / 3.0)
    belt_names = ("normal", "under_arm", "behind_back", "absent")
    belt_ids = _largest_remainder_assign(n, belt_shares, rng.permutation(n))

    per_scene_clothes = {}
    per_scene_belts = {}
    for j, (i, k) in enumerate(instances):
        per_scene_clothes.setdefault(i, {})[k] = CLOTHES_CLASSES[clothes_ids[j]]
        per_scene_belts.setdefault(i, {})[k] = belt_names[belt_ids[j]]

    planned = []
    for i, scene in enumerate(scenes):
        cl = [per_scene_clothes[i][k] for k in range(len(scene.occupants))]
        bm = [per_scene_belts[i][k] for k in range(len(scene.occupants))]
        planned.append(with_assignments(scene, clothes=cl, belt_modes=bm))
    return planned


def generate_dataset(config: GeneratorConfig, out_path) -> DatasetIndex:
    """Render the configured number of images to ``out_path`` and reload."""
    scenes = plan_scenes(config)
    writer = DatasetWriter(out_path)
    next_person_id = 1
    for image_id, scene in enumerate(scenes):
        record = None
        for attempt in range(8):
            try:
                record = render_sample(scene, config, first_person_id=next_person_id,
                                       image_id=image_id)
                break
            except DegenerateSceneError:
                retry_seed = config.seed + _RETRY_STRIDE * (attempt + 1) + image_id
                fresh = generate_scene(retry_seed, config,
                                       force_two=len(scene.occupants) == 2)
                scene = with_assignments(
                    fresh,
                    clothes=[o.clothes_class for o in scene.occupants],
                    belt_modes=[o.belt_mode for o in scene.occupants])
        if record is None:
            raise DegenerateSceneError(f"image {image_id}: no valid scene after retries")
        next_person_id += len(record.persons)
        writer.add_record(record)
    writer.finalize()
    return load_dataset(out_path)


@dataclass(frozen=True)
class DepthStats:
    fraction_500_800: float
    fraction_400_900: float
    histogram_edges: tuple  # mm bin edges, 50 mm apart
    histogram_counts: tuple
    n_keypoints: int


def depth_distribution_stats(index: DatasetIndex) -> DepthStats:
    """Depth-label statistics over all visible keypoints in the index."""
    depths = []
    for anns in index.annotations.values():
        for ann in anns:
            arr = ann.keypoint_array()
            depths.extend(arr[arr[:, 2] > 0, 3].tolist())
    if not depths:
        raise ValueError("index contains no visible keypoints")
    d = np.asarray(depths, dtype=np.float64)
    edges = np.arange(200.0, 1550.0 + 1e-9, 50.0)
    counts, _ = np.histogram(d, bins=edges)
    return DepthStats(
        fraction_500_800=float(((d >= 500.0) & (d <= 800.0)).mean()),
        fraction_400_900=float(((d >= 400.0) & (d <= 900.0)).mean()),
        histogram_edges=tuple(edges.tolist()),
        histogram_counts=tuple(int(c) for c in counts),
        n_keypoints=int(d.size),
    )


def scene_depth_fractions(scenes) -> tuple:
    """(fraction 500-800, fraction 400-900) over scene kinematic depths."""
    z = np.concatenate([scene_keypoint_depths(s) for s in scenes])
    return (float(((z >= 500.0) & (z <= 800.0)).mean()),
            float(((z >= 400.0) & (z <= 900.0)).mean()))
