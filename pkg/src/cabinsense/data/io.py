"""Dataset serialization: COCO-style annotations.json plus PNG rasters.

On-disk layout::

    <root>/annotations.json
    <root>/ir/<image_id:06d>.png      8-bit grayscale
    <root>/depth/<image_id:06d>.png   16-bit grayscale, millimeters

The JSON writer is canonical (sorted keys, fixed separators, records ordered
by id), so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import numpy as np
from PIL import Image

from ..errors import DatasetLoadError, SchemaError
from .records import (
    KEYPOINT_INDEX,
    KEYPOINT_NAMES,
    NUM_KEYPOINTS,
    SKELETON_EDGES,
    CameraIntrinsics,
    Keypoint,
    PersonAnnotation,
    SampleRecord,
)

PERSON_CATEGORY = {
    "id": 1,
    "name": "person",
    "keypoints": list(KEYPOINT_NAMES),
    "skeleton": [[KEYPOINT_INDEX[a] + 1, KEYPOINT_INDEX[b] + 1]
                 for a, b in SKELETON_EDGES],
}


def ir_file_name(image_id: int) -> str:
    return f"ir/{image_id:06d}.png"


def depth_file_name(image_id: int) -> str:
    return f"depth/{image_id:06d}.png"


@dataclass(frozen=True)
class ImageEntry:
    image_id: int
    width: int
    height: int
    intrinsics: CameraIntrinsics

    @property
    def file_name(self) -> str:
        return ir_file_name(self.image_id)

    @property
    def depth_name(self) -> str:
        return depth_file_name(self.image_id)


class RasterSource:
    """Backend that yields (ir, depth) arrays for an image id."""

    def load(self, entry: ImageEntry):
        raise NotImplementedError


class DirectoryRasters(RasterSource):
    def __init__(self, root: Path):
        self.root = Path(root)

    def load(self, entry: ImageEntry):
        ir = _read_png(self.root / entry.file_name, np.uint8)
        depth = _read_png(self.root / entry.depth_name, np.uint16)
        return ir, depth


class InMemoryRasters(RasterSource):
    def __init__(self, rasters: Dict[int, tuple]):
        self.rasters = rasters

    def load(self, entry: ImageEntry):
        return self.rasters[entry.image_id]


class DatasetIndex:
    """Index over a dataset: metadata eager, rasters loaded on demand."""

    def __init__(self, images: List[ImageEntry],
                 annotations: Dict[int, tuple], rasters: RasterSource):
        self.images = sorted(images, key=lambda e: e.image_id)
        self.annotations = annotations
        self._rasters = rasters

    def __len__(self) -> int:
        return len(self.images)

    @property
    def image_ids(self) -> List[int]:
        return [e.image_id for e in self.images]

    @property
    def num_annotations(self) -> int:
        return sum(len(v) for v in self.annotations.values())

    def entry(self, image_id: int) -> ImageEntry:
        for e in self.images:
            if e.image_id == image_id:
                return e
        raise KeyError(image_id)

    def load_record(self, image_id: int) -> SampleRecord:
        entry = self.entry(image_id)
        ir, depth = self._rasters.load(entry)
        return SampleRecord(image_id=image_id, ir_image=ir, tof_depth=depth,
                            persons=self.annotations.get(image_id, ()),
                            intrinsics=entry.intrinsics)

    def iter_records(self) -> Iterator[SampleRecord]:
        for e in self.images:
            yield self.load_record(e.image_id)

    def subset(self, image_ids) -> "DatasetIndex":
        keep = set(image_ids)
        return DatasetIndex(
            [e for e in self.images if e.image_id in keep],
            {i: anns for i, anns in self.annotations.items() if i in keep},
            self._rasters)


def index_from_records(records) -> DatasetIndex:
    """Build an in-memory index from fully materialized SampleRecords."""
    images, annotations, rasters = [], {}, {}
    for rec in records:
        images.append(ImageEntry(rec.image_id, rec.intrinsics.image_w,
                                 rec.intrinsics.image_h, rec.intrinsics))
        annotations[rec.image_id] = tuple(rec.persons)
        rasters[rec.image_id] = (rec.ir_image, rec.tof_depth)
    return DatasetIndex(images, annotations, InMemoryRasters(rasters))


def _read_png(path: Path, dtype) -> np.ndarray:
    if not path.is_file():
        raise DatasetLoadError(f"missing raster file: {path}")
    arr = np.asarray(Image.open(path))
    return arr.astype(dtype, copy=False)


def _write_png(path: Path, arr: np.ndarray):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")


def _annotation_to_json(image_id: int, ann: PersonAnnotation) -> dict:
    flat = []
    for kp in ann.keypoints:
        flat.extend([float(kp.x), float(kp.y), int(kp.v)])
    return {
        "id": int(ann.person_id),
        "image_id": int(image_id),
        "category_id": 1,
        "bbox": [float(v) for v in ann.bbox],
        "keypoints": flat,
        "keypoint_depths": [float(kp.depth_mm) for kp in ann.keypoints],
        "segmentation": [[float(v) for xy in poly for v in xy]
                         for poly in ann.belt_polygons],
        "belt_status": ann.belt_status,
        "seat_role": ann.seat_role,
        "clothes_class": ann.clothes_class,
    }


def _annotation_from_json(obj: dict) -> tuple:
    ann_id = obj.get("id")
    flat = obj.get("keypoints", [])
    if len(flat) != 3 * NUM_KEYPOINTS:
        raise SchemaError("keypoints length != 13", field="keypoints", record=ann_id)
    depths = obj.get("keypoint_depths", [])
    if len(depths) != NUM_KEYPOINTS:
        raise SchemaError("keypoint_depths length != 13",
                          field="keypoint_depths", record=ann_id)
    kps = tuple(
        Keypoint(name=KEYPOINT_NAMES[i], x=float(flat[3 * i]),
                 y=float(flat[3 * i + 1]), v=int(flat[3 * i + 2]),
                 depth_mm=float(depths[i]))
        for i in range(NUM_KEYPOINTS))
    polys = tuple(
        tuple((float(seg[j]), float(seg[j + 1])) for j in range(0, len(seg), 2))
        for seg in obj.get("segmentation", ()))
    ann = PersonAnnotation(
        person_id=int(ann_id),
        seat_role=obj.get("seat_role", ""),
        bbox=tuple(float(v) for v in obj.get("bbox", ())),
        keypoints=kps,
        belt_polygons=polys,
        belt_status=obj.get("belt_status", ""),
        clothes_class=obj.get("clothes_class", ""),
    )
    return int(obj["image_id"]), ann


class DatasetWriter:
    """Streams records to disk one at a time; finalize() writes the JSON."""

    def __init__(self, path):
        self.root = Path(path)
        self.root.mkdir(parents=True, exist_ok=True)
        self._images = []
        self._annotations = []

    def add_record(self, rec: SampleRecord) -> None:
        intr = rec.intrinsics
        self._images.append({
            "id": int(rec.image_id),
            "width": int(intr.image_w),
            "height": int(intr.image_h),
            "file_name": ir_file_name(rec.image_id),
            "depth_file_name": depth_file_name(rec.image_id),
            "intrinsics": {
                "fx": float(intr.fx), "fy": float(intr.fy),
                "cx": float(intr.cx), "cy": float(intr.cy),
            },
        })
        for ann in rec.persons:
            self._annotations.append(_annotation_to_json(rec.image_id, ann))
        _write_png(self.root / ir_file_name(rec.image_id),
                   rec.ir_image.astype(np.uint8))
        _write_png(self.root / depth_file_name(rec.image_id),
                   rec.tof_depth.astype(np.uint16))

    def finalize(self) -> Path:
        self._images.sort(key=lambda im: im["id"])
        self._annotations.sort(key=lambda a: a["id"])
        doc = {
            "images": self._images,
            "annotations": self._annotations,
            "categories": [PERSON_CATEGORY],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        out = self.root / "annotations.json"
        out.write_text(text, encoding="utf-8")
        return out


def save_dataset(index: DatasetIndex, path) -> None:
    """Write the index as annotations.json plus per-image PNG rasters."""
    writer = DatasetWriter(path)
    for rec in index.iter_records():
        writer.add_record(rec)
    writer.finalize()


def load_dataset(path) -> DatasetIndex:
    """Load a dataset directory into an index with lazily loadable rasters."""
    root = Path(path)
    ann_path = root / "annotations.json"
    if not ann_path.is_file():
        raise DatasetLoadError(f"missing annotations file: {ann_path}")
    for sub in ("ir", "depth"):
        if not (root / sub).is_dir():
            raise DatasetLoadError(f"missing raster directory: {root / sub}")
    try:
        doc = json.loads(ann_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"annotations.json is not valid JSON: {exc}") from exc

    categories = doc.get("categories", [])
    names = [c.get("name") for c in categories]
    if names != ["person"]:
        raise SchemaError(f"expected exactly one 'person' category, got {names}",
                          field="categories")

    images: List[ImageEntry] = []
    seen_ids = set()
    for im in doc.get("images", []):
        image_id = int(im["id"])
        if image_id in seen_ids:
            raise SchemaError(f"duplicate image id {image_id}",
                              field="images", record=image_id)
        seen_ids.add(image_id)
        intr = im.get("intrinsics", {})
        entry = ImageEntry(
            image_id=image_id, width=int(im["width"]), height=int(im["height"]),
            intrinsics=CameraIntrinsics(
                fx=float(intr["fx"]), fy=float(intr["fy"]),
                cx=float(intr["cx"]), cy=float(intr["cy"]),
                image_w=int(im["width"]), image_h=int(im["height"])))
        for rel in (entry.file_name, entry.depth_name):
            if not (root / rel).is_file():
                raise DatasetLoadError(f"missing raster file: {root / rel}")
        if im.get("file_name") not in (None, entry.file_name):
            raise SchemaError(
                f"file_name {im['file_name']!r} does not match id-derived "
                f"{entry.file_name!r}", field="file_name", record=image_id)
        images.append(entry)

    annotations: Dict[int, list] = {e.image_id: [] for e in images}
    seen_ann_ids = set()
    for obj in doc.get("annotations", []):
        image_id, ann = _annotation_from_json(obj)
        if image_id not in annotations:
            raise SchemaError(f"annotation references unknown image {image_id}",
                              field="image_id", record=ann.person_id)
        if ann.person_id in seen_ann_ids:
            raise SchemaError(f"duplicate annotation id {ann.person_id}",
                              field="id", record=ann.person_id)
        seen_ann_ids.add(ann.person_id)
        annotations[image_id].append(ann)

    return DatasetIndex(images,
                        {i: tuple(v) for i, v in annotations.items()},
                        DirectoryRasters(root))
