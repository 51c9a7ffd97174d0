"""CabinSense: in-cabin occupant monitoring on IR/ToF imagery.

Absolute 3D keypoint estimation, seat-belt segmentation and belt-status
classification over per-person crops, plus a synthetic cabin dataset
generator and an evaluation/reporting kit.
"""

__version__ = "0.1.0"
