"""Mask overlap metrics."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..geometry import BinaryMask


def compute_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union of two masks; 1.0 when both are empty
    (a correct prediction of absence is not penalized)."""
    if (a.width, a.height) != (b.width, b.height):
        raise InvalidInputError(
            f"mask dims differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(a.bits & b.bits))
    return inter / union
