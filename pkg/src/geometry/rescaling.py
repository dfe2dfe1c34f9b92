"""Target-metric rescaling that turns an arbitrary map into an area decreasing one."""

from typing import Tuple

import numpy as np

from src.geometry.frames import jacobian, singular_values
from src.models.fields import MapField
from src.utils.logger import get_logger

logger = get_logger(__name__)

RESCALE_SLACK = 1e-12


def normalize_to_area_decreasing(field: MapField, margin: float) -> Tuple[MapField, float]:
    """
    Scale f -> f / c (the flat target metric g2 -> c^-2 g2) so that sup lambda1 lambda2 <= 1 - margin.

    Returns the rescaled field and c; c = 1 when the field already satisfies the margin.
    """
    if not 0.0 < margin < 1.0:
        raise ValueError(f"margin must lie in (0, 1), got {margin}")
    lam = singular_values(jacobian(field).df)
    product = float(np.max(lam[..., 0] * lam[..., 1]))
    needed = float(np.sqrt(product / (1.0 - margin)))
    if needed <= 1.0:
        return field, 1.0
    # keeps the rescaled product strictly below 1 - margin after rounding
    c = needed * (1.0 + RESCALE_SLACK)
    logger.info(f"Rescaling target by c = {c:.6g} (sup l1*l2 = {product:.6g})")
    return field.scaled(1.0 / c), c
