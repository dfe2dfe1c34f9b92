"""
Gauge corrections between the graphical time derivative and the derivative along the flow.

The graphical velocity (0, df/dt) splits into the mean curvature vector
plus a tangential part dF(V). Points that move with velocity H travel
along x' = -V in the base, so for any scalar w on the surface

    dw/dt (along the flow) = dw/dt (at fixed x) - V^i d_i w.
"""

from typing import Optional

import numpy as np

from src.flow.engine import flow_rhs
from src.geometry.frames import induced_metric, jacobian
from src.models.fields import MapField


def tangential_velocity(field: MapField, rhs: Optional[np.ndarray] = None) -> np.ndarray:
    """V^i = g^{ij} <(0, df/dt), d_j F>, shape (n1, n2, 2)."""
    rhs = flow_rhs(field) if rhs is None else rhs
    df = jacobian(field).df
    _, g_inv, _ = induced_metric(df)
    along = np.einsum("a...,...aj->...j", rhs, df)
    return np.einsum("...ij,...j->...i", g_inv, along)


def material_derivative(w: np.ndarray, w_next: np.ndarray, dt: float, V: np.ndarray,
                        dw: np.ndarray) -> np.ndarray:
    """First-order estimate (w_next - w)/dt - V^i d_i w of the derivative along the flow."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (w_next - w) / dt - np.einsum("...i,...i->...", V, dw)
