"""Intrinsic differential operators on the graph, in base coordinates."""

from typing import Optional

import numpy as np

from src.geometry.spectral import differentiator
from src.models.fields import PeriodicGrid


def surface_gradient_norm(grid: PeriodicGrid, w: np.ndarray, g_inv: np.ndarray,
                          dw: Optional[np.ndarray] = None) -> np.ndarray:
    """|grad w|^2 = g^{ij} d_i w d_j w with spectral d_i w (pass dw to reuse a gradient)."""
    if dw is None:
        dw = differentiator(grid).gradient(w)
    return np.einsum("...ij,...i,...j->...", g_inv, dw, dw)


def laplace_beltrami(grid: PeriodicGrid, w: np.ndarray, g: np.ndarray,
                     g_inv: np.ndarray) -> np.ndarray:
    """Delta w = (1/sqrt(det g)) d_i (sqrt(det g) g^{ij} d_j w), all derivatives spectral."""
    spectral = differentiator(grid)
    sqrt_det = np.sqrt(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0])
    dw = spectral.gradient(w)
    flux = sqrt_det[..., None] * np.einsum("...ij,...j->...i", g_inv, dw)
    return spectral.divergence(flux) / sqrt_det
