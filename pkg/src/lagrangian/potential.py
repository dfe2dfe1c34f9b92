"""
Lagrangian initial data from potentials.

The graph of f is Lagrangian for dx1^dy1 + dx2^dy2 iff Df is symmetric.
On a torus such maps are f = grad(x^T Q x / 2 + phi) with Q symmetric and
phi periodic, so Df = Q + D^2 phi is symmetric by construction.
"""

from dataclasses import dataclass

import numpy as np

from src.geometry.frames import jacobian
from src.geometry.spectral import differentiator
from src.models.errors import InvalidFieldError
from src.models.fields import MapField, PeriodicGrid

SYMMETRY_TOL = 1e-14


@dataclass(frozen=True)
class LagrangianData:
    """Quadratic part Q and periodic potential phi of a Lagrangian graph."""
    Q: np.ndarray
    phi: np.ndarray


def from_potential(grid: PeriodicGrid, Q, phi) -> MapField:
    """
    Build f = Q x + grad phi.

    Raises:
        InvalidFieldError: if Q is not a symmetric 2 x 2 matrix or phi does not fit the grid
    """
    Q = np.asarray(Q, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if Q.shape != (2, 2):
        raise InvalidFieldError(f"Q must be 2 x 2, got {Q.shape}")
    if not np.allclose(Q, Q.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise InvalidFieldError("Q must be symmetric")
    if phi.shape != grid.shape:
        raise InvalidFieldError(f"phi must have shape {grid.shape}, got {phi.shape}")
    if not np.all(np.isfinite(phi)):
        raise InvalidFieldError("phi has non-finite values")

    grad_phi = np.moveaxis(differentiator(grid).gradient(phi), -1, 0)
    return MapField(grid, Q, np.zeros(2), grad_phi)


def from_lagrangian_data(grid: PeriodicGrid, data: LagrangianData) -> MapField:
    return from_potential(grid, data.Q, data.phi)


def lagrangian_residual(field: MapField) -> float:
    """sup |d1 f^2 - d2 f^1|; zero exactly when the graph is Lagrangian."""
    if field.codim != 2:
        raise InvalidFieldError("the Lagrangian condition needs codim 2")
    df = jacobian(field).df
    return float(np.max(np.abs(df[..., 1, 0] - df[..., 0, 1])))
