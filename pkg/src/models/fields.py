"""
Numeric containers shared by the geometry, flow and monitor layers.

All arrays are laid out with the grid axes first, shape (n1, n2, ...),
except MapField.perturbation which is component-first, shape (m, n1, n2),
so one component is one periodic scalar field.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from src.models.errors import InvalidFieldError


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the rectangular flat torus [0, L1) x [0, L2)."""
    n1: int
    n2: int
    L1: float = 2 * np.pi
    L2: float = 2 * np.pi

    def __post_init__(self):
        for name in ("n1", "n2"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise InvalidFieldError(f"{name} must be even and >= 8 (got {n})")
        for name in ("L1", "L2"):
            if not getattr(self, name) > 0:
                raise InvalidFieldError(f"{name} must be positive")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def h1(self) -> float:
        return self.L1 / self.n1

    @property
    def h2(self) -> float:
        return self.L2 / self.n2

    @property
    def h_min(self) -> float:
        return min(self.h1, self.h2)

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    @property
    def is_square(self) -> bool:
        return self.n1 == self.n2 and np.isclose(self.L1, self.L2, rtol=0, atol=1e-14)

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (x1, x2) arrays of shape (n1, n2); point (i, j) sits at (i*L1/n1, j*L2/n2)."""
        x1 = np.arange(self.n1) * self.h1
        x2 = np.arange(self.n2) * self.h2
        return np.meshgrid(x1, x2, indexing="ij")


@dataclass(frozen=True)
class MapField:
    """Discretized map f(x) = affine @ x + offset + u(x) with u periodic."""
    grid: PeriodicGrid
    affine: np.ndarray
    offset: np.ndarray
    perturbation: np.ndarray

    def __post_init__(self):
        affine = np.atleast_2d(np.asarray(self.affine, dtype=float))
        m = affine.shape[0]
        if affine.shape != (m, 2) or m not in (1, 2):
            raise InvalidFieldError(f"affine part must be m x 2 with m in (1, 2), got {affine.shape}")
        offset = np.asarray(self.offset, dtype=float).reshape(-1)
        if offset.shape != (m,):
            raise InvalidFieldError(f"offset must have length {m}")
        u = np.asarray(self.perturbation, dtype=float)
        if u.shape != (m, self.grid.n1, self.grid.n2):
            raise InvalidFieldError(
                f"perturbation must have shape {(m, self.grid.n1, self.grid.n2)}, got {u.shape}"
            )
        object.__setattr__(self, "affine", affine)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "perturbation", u)

    @classmethod
    def affine_only(cls, grid: PeriodicGrid, affine, offset=None) -> "MapField":
        affine = np.atleast_2d(np.asarray(affine, dtype=float))
        m = affine.shape[0]
        offset = np.zeros(m) if offset is None else offset
        return cls(grid, affine, offset, np.zeros((m, grid.n1, grid.n2)))

    @property
    def codim(self) -> int:
        return self.affine.shape[0]

    def ensure_finite(self) -> None:
        if not (np.all(np.isfinite(self.perturbation)) and np.all(np.isfinite(self.affine))
                and np.all(np.isfinite(self.offset))):
            bad = np.argwhere(~np.isfinite(self.perturbation))
            where = tuple(int(i) for i in bad[0][1:]) if len(bad) else None
            raise InvalidFieldError(f"map field has non-finite values (first at grid point {where})")

    def values(self) -> np.ndarray:
        """Full map values f^a at every grid point, shape (m, n1, n2)."""
        x1, x2 = self.grid.coordinates()
        linear = self.affine[:, 0, None, None] * x1 + self.affine[:, 1, None, None] * x2
        return linear + self.offset[:, None, None] + self.perturbation

    def with_perturbation(self, u: np.ndarray) -> "MapField":
        return replace(self, perturbation=u)

    def scaled(self, factor: float) -> "MapField":
        return MapField(self.grid, self.affine * factor, self.offset * factor,
                        self.perturbation * factor)


@dataclass(frozen=True)
class JacobianField:
    """First and second derivatives of a map: df (n1, n2, m, 2), d2f (n1, n2, m, 2, 2)."""
    df: np.ndarray
    d2f: np.ndarray


@dataclass(frozen=True)
class AdaptedFrame:
    """
    Singular-value adapted frames of a graph, vectorized over leading axes.

    Vectors are stored as rows: a_tangent[..., i, :] is a_i in the base,
    a_normal[..., p, :] is a_{2+p} in the target, e_tangent[..., i, :] and
    e_normal[..., p, :] are ambient vectors of length 2 + m.
    In Lagrangian frames lam holds signed eigenvalues and signs records them.
    """
    lam: np.ndarray
    rank: np.ndarray
    degenerate: np.ndarray
    a_tangent: np.ndarray
    a_normal: np.ndarray
    e_tangent: np.ndarray
    e_normal: np.ndarray
    pi1_tangent: np.ndarray
    pi2_tangent: np.ndarray
    pi1_normal: np.ndarray
    pi2_normal: np.ndarray
    signs: Optional[np.ndarray] = None

    @property
    def codim(self) -> int:
        return self.a_normal.shape[-1]

    @property
    def singular_values(self) -> np.ndarray:
        return np.abs(self.lam)

    def gram(self) -> np.ndarray:
        """Gram matrix of {e_1, e_2, e_3, ...} in the product metric."""
        basis = np.concatenate([self.e_tangent, self.e_normal], axis=-2)
        return np.einsum("...ka,...la->...kl", basis, basis)


@dataclass(frozen=True)
class TensorSValues:
    """Restriction of S = <pi1, pi1> - <pi2, pi2> to adapted frames."""
    S_tt: np.ndarray
    S_tn: np.ndarray
    S_nn: np.ndarray
    trS: np.ndarray
    T: np.ndarray

    @property
    def S_diag(self) -> np.ndarray:
        return np.diagonal(self.S_tt, axis1=-2, axis2=-1)


@dataclass(frozen=True)
class GeometrySnapshot:
    """Pointwise geometry of the graph of a MapField at one time."""
    t: float
    codim: int
    df: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    area_element: np.ndarray
    frame: AdaptedFrame
    h: np.ndarray
    H: np.ndarray
    normA2: np.ndarray
    normH2: np.ndarray
    v: Optional[np.ndarray] = None
    grid: Optional[PeriodicGrid] = None

    @property
    def degenerate_count(self) -> int:
        return int(np.count_nonzero(self.frame.degenerate))


@dataclass(frozen=True)
class FlowState:
    """One point on a trajectory of the flow."""
    t: float
    field: MapField
    step_count: int = 0
    last_dt: float = 0.0

    def advanced(self, field: MapField, dt: float) -> "FlowState":
        return FlowState(self.t + dt, field, self.step_count + 1, dt)
