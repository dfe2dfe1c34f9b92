"""
Frames adapted to the complex structure of a Lagrangian graph.

For symmetric Df the eigenvectors a_i of Df give df(a_i) = mu_i a_i, so
a_{2+i} can be taken as J(a_i), which has the same components as a_i in
the target. The tangent and normal frames then satisfy e_3 = J(e_1) and
e_4 = J(e_2), and the second fundamental form becomes totally symmetric.
"""

from itertools import permutations
from typing import Optional

import numpy as np

from src.geometry.curvature import build_snapshot, curvature_norms
from src.geometry.frames import (
    DEGENERACY_TOL,
    RANK_TOL,
    _canonical_sign,
    _rot90,
    frames_from_vectors,
    jacobian,
)
from src.models.errors import NotLagrangianError
from src.models.fields import AdaptedFrame, GeometrySnapshot, MapField
from src.models.schema import Verdict

FRAME_J_TOL = 1e-12


def lagrangian_frames(J: np.ndarray, id_tol: float = 1e-8,
                      tol_degenerate: float = DEGENERACY_TOL,
                      rank_tol: float = RANK_TOL) -> AdaptedFrame:
    """
    Eigenvector frames of a symmetric Jacobian with a_{2+i} = J(a_i).

    lam holds signed eigenvalues ordered by magnitude; signs records their
    signs. Raises NotLagrangianError when J is not symmetric within id_tol.
    """
    J = np.asarray(J, dtype=float)
    if J.shape[-2:] != (2, 2):
        raise NotLagrangianError("Lagrangian frames need a 2 x 2 Jacobian (codim 2)")
    asymmetry = float(np.max(np.abs(J[..., 1, 0] - J[..., 0, 1])))
    if asymmetry > id_tol:
        raise NotLagrangianError(f"Jacobian is not symmetric (sup |d1 f2 - d2 f1| = {asymmetry:.3e})")

    M = 0.5 * (J + np.swapaxes(J, -1, -2))
    theta = 0.5 * np.arctan2(2.0 * M[..., 0, 1], M[..., 0, 0] - M[..., 1, 1])
    v1 = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    v2 = _rot90(v1)
    mu1 = np.einsum("...i,...ij,...j->...", v1, M, v1)
    mu2 = np.einsum("...i,...ij,...j->...", v2, M, v2)

    swap = np.abs(mu2) > np.abs(mu1)
    a1 = _canonical_sign(np.where(swap[..., None], v2, v1))
    a2 = _canonical_sign(np.where(swap[..., None], v1, v2))
    lam = np.stack([np.where(swap, mu2, mu1), np.where(swap, mu1, mu2)], axis=-1)

    a_tangent = np.stack([a1, a2], axis=-2)
    signs = np.where(lam < 0, -1.0, 1.0)
    return frames_from_vectors(lam, a_tangent, a_tangent.copy(), tol_degenerate, rank_tol, signs=signs)


def complex_structure_residual(frame: AdaptedFrame) -> float:
    """sup |J(e_i) - e_{2+i}| with J(x, y) = (-y, x) on R^2 x R^2."""
    e = frame.e_tangent
    Je = np.concatenate([-e[..., 2:], e[..., :2]], axis=-1)
    return float(np.max(np.abs(Je - frame.e_normal)))


def build_lagrangian_snapshot(field: MapField, t: float = 0.0, id_tol: float = 1e-8) -> GeometrySnapshot:
    """Snapshot whose frames and second fundamental form use lagrangian_frames."""
    jac = jacobian(field)
    return build_snapshot(field, t, jac=jac, frame=lagrangian_frames(jac.df, id_tol=id_tol))


def cubic_form_residual(h: np.ndarray) -> np.ndarray:
    """Pointwise max over permutations of |h_{(2+i)jk} - h_{(2+sigma(i))sigma(j)sigma(k)}|."""
    residual = np.zeros(h.shape[:-3])
    for perm in permutations(range(3)):
        axes = tuple(range(h.ndim - 3)) + tuple(h.ndim - 3 + p for p in perm)
        residual = np.maximum(residual, np.max(np.abs(h - np.transpose(h, axes)), axis=(-3, -2, -1)))
    return residual


def check_h_symmetry(snapshot: GeometrySnapshot, id_tol: float = 1e-8, t: Optional[float] = None) -> Verdict:
    """
    Verdict on h_{3c2} = h_{4c1} (c = 1, 2) and the bound
    |sum_c (h_{3c1}^2 - h_{4c2}^2)| <= 2 sqrt(2) |A| |H| in Lagrangian frames.

    The frames themselves must satisfy e_{2+i} = J(e_i) within FRAME_J_TOL.
    """
    h = snapshot.h
    pair = np.maximum(np.abs(h[..., 0, :, 1] - h[..., 1, :, 0]).max(axis=-1), cubic_form_residual(h))

    normA2, normH2, _ = curvature_norms(h)
    difference = np.abs(np.sum(h[..., 0, :, 0] ** 2 - h[..., 1, :, 1] ** 2, axis=-1))
    bound = 2.0 * np.sqrt(2.0) * np.sqrt(normA2 * normH2)
    excess = difference - bound
    scale = max(1.0, float(np.max(normA2)))
    bound_ok = bool(np.all(excess <= id_tol * scale))

    worst = np.unravel_index(int(np.argmax(pair)), pair.shape) if pair.ndim else None
    frame_residual = complex_structure_residual(snapshot.frame)
    worst_value = max(float(np.max(pair)), frame_residual)
    return Verdict(
        check="h_symmetry",
        statement="h_{3c2} = h_{4c1} and |sum_c(h_{3c1}^2 - h_{4c2}^2)| <= 2 sqrt(2) |A||H|",
        worst_value=worst_value,
        threshold=id_tol,
        passed=worst_value <= id_tol and frame_residual <= FRAME_J_TOL and bound_ok,
        worst_t=snapshot.t if t is None else t,
        worst_point=tuple(int(i) for i in worst) if worst is not None and len(worst) == 2 else None,
        evaluations=1,
    )
