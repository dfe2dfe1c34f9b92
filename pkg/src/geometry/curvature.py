"""
Second fundamental form, curvature norms and the parallel tensor S.

The graph embedding x -> (x, f(x)) has Hessian (0, D^2 f), so

    h_{alpha ij} = < D^2 f(b_i, b_j), pi2(e_{2+alpha}) >,   b_i = pi1(e_i),

which needs only the frame projections and the second derivatives of f.
"""

from typing import Optional

import numpy as np

from src.geometry.frames import (
    DEGENERACY_TOL,
    adapted_frames,
    induced_metric,
    jacobian,
)
from src.geometry.spectral import integrate
from src.models.fields import (
    AdaptedFrame,
    GeometrySnapshot,
    JacobianField,
    MapField,
    TensorSValues,
)


def second_fundamental_form(J: np.ndarray, d2f: np.ndarray, frame: AdaptedFrame) -> np.ndarray:
    """h[..., alpha, i, j] in the adapted frames of J (the frame already carries J)."""
    return np.einsum(
        "...akl,...ik,...jl,...pa->...pij",
        d2f, frame.pi1_tangent, frame.pi1_tangent, frame.pi2_normal,
    )


def curvature_norms(h: np.ndarray):
    """Return (|A|^2, |H|^2, H_alpha) for h of shape (..., m, 2, 2)."""
    normA2 = np.sum(h ** 2, axis=(-3, -2, -1))
    H = np.trace(h, axis1=-2, axis2=-1)
    normH2 = np.sum(H ** 2, axis=-1)
    return normA2, normH2, H


def tensor_S(lam: np.ndarray, codim: int = 2) -> TensorSValues:
    """
    Closed-form S in adapted frames from singular values lam[..., (lambda1, lambda2)].

    B_ii = (1 - l_i^2)/(1 + l_i^2), D_ii = -2 l_i/(1 + l_i^2), S_nn = -B on matched
    indices, Tr(S) = 2(1 - l1^2 l2^2)/((1 + l1^2)(1 + l2^2)).
    """
    lam = np.abs(np.asarray(lam, dtype=float))
    lam2 = lam ** 2
    diag = (1.0 - lam2) / (1.0 + lam2)
    T = 2.0 * lam / (1.0 + lam2)

    eye2 = np.eye(2)
    S_tt = diag[..., :, None] * eye2
    S_tn = np.zeros(lam.shape[:-1] + (2, codim))
    S_nn = np.zeros(lam.shape[:-1] + (codim, codim))
    for p in range(codim):
        S_tn[..., p, p] = -T[..., p]
        S_nn[..., p, p] = -diag[..., p]

    trS = 2.0 * (1.0 - lam2[..., 0] * lam2[..., 1]) / ((1.0 + lam2[..., 0]) * (1.0 + lam2[..., 1]))
    return TensorSValues(S_tt=S_tt, S_tn=S_tn, S_nn=S_nn, trS=trS, T=T)


def tensor_S_from_frames(frame: AdaptedFrame) -> np.ndarray:
    """Full matrix S(e_k, e_l) over tangent then normal frame vectors, from pi1 and pi2."""
    basis = np.concatenate([frame.e_tangent, frame.e_normal], axis=-2)
    p1 = basis[..., :2]
    p2 = basis[..., 2:]
    return np.einsum("...ka,...la->...kl", p1, p1) - np.einsum("...ka,...la->...kl", p2, p2)


def build_snapshot(field: MapField, t: float = 0.0, jac: Optional[JacobianField] = None,
                   tol_degenerate: float = DEGENERACY_TOL,
                   frame: Optional[AdaptedFrame] = None) -> GeometrySnapshot:
    """
    Evaluate every pointwise quantity of the graph of field at time t.

    SVD-adapted frames are used unless another adapted frame of the same
    Jacobian is passed in (the Lagrangian frames, for instance).
    """
    jac = jac if jac is not None else jacobian(field)
    g, g_inv, area_element = induced_metric(jac.df)
    if frame is None:
        frame = adapted_frames(jac.df, tol_degenerate=tol_degenerate)
    h = second_fundamental_form(jac.df, jac.d2f, frame)
    normA2, normH2, H = curvature_norms(h)
    v = None
    if field.codim == 1:
        v = np.sqrt(1.0 + np.sum(jac.df ** 2, axis=(-2, -1)))
    return GeometrySnapshot(
        t=float(t), codim=field.codim, df=jac.df, g=g, g_inv=g_inv,
        area_element=area_element, frame=frame, h=h, H=H,
        normA2=normA2, normH2=normH2, v=v, grid=field.grid,
    )


def tensor_values(snapshot: GeometrySnapshot) -> TensorSValues:
    return tensor_S(snapshot.frame.singular_values, snapshot.codim)


def total_area(snapshot: GeometrySnapshot) -> float:
    """Area of the graph, the integral of sqrt(det g) over the torus."""
    return integrate(snapshot.grid, snapshot.area_element)
