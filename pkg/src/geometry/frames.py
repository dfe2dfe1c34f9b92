"""
Jacobians, singular values, induced metrics and SVD-adapted frames.

Every function here is vectorized: a Jacobian argument has shape
(..., m, 2) and the leading axes are carried through unchanged, so the
same code handles a single matrix and a whole grid.
"""

import numpy as np

from src.geometry.spectral import differentiator
from src.models.fields import AdaptedFrame, JacobianField, MapField

DEGENERACY_TOL = 1e-8
RANK_TOL = 1e-12
_SIGN_TOL = 1e-14


def jacobian(field: MapField) -> JacobianField:
    """Df = A_lin + Du and D^2 f = D^2 u by spectral differentiation of the periodic part."""
    field.ensure_finite()
    du, d2u = differentiator(field.grid).derivatives(field.perturbation)
    df = np.moveaxis(du, 0, -2) + field.affine
    d2f = np.moveaxis(d2u, 0, -3)
    return JacobianField(df=df, d2f=d2f)


def singular_values(J: np.ndarray) -> np.ndarray:
    """
    Singular values (lambda1, lambda2), lambda1 >= lambda2 >= 0, stacked on the last axis.

    For a 2x2 block [[a, b], [c, d]] the closed form is
    lambda = |q +- r| with q = |(a + d, c - b)| / 2 and r = |(a - d, c + b)| / 2,
    which keeps lambda1 * lambda2 = |det J| to rounding.
    """
    J = np.asarray(J, dtype=float)
    if J.shape[-2] == 1:
        lam1 = np.hypot(J[..., 0, 0], J[..., 0, 1])
        return np.stack([lam1, np.zeros_like(lam1)], axis=-1)

    a, b = J[..., 0, 0], J[..., 0, 1]
    c, d = J[..., 1, 0], J[..., 1, 1]
    q = 0.5 * np.hypot(a + d, c - b)
    r = 0.5 * np.hypot(a - d, c + b)
    return np.stack([q + r, np.abs(q - r)], axis=-1)


def induced_metric(J: np.ndarray):
    """Return (g, g_inv, sqrt(det g)) for g = I + J^T J."""
    J = np.asarray(J, dtype=float)
    g = np.einsum("...ai,...aj->...ij", J, J)
    g[..., 0, 0] += 1.0
    g[..., 1, 1] += 1.0
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    g_inv = np.empty_like(g)
    g_inv[..., 0, 0] = g[..., 1, 1] / det
    g_inv[..., 1, 1] = g[..., 0, 0] / det
    g_inv[..., 0, 1] = -g[..., 0, 1] / det
    g_inv[..., 1, 0] = -g[..., 1, 0] / det
    return g, g_inv, np.sqrt(det)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip each 2-vector so that its first nonzero component is positive."""
    first = np.where(np.abs(v[..., 0]) > _SIGN_TOL, v[..., 0], v[..., 1])
    flip = np.where(first < 0, -1.0, 1.0)
    return v * flip[..., None]


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _right_singular_vectors(J: np.ndarray) -> np.ndarray:
    """Eigenvectors of J^T J as rows (a_1, a_2), a_1 for the larger eigenvalue."""
    M = np.einsum("...ai,...aj->...ij", J, J)
    theta = 0.5 * np.arctan2(2.0 * M[..., 0, 1], M[..., 0, 0] - M[..., 1, 1])
    a1 = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    a2 = _rot90(a1)
    return np.stack([_canonical_sign(a1), _canonical_sign(a2)], axis=-2)


def _left_singular_vectors(J: np.ndarray, a_tangent: np.ndarray, lam: np.ndarray,
                           rank_tol: float) -> np.ndarray:
    """Target vectors a_{2+p} with df(a_i) = lambda_i a_{2+i} on the rank-r part."""
    image = np.einsum("...aj,...ij->...ia", J, a_tangent)
    m = J.shape[-2]

    if m == 1:
        a3 = np.where((lam[..., 0] > rank_tol) & (image[..., 0, 0] < 0), -1.0, 1.0)
        return a3[..., None, None]

    safe = np.where(lam[..., 0] > rank_tol, lam[..., 0], 1.0)
    a3 = image[..., 0, :] / safe[..., None]
    a3 = np.where((lam[..., 0] > rank_tol)[..., None], a3, np.array([1.0, 0.0]))
    a3 = a3 / np.linalg.norm(a3, axis=-1, keepdims=True)

    a4 = _rot90(a3)
    along = np.einsum("...a,...a->...", image[..., 1, :], a4)
    flip_rank = np.where(along < 0, -1.0, 1.0)
    a4_free = _canonical_sign(a4)
    a4 = np.where((lam[..., 1] > rank_tol)[..., None], a4 * flip_rank[..., None], a4_free)
    return np.stack([a3, a4], axis=-2)


def frames_from_vectors(lam: np.ndarray, a_tangent: np.ndarray, a_normal: np.ndarray,
                        tol_degenerate: float = DEGENERACY_TOL, rank_tol: float = RANK_TOL,
                        signs=None) -> AdaptedFrame:
    """
    Assemble tangent and normal frames of the graph from (lambda, a_i, a_{2+p}):

        e_i     = (a_i + lambda_i a_{2+i}) / sqrt(1 + lambda_i^2)
        e_{2+p} = (a_{2+p} - lambda_p a_p) / sqrt(1 + lambda_p^2)
    """
    m = a_normal.shape[-1]
    scale = 1.0 / np.sqrt(1.0 + lam ** 2)

    pi1_tangent = a_tangent * scale[..., None]
    pi2_tangent = np.zeros(lam.shape[:-1] + (2, m))
    pi2_tangent[..., :m, :] = (lam[..., :m] * scale[..., :m])[..., None] * a_normal

    pi1_normal = -(lam[..., :m] * scale[..., :m])[..., None] * a_tangent[..., :m, :]
    pi2_normal = a_normal * scale[..., :m, None]

    magnitudes = np.abs(lam)
    ordered = np.sort(magnitudes, axis=-1)
    return AdaptedFrame(
        lam=lam,
        rank=np.count_nonzero(magnitudes > rank_tol, axis=-1),
        degenerate=(ordered[..., 1] - ordered[..., 0]) < tol_degenerate,
        a_tangent=a_tangent,
        a_normal=a_normal,
        e_tangent=np.concatenate([pi1_tangent, pi2_tangent], axis=-1),
        e_normal=np.concatenate([pi1_normal, pi2_normal], axis=-1),
        pi1_tangent=pi1_tangent,
        pi2_tangent=pi2_tangent,
        pi1_normal=pi1_normal,
        pi2_normal=pi2_normal,
        signs=signs,
    )


def adapted_frames(J: np.ndarray, tol_degenerate: float = DEGENERACY_TOL,
                   rank_tol: float = RANK_TOL) -> AdaptedFrame:
    """SVD-adapted frames of the graph of a map with differential J (shape (..., m, 2))."""
    J = np.asarray(J, dtype=float)
    lam = singular_values(J)
    a_tangent = _right_singular_vectors(J)
    a_normal = _left_singular_vectors(J, a_tangent, lam, rank_tol)
    return frames_from_vectors(lam, a_tangent, a_normal, tol_degenerate, rank_tol)
