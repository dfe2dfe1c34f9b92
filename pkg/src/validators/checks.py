"""
Estimate and identity checks for graphs evolving by mean curvature flow.

Every function here is pure: it takes snapshots, tensors or time series
and returns residuals or Verdict objects. EstimateMonitor (in
estimate_monitor.py) decides when each one runs and merges the verdicts
over time.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.flow.engine import step
from src.flow.gauge import material_derivative, tangential_velocity
from src.geometry.curvature import build_snapshot, curvature_norms, tensor_values
from src.geometry.operators import laplace_beltrami, surface_gradient_norm
from src.geometry.spectral import differentiator, integrate
from src.models.errors import NotAreaDecreasingError, NotLagrangianError
from src.models.fields import FlowState, GeometrySnapshot, TensorSValues
from src.models.schema import Verdict

PYTHAGORAS_TOL = 1e-13
LI_LI_SLACK = 1e-12
GAUSS_FLOOR = 1e-12


def _worst(values: np.ndarray, largest: bool = True) -> Tuple[float, Optional[Tuple[int, int]]]:
    """Extreme value of a grid array and where it sits."""
    values = np.asarray(values, dtype=float)
    index = int(np.nanargmax(values) if largest else np.nanargmin(values))
    point = np.unravel_index(index, values.shape) if values.ndim else ()
    return float(values.flat[index]), (tuple(int(i) for i in point) if len(point) == 2 else None)


def bound_verdict(check: str, statement: str, values: np.ndarray, threshold: float,
                  t: Optional[float] = None, lower: bool = False) -> Verdict:
    """Verdict for values <= threshold everywhere (or >= threshold with lower=True)."""
    value, point = _worst(values, largest=not lower)
    passed = value >= threshold if lower else value <= threshold
    return Verdict(
        check=check, statement=statement, bound="lower" if lower else "upper",
        worst_value=value, threshold=float(threshold), passed=bool(passed),
        worst_t=t, worst_point=point, evaluations=1,
    )


# ---------------------------------------------------------------------------
# Constants of the decay estimates

def lagrangian_constants(alpha: float) -> Tuple[float, float, float]:
    """(C, C_alpha, barrier) with C = 16 sqrt 2 / alpha, C_alpha = 8(1 + C^2/alpha)/alpha^2."""
    C = 16.0 * np.sqrt(2.0) / alpha
    C_alpha = 8.0 * (1.0 + C ** 2 / alpha) / alpha ** 2
    barrier = 2.0 * (1.0 + C ** 2 / alpha) / alpha ** 2
    return C, C_alpha, barrier


def alpha0(snapshot: GeometrySnapshot) -> float:
    """
    inf of Tr(S) over the initial surface.

    Raises:
        NotAreaDecreasingError: if the map is not area decreasing somewhere on the grid
    """
    trS = tensor_values(snapshot).trS
    alpha, point = _worst(trS, largest=False)
    if alpha <= 0.0:
        lam = snapshot.frame.singular_values
        product = float(lam[point + (0,)] * lam[point + (1,)]) if point else float("nan")
        raise NotAreaDecreasingError(
            f"initial map is not area decreasing: Tr(S) = {alpha:.6g} at grid point {point} "
            f"(lambda1 * lambda2 = {product:.6g})",
            point=point, value=alpha,
        )
    return alpha


def v0(snapshot: GeometrySnapshot) -> float:
    """sup v = sup sqrt(1 + |Df|^2) over the initial codim 1 graph."""
    return float(np.max(snapshot.v))


# ---------------------------------------------------------------------------
# Decay estimates and preserved quantities

def check_trS_min(times: Sequence[float], inf_trS: Sequence[float], alpha: float,
                  rel_tol: float = 0.02, step_tol: float = 1e-4) -> List[Verdict]:
    """
    inf Tr(S) stays above alpha (1 - rel_tol) and never drops by more than
    step_tol (relative) from one step to the next.
    """
    values = np.asarray(inf_trS, dtype=float)
    floor = bound_verdict("trS_min", "inf Tr(S) >= alpha", values, alpha * (1.0 - rel_tol), lower=True)
    floor.worst_t = float(times[int(np.argmin(values))])
    floor.evaluations = len(values)

    drops = np.zeros(1)
    if len(values) > 1:
        drops = (values[:-1] - values[1:]) / np.maximum(np.abs(values[:-1]), 1e-300)
        drops = np.where(values[:-1] == values[1:], 0.0, drops)
    k = int(np.argmax(drops))
    monotone = Verdict(
        check="trS_min_monotone",
        statement="inf Tr(S) is nondecreasing from step to step",
        worst_value=float(drops[k]),
        threshold=step_tol,
        passed=bool(drops[k] <= step_tol),
        worst_t=float(times[k + 1]) if len(values) > 1 else float(times[0]),
        evaluations=max(len(values) - 1, 0),
    )
    return [floor, monotone]


def check_H_decay(t: float, snapshot: GeometrySnapshot, alpha: float, rel_tol: float = 0.02) -> Verdict:
    """sup t |H|^2 <= (2 / alpha)(1 + rel_tol)."""
    return bound_verdict("H_decay", "t |H|^2 <= 2 / alpha", t * snapshot.normH2,
                         (2.0 / alpha) * (1.0 + rel_tol), t)


def check_trS_barrier(t: float, snapshot: GeometrySnapshot, tensor: TensorSValues,
                      alpha: float, rel_tol: float = 0.02) -> Verdict:
    """sup (t |H|^2 + 1) / Tr(S) <= (1 / alpha)(1 + rel_tol)."""
    ratio = (t * snapshot.normH2 + 1.0) / tensor.trS
    return bound_verdict("trS_barrier", "(t |H|^2 + 1) / Tr(S) <= 1 / alpha", ratio,
                         (1.0 / alpha) * (1.0 + rel_tol), t)


def check_graph_bound(snapshot: GeometrySnapshot, alpha: float, rel_tol: float = 0.02,
                      t: Optional[float] = None) -> Verdict:
    """sup (1 + lambda1^2)(1 + lambda2^2) <= (2 / alpha)(1 + rel_tol)."""
    lam = snapshot.frame.singular_values
    product = (1.0 + lam[..., 0] ** 2) * (1.0 + lam[..., 1] ** 2)
    return bound_verdict("graph_bound", "(1 + lambda1^2)(1 + lambda2^2) <= 2 / alpha", product,
                         (2.0 / alpha) * (1.0 + rel_tol), snapshot.t if t is None else t)


def check_A_decay_lagrangian(t: float, snapshot: GeometrySnapshot, alpha: float,
                             lagrangian_resid: float, id_tol: float = 1e-8,
                             rel_tol: float = 0.02) -> Verdict:
    """
    sup t |A|^2 <= C_alpha (1 + rel_tol) for a Lagrangian graph.

    Raises:
        NotLagrangianError: if lagrangian_resid exceeds id_tol
    """
    if lagrangian_resid > id_tol:
        raise NotLagrangianError(
            f"graph is not Lagrangian at t = {t:.6g} (residual {lagrangian_resid:.3e} > {id_tol:.1e})"
        )
    _, C_alpha, _ = lagrangian_constants(alpha)
    return bound_verdict("A_decay_lagrangian", "t |A|^2 <= C_alpha", t * snapshot.normA2,
                         C_alpha * (1.0 + rel_tol), t)


def check_lagrangian_barrier(t: float, snapshot: GeometrySnapshot, tensor: TensorSValues,
                             alpha: float, rel_tol: float = 0.02) -> Verdict:
    """sup t |A|^2 / Tr(S)^2 <= 2(1 + C^2/alpha)/alpha^2 (1 + rel_tol)."""
    _, _, barrier = lagrangian_constants(alpha)
    return bound_verdict("lagrangian_barrier", "t |A|^2 / Tr(S)^2 <= 2(1 + C^2/alpha)/alpha^2",
                         t * snapshot.normA2 / tensor.trS ** 2, barrier * (1.0 + rel_tol), t)


def check_lagrangian_residual(t: float, residual: float, id_tol: float = 1e-8) -> Verdict:
    return Verdict(
        check="lagrangian_residual", statement="sup |d1 f^2 - d2 f^1| stays at round-off",
        worst_value=residual, threshold=id_tol, passed=residual <= id_tol, worst_t=t, evaluations=1,
    )


def check_codim1(snapshots: Sequence[GeometrySnapshot], v0: float, rel_tol: float = 0.02,
                 step_times: Optional[Sequence[float]] = None,
                 step_sup_v: Optional[Sequence[float]] = None,
                 v_step_tol: float = 1e-6) -> List[Verdict]:
    """
    Codim 1 estimates: sup v nonincreasing, sup t|A|^2 <= v0^2 and
    sup (t|A|^2 + 1) v^2 <= v0^2, plus the pointwise identity v^2 = det g.

    The monotonicity of sup v is judged on the per-step series when given,
    otherwise on the snapshots.
    """
    bound = v0 ** 2 * (1.0 + rel_tol)
    verdicts = []
    for snap in snapshots:
        t = snap.t
        verdicts.append(bound_verdict("codim1_A_decay", "t |A|^2 <= v0^2", t * snap.normA2, bound, t))
        verdicts.append(bound_verdict("codim1_barrier", "(t |A|^2 + 1) v^2 <= v0^2",
                                      (t * snap.normA2 + 1.0) * snap.v ** 2, bound, t))
        det_g = snap.area_element ** 2
        verdicts.append(bound_verdict("codim1_v_metric", "v^2 = det g",
                                      np.abs(snap.v ** 2 - det_g) / det_g, 1e-12, t))

    if step_sup_v is None:
        step_times = [snap.t for snap in snapshots]
        step_sup_v = [float(np.max(snap.v)) for snap in snapshots]
    values = np.asarray(step_sup_v, dtype=float)
    rises = np.diff(values) if len(values) > 1 else np.zeros(1)
    k = int(np.argmax(rises))
    verdicts.append(Verdict(
        check="codim1_v_monotone",
        statement="sup v is nonincreasing",
        worst_value=float(rises[k]),
        threshold=v_step_tol,
        passed=bool(rises[k] <= v_step_tol),
        worst_t=float(step_times[min(k + 1, len(step_times) - 1)]) if len(step_times) else None,
        evaluations=max(len(values) - 1, 0),
    ))
    return verdicts


def check_area_monotone(times: Sequence[float], areas: Sequence[float], id_tol: float = 1e-8) -> Verdict:
    """Area never increases between snapshots (flow is the gradient flow of area)."""
    values = np.asarray(areas, dtype=float)
    growth = np.diff(values) / values[:-1] if len(values) > 1 else np.zeros(1)
    k = int(np.argmax(growth))
    return Verdict(
        check="area_monotone", statement="area is nonincreasing",
        worst_value=float(growth[k]), threshold=id_tol, passed=bool(growth[k] <= id_tol),
        worst_t=float(times[min(k + 1, len(times) - 1)]), evaluations=max(len(values) - 1, 0),
    )


def check_decay_proxy(times: Sequence[float], sup_A2: Sequence[float], sup_H2: Sequence[float],
                      alpha: Optional[float], rel_tol: float = 0.02) -> List[Verdict]:
    """sup|A|^2 at the end below its initial value, and sup|H|^2(T) <= 2/(alpha T) in codim 2."""
    verdicts = [Verdict(
        check="decay_proxy", statement="sup |A|^2 (t_end) <= sup |A|^2 (0)",
        worst_value=float(sup_A2[-1]), threshold=float(sup_A2[0]) * (1.0 + rel_tol) + 1e-14,
        passed=bool(sup_A2[-1] <= float(sup_A2[0]) * (1.0 + rel_tol) + 1e-14),
        worst_t=float(times[-1]), evaluations=1,
    )]
    t_end = float(times[-1])
    if alpha is not None and t_end > 0:
        threshold = 2.0 / (alpha * t_end) * (1.0 + rel_tol)
        verdicts.append(Verdict(
            check="decay_proxy_H", statement="sup |H|^2 (t_end) <= 2 / (alpha t_end)",
            worst_value=float(sup_H2[-1]), threshold=threshold,
            passed=bool(sup_H2[-1] <= threshold), worst_t=t_end, evaluations=1,
        ))
    return verdicts


def soft_diffineq_checks(times: Sequence[float], sup_A2: Sequence[float], sup_H2: Sequence[float],
                         rel_tol: float = 0.02, slack: float = 1e-6) -> List[Verdict]:
    """
    Consequences of the differential inequalities on suprema between snapshots:

        d sup|A|^2 / dt <= 3 (sup|A|^2)^2
        d sup|H|^2 / dt <= 2 sup|A|^2 sup|H|^2
    """
    t = np.asarray(times, dtype=float)
    A = np.asarray(sup_A2, dtype=float)
    H = np.asarray(sup_H2, dtype=float)
    verdicts = []
    if len(t) < 2:
        return [Verdict(check=name, statement=statement, passed=True, evaluations=0)
                for name, statement in (("soft_diffineq_A", "d sup|A|^2/dt <= 3 sup|A|^4"),
                                        ("soft_diffineq_H", "d sup|H|^2/dt <= 2 sup|A|^2 sup|H|^2"))]

    dt = np.diff(t)
    A_max = np.maximum(A[:-1], A[1:])
    H_max = np.maximum(H[:-1], H[1:])
    for name, statement, rate, allowed in (
        ("soft_diffineq_A", "d sup|A|^2/dt <= 3 sup|A|^4", np.diff(A) / dt, 3.0 * A_max ** 2),
        ("soft_diffineq_H", "d sup|H|^2/dt <= 2 sup|A|^2 sup|H|^2", np.diff(H) / dt, 2.0 * A_max * H_max),
    ):
        excess = rate - (allowed * (1.0 + rel_tol) + slack)
        k = int(np.argmax(excess))
        verdicts.append(Verdict(
            check=name, statement=statement, worst_value=float(rate[k]),
            threshold=float(allowed[k] * (1.0 + rel_tol) + slack), passed=bool(excess[k] <= 0.0),
            worst_t=float(t[k + 1]), evaluations=len(dt),
        ))
    return verdicts


# ---------------------------------------------------------------------------
# Pointwise identities

def relation_terms(lam: np.ndarray, h: np.ndarray):
    """
    Both sides of

        4 Tr(S)(S11 - S22) sum_c (h_{3c1}^2 - h_{4c2}^2) + |grad Tr(S)|^2
            = 4 sum_c (T11 h_{4c2} + T22 h_{3c1})^2

    with |grad Tr(S)|^2 = 4 sum_k (T11 h_{3k1} + T22 h_{4k2})^2. Returns
    (left, right, gradient term, magnitude scale).
    """
    lam = np.abs(np.asarray(lam, dtype=float))
    lam2 = lam ** 2
    S = (1.0 - lam2) / (1.0 + lam2)
    T = 2.0 * lam / (1.0 + lam2)
    S11, S22, T11, T22 = S[..., 0], S[..., 1], T[..., 0], T[..., 1]
    trS = S11 + S22

    h3c1 = h[..., 0, :, 0]
    h4c2 = h[..., 1, :, 1]
    first = 4.0 * trS * (S11 - S22) * np.sum(h3c1 ** 2 - h4c2 ** 2, axis=-1)
    gradient = 4.0 * np.sum((T11[..., None] * h3c1 + T22[..., None] * h4c2) ** 2, axis=-1)
    right = 4.0 * np.sum((T11[..., None] * h4c2 + T22[..., None] * h3c1) ** 2, axis=-1)
    scale = np.maximum.reduce([np.abs(first), gradient, right])
    return first + gradient, right, gradient, scale


def relation_residual(snapshot: GeometrySnapshot, tensor: Optional[TensorSValues] = None,
                      floor: float = 1.0):
    """
    Residual of the Tr(S) relation at non-degenerate points.

    Returns (pointwise residual with NaN at degenerate points, sup residual,
    number of skipped points). The residual is |left - right| / max(scale, floor).
    """
    left, right, _, scale = relation_terms(snapshot.frame.singular_values, snapshot.h)
    residual = np.abs(left - right) / np.maximum(scale, floor)
    degenerate = snapshot.frame.degenerate
    residual = np.where(degenerate, np.nan, residual)
    skipped = int(np.count_nonzero(degenerate))
    sup = 0.0 if skipped == residual.size else float(np.nanmax(residual))
    return residual, sup, skipped


def trS_gradient_consistency(snapshot: GeometrySnapshot, tensor: TensorSValues,
                             id_tol: float = 1e-8) -> Verdict:
    """
    Compare the frame formula for |grad Tr(S)|^2 with the spectral gradient of the Tr(S) field.

    They agree up to discretization only; the tolerance adds an estimate of
    the truncation error built from the upper half of the Tr(S) spectrum.
    """
    grid = snapshot.grid
    _, _, frame_gradient, _ = relation_terms(snapshot.frame.singular_values, snapshot.h)
    grid_gradient = surface_gradient_norm(grid, tensor.trS, snapshot.g_inv)
    difference = np.abs(frame_gradient - grid_gradient)

    spectrum = np.abs(np.fft.rfft2(tensor.trS)) / (grid.n1 * grid.n2)
    k1 = np.abs(np.fft.fftfreq(grid.n1, d=1.0 / grid.n1))[:, None]
    k2 = np.fft.rfftfreq(grid.n2, d=1.0 / grid.n2)[None, :]
    high = (k1 > grid.n1 / 4) | (k2 > grid.n2 / 4)
    tail = 2.0 * np.sqrt(differentiator(grid).max_wavenumber_sq) * float(np.sum(spectrum[high]))
    scale = float(np.max(frame_gradient))
    tol = id_tol * (1.0 + scale) + 10.0 * (2.0 * np.sqrt(scale) * tail + tail ** 2)

    verdict = bound_verdict("relation_gradient", "frame |grad Tr(S)|^2 = spectral |grad Tr(S)|^2",
                            difference, tol, snapshot.t)
    return verdict


def pythagoras_residual(tensor: TensorSValues) -> float:
    """sup |S_ii^2 + T_ii^2 - 1|."""
    return float(np.max(np.abs(tensor.S_diag ** 2 + tensor.T ** 2 - 1.0)))


def li_li_terms(h: np.ndarray):
    """Left side of the improved |A|^4 inequality and |A|^4, pointwise."""
    products = np.einsum("...aik,...gmk->...agim", h, h)
    commutators = products - np.swapaxes(products, -1, -2)
    first = 2.0 * np.sum(commutators ** 2, axis=(-4, -3, -2, -1))
    inner = np.einsum("...aij,...amk->...ijmk", h, h)
    second = 2.0 * np.sum(inner ** 2, axis=(-4, -3, -2, -1))
    normA2, _, _ = curvature_norms(h)
    return first + second, normA2 ** 2


def li_li_check(h: np.ndarray, t: Optional[float] = None) -> Verdict:
    """Left side <= 3 |A|^4 (1 + 1e-12) at every point."""
    left, normA4 = li_li_terms(h)
    excess = left - 3.0 * normA4 * (1.0 + LI_LI_SLACK)
    ratio = np.where(normA4 > 0, left / np.where(normA4 > 0, normA4, 1.0), 0.0)
    value, point = _worst(ratio)
    return Verdict(
        check="li_li", statement="Li-Li bound: left side <= 3 |A|^4",
        worst_value=value, threshold=3.0, passed=bool(np.all(excess <= 0.0)),
        worst_t=t, worst_point=point, evaluations=1,
    )


def gauss_bonnet_residual(snapshot: GeometrySnapshot) -> Tuple[float, float]:
    """(|int (|H|^2 - |A|^2) dmu|, int |A|^2 dmu) with uniform quadrature."""
    grid = snapshot.grid
    A_integral = integrate(grid, snapshot.normA2 * snapshot.area_element)
    H_integral = integrate(grid, snapshot.normH2 * snapshot.area_element)
    return abs(H_integral - A_integral), A_integral


def check_gauss_bonnet(snapshot: GeometrySnapshot, gauss_tol: float = 1e-6) -> Verdict:
    residual, A_integral = gauss_bonnet_residual(snapshot)
    threshold = gauss_tol * max(A_integral, GAUSS_FLOOR)
    return Verdict(
        check="gauss_bonnet", statement="int |A|^2 dmu = int |H|^2 dmu",
        worst_value=residual, threshold=threshold, passed=residual <= threshold,
        worst_t=snapshot.t, evaluations=1,
    )


# ---------------------------------------------------------------------------
# Evolution equations along the flow

def trS_evolution_residual(snapshot: GeometrySnapshot, next_snapshot: GeometrySnapshot,
                           dt: float, V: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Residual of (d/dt - Delta) Tr(S) = 2|A|^2 Tr(S) + 2(S11 - S22) sum_c (h_{3c1}^2 - h_{4c2}^2)
    at the time of snapshot, with d/dt the first-order material derivative.
    """
    grid = snapshot.grid
    tensor = tensor_values(snapshot)
    trS = tensor.trS
    trS_next = tensor_values(next_snapshot).trS

    dw = differentiator(grid).gradient(trS)
    ddt = material_derivative(trS, trS_next, dt, V, dw)
    lap = laplace_beltrami(grid, trS, snapshot.g, snapshot.g_inv)

    h = snapshot.h
    S = tensor.S_diag
    reaction = (2.0 * snapshot.normA2 * trS
                + 2.0 * (S[..., 0] - S[..., 1]) * np.sum(h[..., 0, :, 0] ** 2 - h[..., 1, :, 1] ** 2, axis=-1))
    residual = np.abs(ddt - lap - reaction)
    return residual, float(np.max(residual))


def v_evolution_residual(snapshot: GeometrySnapshot, next_snapshot: GeometrySnapshot,
                         dt: float, V: np.ndarray) -> Tuple[np.ndarray, float]:
    """Residual of (d/dt - Delta) v = -|A|^2 v - 2 |grad v|^2 / v for codim 1 graphs."""
    grid = snapshot.grid
    v = snapshot.v
    dv = differentiator(grid).gradient(v)
    ddt = material_derivative(v, next_snapshot.v, dt, V, dv)
    lap = laplace_beltrami(grid, v, snapshot.g, snapshot.g_inv)
    grad2 = surface_gradient_norm(grid, v, snapshot.g_inv, dv)
    residual = np.abs(ddt - lap + snapshot.normA2 * v + 2.0 * grad2 / v)
    return residual, float(np.max(residual))


@dataclass
class EvolutionProbe:
    """Evolution-equation residual at one state, with and without the tangential correction."""
    t: float
    dt: float
    residual: float
    ablation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def probe_evolution(state: FlowState, dt: float, evo_coeff: float = 10.0,
                    id_tol: float = 1e-8) -> EvolutionProbe:
    """
    Take one trial step of size dt from state and evaluate the Tr(S) (codim 2)
    or v (codim 1) evolution residual, plus the same residual with V = 0.

    The tolerance evo_coeff * dt * (1 + sup|A|^2)^2 + id_tol halves with dt.
    """
    snapshot = build_snapshot(state.field, state.t)
    trial = step(state, dt)
    next_snapshot = build_snapshot(trial.field, trial.t)
    V = tangential_velocity(state.field)

    residual_fn = trS_evolution_residual if state.field.codim == 2 else v_evolution_residual
    _, residual = residual_fn(snapshot, next_snapshot, dt, V)
    _, ablation = residual_fn(snapshot, next_snapshot, dt, np.zeros_like(V))
    sup_A2 = float(np.max(snapshot.normA2))
    tolerance = evo_coeff * dt * (1.0 + sup_A2) ** 2 + id_tol
    return EvolutionProbe(state.t, dt, residual, ablation, tolerance)
