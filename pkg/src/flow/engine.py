"""
Explicit time stepping of graphical mean curvature flow.

In the nonparametric gauge the graph of f moves by

    d f^a / dt = g^{ij} d_i d_j f^a,     g = I + Df^T Df,

which differs from normal motion by a tangential reparametrization only.
The affine part of f is harmonic, so only the periodic part evolves.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import FlowConfig
from src.geometry.curvature import build_snapshot, tensor_values
from src.geometry.frames import induced_metric
from src.geometry.spectral import differentiator
from src.models.errors import BlowUpError
from src.models.fields import FlowState, GeometrySnapshot, MapField, TensorSValues
from src.utils.logger import get_logger

logger = get_logger(__name__)

# cfl, t_end, max_steps and snapshot_every, validated by pydantic.
StepperConfig = FlowConfig

Observer = Callable[[float, GeometrySnapshot, TensorSValues], None]
StepHook = Callable[[FlowState, FlowState], None]

_LANDING_SLACK = 1e-9

# Classical RK4 is stable on [-2.7853, 0] of the real axis.
RK4_REAL_LIMIT = 2.78


def _first_bad_point(values: np.ndarray) -> Optional[Tuple[int, int]]:
    """First grid point (i, j) holding a non-finite value, for (m, n1, n2) arrays."""
    bad = np.argwhere(~np.isfinite(values))
    if len(bad) == 0:
        return None
    return int(bad[0][-2]), int(bad[0][-1])


def flow_rhs(field: MapField, t: float = 0.0) -> np.ndarray:
    """
    Right side g^{ij} d_ij f^a of the flow, shape (m, n1, n2).

    Raises:
        BlowUpError: if the field or the result holds non-finite values
    """
    point = _first_bad_point(field.perturbation)
    if point is not None:
        raise BlowUpError(f"non-finite map values at t = {t:.6g}, point {point}", t=t, point=point)

    du, d2u = differentiator(field.grid).derivatives(field.perturbation)
    df = np.moveaxis(du, 0, -2) + field.affine
    _, g_inv, _ = induced_metric(df)
    rhs = np.einsum("...ij,a...ij->a...", g_inv, d2u)

    point = _first_bad_point(rhs)
    if point is not None:
        raise BlowUpError(f"non-finite flow velocity at t = {t:.6g}, point {point}", t=t, point=point)
    return rhs


def stable_dt(field: MapField, cfl: float) -> float:
    """
    Explicit step cfl * RK4_REAL_LIMIT / |k|_max^2, so cfl = 1 is the stability edge.

    The stiffest mode of g^{ij} d_ij sits at the Nyquist corner with symbol
    g^{ij} k_i k_j <= |k|_max^2, since g^-1 <= I for every graph. The bound
    is the flat heat-equation limit and never grows with the slope of f.
    """
    return cfl * RK4_REAL_LIMIT / differentiator(field.grid).max_wavenumber_sq


def _rk4_step(u: np.ndarray, t: float, dt: float, rhs: Callable[[float, np.ndarray], np.ndarray]) -> np.ndarray:
    k1 = rhs(t, u)
    k2 = rhs(t + dt / 2, u + dt / 2 * k1)
    k3 = rhs(t + dt / 2, u + dt / 2 * k2)
    k4 = rhs(t + dt, u + dt * k3)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step(state: FlowState, dt: float) -> FlowState:
    """Advance the periodic part of the map by one classical RK4 step."""
    field_ = state.field

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        return flow_rhs(field_.with_perturbation(u), t)

    u_next = _rk4_step(field_.perturbation, state.t, dt, rhs)
    point = _first_bad_point(u_next)
    if point is not None:
        raise BlowUpError(f"non-finite map values after step at t = {state.t + dt:.6g}",
                          t=state.t + dt, point=point)
    return state.advanced(field_.with_perturbation(u_next), dt)


@dataclass
class TrajectorySummary:
    """Outcome of one call to evolve."""
    initial_state: FlowState
    final_state: FlowState
    steps: int = 0
    emitted_times: List[float] = field(default_factory=list)
    min_dt: Optional[float] = None
    max_dt: Optional[float] = None
    blow_up: Optional[BlowUpError] = None

    @property
    def completed(self) -> bool:
        return self.blow_up is None


def evolve(state: FlowState, cfg: StepperConfig, observers: Sequence[Observer] = (),
           step_hooks: Sequence[StepHook] = ()) -> TrajectorySummary:
    """
    Step until t_end or max_steps, emitting snapshots every cfg.snapshot_every.

    Steps are shortened so that every emission time k * snapshot_every is hit
    exactly. Observers are called with (t, snapshot, tensor S) at t = 0, at
    each emission time and at the final state; step hooks are called with
    (previous, next) after every step. A blow-up ends the run and is stored in
    the summary together with the last valid state.
    """
    summary = TrajectorySummary(initial_state=state, final_state=state)

    def emit(current: FlowState) -> None:
        snapshot = build_snapshot(current.field, current.t)
        tensor = tensor_values(snapshot)
        for observer in observers:
            observer(current.t, snapshot, tensor)
        summary.emitted_times.append(current.t)
        logger.debug(f"snapshot t = {current.t:.6g} (step {current.step_count})")

    logger.info(
        f"Evolving to t = {cfg.t_end} on a {state.field.grid.n1}x{state.field.grid.n2} grid "
        f"(cfl {cfg.cfl}, snapshots every {cfg.snapshot_every})"
    )
    emit(state)

    emit_index = int(np.floor(state.t / cfg.snapshot_every + _LANDING_SLACK)) + 1
    while state.t < cfg.t_end and summary.steps < cfg.max_steps:
        target = min(emit_index * cfg.snapshot_every, cfg.t_end)
        dt_max = stable_dt(state.field, cfg.cfl)
        landing = target - state.t <= dt_max * (1.0 + _LANDING_SLACK)
        dt = target - state.t if landing else dt_max

        try:
            next_state = step(state, dt)
        except BlowUpError as exc:
            exc.last_state = state
            summary.blow_up = exc
            logger.error(f"Blow-up: {exc}")
            break

        if landing:
            next_state = replace(next_state, t=target)
            emit_index += 1
        for hook in step_hooks:
            hook(state, next_state)

        state = next_state
        summary.steps += 1
        summary.min_dt = dt if summary.min_dt is None else min(summary.min_dt, dt)
        summary.max_dt = dt if summary.max_dt is None else max(summary.max_dt, dt)
        if landing:
            emit(state)

    if summary.emitted_times[-1] != state.t:
        emit(state)
    summary.final_state = state
    logger.info(f"Stopped at t = {state.t:.6g} after {summary.steps} steps")
    return summary
