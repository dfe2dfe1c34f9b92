"""
Resolution and time-step sweeps.

Runs one physical setup on several grids and reports, for each monitored
residual, the observed convergence order between successive resolutions.
A second sweep halves the trial step of the evolution-equation probe at a
fixed state to measure its order in dt.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from src.config.settings import RunConfig
from src.flow.engine import evolve, stable_dt
from src.generators.initial_data import build_initial_field
from src.geometry.curvature import build_snapshot, total_area
from src.models.fields import FlowState
from src.models.schema import ConvergenceEntry, SweepReport
from src.utils.logger import get_logger
from src.validators.checks import gauss_bonnet_residual, probe_evolution
from src.validators.estimate_monitor import EstimateMonitor

logger = get_logger(__name__)

SWEEP_QUANTITIES = ("gauss_bonnet_resid", "relation_resid", "pythagoras_resid", "lagrangian_resid",
                    "sup_A2", "area")


def observed_orders(parameters: Sequence[float], values: Sequence[Optional[float]],
                    decreasing_parameter: bool = False) -> List[Optional[float]]:
    """
    log(v_k / v_{k+1}) / log(p_{k+1} / p_k) for successive pairs (None where undefined).

    With decreasing_parameter (time steps), the ratio p_k / p_{k+1} is used instead.
    """
    orders: List[Optional[float]] = []
    for k in range(len(values) - 1):
        a, b = values[k], values[k + 1]
        if a is None or b is None or a <= 0 or b <= 0:
            orders.append(None)
            continue
        ratio = parameters[k] / parameters[k + 1] if decreasing_parameter else parameters[k + 1] / parameters[k]
        orders.append(float(np.log(a / b) / np.log(ratio)))
    return orders


def _with_resolution(cfg: RunConfig, n: int) -> RunConfig:
    n2 = int(round(n * cfg.grid.n2 / cfg.grid.n1 / 2)) * 2
    grid = cfg.grid.model_copy(update={"n1": n, "n2": max(n2, 8)})
    return cfg.model_copy(update={"grid": grid})


def _final_values(cfg: RunConfig) -> Dict[str, Optional[float]]:
    initial = build_initial_field(cfg)
    state = FlowState(initial.t, initial.field, initial.step_count)
    monitor = EstimateMonitor(cfg.checks, cfg.enabled_checks(), cfg.flow.cfl,
                              lagrangian=cfg.map.kind == "potential")
    monitor.initialize(state)
    summary = evolve(state, cfg.flow, observers=[monitor], step_hooks=[monitor.on_step])
    report = monitor.finalize(summary.blow_up)

    last = report.rows[-1]
    values = {name: getattr(last, name) for name in SWEEP_QUANTITIES}
    if values["gauss_bonnet_resid"] is None:
        snapshot = build_snapshot(summary.final_state.field, summary.final_state.t)
        values["gauss_bonnet_resid"], _ = gauss_bonnet_residual(snapshot)
        values["area"] = total_area(snapshot)
    return values


def resolution_sweep(cfg: RunConfig, resolutions: Sequence[int], dt_levels: int = 3) -> SweepReport:
    """
    Run cfg at each resolution (n1; n2 keeps the aspect ratio) and estimate convergence orders.

    Residuals are compared directly; sup|A|^2 and the area are compared
    against the finest resolution. The dt sweep probes the evolution
    equation at the initial state of the finest grid with dt, dt/2, ...

    Raises:
        ValueError: if fewer than three resolutions are given
    """
    resolutions = sorted(int(n) for n in resolutions)
    if len(resolutions) < 3:
        raise ValueError("a resolution sweep needs at least three resolutions")

    results = []
    for n in resolutions:
        logger.info(f"Sweep: running N = {n}")
        results.append(_final_values(_with_resolution(cfg, n)))

    report = SweepReport(metadata={"resolutions": resolutions, "t_end": cfg.flow.t_end, "seed": cfg.seed})
    finest = results[-1]
    for quantity in SWEEP_QUANTITIES:
        values = [r[quantity] for r in results]
        if all(v is None for v in values):
            continue
        if quantity in ("sup_A2", "area"):
            values = [None if v is None or finest[quantity] is None else abs(v - finest[quantity])
                      for v in values[:-1]]
            name, parameters = f"{quantity}_error", resolutions[:-1]
        else:
            name, parameters = quantity, resolutions
        report.entries.append(ConvergenceEntry(
            quantity=name, parameters=list(parameters), values=values,
            orders=observed_orders(parameters, values),
        ))

    fine_cfg = _with_resolution(cfg, resolutions[-1])
    initial = build_initial_field(fine_cfg)
    state = FlowState(initial.t, initial.field, initial.step_count)
    dt0 = stable_dt(state.field, fine_cfg.flow.cfl)
    steps = [dt0 / 2 ** k for k in range(dt_levels)]
    probes = [probe_evolution(state, dt, fine_cfg.checks.evo_coeff, fine_cfg.checks.id_tol) for dt in steps]
    name = "trS_evolution" if state.field.codim == 2 else "v_evolution"
    for quantity, values in ((name, [p.residual for p in probes]),
                             (f"{name}_without_tangential_correction", [p.ablation for p in probes])):
        report.dt_entries.append(ConvergenceEntry(
            quantity=quantity, parameters=steps, values=values,
            orders=observed_orders(steps, values, decreasing_parameter=True),
        ))
    return report
