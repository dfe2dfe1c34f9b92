"""
Estimate monitor for flow runs.

EstimateMonitor is attached to evolve() twice: as a step hook it records the
cheap per-step series (inf Tr(S), sup v) used by the monotonicity checks, and
as an observer it evaluates every enabled check on each emitted snapshot.
finalize() runs the series checks and assembles the MonitorReport.
"""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.config.settings import ChecksConfig
from src.flow.engine import stable_dt
from src.geometry.curvature import build_snapshot, tensor_S, total_area
from src.geometry.frames import jacobian, singular_values
from src.lagrangian.frames import build_lagrangian_snapshot, check_h_symmetry
from src.lagrangian.potential import lagrangian_residual
from src.models.errors import BlowUpError, NotLagrangianError
from src.models.fields import FlowState, GeometrySnapshot, TensorSValues
from src.models.schema import MonitorReport, MonitorRow, Verdict
from src.utils.logger import get_logger
from src.validators import checks

logger = get_logger(__name__)

# Checks that need alpha = inf Tr(S) > 0 on the initial surface.
ALPHA_CHECKS = ("trS_min", "H_decay", "trS_barrier", "graph_bound", "A_decay_lagrangian", "lagrangian_barrier")


class MonitorConfig(BaseModel):
    """Constants of the estimates for one run."""
    alpha: Optional[float] = Field(None, gt=0.0, le=2.0, description="inf Tr(S) on the initial surface")
    v0: Optional[float] = Field(None, ge=1.0, description="sup v on the initial surface (codim 1)")
    delta: float = Field(1.0, gt=0.0, description="Decay estimate parameter delta")
    epsilon: float = Field(1.0, gt=0.0, description="Decay estimate parameter epsilon")
    rel_tol: float = Field(0.02, ge=0.0, description="Relative slack for bound checks")
    id_tol: float = Field(1e-8, gt=0.0, description="Identity residual tolerance")

    @model_validator(mode="after")
    def validate_decay_parameters(self) -> "MonitorConfig":
        if self.delta > self.epsilon:
            raise ValueError("delta must satisfy 0 < delta <= 2*epsilon/n with n = 2")
        return self


def merge_verdicts(first: Verdict, second: Verdict) -> Verdict:
    """Combine two evaluations of the same check, keeping the worse one's details."""
    def excess(v: Verdict) -> float:
        if v.worst_value is None or v.threshold is None:
            return -np.inf
        return v.worst_value - v.threshold if v.bound == "upper" else v.threshold - v.worst_value

    if first.passed != second.passed:
        worse = second if first.passed else first
    else:
        worse = second if excess(second) > excess(first) else first
    return worse.model_copy(update={
        "passed": first.passed and second.passed,
        "evaluations": first.evaluations + second.evaluations,
        "skipped_points": first.skipped_points + second.skipped_points,
    })


class EstimateMonitor:
    """
    Evaluates the enabled estimate and identity checks along one trajectory.
    """

    def __init__(self, checks_config: ChecksConfig, enabled: List[str], cfl: float = 0.5,
                 lagrangian: bool = False):
        """
        Initialize the monitor.

        Args:
            checks_config: Tolerances and decay estimate parameters
            enabled: Check names to evaluate
            cfl: CFL fraction used for the evolution-equation trial steps
            lagrangian: Whether the run starts from Lagrangian data
        """
        self.settings = checks_config
        self.enabled = set(enabled)
        self.cfl = cfl
        self.lagrangian = lagrangian or any(name in self.enabled for name in
                                            ("A_decay_lagrangian", "lagrangian_barrier", "h_symmetry",
                                             "lagrangian_residual"))
        self.config: Optional[MonitorConfig] = None
        self.report: Optional[MonitorReport] = None
        self._verdicts: Dict[str, Verdict] = {}
        self._state: Optional[FlowState] = None
        self._step_times: List[float] = []
        self._step_inf_trS: List[float] = []
        self._step_sup_v: List[float] = []
        self._evolution: List[checks.EvolutionProbe] = []

    # ------------------------------------------------------------------
    def initialize(self, state: FlowState) -> GeometrySnapshot:
        """
        Compute alpha / v0 from the initial state.

        Raises:
            NotAreaDecreasingError: if a check needing alpha is enabled and the map is not area decreasing
            NotLagrangianError: if a Lagrangian check is enabled and Df is not symmetric
        """
        snapshot = build_snapshot(state.field, state.t)
        codim = state.field.codim
        alpha = v0 = None
        raw_alpha = None

        if codim == 2:
            if self.enabled.intersection(ALPHA_CHECKS):
                alpha = checks.alpha0(snapshot)
                raw_alpha = alpha
            else:
                raw_alpha = float(np.min(tensor_S(snapshot.frame.singular_values).trS))
                alpha = raw_alpha if raw_alpha > 0 else None
        else:
            v0 = checks.v0(snapshot)

        if codim == 2 and self.enabled.intersection(("A_decay_lagrangian", "lagrangian_barrier", "h_symmetry")):
            residual = lagrangian_residual(state.field)
            if residual > self.settings.id_tol:
                raise NotLagrangianError(
                    f"initial graph is not Lagrangian (sup |d1 f2 - d2 f1| = {residual:.3e})"
                )

        self.config = MonitorConfig(
            alpha=alpha, v0=v0, delta=self.settings.delta, epsilon=self.settings.epsilon,
            rel_tol=self.settings.rel_tol, id_tol=self.settings.id_tol,
        )
        self.report = MonitorReport(codim=codim, alpha=raw_alpha, v0=v0)
        self._state = state
        self._record_step(state)

        if alpha is not None:
            C, C_alpha, _ = checks.lagrangian_constants(alpha)
            logger.info(f"Initial alpha = inf Tr(S) = {alpha:.6g} (H decay bound 2/alpha = {2 / alpha:.6g})")
            if self.lagrangian:
                logger.info(f"Lagrangian constants: C = {C:.6g}, C_alpha = {C_alpha:.6g}")
        if v0 is not None:
            logger.info(f"Initial v0 = sup v = {v0:.6g} (bound v0^2 = {v0 ** 2:.6g})")
        return snapshot

    # ------------------------------------------------------------------
    def _record(self, verdict: Verdict) -> None:
        previous = self._verdicts.get(verdict.check)
        self._verdicts[verdict.check] = verdict if previous is None else merge_verdicts(previous, verdict)
        if not verdict.passed:
            logger.debug(f"{verdict.check} failed at t = {verdict.worst_t}: "
                         f"{verdict.worst_value} vs {verdict.threshold}")

    def _record_step(self, state: FlowState) -> None:
        if not self.enabled.intersection(("trS_min", "codim1")):
            return
        lam = singular_values(jacobian(state.field).df)
        self._step_times.append(state.t)
        if state.field.codim == 2:
            self._step_inf_trS.append(float(np.min(tensor_S(lam).trS)))
        else:
            self._step_sup_v.append(float(np.max(np.sqrt(1.0 + lam[..., 0] ** 2))))

    def on_step(self, previous: FlowState, current: FlowState) -> None:
        """Step hook for evolve()."""
        self._state = current
        self._record_step(current)

    # ------------------------------------------------------------------
    def __call__(self, t: float, snapshot: GeometrySnapshot, tensor: TensorSValues) -> None:
        """Observer for evolve(): evaluate per-snapshot checks and append a row."""
        cfg = self.config
        settings = self.settings
        on = self.enabled
        codim = snapshot.codim
        alpha = cfg.alpha
        sup_A2 = float(np.max(snapshot.normA2))
        sup_H2 = float(np.max(snapshot.normH2))

        row = MonitorRow(
            t=t, dt=self._state.last_dt if self._state is not None else 0.0,
            sup_H2=sup_H2, sup_A2=sup_A2, degenerate_pts=snapshot.degenerate_count,
            area=total_area(snapshot),
        )

        row.pythagoras_resid = checks.pythagoras_residual(tensor)
        if "pythagoras" in on:
            self._record(Verdict(
                check="pythagoras", statement="S_ii^2 + T_ii^2 = 1",
                worst_value=row.pythagoras_resid, threshold=checks.PYTHAGORAS_TOL,
                passed=row.pythagoras_resid <= checks.PYTHAGORAS_TOL, worst_t=t, evaluations=1,
            ))
        if "li_li" in on:
            self._record(checks.li_li_check(snapshot.h, t))
        if "gauss_bonnet" in on:
            verdict = checks.check_gauss_bonnet(snapshot, settings.gauss_tol)
            row.gauss_bonnet_resid = verdict.worst_value
            self._record(verdict)

        if codim == 2:
            row.inf_trS = float(np.min(tensor.trS))
            if alpha is not None:
                row.tH2_over_bound = t * sup_H2 / (2.0 / alpha)
            if "H_decay" in on and t > 0:
                self._record(checks.check_H_decay(t, snapshot, alpha, settings.rel_tol))
            if "trS_barrier" in on:
                self._record(checks.check_trS_barrier(t, snapshot, tensor, alpha, settings.rel_tol))
            if "graph_bound" in on:
                self._record(checks.check_graph_bound(snapshot, alpha, settings.rel_tol, t))
            if "relation" in on:
                _, sup, skipped = checks.relation_residual(snapshot, tensor)
                row.relation_resid = sup
                verdict = Verdict(
                    check="relation", statement="Tr(S) relation identity in adapted frames",
                    worst_value=sup, threshold=settings.id_tol, passed=sup <= settings.id_tol,
                    worst_t=t, evaluations=1, skipped_points=skipped,
                )
                self._record(verdict)
                self._record(checks.trS_gradient_consistency(snapshot, tensor, settings.id_tol))
                if skipped:
                    logger.warning(f"relation check skipped {skipped} degenerate points at t = {t:.6g}")
            self._check_lagrangian(t, snapshot, tensor, row)
        else:
            row.sup_v = float(np.max(snapshot.v))
            if cfg.v0 is not None:
                row.tA2_over_bound = t * sup_A2 / cfg.v0 ** 2
            if "codim1" in on and t > 0:
                for verdict in checks.check_codim1([snapshot], cfg.v0, settings.rel_tol,
                                                   step_sup_v=[], step_times=[]):
                    if verdict.check != "codim1_v_monotone":
                        self._record(verdict)

        if ("trS_evolution" in on and codim == 2) or ("v_evolution" in on and codim == 1):
            self._probe_evolution(snapshot.t)

        self.report.rows.append(row)

    def _check_lagrangian(self, t: float, snapshot: GeometrySnapshot, tensor: TensorSValues,
                          row: MonitorRow) -> None:
        if not self.lagrangian:
            return
        settings = self.settings
        on = self.enabled
        alpha = self.config.alpha
        residual = lagrangian_residual(self._state.field)
        row.lagrangian_resid = residual
        if alpha is not None:
            _, C_alpha, _ = checks.lagrangian_constants(alpha)
            row.tA2_over_bound = t * row.sup_A2 / C_alpha

        if "lagrangian_residual" in on:
            self._record(checks.check_lagrangian_residual(t, residual, settings.id_tol))
        if "A_decay_lagrangian" in on and t > 0:
            try:
                self._record(checks.check_A_decay_lagrangian(t, snapshot, alpha, residual,
                                                             settings.id_tol, settings.rel_tol))
            except NotLagrangianError as exc:
                logger.warning(str(exc))
                self._record(Verdict(
                    check="A_decay_lagrangian", statement="t |A|^2 <= C_alpha (graph must stay Lagrangian)",
                    worst_value=residual, threshold=settings.id_tol, passed=False, worst_t=t, evaluations=1,
                ))
        if "lagrangian_barrier" in on:
            self._record(checks.check_lagrangian_barrier(t, snapshot, tensor, alpha, settings.rel_tol))
        if "h_symmetry" in on:
            try:
                lagrangian_snapshot = build_lagrangian_snapshot(self._state.field, t, settings.id_tol)
            except NotLagrangianError as exc:
                logger.warning(str(exc))
                self._record(Verdict(
                    check="h_symmetry",
                    statement="h is totally symmetric in Lagrangian frames (graph must stay Lagrangian)",
                    worst_value=residual, threshold=settings.id_tol, passed=False, worst_t=t, evaluations=1,
                ))
            else:
                self._record(check_h_symmetry(lagrangian_snapshot, settings.id_tol, t))

    def _probe_evolution(self, t: float) -> None:
        state = self._state
        dt = stable_dt(state.field, self.cfl)
        try:
            probe = checks.probe_evolution(state, dt, self.settings.evo_coeff, self.settings.id_tol)
        except BlowUpError as exc:
            logger.warning(f"evolution probe at t = {t:.6g} blew up: {exc}")
            return
        self._evolution.append(probe)
        name = "trS_evolution" if state.field.codim == 2 else "v_evolution"
        self._record(Verdict(
            check=name, statement="evolution equation holds along the flow (first order in dt)",
            worst_value=probe.residual, threshold=probe.tolerance, passed=probe.passed,
            worst_t=t, evaluations=1,
        ))

    # ------------------------------------------------------------------
    def finalize(self, blow_up: Optional[BlowUpError] = None) -> MonitorReport:
        """Run the series checks and return the report with one verdict per enabled check."""
        report = self.report
        settings = self.settings
        on = self.enabled
        rows = sorted(report.rows, key=lambda r: r.t)
        times = [r.t for r in rows]
        sup_A2 = [r.sup_A2 for r in rows]
        sup_H2 = [r.sup_H2 for r in rows]

        if "trS_min" in on and report.codim == 2:
            for verdict in checks.check_trS_min(self._step_times, self._step_inf_trS, self.config.alpha,
                                                settings.rel_tol, settings.trs_step_tol):
                self._record(verdict)
        if "codim1" in on and report.codim == 1:
            verdicts = checks.check_codim1([], self.config.v0, settings.rel_tol,
                                           step_times=self._step_times, step_sup_v=self._step_sup_v,
                                           v_step_tol=settings.v_step_tol)
            for verdict in verdicts:
                self._record(verdict)
        if "soft_diffineq" in on:
            for verdict in checks.soft_diffineq_checks(times, sup_A2, sup_H2, settings.rel_tol,
                                                       settings.diffineq_slack):
                self._record(verdict)
        if "area_monotone" in on:
            self._record(checks.check_area_monotone(times, [r.area for r in rows], settings.id_tol))
        if "decay_proxy" in on and rows:
            alpha = self.config.alpha if report.codim == 2 else None
            for verdict in checks.check_decay_proxy(times, sup_A2, sup_H2, alpha, settings.rel_tol):
                self._record(verdict)

        report.rows = rows
        report.verdicts = list(self._verdicts.values())
        if blow_up is not None:
            report.blow_up = str(blow_up)
        if self._evolution:
            report.metadata["evolution_probes"] = [
                {"t": p.t, "dt": p.dt, "residual": p.residual, "without_tangential_correction": p.ablation}
                for p in self._evolution
            ]

        failed = report.failed_checks()
        if failed:
            logger.warning(f"Failed checks: {', '.join(failed)}")
        else:
            logger.info(f"All {len(report.verdicts)} verdicts passed")
        return report
