from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

TIMESERIES_COLUMNS = (
    "t", "dt", "sup_H2", "sup_A2", "inf_trS", "sup_v",
    "tH2_over_bound", "tA2_over_bound",
    "relation_resid", "pythagoras_resid", "gauss_bonnet_resid", "lagrangian_resid",
    "degenerate_pts",
)


class Verdict(BaseModel):
    check: str = Field(..., description="Check name (e.g. H_decay)")
    statement: str = Field(..., description="Estimate or identity the check asserts")
    bound: Literal["upper", "lower"] = Field("upper", description="Whether threshold bounds the value from above or below")
    worst_value: Optional[float] = Field(None, description="Worst observed value of the checked quantity")
    threshold: Optional[float] = Field(None, description="Value the quantity must stay within")
    passed: bool = Field(..., description="True if the check held at every evaluation")
    worst_t: Optional[float] = Field(None, description="Time of the worst value")
    worst_point: Optional[Tuple[int, int]] = Field(None, description="Grid point of the worst value")
    evaluations: int = Field(0, description="How many times the check was evaluated")
    skipped_points: int = Field(0, description="Degenerate points the check skipped")


class MonitorRow(BaseModel):
    """One row of the time series; None means the quantity does not apply."""
    t: float
    dt: float = 0.0
    sup_H2: float
    sup_A2: float
    inf_trS: Optional[float] = None
    sup_v: Optional[float] = None
    tH2_over_bound: Optional[float] = None
    tA2_over_bound: Optional[float] = None
    relation_resid: Optional[float] = None
    pythagoras_resid: Optional[float] = None
    gauss_bonnet_resid: Optional[float] = None
    lagrangian_resid: Optional[float] = None
    degenerate_pts: int = 0
    area: Optional[float] = None


class MonitorReport(BaseModel):
    codim: int = Field(..., description="Target dimension of the run")
    alpha: Optional[float] = Field(None, description="inf Tr(S) on the initial surface")
    v0: Optional[float] = Field(None, description="sup v on the initial surface (codim 1)")
    rows: List[MonitorRow] = Field(default_factory=list)
    verdicts: List[Verdict] = Field(default_factory=list)
    blow_up: Optional[str] = Field(None, description="Blow-up message if the run aborted")
    metadata: Dict = Field(default_factory=dict, description="Run metadata (grid, steps, scale factor)")

    @property
    def passed(self) -> bool:
        return self.blow_up is None and all(v.passed for v in self.verdicts)

    def failed_checks(self) -> List[str]:
        return [v.check for v in self.verdicts if not v.passed]


class ConvergenceEntry(BaseModel):
    quantity: str
    parameters: List[Union[int, float]] = Field(..., description="Grid sizes N or time steps dt")
    values: List[Optional[float]]
    orders: List[Optional[float]] = Field(default_factory=list, description="Observed orders between successive parameters")


class SweepReport(BaseModel):
    entries: List[ConvergenceEntry] = Field(default_factory=list)
    dt_entries: List[ConvergenceEntry] = Field(default_factory=list)
    metadata: Dict = Field(default_factory=dict)
