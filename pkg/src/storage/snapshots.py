"""
Binary field snapshots with a JSON sidecar.

The data file holds the periodic perturbation as little-endian float64,
components interleaved and then i fastest, j slowest (array order
[j][i][component]). The sidecar records everything else needed to rebuild
the MapField and resume the flow.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from src.models.errors import SnapshotFormatError
from src.models.fields import FlowState, GeometrySnapshot, MapField, PeriodicGrid

SNAPSHOT_FORMAT = "gmcf-snap-1"
_DTYPE = np.dtype("<f8")


class GridRecord(BaseModel):
    n1: int
    n2: int
    L1: float
    L2: float


class SnapshotSidecar(BaseModel):
    format: str = Field(..., description="Format version string")
    data_file: str = Field(..., description="Name of the binary data file, relative to the sidecar")
    grid: GridRecord
    codim: int
    affine: List[List[float]]
    offset: List[float]
    t: float
    step_count: int = 0
    summary: Dict[str, float] = Field(default_factory=dict, description="Pointwise extrema at t")


@dataclass(frozen=True)
class LoadedSnapshot:
    field: MapField
    t: float
    step_count: int

    def as_state(self) -> FlowState:
        return FlowState(self.t, self.field, self.step_count)


def _paths(path: Union[str, Path]) -> Tuple[Path, Path]:
    base = Path(path)
    if base.suffix in (".json", ".bin"):
        base = base.with_suffix("")
    return base.with_name(base.name + ".bin"), base.with_name(base.name + ".json")


def write_snapshot(state: FlowState, snapshot: Optional[GeometrySnapshot],
                   path: Union[str, Path]) -> Tuple[Path, Path]:
    """
    Write <path>.bin and <path>.json for state.

    Args:
        state: Flow state to save
        snapshot: Geometry of the same state; its extrema go into the sidecar summary
        path: Base path (a .bin or .json suffix is ignored)

    Returns:
        (data path, sidecar path)
    """
    data_path, sidecar_path = _paths(path)
    data_path.parent.mkdir(parents=True, exist_ok=True)
    field = state.field
    grid = field.grid

    summary = {}
    if snapshot is not None:
        summary = {
            "sup_A2": float(np.max(snapshot.normA2)),
            "sup_H2": float(np.max(snapshot.normH2)),
            "area": float(np.sum(snapshot.area_element) * grid.cell_area),
        }

    sidecar = SnapshotSidecar(
        format=SNAPSHOT_FORMAT,
        data_file=data_path.name,
        grid=GridRecord(n1=grid.n1, n2=grid.n2, L1=grid.L1, L2=grid.L2),
        codim=field.codim,
        affine=field.affine.tolist(),
        offset=field.offset.tolist(),
        t=state.t,
        step_count=state.step_count,
        summary=summary,
    )

    payload = np.ascontiguousarray(field.perturbation.transpose(2, 1, 0), dtype=_DTYPE)
    tmp = data_path.with_name(data_path.name + ".tmp")
    tmp.write_bytes(payload.tobytes(order="C"))
    tmp.replace(data_path)
    tmp = sidecar_path.with_name(sidecar_path.name + ".tmp")
    tmp.write_text(sidecar.model_dump_json(indent=2), encoding="utf-8")
    tmp.replace(sidecar_path)
    return data_path, sidecar_path


def load_snapshot(path: Union[str, Path]) -> LoadedSnapshot:
    """
    Reload a snapshot written by write_snapshot, bit-exactly.

    Raises:
        SnapshotFormatError: on a missing file, a malformed sidecar or an unknown format version
    """
    _, sidecar_path = _paths(path)
    if not sidecar_path.exists():
        raise SnapshotFormatError(f"snapshot sidecar not found: {sidecar_path}")
    try:
        sidecar = SnapshotSidecar.model_validate_json(sidecar_path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise SnapshotFormatError(f"malformed snapshot sidecar {sidecar_path}: {exc.error_count()} errors") from exc
    if sidecar.format != SNAPSHOT_FORMAT:
        raise SnapshotFormatError(
            f"unsupported snapshot format {sidecar.format!r} (expected {SNAPSHOT_FORMAT!r})"
        )

    grid = PeriodicGrid(sidecar.grid.n1, sidecar.grid.n2, sidecar.grid.L1, sidecar.grid.L2)
    data_path = sidecar_path.with_name(sidecar.data_file)
    if not data_path.exists():
        raise SnapshotFormatError(f"snapshot data not found: {data_path}")
    raw = np.frombuffer(data_path.read_bytes(), dtype=_DTYPE)
    expected = sidecar.codim * grid.n1 * grid.n2
    if raw.size != expected:
        raise SnapshotFormatError(f"snapshot data has {raw.size} values, expected {expected}")

    u = raw.reshape(grid.n2, grid.n1, sidecar.codim).transpose(2, 1, 0).astype(float)
    field = MapField(grid, np.asarray(sidecar.affine), np.asarray(sidecar.offset), u)
    return LoadedSnapshot(field=field, t=sidecar.t, step_count=sidecar.step_count)
