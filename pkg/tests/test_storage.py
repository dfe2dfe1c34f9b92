"""
Tests for snapshot files and the CSV/JSON outputs.
"""

import json

import numpy as np
import pytest

from src.geometry.curvature import build_snapshot
from src.models.errors import GMCFError, SnapshotFormatError
from src.models.fields import FlowState
from src.models.schema import ConvergenceEntry, MonitorReport, MonitorRow, SweepReport, TIMESERIES_COLUMNS
from src.storage.reports import TIMESERIES_VERSION, read_timeseries, write_report, write_sweep, write_timeseries
from src.storage.snapshots import SNAPSHOT_FORMAT, load_snapshot, write_snapshot


@pytest.fixture
def state(grid16, make_field):
    field = make_field(grid16, [[0.5, 0.1], [-0.2, 0.3]], amplitude=0.2, seed=9)
    return FlowState(0.375, field, step_count=12)


class TestSnapshots:
    """Test the binary snapshot format."""

    def test_round_trip_is_bit_exact(self, state, tmp_path):
        data_path, sidecar_path = write_snapshot(state, build_snapshot(state.field, state.t), tmp_path / "snap")
        assert data_path.name == "snap.bin"
        assert sidecar_path.name == "snap.json"

        loaded = load_snapshot(tmp_path / "snap")
        assert loaded.t == 0.375
        assert loaded.step_count == 12
        assert loaded.field.grid == state.field.grid
        assert np.array_equal(loaded.field.perturbation, state.field.perturbation)
        assert np.array_equal(loaded.field.affine, state.field.affine)
        assert loaded.as_state().step_count == 12

    def test_byte_layout(self, state, tmp_path):
        """Little-endian float64, component fastest, then i, then j."""
        data_path, _ = write_snapshot(state, None, tmp_path / "snap")
        raw = np.frombuffer(data_path.read_bytes(), dtype="<f8")
        u = state.field.perturbation
        assert raw.size == 2 * 16 * 16
        assert raw[0] == u[0, 0, 0]
        assert raw[1] == u[1, 0, 0]
        assert raw[2] == u[0, 1, 0]
        assert raw[2 * 16] == u[0, 0, 1]

    def test_sidecar(self, state, tmp_path):
        _, sidecar_path = write_snapshot(state, build_snapshot(state.field), tmp_path / "snap.json")
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        assert sidecar["format"] == SNAPSHOT_FORMAT
        assert sidecar["data_file"] == "snap.bin"
        assert sidecar["codim"] == 2
        assert set(sidecar["summary"]) == {"sup_A2", "sup_H2", "area"}

    def test_codim_one(self, grid16, make_field, tmp_path):
        state = FlowState(0.0, make_field(grid16, [[0.3, 0.4]]))
        write_snapshot(state, None, tmp_path / "scalar")
        loaded = load_snapshot(tmp_path / "scalar.bin")
        assert loaded.field.codim == 1
        assert np.array_equal(loaded.field.perturbation, state.field.perturbation)

    def test_missing_sidecar(self, tmp_path):
        with pytest.raises(SnapshotFormatError, match="not found"):
            load_snapshot(tmp_path / "absent")

    def test_unknown_version(self, state, tmp_path):
        _, sidecar_path = write_snapshot(state, None, tmp_path / "snap")
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        sidecar["format"] = "gmcf-snap-0"
        sidecar_path.write_text(json.dumps(sidecar), encoding="utf-8")
        with pytest.raises(SnapshotFormatError, match="unsupported snapshot format"):
            load_snapshot(tmp_path / "snap")

    def test_malformed_sidecar(self, state, tmp_path):
        _, sidecar_path = write_snapshot(state, None, tmp_path / "snap")
        sidecar_path.write_text('{"format": "gmcf-snap-1"}', encoding="utf-8")
        with pytest.raises(SnapshotFormatError, match="malformed"):
            load_snapshot(tmp_path / "snap")

    def test_truncated_data(self, state, tmp_path):
        data_path, _ = write_snapshot(state, None, tmp_path / "snap")
        data_path.write_bytes(data_path.read_bytes()[:-8])
        with pytest.raises(SnapshotFormatError, match="expected 512"):
            load_snapshot(tmp_path / "snap")


def make_report() -> MonitorReport:
    rows = [
        MonitorRow(t=0.1, dt=0.01, sup_H2=0.25, sup_A2=0.5, inf_trS=0.9, degenerate_pts=1, area=40.0),
        MonitorRow(t=0.0, dt=0.0, sup_H2=0.3, sup_A2=0.6, inf_trS=0.8, relation_resid=1e-15, area=40.5),
    ]
    return MonitorReport(codim=2, alpha=0.8, rows=rows)


class TestTimeseries:
    """Test the time series CSV."""

    def test_header(self, tmp_path):
        path = write_timeseries(make_report(), tmp_path / "timeseries.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == TIMESERIES_VERSION
        assert lines[1] == ",".join(TIMESERIES_COLUMNS)
        assert lines[1].startswith("t,dt,sup_H2,sup_A2,inf_trS,sup_v,")
        assert len(lines) == 4

    def test_read_back(self, tmp_path):
        path = write_timeseries(make_report(), tmp_path / "timeseries.csv")
        rows = read_timeseries(path)
        assert [row["t"] for row in rows] == [0.0, 0.1]
        assert rows[0]["relation_resid"] == 1e-15
        assert rows[0]["sup_v"] is None
        assert rows[1]["degenerate_pts"] == 1.0

    def test_empty_report(self, tmp_path):
        with pytest.raises(GMCFError, match="empty"):
            write_timeseries(MonitorReport(codim=2), tmp_path / "timeseries.csv")

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "old.csv"
        path.write_text("# gmcf-timeseries v0\nt\n0.0\n", encoding="utf-8")
        with pytest.raises(GMCFError, match="version"):
            read_timeseries(path)

    def test_report_json(self, tmp_path):
        path = write_report(make_report(), tmp_path / "report.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["alpha"] == 0.8
        assert len(data["rows"]) == 2
        assert MonitorReport.model_validate(data) == make_report()


class TestSweepTable:
    """Test the convergence table."""

    def test_layout(self, tmp_path):
        report = SweepReport(
            entries=[ConvergenceEntry(quantity="sup_A2", parameters=[16, 32, 64],
                                      values=[0.5, 0.51, 0.5101], orders=[6.6, 6.6])],
            dt_entries=[ConvergenceEntry(quantity="sup_A2", parameters=[0.01, 0.005],
                                         values=[0.5, 0.5], orders=[None])],
        )
        lines = write_sweep(report, tmp_path / "sweep.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "quantity,sweep,parameter,value,order"
        assert lines[1] == "sup_A2,N,16,0.5,"
        assert lines[2] == "sup_A2,N,32,0.51,6.6"
        assert lines[4] == "sup_A2,dt,0.01,0.5,"
        assert lines[5] == "sup_A2,dt,0.005,0.5,"
        assert len(lines) == 6


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
