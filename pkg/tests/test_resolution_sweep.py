"""
Tests for resolution and time-step sweeps.
"""

import numpy as np
import pytest

from src.comparators.resolution_sweep import SWEEP_QUANTITIES, observed_orders, resolution_sweep
from src.parsers.config_parser import parse_config

SMALL = """
grid.n1 = 8
grid.n2 = 8
map.affine = [[0.6, 0.0], [0.0, 0.4]]
map.modes = [{k: [1, 0], cos: [0.05, 0.0]}]
flow.t_end = 0.02
flow.snapshot_every = 0.01
checks.enabled = [pythagoras, gauss_bonnet, relation]
logging.format = standard
"""


class TestObservedOrders:
    """Test order estimates between successive parameters."""

    def test_second_order_in_resolution(self):
        orders = observed_orders([16, 32, 64], [1e-2, 2.5e-3, 6.25e-4])
        assert orders == pytest.approx([2.0, 2.0])

    def test_first_order_in_dt(self):
        orders = observed_orders([0.1, 0.05, 0.025], [4e-3, 2e-3, 1e-3], decreasing_parameter=True)
        assert orders == pytest.approx([1.0, 1.0])

    def test_undefined_pairs(self):
        assert observed_orders([8, 16, 32], [None, 1e-3, 0.0]) == [None, None]

    def test_single_value(self):
        assert observed_orders([8], [1.0]) == []


class TestResolutionSweep:
    """Test whole sweeps on a tiny setup."""

    def test_needs_three_resolutions(self):
        with pytest.raises(ValueError, match="at least three"):
            resolution_sweep(parse_config(SMALL), [8, 16])

    def test_small_sweep(self):
        report = resolution_sweep(parse_config(SMALL), [32, 8, 16])
        assert report.metadata["resolutions"] == [8, 16, 32]

        quantities = [entry.quantity for entry in report.entries]
        assert "gauss_bonnet_resid" in quantities
        assert "sup_A2_error" in quantities
        assert set(quantities) <= set(SWEEP_QUANTITIES) | {"sup_A2_error", "area_error"}

        for entry in report.entries:
            assert len(entry.orders) == len(entry.parameters) - 1
        sup_A2 = next(e for e in report.entries if e.quantity == "sup_A2_error")
        assert sup_A2.parameters == [8, 16]

        assert [e.quantity for e in report.dt_entries] == [
            "trS_evolution", "trS_evolution_without_tangential_correction",
        ]
        steps = report.dt_entries[0].parameters
        assert np.allclose(np.array(steps[:-1]) / np.array(steps[1:]), 2.0)

    def test_keeps_aspect_ratio(self):
        cfg = parse_config(SMALL.replace("grid.n2 = 8", "grid.n2 = 16"))
        report = resolution_sweep(cfg, [8, 16, 32], dt_levels=2)
        assert len(report.dt_entries[0].parameters) == 2


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
