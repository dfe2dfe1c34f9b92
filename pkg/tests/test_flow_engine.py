"""
Tests for the flow right side, the RK4 stepper and the evolve loop.
"""

import numpy as np
import pytest

from src.config.settings import FlowConfig
from src.flow import engine
from src.flow.engine import evolve, flow_rhs, stable_dt, step
from src.generators.initial_data import random_modes
from src.models.errors import BlowUpError
from src.models.fields import FlowState, MapField, PeriodicGrid


def sine_field(grid: PeriodicGrid, eps: float) -> MapField:
    x1, _ = grid.coordinates()
    u = np.stack([eps * np.sin(x1), np.zeros(grid.shape)])
    return MapField(grid, np.zeros((2, 2)), np.zeros(2), u)


class TestFlowRhs:
    """Test d f / dt = g^{ij} d_ij f."""

    def test_affine_is_stationary(self, grid16):
        field = MapField.affine_only(grid16, [[0.7, 0.2], [-0.3, 0.5]], offset=[1.0, -2.0])
        assert np.array_equal(flow_rhs(field), np.zeros((2, 16, 16)))

    def test_small_amplitude_is_heat_equation(self):
        """eps sin(x1): rhs = -eps sin(x1) (1 + O(eps^2))."""
        grid = PeriodicGrid(32, 32)
        eps = 1e-3
        x1, _ = grid.coordinates()
        rhs = flow_rhs(sine_field(grid, eps))
        assert np.max(np.abs(rhs[0] + eps * np.sin(x1))) <= 1.01 * eps ** 3
        assert np.max(np.abs(rhs[1])) == 0.0

    def test_curve_shortening(self):
        """A graph over one variable moves by u'' / (1 + u'^2)."""
        grid = PeriodicGrid(32, 16)
        eps = 0.5
        x1, _ = grid.coordinates()
        rhs = flow_rhs(sine_field(grid, eps))
        expected = -eps * np.sin(x1) / (1 + (eps * np.cos(x1)) ** 2)
        assert np.allclose(rhs[0], expected, atol=1e-12)

    def test_codim_one(self, grid16):
        """Scalar graphs use the same formula with g = I + Df^T Df."""
        x1, x2 = grid16.coordinates()
        u = 0.2 * np.sin(x1)[None]
        field = MapField(grid16, [[0.0, 0.5]], [0.0], u)
        rhs = flow_rhs(field)
        # g^{11} = (1 + 0.25) / det g with det g = 1 + u'^2 + 0.25
        det_g = 1.0 + (0.2 * np.cos(x1)) ** 2 + 0.25
        assert np.allclose(rhs[0], 1.25 / det_g * (-0.2 * np.sin(x1)), atol=1e-13)

    def test_non_finite_raises_blow_up(self, grid16):
        u = np.zeros((2,) + grid16.shape)
        u[1, 2, 7] = np.inf
        with pytest.raises(BlowUpError) as info:
            flow_rhs(MapField(grid16, np.eye(2), np.zeros(2), u), t=0.5)
        assert info.value.point == (2, 7)
        assert info.value.t == 0.5


class TestStep:
    """Test single RK4 steps."""

    def test_stable_dt(self, grid16, make_field):
        """Step is cfl times the RK4 limit over the Nyquist |k|^2, since g^-1 <= I."""
        expected = 0.5 * engine.RK4_REAL_LIMIT / (8 ** 2 + 8 ** 2)
        assert stable_dt(MapField.affine_only(grid16, np.eye(2)), 0.5) == pytest.approx(expected)
        assert stable_dt(make_field(grid16, np.diag([0.6, 0.4])), 0.5) <= expected * (1 + 1e-12)

    def test_stable_dt_scaling(self):
        """Doubling the resolution quarters the step."""
        coarse = stable_dt(MapField.affine_only(PeriodicGrid(32, 32), np.eye(2)), 0.5)
        fine = stable_dt(MapField.affine_only(PeriodicGrid(64, 64), np.eye(2)), 0.5)
        assert fine == pytest.approx(coarse / 4)

    def test_full_cfl_is_stable(self):
        """cfl = 1 reproduces the cfl = 0.5 trajectory instead of amplifying grid modes."""
        grid = PeriodicGrid(32, 32)
        rng = np.random.default_rng(5)
        u = random_modes(grid, 2, 3, 0.05, rng)
        field = MapField(grid, np.diag([0.6, 0.4]), np.zeros(2), u)

        finals = []
        for cfl in (0.5, 1.0):
            summary = evolve(FlowState(0.0, field), FlowConfig(t_end=1.0, cfl=cfl, snapshot_every=1.0))
            assert summary.completed
            finals.append(summary.final_state.field.perturbation)

        assert np.max(np.abs(finals[0])) < 0.05
        assert np.max(np.abs(finals[1] - finals[0])) < 1e-6

    def test_affine_state_only_advances_time(self, grid16):
        field = MapField.affine_only(grid16, np.diag([0.7, 0.5]))
        state = step(FlowState(0.0, field), 0.01)
        assert state.t == 0.01
        assert state.step_count == 1
        assert state.last_dt == 0.01
        assert np.array_equal(state.field.perturbation, field.perturbation)
        assert np.array_equal(state.field.affine, field.affine)

    def test_matches_heat_decay(self):
        """Small sine data decays like exp(-k^2 dt) to O(eps^3) + O(dt^5)."""
        grid = PeriodicGrid(32, 32)
        eps = 1e-4
        field = sine_field(grid, eps)
        dt = stable_dt(field, 0.5)
        state = step(FlowState(0.0, field), dt)
        x1, _ = grid.coordinates()
        assert np.max(np.abs(state.field.perturbation[0] - eps * np.exp(-dt) * np.sin(x1))) < 1e-13

    def test_temporal_order(self):
        """Richardson test on linearized data: observed order >= 3.9."""
        grid = PeriodicGrid(16, 16)
        eps = 1e-8
        _, x2 = grid.coordinates()
        u = np.stack([eps * np.cos(2 * x2), np.zeros(grid.shape)])
        field = MapField(grid, np.zeros((2, 2)), np.zeros(2), u)
        t_end = 0.2
        exact = eps * np.exp(-4 * t_end) * np.cos(2 * x2)

        errors = []
        for steps in (10, 20, 40):
            state = FlowState(0.0, field)
            for _ in range(steps):
                state = step(state, t_end / steps)
            errors.append(np.max(np.abs(state.field.perturbation[0] - exact)))

        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 3.9)


class TestEvolve:
    """Test the evolve loop."""

    def test_affine_trajectory_is_stationary(self, grid16):
        field = MapField.affine_only(grid16, np.diag([0.7, 0.5]))
        summary = evolve(FlowState(0.0, field), FlowConfig(t_end=0.2, snapshot_every=0.05))
        assert summary.completed
        assert summary.final_state.t == pytest.approx(0.2)
        assert np.array_equal(summary.final_state.field.perturbation, np.zeros((2, 16, 16)))
        assert np.array_equal(summary.final_state.field.affine, field.affine)

    def test_lands_on_emission_times(self, grid16, make_field):
        summary = evolve(FlowState(0.0, make_field(grid16, np.diag([0.5, 0.3]))),
                         FlowConfig(t_end=0.2, snapshot_every=0.05))
        assert summary.emitted_times == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2], abs=1e-15)
        assert summary.max_dt <= stable_dt(summary.initial_state.field, 0.5) * (1 + 1e-12)

    def test_final_state_is_emitted(self, grid16):
        field = MapField.affine_only(grid16, np.eye(2) * 0.4)
        summary = evolve(FlowState(0.0, field), FlowConfig(t_end=0.12, snapshot_every=0.05))
        assert summary.emitted_times == pytest.approx([0.0, 0.05, 0.1, 0.12], abs=1e-15)

    def test_max_steps(self, grid16):
        field = MapField.affine_only(grid16, np.eye(2) * 0.4)
        summary = evolve(FlowState(0.0, field), FlowConfig(t_end=1.0, max_steps=3))
        assert summary.steps == 3
        assert summary.final_state.step_count == 3
        assert summary.emitted_times[-1] == summary.final_state.t

    def test_observers_and_hooks(self, grid16, make_field):
        """Observers see each snapshot; hooks see every (previous, next) pair."""
        seen = []
        pairs = []

        def observer(t, snapshot, tensor):
            seen.append((t, snapshot.t, tensor.trS.shape))

        def hook(previous, current):
            pairs.append((previous.t, current.t))

        summary = evolve(FlowState(0.0, make_field(grid16, np.diag([0.5, 0.3]))),
                         FlowConfig(t_end=0.1, snapshot_every=0.05),
                         observers=[observer], step_hooks=[hook])

        assert [t for t, _, _ in seen] == summary.emitted_times
        assert all(t == snap_t and shape == (16, 16) for t, snap_t, shape in seen)
        assert len(pairs) == summary.steps
        assert all(b > a for a, b in pairs)

    def test_blow_up_is_recorded(self, grid16, make_field, mocker):
        """A blow-up stops the run and keeps the last valid state."""
        real_step = engine.step

        def flaky(state, dt):
            if state.step_count >= 1:
                raise BlowUpError("non-finite values", t=state.t + dt, point=(1, 2))
            return real_step(state, dt)

        mocker.patch("src.flow.engine.step", side_effect=flaky)
        summary = evolve(FlowState(0.0, make_field(grid16, np.diag([0.5, 0.3]))), FlowConfig(t_end=1.0))

        assert not summary.completed
        assert summary.steps == 1
        assert summary.blow_up.last_state.step_count == 1
        assert summary.final_state.step_count == 1
        assert summary.emitted_times == [0.0, summary.final_state.t]

    @pytest.mark.slow
    def test_affine_stationarity_full_resolution(self):
        """128^2 grid, lambda = (0.7, 0.5), t = 1: sup |u| <= 1e-11."""
        grid = PeriodicGrid(128, 128)
        field = MapField.affine_only(grid, np.diag([0.7, 0.5]))
        summary = evolve(FlowState(0.0, field), FlowConfig(t_end=1.0))
        assert np.max(np.abs(summary.final_state.field.perturbation)) <= 1e-11


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
