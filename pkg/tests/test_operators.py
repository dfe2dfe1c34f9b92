"""
Tests for the intrinsic gradient norm and the Laplace-Beltrami operator.
"""

import numpy as np
import pytest

from src.geometry.curvature import build_snapshot
from src.geometry.operators import laplace_beltrami, surface_gradient_norm
from src.geometry.spectral import differentiator, integrate
from src.models.fields import MapField, PeriodicGrid


class TestSurfaceGradientNorm:
    """Test |grad w|^2 = g^{ij} d_i w d_j w."""

    def test_constant(self, grid16):
        w = np.full(grid16.shape, 3.0)
        g_inv = np.broadcast_to(np.eye(2), grid16.shape + (2, 2))
        assert np.max(np.abs(surface_gradient_norm(grid16, w, g_inv))) < 1e-24

    def test_flat_metric(self):
        """g = I, w = sin(2 pi x1 / L1): |grad w|^2 = (2 pi / L1)^2 cos^2."""
        grid = PeriodicGrid(32, 16, 3.0, 2.0)
        x1, _ = grid.coordinates()
        k = 2 * np.pi / grid.L1
        g_inv = np.broadcast_to(np.eye(2), grid.shape + (2, 2))
        result = surface_gradient_norm(grid, np.sin(k * x1), g_inv)
        assert np.allclose(result, k ** 2 * np.cos(k * x1) ** 2, atol=1e-12)

    def test_reuses_given_gradient(self, grid16, rng):
        w = rng.standard_normal(grid16.shape)
        g_inv = np.broadcast_to(np.diag([0.5, 2.0]), grid16.shape + (2, 2))
        dw = differentiator(grid16).gradient(w)
        assert np.allclose(surface_gradient_norm(grid16, w, g_inv, dw),
                           0.5 * dw[..., 0] ** 2 + 2.0 * dw[..., 1] ** 2)


class TestLaplaceBeltrami:
    """Test Delta w = (1/sqrt det g) d_i (sqrt det g g^{ij} d_j w)."""

    def test_constant(self, grid16, make_field):
        snapshot = build_snapshot(make_field(grid16, np.diag([0.5, 0.3])))
        w = np.full(grid16.shape, -1.5)
        assert np.max(np.abs(laplace_beltrami(grid16, w, snapshot.g, snapshot.g_inv))) < 1e-12

    def test_flat_eigenfunction(self):
        """g = I: Delta sin(2 pi x1 / L1) = -(2 pi / L1)^2 sin(2 pi x1 / L1)."""
        grid = PeriodicGrid(32, 16, 3.0, 2.0)
        x1, _ = grid.coordinates()
        k = 2 * np.pi / grid.L1
        w = np.sin(k * x1)
        g = np.broadcast_to(np.eye(2), grid.shape + (2, 2))
        assert np.allclose(laplace_beltrami(grid, w, g, g), -k ** 2 * w, atol=1e-11)

    def test_constant_metric(self):
        """For an affine graph Delta w = g^{ij} d_ij w."""
        grid = PeriodicGrid(32, 32)
        x1, x2 = grid.coordinates()
        snapshot = build_snapshot(MapField.affine_only(grid, [[0.6, 0.2], [-0.1, 0.4]]))
        w = np.sin(x1) * np.cos(2 * x2) + 0.3 * np.cos(x1 + x2)
        hessian = differentiator(grid).hessian(w)
        expected = np.einsum("...ij,...ij->...", snapshot.g_inv, hessian)
        assert np.allclose(laplace_beltrami(grid, w, snapshot.g, snapshot.g_inv), expected, atol=1e-12)

    def test_integrates_to_zero(self, grid32, make_field, rng):
        """int Delta w dmu = 0 on the closed surface."""
        snapshot = build_snapshot(make_field(grid32, np.diag([0.7, 0.2]), amplitude=0.2))
        w = np.cos(grid32.coordinates()[0]) + 0.1 * rng.standard_normal(grid32.shape)
        lap = laplace_beltrami(grid32, w, snapshot.g, snapshot.g_inv)
        assert abs(integrate(grid32, lap * snapshot.area_element)) < 1e-10

    def test_fourth_order_oracle_converges(self, make_field):
        """Residual against 4th-order finite differences falls at the oracle's order."""
        errors = []
        for n in (32, 64):
            grid = PeriodicGrid(n, n)
            x1, x2 = grid.coordinates()
            w = np.sin(x1) * np.cos(x2)
            g = np.broadcast_to(np.diag([1.5, 1.2]), grid.shape + (2, 2))
            g_inv = np.linalg.inv(g)

            def d2(values, axis, h):
                return (-np.roll(values, -2, axis) + 16 * np.roll(values, -1, axis) - 30 * values
                        + 16 * np.roll(values, 1, axis) - np.roll(values, 2, axis)) / (12 * h ** 2)

            oracle = g_inv[..., 0, 0] * d2(w, 0, grid.h1) + g_inv[..., 1, 1] * d2(w, 1, grid.h2)
            errors.append(np.max(np.abs(laplace_beltrami(grid, w, g, g_inv) - oracle)))

        assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
