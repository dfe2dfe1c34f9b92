"""
Tests for the tangential velocity and the material derivative.
"""

import numpy as np
import pytest

from src.flow.engine import flow_rhs
from src.flow.gauge import material_derivative, tangential_velocity
from src.geometry.frames import jacobian
from src.models.fields import MapField


class TestTangentialVelocity:
    """Test V = g^-1 Df^T (df/dt)."""

    def test_affine_field(self, grid16):
        field = MapField.affine_only(grid16, np.diag([0.6, 0.3]))
        assert np.array_equal(tangential_velocity(field), np.zeros((16, 16, 2)))

    @pytest.mark.parametrize("affine", [np.diag([0.6, 0.4]), [[0.3, -0.2]]])
    def test_remainder_is_normal(self, grid32, make_field, affine):
        """(0, df/dt) - dF(V) is orthogonal to the tangent vectors (e_i, d_i f)."""
        field = make_field(grid32, affine, amplitude=0.3)
        rhs = flow_rhs(field)
        V = tangential_velocity(field, rhs)
        df = jacobian(field).df

        base_part = -V
        target_part = np.moveaxis(rhs, 0, -1) - np.einsum("...ai,...i->...a", df, V)
        for i in range(2):
            inner = base_part[..., i] + np.einsum("...a,...a->...", target_part, df[..., :, i])
            assert np.max(np.abs(inner)) < 1e-13

    def test_accepts_precomputed_rhs(self, grid16, make_field):
        field = make_field(grid16, np.diag([0.5, 0.2]))
        assert np.allclose(tangential_velocity(field), tangential_velocity(field, flow_rhs(field)))


class TestMaterialDerivative:
    """Test (w_next - w)/dt - V . grad w."""

    def test_static_field_moves_with_the_surface(self, grid16):
        w = np.ones(grid16.shape)
        V = np.zeros(grid16.shape + (2,))
        V[..., 0] = 2.0
        dw = np.zeros(grid16.shape + (2,))
        dw[..., 0] = 0.5
        assert np.allclose(material_derivative(w, w, 0.1, V, dw), -1.0)

    def test_zero_velocity(self, grid16, rng):
        w = rng.standard_normal(grid16.shape)
        w_next = w + 0.02
        V = np.zeros(grid16.shape + (2,))
        assert np.allclose(material_derivative(w, w_next, 0.01, V, rng.standard_normal(grid16.shape + (2,))), 2.0)

    @pytest.mark.parametrize("dt", [0.0, -1e-3])
    def test_rejects_nonpositive_dt(self, grid16, dt):
        w = np.zeros(grid16.shape)
        V = np.zeros(grid16.shape + (2,))
        with pytest.raises(ValueError, match="dt must be positive"):
            material_derivative(w, w, dt, V, V)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
