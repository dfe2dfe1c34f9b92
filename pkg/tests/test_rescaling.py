"""
Tests for rescaling maps to area decreasing ones.
"""

import numpy as np
import pytest

from src.geometry.frames import jacobian, singular_values
from src.geometry.rescaling import normalize_to_area_decreasing
from src.models.fields import MapField


def sup_product(field: MapField) -> float:
    lam = singular_values(jacobian(field).df)
    return float(np.max(lam[..., 0] * lam[..., 1]))


class TestNormalizeToAreaDecreasing:
    """Test normalize_to_area_decreasing."""

    def test_doubling_map(self, grid16):
        """f = 2 id with margin 0.1: c just above sqrt(4 / 0.9), sup lambda1 lambda2 <= 0.9 exactly."""
        field, c = normalize_to_area_decreasing(MapField.affine_only(grid16, 2 * np.eye(2)), 0.1)
        assert c > np.sqrt(4 / 0.9)
        assert sup_product(field) <= 0.9

    def test_already_area_decreasing(self, grid16):
        original = MapField.affine_only(grid16, np.diag([0.5, 0.3]))
        field, c = normalize_to_area_decreasing(original, 0.1)
        assert c == 1.0
        assert field is original

    def test_constant_map(self, grid16):
        original = MapField.affine_only(grid16, np.zeros((2, 2)), offset=[1.0, 2.0])
        field, c = normalize_to_area_decreasing(original, 0.5)
        assert c == 1.0
        assert field is original

    def test_perturbed_map(self, grid32, make_field):
        """Affine and periodic parts are scaled together."""
        original = make_field(grid32, np.diag([1.4, 1.1]), amplitude=0.5)
        field, c = normalize_to_area_decreasing(original, 0.2)
        assert c > 1.0
        assert np.allclose(field.affine, original.affine / c)
        assert np.allclose(field.perturbation, original.perturbation / c)
        assert sup_product(field) <= 0.8

    @pytest.mark.parametrize("margin", [0.0, 1.0, -0.1])
    def test_rejects_bad_margin(self, grid16, margin):
        with pytest.raises(ValueError):
            normalize_to_area_decreasing(MapField.affine_only(grid16, np.eye(2)), margin)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
