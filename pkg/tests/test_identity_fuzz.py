"""
Tests for flow-free fuzzing of the pointwise identities.
"""

import numpy as np
import pytest

from src.validators.identity_fuzz import (
    LAMBDA_MAX,
    RELATION_TOL,
    fuzz_identities,
    random_second_fundamental_forms,
    random_singular_values,
)


class TestSamplers:
    """Test the random tuple generators."""

    def test_singular_values_are_distinct_and_ordered(self, rng):
        lam = random_singular_values(rng, 50_000)
        assert lam.shape == (50_000, 2)
        assert np.all(lam[:, 0] > lam[:, 1])
        assert np.all(lam >= 0.0)
        assert np.all(lam < LAMBDA_MAX)

    def test_second_fundamental_forms_are_symmetric(self, rng):
        h = random_second_fundamental_forms(rng, 1000)
        assert h.shape == (1000, 2, 2, 2)
        assert np.array_equal(h, np.swapaxes(h, -1, -2))

    def test_codim_one_forms(self, rng):
        assert random_second_fundamental_forms(rng, 10, codim=1).shape == (10, 1, 2, 2)


class TestFuzzIdentities:
    """Test the batched identity fuzzer."""

    def test_identities_hold(self):
        result = fuzz_identities(samples=20_000, seed=0, batch=4096)
        assert result.passed
        assert result.relation_max <= RELATION_TOL
        assert result.li_li_violations == 0
        assert result.li_li_max_ratio <= 3.0 * (1.0 + 1e-12)
        assert [v.check for v in result.verdicts()] == ["relation", "pythagoras", "li_li"]
        assert all(v.evaluations == 20_000 for v in result.verdicts())

    def test_deterministic_for_a_seed(self):
        first = fuzz_identities(samples=5000, seed=7, batch=1000)
        second = fuzz_identities(samples=5000, seed=7, batch=1000)
        assert first == second

    def test_batch_remainder(self):
        result = fuzz_identities(samples=2500, seed=1, batch=1000)
        assert result.samples == 2500
        assert result.passed

    @pytest.mark.slow
    def test_one_million_samples(self):
        result = fuzz_identities(samples=1_000_000, seed=0)
        assert result.passed
        assert result.li_li_violations == 0

    def test_benchmark(self, benchmark):
        result = benchmark(fuzz_identities, samples=10_000, seed=3, batch=10_000)
        assert result.passed


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
