"""
Flow-free fuzzing of the pointwise algebraic identities.

The Tr(S) relation, the identity S_ii^2 + T_ii^2 = 1 and the improved
|A|^4 inequality hold for any singular values and any symmetric second
fundamental form, so they can be tested on random tuples without a flow.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from src.geometry.curvature import tensor_S
from src.models.schema import Verdict
from src.utils.logger import get_logger
from src.validators.checks import LI_LI_SLACK, PYTHAGORAS_TOL, li_li_terms, pythagoras_residual, relation_terms

logger = get_logger(__name__)

RELATION_TOL = 1e-10
LAMBDA_MAX = 2.0


@dataclass
class IdentityFuzzResult:
    """Worst residuals over all random samples."""
    samples: int
    seed: int
    relation_max: float = 0.0
    pythagoras_max: float = 0.0
    li_li_max_ratio: float = 0.0
    li_li_violations: int = 0

    def verdicts(self) -> List[Verdict]:
        return [
            Verdict(check="relation", statement="Tr(S) relation identity (relative residual)",
                    worst_value=self.relation_max, threshold=RELATION_TOL,
                    passed=self.relation_max <= RELATION_TOL, evaluations=self.samples),
            Verdict(check="pythagoras", statement="S_ii^2 + T_ii^2 = 1",
                    worst_value=self.pythagoras_max, threshold=PYTHAGORAS_TOL,
                    passed=self.pythagoras_max <= PYTHAGORAS_TOL, evaluations=self.samples),
            Verdict(check="li_li", statement="Li-Li bound: left side <= 3 |A|^4",
                    worst_value=self.li_li_max_ratio, threshold=3.0,
                    passed=self.li_li_violations == 0, evaluations=self.samples),
        ]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts())


def random_singular_values(rng: np.random.Generator, count: int) -> np.ndarray:
    """Distinct pairs lambda1 > lambda2 drawn uniformly from (0, LAMBDA_MAX)."""
    lam = rng.uniform(0.0, LAMBDA_MAX, size=(count, 2))
    lam = np.sort(lam, axis=-1)[:, ::-1]
    ties = lam[:, 0] == lam[:, 1]
    lam[ties, 1] *= 0.5
    return lam


def random_second_fundamental_forms(rng: np.random.Generator, count: int, codim: int = 2) -> np.ndarray:
    """Symmetric h[alpha, i, j] with magnitudes spread over several decades."""
    h = rng.standard_normal((count, codim, 2, 2))
    h = 0.5 * (h + np.swapaxes(h, -1, -2))
    return h * (10.0 ** rng.uniform(-3.0, 3.0, size=(count, 1, 1, 1)))


def fuzz_identities(samples: int = 1_000_000, seed: int = 0, batch: int = 100_000) -> IdentityFuzzResult:
    """
    Evaluate the identities on `samples` random (lambda, h) tuples, in batches.

    Args:
        samples: Number of random tuples
        seed: Seed for numpy's default_rng
        batch: Tuples evaluated per vectorized batch
    """
    rng = np.random.default_rng(seed)
    result = IdentityFuzzResult(samples=samples, seed=seed)

    remaining = samples
    while remaining > 0:
        count = min(batch, remaining)
        remaining -= count
        lam = random_singular_values(rng, count)
        h = random_second_fundamental_forms(rng, count)

        left, right, _, scale = relation_terms(lam, h)
        relative = np.abs(left - right) / np.maximum(scale, np.finfo(float).tiny)
        result.relation_max = max(result.relation_max, float(np.max(relative)))

        result.pythagoras_max = max(result.pythagoras_max, pythagoras_residual(tensor_S(lam)))

        li_left, normA4 = li_li_terms(h)
        ratio = li_left / np.maximum(normA4, np.finfo(float).tiny)
        result.li_li_max_ratio = max(result.li_li_max_ratio, float(np.max(ratio)))
        result.li_li_violations += int(np.count_nonzero(li_left > 3.0 * normA4 * (1.0 + LI_LI_SLACK)))

    logger.info(
        f"Fuzzed {samples} tuples (seed {seed}): relation {result.relation_max:.2e}, "
        f"pythagoras {result.pythagoras_max:.2e}, Li-Li max ratio {result.li_li_max_ratio:.4f}"
    )
    return result
