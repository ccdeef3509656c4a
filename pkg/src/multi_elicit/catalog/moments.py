"""
Central-moment plans.

μ_n = E[(Y − E[Y])^n] = Σ_{i=0}^{n} (−1)^i C(n, i) · E[Y]^i · E[Y^{n−i}].

The index range 0..n is split into k contiguous blocks. Block j starting at
s_j has the partial sum E[Y]^{s_j} · S_j where

    S_j = Σ_{i in block} (−1)^i C(n, i) · E[Y]^{i − s_j} · E[Y^{n−i}]

is a sum of products of expectations, so it is elicited by an estimator loss
with at most ⌈n/k⌉ observations. Eliciting (S_1, …, S_k, E[Y]) and applying
the reconstruction link gives μ_n.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import comb

from ..core import Distribution, MultiObsLoss, OutcomeSpace
from ..errors import PlanError
from .estimators import SumProductEstimator, estimator_loss


@dataclass(frozen=True)
class MomentBlock:
    mean_power: int
    indices: Tuple[int, ...]
    estimator: SumProductEstimator

    @property
    def observations(self) -> int:
        return self.estimator.arity


@dataclass(frozen=True)
class CentralMomentPlan:
    """k blocks reconstructing the n-th central moment, plus the mean."""
    n: int
    k: int
    space: OutcomeSpace
    blocks: Tuple[MomentBlock, ...]

    @property
    def observations(self) -> int:
        """Observations needed by the most demanding block."""
        return max(block.observations for block in self.blocks)

    @property
    def report_dim(self) -> int:
        return self.k + 1

    def block_values(self, p: Distribution) -> np.ndarray:
        """Exact S_j for every block."""
        return np.array([block.estimator.expectation(p) for block in self.blocks])

    def reconstruct(self, values: Sequence[float], mean: float) -> float:
        """μ_n = Σ_j mean^{e_j} · S_j."""
        return float(sum(mean ** block.mean_power * s for block, s in zip(self.blocks, values)))

    def evaluate(self, p: Distribution) -> float:
        return self.reconstruct(self.block_values(p), p.mean())

    def link(self, r: np.ndarray) -> float:
        """Link on the (S_1, …, S_k, E[Y]) report."""
        r = np.asarray(r, dtype=float)
        return self.reconstruct(r[:self.k], r[self.k])

    def block_loss(self, j: int) -> MultiObsLoss:
        """Squared estimator loss eliciting S_j (0-based j)."""
        if not 0 <= j < self.k:
            raise PlanError(f"Block index {j} out of range for k = {self.k}")
        block = self.blocks[j]
        return estimator_loss(
            block.estimator,
            name=f"central_moment{self.n}_block{j + 1}",
            description=f"partial sum over indices {block.indices[0]}..{block.indices[-1]}",
        )


def _block_sizes(n: int, k: int) -> List[int]:
    """
    Contiguous block sizes over the n + 1 indices. The last block may hold
    ⌈n/k⌉ + 1 indices (its final term has no E[Y^{n−i}] factor); every
    other block holds at most ⌈n/k⌉.
    """
    c = math.ceil(n / k)
    sizes = [1] * k
    extra = n + 1 - k
    grow = min(extra, c)
    sizes[-1] += grow
    extra -= grow
    for j in range(k - 1):
        grow = min(extra, c - 1)
        sizes[j] += grow
        extra -= grow
    return sizes


def _block_estimator(n: int, start: int, indices: Sequence[int], space: OutcomeSpace) -> SumProductEstimator:
    v = space.value_array
    ones = np.ones(space.size)
    raw_terms = []
    for i in indices:
        factors = [v] * (i - start)
        if n > i:
            factors.append(v ** (n - i))
        coeff = (-1) ** i * float(comb(n, i, exact=True))
        raw_terms.append((coeff, factors))
    arity = max(1, max(len(factors) for _, factors in raw_terms))
    terms = []
    for coeff, factors in raw_terms:
        factors = factors + [ones] * (arity - len(factors))
        factors[0] = factors[0] * coeff
        terms.append(tuple(factors))
    return SumProductEstimator(tuple(terms))


def central_moment_plan(n: int, k: int, space: OutcomeSpace) -> CentralMomentPlan:
    """
    Builds the k-block plan for μ_n on the given outcome values.

    Raises:
        PlanError: If n < 1 or k is outside 1..n.

    Examples:
        >>> plan = central_moment_plan(4, 1, OutcomeSpace.from_values([0, 1]))
        >>> plan.observations
        4
    """
    if n < 1:
        raise PlanError(f"Moment order must be at least 1, got {n}")
    if not 1 <= k <= n:
        raise PlanError(f"Block count must satisfy 1 ≤ k ≤ n = {n}, got {k}")
    blocks = []
    start = 0
    for size in _block_sizes(n, k):
        indices = tuple(range(start, start + size))
        blocks.append(MomentBlock(start, indices, _block_estimator(n, start, indices, space)))
        start += size
    return CentralMomentPlan(n=n, k=k, space=space, blocks=tuple(blocks))
