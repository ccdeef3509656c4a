"""
Named loss constructions. Every factory takes the outcome space (and, for
parametric families, the integer parameter) and returns a MultiObsLoss.
"""
import math

import numpy as np

from ..core import MultiObsLoss, OutcomeSpace
from ..errors import ArityError
from .estimators import (
    dispersion_link,
    estimator_loss,
    half_squared_difference,
    indicator_means_loss,
    knorm_loss,
    mean_estimator,
    moments_loss,
    product_estimator,
    ratio_loss,
    require_positive_mean,
    require_size,
    sharpe_link,
    variance_link,
)
from .moments import central_moment_plan
from .registry import register_loss


@register_loss("Squared loss (r − y)².", target="mean")
def mean1(space: OutcomeSpace) -> MultiObsLoss:
    return estimator_loss(mean_estimator(space), name="mean1", description="squared loss (r − y)²")


@register_loss("(r − ½(y₁ − y₂)²)², two observations.", target="variance")
def variance2(space: OutcomeSpace) -> MultiObsLoss:
    return estimator_loss(
        half_squared_difference(space),
        name="variance2",
        description="squared loss against ½(y₁ − y₂)²",
    )


@register_loss("(E[Y], E[Y²]) from one observation, link r₂ − r₁².", target="variance")
def variance_moments1(space: OutcomeSpace) -> MultiObsLoss:
    return moments_loss(space, link=variance_link, link_name="variance", name="variance_moments1")


@register_loss("(r − 1{y₁ = … = y_k})², link r^{1/k}.", target="knorm", parametric=True)
def knorm(space: OutcomeSpace, k: int) -> MultiObsLoss:
    return knorm_loss(space, k)


@register_loss("Probabilities of all but the last outcome, link (Σ p^k)^{1/k}.", target="knorm", parametric=True)
def knorm_indicators(space: OutcomeSpace, k: int) -> MultiObsLoss:
    if k < 2:
        raise ArityError(f"k-norm losses need k ≥ 2, got {k}")

    def link(r):
        r = np.clip(np.asarray(r, dtype=float), 0.0, None)
        rest = max(1.0 - float(r.sum()), 0.0)
        return float((np.sum(r ** k) + rest ** k) ** (1.0 / k))

    return indicator_means_loss(
        space,
        range(space.size - 1),
        link=link,
        link_name=f"knorm({k})",
        name=f"knorm_indicators{k}",
    )


@register_loss("Ratio loss E[½(y₁ − y₂)²] / E[y₁], two observations.", target="dispersion")
def dispersion2(space: OutcomeSpace) -> MultiObsLoss:
    return ratio_loss(
        half_squared_difference(space),
        mean_estimator(space, m=2),
        name="dispersion2",
        description="b·r² − 2a·r with a = ½(y₁ − y₂)², b = y₁",
    )


@register_loss("(E[Y], E[Y²]) from one observation, link (r₂ − r₁²)/r₁.", target="dispersion")
def dispersion_moments1(space: OutcomeSpace) -> MultiObsLoss:
    return moments_loss(
        space,
        link=dispersion_link,
        link_name="dispersion",
        name="dispersion_moments1",
        requires=require_positive_mean,
        requires_note="mean must be positive",
    )


@register_loss("Ratio loss for the squared Sharpe ratio E[y₁y₂] / E[½(y₁ − y₂)²], link √.", target="sharpe")
def sharpe2(space: OutcomeSpace) -> MultiObsLoss:
    return ratio_loss(
        product_estimator(space),
        half_squared_difference(space),
        name="sharpe2",
        link=lambda r: math.sqrt(max(float(r[0]), 0.0)),
        link_name="sharpe",
        inverse_link=lambda x: np.atleast_1d(np.asarray(x, dtype=float)) ** 2,
        description="b·r² − 2a·r with a = y₁y₂, b = ½(y₁ − y₂)²",
    )


@register_loss("(E[Y], E[Y²]) from one observation, link r₁/√(r₂ − r₁²).", target="sharpe")
def sharpe_moments1(space: OutcomeSpace) -> MultiObsLoss:
    return moments_loss(
        space,
        link=sharpe_link,
        link_name="sharpe",
        name="sharpe_moments1",
        requires=lambda p: p.variance() > 1e-12,
        requires_note="variance must be positive",
    )


@register_loss("Single-block estimator loss for μ_n with n observations.", target="central_moment", parametric=True)
def central_moment(space: OutcomeSpace, n: int) -> MultiObsLoss:
    if n < 2:
        raise ArityError(f"Central moments are catalogued for n ≥ 2, got {n}")
    plan = central_moment_plan(n, 1, space)
    return estimator_loss(
        plan.blocks[0].estimator,
        name=f"central_moment{n}",
        description=f"squared loss against the {n}-observation estimator of μ_{n}",
    )


@register_loss("(p₁, p₂) from one observation, link p₁ − ½ sin(1/p₂).", target="sine_demo")
def sine_indicators1(space: OutcomeSpace) -> MultiObsLoss:
    require_size(space, 3, "sine_indicators1")

    def link(r):
        if r[1] <= 0:
            return math.nan
        return float(r[0] - 0.5 * math.sin(1.0 / r[1]))

    return indicator_means_loss(space, (0, 1), link=link, link_name="sine_demo", name="sine_indicators1")
