"""
Named properties with exact evaluators and their known frontier claims.
"""
import math

import numpy as np

from ..core import Distribution, OutcomeSpace, Property
from ..errors import ArityError, DomainError
from .registry import FrontierClaims, RefutationRecipe, register_property


# =============================================================================
# FRONTIER CLAIMS
# =============================================================================

def _mean_claims(param, space: OutcomeSpace) -> FrontierClaims:
    return FrontierClaims(constructions={(1, 1): "mean1"})


def _variance_claims(param, space: OutcomeSpace) -> FrontierClaims:
    return FrontierClaims(
        constructions={(1, 2): "variance2", (2, 1): "variance_moments1"},
        refutations={(1, 1): RefutationRecipe(support_size=2)},
    )


def _knorm_claims(k: int, space: OutcomeSpace) -> FrontierClaims:
    constructions = {(1, k): f"knorm{k}", (space.size - 1, 1): f"knorm_indicators{k}"}
    refutations = {(1, m): RefutationRecipe(support_size=min(3, space.size)) for m in range(1, k)}
    return FrontierClaims(constructions=constructions, refutations=refutations)


def _dispersion_claims(param, space: OutcomeSpace) -> FrontierClaims:
    return FrontierClaims(
        constructions={(1, 2): "dispersion2", (2, 1): "dispersion_moments1"},
        refutations={(1, 1): RefutationRecipe(support_size=2)},
    )


def _sharpe_claims(param, space: OutcomeSpace) -> FrontierClaims:
    return FrontierClaims(
        constructions={(1, 2): "sharpe2", (2, 1): "sharpe_moments1"},
        refutations={(1, 1): RefutationRecipe(support_size=2)},
    )


def _central_moment_claims(n: int, space: OutcomeSpace) -> FrontierClaims:
    constructions = {(1, n): f"central_moment{n}"}
    if n == 2:
        constructions[(2, 1)] = "variance_moments1"
    # Only the single-observation cell is stated outright; larger m stay open.
    return FrontierClaims(
        constructions=constructions,
        refutations={(1, 1): RefutationRecipe(support_size=2)},
    )


def _sine_claims(param, space: OutcomeSpace) -> FrontierClaims:
    return FrontierClaims(
        constructions={(2, 1): "sine_indicators1"},
        refutations={(1, 1): RefutationRecipe(support_size=3)},
    )


# =============================================================================
# PROPERTIES
# =============================================================================

@register_property("Expected value E[Y].", frontier=_mean_claims)
def mean(space: OutcomeSpace) -> Property:
    return Property(name="mean", report_dim=1, evaluator=Distribution.mean, description="E[Y]")


@register_property("Variance Var(Y) = E[Y²] − E[Y]².", frontier=_variance_claims)
def variance(space: OutcomeSpace) -> Property:
    return Property(name="variance", report_dim=1, evaluator=Distribution.variance, description="Var(Y)")


@register_property(
    "k-norm ‖p‖_k = (Σ_ω p(ω)^k)^{1/k} of the probability vector.",
    parametric=True,
    default_values=(0, 1, 2),
    frontier=_knorm_claims,
)
def knorm(space: OutcomeSpace, k: int) -> Property:
    """
    Raises:
        ArityError: If k < 2.
    """
    if k < 2:
        raise ArityError(f"k-norm needs k ≥ 2, got {k}")
    return Property(
        name=f"knorm({k})",
        report_dim=1,
        evaluator=lambda p: float(np.sum(p.probs ** k) ** (1.0 / k)),
        description=f"‖p‖_{k}",
    )


@register_property(
    "Index of dispersion Var(Y) / E[Y], for positive means.",
    default_values=(1, 2, 3),
    frontier=_dispersion_claims,
)
def dispersion(space: OutcomeSpace) -> Property:
    return Property(
        name="dispersion",
        report_dim=1,
        evaluator=lambda p: p.variance() / p.mean(),
        domain=lambda p: p.mean() > 0,
        domain_note="mean must be positive",
        description="Var(Y)/E[Y]",
    )


@register_property(
    "Sharpe ratio E[Y] / √Var(Y), for positive mean and variance.",
    default_values=(1, 2, 3),
    frontier=_sharpe_claims,
)
def sharpe(space: OutcomeSpace) -> Property:
    return Property(
        name="sharpe",
        report_dim=1,
        evaluator=lambda p: p.mean() / math.sqrt(p.variance()),
        domain=lambda p: p.mean() > 0 and p.variance() > 1e-12,
        domain_note="mean and variance must be positive",
        description="E[Y]/√Var(Y)",
    )


@register_property(
    "n-th central moment E[(Y − E[Y])^n].",
    parametric=True,
    frontier=_central_moment_claims,
)
def central_moment(space: OutcomeSpace, n: int) -> Property:
    """
    Raises:
        ArityError: If n < 2 (the first central moment is identically zero).
    """
    if n < 2:
        raise ArityError(f"Central moments are catalogued for n ≥ 2, got {n}")
    return Property(
        name=f"central_moment({n})",
        report_dim=1,
        evaluator=lambda p: p.central_moment(n),
        description=f"μ_{n}",
    )


@register_property(
    "p₁ − ½·sin(1/p₂) on three outcomes, defined on the open simplex.",
    default_values=(0, 1, 2),
    frontier=_sine_claims,
)
def sine_demo(space: OutcomeSpace) -> Property:
    """
    Identifiable but not a polynomial in p; singular as p₂ → 0.

    Raises:
        DomainError: If the space does not have exactly three outcomes.
    """
    if space.size != 3:
        raise DomainError(f"sine_demo is defined on exactly 3 outcomes, got {space.size}")
    return Property(
        name="sine_demo",
        report_dim=1,
        evaluator=lambda p: p.probs[0] - 0.5 * math.sin(1.0 / p.probs[1]),
        interior_only=True,
        domain_note="open simplex only",
        description="p₁ − ½ sin(1/p₂)",
    )
