"""
Catalog aggregator.

Importing the entry modules runs their @register_* decorators and fills the
global registries; the helpers below resolve catalog names (``variance``,
``knorm(2)``, ``central_moment4``) into ready-to-use objects.
"""
from typing import List, Optional

from ..core import MultiObsLoss, OutcomeSpace, Property
from .registry import (
    LOSS_INFO,
    LOSS_REGISTRY,
    PROPERTY_INFO,
    PROPERTY_REGISTRY,
    EntryInfo,
    FrontierClaims,
    RefutationRecipe,
    parse_name,
)

# The act of importing executes the decorators, populating the registries.
from . import properties  # noqa: F401
from . import losses  # noqa: F401

from .estimators import (
    SumProductEstimator,
    estimator_from_json,
    estimator_loss,
    indicator_means_loss,
    knorm_loss,
    moments_loss,
    polynomial_from_json,
    polynomial_loss,
    ratio_loss,
)
from .moments import CentralMomentPlan, central_moment_plan


def default_space(name: str) -> OutcomeSpace:
    """The outcome values a property is scanned on when none are given."""
    base, _ = parse_name(name, PROPERTY_REGISTRY, PROPERTY_INFO, "property")
    return OutcomeSpace.from_values(PROPERTY_INFO[base].default_values)


def named_property(name: str, space: Optional[OutcomeSpace] = None) -> Property:
    """
    Resolves a property name on an outcome space.

    Args:
        name: ``mean``, ``variance``, ``knorm(k)``, ``dispersion``, ``sharpe``,
            ``central_moment(n)`` or ``sine_demo`` (``knorm2`` also works).
        space: Outcome space; the entry's default values when omitted.

    Raises:
        UnknownNameError: If the name is not registered.
    """
    base, param = parse_name(name, PROPERTY_REGISTRY, PROPERTY_INFO, "property")
    space = space or OutcomeSpace.from_values(PROPERTY_INFO[base].default_values)
    factory = PROPERTY_REGISTRY[base]
    return factory(space, param) if param is not None else factory(space)


def get_loss(name: str, space: OutcomeSpace) -> MultiObsLoss:
    """
    Resolves a loss name (``variance2``, ``knorm3``, ``central_moment4``, ...).

    Raises:
        UnknownNameError: If the name is not registered.
    """
    base, param = parse_name(name, LOSS_REGISTRY, LOSS_INFO, "loss")
    factory = LOSS_REGISTRY[base]
    return factory(space, param) if param is not None else factory(space)


def frontier_claims(name: str, space: OutcomeSpace) -> FrontierClaims:
    """Known constructions and refutation recipes of a property on a space."""
    base, param = parse_name(name, PROPERTY_REGISTRY, PROPERTY_INFO, "property")
    claims = PROPERTY_INFO[base].frontier
    if claims is None:
        return FrontierClaims()
    return claims(param, space)


def list_properties() -> List[EntryInfo]:
    return [PROPERTY_INFO[name] for name in sorted(PROPERTY_INFO)]


def list_losses() -> List[EntryInfo]:
    return [LOSS_INFO[name] for name in sorted(LOSS_INFO)]


__all__ = [
    "CentralMomentPlan",
    "EntryInfo",
    "FrontierClaims",
    "RefutationRecipe",
    "SumProductEstimator",
    "central_moment_plan",
    "default_space",
    "estimator_from_json",
    "estimator_loss",
    "frontier_claims",
    "get_loss",
    "indicator_means_loss",
    "knorm_loss",
    "list_losses",
    "list_properties",
    "moments_loss",
    "named_property",
    "polynomial_from_json",
    "polynomial_loss",
    "ratio_loss",
]
