"""
Decorator-based catalog registration system.

Properties and losses register themselves by function name when their
module is imported. Parametric families (k-norms, central moments) register
once and are addressed as ``knorm(3)`` or ``knorm3``.
"""
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

from ..errors import UnknownNameError

# Global registries
PROPERTY_REGISTRY: Dict[str, Callable[..., Any]] = {}
PROPERTY_INFO: Dict[str, "EntryInfo"] = {}
LOSS_REGISTRY: Dict[str, Callable[..., Any]] = {}
LOSS_INFO: Dict[str, "EntryInfo"] = {}

_NAME_PATTERN = re.compile(r"^([a-z_]+?)(?:\((\d+)\)|(\d+))?$")


@dataclass(frozen=True)
class RefutationRecipe:
    """
    How to look for a direct-elicitation witness at one frontier cell:
    scan the face spanned by the first `support_size` outcomes.
    """
    support_size: int = 2


@dataclass(frozen=True)
class FrontierClaims:
    """Known (d, m) constructions (by loss name) and refutation recipes of a property."""
    constructions: Dict[Tuple[int, int], str] = field(default_factory=dict)
    refutations: Dict[Tuple[int, int], RefutationRecipe] = field(default_factory=dict)


@dataclass(frozen=True)
class EntryInfo:
    name: str
    description: str
    parametric: bool = False
    default_values: Tuple[float, ...] = (0.0, 1.0)
    frontier: Optional[Callable[..., FrontierClaims]] = None
    target: Optional[str] = None


def register_property(
    description: str,
    parametric: bool = False,
    default_values: Tuple[float, ...] = (0.0, 1.0),
    frontier: Optional[Callable[..., FrontierClaims]] = None,
):
    """
    A decorator to register a property factory.

    Args:
        description: What the property measures.
        parametric: Whether the factory takes an integer parameter (k, n).
        default_values: Outcome values used when the CLI gets none.
        frontier: ``(param, space) -> FrontierClaims`` for frontier scans.
    """
    def decorator(func: Callable):
        name = func.__name__
        PROPERTY_REGISTRY[name] = func
        PROPERTY_INFO[name] = EntryInfo(
            name=name,
            description=description,
            parametric=parametric,
            default_values=tuple(float(v) for v in default_values),
            frontier=frontier,
        )
        return func
    return decorator


def register_loss(description: str, target: str, parametric: bool = False):
    """
    A decorator to register a loss factory ``(space[, param]) -> MultiObsLoss``.

    Args:
        description: What the loss elicits and how.
        target: Name of the property the loss (after its link) elicits.
        parametric: Whether the factory takes an integer parameter.
    """
    def decorator(func: Callable):
        name = func.__name__
        LOSS_REGISTRY[name] = func
        LOSS_INFO[name] = EntryInfo(name=name, description=description, parametric=parametric, target=target)
        return func
    return decorator


def parse_name(name: str, registry: Dict[str, Callable[..., Any]], info: Dict[str, EntryInfo], kind: str) -> Tuple[str, Optional[int]]:
    """
    Resolves a catalog name to (registered name, parameter).

    Exact names win; otherwise a trailing integer (``knorm3``) or a call-style
    suffix (``knorm(3)``) selects a parametric family.

    Raises:
        UnknownNameError: If nothing matches.
    """
    name = name.strip()
    if name in registry and not info[name].parametric:
        return name, None
    match = _NAME_PATTERN.match(name)
    if match:
        base = match.group(1)
        digits = match.group(2) or match.group(3)
        if base in registry and info[base].parametric and digits is not None:
            return base, int(digits)
    known = ", ".join(sorted(
        f"{n}(k)" if info[n].parametric else n for n in registry
    ))
    raise UnknownNameError(f"Unknown {kind} '{name}'. Known: {known}")
