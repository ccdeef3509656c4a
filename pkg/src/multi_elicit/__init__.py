"""
multi_elicit - multi-observation property elicitation toolkit.

Losses that see several i.i.d. observations at once, numerical checks that
they elicit a property, witnesses that no m-observation loss can, Voronoi
finite properties and multi-observation regression.
"""
from .core import (
    Distribution,
    ExpectedLoss,
    MultiObsLoss,
    OutcomeSpace,
    Property,
    expected_identification,
    expected_loss,
    interior_grid,
    product_indices,
    product_prob,
    product_weights,
    simplex_grid,
)
from .catalog import frontier_claims, get_loss, list_losses, list_properties, named_property
from .verifier import check_identification, frontier_scan, minimize_report, verify_elicits
from .witness import embed_product, sample_level_set, verify_witness, witness_search
from .settings import SolverSettings, load_settings_from_yaml

__version__ = "0.1.0"

__all__ = [
    "Distribution",
    "ExpectedLoss",
    "MultiObsLoss",
    "OutcomeSpace",
    "Property",
    "SolverSettings",
    "check_identification",
    "embed_product",
    "expected_identification",
    "expected_loss",
    "frontier_claims",
    "frontier_scan",
    "get_loss",
    "interior_grid",
    "list_losses",
    "list_properties",
    "load_settings_from_yaml",
    "minimize_report",
    "named_property",
    "product_indices",
    "product_prob",
    "product_weights",
    "sample_level_set",
    "simplex_grid",
    "verify_elicits",
    "verify_witness",
    "witness_search",
]
