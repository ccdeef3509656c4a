"""Tests for the property/loss catalog, estimator constructions and central-moment plans."""
import math

import numpy as np
import pytest

from src.multi_elicit.catalog import (
    central_moment_plan,
    default_space,
    estimator_from_json,
    estimator_loss,
    frontier_claims,
    get_loss,
    list_losses,
    list_properties,
    named_property,
    polynomial_from_json,
    polynomial_loss,
    ratio_loss,
)
from src.multi_elicit.catalog.estimators import (
    half_squared_difference,
    mean_estimator,
    polynomial_estimator,
    polynomial_value,
)
from src.multi_elicit.core import Distribution, OutcomeSpace, expected_identification, random_distributions
from src.multi_elicit.errors import ArityError, DomainError, PlanError, UnknownNameError
from src.multi_elicit.verifier import minimize_report


def _binomial_central_moment(p: Distribution, n: int) -> float:
    """μ_n = Σ_i (−1)^i C(n, i) E[Y]^i E[Y^{n−i}]."""
    mu = p.mean()
    return sum((-1) ** i * math.comb(n, i) * mu ** i * p.moment(n - i) for i in range(n + 1))


# =============================================================================
# NAMES
# =============================================================================

def test_named_property_examples():
    bern = OutcomeSpace.from_values([0, 1])
    assert named_property("variance", bern).value(Distribution.uniform(bern)) == pytest.approx(0.25)

    space = OutcomeSpace.from_values([1, 2, 3, 4])
    assert named_property("mean", space).value(Distribution(space, [0.5, 0, 0, 0.5])) == pytest.approx(2.5)
    assert named_property("knorm(2)", space).value(Distribution.uniform(space)) == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["knorm(3)", "knorm3"])
def test_parametric_names(name, three_outcomes):
    prop = named_property(name, three_outcomes)
    assert prop.name == "knorm(3)"


def test_unknown_names(three_outcomes):
    with pytest.raises(UnknownNameError):
        named_property("kurtosis", three_outcomes)
    with pytest.raises(UnknownNameError):
        get_loss("variance7", three_outcomes)
    with pytest.raises(UnknownNameError):
        named_property("knorm", three_outcomes)


def test_parameter_ranges(three_outcomes):
    with pytest.raises(ArityError):
        named_property("knorm1", three_outcomes)
    with pytest.raises(ArityError):
        get_loss("central_moment1", three_outcomes)


def test_listing_covers_registered_entries():
    properties = {info.name for info in list_properties()}
    assert properties == {"mean", "variance", "knorm", "dispersion", "sharpe", "central_moment", "sine_demo"}
    losses = {info.name: info.target for info in list_losses()}
    assert losses["variance2"] == "variance"
    assert losses["sharpe2"] == "sharpe"


def test_default_space():
    assert default_space("dispersion").values == (1.0, 2.0, 3.0)
    assert default_space("knorm2").size == 3


def test_frontier_claims(three_outcomes):
    claims = frontier_claims("variance", three_outcomes)
    assert claims.constructions[(1, 2)] == "variance2"
    assert (1, 1) in claims.refutations
    knorm = frontier_claims("knorm3", three_outcomes)
    assert knorm.constructions == {(1, 3): "knorm3", (2, 1): "knorm_indicators3"}
    assert set(knorm.refutations) == {(1, 1), (1, 2)}


def test_domains():
    space = OutcomeSpace.from_values([-1, 1])
    dispersion = named_property("dispersion", space)
    with pytest.raises(DomainError):
        dispersion.evaluate(Distribution(space, [0.75, 0.25]))

    with pytest.raises(DomainError):
        named_property("sine_demo", OutcomeSpace.from_values([0, 1]))
    sine_space = OutcomeSpace.from_values([0, 1, 2])
    sine = named_property("sine_demo", sine_space)
    with pytest.raises(DomainError):
        sine.evaluate(Distribution(sine_space, [0.5, 0.5, 0.0]))
    p = Distribution(sine_space, [0.2, 0.5, 0.3])
    assert sine.value(p) == pytest.approx(0.2 - 0.5 * math.sin(2.0))


# =============================================================================
# ESTIMATOR LOSSES
# =============================================================================

def test_variance_estimator_minimizer(bernoulli):
    loss = get_loss("variance2", bernoulli)
    assert minimize_report(loss, Distribution.uniform(bernoulli))[0] == pytest.approx(0.25, abs=1e-6)


def test_single_term_estimator_is_mean_loss():
    space = OutcomeSpace.from_values([1, 3])
    loss = estimator_loss(mean_estimator(space))
    assert loss.obs_count == 1
    assert minimize_report(loss, Distribution(space, [0.25, 0.75]))[0] == pytest.approx(2.5, abs=1e-6)


def test_estimator_minimizer_is_closed_form(three_outcomes, rng):
    est = half_squared_difference(three_outcomes)
    loss = estimator_loss(est)
    for p in random_distributions(three_outcomes, 20, rng):
        target = est.expectation(p)
        assert target == pytest.approx(p.variance(), abs=1e-12)
        np.testing.assert_allclose(expected_identification(loss, target, p), [0.0], atol=1e-12)


def test_knorm_loss_examples(three_outcomes):
    loss = get_loss("knorm2", three_outcomes)
    p = Distribution(three_outcomes, [0.5, 0.25, 0.25])
    r = minimize_report(loss, p)
    assert r[0] == pytest.approx(0.375, abs=1e-6)
    assert loss.reported(r)[0] == pytest.approx(0.61237, abs=1e-5)

    four = OutcomeSpace.categorical(4)
    assert minimize_report(get_loss("knorm2", four), Distribution.uniform(four))[0] == pytest.approx(0.25, abs=1e-6)
    cube = get_loss("knorm3", three_outcomes)
    assert minimize_report(cube, Distribution.point_mass(three_outcomes, 1))[0] == pytest.approx(1.0, abs=1e-6)


def test_ratio_loss_examples():
    space = OutcomeSpace.from_values([1, 2, 3])
    p = Distribution(space, [0.5, 0.5, 0.0])
    assert minimize_report(get_loss("dispersion2", space), p)[0] == pytest.approx(1 / 6, abs=1e-6)

    sharpe = get_loss("sharpe2", space)
    r = minimize_report(sharpe, p)
    assert r[0] == pytest.approx(9.0, abs=1e-6)
    assert sharpe.reported(r)[0] == pytest.approx(3.0, abs=1e-6)

    same = ratio_loss(mean_estimator(space), mean_estimator(space), report_box=(0.0, 2.0))
    assert minimize_report(same, p)[0] == pytest.approx(1.0, abs=1e-6)


def test_ratio_loss_scale_invariance(rng):
    space = OutcomeSpace.from_values([1, 2, 3])
    numer, denom = half_squared_difference(space), mean_estimator(space, m=2)
    base = ratio_loss(numer, denom, report_box=(0.0, 4.0))
    scaled = ratio_loss(numer.scaled(7.5), denom.scaled(7.5), report_box=(0.0, 4.0))
    for p in random_distributions(space, 5, rng):
        assert minimize_report(base, p)[0] == pytest.approx(minimize_report(scaled, p)[0], abs=1e-7)


def test_ratio_loss_rejects_nonpositive_denominator():
    space = OutcomeSpace.from_values([-1, 1])
    loss = get_loss("dispersion2", space)
    with pytest.raises(DomainError):
        minimize_report(loss, Distribution(space, [0.75, 0.25]))


def test_polynomial_loss_examples(bernoulli, three_outcomes):
    loss = polynomial_loss({(0, 1): 1.0}, bernoulli, 2)
    assert minimize_report(loss, Distribution.uniform(bernoulli))[0] == pytest.approx(0.25, abs=1e-6)

    constant = polynomial_loss({(): 3.0}, three_outcomes, 3)
    p = Distribution(three_outcomes, [0.2, 0.3, 0.5])
    assert minimize_report(constant, p)[0] == pytest.approx(3.0, abs=1e-6)

    squares = {(0, 0): 1.0, (1, 1): 1.0, (2, 2): 1.0}
    expected = minimize_report(get_loss("knorm2", three_outcomes), p)[0]
    assert minimize_report(polynomial_loss(squares, three_outcomes, 2), p)[0] == pytest.approx(expected, abs=1e-6)
    assert polynomial_value(squares, p) == pytest.approx(0.38)


def test_polynomial_degree_exceeds_m(three_outcomes):
    with pytest.raises(ArityError):
        polynomial_estimator({(0, 1, 2): 1.0}, three_outcomes, 2)


def test_json_loaders(bernoulli):
    coeffs = polynomial_from_json([{"monomial": [1, 0], "coeff": 2.0}, {"monomial": [0, 1], "coeff": 1.0}])
    assert coeffs == {(0, 1): 3.0}

    est = estimator_from_json({"terms": [[[0.0, 1.0]]]}, bernoulli)
    assert est.expectation(Distribution(bernoulli, [0.4, 0.6])) == pytest.approx(0.6)


# =============================================================================
# CENTRAL-MOMENT PLANS
# =============================================================================

def test_plan_examples(bernoulli):
    half = Distribution.uniform(bernoulli)
    variance = central_moment_plan(2, 1, bernoulli)
    assert variance.observations == 2
    assert variance.evaluate(half) == pytest.approx(0.25)

    indirect = central_moment_plan(4, 4, bernoulli)
    assert len(indirect.blocks) == 4
    assert indirect.observations == 1
    assert indirect.report_dim == 5

    direct = central_moment_plan(4, 1, bernoulli)
    assert direct.observations == 4
    assert direct.evaluate(half) == pytest.approx(0.0625)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_plan_link_identity(n, three_outcomes, rng):
    distributions = random_distributions(three_outcomes, 200, rng)
    for k in range(1, n + 1):
        plan = central_moment_plan(n, k, three_outcomes)
        assert plan.observations <= math.ceil(n / k)
        for p in distributions:
            assert plan.evaluate(p) == pytest.approx(_binomial_central_moment(p, n), abs=1e-10)
            report = np.append(plan.block_values(p), p.mean())
            assert plan.link(report) == pytest.approx(p.central_moment(n), abs=1e-10)


def test_plan_rejects_bad_block_counts(bernoulli):
    with pytest.raises(PlanError):
        central_moment_plan(3, 4, bernoulli)
    with pytest.raises(PlanError):
        central_moment_plan(3, 0, bernoulli)
    with pytest.raises(PlanError):
        central_moment_plan(3, 1, bernoulli).block_loss(1)


def test_plan_block_loss_elicits_block_value(three_outcomes):
    plan = central_moment_plan(4, 2, three_outcomes)
    p = Distribution(three_outcomes, [0.2, 0.5, 0.3])
    values = plan.block_values(p)
    for j in range(plan.k):
        r = minimize_report(plan.block_loss(j), p)
        assert r[0] == pytest.approx(values[j], abs=1e-6)
