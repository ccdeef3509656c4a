"""Tests for level-set sampling, the phase-1 solver and witness certificates."""
import numpy as np
import pytest
from scipy.optimize import linprog

from src.multi_elicit.catalog import RefutationRecipe, named_property
from src.multi_elicit.core import Distribution, OutcomeSpace, random_distributions
from src.multi_elicit.errors import DegenerateSampleError, InvalidWitnessError, ValueNotAttainedError
from src.multi_elicit.feasibility import phase_one
from src.multi_elicit.witness import (
    LevelSetSample,
    NoWitness,
    Witness,
    WitnessMember,
    embed_product,
    refute,
    sample_level_set,
    verify_witness,
    witness_search,
)


def _mixture(group, m):
    return sum(member.weight * embed_product(Distribution(OutcomeSpace.categorical(len(member.p)), member.p), m)
               for member in group)


def _first_coordinates(sample):
    return sorted(round(p.probs[1], 6) for p in sample.members)


# =============================================================================
# LEVEL SETS
# =============================================================================

def test_variance_level_set(bernoulli):
    sample = sample_level_set(named_property("variance", bernoulli), 0.16, bernoulli)
    assert _first_coordinates(sample) == [0.2, 0.8]
    assert all(abs(p.variance() - 0.16) <= 1e-9 for p in sample.members)


def test_fourth_moment_level_set(bernoulli):
    sample = sample_level_set(named_property("central_moment4", bernoulli), 0.07, bernoulli)
    q = np.array([0.1, 7 / 30])
    roots = np.sort(np.concatenate([(1 - np.sqrt(1 - 4 * q)) / 2, (1 + np.sqrt(1 - 4 * q)) / 2]))
    np.testing.assert_allclose(sorted(p.probs[1] for p in sample.members), roots, atol=1e-9)


def test_touching_level_is_found(bernoulli):
    sample = sample_level_set(named_property("variance", bernoulli), 0.25, bernoulli, scan_resolution=999)
    assert len(sample) >= 1
    assert all(p.probs[1] == pytest.approx(0.5, abs=1e-5) for p in sample.members)


def test_level_set_on_an_edge_of_a_larger_space(three_outcomes):
    sample = sample_level_set(named_property("variance", three_outcomes), 0.5, three_outcomes, support=[0, 2])
    assert len(sample) == 2
    assert all(p.probs[1] == 0.0 for p in sample.members)
    assert all(abs(p.variance() - 0.5) <= 1e-9 for p in sample.members)


def test_level_set_on_a_face(three_outcomes):
    prop = named_property("knorm2", three_outcomes)
    sample = sample_level_set(prop, 0.7, three_outcomes, scan_resolution=60)
    assert len(sample) > 10
    assert all(abs(prop.value(p) - 0.7) <= 1e-9 for p in sample.members)


def test_unattained_level(bernoulli):
    with pytest.raises(ValueNotAttainedError):
        sample_level_set(named_property("variance", bernoulli), 0.3, bernoulli)


# =============================================================================
# EMBEDDING
# =============================================================================

def test_embed_product_example(bernoulli):
    np.testing.assert_allclose(embed_product(Distribution(bernoulli, [0.3, 0.7]), 2), [0.09, 0.21, 0.21, 0.49])


def test_embed_product_sums_to_one(three_outcomes, rng):
    for p in random_distributions(three_outcomes, 10, rng):
        assert embed_product(p, 3).sum() == pytest.approx(1.0, abs=1e-12)


# =============================================================================
# WITNESSES
# =============================================================================

def _levels(prop_name, r1, r2, space):
    prop = named_property(prop_name, space)
    return sample_level_set(prop, r1, space), sample_level_set(prop, r2, space)


def test_variance_single_observation_witness(bernoulli):
    A, B = _levels("variance", 0.16, 0.21, bernoulli)
    w = witness_search(A, B, 1)
    assert isinstance(w, Witness)
    assert w.residual <= 1e-7
    assert verify_witness(w) <= 1e-7
    np.testing.assert_allclose(_mixture(w.group1, 1), _mixture(w.group2, 1), atol=1e-7)
    assert "lambda" in w.to_json()["group1"][0]


def test_fourth_moment_two_observation_witness(bernoulli):
    A, B = _levels("central_moment4", 0.07, 0.08, bernoulli)
    w = witness_search(A, B, 2)
    assert isinstance(w, Witness)
    assert w.residual <= 1e-7
    np.testing.assert_allclose(_mixture(w.group1, 2), _mixture(w.group2, 2), atol=1e-7)


def test_variance_two_observations_has_no_witness(bernoulli):
    A, B = _levels("variance", 0.16, 0.21, bernoulli)
    result = witness_search(A, B, 2)
    assert isinstance(result, NoWitness)
    assert result.status == "no_witness_in_sample"
    assert (result.k1, result.k2) == (2, 2)


def test_degenerate_samples(bernoulli):
    A, _ = _levels("variance", 0.16, 0.21, bernoulli)
    with pytest.raises(DegenerateSampleError):
        witness_search(A, A, 1)
    with pytest.raises(ValueNotAttainedError):
        LevelSetSample("variance", 0.1, [], 1e-9)


def test_verify_witness_detects_tampering(bernoulli):
    A, B = _levels("variance", 0.16, 0.21, bernoulli)
    w = witness_search(A, B, 1)
    group_name = "group1" if len(w.group1) > 1 else "group2"
    group = getattr(w, group_name)
    assert len(group) > 1

    shifted = [
        WitnessMember(p=group[0].p, weight=group[0].weight - 0.01),
        WitnessMember(p=group[1].p, weight=group[1].weight + 0.01),
    ] + group[2:]
    assert verify_witness(w.model_copy(update={group_name: shifted})) > 1e-7

    unnormalized = [WitnessMember(p=group[0].p, weight=group[0].weight + 0.01)] + group[1:]
    with pytest.raises(InvalidWitnessError):
        verify_witness(w.model_copy(update={group_name: unnormalized}))

    negative = [WitnessMember(p=group[0].p, weight=-0.5), WitnessMember(p=group[1].p, weight=1.5)]
    with pytest.raises(InvalidWitnessError):
        verify_witness(w.model_copy(update={group_name: negative}))


def test_refute_variance(bernoulli):
    result = refute(named_property("variance", bernoulli), RefutationRecipe(support_size=2), bernoulli, 1)
    assert isinstance(result, Witness)


# =============================================================================
# PHASE-1 SOLVER
# =============================================================================

def test_phase_one_small_problems():
    feasible = phase_one(np.array([[1.0, 0.0]]), np.array([0.3]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert feasible.feasible
    assert feasible.x.sum() == pytest.approx(1.0)
    assert feasible.x[0] <= 0.3 + 1e-12

    infeasible = phase_one(np.array([[1.0, 1.0]]), np.array([0.5]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert not infeasible.feasible

    with pytest.raises(ValueError):
        phase_one(np.array([[1.0, 0.0]]), np.array([-1.0]), np.array([[1.0, 1.0]]), np.array([1.0]))


def test_phase_one_several_equality_rows():
    pinned = phase_one(np.zeros((0, 2)), np.zeros(0), np.eye(2), np.array([0.4, 0.6]))
    assert pinned.feasible
    np.testing.assert_allclose(pinned.x, [0.4, 0.6], atol=1e-12)

    A_eq = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    mixed = phase_one(np.array([[1.0, 0.0, 0.0]]), np.array([0.1]), A_eq, np.array([0.5, 2.0]))
    assert mixed.feasible
    np.testing.assert_allclose(A_eq @ mixed.x, [0.5, 2.0], atol=1e-10)
    assert mixed.x[0] <= 0.1 + 1e-12

    clash = phase_one(np.zeros((0, 2)), np.zeros(0), np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([0.5, 0.7]))
    assert not clash.feasible


def _oracle_feasible(M1, M2) -> bool:
    k1, k2 = M1.shape[1], M2.shape[1]
    A_eq = np.vstack([np.hstack([M1, -M2]), np.r_[np.ones(k1), np.zeros(k2)], np.r_[np.zeros(k1), np.ones(k2)]])
    b_eq = np.r_[np.zeros(M1.shape[0]), 1.0, 1.0]
    result = linprog(np.zeros(k1 + k2), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return result.status == 0


@pytest.mark.parametrize("m", [1, 2])
def test_witness_search_agrees_with_reference_lp(m, three_outcomes, rng):
    agreements = {True: 0, False: 0}
    for trial in range(40):
        k1, k2 = rng.integers(1, 4, size=2)
        A = LevelSetSample("random", 0.0, random_distributions(three_outcomes, int(k1), rng), 1e-9)
        B = LevelSetSample("random", 1.0, random_distributions(three_outcomes, int(k2), rng), 1e-9)
        M1 = np.column_stack([embed_product(p, m) for p in A.members])
        M2 = np.column_stack([embed_product(p, m) for p in B.members])
        expected = _oracle_feasible(M1, M2)
        result = witness_search(A, B, m)
        assert isinstance(result, Witness) == expected
        agreements[expected] += 1
    assert agreements[False] > 0


@pytest.mark.parametrize("prop_name,r1,r2,m", [
    ("variance", 0.16, 0.21, 1),
    ("variance", 0.16, 0.21, 2),
    ("central_moment4", 0.07, 0.08, 2),
])
def test_witness_search_ignores_member_order(prop_name, r1, r2, m, bernoulli):
    A, B = _levels(prop_name, r1, r2, bernoulli)
    expected = isinstance(witness_search(A, B, m), Witness)
    reversed_A = LevelSetSample(A.property_name, A.r, A.members[::-1], A.level_tol)
    rotated_B = LevelSetSample(B.property_name, B.r, B.members[1:] + B.members[:1], B.level_tol)
    for first, second in ((reversed_A, B), (A, rotated_B), (reversed_A, rotated_B)):
        result = witness_search(first, second, m)
        assert isinstance(result, Witness) == expected
        if expected:
            assert verify_witness(result) <= 1e-7
