import numpy as np
import pytest
from hypothesis import given

from conftest import seeds, shapes
from qmlab.algebra import AlgebraShape, Element, pauli, tensor
from qmlab.errors import InvalidArgumentError, NotAStateError, NotCommutingError, UndefinedReductionError
from qmlab.instances import random_hermitian, random_state
from qmlab.states import (
    State,
    collapsed_state,
    covariance,
    expectation,
    induced_distribution,
    joint_distribution,
    partial_trace,
    product_state,
    reduced_state,
    trace_distance,
    trace_norm_distance,
    variance,
)

UP, DOWN = np.array([1, 0]), np.array([0, 1])
PLUS = np.array([1, 1]) / np.sqrt(2)


def test_rejects_non_states():
    with pytest.raises(NotAStateError):
        State.from_density(np.diag([1.5, -0.5]))
    with pytest.raises(NotAStateError):
        State.from_density(np.diag([0.5, 0.2]))


def test_vector_state_expectation():
    rho = State.from_vector(2, PLUS)
    assert expectation(rho, pauli("x")) == pytest.approx(1.0)
    assert variance(rho, pauli("z")) == pytest.approx(1.0)


def test_vector_across_blocks_is_a_mixture():
    rho = State.from_vector(AlgebraShape((1, 1)), PLUS)
    assert np.allclose(rho.density.to_dense(), np.eye(2) / 2)


def test_trace_distance_is_half_trace_norm():
    up, down = State.from_vector(2, UP), State.from_vector(2, DOWN)
    assert trace_norm_distance(up, down) == pytest.approx(2.0)
    assert trace_distance(up, down) == pytest.approx(1.0)


@given(shapes, seeds)
def test_trace_norm_is_functional_norm(shape, seed):
    # oracle: the functional norm is attained at the sign of the density difference
    rng = np.random.default_rng(seed)
    s1, s2 = random_state(shape, rng), random_state(shape, rng)
    diff = (s1.density - s2.density).to_dense()
    w, v = np.linalg.eigh(diff)
    sign = Element.compress(shape, v @ np.diag(np.sign(w)) @ v.conj().T)
    assert trace_norm_distance(s1, s2) == pytest.approx(abs(expectation(s1, sign) - expectation(s2, sign)), abs=1e-10)


@given(shapes, seeds)
def test_covariance_is_symmetric_and_matches_variance(shape, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(shape, rng)
    a, b = random_hermitian(shape, rng), random_hermitian(shape, rng)
    assert covariance(rho, a, b) == pytest.approx(covariance(rho, b, a), abs=1e-10)
    assert covariance(rho, a, a) == pytest.approx(variance(rho, a), abs=1e-10)


def test_induced_distribution_of_sigma_z():
    table = induced_distribution(State.from_vector(2, PLUS), pauli("z"))
    assert table.prob(1.0) == pytest.approx(0.5)
    assert table.prob(-1.0) == pytest.approx(0.5)
    assert table.total() == pytest.approx(1.0)


def test_joint_distribution_needs_commuting_observables():
    with pytest.raises(NotCommutingError):
        joint_distribution(State.maximally_mixed(2), pauli("x"), pauli("z"))


def test_joint_distribution_of_product():
    z = pauli("z")
    shape = AlgebraShape.full(2)
    rho = product_state(State.from_vector(shape, UP), State.from_vector(shape, PLUS))
    table = joint_distribution(rho, tensor(z, Element.identity(2)), tensor(Element.identity(2), z))
    assert table.prob((1.0, 1.0)) == pytest.approx(0.5)
    assert table.prob((-1.0, 1.0)) == pytest.approx(0.0)


def test_reduced_state_on_projection():
    rho = State.from_vector(2, PLUS)
    red = reduced_state(rho, Element.from_matrix(np.diag([1.0, 0.0])))
    assert np.allclose(red.density.to_dense(), np.diag([1.0, 0.0]))
    with pytest.raises(UndefinedReductionError):
        reduced_state(State.from_vector(2, DOWN), Element.from_matrix(np.diag([1.0, 0.0])))


def test_collapsed_state_dephases():
    rho = State.from_vector(2, PLUS)
    assert np.allclose(collapsed_state(rho, pauli("z")).density.to_dense(), np.eye(2) / 2)


def test_collapse_partition_validation():
    rho = State.from_vector(3, np.ones(3))
    x = Element.from_matrix(np.diag([0.0, 1.0, 2.0]))
    coarse = collapsed_state(rho, x, [(-0.5, 1.5), (1.9, 2.1)]).density.to_dense()
    assert abs(coarse[0, 1]) == pytest.approx(1 / 3)
    assert abs(coarse[0, 2]) == 0.0
    with pytest.raises(InvalidArgumentError):
        collapsed_state(rho, x, [(0, 1), (1, 2)])
    with pytest.raises(InvalidArgumentError):
        collapsed_state(rho, x, [(0, 1)])


@given(shapes, shapes, seeds)
def test_partial_trace_of_product(sa, sb, seed):
    rng = np.random.default_rng(seed)
    s1, s2 = random_state(sa, rng), random_state(sb, rng)
    prod = product_state(s1, s2)
    assert partial_trace(prod, sa, sb, "left").density.allclose(s1.density, atol=1e-10)
    assert partial_trace(prod, sa, sb, "right").density.allclose(s2.density, atol=1e-10)
