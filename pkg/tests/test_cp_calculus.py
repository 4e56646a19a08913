import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds, shapes
from qmlab.algebra import Element, pauli
from qmlab.cp_calculus import (
    almost_multiplication_bound,
    check_cs_inequality,
    correlation_extremes,
    covariance_inequality_check,
    cs_form,
    heisenberg_uncertainty_check,
    state_form,
    t_norm,
)
from qmlab.errors import InvalidArgumentError
from qmlab.instances import random_cpmap, random_element, random_hermitian, random_state
from qmlab.maps import CPMap
from qmlab.states import State, covariance


def test_automorphism_has_zero_form():
    rng = np.random.default_rng(0)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    t = CPMap.unitary_conjugation(Element.from_matrix(u))
    b = random_element(3, rng)
    assert t_norm(t, b) < 1e-7
    assert cs_form(t, b, b).norm() < 1e-12


def test_state_as_map_gives_variance():
    # oracle: for a state the form is the covariance, and ||b||_T^2 the variance
    rho = State.from_vector(2, np.array([1, 1]) / np.sqrt(2))
    t = CPMap.from_state(rho)
    z = pauli("z")
    assert t_norm(t, z) ** 2 == pytest.approx(1.0)
    x = pauli("x")
    assert state_form(rho, x, z).real == pytest.approx(covariance(rho, x, z), abs=1e-12)


@given(shapes, shapes, st.integers(1, 3), seeds)
def test_form_is_positive(dom, cod, rank, seed):
    rng = np.random.default_rng(seed)
    t = random_cpmap(dom, cod, rank, rng)
    b = random_element(dom, rng)
    lo, _ = correlation_extremes(t, b)
    assert lo >= -1e-9 * max(1, b.norm() ** 2)


@given(shapes, shapes, seeds)
def test_form_is_sesquilinear(dom, cod, seed):
    rng = np.random.default_rng(seed)
    t = random_cpmap(dom, cod, 2, rng)
    a, b, c = (random_element(dom, rng) for _ in range(3))
    lam = complex(rng.normal(), rng.normal())
    lhs = cs_form(t, a, b + lam * c)
    rhs = cs_form(t, a, b) + lam * cs_form(t, a, c)
    assert (lhs - rhs).norm() < 1e-10 * max(1, a.norm() * (b.norm() + c.norm()))
    assert (cs_form(t, b, a) - cs_form(t, a, b).H).norm() < 1e-10 * max(1, a.norm() * b.norm())


@given(shapes, shapes, seeds)
def test_cauchy_schwarz(dom, cod, seed):
    rng = np.random.default_rng(seed)
    t = random_cpmap(dom, cod, 2, rng)
    assert check_cs_inequality(t, random_element(dom, rng), random_element(dom, rng)).passed


@given(shapes, shapes, seeds)
def test_almost_multiplicativity(dom, cod, seed):
    rng = np.random.default_rng(seed)
    t = random_cpmap(dom, cod, 2, rng)
    assert almost_multiplication_bound(t, random_element(dom, rng), random_element(dom, rng)).passed


def test_multiplicative_domain_flag():
    t = CPMap.identity(2)
    rep = almost_multiplication_bound(t, pauli("x"), pauli("z"))
    assert rep.extra_checks["multiplicative_domain"]
    assert rep.passed


@given(shapes, seeds)
def test_covariance_and_uncertainty(shape, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(shape, rng)
    a, b = random_hermitian(shape, rng), random_hermitian(shape, rng)
    assert covariance_inequality_check(rho, a, b).passed
    assert heisenberg_uncertainty_check(rho, a, b).passed


def test_uncertainty_is_tight_for_spin():
    rho = State.from_vector(2, np.array([1, 0]))
    rep = heisenberg_uncertainty_check(rho, pauli("x"), pauli("y"))
    assert rep.lhs == pytest.approx(1.0)
    assert rep.rhs == pytest.approx(1.0)


def test_uncertainty_requires_hermitian():
    with pytest.raises(InvalidArgumentError):
        heisenberg_uncertainty_check(State.maximally_mixed(2), Element.from_matrix(np.array([[0, 1], [0, 0]])), pauli("x"))
