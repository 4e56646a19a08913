import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from qmlab.algebra import commutator
from qmlab.errors import DegenerateGapError, SizeGuardError
from qmlab.locality import (
    LocalAlgebra,
    LocalElement,
    ProductState,
    averaged_spin,
    chain_from_config,
    commutator_bounds,
    corzel_check,
    corzel_coherence_bound,
    embed,
    embed_global,
    single_site,
    two_site,
)
from qmlab.models import SX, SZ

UP, DOWN = np.array([1, 0]), np.array([0, 1])


def test_embed_matches_kron():
    alg = LocalAlgebra.spin_chain(3)
    assert np.allclose(embed(single_site(1, "z"), alg).to_dense(), np.kron(np.kron(np.eye(2), SZ), np.eye(2)))


def test_embed_respects_support_order():
    alg = LocalAlgebra.spin_chain(3)
    e = two_site((2, 0), SX, SZ)
    expected = np.kron(np.kron(SZ, np.eye(2)), SX)
    assert np.allclose(embed(e, alg).to_dense(), expected)


@given(st.integers(2, 5), seeds)
def test_embed_is_a_homomorphism(n, seed):
    rng = np.random.default_rng(seed)
    alg = LocalAlgebra.spin_chain(n)
    site = int(rng.integers(n))
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    ea, eb = embed(LocalElement((site,), a), alg), embed(LocalElement((site,), b), alg)
    assert (ea @ eb - embed(LocalElement((site,), a @ b), alg)).norm() < 1e-12 * max(1, np.linalg.norm(a) * np.linalg.norm(b))
    assert ea.norm() == pytest.approx(np.linalg.norm(a, 2))


def test_averaged_spin_spectrum():
    w = np.linalg.eigvalsh(embed_global(averaged_spin(4, "z"), LocalAlgebra.spin_chain(4)).to_dense())
    assert np.allclose(np.unique(np.round(w, 12)), [-1, -0.5, 0, 0.5, 1])


@pytest.mark.parametrize("n", range(2, 9))
def test_single_site_commutator_attains_bound(n):
    rep = commutator_bounds(averaged_spin(n, "z"), single_site(0, "x"), LocalAlgebra.spin_chain(n))
    assert averaged_spin(n, "z").kappa == pytest.approx(1 / n)
    assert rep.lhs == pytest.approx(2 / n, abs=1e-10)
    assert rep.rhs == pytest.approx(2 / n, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_global_commutator_bound(n):
    alg = LocalAlgebra.spin_chain(n)
    rep = commutator_bounds(averaged_spin(n, "z"), averaged_spin(n, "y"), alg)
    assert rep.lhs == pytest.approx(2 / n)
    assert rep.passed


def test_disjoint_support_commutes():
    alg = LocalAlgebra.spin_chain(3)
    g = averaged_spin(3, "z")
    from qmlab.locality import GlobalObservable

    partial = GlobalObservable((single_site(0, "z"), single_site(1, "z")))
    assert commutator(embed_global(partial, alg), embed(single_site(2, "x"), alg)).norm() == 0.0
    assert g.kappa == pytest.approx(1 / 3)


def test_corzel_four_site_example():
    alg = LocalAlgebra.spin_chain(4)
    up, down = ProductState.uniform(4, UP), ProductState.uniform(4, DOWN)
    g = averaged_spin(4, "z")
    rep = corzel_check(up, down, g, single_site(0, "x"), alg, 1 / np.sqrt(2), 1 / np.sqrt(2))
    assert rep.rhs == pytest.approx(0.25)
    assert rep.lhs == pytest.approx(0.0, abs=1e-15)
    rep = corzel_check(up, down, g, averaged_spin(4, "x"), alg, 1 / np.sqrt(2), 1 / np.sqrt(2))
    assert rep.rhs == pytest.approx(0.25)


def test_corzel_zero_alpha():
    alg = LocalAlgebra.spin_chain(3)
    plus = ProductState.uniform(3, np.array([1, 1]))
    rep = corzel_check(plus, ProductState.uniform(3, UP), averaged_spin(3, "z"), single_site(1, "x"), alg, 0.0, 1.0)
    assert rep.lhs == pytest.approx(0.0, abs=1e-14)


def test_corzel_degenerate_gap():
    alg = LocalAlgebra.spin_chain(2)
    up = ProductState.uniform(2, UP)
    with pytest.raises(DegenerateGapError):
        corzel_check(up, up, averaged_spin(2, "z"), single_site(0, "x"), alg, 1.0, 0.0)


@given(st.integers(2, 6), seeds)
def test_corzel_random_product_pairs(n, seed):
    rng = np.random.default_rng(seed)
    alg = LocalAlgebra.spin_chain(n)
    f1 = rng.normal(size=2) + 1j * rng.normal(size=2)
    f2 = rng.normal(size=2) + 1j * rng.normal(size=2)
    a = LocalElement((int(rng.integers(n)),), rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    theta = rng.uniform(0, np.pi / 2)
    try:
        rep = corzel_check(ProductState.uniform(n, f1), ProductState.uniform(n, f2), averaged_spin(n, "z"), a, alg,
                           np.cos(theta), np.sin(theta))
        coh = corzel_coherence_bound(ProductState.uniform(n, f1), ProductState.uniform(n, f2), averaged_spin(n, "z"), a, alg)
    except DegenerateGapError:
        return
    assert rep.passed
    assert coh.passed


def test_size_guard(monkeypatch):
    monkeypatch.setenv("QMLAB_SIZE_GUARD", "8")
    with pytest.raises(SizeGuardError):
        embed(single_site(0, "x"), LocalAlgebra.spin_chain(4))


def test_chain_from_config():
    alg, obs, states = chain_from_config({
        "sites": 3,
        "observables": {"m": {"average": "z"}, "probe": {"site": 1, "axis": "x"}},
        "states": {"up": {"product": [[1, 0], [0, 0]]}},
    })
    assert alg.dim == 8
    assert obs["m"].kappa == pytest.approx(1 / 3)
    assert np.allclose(states["up"].vector()[0], 1)
