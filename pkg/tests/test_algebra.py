import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds, shapes
from qmlab.algebra import (
    AlgebraShape,
    Element,
    band_projection,
    block_diag_samples,
    center_witness,
    commutator,
    distance_to_center,
    embed_left,
    embed_right,
    kron_permutation,
    pauli,
    psd_sqrt,
    random_batch_commutator_ratio,
    spectral_decompose,
    tensor,
)
from qmlab.errors import IncompatibleShapeError, NotHermitianError
from qmlab.instances import random_element, random_hermitian


def test_shape_dimensions():
    shape = AlgebraShape((2, 3))
    assert shape.total_dim == 5
    assert shape.algebra_dim == 13
    assert shape.offsets == (0, 2)
    assert AlgebraShape.abelian(3).block_dims == (1, 1, 1)


def test_tensor_shape_is_row_major():
    assert AlgebraShape((1, 2)).tensor(AlgebraShape((2, 3))).block_dims == (2, 3, 4, 6)


def test_from_dense_rejects_off_block_entries():
    mat = np.ones((4, 4))
    with pytest.raises(IncompatibleShapeError):
        Element.from_dense(AlgebraShape((2, 2)), mat)


def test_shape_mismatch_raises():
    with pytest.raises(IncompatibleShapeError):
        Element.identity(2) + Element.identity(AlgebraShape((1, 1)))


def test_pauli_algebra():
    x, y, z = pauli("x"), pauli("y"), pauli("z")
    assert (x @ y - 1j * z).norm() < 1e-15
    assert abs(commutator(x, y).norm() - 2) < 1e-15


def test_norm_is_max_block_norm():
    e = Element.from_blocks(np.diag([1.0, -3.0]), np.array([[2.0]]))
    assert e.norm() == pytest.approx(3.0)


@given(shapes, seeds)
def test_adjoint_reverses_products(shape, seed):
    rng = np.random.default_rng(seed)
    a, b = random_element(shape, rng), random_element(shape, rng)
    assert ((a @ b).H - b.H @ a.H).norm() < 1e-12 * max(1, a.norm() * b.norm())


@given(shapes, seeds)
def test_cstar_identity(shape, seed):
    a = random_element(shape, seed)
    assert (a.H @ a).norm() == pytest.approx(a.norm() ** 2, rel=1e-10)


@given(shapes, shapes, seeds)
def test_tensor_matches_kron_up_to_permutation(sa, sb, seed):
    rng = np.random.default_rng(seed)
    a, b = random_element(sa, rng), random_element(sb, rng)
    perm = kron_permutation(sa, sb)
    kron = np.kron(a.to_dense(), b.to_dense())
    assert np.allclose(tensor(a, b).to_dense(), kron[np.ix_(perm, perm)], atol=1e-12)


@given(shapes, shapes, seeds)
def test_embeddings_commute(sa, sb, seed):
    rng = np.random.default_rng(seed)
    a, b = random_element(sa, rng), random_element(sb, rng)
    left, right = embed_left(a, sb), embed_right(sa, b)
    assert commutator(left, right).norm() < 1e-12 * max(1, a.norm() * b.norm())
    assert (left @ right - tensor(a, b)).norm() < 1e-12 * max(1, a.norm() * b.norm())


@given(shapes, seeds)
def test_spectral_reconstruction(shape, seed):
    x = random_hermitian(shape, seed)
    dec = spectral_decompose(x)
    assert (dec.reconstruct() - x).norm() < 1e-10 * max(1, x.norm())
    total = sum(dec.projections[1:], dec.projections[0])
    assert (total - Element.identity(shape)).norm() < 1e-10
    for p in dec.projections:
        assert (p @ p - p).norm() < 1e-10


def test_spectral_clusters_degenerate_eigenvalues():
    x = Element.from_blocks(np.diag([1.0, 2.0]), np.diag([1.0, 1.0 + 1e-12]))
    dec = spectral_decompose(x)
    assert np.allclose(dec.eigenvalues, [1.0, 2.0])
    assert dec.projections[0].trace().real == pytest.approx(3.0)


def test_spectral_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        spectral_decompose(Element.from_matrix(np.array([[0, 1], [0, 0]])))


def test_band_projection_is_closed_interval():
    x = Element.from_matrix(np.diag([0.0, 1.0, 2.0]))
    assert band_projection(x, 1.0, 2.0).trace().real == pytest.approx(2.0)
    assert band_projection(x, 0.5, 0.9).norm() == 0.0


@given(shapes, seeds)
def test_psd_sqrt_squares_back(shape, seed):
    a = random_element(shape, seed)
    pos = a.H @ a
    root = psd_sqrt(pos)
    assert (root @ root - pos).norm() < 1e-9 * max(1, pos.norm())


def test_distance_to_center_pauli_z():
    assert distance_to_center(pauli("z")) == pytest.approx(1.0)
    assert distance_to_center(Element.identity(3)) == 0.0


def test_distance_to_center_per_block_oracle():
    # oracle: half the largest block spread, computed from dense eigenvalues
    x = Element.from_blocks(np.diag([0.0, 4.0]), np.diag([1.0, 2.0, 7.0]))
    assert distance_to_center(x) == pytest.approx(3.0)


@given(shapes, seeds)
def test_distance_to_center_upper_bounds_sampled_ratio(shape, seed):
    rng = np.random.default_rng(seed)
    x = random_hermitian(shape, rng)
    d = distance_to_center(x)
    ratios = random_batch_commutator_ratio(x, block_diag_samples(shape, rng, 200))
    assert ratios.max() <= d * (1 + 1e-10) + 1e-12
    w = center_witness(x)
    assert commutator(x, w).norm() == pytest.approx(2 * d * w.norm(), abs=1e-9 * max(1, x.norm()))


@given(st.integers(2, 5), seeds)
def test_witness_for_central_element_is_trivial(n, seed):
    rng = np.random.default_rng(seed)
    x = Element.scalar(n, rng.normal())
    assert commutator(x, center_witness(x)).norm() < 1e-12
