"""Finite-dimensional C*-algebras represented as direct sums of matrix blocks.

An algebra ``M_{n_1} + ... + M_{n_k}`` is described by an :class:`AlgebraShape`
holding the block sizes; an :class:`Element` stores one dense matrix per block.
The dense form of an element is the block-diagonal matrix with blocks in
order, acting on ``C^{n_1 + ... + n_k}``.

Tensor products follow ``(+_i M_{n_i}) (x) (+_j M_{m_j}) = +_{ij} M_{n_i m_j}``
with the pair ``(i, j)`` enumerated row-major, so a product of two full matrix
algebras is the ordinary Kronecker product.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import IncompatibleShapeError, InvalidArgumentError, NotHermitianError

HERMITIAN_TOL = 1e-10
CLUSTER_TOL = 1e-8
PSD_TOL = 1e-9


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes of a direct sum of full matrix algebras."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise InvalidArgumentError("an algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise InvalidArgumentError(f"block sizes must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def full(cls, n: int) -> "AlgebraShape":
        """The full matrix algebra ``M_n``."""
        return cls((n,))

    @classmethod
    def abelian(cls, k: int) -> "AlgebraShape":
        """The commutative algebra ``C^k`` (k one-dimensional blocks)."""
        return cls((1,) * k)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for d in self.block_dims:
            out.append(acc)
            acc += d
        return tuple(out)

    @property
    def algebra_dim(self) -> int:
        """Complex dimension of the algebra itself."""
        return sum(d * d for d in self.block_dims)

    def tensor(self, other: "AlgebraShape") -> "AlgebraShape":
        return AlgebraShape(tuple(n * m for n in self.block_dims for m in other.block_dims))

    def __str__(self) -> str:
        return " + ".join(f"M{d}" for d in self.block_dims)


def _as_shape(shape) -> AlgebraShape:
    if isinstance(shape, AlgebraShape):
        return shape
    if isinstance(shape, int):
        return AlgebraShape.full(shape)
    return AlgebraShape(tuple(shape))


def _check_same_shape(a: "Element", b: "Element"):
    if a.shape != b.shape:
        raise IncompatibleShapeError(f"shapes differ: {a.shape} vs {b.shape}")


class Element:
    """An element of a block algebra.

    Blocks are copied into read-only complex arrays, so elements behave as
    immutable values.
    """

    __slots__ = ("shape", "blocks")
    # Make numpy scalars defer to the reflected operators below.
    __array_ufunc__ = None

    def __init__(self, shape, blocks: Iterable[np.ndarray]):
        shape = _as_shape(shape)
        blocks = tuple(np.array(b, dtype=complex) for b in blocks)
        if len(blocks) != shape.num_blocks:
            raise IncompatibleShapeError(
                f"expected {shape.num_blocks} blocks for {shape}, got {len(blocks)}"
            )
        for d, b in zip(shape.block_dims, blocks):
            if b.shape != (d, d):
                raise IncompatibleShapeError(f"block of shape {b.shape} where ({d}, {d}) expected")
            b.setflags(write=False)
        self.shape = shape
        self.blocks = blocks

    # construction -------------------------------------------------------

    @classmethod
    def from_dense(cls, shape, mat, tol: float = 1e-12) -> "Element":
        """Read an element from its block-diagonal dense matrix.

        Raises if the entries outside the diagonal blocks exceed ``tol``
        relative to the matrix norm.
        """
        shape = _as_shape(shape)
        mat = np.asarray(mat, dtype=complex)
        n = shape.total_dim
        if mat.shape != (n, n):
            raise IncompatibleShapeError(f"dense matrix {mat.shape} does not fit {shape}")
        blocks = []
        off_block = mat.copy()
        for o, d in zip(shape.offsets, shape.block_dims):
            blocks.append(mat[o:o + d, o:o + d])
            off_block[o:o + d, o:o + d] = 0
        if shape.num_blocks > 1:
            scale = max(np.abs(mat).max(initial=0.0), 1.0)
            if np.abs(off_block).max(initial=0.0) > tol * scale:
                raise IncompatibleShapeError("matrix has entries outside the algebra's blocks")
        return cls(shape, blocks)

    @classmethod
    def compress(cls, shape, mat) -> "Element":
        """Keep only the diagonal blocks of a dense matrix (conditional expectation)."""
        shape = _as_shape(shape)
        mat = np.asarray(mat, dtype=complex)
        return cls(shape, [mat[o:o + d, o:o + d] for o, d in zip(shape.offsets, shape.block_dims)])

    @classmethod
    def from_blocks(cls, *blocks) -> "Element":
        blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
        return cls(AlgebraShape(tuple(b.shape[0] for b in blocks)), blocks)

    @classmethod
    def from_matrix(cls, mat) -> "Element":
        """An element of the full matrix algebra holding ``mat``."""
        return cls.from_blocks(mat)

    @classmethod
    def identity(cls, shape) -> "Element":
        shape = _as_shape(shape)
        return cls(shape, [np.eye(d) for d in shape.block_dims])

    @classmethod
    def zero(cls, shape) -> "Element":
        shape = _as_shape(shape)
        return cls(shape, [np.zeros((d, d)) for d in shape.block_dims])

    @classmethod
    def scalar(cls, shape, value: complex) -> "Element":
        shape = _as_shape(shape)
        return cls(shape, [value * np.eye(d) for d in shape.block_dims])

    @classmethod
    def from_product_dense(cls, shape_a, shape_b, mat) -> "Element":
        """Element of ``A (x) B`` from a matrix in Kronecker ordering."""
        shape_a, shape_b = _as_shape(shape_a), _as_shape(shape_b)
        perm = kron_permutation(shape_a, shape_b)
        mat = np.asarray(mat, dtype=complex)
        return cls.from_dense(shape_a.tensor(shape_b), mat[np.ix_(perm, perm)])

    # conversion ---------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        n = self.shape.total_dim
        out = np.zeros((n, n), dtype=complex)
        for o, d, b in zip(self.shape.offsets, self.shape.block_dims, self.blocks):
            out[o:o + d, o:o + d] = b
        return out

    def to_product_dense(self, shape_a, shape_b) -> np.ndarray:
        """Dense matrix in Kronecker ordering, inverse of :meth:`from_product_dense`."""
        shape_a, shape_b = _as_shape(shape_a), _as_shape(shape_b)
        if shape_a.tensor(shape_b) != self.shape:
            raise IncompatibleShapeError(f"{self.shape} is not {shape_a} (x) {shape_b}")
        perm = kron_permutation(shape_a, shape_b)
        inv = np.argsort(perm)
        return self.to_dense()[np.ix_(inv, inv)]

    # arithmetic ---------------------------------------------------------

    def _map(self, fn) -> "Element":
        return Element(self.shape, [fn(b) for b in self.blocks])

    def _zip(self, other: "Element", fn) -> "Element":
        _check_same_shape(self, other)
        return Element(self.shape, [fn(a, b) for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other):
        if isinstance(other, Element):
            return self._zip(other, np.add)
        if np.isscalar(other):
            return self + Element.scalar(self.shape, other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Element):
            return self._zip(other, np.subtract)
        if np.isscalar(other):
            return self - Element.scalar(self.shape, other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._map(np.negative)

    def __mul__(self, c):
        if np.isscalar(c):
            return self._map(lambda b: c * b)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if np.isscalar(c):
            return self._map(lambda b: b / c)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, Element):
            return self._zip(other, np.matmul)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise InvalidArgumentError("only non-negative integer powers are supported")
        return self._map(lambda b: np.linalg.matrix_power(b, int(k)))

    @property
    def H(self) -> "Element":
        """Adjoint."""
        return self._map(lambda b: b.conj().T)

    def adjoint(self) -> "Element":
        return self.H

    # scalars ------------------------------------------------------------

    def norm(self) -> float:
        """C*-norm (largest singular value over all blocks)."""
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def trace(self) -> complex:
        """Sum of the traces of all blocks."""
        return complex(sum(np.trace(b) for b in self.blocks))

    def hermitian_defect(self) -> float:
        return max(float(np.linalg.norm(b - b.conj().T, 2)) for b in self.blocks)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_defect() <= tol * max(self.norm(), 1e-300)

    def allclose(self, other: "Element", atol: float = 1e-10) -> bool:
        _check_same_shape(self, other)
        return (self - other).norm() <= atol

    def __repr__(self) -> str:
        return f"Element({self.shape}, norm={self.norm():.6g})"

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    __hash__ = None


# functional forms -------------------------------------------------------


def add(a: Element, b: Element) -> Element:
    return a + b


def scale(c: complex, a: Element) -> Element:
    return c * a


def multiply(a: Element, b: Element) -> Element:
    return a @ b


def adjoint(a: Element) -> Element:
    return a.H


def commutator(a: Element, b: Element) -> Element:
    """``[a, b] = ab - ba``."""
    return a @ b - b @ a


def anticommutator(a: Element, b: Element) -> Element:
    """``{a, b} = ab + ba``."""
    return a @ b + b @ a


def operator_norm(a: Element) -> float:
    return a.norm()


# tensor structure ---------------------------------------------------------


def kron_permutation(shape_a, shape_b) -> np.ndarray:
    """Index map from block ordering of ``A (x) B`` to Kronecker ordering.

    ``perm[k]`` is the Kronecker-order index of the k-th basis vector in the
    block ordering used by :meth:`AlgebraShape.tensor`.
    """
    shape_a, shape_b = _as_shape(shape_a), _as_shape(shape_b)
    tot_b = shape_b.total_dim
    perm = []
    for oa, na in zip(shape_a.offsets, shape_a.block_dims):
        for ob, nb in zip(shape_b.offsets, shape_b.block_dims):
            for i in range(na):
                for j in range(nb):
                    perm.append((oa + i) * tot_b + ob + j)
    return np.array(perm, dtype=int)


def tensor(a: Element, b: Element) -> Element:
    """``a (x) b`` in ``A (x) B``."""
    return Element(a.shape.tensor(b.shape), [np.kron(x, y) for x in a.blocks for y in b.blocks])


def embed_left(a: Element, shape_b) -> Element:
    """``a (x) I``."""
    return tensor(a, Element.identity(shape_b))


def embed_right(shape_a, b: Element) -> Element:
    """``I (x) b``."""
    return tensor(Element.identity(shape_a), b)


# spectral calculus ------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) with their spectral projections."""

    eigenvalues: np.ndarray
    projections: tuple[Element, ...]

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> Element:
        out = Element.zero(self.projections[0].shape)
        for lam, p in zip(self.eigenvalues, self.projections):
            out = out + float(lam) * p
        return out


def _require_hermitian(x: Element, symmetrize: bool) -> Element:
    if x.is_hermitian():
        return x
    if symmetrize:
        return (x + x.H) / 2
    raise NotHermitianError(
        f"element is not self-adjoint (defect {x.hermitian_defect():.3g}, norm {x.norm():.3g})"
    )


def _orthonormalize(v: np.ndarray) -> np.ndarray:
    # Polar factor: closest isometry to v.
    u, _, wh = np.linalg.svd(v, full_matrices=False)
    return u @ wh


def spectral_decompose(
    x: Element, cluster_tol: float | None = None, symmetrize: bool = False
) -> SpectralDecomposition:
    """Spectral decomposition of a self-adjoint element.

    Eigenvalues closer than ``cluster_tol`` (default ``1e-8 * ||x||``) to a
    neighbour are merged and reported as their mean. Each projection is
    rebuilt from an orthonormalised eigenbasis, so it is idempotent to
    machine precision.
    """
    x = _require_hermitian(x, symmetrize)
    if cluster_tol is None:
        cluster_tol = CLUSTER_TOL * x.norm()
    vals, owners = [], []
    vecs = []
    for bi, b in enumerate(x.blocks):
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        vecs.append(v)
        for k, lam in enumerate(w):
            vals.append(float(lam))
            owners.append((bi, k))
    order = np.argsort(vals, kind="stable")
    clusters: list[list[int]] = []
    prev = None
    for idx in order:
        if prev is None or vals[idx] - prev > cluster_tol:
            clusters.append([])
        clusters[-1].append(idx)
        prev = vals[idx]
    eigenvalues, projections = [], []
    for members in clusters:
        eigenvalues.append(float(np.mean([vals[m] for m in members])))
        blocks = []
        for bi, d in enumerate(x.shape.block_dims):
            cols = [owners[m][1] for m in members if owners[m][0] == bi]
            if cols:
                v = _orthonormalize(vecs[bi][:, cols])
                blocks.append(v @ v.conj().T)
            else:
                blocks.append(np.zeros((d, d)))
        projections.append(Element(x.shape, blocks))
    return SpectralDecomposition(np.array(eigenvalues), tuple(projections))


def eigenvalues(x: Element, symmetrize: bool = False) -> np.ndarray:
    """All eigenvalues with multiplicity, ascending."""
    x = _require_hermitian(x, symmetrize)
    return np.sort(np.concatenate([np.linalg.eigvalsh((b + b.conj().T) / 2) for b in x.blocks]))


def apply_function(f: Callable[[float], float], x: Element, **kwargs) -> Element:
    """Functional calculus ``f(x) = sum_i f(lambda_i) P_i``."""
    dec = spectral_decompose(x, **kwargs)
    out = Element.zero(x.shape)
    for lam, p in zip(dec.eigenvalues, dec.projections):
        out = out + complex(f(float(lam))) * p
    return out


def band_projection(x: Element, lo: float, hi: float, **kwargs) -> Element:
    """Spectral projection of ``x`` onto the closed interval ``[lo, hi]``."""
    if hi < lo:
        raise InvalidArgumentError(f"empty interval [{lo}, {hi}]")
    dec = spectral_decompose(x, **kwargs)
    out = Element.zero(x.shape)
    for lam, p in zip(dec.eigenvalues, dec.projections):
        if lo <= lam <= hi:
            out = out + p
    return out


def psd_sqrt(x: Element, tol: float = PSD_TOL) -> Element:
    """Square root of a positive element.

    Eigenvalues down to ``-tol`` (relative to ``max(1, ||x||)``) are clipped to
    zero; anything more negative raises.
    """
    x = _require_hermitian(x, symmetrize=False)
    floor = -tol * max(1.0, x.norm())
    blocks = []
    for b in x.blocks:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        if w.size and w.min() < floor:
            raise InvalidArgumentError(f"element is not positive (eigenvalue {w.min():.3g})")
        blocks.append((v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T)
    return Element(x.shape, blocks)


def min_eigenvalue(x: Element) -> float:
    return float(eigenvalues(x, symmetrize=True)[0])


def max_eigenvalue(x: Element) -> float:
    return float(eigenvalues(x, symmetrize=True)[-1])


# distance to the centre ---------------------------------------------------


def _block_spreads(x: Element) -> list[tuple[float, np.ndarray]]:
    out = []
    for b in x.blocks:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        out.append(((w[-1] - w[0]) / 2, v))
    return out


def distance_to_center(x: Element) -> float:
    """Distance from a self-adjoint element to the centre of its algebra.

    Equal to the largest half-spread ``(max - min) / 2`` of the spectrum of
    any single block. It is also the best constant ``d`` with
    ``||[x, a]|| <= 2 d ||a||`` for every ``a``.
    """
    x = _require_hermitian(x, symmetrize=False)
    return float(max(s for s, _ in _block_spreads(x)))


def center_witness(x: Element) -> Element:
    """A norm-one element ``a`` with ``||[x, a]|| = 2 d(x)``.

    Built from the extreme eigenvectors of the block with the widest spectrum.
    When ``x`` is central the identity of the first block is returned.
    """
    x = _require_hermitian(x, symmetrize=False)
    spreads = _block_spreads(x)
    best = int(np.argmax([s for s, _ in spreads]))
    blocks = [np.zeros((d, d)) for d in x.shape.block_dims]
    if spreads[best][0] <= 0:
        blocks[0] = np.eye(x.shape.block_dims[0])
        return Element(x.shape, blocks)
    v = spreads[best][1]
    top, bottom = v[:, -1:], v[:, :1]
    blocks[best] = top @ bottom.conj().T + bottom @ top.conj().T
    return Element(x.shape, blocks)


def random_batch_commutator_ratio(x: Element, samples: np.ndarray) -> np.ndarray:
    """``||[x, a]|| / (2 ||a||)`` for a stack of dense block-diagonal samples.

    ``samples`` has shape ``(k, n, n)``; used as a brute-force lower bound for
    :func:`distance_to_center`.
    """
    xd = x.to_dense()
    comm = xd @ samples - samples @ xd
    num = np.linalg.norm(comm, ord=2, axis=(1, 2))
    den = np.linalg.norm(samples, ord=2, axis=(1, 2))
    return num / (2 * den)


def block_diag_samples(shape, rng: np.random.Generator, k: int) -> np.ndarray:
    """``k`` random complex Gaussian elements of ``shape`` in dense form."""
    shape = _as_shape(shape)
    n = shape.total_dim
    out = np.zeros((k, n, n), dtype=complex)
    for o, d in zip(shape.offsets, shape.block_dims):
        out[:, o:o + d, o:o + d] = rng.normal(size=(k, d, d)) + 1j * rng.normal(size=(k, d, d))
    return out


def pauli(label: str) -> Element:
    """Pauli matrices on ``M_2`` by label ``'I'``, ``'X'``, ``'Y'`` or ``'Z'``."""
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.array([[1, 0], [0, -1]]),
    }
    try:
        return Element.from_matrix(mats[label.upper()])
    except KeyError:
        raise InvalidArgumentError(f"unknown Pauli label {label!r}") from None


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
