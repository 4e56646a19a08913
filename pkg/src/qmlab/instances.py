"""Seeded random instances: observables, states, unitaries, CP maps and setups."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraShape, Element, _as_shape, embed_right
from .errors import NotCompletelyPositiveError
from .maps import CPMap, dilated_measurement
from .measurement import MeasurementSetup
from .states import State


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    return (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))) / np.sqrt(2)


def random_element(shape, seed) -> Element:
    rng = as_rng(seed)
    shape = _as_shape(shape)
    return Element(shape, [_ginibre(rng, d) for d in shape.block_dims])


def random_hermitian(shape, seed) -> Element:
    """GUE-like self-adjoint element of unit-order norm."""
    rng = as_rng(seed)
    shape = _as_shape(shape)
    blocks = []
    for d in shape.block_dims:
        g = _ginibre(rng, d)
        blocks.append((g + g.conj().T) / 2)
    return Element(shape, blocks)


def random_unitary(shape, seed) -> Element:
    """Haar unitary on each block (QR of a Gaussian matrix with phase correction)."""
    rng = as_rng(seed)
    shape = _as_shape(shape)
    blocks = []
    for d in shape.block_dims:
        blocks.append(np.array([[np.exp(2j * np.pi * rng.random())]]) if d == 1 else unitary_group.rvs(d, random_state=rng))
    return Element(shape, blocks)


def random_state(shape, seed, rank: int | None = None) -> State:
    """Random density of the given rank (full by default), spread over all blocks."""
    rng = as_rng(seed)
    shape = _as_shape(shape)
    blocks = []
    for d in shape.block_dims:
        g = _ginibre(rng, d, d if rank is None else min(rank, d))
        blocks.append(g @ g.conj().T)
    dens = Element(shape, blocks)
    return State(dens / dens.trace().real, tol=1e-8)


def random_vector(shape, seed) -> np.ndarray:
    rng = as_rng(seed)
    n = _as_shape(shape).total_dim
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_vector_state(shape, seed, block: int | None = None) -> State:
    """Random pure state supported on one block (a random block by default)."""
    rng = as_rng(seed)
    shape = _as_shape(shape)
    if block is None:
        block = int(rng.integers(shape.num_blocks))
    v = np.zeros(shape.total_dim, dtype=complex)
    o, d = shape.offsets[block], shape.block_dims[block]
    v[o:o + d] = rng.normal(size=d) + 1j * rng.normal(size=d)
    return State.from_vector(shape, v)


def random_cpmap(domain_shape, codomain_shape, kraus_rank: int, seed, max_tries: int = 10) -> CPMap:
    """Random unital CP map with Kraus operators ``G_i P_j S_j^{-1/2}``.

    ``G_i`` are Gaussian, ``P_j`` project onto codomain block ``j`` and ``S_j``
    normalises each block so that the map is unital and block preserving.
    """
    rng = as_rng(seed)
    dom, cod = _as_shape(domain_shape), _as_shape(codomain_shape)
    nb, na = dom.total_dim, cod.total_dim
    # each codomain block needs sum_i G_i^* G_i of full rank
    kraus_rank = max(int(kraus_rank), -(-max(cod.block_dims) // nb))
    for _ in range(max_tries):
        gs = [_ginibre(rng, nb, na) for _ in range(kraus_rank)]
        ks, ok = [], True
        for o, d in zip(cod.offsets, cod.block_dims):
            cols = [g[:, o:o + d] for g in gs]
            s = sum(c.conj().T @ c for c in cols)
            w, v = np.linalg.eigh(s)
            if w[0] < 1e-8:
                ok = False
                break
            inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
            for c in cols:
                k = np.zeros((nb, na), dtype=complex)
                k[:, o:o + d] = c @ inv_sqrt
                ks.append(k)
        if ok:
            return CPMap(dom, cod, ks, tol=1e-9)
    raise NotCompletelyPositiveError("could not draw a non-singular Kraus family")


def random_dilated_setup(system_shape, ancilla_shape, seed, mixed_ancilla: bool = True) -> MeasurementSetup:
    """Random unitary on ``A (x) B``, random apparatus state and pointer ``I (x) Y``."""
    rng = as_rng(seed)
    a_shape, b_shape = _as_shape(system_shape), _as_shape(ancilla_shape)
    u = random_unitary(a_shape.tensor(b_shape), rng)
    tau = random_state(b_shape, rng) if mixed_ancilla else random_vector_state(b_shape, rng)
    m = dilated_measurement(u, tau, a_shape)
    y = random_hermitian(b_shape, rng)
    return MeasurementSetup.unbiased(m, embed_right(a_shape, y))


def random_projection(shape, seed, rank: int | None = None) -> Element:
    """Random orthogonal projection with a random (or given) rank per block, not 0 or I overall."""
    rng = as_rng(seed)
    shape = _as_shape(shape)
    blocks = []
    for d in shape.block_dims:
        r = int(rng.integers(0, d + 1)) if rank is None else min(rank, d)
        u = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
        blocks.append(u[:, :r] @ u[:, :r].conj().T)
    p = Element(shape, blocks)
    tr = p.trace().real
    if tr < 0.5 or tr > shape.total_dim - 0.5:
        return random_projection(shape, rng, rank=1)
    return p


SHAPE_MENU = (AlgebraShape((2,)), AlgebraShape((3,)), AlgebraShape((2, 2)), AlgebraShape((2, 3)))
