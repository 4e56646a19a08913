"""Concrete measurement models with known closed-form behaviour."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraShape, Element, embed_right, kron_all
from .maps import CPMap, dilated_measurement
from .measurement import MeasurementSetup
from .states import State

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)
P_UP = np.outer(UP, UP)
P_DOWN = np.outer(DOWN, DOWN)

M2 = AlgebraShape.full(2)


# noisy two-outcome measurement ------------------------------------------------


def unsharp_kraus_weights(eps: float) -> tuple[np.ndarray, np.ndarray]:
    """``diag(sqrt(1-eps), sqrt(eps))`` and ``diag(sqrt(eps), sqrt(1-eps))``."""
    a, b = np.sqrt(1 - eps), np.sqrt(eps)
    return np.diag([a, b]), np.diag([b, a])


def unsharp_spin_map(eps: float) -> CPMap:
    """``M(a + b) = X0 a X0 + X1 b X1`` from ``M2 (x) C^2 = M2 + M2`` to ``M2``.

    The spin-z outcome is misread with probability ``eps``.
    """
    if not 0 <= eps <= 1:
        raise ValueError("flip probability must lie in [0, 1]")
    x0, x1 = unsharp_kraus_weights(eps)
    k0 = np.vstack([x0, np.zeros((2, 2))])
    k1 = np.vstack([np.zeros((2, 2)), x1])
    return CPMap(AlgebraShape((2, 2)), M2, [k0, k1])


def unsharp_spin_setup(eps: float) -> MeasurementSetup:
    """Unbiased spin-z measurement with pointer ``(I + -I) / (1 - 2 eps)``."""
    if abs(1 - 2 * eps) < 1e-12:
        raise ValueError("eps = 1/2 carries no information; no unbiased pointer exists")
    m = unsharp_spin_map(eps)
    c = 1 / (1 - 2 * eps)
    y = Element.from_blocks(c * np.eye(2), -c * np.eye(2))
    return MeasurementSetup(m, Element.from_matrix(SZ), y)


def unsharp_quality(eps: float) -> float:
    """Closed form ``2 sqrt(eps (1 - eps)) / (1 - 2 eps)``."""
    return 2 * np.sqrt(eps * (1 - eps)) / (1 - 2 * eps)


def unsharp_coherence_factor(eps: float) -> float:
    """Off-diagonal damping ``s = 2 sqrt(eps (1 - eps))`` of the induced channel."""
    return 2 * np.sqrt(eps * (1 - eps))


def unsharp_disturbance(eps: float) -> float:
    """Exact ``sup_rho ||rho o T - rho||`` (full trace norm) for the induced channel: ``1 - s``."""
    return 1 - unsharp_coherence_factor(eps)


def unsharp_hp_rhs(eps: float) -> float:
    """``d (1 - delta) / sqrt(3 delta)`` with ``d = 1`` and ``delta = 1 - s``."""
    s = unsharp_coherence_factor(eps)
    return s / np.sqrt(3 * (1 - s))


def unsharp_hp_rhs_closed_form(eps: float) -> float:
    """``2 sqrt(eps (1 - eps) / (3 - 6 sqrt(eps (1 - eps))))``, algebraically equal to :func:`unsharp_hp_rhs`."""
    q = np.sqrt(eps * (1 - eps))
    return 2 * np.sqrt(eps * (1 - eps) / (3 - 6 * q))


def unsharp_projection_pair(eps: float) -> tuple[Element, Element]:
    """Projection ``P = |up><up|`` and outcome projection ``Q = I + 0`` with ``||M(Q) - P|| = eps``."""
    return Element.from_matrix(P_UP), Element.from_blocks(np.eye(2), np.zeros((2, 2)))


def reduction_counterexample(eps: float) -> tuple[MeasurementSetup, State]:
    """Projection pointer ``Q = I + 0`` measured on spin down.

    ``X = M(Q) = diag(1 - eps, eps)``. Reducing after measurement and
    measuring the reduced state differ by ``1 - eps`` in trace distance.
    """
    m = unsharp_spin_map(eps)
    q = Element.from_blocks(np.eye(2), np.zeros((2, 2)))
    return MeasurementSetup.unbiased(m, q), State.from_vector(M2, DOWN)


# controlled-not measurements ------------------------------------------------


def cnot_unitary() -> Element:
    """``P_up (x) I + P_down (x) sx`` on ``M2 (x) M2``."""
    return Element.from_matrix(np.kron(P_UP, np.eye(2)) + np.kron(P_DOWN, SX))


def cnot_setup() -> MeasurementSetup:
    """Spin-z copied into a memory bit prepared spin up; pointer ``I (x) sz``."""
    m = dilated_measurement(cnot_unitary(), State.from_vector(M2, UP), M2)
    return MeasurementSetup(m, Element.from_matrix(SZ), embed_right(M2, Element.from_matrix(SZ)))


def two_bit_unitaries() -> tuple[Element, Element]:
    """Copies of spin-z into the first and into the second memory bit."""
    i2 = np.eye(2)
    u1 = kron_all([P_UP, i2, i2]) + kron_all([P_DOWN, SX, i2])
    u2 = kron_all([P_UP, i2, i2]) + kron_all([P_DOWN, i2, SX])
    return Element.from_matrix(u1), Element.from_matrix(u2)


MEMORY = AlgebraShape.full(4)


def two_bit_map() -> CPMap:
    """Spin-z written into two memory bits prepared spin up, from ``M2 (x) M4`` to ``M2``."""
    u1, u2 = two_bit_unitaries()
    tau = State.from_vector(MEMORY, np.kron(UP, UP))
    return dilated_measurement(u2 @ u1, tau, M2)


def memory_pointer(bit: int, op: np.ndarray = SZ) -> Element:
    """``I (x) op (x) I`` or ``I (x) I (x) op`` on ``M2 (x) M4``."""
    mats = [np.eye(2), np.eye(2)]
    mats[bit] = op
    return embed_right(M2, Element.from_matrix(kron_all(mats)))


# swap measurement -----------------------------------------------------------


def swap_setup(ancilla_vector=UP) -> MeasurementSetup:
    """Swap the system with a fresh qubit; the pointer reads spin-z of the old system."""
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[2 * i + j, 2 * j + i] = 1
    m = dilated_measurement(Element.from_matrix(swap), State.from_vector(M2, ancilla_vector), M2)
    return MeasurementSetup.unbiased(m, embed_right(M2, Element.from_matrix(SZ)))


# an observable left untouched by a non-trivial measurement -------------------------


def spin_one_preserving_instrument(mixing: np.ndarray) -> CPMap:
    """Three-outcome instrument on ``M3`` that leaves ``diag(1, 0, -1)`` invariant.

    The underlying channel sends level 1 to an equal mixture of levels 0 and 2.
    Its Kraus operators are recombined by the unitary ``mixing``, so the
    outcome effects acquire coherences between level 1 and the others.
    """
    k_a = np.diag([1.0, 0.0, 1.0]).astype(complex)
    k_b = np.zeros((3, 3), dtype=complex)
    k_b[0, 1] = 1 / np.sqrt(2)
    k_c = np.zeros((3, 3), dtype=complex)
    k_c[2, 1] = 1 / np.sqrt(2)
    base = [k_a, k_b, k_c]
    ks = []
    for j in range(3):
        lj = sum(mixing[j, k] * base[k] for k in range(3))
        kk = np.zeros((9, 3), dtype=complex)
        kk[3 * j:3 * j + 3] = lj
        ks.append(kk)
    return CPMap(AlgebraShape((3, 3, 3)), AlgebraShape.full(3), ks)


# joint measurement of two spin components -----------------------------------


def joint_pauli_setup(sharpness: float) -> tuple[CPMap, Element, Element]:
    """Four-outcome POVM ``E(s1, s2) = (I + t (s1 sx + s2 sy)) / 4``.

    Pointers ``s1 / t`` and ``s2 / t`` give unbiased readings of ``sx`` and
    ``sy``, each with quality ``sqrt(1/t^2 - 1)``. Valid for ``0 < t <= 1/sqrt(2)``.
    """
    t = float(sharpness)
    if not 0 < t <= 1 / np.sqrt(2) + 1e-15:
        raise ValueError("sharpness must lie in (0, 1/sqrt(2)]")
    signs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    ks = []
    for k, (s1, s2) in enumerate(signs):
        e = (np.eye(2) + t * (s1 * SX + s2 * SY)) / 4
        w, v = np.linalg.eigh(e)
        for lam, vec in zip(w, v.T):
            if lam > 1e-15:
                row = np.zeros((4, 1))
                row[k] = 1
                ks.append(row @ (np.sqrt(lam) * vec.conj().reshape(1, -1)))
    out = AlgebraShape.abelian(4)
    m = CPMap(out, M2, ks)
    y1 = Element(out, [np.array([[s1 / t]]) for s1, _ in signs])
    y2 = Element(out, [np.array([[s2 / t]]) for _, s2 in signs])
    return m, y1, y2


# pointer erasure ---------------------------------------------------------------


def memory_embedding_map(u: Element, system_shape=M2, memory_shape=MEMORY) -> CPMap:
    """``z -> U^* (I (x) z) U`` from the memory algebra into ``A (x) memory``."""
    na = system_shape.total_dim
    nb = memory_shape.total_dim
    ud = u.to_dense()
    ks = []
    for k in range(na):
        row = np.zeros((1, na))
        row[0, k] = 1
        ks.append(np.kron(row, np.eye(nb)) @ ud)
    return CPMap(memory_shape, system_shape.tensor(memory_shape), ks)


def erasure_instance(seed) -> tuple[CPMap, Element, Element, Element]:
    """Random automorphic instance satisfying the pointer-erasure hypotheses exactly.

    The unitary commutes with ``I (x) y1``, so ``M(y1) = I (x) y1``; ``d = M(y2)``
    and ``M`` is multiplicative, so ``||y2||_M = 0``.
    """
    from .algebra import spectral_decompose
    from .instances import as_rng, random_unitary

    rng = as_rng(seed)
    y1 = Element.from_matrix(np.kron(SZ, np.eye(2)))
    y2 = Element.from_matrix(np.kron(np.eye(2), SZ))
    big = embed_right(M2, y1)
    u = np.zeros((8, 8), dtype=complex)
    for q in spectral_decompose(big).projections:
        vals, vecs = np.linalg.eigh(q.to_dense())
        basis = vecs[:, vals > 0.5]
        w = random_unitary(AlgebraShape.full(basis.shape[1]), rng).to_dense()
        u += basis @ w @ basis.conj().T
    u = Element.from_matrix(u)
    if rng.random() < 0.5:
        y2 = Element.from_matrix(np.kron(np.eye(2), np.diag(rng.normal(size=2))))
    m = memory_embedding_map(u)
    from .maps import apply_heisenberg

    return m, y1, y2, apply_heisenberg(m, y2)


def erasure_candidates() -> dict[str, tuple[CPMap, Element, Element, Element]]:
    """Candidate maps that try to measure ``sz (x) sx (x) I`` after a spin-z record.

    The target does not commute with the first memory bit, so each candidate
    violates at least one pointer-erasure hypothesis.
    """
    from .maps import apply_heisenberg

    y1 = Element.from_matrix(np.kron(SZ, np.eye(2)))
    y2 = Element.from_matrix(np.kron(np.eye(2), SZ))
    target = Element.from_matrix(kron_all([SZ, SX, np.eye(2)]))
    out = {}
    out["keep-record"] = (memory_embedding_map(Element.identity(8)), y1, y2, target)
    # Unitary W with W^* (I (x) I (x) sz) W = target: rotate the target's eigenbasis onto the pointer's.
    wt, vt = np.linalg.eigh(target.to_dense())
    pointer_dense = embed_right(M2, y2).to_dense()
    wp, vp = np.linalg.eigh(pointer_dense)
    w = Element.from_matrix(vp @ vt.conj().T)
    assert np.allclose(wt, wp)
    out["overwrite-record"] = (memory_embedding_map(w), y1, y2, target)
    half = unsharp_mixture(w)
    out["half-overwrite"] = (half, y1, y2, apply_heisenberg(half, y2))
    return out


def unsharp_mixture(w: Element) -> CPMap:
    """Equal mixture of keeping the memory and applying ``w``."""
    m1 = memory_embedding_map(Element.identity(8))
    m2 = memory_embedding_map(w)
    ks = [k / np.sqrt(2) for k in m1.kraus] + [k / np.sqrt(2) for k in m2.kraus]
    return CPMap(m1.domain_shape, m1.codomain_shape, ks)

