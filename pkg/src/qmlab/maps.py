"""Unital completely positive maps in the Heisenberg picture.

A :class:`CPMap` sends observables of its *domain* algebra ``B`` to
observables of its *codomain* algebra ``A`` through Kraus operators
``K_i : C^{dim A} -> C^{dim B}``::

    M(b) = sum_i K_i^* b K_i

Its dual sends a state on ``A`` to the state ``rho o M`` on ``B`` with density
``sum_i K_i D K_i^*`` (compressed to the blocks of ``B``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AlgebraShape, Element, _as_shape, kron_permutation
from .errors import IncompatibleShapeError, InvalidArgumentError, NotCompletelyPositiveError
from .states import State

UNITAL_TOL = 1e-10
CP_TOL = 1e-9


@dataclass(frozen=True)
class Dilation:
    """Unitary ``U`` on ``A (x) B`` and ancilla state ``tau`` on ``B``."""

    unitary: Element
    ancilla: State
    system_shape: AlgebraShape


def _block_mask(shape: AlgebraShape) -> np.ndarray:
    n = shape.total_dim
    mask = np.zeros((n, n), dtype=bool)
    for o, d in zip(shape.offsets, shape.block_dims):
        mask[o:o + d, o:o + d] = True
    return mask


class CPMap:
    """Unital completely positive map ``domain -> codomain`` given by Kraus operators."""

    def __init__(
        self,
        domain_shape,
        codomain_shape,
        kraus_ops,
        validate: bool = True,
        tol: float = UNITAL_TOL,
        dilation: Dilation | None = None,
    ):
        self.domain_shape = _as_shape(domain_shape)
        self.codomain_shape = _as_shape(codomain_shape)
        ks = np.array([np.asarray(k, dtype=complex) for k in kraus_ops])
        if ks.ndim != 3 or ks.shape[1:] != (self.domain_shape.total_dim, self.codomain_shape.total_dim):
            raise IncompatibleShapeError(
                f"Kraus operators must be {self.domain_shape.total_dim}x{self.codomain_shape.total_dim}"
            )
        ks.setflags(write=False)
        self.kraus = ks
        self.dilation = dilation
        if validate:
            defect = self.unitality_defect()
            if defect > tol:
                raise NotCompletelyPositiveError(f"map is not unital (defect {defect:.3g})")
            leak = self.codomain_leak()
            if leak > tol:
                raise NotCompletelyPositiveError(
                    f"map sends the domain outside the codomain blocks (leak {leak:.3g})"
                )

    # evaluation ---------------------------------------------------------

    def __call__(self, b: Element) -> Element:
        return apply_heisenberg(self, b)

    def apply_dense(self, b: np.ndarray) -> np.ndarray:
        return np.einsum("kia,kib->ab", self.kraus.conj(), np.matmul(b, self.kraus))

    def dual_dense(self, d: np.ndarray) -> np.ndarray:
        return np.einsum("kib,kjb->ij", np.matmul(self.kraus, d), self.kraus.conj())

    # diagnostics --------------------------------------------------------

    def unitality_defect(self) -> float:
        s = np.einsum("kia,kib->ab", self.kraus.conj(), self.kraus)
        return float(np.linalg.norm(s - np.eye(self.codomain_shape.total_dim), 2))

    def choi_dense(self) -> np.ndarray:
        """Choi matrix ``sum_{kl} E_kl (x) M(E_kl)`` over in-block matrix units of the domain."""
        nb, na = self.domain_shape.total_dim, self.codomain_shape.total_dim
        w = self.kraus.conj().reshape(len(self.kraus), nb * na)
        c = w.T @ w.conj()
        keep = np.kron(_block_mask(self.domain_shape), np.ones((na, na), dtype=bool))
        return np.where(keep, c, 0)

    def codomain_leak(self) -> float:
        """Largest entry of ``M(E_kl)`` outside the codomain blocks."""
        if self.codomain_shape.num_blocks == 1:
            return 0.0
        nb, na = self.domain_shape.total_dim, self.codomain_shape.total_dim
        outside = np.kron(np.ones((nb, nb), dtype=bool), ~_block_mask(self.codomain_shape))
        return float(np.abs(np.where(outside, self.choi_dense(), 0)).max(initial=0.0))

    def __repr__(self) -> str:
        return f"CPMap({self.domain_shape} -> {self.codomain_shape}, {len(self.kraus)} Kraus)"

    # constructors -------------------------------------------------------

    @classmethod
    def identity(cls, shape) -> "CPMap":
        shape = _as_shape(shape)
        return cls(shape, shape, [np.eye(shape.total_dim)])

    @classmethod
    def unitary_conjugation(cls, u: Element) -> "CPMap":
        """``b -> u^* b u``."""
        ud = u.to_dense()
        if np.linalg.norm(ud.conj().T @ ud - np.eye(len(ud)), 2) > 1e-10:
            raise InvalidArgumentError("element is not unitary")
        return cls(u.shape, u.shape, [ud])

    @classmethod
    def from_state(cls, state: State) -> "CPMap":
        """The state as a unital CP map into the one-dimensional algebra."""
        ks = []
        dens = state.density.to_dense()
        w, v = np.linalg.eigh((dens + dens.conj().T) / 2)
        for lam, vec in zip(w, v.T):
            if lam > 0:
                ks.append(np.sqrt(lam) * vec.reshape(-1, 1))
        return cls(state.shape, AlgebraShape((1,)), ks, tol=1e-8)


class LinearMap:
    """A linear map between block algebras given by a Python function.

    Used to probe maps that need not be completely positive (for instance the
    transpose) with the same diagnostics as :class:`CPMap`.
    """

    def __init__(self, domain_shape, codomain_shape, func: Callable[[Element], Element]):
        self.domain_shape = _as_shape(domain_shape)
        self.codomain_shape = _as_shape(codomain_shape)
        self.func = func

    def __call__(self, b: Element) -> Element:
        out = self.func(b)
        if out.shape != self.codomain_shape:
            raise IncompatibleShapeError("map output has the wrong shape")
        return out

    def choi_dense(self) -> np.ndarray:
        nb, na = self.domain_shape.total_dim, self.codomain_shape.total_dim
        c = np.zeros((nb * na, nb * na), dtype=complex)
        for o, d in zip(self.domain_shape.offsets, self.domain_shape.block_dims):
            for k in range(o, o + d):
                for l in range(o, o + d):
                    e = np.zeros((nb, nb))
                    e[k, l] = 1
                    img = self(Element.from_dense(self.domain_shape, e)).to_dense()
                    c[k * na:(k + 1) * na, l * na:(l + 1) * na] = img
        return c

    def unitality_defect(self) -> float:
        return (self(Element.identity(self.domain_shape)) - Element.identity(self.codomain_shape)).norm()


def transpose_map(shape) -> LinearMap:
    """Blockwise transpose: positive and unital but not completely positive."""
    shape = _as_shape(shape)
    return LinearMap(shape, shape, lambda b: Element(shape, [x.T for x in b.blocks]))


def _check_domain(m: CPMap, b: Element):
    if b.shape != m.domain_shape:
        raise IncompatibleShapeError(f"map domain is {m.domain_shape}, element lives on {b.shape}")


def apply_heisenberg(m: CPMap, b: Element) -> Element:
    """``M(b) = sum_i K_i^* b K_i``."""
    _check_domain(m, b)
    return Element.compress(m.codomain_shape, m.apply_dense(b.to_dense()))


def dual_apply(m: CPMap, state: State) -> State:
    """The state ``rho o M`` on the domain algebra."""
    if state.shape != m.codomain_shape:
        raise IncompatibleShapeError(f"map codomain is {m.codomain_shape}, state lives on {state.shape}")
    dens = Element.compress(m.domain_shape, m.dual_dense(state.density.to_dense()))
    return State(dens, tol=1e-8)


def dual_apply_functional(m: CPMap, state: State, b: Element) -> complex:
    """``(rho o M)(b)`` without forming the dual density."""
    from .states import expectation

    return expectation(state, apply_heisenberg(m, b))


@dataclass(frozen=True)
class CPVerdict:
    is_cp: bool
    min_choi_eigenvalue: float
    unitality_defect: float


def choi_matrix(m) -> np.ndarray:
    return m.choi_dense()


def is_completely_positive(m, tol: float = CP_TOL) -> CPVerdict:
    """Complete positivity through the smallest eigenvalue of the Choi matrix."""
    c = m.choi_dense()
    lo = float(np.linalg.eigvalsh((c + c.conj().T) / 2)[0])
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    return CPVerdict(lo >= -tol * scale, lo, m.unitality_defect())


def maps_equal(m1, m2, tol: float = 1e-10) -> bool:
    if (m1.domain_shape, m1.codomain_shape) != (m2.domain_shape, m2.codomain_shape):
        return False
    return float(np.abs(m1.choi_dense() - m2.choi_dense()).max()) <= tol


def compose(m1: CPMap, m2: CPMap) -> CPMap:
    """Heisenberg composition ``b -> m1(m2(b))``; ``m2`` acts first on observables."""
    if m2.codomain_shape != m1.domain_shape:
        raise IncompatibleShapeError(
            f"cannot feed {m2.codomain_shape} into a map with domain {m1.domain_shape}"
        )
    ks = [l @ k for k in m1.kraus for l in m2.kraus]
    return CPMap(m2.domain_shape, m1.codomain_shape, ks, tol=1e-9)


def tensor_with_identity(n: int, m: CPMap) -> CPMap:
    """``id_{M_n} (x) M`` from ``M_n (x) domain`` to ``M_n (x) codomain``."""
    full = AlgebraShape.full(n)
    pb = kron_permutation(full, m.domain_shape)
    pa = kron_permutation(full, m.codomain_shape)
    ks = []
    for k in m.kraus:
        big = np.kron(np.eye(n), k)
        ks.append(big[np.ix_(pb, pa)])
    return CPMap(full.tensor(m.domain_shape), full.tensor(m.codomain_shape), ks, tol=1e-9)


def dilated_measurement(u: Element, ancilla: State, system_shape) -> CPMap:
    """Measurement map ``b -> (id (x) tau)(U^* b U)`` from ``A (x) B`` to ``A``.

    ``u`` is a unitary of ``A (x) B`` and ``ancilla`` the apparatus state
    ``tau`` on ``B``. Kraus operators are ``sqrt(p_j) U (I (x) |f_j>)`` for an
    eigen-decomposition ``tau = sum_j p_j |f_j><f_j|``.
    """
    system_shape = _as_shape(system_shape)
    b_shape = ancilla.shape
    if u.shape != system_shape.tensor(b_shape):
        raise IncompatibleShapeError(f"unitary lives on {u.shape}, expected {system_shape} (x) {b_shape}")
    ud = u.to_dense()
    if np.linalg.norm(ud.conj().T @ ud - np.eye(len(ud)), 2) > 1e-10:
        raise InvalidArgumentError("dilation operator is not unitary")
    perm = kron_permutation(system_shape, b_shape)
    na = system_shape.total_dim
    tau = ancilla.density.to_dense()
    p, f = np.linalg.eigh((tau + tau.conj().T) / 2)
    ks = []
    for pj, fj in zip(p, f.T):
        if pj <= 1e-15:
            continue
        iso = np.kron(np.eye(na), fj.reshape(-1, 1))[perm]
        ks.append(np.sqrt(pj) * ud @ iso)
    dil = Dilation(u, ancilla, system_shape)
    return CPMap(u.shape, system_shape, ks, tol=1e-9, dilation=dil)


def restrict_to_system(m: CPMap, ancilla_shape) -> CPMap:
    """The channel ``a -> M(a (x) I)`` on the system algebra."""
    ancilla_shape = _as_shape(ancilla_shape)
    if m.codomain_shape.tensor(ancilla_shape) != m.domain_shape:
        raise IncompatibleShapeError(f"{m.domain_shape} is not {m.codomain_shape} (x) {ancilla_shape}")
    perm = kron_permutation(m.codomain_shape, ancilla_shape)
    nb = ancilla_shape.total_dim
    ks = []
    for k in m.kraus:
        kk = np.empty_like(k)
        kk[perm] = k
        t = kk.reshape(m.codomain_shape.total_dim, nb, -1)
        for j in range(nb):
            ks.append(t[:, j, :])
    return CPMap(m.codomain_shape, m.codomain_shape, ks, tol=1e-9)


def infer_ancilla_shape(system_shape, total_shape) -> AlgebraShape:
    """Recover ``B`` from ``A (x) B`` when ``A`` is a single matrix block."""
    system_shape, total_shape = _as_shape(system_shape), _as_shape(total_shape)
    if system_shape.num_blocks != 1:
        raise InvalidArgumentError("pass the ancilla shape explicitly for a block system algebra")
    n = system_shape.block_dims[0]
    if any(d % n for d in total_shape.block_dims):
        raise IncompatibleShapeError(f"{total_shape} is not of the form M{n} (x) B")
    return AlgebraShape(tuple(d // n for d in total_shape.block_dims))
