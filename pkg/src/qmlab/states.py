"""States on block algebras, induced distributions, reduction and collapse."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraShape, Element, _as_shape, commutator, spectral_decompose
from .errors import (
    IncompatibleShapeError,
    InvalidArgumentError,
    NotAStateError,
    NotCommutingError,
    UndefinedReductionError,
)

STATE_TOL = 1e-10
DUST = 1e-12


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    """Normalise and rotate the global phase so the first large entry is real positive."""
    vec = np.asarray(vec, dtype=complex).ravel()
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise InvalidArgumentError("zero vector does not define a state")
    vec = vec / nrm
    k = int(np.argmax(np.abs(vec) > 1e-12 * np.abs(vec).max()))
    return vec * (abs(vec[k]) / vec[k])


class State:
    """A state ``rho(A) = Tr(D A)`` given by a block-diagonal density ``D``.

    Vector states also keep their (phase-fixed) vector in ``vector``; it is
    needed for matrix elements between two vector states.
    """

    __slots__ = ("density", "vector")

    def __init__(self, density: Element, tol: float = STATE_TOL, vector: np.ndarray | None = None):
        if not isinstance(density, Element):
            raise InvalidArgumentError("density must be an Element")
        herm = (density + density.H) / 2
        if (density - herm).norm() > tol:
            raise NotAStateError("density is not self-adjoint")
        tr = herm.trace().real
        if abs(tr - 1) > tol:
            raise NotAStateError(f"density has trace {tr:.12g}")
        lo = min(float(np.linalg.eigvalsh(b)[0]) for b in herm.blocks)
        if lo < -tol:
            raise NotAStateError(f"density has negative eigenvalue {lo:.3g}")
        self.density = herm
        self.vector = vector

    @property
    def shape(self) -> AlgebraShape:
        return self.density.shape

    @classmethod
    def from_density(cls, shape_or_density, mat=None, tol: float = STATE_TOL) -> "State":
        """Build from an :class:`Element` or from ``(shape, dense matrix)``."""
        if mat is None:
            d = shape_or_density
            if not isinstance(d, Element):
                d = Element.from_matrix(d)
            return cls(d, tol)
        return cls(Element.from_dense(shape_or_density, mat), tol)

    @classmethod
    def from_vector(cls, shape, vec) -> "State":
        """Vector state ``A -> <v|A|v>`` for a unit vector in the dense space.

        A vector spread over several blocks gives the mixture of its block
        components, since off-block coherences are invisible to the algebra.
        """
        shape = _as_shape(shape)
        v = _phase_fixed(vec)
        if v.size != shape.total_dim:
            raise IncompatibleShapeError(f"vector of length {v.size} for {shape}")
        return cls(Element.compress(shape, np.outer(v, v.conj())), vector=v)

    @classmethod
    def maximally_mixed(cls, shape) -> "State":
        shape = _as_shape(shape)
        return cls(Element.identity(shape) / shape.total_dim)

    @classmethod
    def basis(cls, shape, k: int) -> "State":
        shape = _as_shape(shape)
        v = np.zeros(shape.total_dim)
        v[k] = 1
        return cls.from_vector(shape, v)

    def __call__(self, a: Element) -> complex:
        return expectation(self, a)

    def __repr__(self) -> str:
        kind = "vector" if self.vector is not None else "mixed"
        return f"State({self.shape}, {kind})"


def _check(state: State, a: Element):
    if state.shape != a.shape:
        raise IncompatibleShapeError(f"state on {state.shape}, element on {a.shape}")


def expectation(state: State, a: Element) -> complex:
    """``rho(a)``."""
    _check(state, a)
    return complex(sum(np.sum(d.T * b) for d, b in zip(state.density.blocks, a.blocks)))


def variance(state: State, a: Element) -> float:
    """``rho(a* a) - |rho(a)|^2``; for self-adjoint ``a`` the usual variance."""
    m = expectation(state, a)
    return float(expectation(state, a.H @ a).real - abs(m) ** 2)


def covariance(state: State, a: Element, b: Element) -> float:
    """Symmetrised covariance ``Re rho(a b) - rho(a) rho(b)`` of self-adjoint elements."""
    return float(expectation(state, a @ b).real - (expectation(state, a) * expectation(state, b)).real)


def trace_norm_distance(s1: State, s2: State) -> float:
    """Functional norm ``||rho_1 - rho_2||``, the full trace norm of the density difference."""
    if s1.shape != s2.shape:
        raise IncompatibleShapeError("states live on different algebras")
    diff = s1.density - s2.density
    return float(sum(np.abs(np.linalg.eigvalsh((b + b.conj().T) / 2)).sum() for b in diff.blocks))


def trace_distance(s1: State, s2: State) -> float:
    """Half the trace norm: the largest difference of event probabilities."""
    return 0.5 * trace_norm_distance(s1, s2)


# distributions ------------------------------------------------------------


@dataclass(frozen=True)
class ProbabilityTable:
    """Finite distribution: outcome values mapped to probabilities."""

    outcomes: tuple
    probabilities: np.ndarray

    def prob(self, value, tol: float = 1e-9) -> float:
        """Probability of ``value`` (0 when the value is not an outcome)."""
        for o, p in zip(self.outcomes, self.probabilities):
            if np.allclose(np.atleast_1d(o), np.atleast_1d(value), atol=tol):
                return float(p)
        return 0.0

    def as_dict(self) -> dict:
        return {o: float(p) for o, p in zip(self.outcomes, self.probabilities)}

    def mean(self) -> float:
        vals = np.array(self.outcomes, dtype=float)
        return float(np.tensordot(self.probabilities, vals, axes=1))

    def total(self) -> float:
        return float(np.sum(self.probabilities))


def induced_distribution(state: State, x: Element) -> ProbabilityTable:
    """Outcome distribution ``lambda_i -> rho(P_i)`` of a self-adjoint observable."""
    _check(state, x)
    dec = spectral_decompose(x)
    probs = np.array([expectation(state, p).real for p in dec.projections])
    return ProbabilityTable(tuple(float(v) for v in dec.eigenvalues), probs)


def joint_distribution(state: State, x: Element, y: Element, tol: float = 1e-10) -> ProbabilityTable:
    """Joint distribution ``(lambda_i, mu_j) -> rho(P_i Q_j)`` of commuting observables."""
    _check(state, x)
    _check(state, y)
    defect = commutator(x, y).norm()
    if defect > tol * max(1.0, x.norm() * y.norm()):
        raise NotCommutingError(f"||[X, Y]|| = {defect:.3g}")
    dx, dy = spectral_decompose(x), spectral_decompose(y)
    outcomes, probs = [], []
    for lam, p in zip(dx.eigenvalues, dx.projections):
        for mu, q in zip(dy.eigenvalues, dy.projections):
            pq = p @ q
            if pq.norm() > 1e-9:
                outcomes.append((float(lam), float(mu)))
                probs.append(expectation(state, pq).real)
    return ProbabilityTable(tuple(outcomes), np.array(probs))


# conditioning ---------------------------------------------------------------


def reduced_state(state: State, y: Element, dust: float = DUST) -> State:
    """Conditioned state ``rho_Y(A) = rho(Y* A Y) / rho(Y* Y)``."""
    _check(state, y)
    norm = expectation(state, y.H @ y).real
    if norm <= dust:
        raise UndefinedReductionError(f"rho(Y*Y) = {norm:.3g} is below {dust:.1g}")
    dens = Element(state.shape, [yb @ d @ yb.conj().T / norm for yb, d in zip(y.blocks, state.density.blocks)])
    return State(dens, tol=1e-8)


def _check_partition(partition: Sequence[tuple[float, float]]):
    ivs = sorted((float(lo), float(hi)) for lo, hi in partition)
    for lo, hi in ivs:
        if hi < lo:
            raise InvalidArgumentError(f"interval [{lo}, {hi}] is empty")
    for (_, h1), (l2, _) in zip(ivs, ivs[1:]):
        if l2 <= h1:
            raise InvalidArgumentError("partition intervals overlap")
    return ivs


def collapse_projections(x: Element, partition: Sequence[tuple[float, float]] | None = None) -> list[Element]:
    """Spectral projections of ``x`` for each cell of a partition of its spectrum."""
    dec = spectral_decompose(x)
    if partition is None:
        return list(dec.projections)
    ivs = _check_partition(partition)
    projs = [Element.zero(x.shape) for _ in ivs]
    for lam, p in zip(dec.eigenvalues, dec.projections):
        cells = [k for k, (lo, hi) in enumerate(ivs) if lo <= lam <= hi]
        if not cells:
            raise InvalidArgumentError(f"eigenvalue {lam:.12g} is not covered by the partition")
        projs[cells[0]] = projs[cells[0]] + p
    return [p for p in projs if p.norm() > 0]


def collapsed_state(state: State, x: Element, partition: Sequence[tuple[float, float]] | None = None) -> State:
    """Dephased state ``sum_i P_i rho P_i`` over the spectral projections of ``x``.

    ``partition`` is a list of disjoint closed intervals covering the spectrum;
    by default every eigenvalue is its own cell.
    """
    _check(state, x)
    projs = collapse_projections(x, partition)
    dens = Element.zero(state.shape)
    for p in projs:
        dens = dens + p @ state.density @ p
    return State(dens, tol=1e-8)


def partial_trace(state: State, shape_a, shape_b, keep: str = "left") -> State:
    """Restriction of a state on ``A (x) B`` to ``A (x) I`` or ``I (x) B``."""
    shape_a, shape_b = _as_shape(shape_a), _as_shape(shape_b)
    if state.shape != shape_a.tensor(shape_b):
        raise IncompatibleShapeError(f"{state.shape} is not {shape_a} (x) {shape_b}")
    k = 0
    left = [np.zeros((n, n), dtype=complex) for n in shape_a.block_dims]
    right = [np.zeros((m, m), dtype=complex) for m in shape_b.block_dims]
    for i, n in enumerate(shape_a.block_dims):
        for j, m in enumerate(shape_b.block_dims):
            t = state.density.blocks[k].reshape(n, m, n, m)
            left[i] += np.einsum("ajbj->ab", t)
            right[j] += np.einsum("iaib->ab", t)
            k += 1
    if keep == "left":
        return State(Element(shape_a, left), tol=1e-8)
    if keep == "right":
        return State(Element(shape_b, right), tol=1e-8)
    raise InvalidArgumentError("keep must be 'left' or 'right'")


def product_state(s1: State, s2: State) -> State:
    """``rho_1 (x) rho_2`` on ``A (x) B``."""
    from .algebra import kron_permutation, tensor

    vec = None
    if s1.vector is not None and s2.vector is not None:
        perm = kron_permutation(s1.shape, s2.shape)
        vec = np.kron(s1.vector, s2.vector)[perm]
    return State(tensor(s1.density, s2.density), tol=1e-8, vector=vec)
