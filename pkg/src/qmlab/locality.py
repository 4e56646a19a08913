"""Finite spin chains: local elements, averaged observables and locality bounds.

Sites carry full matrix algebras ``M_{d_i}``; the chain algebra is their
tensor product in site order. Dense forms are only built up to a dimension
cap (default ``2**14``, overridable through ``QMLAB_SIZE_GUARD``).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import Element, commutator
from .errors import IncompatibleShapeError, InvalidArgumentError, SizeGuardError
from .report import BoundReport, digest

DEFAULT_SIZE_GUARD = 2 ** 14

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def size_guard() -> int:
    raw = os.environ.get("QMLAB_SIZE_GUARD")
    if raw is None:
        return DEFAULT_SIZE_GUARD
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"QMLAB_SIZE_GUARD must be an integer, got {raw!r}") from None
    if value < 1:
        raise InvalidArgumentError("QMLAB_SIZE_GUARD must be positive")
    return value


@dataclass(frozen=True)
class LocalAlgebra:
    """Tensor product of site algebras ``M_{d_1} (x) ... (x) M_{d_N}``."""

    atom_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.atom_dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidArgumentError("site dimensions must be positive")
        object.__setattr__(self, "atom_dims", dims)

    @classmethod
    def spin_chain(cls, n: int) -> "LocalAlgebra":
        return cls((2,) * n)

    @property
    def num_sites(self) -> int:
        return len(self.atom_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.atom_dims))

    def check_size(self):
        cap = size_guard()
        if self.dim > cap:
            raise SizeGuardError(f"dense dimension {self.dim} exceeds the cap {cap}")


@dataclass(frozen=True)
class LocalElement:
    """An operator acting on the sites in ``support`` (in the given order)."""

    support: tuple[int, ...]
    factor: np.ndarray

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise InvalidArgumentError("support sites must be distinct")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "factor", np.asarray(self.factor, dtype=complex))

    @property
    def locality(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class GlobalObservable:
    """Average ``(1/M) sum_l term_l`` of local terms.

    ``kappa = max_l ||term_l|| / M`` controls how much one site can move it.
    """

    terms: tuple[LocalElement, ...]

    @property
    def kappa(self) -> float:
        return max(np.linalg.norm(t.factor, 2) for t in self.terms) / len(self.terms)

    @property
    def term_norm(self) -> float:
        return max(np.linalg.norm(t.factor, 2) for t in self.terms)


def embed(e: LocalElement, alg: LocalAlgebra) -> Element:
    """Dense operator of a local element on the whole chain."""
    alg.check_size()
    n = alg.num_sites
    if any(not 0 <= s < n for s in e.support):
        raise IncompatibleShapeError(f"support {e.support} outside a chain of {n} sites")
    dims = alg.atom_dims
    sup_dims = [dims[s] for s in e.support]
    k = int(np.prod(sup_dims))
    if e.factor.shape != (k, k):
        raise IncompatibleShapeError(f"factor of shape {e.factor.shape} on sites of dimension {sup_dims}")
    rest = [s for s in range(n) if s not in e.support]
    rest_dim = int(np.prod([dims[s] for s in rest])) if rest else 1
    op = np.kron(e.factor, np.eye(rest_dim))
    order = list(e.support) + rest
    shape = [dims[s] for s in order]
    t = op.reshape(shape + shape)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return Element.from_matrix(t.reshape(alg.dim, alg.dim))


def embed_global(g: GlobalObservable, alg: LocalAlgebra) -> Element:
    out = Element.zero(alg.dim)
    for t in g.terms:
        out = out + embed(t, alg)
    return out / len(g.terms)


def averaged_spin(n: int, axis: str) -> GlobalObservable:
    """``S_axis = (1/N) sum_i sigma_axis^(i)`` on a chain of ``n`` qubits."""
    try:
        p = PAULI[axis]
    except KeyError:
        raise InvalidArgumentError(f"axis must be x, y or z, got {axis!r}") from None
    return GlobalObservable(tuple(LocalElement((i,), p) for i in range(n)))


def single_site(site: int, axis: str) -> LocalElement:
    return LocalElement((site,), PAULI[axis])


def commutator_bounds(g: GlobalObservable, a, alg: LocalAlgebra, tol: float = 1e-10) -> BoundReport:
    """``||[Y, A]||`` against ``2 n kappa ||A||`` (local A) or ``2 kappa y'`` (averaged A)."""
    y = embed_global(g, alg)
    if isinstance(a, LocalElement):
        ad = embed(a, alg)
        rhs = 2 * a.locality * g.kappa * ad.norm()
        kind = "local"
    elif isinstance(a, GlobalObservable):
        ad = embed_global(a, alg)
        rhs = 2 * g.kappa * a.term_norm
        kind = "global"
    else:
        raise InvalidArgumentError("second argument must be a LocalElement or GlobalObservable")
    lhs = commutator(y, ad).norm()
    return BoundReport("locality", lhs, rhs, scale=max(rhs, 1e-300), tol=tol, extras={"kind": kind})


@dataclass(frozen=True)
class ProductState:
    """Product vector ``phi_1 (x) ... (x) phi_N``."""

    factors: tuple[np.ndarray, ...]

    def vector(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for f in self.factors:
            f = np.asarray(f, dtype=complex)
            out = np.kron(out, f / np.linalg.norm(f))
        return out

    @classmethod
    def uniform(cls, n: int, factor) -> "ProductState":
        return cls(tuple(np.asarray(factor, dtype=complex) for _ in range(n)))


def corzel_check(
    phi1, phi2, g: GlobalObservable, a, alg: LocalAlgebra, alpha: complex, beta: complex, tol: float = 1e-8
) -> BoundReport:
    """Superposition versus mixture of two chain states, for a local or averaged ``a``.

    The gap ``|<v|A|v> - |alpha|^2 <phi1|A|phi1> - |beta|^2 <phi2|A|phi2>|`` with
    ``v = alpha phi1 + beta phi2`` is bounded by
    ``(2 n kappa + sigma1 + sigma2) / |y1 - y2| * ||A||`` for an ``n``-local
    ``A`` and by ``(2 kappa + sigma1 + sigma2) / |y1 - y2| * y'`` for an
    averaged ``A`` with term norm ``y'``. The sharper version weighted by
    ``2 |alpha| |beta|`` is checked too.
    """
    from .collapse import _ratio_gap, _vec_mean_var

    v1 = phi1.vector() if isinstance(phi1, ProductState) else np.asarray(phi1, dtype=complex)
    v2 = phi2.vector() if isinstance(phi2, ProductState) else np.asarray(phi2, dtype=complex)
    v1, v2 = v1 / np.linalg.norm(v1), v2 / np.linalg.norm(v2)
    y = embed_global(g, alg).to_dense()
    y1, s1 = _vec_mean_var(v1, y)
    y2, s2 = _vec_mean_var(v2, y)
    gap = _ratio_gap(y1, y2)
    if isinstance(a, LocalElement):
        ad = embed(a, alg)
        lead, size = 2 * a.locality * g.kappa, ad.norm()
    else:
        ad = embed_global(a, alg)
        lead, size = 2 * g.kappa, a.term_norm
    am = ad.to_dense()
    v = alpha * v1 + beta * v2
    lhs = abs(np.vdot(v, am @ v) - abs(alpha) ** 2 * np.vdot(v1, am @ v1) - abs(beta) ** 2 * np.vdot(v2, am @ v2))
    rhs = (lead + np.sqrt(s1) + np.sqrt(s2)) / gap * size
    tight = 2 * abs(alpha) * abs(beta) * rhs
    rep = BoundReport(
        "corzel", float(lhs), float(rhs), scale=max(size, 1e-300), tol=tol, digest=digest(v1, v2, am),
        extras={"y1": y1, "y2": y2, "sigma1": np.sqrt(s1), "sigma2": np.sqrt(s2), "rhs_weighted": tight},
    )
    rep.extra_checks["weighted_bound"] = bool(lhs <= tight + tol * size)
    return rep


def corzel_coherence_bound(phi1, phi2, g: GlobalObservable, a: LocalElement, alg: LocalAlgebra) -> BoundReport:
    """Matrix-element form ``|<phi1|A|phi2>| <= (2 n kappa + sigma1 + sigma2) / |y1 - y2| * ||A||``."""
    from .collapse import _ratio_gap, _vec_mean_var

    v1 = phi1.vector() if isinstance(phi1, ProductState) else np.asarray(phi1, dtype=complex)
    v2 = phi2.vector() if isinstance(phi2, ProductState) else np.asarray(phi2, dtype=complex)
    y = embed_global(g, alg).to_dense()
    y1, s1 = _vec_mean_var(v1, y)
    y2, s2 = _vec_mean_var(v2, y)
    gap = _ratio_gap(y1, y2)
    ad = embed(a, alg)
    lhs = abs(np.vdot(v1, ad.to_dense() @ v2))
    rhs = (2 * a.locality * g.kappa + np.sqrt(s1) + np.sqrt(s2)) / gap * ad.norm()
    return BoundReport("corzel-coherence", float(lhs), float(rhs), scale=max(ad.norm(), 1e-300))


def chain_from_config(cfg: dict):
    """Build ``(algebra, observables, states)`` from a plain chain configuration.

    ``cfg`` holds ``sites`` (or ``atom_dims``), a mapping ``observables`` of
    names to ``{"average": axis}`` or ``{"site": i, "axis": a}``, and a mapping
    ``states`` of names to ``{"product": [[re, im], ...]}`` single-site vectors.
    """
    if "atom_dims" in cfg:
        alg = LocalAlgebra(tuple(cfg["atom_dims"]))
    else:
        alg = LocalAlgebra.spin_chain(int(cfg["sites"]))
    observables = {}
    for name, spec in cfg.get("observables", {}).items():
        if "average" in spec:
            observables[name] = averaged_spin(alg.num_sites, spec["average"])
        else:
            observables[name] = single_site(int(spec["site"]), spec["axis"])
    states = {}
    for name, spec in cfg.get("states", {}).items():
        f = np.array([complex(re, im) for re, im in spec["product"]])
        states[name] = ProductState.uniform(alg.num_sites, f)
    return alg, observables, states


def two_site(sites: Sequence[int], a: np.ndarray, b: np.ndarray) -> LocalElement:
    return LocalElement(tuple(sites), np.kron(a, b))
