"""Correlation form of a unital CP map and the inequalities built on it.

For a unital CP map ``T`` the sesquilinear form

    F_T(a, b) = T(a^* b) - T(a)^* T(b)

is positive, and ``||b||_T = ||F_T(b, b)||^(1/2)`` measures how far ``T`` is
from being multiplicative on ``b``.
"""
from __future__ import annotations

import numpy as np

from .algebra import Element, commutator, max_eigenvalue, min_eigenvalue, psd_sqrt
from .errors import InvalidArgumentError
from .maps import CPMap, apply_heisenberg
from .report import BoundReport, digest
from .states import State, covariance, expectation, variance

PSD_FLOOR = 1e-9


def cs_form(t: CPMap, a: Element, b: Element) -> Element:
    """``F_T(a, b) = T(a^* b) - T(a)^* T(b)``."""
    return apply_heisenberg(t, a.H @ b) - apply_heisenberg(t, a).H @ apply_heisenberg(t, b)


def t_norm(t: CPMap, b: Element) -> float:
    """``||b||_T``, the norm of the square root of ``F_T(b, b)``."""
    f = cs_form(t, b, b)
    f = (f + f.H) / 2
    return psd_sqrt(f, tol=PSD_FLOOR * max(1.0, b.norm() ** 2)).norm()


def check_cs_inequality(t: CPMap, a: Element, b: Element, tol: float = 1e-8, seed=None) -> BoundReport:
    """Operator Cauchy-Schwarz ``F(a,b) F(b,a) <= ||F(b,b)|| F(a,a)``.

    The slack is the smallest eigenvalue of the difference of the two sides;
    ``lhs`` and ``rhs`` record their norms for orientation.
    """
    fab = cs_form(t, a, b)
    fba = cs_form(t, b, a)
    faa = cs_form(t, a, a)
    fbb = cs_form(t, b, b)
    left = fab @ fba
    right = fbb.norm() * faa
    diff = right - left
    gap = min_eigenvalue((diff + diff.H) / 2)
    scale = max(a.norm() ** 2 * b.norm() ** 2, 1e-300)
    rep = BoundReport(
        "cs",
        lhs=0.0,
        rhs=gap,
        scale=scale,
        tol=tol,
        seed=seed,
        digest=digest(a, b, t),
        extras={
            "lhs_norm": left.norm(),
            "rhs_norm": right.norm(),
            "min_eig_fbb": min_eigenvalue((fbb + fbb.H) / 2),
        },
    )
    rep.extra_checks["form_positive"] = rep.extras["min_eig_fbb"] >= -1e-9 * max(1.0, b.norm() ** 2)
    return rep


def covariance_inequality_check(state: State, a: Element, b: Element, tol: float = 1e-9) -> BoundReport:
    """``Cov(a, b)^2 <= Var(a) Var(b)`` for self-adjoint ``a`` and ``b``."""
    _require_hermitian(a, b)
    lhs = covariance(state, a, b) ** 2
    rhs = variance(state, a) * variance(state, b)
    return BoundReport(
        "covariance", lhs, rhs, scale=max(a.norm() ** 2 * b.norm() ** 2, 1e-300), tol=tol,
        digest=digest(state, a, b),
    )


def heisenberg_uncertainty_check(state: State, a: Element, b: Element, tol: float = 1e-9) -> BoundReport:
    """``|rho([a, b] / 2i)|^2 <= Var(a) Var(b)`` for self-adjoint ``a`` and ``b``."""
    _require_hermitian(a, b)
    lhs = abs(expectation(state, commutator(a, b) / 2j)) ** 2
    rhs = variance(state, a) * variance(state, b)
    return BoundReport(
        "heisenberg", lhs, rhs, scale=max(a.norm() ** 2 * b.norm() ** 2, 1e-300), tol=tol,
        digest=digest(state, a, b),
    )


def state_form(state: State, a: Element, b: Element) -> complex:
    """``F_rho(a, b) = rho(a^* b) - conj(rho(a)) rho(b)`` for a state viewed as a CP map."""
    return expectation(state, a.H @ b) - np.conj(expectation(state, a)) * expectation(state, b)


def almost_multiplication_bound(t: CPMap, a: Element, b: Element, tol: float = 1e-8, seed=None) -> BoundReport:
    """``||F_T(a, b)|| <= ||a|| ||b||_T``.

    When ``||b||_T`` vanishes the check also demands that ``b`` lies in the
    multiplicative domain from both sides.
    """
    nb = t_norm(t, b)
    fab = cs_form(t, a, b).norm()
    scale = max(a.norm() * b.norm(), 1e-300)
    rep = BoundReport(
        "almost-mult", fab, a.norm() * nb, scale=scale, tol=tol, seed=seed, digest=digest(t, a, b),
        extras={"t_norm": nb},
    )
    if nb <= 1e-12:
        fba = cs_form(t, b, a).norm()
        rep.extra_checks["multiplicative_domain"] = max(fab, fba) <= 1e-9 * scale
    return rep


def _require_hermitian(*xs: Element):
    for x in xs:
        if not x.is_hermitian():
            raise InvalidArgumentError("observables must be self-adjoint")


def correlation_extremes(t: CPMap, b: Element) -> tuple[float, float]:
    """Smallest and largest eigenvalue of ``F_T(b, b)``."""
    f = cs_form(t, b, b)
    f = (f + f.H) / 2
    return min_eigenvalue(f), max_eigenvalue(f)
