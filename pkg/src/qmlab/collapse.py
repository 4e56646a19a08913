"""Quantitative reduction and collapse bounds for imperfect measurements.

Every check returns a :class:`~qmlab.report.BoundReport`. State distances are
functional norms, i.e. full trace norms of density differences, which is what
the bounds control.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import Element, band_projection, commutator, embed_right, spectral_decompose
from .cp_calculus import t_norm
from .errors import (
    DegenerateGapError,
    IncompatibleShapeError,
    InvalidArgumentError,
    PreconditionError,
    UndefinedReductionError,
)
from .maps import CPMap, apply_heisenberg, dual_apply
from .measurement import MeasurementSetup, quality, quality_squared
from .report import BoundReport, digest
from .states import (
    DUST,
    State,
    collapsed_state,
    expectation,
    reduced_state,
    trace_norm_distance,
    variance,
)

GAP_TOL = 1e-12


def _vector(v) -> np.ndarray:
    if isinstance(v, State):
        if v.vector is None:
            raise InvalidArgumentError("a vector state is required")
        return v.vector
    v = np.asarray(v, dtype=complex).ravel()
    return v / np.linalg.norm(v)


def _ratio_gap(y1: float, y2: float) -> float:
    gap = abs(y1 - y2)
    if gap <= GAP_TOL:
        raise DegenerateGapError(f"pointer expectations coincide ({y1:.12g}, {y2:.12g})")
    return gap


def _vec_mean_var(v: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    yv = y @ v
    mean = float(np.vdot(v, yv).real)
    return mean, max(float(np.vdot(yv, yv).real) - mean ** 2, 0.0)


def coherence_bound(phi1, phi2, y: Element, a: Element, tol: float = 1e-8) -> BoundReport:
    """``|<phi1|a|phi2>| <= (delta + sigma1 + sigma2) / |y1 - y2| * ||a||``.

    ``yi`` and ``sigma_i`` are the mean and spread of ``y`` in ``phi_i`` and
    ``delta = ||[a, y]|| / ||a||``.
    """
    v1, v2 = _vector(phi1), _vector(phi2)
    yd, ad = y.to_dense(), a.to_dense()
    y1, s1sq = _vec_mean_var(v1, yd)
    y2, s2sq = _vec_mean_var(v2, yd)
    gap = _ratio_gap(y1, y2)
    anorm = a.norm()
    delta = commutator(a, y).norm() / anorm
    lhs = abs(np.vdot(v1, ad @ v2))
    rhs = (delta + np.sqrt(s1sq) + np.sqrt(s2sq)) / gap * anorm
    return BoundReport(
        "vectorredux", lhs, rhs, scale=anorm, tol=tol, digest=digest(v1, v2, y, a),
        extras={"delta": delta, "sigma1": np.sqrt(s1sq), "sigma2": np.sqrt(s2sq), "y1": y1, "y2": y2},
    )


def superposition_gap(m: CPMap, psi1, psi2, alpha: complex, beta: complex, a: Element) -> float:
    """``|rho_sup(M(a)) - rho_mix(M(a))|`` for ``alpha psi1 + beta psi2`` against the mixture."""
    v1, v2 = _vector(psi1), _vector(psi2)
    ma = apply_heisenberg(m, a).to_dense()
    v = alpha * v1 + beta * v2
    sup = np.vdot(v, ma @ v)
    mix = abs(alpha) ** 2 * np.vdot(v1, ma @ v1) + abs(beta) ** 2 * np.vdot(v2, ma @ v2)
    return float(abs(sup - mix))


def collapse_gap(
    m: CPMap, psi1, psi2, alpha: complex, beta: complex, y: Element, a: Element, tol: float = 1e-8
) -> BoundReport:
    """Superposition versus mixture after measurement, for a domain observable ``a``.

    Bounded by ``(delta + sigma1 + sigma2) / |y1 - y2| * ||a||`` with ``yi``,
    ``sigma_i`` the mean and spread of ``y`` after measuring ``psi_i``. The gap
    equals ``2 |Re(conj(alpha) beta c)|`` for a cross term ``c``, so the bound
    weighted by ``2 |alpha| |beta|`` is checked as well.
    """
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
        raise InvalidArgumentError("coefficients must satisfy |alpha|^2 + |beta|^2 = 1")
    v1, v2 = _vector(psi1), _vector(psi2)
    shape = m.codomain_shape
    out1 = dual_apply(m, State.from_vector(shape, v1))
    out2 = dual_apply(m, State.from_vector(shape, v2))
    y1, y2 = expectation(out1, y).real, expectation(out2, y).real
    gap = _ratio_gap(y1, y2)
    s1 = np.sqrt(max(variance(out1, y), 0.0))
    s2 = np.sqrt(max(variance(out2, y), 0.0))
    anorm = a.norm()
    delta = commutator(a, y).norm() / anorm
    lhs = superposition_gap(m, v1, v2, alpha, beta, a)
    rhs = (delta + s1 + s2) / gap * anorm
    tight = 2 * abs(alpha) * abs(beta) * rhs
    rep = BoundReport(
        "snarklop2", lhs, rhs, scale=anorm, tol=tol, digest=digest(m, v1, v2, y, a),
        extras={"delta": delta, "sigma1": s1, "sigma2": s2, "y1": y1, "y2": y2, "rhs_weighted": tight},
    )
    rep.extra_checks["weighted_bound"] = lhs <= tight + tol * anorm
    return rep


def reduction_factor(delta: float) -> float:
    """``1 + 2 sqrt(delta) + sqrt(1 + (1 + 2 sqrt(delta))^2)``."""
    r = np.sqrt(delta)
    return 1 + 2 * r + np.sqrt(1 + (1 + 2 * r) ** 2)


def projection_defect(m: CPMap, p: Element, q: Element) -> float:
    """``sup_rho |(rho o M)(q) - rho(p)| = ||M(q) - p||`` (exact, both are self-adjoint)."""
    return (apply_heisenberg(m, q) - p).norm()


def reduction_gap_projection(
    m: CPMap,
    state: State,
    p: Element,
    q: Element,
    delta: float | None = None,
    seed: int = 0,
    certify_samples: int = 256,
    tol: float = 1e-8,
) -> BoundReport:
    """Reduction on outcome ``q`` versus measuring the reduced state ``rho_p``.

    ``||(rho o M)_q - (rho_p o M)|| <= sqrt(delta) / (rho o M)(q) * factor(delta)``
    where ``delta`` bounds ``|(rho' o M)(q) - rho'(p)|`` over all states.
    The supremum equals ``||M(q) - p||`` and is computed exactly; a finite set
    of eigen- and random states is also evaluated as a cross-check. A supplied
    ``delta`` below the exact value is rejected.
    """
    for e in (p, q):
        if (e @ e - e).norm() > 1e-10 or not e.is_hermitian():
            raise InvalidArgumentError("p and q must be projections")
    exact = projection_defect(m, p, q)
    sampled = _sampled_projection_defect(m, p, q, seed, certify_samples)
    if sampled > exact + 1e-10:
        raise PreconditionError("sampled defect exceeds the exact supremum", {"sampled": sampled, "exact": exact})
    if delta is None:
        delta = exact
    elif delta < exact - 1e-12:
        raise PreconditionError(
            f"claimed disturbance {delta:.6g} is below the certified value {exact:.6g}",
            {"delta": delta, "certified": exact},
        )
    out = dual_apply(m, state)
    prob_q = expectation(out, q).real
    if prob_q <= DUST:
        raise UndefinedReductionError("outcome q has zero probability")
    lhs = trace_norm_distance(reduced_state(out, q), dual_apply(m, reduced_state(state, p)))
    rhs = np.sqrt(delta) / prob_q * reduction_factor(delta)
    return BoundReport(
        "redrumdelta", lhs, rhs, scale=1.0, tol=tol, seed=seed, digest=digest(m, state, p, q),
        extras={"delta": delta, "delta_exact": exact, "delta_sampled": sampled, "prob_q": prob_q},
    )


def _sampled_projection_defect(m: CPMap, p: Element, q: Element, seed: int, samples: int) -> float:
    from .instances import random_state

    h = apply_heisenberg(m, q) - p
    vals = []
    for proj in (p, Element.identity(p.shape) - p):
        for lam, e in zip(*_eigvecs(proj)):
            if lam > 0.5:
                vals.append(abs(expectation(State.from_vector(p.shape, e), h)))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        vals.append(abs(expectation(random_state(p.shape, rng), h)))
    return max(vals)


def _eigvecs(x: Element):
    d = x.to_dense()
    w, v = np.linalg.eigh((d + d.conj().T) / 2)
    return w, v.T


def _require_sharp(s: MeasurementSetup, tol: float):
    sq = quality_squared(s)
    if sq > tol * max(1.0, s.pointer.norm() ** 2):
        raise PreconditionError(f"setup is not perfect (sigma^2 = {sq:.3g})", {"sigma_squared": sq})


def perfect_reduction_check(
    m: CPMap, state: State, x: Element, y: Element, quality_tol: float = 1e-10, tol: float = 1e-8
) -> BoundReport:
    """For a perfect setup, reducing after measurement equals measuring the reduced state."""
    s = MeasurementSetup(m, x, y)
    _require_sharp(s, quality_tol)
    lhs = trace_norm_distance(reduced_state(dual_apply(m, state), y), dual_apply(m, reduced_state(state, x)))
    return BoundReport("redrum", lhs, 0.0, scale=1.0, tol=tol, digest=digest(m, state, x, y))


def commutant_basis(y: Element) -> list[Element]:
    """Matrix units spanning the commutant of a self-adjoint element."""
    dec = spectral_decompose(y)
    basis = []
    for q in dec.projections:
        for bi, qb in enumerate(q.blocks):
            w, v = np.linalg.eigh((qb + qb.conj().T) / 2)
            cols = v[:, w > 0.5]
            for i in range(cols.shape[1]):
                for j in range(cols.shape[1]):
                    blocks = [np.zeros((d, d)) for d in y.shape.block_dims]
                    blocks[bi] = np.outer(cols[:, i], cols[:, j].conj())
                    basis.append(Element(y.shape, blocks))
    return basis


def perfect_collapse_check(
    m: CPMap,
    state: State,
    x: Element,
    y: Element,
    partition: Sequence[tuple[float, float]] | None = None,
    quality_tol: float = 1e-10,
    tol: float = 1e-8,
) -> BoundReport:
    """For a perfect setup, measuring ``rho`` and its dephased version agree on the pointer commutant."""
    s = MeasurementSetup(m, x, y)
    _require_sharp(s, quality_tol)
    out = dual_apply(m, state)
    out_c = dual_apply(m, collapsed_state(state, x, partition))
    worst = 0.0
    for b in commutant_basis(y):
        worst = max(worst, abs(expectation(out, b) - expectation(out_c, b)) / b.norm())
    return BoundReport("collapse", worst, 0.0, scale=1.0, tol=tol, digest=digest(m, state, x, y))


def heisenberg_collapse_band_bound(
    s: MeasurementSetup, b: Element, x: float, y: float, eps: float, tol: float = 1e-8
) -> BoundReport:
    """``||P[x, x+eps] M(b) P[y, y+eps]|| <= (delta + 2 sigma + eps) / |x - y| * ||b||``.

    ``P`` are spectral projections of the measured observable and
    ``delta = ||[y_pointer, b]|| / ||b||``. Overlapping bands make the bound
    vacuous; that case is flagged rather than raised.
    """
    if eps < 0:
        raise InvalidArgumentError("band width must be non-negative")
    if not b.is_hermitian():
        raise InvalidArgumentError("b must be self-adjoint")
    sig = quality(s)
    bnorm = b.norm()
    delta = commutator(s.pointer, b).norm() / bnorm
    p1 = band_projection(s.measured, x, x + eps)
    p2 = band_projection(s.measured, y, y + eps)
    lhs = (p1 @ apply_heisenberg(s.map, b) @ p2).norm()
    gap = abs(x - y)
    if gap <= eps:
        return BoundReport(
            "collapsedelta", lhs, np.inf, scale=bnorm, tol=tol, vacuous=True,
            notes="bands overlap, bound is vacuous", extras={"delta": delta, "sigma": sig},
        )
    rhs = (delta + 2 * sig + eps) / gap * bnorm
    return BoundReport(
        "collapsedelta", lhs, rhs, scale=bnorm, tol=tol, digest=digest(s.map, s.pointer, b),
        extras={"delta": delta, "sigma": sig},
    )


def almost_classical_band_bound(
    a: Element, x_obs: Element, x: float, y: float, eps: float, tol: float = 1e-8
) -> BoundReport:
    """``||P[x, x+eps] a P[y, y+eps]|| <= (eps + 2 d) / |x - y| * ||a||`` with ``d = ||[x_obs, a]|| / 2||a||``."""
    if eps < 0:
        raise InvalidArgumentError("band width must be non-negative")
    anorm = a.norm()
    d = commutator(x_obs, a).norm() / (2 * anorm)
    p1 = band_projection(x_obs, x, x + eps)
    p2 = band_projection(x_obs, y, y + eps)
    lhs = (p1 @ a @ p2).norm()
    gap = abs(x - y)
    if gap <= eps:
        return BoundReport("almost-classical", lhs, np.inf, scale=anorm, tol=tol, vacuous=True,
                           notes="bands overlap, bound is vacuous", extras={"d": d})
    rhs = (eps + 2 * d) / gap * anorm
    return BoundReport("almost-classical", lhs, rhs, scale=anorm, tol=tol, digest=digest(a, x_obs), extras={"d": d})


def generalized_reduction_bound(s: MeasurementSetup, state: State, tol: float = 1e-8) -> BoundReport:
    """Reduction on the pointer versus measuring the reduced state, for any quality.

    With ``r = (Var_{rho o M}(Y) - Var_rho(X)) / (rho o M)(Y^* Y)`` the bound
    is ``2 sqrt(r) (1 + sqrt(r))``. Two variants are also evaluated when
    defined: ``r`` normalised by ``Var_{rho o M}(Y)`` instead, and for a
    projection pointer with outcome probability ``p`` the bound
    ``2 sigma / sqrt(p(1-p)) * (1 + sigma / sqrt(p(1-p)))``. The report's
    ``rhs`` is the tightest applicable value.
    """
    out = dual_apply(s.map, state)
    y, x = s.pointer, s.measured
    norm_y = expectation(out, y.H @ y).real
    if norm_y <= DUST or expectation(state, x.H @ x).real <= DUST:
        raise UndefinedReductionError("reduction by a pointer or observable of zero weight")
    var_out = variance(out, y)
    var_in = variance(state, x)
    excess = max(var_out - var_in, 0.0)
    r = excess / norm_y
    bounds = {"main": 2 * np.sqrt(r) * (1 + np.sqrt(r))}
    if var_out > DUST:
        rv = excess / var_out
        bounds["variance_normalised"] = 2 * np.sqrt(rv) * (1 + np.sqrt(rv))
    is_projection = y.is_hermitian() and (y @ y - y).norm() <= 1e-10
    if is_projection:
        prob = expectation(out, y).real
        if prob * (1 - prob) > DUST:
            sig = quality(s)
            k = sig / np.sqrt(prob * (1 - prob))
            bounds["projection"] = 2 * k * (1 + k)
    lhs = trace_norm_distance(reduced_state(out, y), dual_apply(s.map, reduced_state(state, x)))
    return BoundReport(
        "appred", lhs, min(bounds.values()), scale=1.0, tol=tol, digest=digest(s.map, state, y),
        extras={f"rhs_{k}": v for k, v in bounds.items()} | {"r": r},
    )


def crux_defects(
    m: CPMap, y1: Element, y2: Element, d: Element, system_shape
) -> dict[str, float]:
    """Measured defects of the pointer-erasure hypotheses.

    ``commute``: ``||[y1, y2]||``; ``preserve``: ``||M(y1) - I (x) y1||``;
    ``unbiased``: ``||M(y2) - d||``; ``sigma2``: ``||y2||_M``.
    """
    embedded = embed_right(system_shape, y1)
    if embedded.shape != m.codomain_shape or d.shape != m.codomain_shape:
        raise IncompatibleShapeError("I (x) y1 and d must live on the map's codomain")
    return {
        "commute": commutator(y1, y2).norm(),
        "preserve": (apply_heisenberg(m, y1) - embedded).norm(),
        "unbiased": (apply_heisenberg(m, y2) - d).norm(),
        "sigma2": t_norm(m, y2),
    }


def pointer_erasure_check(
    m: CPMap,
    y1: Element,
    y2: Element,
    d: Element,
    system_shape,
    tol1: float = 1e-10,
    tol2: float = 1e-10,
    tol: float = 1e-9,
) -> BoundReport:
    """A later perfect measurement of ``d`` that keeps pointer ``y1`` forces ``[d, I (x) y1] = 0``.

    ``M`` maps the memory algebra holding commuting pointers ``y1``, ``y2``
    into ``A (x) B`` with ``M(y1) = I (x) y1``, ``M(y2) = d`` and ``||y2||_M = 0``.
    The commutator is bounded by
    ``||[y1, y2]|| + 2 ||y1|| sigma2 + 2 ||M(y1) - I (x) y1|| ||d|| + 2 ||y1|| ||M(y2) - d||``.
    """
    defects = crux_defects(m, y1, y2, d, system_shape)
    scale = max(1.0, y1.norm() * y2.norm())
    limits = {"commute": 1e-10 * scale, "preserve": tol1 * max(1.0, y1.norm()),
              "unbiased": tol1 * max(1.0, d.norm())}
    # sigma2 carries a square root, so roundoff of order eps shows up as sqrt(eps); test its square
    measured = dict(defects, sigma2=defects["sigma2"] ** 2)
    limits["sigma2"] = tol2 * max(1.0, y2.norm() ** 2)
    failing = {k: defects[k] for k, v in measured.items() if v > limits[k]}
    if failing:
        names = ", ".join(f"{k}={v:.3g}" for k, v in sorted(failing.items()))
        raise PreconditionError(f"pointer-erasure hypotheses fail: {names}", defects)
    embedded = embed_right(system_shape, y1)
    lhs = commutator(d, embedded).norm()
    rhs = (defects["commute"] + 2 * y1.norm() * defects["sigma2"]
           + 2 * defects["preserve"] * d.norm() + 2 * y1.norm() * defects["unbiased"])
    return BoundReport(
        "crux", lhs, max(rhs, 0.0), scale=scale, tol=tol, digest=digest(m, y1, y2, d),
        extras=dict(defects),
    )


__all__ = [
    "coherence_bound",
    "superposition_gap",
    "collapse_gap",
    "reduction_factor",
    "projection_defect",
    "reduction_gap_projection",
    "perfect_reduction_check",
    "perfect_collapse_check",
    "commutant_basis",
    "heisenberg_collapse_band_bound",
    "almost_classical_band_bound",
    "generalized_reduction_bound",
    "crux_defects",
    "pointer_erasure_check",
]
