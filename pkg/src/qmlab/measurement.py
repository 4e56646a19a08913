"""Measurement setups, their quality, and the bounds that constrain them.

A setup is a unital CP map ``M : A (x) B -> A`` (or more generally
``domain -> system``) together with a pointer observable ``Y`` in the domain
and the measured observable ``X = M(Y)`` of the system. Its quality is
``sigma = ||Y||_M``; ``sigma = 0`` exactly when the measurement is perfect.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .algebra import (
    AlgebraShape,
    Element,
    commutator,
    distance_to_center,
    max_eigenvalue,
    min_eigenvalue,
    spectral_decompose,
)
from .cp_calculus import cs_form, t_norm
from .errors import (
    BiasedMeasurementError,
    IncompatibleShapeError,
    InvalidArgumentError,
    NotCommutingError,
    PreconditionError,
)
from .maps import CPMap, apply_heisenberg, infer_ancilla_shape, restrict_to_system
from .report import BoundReport, digest

BIAS_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementSetup:
    """Map, measured observable and pointer of a measurement."""

    map: CPMap
    measured: Element
    pointer: Element

    def __post_init__(self):
        if self.pointer.shape != self.map.domain_shape:
            raise IncompatibleShapeError("pointer must live on the map's domain")
        if self.measured.shape != self.map.codomain_shape:
            raise IncompatibleShapeError("measured observable must live on the map's codomain")

    @classmethod
    def unbiased(cls, m: CPMap, pointer: Element) -> "MeasurementSetup":
        """The setup whose measured observable is defined as ``M(pointer)``."""
        return cls(m, apply_heisenberg(m, pointer), pointer)

    @property
    def bias_defect(self) -> float:
        return (apply_heisenberg(self.map, self.pointer) - self.measured).norm()

    def is_unbiased(self, tol: float = BIAS_TOL) -> bool:
        return self.bias_defect <= tol * max(1.0, self.measured.norm())


def _require_unbiased(s: MeasurementSetup):
    if not s.is_unbiased():
        raise BiasedMeasurementError(f"M(Y) differs from X by {s.bias_defect:.3g}")


def quality_squared(s: MeasurementSetup) -> float:
    """``||F_M(Y, Y)||``, the squared quality."""
    _require_unbiased(s)
    f = cs_form(s.map, s.pointer, s.pointer)
    f = (f + f.H) / 2
    lo = min_eigenvalue(f)
    if lo < -1e-9 * max(1.0, s.pointer.norm() ** 2):
        raise PreconditionError(f"correlation form has eigenvalue {lo:.3g}; map is not CP")
    return max(max_eigenvalue(f), 0.0)


def quality(s: MeasurementSetup) -> float:
    """Quality ``sigma = ||Y||_M`` of an unbiased setup."""
    return float(np.sqrt(quality_squared(s)))


@dataclass(frozen=True)
class PerfectionVerdict:
    """Both routes to deciding perfection and whether they agree."""

    perfect: bool
    spectral_route: bool
    quality_route: bool
    quality: float
    projection_defect: float

    @property
    def agree(self) -> bool:
        return self.spectral_route == self.quality_route


def is_perfect(s: MeasurementSetup, tol: float = 1e-9) -> PerfectionVerdict:
    """Decide whether ``M`` maps the pointer's spectral projections onto the measured ones.

    The spectral route compares spectra and checks ``M(Q_k) = P_k``; the
    quality route checks ``sigma <= sqrt(tol)``, since ``sigma`` scales as the
    square root of the projection defect.
    """
    sig = quality(s)
    dx = spectral_decompose(s.measured)
    dy = spectral_decompose(s.pointer)
    spec_ok = len(dx) == len(dy) and np.allclose(dx.eigenvalues, dy.eigenvalues, atol=tol * 10)
    defect = np.inf
    if spec_ok:
        defect = max(
            (apply_heisenberg(s.map, q) - p).norm() for p, q in zip(dx.projections, dy.projections)
        )
    spectral = bool(spec_ok and defect <= tol)
    quality_ok = bool(sig <= np.sqrt(tol) * max(1.0, s.pointer.norm()))
    return PerfectionVerdict(spectral, spectral, quality_ok, sig, float(defect))


def structure_check(t: CPMap, b: Element, tol: float = 1e-6, seed: int = 0, degree: int = 6) -> list[BoundReport]:
    """Consequences of ``||b||_T = 0`` for a self-adjoint ``b``.

    Checks that ``T`` intertwines the functional calculus of ``b`` (monomials
    and spectral indicators), that ``||f(b)||_T`` vanishes, and that ``T(b)``
    commutes with ``T`` of the commutant of ``b``.
    """
    tn = t_norm(t, b)
    if tn > tol * max(1.0, b.norm()):
        raise PreconditionError(f"||b||_T = {tn:.3g} is not zero", {"t_norm": tn})
    rng = np.random.default_rng(seed)
    tb = apply_heisenberg(t, b)
    reports = []
    for k in range(1, degree + 1):
        scale = max(1.0, b.norm() ** k)
        lhs = (apply_heisenberg(t, b ** k) - tb ** k).norm()
        reports.append(BoundReport(f"structure-monomial-{k}", lhs, 0.0, scale=scale, tol=tol))
    dec = spectral_decompose(b)
    for lam, q in zip(dec.eigenvalues, dec.projections):
        img = apply_heisenberg(t, q)
        idem = (img @ img - img).norm()
        reports.append(BoundReport(f"structure-indicator-{lam:.6g}", idem, 0.0, scale=1.0, tol=tol))
        reports.append(BoundReport(f"structure-tnorm-{lam:.6g}", t_norm(t, q), 0.0, scale=1.0, tol=np.sqrt(tol)))
    n = b.shape.total_dim
    raw = Element.compress(b.shape, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    a = Element.zero(b.shape)
    for q in dec.projections:
        a = a + q @ raw @ q
    lhs = commutator(apply_heisenberg(t, a), tb).norm()
    reports.append(
        BoundReport("structure-commutant", lhs, 0.0, scale=max(1.0, a.norm() * b.norm()), tol=np.sqrt(tol))
    )
    return reports


def joint_quality_bound(m: CPMap, y1: Element, y2: Element, tol: float = 1e-8, seed=None) -> BoundReport:
    """``||[M(y1), M(y2)]|| <= 2 sigma_1 sigma_2`` for commuting pointers."""
    scale = max(y1.norm() * y2.norm(), 1e-300)
    if commutator(y1, y2).norm() > 1e-10 * max(1.0, scale):
        raise NotCommutingError("pointers must commute")
    s1, s2 = t_norm(m, y1), t_norm(m, y2)
    lhs = commutator(apply_heisenberg(m, y1), apply_heisenberg(m, y2)).norm()
    return BoundReport(
        "jm", lhs, 2 * s1 * s2, scale=scale, tol=tol, seed=seed, digest=digest(m, y1, y2),
        extras={"sigma1": s1, "sigma2": s2},
    )


def disturbance_lower_bound_rhs(d: float, delta: float) -> float:
    """``d (1 - delta) / sqrt(3 delta)``: least quality compatible with disturbance ``delta``."""
    if not 0 < delta <= 1:
        raise InvalidArgumentError(f"disturbance {delta} outside (0, 1]")
    return d * (1 - delta) / np.sqrt(3 * delta)


def heisenberg_principle_check(s: MeasurementSetup, delta: float, tol: float = 1e-8) -> BoundReport:
    """Quality lower bound ``sigma >= d(X) (1 - delta) / sqrt(3 delta)``.

    ``delta`` bounds how much the measurement moves any state of the system.
    With ``delta = 0`` the statement degenerates to: a disturbance-free
    unbiased measurement measures a central observable.
    """
    if not 0 <= delta <= 1:
        raise InvalidArgumentError(f"disturbance {delta} outside [0, 1]")
    _require_unbiased(s)
    sig = quality(s)
    d = distance_to_center(s.measured)
    scale = max(1.0, s.pointer.norm())
    if delta <= 1e-12:
        rep = BoundReport("hp", lhs=d, rhs=0.0, scale=max(1.0, s.measured.norm()), tol=tol,
                          digest=digest(s.map, s.pointer), extras={"sigma": sig, "distance_to_center": d})
        if d > tol * max(1.0, s.measured.norm()):
            rep.notes = "no disturbance with a non-central measured observable is impossible"
        return rep
    rhs = disturbance_lower_bound_rhs(d, delta)
    return BoundReport(
        "hpdelta", lhs=rhs, rhs=sig, scale=scale, tol=tol, digest=digest(s.map, s.pointer),
        extras={"sigma": sig, "distance_to_center": d, "delta": delta},
    )


@dataclass(frozen=True)
class DisturbanceEstimate:
    """Lower estimate of ``sup_rho ||rho o T - rho||`` with the best state found."""

    value: float
    argmax: np.ndarray
    restarts: int
    note: str = "lower estimate from multi-start local search; not a certified supremum"


def _disturbance_objective(channel: CPMap, shape: AlgebraShape):
    n = shape.total_dim

    def value(params: np.ndarray) -> float:
        v = params[:n] + 1j * params[n:]
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return 0.0
        v = v / nrm
        rho = np.outer(v, v.conj())
        rho_c = Element.compress(shape, rho).to_dense()
        diff = Element.compress(shape, channel.dual_dense(rho_c)).to_dense() - rho_c
        return float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())

    return value


def estimate_disturbance(
    m: CPMap, ancilla_shape=None, restarts: int = 64, seed: int = 0
) -> DisturbanceEstimate:
    """Largest trace-norm change ``||rho o T - rho||`` over pure states, ``T(a) = M(a (x) I)``.

    The objective is convex in the state, so the supremum sits at a pure
    state; pure states are searched by multi-start local optimisation.
    """
    if ancilla_shape is None:
        if m.dilation is not None:
            ancilla_shape = m.dilation.ancilla.shape
        else:
            ancilla_shape = infer_ancilla_shape(m.codomain_shape, m.domain_shape)
    channel = restrict_to_system(m, ancilla_shape)
    shape = m.codomain_shape
    n = shape.total_dim
    fn = _disturbance_objective(channel, shape)
    rng = np.random.default_rng(seed)
    best_val, best_x = -1.0, None
    starts = [rng.normal(size=2 * n) for _ in range(restarts)]
    for k in range(n):
        e = np.zeros(2 * n)
        e[k] = 1
        starts.append(e)
    for x0 in starts:
        res = optimize.minimize(lambda p: -fn(p), x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000 * n})
        val = -res.fun
        if val > best_val:
            best_val, best_x = val, res.x
    v = best_x[:n] + 1j * best_x[n:]
    return DisturbanceEstimate(float(best_val), v / np.linalg.norm(v), len(starts))


def local_heisenberg_check(
    s: MeasurementSetup, a: Element, ancilla_shape=None, tol: float = 1e-8, preserve_tol: float = 1e-10
) -> BoundReport:
    """``sigma >= ||[X, a]|| / (2 ||a||)`` when the measurement leaves ``a`` untouched."""
    _require_unbiased(s)
    if a.shape != s.map.codomain_shape:
        raise IncompatibleShapeError("observable must live on the system algebra")
    if ancilla_shape is None:
        ancilla_shape = (
            s.map.dilation.ancilla.shape if s.map.dilation is not None
            else infer_ancilla_shape(s.map.codomain_shape, s.map.domain_shape)
        )
    from .algebra import embed_left

    moved = (apply_heisenberg(s.map, embed_left(a, ancilla_shape)) - a).norm()
    if moved > preserve_tol * max(1.0, a.norm()):
        raise PreconditionError(f"the measurement changes the observable by {moved:.3g}", {"preservation": moved})
    delta = commutator(s.measured, a).norm() / a.norm()
    sig = quality(s)
    return BoundReport(
        "local-heisenberg", lhs=delta / 2, rhs=sig, scale=1.0, tol=tol, digest=digest(s.map, a),
        extras={"delta": delta, "sigma": sig},
    )


# constructions ------------------------------------------------------------


def povm_measurement(effects, outcomes) -> MeasurementSetup:
    """Setup of a POVM: ``M(f) = sum_k f(k) E_k`` with pointer ``f(k) = outcome_k``."""
    effects = list(effects)
    outcomes = np.asarray(outcomes, dtype=float)
    if len(effects) != len(outcomes):
        raise InvalidArgumentError("one outcome value per effect is required")
    shape = effects[0].shape
    k_out = len(effects)
    total = Element.zero(shape)
    ks = []
    for k, e in enumerate(effects):
        if not e.is_hermitian():
            raise InvalidArgumentError("effects must be self-adjoint")
        total = total + e
        ed = e.to_dense()
        w, v = np.linalg.eigh((ed + ed.conj().T) / 2)
        if w.min(initial=0.0) < -1e-10:
            raise InvalidArgumentError("effects must be positive")
        for lam, vec in zip(w, v.T):
            if lam > 1e-15:
                row = np.zeros((k_out, 1))
                row[k] = 1
                ks.append(row @ (np.sqrt(lam) * vec.conj().reshape(1, -1)))
    if (total - Element.identity(shape)).norm() > 1e-10:
        raise InvalidArgumentError("effects do not sum to the identity")
    out_shape = AlgebraShape.abelian(k_out)
    m = CPMap(out_shape, shape, ks, tol=1e-9)
    pointer = Element(out_shape, [np.array([[x]]) for x in outcomes])
    return MeasurementSetup.unbiased(m, pointer)


def direct_observation(x: Element) -> MeasurementSetup:
    """Reading off ``x`` itself: ``M(f) = sum_i f(lambda_i) P_i`` on ``C(spec x)``."""
    dec = spectral_decompose(x)
    return povm_measurement(dec.projections, dec.eigenvalues)


def von_neumann_measurement(x: Element) -> MeasurementSetup:
    """Projective measurement with state update.

    ``N(f (x) a) = sum_i f(lambda_i) P_i a P_i`` from ``C(spec x) (x) A`` to
    ``A``, with pointer ``lambda (x) I``.
    """
    dec = spectral_decompose(x)
    k_out = len(dec)
    shape = x.shape
    dom = AlgebraShape.abelian(k_out).tensor(shape)
    n = shape.total_dim
    ks = []
    for k, p in enumerate(dec.projections):
        kk = np.zeros((k_out * n, n), dtype=complex)
        kk[k * n:(k + 1) * n] = p.to_dense()
        ks.append(kk)
    m = CPMap(dom, shape, ks, tol=1e-9)
    pointer = Element(dom, [lam * np.eye(d) for lam in dec.eigenvalues for d in shape.block_dims])
    return MeasurementSetup(m, x, pointer)


def pointer_ancilla_shape(s: MeasurementSetup) -> AlgebraShape:
    if s.map.dilation is not None:
        return s.map.dilation.ancilla.shape
    return infer_ancilla_shape(s.map.codomain_shape, s.map.domain_shape)


def spectra_match(x: Element, y: Element, tol: float = 1e-9) -> bool:
    """Whether two self-adjoint elements have the same set of distinct eigenvalues."""
    ex, ey = spectral_decompose(x).eigenvalues, spectral_decompose(y).eigenvalues
    return len(ex) == len(ey) and bool(np.allclose(ex, ey, atol=tol))


__all__ = [
    "MeasurementSetup",
    "PerfectionVerdict",
    "DisturbanceEstimate",
    "quality",
    "quality_squared",
    "is_perfect",
    "structure_check",
    "joint_quality_bound",
    "heisenberg_principle_check",
    "disturbance_lower_bound_rhs",
    "estimate_disturbance",
    "local_heisenberg_check",
    "povm_measurement",
    "direct_observation",
    "von_neumann_measurement",
    "spectra_match",
]
