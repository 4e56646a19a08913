"""Seeded randomized verification of every bound, with reproducible failure records.

Each suite draws independent trials. Trial ``t`` of suite ``s`` under master
seed ``S`` uses the 64-bit seed produced by
``SeedSequence(S, spawn_key=(crc32(s), t))``, so any failing instance can be
replayed from its record alone and results do not depend on scheduling.
"""
from __future__ import annotations

import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import collapse, cp_calculus, locality, measurement, models
from .algebra import (
    AlgebraShape,
    Element,
    block_diag_samples,
    center_witness,
    commutator,
    distance_to_center,
    embed_left,
    embed_right,
    random_batch_commutator_ratio,
    spectral_decompose,
)
from .errors import DegenerateGapError, UndefinedReductionError, UnknownNameError
from .instances import (
    SHAPE_MENU,
    random_cpmap,
    random_dilated_setup,
    random_element,
    random_hermitian,
    random_state,
    random_unitary,
    random_vector,
)
from .maps import CPMap, apply_heisenberg, dilated_measurement
from .measurement import MeasurementSetup
from .report import BoundReport
from .states import State


def trial_seed(master: int, suite: str, trial: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(zlib.crc32(suite.encode()), int(trial)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TrialContext:
    seed: int
    shapes: tuple[AlgebraShape, ...] = SHAPE_MENU

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _pick(rng, options):
    return options[int(rng.integers(len(options)))]


# generators ---------------------------------------------------------------


def _trial_cs(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    dom, cod = _pick(rng, ctx.shapes), _pick(rng, ctx.shapes)
    t = random_cpmap(dom, cod, int(rng.integers(1, 4)), rng)
    a = random_element(dom, rng)
    kind = rng.random()
    if kind < 0.1:
        b = Element.identity(dom)
    elif kind < 0.2:
        b = a
    else:
        b = random_element(dom, rng)
    return [cp_calculus.check_cs_inequality(t, a, b)]


def _trial_covariance(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    shape = _pick(rng, ctx.shapes)
    rho = random_state(shape, rng, rank=int(rng.integers(1, 4)))
    a, b = random_hermitian(shape, rng), random_hermitian(shape, rng)
    return [cp_calculus.covariance_inequality_check(rho, a, b),
            cp_calculus.heisenberg_uncertainty_check(rho, a, b)]


def _trial_almost_mult(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    dom, cod = _pick(rng, ctx.shapes), _pick(rng, ctx.shapes)
    t = random_cpmap(dom, cod, int(rng.integers(1, 4)), rng)
    return [cp_calculus.almost_multiplication_bound(t, random_element(dom, rng), random_element(dom, rng))]


def _commuting_pair(shape, rng) -> tuple[Element, Element]:
    u = random_unitary(shape, rng)
    blocks1, blocks2 = [], []
    for ub, d in zip(u.blocks, shape.block_dims):
        blocks1.append(ub @ np.diag(rng.normal(size=d)) @ ub.conj().T)
        blocks2.append(ub @ np.diag(rng.normal(size=d)) @ ub.conj().T)
    return Element(shape, blocks1), Element(shape, blocks2)


def _trial_jm(ctx: TrialContext) -> list[BoundReport]:
    """Random dilated setup with commuting pointers; one trial in four is a perfect copy setup."""
    rng = ctx.rng
    n = int(rng.integers(2, 4))
    perfect = rng.random() < 0.25
    if perfect:
        m, shape = _near_perfect_setup(rng, n, 0.0, system_rotation=True)
        # pointers diagonal in the record basis are both read perfectly
        y1 = Element.from_matrix(np.diag(rng.normal(size=n)))
        y2 = Element.from_matrix(np.diag(rng.normal(size=n)))
    else:
        shape, b_shape = AlgebraShape.full(n), AlgebraShape.full(int(rng.integers(2, 4)))
        m = random_dilated_setup(shape, b_shape, rng).map
        y1, y2 = _commuting_pair(b_shape, rng)
    rep = measurement.joint_quality_bound(m, embed_right(shape, y1), embed_right(shape, y2))
    if perfect:
        rep.extra_checks["perfect_pointers_commute"] = rep.lhs <= 1e-9 * max(1.0, rep.scale)
    return [rep]


def _trial_qn(ctx: TrialContext, samples: int = 2000) -> list[BoundReport]:
    rng = ctx.rng
    shape = _pick(rng, ctx.shapes)
    x = random_hermitian(shape, rng)
    d = distance_to_center(x)
    brute = float(random_batch_commutator_ratio(x, block_diag_samples(shape, rng, samples)).max())
    w = center_witness(x)
    rep = BoundReport("qn", brute, d, scale=max(1.0, x.norm()), tol=1e-6)
    rep.extra_checks["witness_attains"] = abs(commutator(x, w).norm() - 2 * d * w.norm()) <= 1e-9 * max(1.0, x.norm())
    return [rep]


def _trial_hpdelta(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    eps = float(rng.uniform(1e-4, 0.49))
    s = models.unsharp_spin_setup(eps)
    return [measurement.heisenberg_principle_check(s, models.unsharp_disturbance(eps))]


def _trial_local_heisenberg(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    mix = random_unitary(AlgebraShape.full(3), rng).to_dense()
    m = models.spin_one_preserving_instrument(mix)
    out = AlgebraShape.abelian(3)
    y = Element(out, [np.array([[v]]) for v in rng.normal(size=3)])
    s = MeasurementSetup.unbiased(m, _instrument_pointer(y))
    a = Element.from_matrix(np.diag([1.0, 0.0, -1.0]))
    return [measurement.local_heisenberg_check(s, a)]


def _instrument_pointer(y: Element) -> Element:
    """``I_3 (x) y`` inside ``M3 (x) C^3``."""
    return embed_right(AlgebraShape.full(3), y)


def _near_eigenvector(y: Element, rng, k: int, noise: float) -> np.ndarray:
    w, v = np.linalg.eigh(y.to_dense())
    vec = v[:, k] + noise * (rng.normal(size=len(w)) + 1j * rng.normal(size=len(w)))
    return vec / np.linalg.norm(vec)


def _trial_vectorredux(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    shape = AlgebraShape.full(int(rng.integers(2, 5)))
    y = random_hermitian(shape, rng)
    n = shape.total_dim
    noise = float(rng.choice([0.0, 0.01, 0.1, 1.0]))
    phi1 = _near_eigenvector(y, rng, 0, noise)
    phi2 = _near_eigenvector(y, rng, n - 1, noise)
    a = random_element(shape, rng)
    if rng.random() < 0.5:
        a = _pull_toward_commutant(a, y, float(rng.uniform(0, 1)))
    return [collapse.coherence_bound(phi1, phi2, y, a)]


def _pull_toward_commutant(a: Element, y: Element, t: float) -> Element:
    """``t a + (1 - t) E(a)`` with ``E`` the pinching onto the commutant of ``y``."""
    pinched = Element.zero(a.shape)
    for q in spectral_decompose(y).projections:
        pinched = pinched + q @ a @ q
    return t * a + (1 - t) * pinched


def _copy_unitary(n: int) -> np.ndarray:
    """``|i>|j> -> |i>|i + j mod n>`` on ``C^n (x) C^n``."""
    u = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            u[i * n + (i + j) % n, i * n + j] = 1
    return u


def _near_perfect_setup(rng, n: int, strength: float, system_rotation: bool = False) -> tuple[CPMap, AlgebraShape]:
    """Copy unitary perturbed by ``exp(i strength H)``, apparatus in ``|0>``.

    With ``system_rotation`` the copy acts in a random basis of the system.
    """
    from scipy.linalg import expm

    shape = AlgebraShape.full(n)
    u = _copy_unitary(n)
    if system_rotation:
        u = u @ np.kron(random_unitary(shape, rng).to_dense(), np.eye(n))
    if strength:
        h = random_hermitian(AlgebraShape.full(n * n), rng).to_dense()
        u = expm(1j * strength * h) @ u
    e0 = np.zeros(n)
    e0[0] = 1
    m = dilated_measurement(Element.from_matrix(u), State.from_vector(shape, e0), shape)
    return m, shape


def _redraw(draw, attempts: int = 20) -> list[BoundReport]:
    """Call ``draw`` until it yields a defined instance; the rng advances between attempts."""
    for _ in range(attempts):
        try:
            return draw()
        except (DegenerateGapError, UndefinedReductionError):
            continue
    raise UndefinedReductionError(f"no defined instance in {attempts} draws")


def _trial_snarklop2(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    return _redraw(lambda: _draw_snarklop2(rng))


def _draw_snarklop2(rng) -> list[BoundReport]:
    n = int(rng.integers(2, 4))
    m, shape = _near_perfect_setup(rng, n, float(rng.choice([0.0, 0.05, 0.3, 1.0])))
    big = m.domain_shape
    y = embed_right(shape, Element.from_matrix(np.diag(np.arange(n, dtype=float))))
    i, j = rng.choice(n, size=2, replace=False)
    noise = float(rng.choice([0.0, 0.05]))
    psi1 = np.eye(n)[i] + noise * random_vector(shape, rng)
    psi2 = np.eye(n)[j] + noise * random_vector(shape, rng)
    theta, phase = rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi)
    alpha, beta = np.cos(theta), np.sin(theta) * np.exp(1j * phase)
    a = random_element(big, rng)
    if rng.random() < 0.5:
        a = _pull_toward_commutant(a, y, float(rng.uniform(0, 0.5)))
    return [collapse.collapse_gap(m, psi1, psi2, alpha, beta, y, a)]


def _trial_redrumdelta(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    return _redraw(lambda: _draw_redrumdelta(rng, ctx.seed % 2 ** 32))


def _draw_redrumdelta(rng, seed: int) -> list[BoundReport]:
    n = int(rng.integers(2, 4))
    m, shape = _near_perfect_setup(rng, n, float(rng.choice([0.0, 0.01, 0.05, 0.2])))
    k = int(rng.integers(n))
    p = Element.from_matrix(np.diag(np.eye(n)[k]))
    q = embed_right(shape, p)
    rho = random_state(shape, rng, rank=int(rng.integers(1, n + 1)))
    if abs(rho(p)) < 1e-3:
        raise UndefinedReductionError("reduced state too close to undefined")
    return [collapse.reduction_gap_projection(m, rho, p, q, seed=seed, certify_samples=64)]


def _trial_collapsedelta(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    n = int(rng.integers(2, 4))
    m, shape = _near_perfect_setup(rng, n, float(rng.choice([0.0, 0.05, 0.3])))
    y = embed_right(shape, Element.from_matrix(np.diag(rng.normal(size=n) * 2)))
    s = MeasurementSetup.unbiased(m, y)
    b = random_hermitian(m.domain_shape, rng)
    if rng.random() < 0.5:
        b = _pull_toward_commutant(b, y, float(rng.uniform(0, 0.5)))
        b = (b + b.H) / 2
    eig = np.linalg.eigvalsh(s.measured.to_dense())
    x0, y0 = rng.choice(eig, size=2, replace=False)
    eps = float(rng.choice([0.0, 0.05, 0.3]))
    return [collapse.heisenberg_collapse_band_bound(s, b, float(x0) - eps / 2, float(y0) - eps / 2, eps)]


def _trial_almost_classical(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    shape = _pick(rng, ctx.shapes)
    x = random_hermitian(shape, rng)
    a = random_element(shape, rng)
    if rng.random() < 0.7:
        a = _pull_toward_commutant(a, x, float(rng.uniform(0, 0.3)))
    eig = np.linalg.eigvalsh(x.to_dense())
    x0, y0 = rng.choice(eig, size=2, replace=False)
    eps = float(rng.choice([0.0, 0.1, 0.5]))
    return [collapse.almost_classical_band_bound(a, x, float(x0) - eps / 2, float(y0) - eps / 2, eps)]


def _trial_appred(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    return _redraw(lambda: _draw_appred(rng))


def _draw_appred(rng) -> list[BoundReport]:
    n = int(rng.integers(2, 4))
    if rng.random() < 0.5:
        m, shape = _near_perfect_setup(rng, n, float(rng.choice([0.0, 0.05, 0.3])))
        b_shape = shape
    else:
        shape, b_shape = AlgebraShape.full(n), AlgebraShape.full(int(rng.integers(2, 4)))
        m = random_dilated_setup(shape, b_shape, rng).map
    if rng.random() < 0.5:
        k = int(rng.integers(b_shape.total_dim))
        y = embed_right(shape, Element.from_matrix(np.diag(np.eye(b_shape.total_dim)[k])))
    else:
        y = embed_right(shape, random_hermitian(b_shape, rng))
    s = MeasurementSetup.unbiased(m, y)
    rho = random_state(shape, rng, rank=int(rng.integers(1, n + 1)))
    return [collapse.generalized_reduction_bound(s, rho)]


def _trial_corzel(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    n = int(rng.integers(2, 9))
    alg = locality.LocalAlgebra.spin_chain(n)
    g = locality.averaged_spin(n, "z")
    sites = rng.choice(n, size=2, replace=False)
    a1 = locality.LocalElement((int(sites[0]),), random_element(AlgebraShape.full(2), rng).blocks[0])
    a2 = locality.LocalElement(tuple(int(s) for s in sites), random_element(AlgebraShape.full(4), rng).blocks[0])
    a3 = locality.averaged_spin(n, str(rng.choice(["x", "y", "z"])))

    def product():
        theta = rng.uniform(0, np.pi) if rng.random() < 0.5 else rng.choice([0.0, np.pi])
        f = np.array([np.cos(theta / 2), np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.sin(theta / 2)])
        return locality.ProductState.uniform(n, f)

    def draw():
        phi1, phi2 = product(), product()
        theta, phase = rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi)
        alpha, beta = np.cos(theta), np.sin(theta) * np.exp(1j * phase)
        return [locality.corzel_check(phi1, phi2, g, a, alg, alpha, beta) for a in (a1, a2, a3)]

    out = _redraw(draw)
    out += [locality.commutator_bounds(g, a, alg) for a in (a1, a2, a3)]
    return out


def _trial_crux(ctx: TrialContext) -> list[BoundReport]:
    m, y1, y2, d = models.erasure_instance(ctx.rng)
    return [collapse.pointer_erasure_check(m, y1, y2, d, models.M2)]


def _trial_structure(ctx: TrialContext) -> list[BoundReport]:
    rng = ctx.rng
    a_shape = AlgebraShape.full(int(rng.integers(2, 4)))
    b_shape = AlgebraShape.full(int(rng.integers(2, 4)))
    u = random_unitary(a_shape.tensor(b_shape), rng)
    m = dilated_measurement(u, random_state(b_shape, rng), a_shape)
    c = random_hermitian(a_shape, rng)
    b = u @ embed_left(c, b_shape) @ u.H
    b = (b + b.H) / 2
    return measurement.structure_check(m, b, seed=ctx.seed % 2 ** 32)


SUITES: dict[str, Callable[[TrialContext], list[BoundReport]]] = {
    "cs": _trial_cs,
    "covariance": _trial_covariance,
    "almost-mult": _trial_almost_mult,
    "jm": _trial_jm,
    "qn": _trial_qn,
    "hpdelta": _trial_hpdelta,
    "local-heisenberg": _trial_local_heisenberg,
    "structure": _trial_structure,
    "vectorredux": _trial_vectorredux,
    "snarklop2": _trial_snarklop2,
    "redrumdelta": _trial_redrumdelta,
    "collapsedelta": _trial_collapsedelta,
    "almost-classical": _trial_almost_classical,
    "appred": _trial_appred,
    "corzel": _trial_corzel,
    "crux": _trial_crux,
}


# running ------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteSpec:
    """One suite entry: identifier, trial count, shape menu and tolerance override."""

    id: str
    trials: int = 100
    shapes: tuple[AlgebraShape, ...] = SHAPE_MENU
    tol: float | None = None


@dataclass(frozen=True)
class SuiteConfig:
    suites: tuple[SuiteSpec, ...]
    seed: int = 0
    workers: int = 1
    inject_bug: str | None = None

    @classmethod
    def build(cls, ids="all", trials: int = 100, seed: int = 0, workers: int = 1, inject_bug=None):
        names = resolve_suites(ids)
        return cls(tuple(SuiteSpec(n, trials) for n in names), seed, workers, inject_bug)

    def to_record(self) -> dict:
        return {
            "seed": self.seed,
            "inject_bug": self.inject_bug,
            "suites": [
                {"id": s.id, "trials": s.trials, "shapes": [list(x.block_dims) for x in s.shapes], "tol": s.tol}
                for s in self.suites
            ],
        }


def resolve_suites(ids) -> list[str]:
    if isinstance(ids, str):
        ids = [i.strip() for i in ids.split(",") if i.strip()]
    if list(ids) == ["all"]:
        return list(SUITES)
    unknown = [i for i in ids if i not in SUITES]
    if unknown:
        raise UnknownNameError(f"unknown suite(s): {', '.join(unknown)}; known: {', '.join(SUITES)}")
    return list(ids)


def load_manifest(text: str, seed: int = 0, workers: int = 1) -> SuiteConfig:
    """Read a JSON list of ``{"id", "trials", "shapes", "tol"}`` entries."""
    entries = json.loads(text)
    specs = []
    for e in entries:
        resolve_suites([e["id"]])
        shapes = tuple(AlgebraShape(tuple(s)) for s in e.get("shapes", [])) or SHAPE_MENU
        specs.append(SuiteSpec(e["id"], int(e.get("trials", 100)), shapes, e.get("tol")))
    return SuiteConfig(tuple(specs), seed, workers)


def run_trial(suite: str, seed: int, shapes: tuple[AlgebraShape, ...] = SHAPE_MENU, tol: float | None = None,
              inject_bug: str | None = None) -> list[BoundReport]:
    """Run one trial; also the replay entry point for a failure record."""
    reports = SUITES[suite](TrialContext(seed, shapes))
    for r in reports:
        r.seed = seed
        if tol is not None:
            r.tol = tol
        if inject_bug == suite:
            r.rhs = -r.rhs
    return reports


def _run_chunk(args) -> list[tuple[int, list[dict]]]:
    suite, seeds, shapes, tol, bug = args
    return [(t, [r.to_record() for r in run_trial(suite, s, shapes, tol, bug)]) for t, s in seeds]


@dataclass
class SuiteResult:
    id: str
    trials: int
    checks: int = 0
    failures: list[dict] = field(default_factory=list)
    worst_normalized_slack: float = float("inf")

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "trials": self.trials,
            "checks": self.checks,
            "failures": self.failures,
            "worst_normalized_slack": self.worst_normalized_slack,
            "passed": self.passed,
        }


@dataclass
class RunReport:
    config: SuiteConfig
    results: list[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_record(self) -> dict:
        return {
            "kind": "verification-report",
            "config": self.config.to_record(),
            "passed": self.passed,
            "suites": [r.to_record() for r in self.results],
        }


def run_suites(cfg: SuiteConfig) -> RunReport:
    results = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for spec in cfg.suites:
            seeds = [(t, trial_seed(cfg.seed, spec.id, t)) for t in range(spec.trials)]
            if pool is None:
                chunks = [_run_chunk((spec.id, seeds, spec.shapes, spec.tol, cfg.inject_bug))]
            else:
                size = max(1, len(seeds) // (4 * cfg.workers))
                jobs = [(spec.id, seeds[i:i + size], spec.shapes, spec.tol, cfg.inject_bug)
                        for i in range(0, len(seeds), size)]
                chunks = list(pool.map(_run_chunk, jobs))
            res = SuiteResult(spec.id, spec.trials)
            for chunk in chunks:
                for t, recs in chunk:
                    for rec in recs:
                        res.checks += 1
                        if not rec["vacuous"]:
                            res.worst_normalized_slack = min(res.worst_normalized_slack, rec["normalized_slack"])
                        if not rec["passed"]:
                            res.failures.append({"trial": t, **rec})
            results.append(res)
    finally:
        if pool is not None:
            pool.shutdown()
    return RunReport(cfg, results)


def emit_report(report: RunReport, fmt: str = "structured") -> str:
    """Render a run report as JSON (``structured``) or CSV text."""
    if fmt == "structured":
        return json.dumps(report.to_record(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "suite", "trial", "seed", "proposition", "checks", "lhs", "rhs",
                    "normalized_slack", "passed"])
        for r in report.results:
            w.writerow(["summary", r.id, "", "", "", r.checks, "", "", repr(r.worst_normalized_slack), r.passed])
            for f in r.failures:
                w.writerow(["failure", r.id, f["trial"], f["seed"], f["proposition"], "", repr(f["lhs"]),
                            repr(f["rhs"]), repr(f["normalized_slack"]), False])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def with_bug(cfg: SuiteConfig, suite: str) -> SuiteConfig:
    return replace(cfg, inject_bug=suite)
