"""One test per acceptance criterion; each prints a PASS/FAIL line with its measured figures."""
import subprocess
import sys
import time

import numpy as np
import pytest

from qmlab import measurement, models
from qmlab.algebra import (
    AlgebraShape,
    Element,
    block_diag_samples,
    center_witness,
    commutator,
    distance_to_center,
    embed_right,
    random_batch_commutator_ratio,
)
from qmlab.collapse import (
    generalized_reduction_bound,
    heisenberg_collapse_band_bound,
    perfect_collapse_check,
    perfect_reduction_check,
    pointer_erasure_check,
    reduction_gap_projection,
)
from qmlab.errors import UndefinedReductionError
from qmlab.instances import SHAPE_MENU, random_hermitian, random_state, random_unitary
from qmlab.locality import LocalAlgebra, averaged_spin, commutator_bounds, single_site
from qmlab.maps import apply_heisenberg, dilated_measurement, dual_apply
from qmlab.scenarios import davies_scenario, cnot_scenario, parse_eps_grid, two_bit_scenario
from qmlab.states import State, reduced_state, trace_distance
from qmlab.suite import SuiteConfig, SuiteSpec, run_suites, run_trial, trial_seed

RESULTS: list[str] = []
EPS_GRID = parse_eps_grid("0:0.45:0.05")
M2 = AlgebraShape.full(2)


def record(number: int, ok: bool, detail: str):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_01_noisy_spin_quality():
    start = time.perf_counter()
    worst = max(abs(measurement.quality(models.unsharp_spin_setup(e)) - models.unsharp_quality(e)) for e in EPS_GRID)
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-9 and elapsed < 1, f"max |sigma - closed form| = {worst:.2e} over {len(EPS_GRID)} eps, {elapsed:.3f}s")


def test_criterion_02_hpdelta_consistency():
    start = time.perf_counter()
    worst_slack, worst_form = np.inf, 0.0
    for eps in EPS_GRID:
        s = models.unsharp_spin_setup(eps)
        delta = 1 - 2 * np.sqrt(eps * (1 - eps))
        d = distance_to_center(s.measured)
        rhs = d * (1 - delta) / np.sqrt(3 * delta)
        worst_slack = min(worst_slack, measurement.quality(s) - rhs)
        worst_form = max(worst_form, abs(rhs - 2 * np.sqrt(eps * (1 - eps) / (3 - 6 * np.sqrt(eps * (1 - eps))))))
        assert d == pytest.approx(1.0)
    elapsed = time.perf_counter() - start
    ok = worst_slack >= -1e-9 and worst_form <= 1e-9 and elapsed < 1
    record(2, ok, f"min sigma - rhs = {worst_slack:.3e}, max |rhs - closed form| = {worst_form:.2e}, {elapsed:.3f}s")


def test_criterion_03_reduction_counterexample():
    start = time.perf_counter()
    worst = 0.0
    checked = 0
    for eps in EPS_GRID:
        s, rho = models.reduction_counterexample(eps)
        out = dual_apply(s.map, rho)
        try:
            gap = trace_distance(reduced_state(out, s.pointer), dual_apply(s.map, reduced_state(rho, s.measured)))
        except UndefinedReductionError:
            # eps = 0: the conditioning outcome has probability zero
            assert eps == 0
            continue
        worst = max(worst, abs(gap - (1 - eps)))
        checked += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and checked == len(EPS_GRID) - 1 and elapsed < 1
    record(3, ok, f"max |gap - (1 - eps)| = {worst:.2e} over {checked} eps (eps = 0 undefined), {elapsed:.3f}s")


def test_criterion_04_cnot_and_two_bit():
    start = time.perf_counter()
    cnot = cnot_scenario()
    two_bit = two_bit_scenario(random_states=100, seed=4)
    elapsed = time.perf_counter() - start
    checks = {c.name: c for c in cnot.checks + two_bit.checks}
    ok = cnot.passed and two_bit.passed and elapsed < 5
    record(4, ok, f"M(I (x) sz) defect {checks['M(I (x) sz) = sz'].deviation:.1e}, "
                  f"reduction identity worst {checks['reduction on first bit = measuring reduced state'].deviation:.1e} "
                  f"over 100 states, {elapsed:.2f}s")


def _suite(name: str, trials: int, seed: int):
    return run_suites(SuiteConfig((SuiteSpec(name, trials, SHAPE_MENU),), seed=seed)).results[0]


def test_criterion_05_cauchy_schwarz_suite():
    start = time.perf_counter()
    res = _suite("cs", 1000, 2024)
    elapsed = time.perf_counter() - start
    ok = res.passed and res.checks == 1000 and elapsed < 60
    record(5, ok, f"{res.checks} trials, {len(res.failures)} failures, worst normalized slack "
                  f"{res.worst_normalized_slack:.2e}, {elapsed:.1f}s")


def test_criterion_06_joint_measurement_suite():
    start = time.perf_counter()
    reports = [r for t in range(500) for r in run_trial("jm", trial_seed(2024, "jm", t))]
    elapsed = time.perf_counter() - start
    failures = [r for r in reports if not r.passed]
    perfect = [r for r in reports if "perfect_pointers_commute" in r.extra_checks]
    worst_perfect = max(r.lhs for r in perfect)
    ok = not failures and len(reports) == 500 and perfect and worst_perfect <= 1e-9 and elapsed < 60
    record(6, ok, f"500 trials, {len(failures)} failures, {len(perfect)} perfect setups with max "
                  f"||[X1, X2]|| = {worst_perfect:.1e}, {elapsed:.1f}s")


def _random_perfect_setup(rng, n):
    shape = AlgebraShape.full(n)
    copy = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            copy[i * n + (i + j) % n, i * n + j] = 1
    u = copy @ np.kron(random_unitary(shape, rng).to_dense(), np.eye(n))
    m = dilated_measurement(Element.from_matrix(u), State.basis(n, 0), shape)
    values = np.sort(rng.normal(size=n))
    return measurement.MeasurementSetup.unbiased(m, embed_right(shape, Element.from_matrix(np.diag(values))))


def _perfect_degenerations(count: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 4))
        s = _random_perfect_setup(rng, n)
        shape = s.map.codomain_shape
        rho = random_state(shape, rng)
        worst = max(worst, perfect_reduction_check(s.map, rho, s.measured, s.pointer).lhs)
        worst = max(worst, perfect_collapse_check(s.map, rho, s.measured, s.pointer).lhs)
        worst = max(worst, generalized_reduction_bound(s, rho).lhs)
        k = int(rng.integers(n))
        q = embed_right(shape, Element.from_matrix(np.diag(np.eye(n)[k])))
        p = apply_heisenberg(s.map, q)
        if rho(p).real > 1e-6:
            rep = reduction_gap_projection(s.map, rho, (p + p.H) / 2, q)
            worst = max(worst, rep.lhs, rep.extras["delta"])
        lam = np.linalg.eigvalsh(s.measured.to_dense())
        b = embed_right(shape, random_hermitian(shape, rng))
        rep = heisenberg_collapse_band_bound(s, b, float(lam[0]), float(lam[-1]), 0.0)
        worst = max(worst, rep.lhs)
    return worst


def test_criterion_07_collapse_and_reduction_suites():
    start = time.perf_counter()
    names = ["vectorredux", "snarklop2", "redrumdelta", "collapsedelta", "almost-classical", "appred"]
    summary, ok = [], True
    for name in names:
        res = _suite(name, 300, 2024)
        ok &= res.passed and res.checks >= 300
        summary.append(f"{name} {res.checks}/{len(res.failures)}")
    variants = set()
    for t in range(300):
        for r in run_trial("appred", trial_seed(2024, "appred", t)):
            variants |= {k for k in r.extras if k.startswith("rhs_")}
    ok &= variants == {"rhs_main", "rhs_variance_normalised", "rhs_projection"}
    worst = _perfect_degenerations(60, 2024)
    ok &= worst <= 1e-9
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    record(7, ok, f"checks/failures: {', '.join(summary)}; appred variants {len(variants)}/3; "
                  f"perfect degenerations worst {worst:.1e}; {elapsed:.1f}s")


def test_criterion_08_locality_suite():
    start = time.perf_counter()
    res = _suite("corzel", 300, 2024)
    sizes = set()
    for t in range(300):
        sizes.add(int(np.random.default_rng(trial_seed(2024, "corzel", t)).integers(2, 9)))
    worst_equality = 0.0
    for n in range(2, 9):
        alg = LocalAlgebra.spin_chain(n)
        for site in range(n):
            rep = commutator_bounds(averaged_spin(n, "z"), single_site(site, "x"), alg)
            worst_equality = max(worst_equality, abs(rep.lhs - 2 / n), abs(rep.rhs - 2 / n))
    elapsed = time.perf_counter() - start
    ok = res.passed and sizes == set(range(2, 9)) and worst_equality <= 1e-10 and elapsed < 60
    record(8, ok, f"{res.checks} checks over N in {sorted(sizes)}, {len(res.failures)} failures; "
                  f"max |[S_z, sx@site]| - 2/N| = {worst_equality:.1e}; {elapsed:.1f}s")


def test_criterion_09_davies():
    start = time.perf_counter()
    rep = davies_scenario(n=2048)
    elapsed = time.perf_counter() - start
    checks = {c.name: c for c in rep.checks}
    rel = checks["|sigma^2 - Var(f)| / Var(f)"].deviation
    bias = checks["central-half unbiasedness"].deviation
    ok = rep.passed and rel <= 1e-3 and elapsed < 10
    record(9, ok, f"relative error {rel:.1e}, central bias {bias:.1e}, {elapsed:.2f}s")


def test_criterion_10_center_distance_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_over, worst_under, worst_witness = 0.0, 0.0, 0.0
    for t in range(100):
        shape = SHAPE_MENU[t % len(SHAPE_MENU)]
        x = random_hermitian(shape, rng)
        d = distance_to_center(x)
        ratios = random_batch_commutator_ratio(x, block_diag_samples(shape, rng, 10_000))
        w = center_witness(x)
        attained = commutator(x, w).norm() / (2 * w.norm())
        best = max(float(ratios.max()), attained)
        worst_over = max(worst_over, float(ratios.max()) - d)
        worst_under = max(worst_under, d - best)
        worst_witness = max(worst_witness, abs(attained - d))
    elapsed = time.perf_counter() - start
    ok = worst_over <= 1e-6 and worst_under <= 1e-6 and worst_witness <= 1e-9 and elapsed < 60
    record(10, ok, f"max sampled excess {worst_over:.1e}, max shortfall {worst_under:.1e}, "
                   f"witness defect {worst_witness:.1e}, {elapsed:.1f}s")


def test_criterion_11_crux():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        m, y1, y2, d = models.erasure_instance(rng)
        r = pointer_erasure_check(m, y1, y2, d, M2)
        worst = max(worst, r.lhs / r.scale)
    elapsed = time.perf_counter() - start
    record(11, worst <= 1e-9 and elapsed < 1, f"max ||[D, I (x) Y1]|| / scale = {worst:.1e} over 20 instances, "
                                              f"{elapsed:.3f}s")


def test_criterion_12_determinism(tmp_path):
    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    codes = []
    for p in paths:
        proc = subprocess.run([sys.executable, "-m", "qmlab", "verify", "--suite", "all", "--seed", "7",
                               "--report", str(p)], capture_output=True)
        codes.append(proc.returncode)
    same = paths[0].read_bytes() == paths[1].read_bytes()
    record(12, same and codes == [0, 0], f"exit codes {codes}, reports byte-identical: {same}, "
                                         f"{paths[0].stat().st_size} bytes")
