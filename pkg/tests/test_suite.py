import json

import pytest

from qmlab.errors import UnknownNameError
from qmlab.report import BoundReport
from qmlab.suite import (
    SUITES,
    SuiteConfig,
    emit_report,
    load_manifest,
    resolve_suites,
    run_suites,
    run_trial,
    trial_seed,
    with_bug,
)


def test_trial_seeds_are_distinct_and_stable():
    seeds = {trial_seed(7, s, t) for s in SUITES for t in range(20)}
    assert len(seeds) == 20 * len(SUITES)
    assert trial_seed(7, "cs", 3) == trial_seed(7, "cs", 3)


def test_unknown_suite():
    with pytest.raises(UnknownNameError):
        resolve_suites("cs,nope")


def test_empty_suite_list_succeeds():
    rep = run_suites(SuiteConfig(()))
    assert rep.passed and rep.results == []


def test_report_is_deterministic():
    cfg = SuiteConfig.build("cs,jm,crux", trials=10, seed=3)
    assert emit_report(run_suites(cfg)) == emit_report(run_suites(cfg))


def test_parallel_run_matches_serial():
    cfg = SuiteConfig.build("cs,almost-mult", trials=12, seed=5)
    par = SuiteConfig(cfg.suites, cfg.seed, workers=2)
    assert emit_report(run_suites(cfg)) == emit_report(run_suites(par))


def test_injected_bug_is_reported_and_replays():
    rep = run_suites(with_bug(SuiteConfig.build("cs", trials=20, seed=1), "cs"))
    assert not rep.passed
    failure = rep.results[0].failures[0]
    replay = run_trial("cs", failure["seed"], inject_bug="cs")[0]
    assert replay.to_record() == {k: v for k, v in failure.items() if k != "trial"}
    assert run_trial("cs", failure["seed"])[0].passed


def test_manifest_overrides():
    cfg = load_manifest(json.dumps([{"id": "cs", "trials": 4, "shapes": [[2, 3]], "tol": 1e-6}]), seed=2)
    rep = run_suites(cfg)
    assert rep.results[0].checks == 4
    assert cfg.suites[0].shapes[0].block_dims == (2, 3)


def test_csv_report_header():
    text = emit_report(run_suites(SuiteConfig.build("qn", trials=2, seed=0)), "csv")
    assert text.splitlines()[0].startswith("kind,suite,trial,seed")


def test_report_record_round_trip():
    rep = BoundReport("x", 1.0, 2.0, extras={"a": 1.5})
    assert BoundReport.from_record(rep.to_record()).to_record() == rep.to_record()
