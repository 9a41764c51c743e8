"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The default-size verification report is computed once per session; individual
tests check the relevant claims at their pinned tolerances.  Run with
``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

import math
import time

import pytest

from hvsinglet.geometry import chsh_optimal_settings
from hvsinglet.harness import parse_config, run_verify
from hvsinglet.inequalities import chsh_value, correlator_fn
from hvsinglet.models import ModelParams

PI = math.pi


@pytest.fixture(scope="session")
def verify_run():
    cfg = parse_config({"task": "verify"})
    started = time.perf_counter()
    report = run_verify(cfg)
    elapsed = time.perf_counter() - started
    return report, elapsed


def _check(report, criterion: str, claim_ids, expect_status="pass"):
    claims = [report.claim(cid) for cid in claim_ids]
    ok = all(c.status == expect_status for c in claims)
    detail = "; ".join(
        f"{c.id}: {c.status} (|diff|={c.abs_diff:.3g}, tol={c.tolerance:.3g})"
        for c in claims
    )
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} [{detail}]")
    assert ok, detail
    return claims


def test_criterion_01_chsh_qm_value_and_runtime(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "01 CHSH/QM", ["chsh.qm.value"])
    assert claim.tolerance == 1e-12
    # timing: best of 5 batches of 100 calls, after a warmup
    qm = ModelParams.qm()
    settings = chsh_optimal_settings()
    corr = correlator_fn(qm)
    chsh_value(corr, *settings)
    best = min(_time_batch(corr, settings) for _ in range(5))
    print(f"ACCEPTANCE 01 runtime: {'PASS' if best < 1e-3 else 'FAIL'} "
          f"[{best * 1e6:.1f} us per call]")
    assert best < 1e-3


def _time_batch(corr, settings, calls: int = 100) -> float:
    t0 = time.perf_counter()
    for _ in range(calls):
        chsh_value(corr, *settings)
    return (time.perf_counter() - t0) / calls


def test_criterion_02_chsh_fhv_threshold(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "02 CHSH/FHV threshold", ["chsh.fhv.eta_threshold"])
    assert claim.tolerance == 1e-9


def test_criterion_03_chsh_shv(verify_run):
    report, _ = verify_run
    scale, root = _check(
        report, "03 CHSH/SHV", ["chsh.shv.scale", "chsh.shv.pm_threshold"]
    )
    assert scale.tolerance == 1e-10
    # violation iff pm^2 < 1: margins flip sign across pm = 1
    from hvsinglet.inequalities import margin

    below = margin("chsh", ModelParams.shv().with_pm(0.99)).margin
    above = margin("chsh", ModelParams.shv().with_pm(1.01)).margin
    assert below > 0 > above


def test_criterion_04_leggett_qm(verify_run):
    report, _ = verify_run
    grid, peak, arg = _check(
        report,
        "04 Leggett/QM",
        ["leggett.qm.plane_avg_grid", "leggett.qm.max_margin", "leggett.qm.argmax_phi"],
    )
    assert grid.tolerance == 1e-9
    assert peak.tolerance == 1e-8
    assert arg.tolerance == 1e-8


def test_criterion_05_leggett_fhv(verify_run):
    report, _ = verify_run
    window, root = _check(
        report,
        "05 Leggett/FHV",
        ["leggett.fhv.window_endpoints", "leggett.fhv.eta_threshold"],
    )
    assert window.tolerance == 1e-8
    assert root.tolerance == 1e-8


def test_criterion_06_leggett_shv(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "06 Leggett/SHV", ["leggett.shv.formula"])
    assert claim.tolerance == 1e-9


def test_criterion_07_leggett_thv(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "07 Leggett/THV", ["leggett.thv.zeta_threshold"])
    assert claim.tolerance == 1e-8


def test_criterion_08_branciard_qm(verify_run):
    report, _ = verify_run
    triad, window, peak, arg = _check(
        report,
        "08 Branciard/QM",
        [
            "branciard.qm.triad_value",
            "branciard.qm.window_upper_sin",
            "branciard.qm.max_margin",
            "branciard.qm.argmax_sin",
        ],
    )
    assert triad.tolerance == 1e-10
    assert all(c.tolerance == 1e-8 for c in (window, peak, arg))


def test_criterion_09_branciard_fhv(verify_run):
    report, _ = verify_run
    root, maximizer, derived = _check(
        report,
        "09 Branciard/FHV",
        [
            "branciard.fhv.eta_threshold",
            "branciard.fhv.maximizer",
            "branciard.fhv.window_derived",
        ],
    )
    assert root.tolerance == 1e-8
    assert maximizer.tolerance == 1e-8
    _check(
        report,
        "09 Branciard/FHV window-center flag",
        ["branciard.fhv.window_center_quoted"],
        expect_status="discrepancy-flagged",
    )


def test_criterion_10_branciard_thv(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "10 Branciard/THV", ["branciard.thv.zeta_threshold"])
    assert claim.tolerance == 1e-8


def test_criterion_11_chsh_thv_discrepancy_protocol(verify_run):
    report, _ = verify_run
    value, root = _check(
        report,
        "11 CHSH/THV derived",
        ["chsh.thv.derived_value", "chsh.thv.derived_zeta_root"],
    )
    assert value.tolerance == 1e-8
    _check(
        report,
        "11 CHSH/THV quoted-slope flag",
        ["chsh.thv.quoted_slope"],
        expect_status="discrepancy-flagged",
    )


def test_criterion_12_sixth_moment_oracle(verify_run):
    report, _ = verify_run
    (claim,) = _check(report, "12 sixth-moment oracle", ["moments.sixth_grid"])
    assert claim.tolerance == 1e-8


def test_criterion_13_property_suites(verify_run):
    report, _ = verify_run
    claims = _check(
        report,
        "13 property suites",
        [
            "props.normalization",
            "props.positivity",
            "props.no_signaling",
            "props.fhv_marginal_zero_mean",
            "props.outcome_dependence",
            "props.bhv_outcome_independence",
            "props.thv_support",
        ],
    )
    assert claims[0].tolerance == 1e-12
    assert claims[2].tolerance == 1e-12


def test_criterion_14_mc_consistency_and_runtime(verify_run):
    report, elapsed = verify_run
    _check(
        report,
        "14 Monte-Carlo consistency",
        [
            "mc.fhv.consistency",
            "mc.shv.consistency",
            "mc.thv.consistency",
            "mc.qm.consistency",
        ],
    )
    print(f"ACCEPTANCE 14 runtime: {'PASS' if elapsed < 300 else 'FAIL'} "
          f"[verify suite took {elapsed:.1f}s]")
    assert elapsed < 300.0


def test_suite_summary(verify_run):
    report, elapsed = verify_run
    print(
        f"ACCEPTANCE summary: {report.n_passed} passed, {report.n_failed} failed, "
        f"{report.n_flagged} flagged, {elapsed:.1f}s"
    )
    assert report.n_failed == 0
    assert report.n_flagged == 2
