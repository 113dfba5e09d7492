"""Acceptance criteria; each test prints one PASS/FAIL line."""

import os
import subprocess
import sys
import time
from pathlib import Path

import pytest

import acceptance_run as run

RESULTS: dict = {}


@pytest.fixture
def report(capsys):
    def emit(n: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'} {title}: {detail}")

    return emit


def section(name: str):
    t0 = time.perf_counter()
    RESULTS[name] = run.SECTIONS[name]()
    return RESULTS[name], time.perf_counter() - t0


def test_1_corpus_and_mutants(report):
    r, secs = section("corpus")
    passed = sum(f["exit_code"] == 0 for f in r["files"])
    caught = sum(m["diagnostic"]["code"] == m["expected"] for m in r["mutants"])
    ok = passed == len(r["files"]) >= 20 and caught == len(r["mutants"]) >= 15 and secs < 10
    report(1, "corpus", ok, f"{passed}/{len(r['files'])} files ok, {caught}/{len(r['mutants'])} mutants with expected code, {secs:.2f}s (limit 10s)")
    assert ok


def test_2_universe_oracle(report):
    r, secs = section("universes")
    ok = r["samples"] >= 5000 and not r["disagreements"]
    report(2, "universe oracle", ok, f"{r['samples']} samples, {r['consistent']} consistent, {len(r['disagreements'])} disagreements, {secs:.1f}s")
    assert ok


def test_3_triangle(report):
    r, secs = section("triangle")
    ok = r["checked"] > 0 and not r["counterexamples"] and secs < 300
    report(3, "triangle", ok, f"{r['checked']} terms, {r['skipped']} skipped, {len(r['counterexamples'])} counterexamples, {secs:.1f}s (limit 300s)")
    assert ok


def test_4_diamond_and_joinability(report):
    d, _ = section("diamond")
    j, secs = section("join")
    ok = not d["counterexamples"] and j["checked"] >= 1000 and not j["counterexamples"]
    report(4, "diamond+join", ok, f"diamond {d['checked']} checked, join {j['checked']} walk pairs (steps 8, depth 10), {len(d['counterexamples']) + len(j['counterexamples'])} counterexamples, {secs:.1f}s")
    assert ok


def test_5_subject_reduction(report):
    r, _ = section("sr")
    ok = 0 < r["checked"] <= 10_000 and r["skipped"] == 0 and not r["counterexamples"]
    report(5, "subject reduction", ok, f"{r['checked']} term/reduct pairs, {r['skipped']} skipped, {len(r['counterexamples'])} failures")
    assert ok


def test_6_principality(report):
    r, _ = section("principality")
    ok = r["checked"] >= 200 and not r["counterexamples"]
    report(6, "principality", ok, f"{r['checked']} terms, {len(r['counterexamples'])} violations")
    assert ok


def test_7_erasure(report):
    r, _ = section("erasure")
    fo = r["first_order"]
    good = sum(p["observe_eq"] and p["observe_eq_optimized"] for p in fo)
    single = sum(p["observe_eq"] and p["observe_eq_optimized"] and p["box_free"] for p in r["singleton"])
    ok = good == len(fo) >= 12 and single == len(r["singleton"]) >= 2
    report(7, "erasure", ok, f"{good}/{len(fo)} first-order programs agree (also pruned+optimized), {single} box-free singleton eliminations")
    assert ok


def test_8_structural(report):
    rs = [section(name)[0] for name in run.STRUCTURAL]
    ok = all(r["checked"] >= 500 and not r["counterexamples"] for r in rs)
    detail = ", ".join(f"{r['suite']} {r['checked']}/{len(r['counterexamples'])}" for r in rs)
    report(8, "structural", ok, f"checked/violations: {detail}")
    assert ok


def test_9_determinism(report):
    for name in run.SECTIONS:
        if name not in RESULTS:
            section(name)
    first = run.dump({name: RESULTS[name] for name in run.SECTIONS})
    script = Path(__file__).parent / "acceptance_run.py"
    env = dict(os.environ, PYTHONHASHSEED="12345")
    second = subprocess.run([sys.executable, str(script)], capture_output=True, text=True, env=env, check=True).stdout
    ok = first + "\n" == second
    report(9, "determinism", ok, f"{len(first)} bytes of JSON, second run in a fresh process {'identical' if ok else 'differs'}")
    assert ok
