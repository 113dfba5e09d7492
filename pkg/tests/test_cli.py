import json
import os
import subprocess
import sys

import pytest

from pcuic.cli import main
from pcuic.shipped import CORPUS_DIR, MUTANT_DIR

PRELUDE = str(CORPUS_DIR / "prelude.pcuic")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "argv,code",
    [
        (["check", PRELUDE], 0),
        (["check", str(MUTANT_DIR / "cumul_failure.pcuic")], 1),
        (["check", str(MUTANT_DIR / "parse_error.pcuic")], 2),
        (["check", str(MUTANT_DIR / "universe_inconsistency.pcuic")], 3),
        (["check", PRELUDE, "--fuel", "30"], 4),
        (["check", str(MUTANT_DIR / "ack_pairs.pcuic")], 1),
        (["check", str(MUTANT_DIR / "ack_pairs.pcuic"), "--unsafe-no-guard"], 0),
        (["check", "/nonexistent.pcuic"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_json_diagnostic_fields(capsys):
    code, out, _ = run(capsys, "check", str(MUTANT_DIR / "parse_error.pcuic"), "--json")
    d = json.loads(out)
    assert code == 2
    assert d["code"] == "parse-error"
    assert d["span"] == {"line": 3, "col": 26}
    assert d["message"]


def test_infer(capsys):
    code, out, _ = run(capsys, "infer", PRELUDE, "--term", "plus")
    assert code == 0 and out.strip() == "plus : nat -> nat -> nat"


def test_eval_source_and_erased(capsys):
    assert run(capsys, "eval", PRELUDE, "--term", "three")[1].strip() == "S (S (S O))"
    code, out, _ = run(capsys, "eval", PRELUDE, "--term", "three", "--erased", "--prune", "--optimize")
    assert code == 0 and out.count("construct nat 1") == 3


def test_erase_emits_pruned_program(capsys):
    code, out, _ = run(capsys, "erase", PRELUDE, "--root", "three", "--prune", "--json")
    assert code == 0
    assert json.loads(out)["decls"] == ["nat", "plus", "three"]
    code, out, _ = run(capsys, "erase", PRELUDE, "--root", "three", "--emit-erased")
    assert "(define plus" in out


def test_meta_runs_a_suite(capsys):
    code, out, _ = run(capsys, "meta", "--suite", "diamond", "--trials", "10", "--json")
    d = json.loads(out)
    assert code == 0 and d["checked"] == 10 and d["counterexamples"] == []


def test_unknown_definition(capsys):
    assert run(capsys, "eval", PRELUDE, "--term", "nope")[0] == 2


def test_output_independent_of_hash_seed():
    argv = [sys.executable, "-m", "pcuic.cli", "meta", "--suite", "principality", "--trials", "30", "--json"]
    outs = set()
    for seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        outs.add(subprocess.run(argv, capture_output=True, env=env, check=True).stdout)
    assert len(outs) == 1
