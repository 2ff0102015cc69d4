"""Golden-file tests for every CLI path.

Regenerate with POLARLAB_UPDATE_GOLDEN=1 after an intended output change.
"""

import io
import json
import os
import shlex
from pathlib import Path

import pytest

from polarlab.cli import run

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"
UPDATE = os.environ.get("POLARLAB_UPDATE_GOLDEN") == "1"

CASES = {
    "polarize": "polarize -i poly3.json",
    "split": "split -i poly3.json",
    "hull": "hull -i poly3.json --max-degree 12",
    "check_algebra": "check -i poly3.json",
    "check_polar": "check -i polar3.json",
    "cowitt": "cowitt -i poly3.json --n-max 1",
    "witt_add": "witt add --p 3 --length 1 -i poly3.json -a u.json -b v.json",
    "witt_sub": "witt sub -i poly3.json -a u.json -b v.json --verify",
    "witt_add_binary": "witt add --binary -i poly3.json -a u.json -b v.json",
    "witt_frobenius": "witt frobenius -i poly3.json -a u.json",
    "witt_verschiebung": "witt verschiebung -i poly3.json -a w.json",
    "witt_teichmuller": "witt teichmuller -i poly3.json --element x --length 2",
    "witt_ghost": "witt ghost -i poly3.json -a u.json",
    "witt_random": "witt random -i poly3.json --degree 2 --length 2 --seed 7",
    "fmod_decompose": "fmod decompose -i fmod3.json",
    "fmod_dualize": "fmod dualize -i fmod3.json",
    "fmod_lift": "fmod lift -i fmod3.json",
    "fmod_from_polar": "fmod from-polar -i trunc2.json",
    "fmod_random": "fmod random --p 3 --seed 2 --max-dim 6",
    "dieudonne_compute": "dieudonne compute -i poly3.json --n-max 1",
    "dieudonne_check": "dieudonne check dm_a.json",
    "dieudonne_compare": "dieudonne compare dm_a.json dm_b.json",
    "dieudonne_compare_bounded": "dieudonne compare dm_a.json dm_b.json --bound-exp 2",
    "hopf_cofree": "hopf cofree -i trunc2.json",
    "hopf_lambda": "hopf lambda --p 3 --max-degree 18",
    "hopf_counterexample": "hopf counterexample --p 3",
    "hopf_primitives_lambda": "hopf primitives lambda --p 2 --max-degree 16",
    "hopf_primitives_file": "hopf primitives file -i lambda2.json",
    "hopf_verify_lambda": "hopf verify-cofree lambda --j 2 --p 3 --max-degree 54",
    "hopf_verify_counterexample": "hopf verify-cofree counterexample --p 3",
    "hopf_verify_counterexample_prime": "hopf verify-cofree counterexample-prime --p 3",
    "hopf_check": "hopf check -i lambda2.json",
    "dl_rewrite": "dl rewrite 'Q^6 Q^1' --p 3",
    "dl_rewrite_unstable": "dl rewrite 'bQ^2 Q^1' --p 3 --n 4 --gen-degree 4 --unstable",
    "dl_basis": "dl basis --p 3 --q 2 --n 4 --max-degree 30",
    # failures
    "err_malformed": "polarize -i malformed.json",
    "err_missing_file": "polarize -i nowhere.json",
    "err_p_mismatch": "witt add --p 5 -i poly3.json -a u.json -b v.json",
    "err_fmod_p_mismatch": "fmod decompose --p 5 -i fmod3.json",
    "err_length": "witt add --length 2 -i poly3.json -a u.json -b v.json",
    "err_not_prime": "polarize --p 4 -i poly3.json",
    "err_dl_p2": "dl rewrite 'Q^1' --p 2",
    "err_dl_parse": "dl rewrite 'Q1' --p 3",
    "err_dieudonne_check_args": "dieudonne check",
    "err_hopf_needs_p": "hopf lambda",
}

EXPECTED_EXIT = {name: 2 for name in CASES if name.startswith("err_")}
EXPECTED_EXIT["dieudonne_compare_bounded"] = 3


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    text = out.getvalue()
    return {"exit": code, "stdout": json.loads(text) if text else None,
            "stderr": err.getvalue().strip().splitlines()[-1:] if err.getvalue() else []}


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, monkeypatch):
    monkeypatch.chdir(DATA)
    got = invoke(shlex.split(CASES[name]))
    assert got["exit"] == EXPECTED_EXIT.get(name, 0), got["stderr"]
    path = GOLDEN / f"{name}.json"
    if UPDATE:
        path.write_text(json.dumps(got, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    if not path.exists():
        pytest.fail(f"no golden file {path.name}; run with POLARLAB_UPDATE_GOLDEN=1")
    assert got == json.loads(path.read_text(encoding="utf-8"))


def test_output_is_byte_identical(monkeypatch):
    monkeypatch.chdir(DATA)
    argv = shlex.split(CASES["witt_random"])
    a, b = io.StringIO(), io.StringIO()
    run(argv, stdout=a)
    run(argv, stdout=b)
    assert a.getvalue() == b.getvalue()


def test_known_answers(monkeypatch):
    monkeypatch.chdir(DATA)
    assert invoke(shlex.split(CASES["dieudonne_compare"]))["stdout"]["verdict"] == "yes"
    rep = invoke(shlex.split(CASES["hopf_verify_lambda"]))["stdout"]
    assert rep["cofree"] and rep["dims"] == rep["sym_dims"]
    assert invoke(shlex.split(CASES["hopf_verify_counterexample"]))["stdout"]["cofree"] is False
    assert invoke(shlex.split(CASES["dl_rewrite"]))["stdout"]["text"] == "2*(Q^4 Q^3 x) + Q^5 Q^2 x"
    err = invoke(shlex.split(CASES["err_malformed"]))["stderr"][0]
    assert "line 2" in err and "column" in err


def test_output_file(tmp_path, monkeypatch):
    monkeypatch.chdir(DATA)
    target = tmp_path / "out.json"
    assert run(["dl", "basis", "--p", "3", "-o", str(target)], stdout=io.StringIO()) == 0
    assert json.loads(target.read_text())["p"] == 3
