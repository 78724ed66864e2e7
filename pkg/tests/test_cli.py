import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from socialots import cli

SMALL = ["--accounts", "a,b", "--uids", "1"]
SCHEMA = json.loads(resources.files("socialots").joinpath("data").joinpath("report.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_reach_small_bounds_holds(capsys):
    code, out, _ = run(capsys, "check", "--mode", "reach", *SMALL)
    assert code == 0
    assert "invariant inv1: holds" in out and "lemma L1: holds" in out


def test_json_report_validates(capsys):
    code, out, _ = run(capsys, "check", "--mode", "induct", *SMALL, "--json")
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == 0 and report["mode"] == "induct"
    tallies = report["verdicts"][0]["transitions"]
    assert all(t["cond_true"] + t["cond_false"] == t["cases"] for t in tallies)


def test_base_mode(capsys):
    code, out, _ = run(capsys, "check", "--mode", "base", "--accounts", "a,b,c", "--uids", "1,2")
    assert code == 0 and "mode base: OK" in out


def test_stutter_mode(capsys):
    code, out, _ = run(capsys, "check", "--mode", "stutter", *SMALL, "--sample", "30")
    assert code == 0 and "law stutter: holds" in out


def test_violation_then_explain(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "check", "--mode", "reach", *SMALL, "--ext", "set-visibility",
                       "--json", "--out", str(out_file))
    assert code == 1
    report = json.loads(out)
    assert report == json.loads(out_file.read_text())
    steps = report["verdicts"][0]["counterexample"]["steps"]
    assert steps[-1]["transition"] == "setvisibility"
    code, out, _ = run(capsys, "explain", str(out_file))
    assert code == 0 and "violation reproduced" in out
    assert "visibility(a): true -> false" in out

    ce = report["verdicts"][0]["counterexample"]
    ce_file = tmp_path / "ce.json"
    ce_file.write_text(json.dumps(ce))
    code, out, _ = run(capsys, "explain", str(ce_file), "--json")
    assert code == 0 and json.loads(out)["reproduced"] is True

    ce["steps"][3]["digest"] = "0" * 32
    ce_file.write_text(json.dumps(ce))
    code, out, _ = run(capsys, "explain", str(ce_file))
    assert code == 1 and "NOT reproduced" in out

    ce["schema"] = 7
    ce_file.write_text(json.dumps(ce))
    code, _, err = run(capsys, "explain", str(ce_file))
    assert code == 2 and "schema" in err


def test_false_lemma_file(capsys, tmp_path):
    lemmas = resources.files("socialots").joinpath("data").joinpath("false_lemma.inv").read_text()
    path = tmp_path / "fa.inv"
    path.write_text(lemmas)
    code, out, _ = run(capsys, "check", "--mode", "induct", *SMALL, "--lemmas", str(path))
    assert code == 1
    assert "lemma FA: violated" in out and "induction step fails for del(" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--mode", "teleport"],
        ["check", "--caps", "seq=0"],
        ["check", "--caps", "depth=3"],
        ["check", "--uids", "x"],
        ["check", "--accounts", "a,a"],
        ["check", "--default-visibility", "maybe"],
        ["check", "--ext", "time-travel"],
        ["check", "--places", "attic"],
        ["check", "--invariants", "/no/such/file.inv"],
        ["check", "--mode", "induct", "--accounts", "a,b,c"],
        ["run", "/no/such/file.sns"],
        ["run", "bundled:nope"],
        ["explain", "/no/such/ce.json"],
        [],
    ],
)
def test_bad_input_exits_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unparsable_files_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.inv"
    bad.write_text("invariant x(a: account) := a in frends(a)")
    code, _, err = run(capsys, "check", "--invariants", str(bad), *SMALL)
    assert code == 2 and "1:" in err
    bad = tmp_path / "bad.sns"
    bad.write_text('scenario "x"\nstep ad(alice)')
    code, _, err = run(capsys, "run", str(bad))
    assert code == 2 and "did you mean 'add'" in err
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run(capsys, "explain", str(junk))[0] == 2


def test_state_limit_exits_2(capsys):
    code, _, err = run(capsys, "check", *SMALL, "--max-states", "10")
    assert code == 2 and "max-states" in err


def test_run_bundled_and_files(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "bundled:friendship")
    assert code == 0 and "PASS" in out
    failing = tmp_path / "f.sns"
    failing.write_text('scenario "f"\nstep add(alice)\nassert not visibility(alice)\n')
    code, out, _ = run(capsys, "run", str(failing))
    assert code == 1 and "FAIL    3:1 assert not visibility(alice)" in out
    code, out, _ = run(capsys, "run", str(failing), "--json")
    data = json.loads(out)
    assert data["first_failure"] == 1 and data["steps"][1]["line"] == 3


def test_run_with_extension(capsys):
    assert run(capsys, "run", "bundled:hide_after_view")[0] == 1
    assert run(capsys, "run", "bundled:hide_after_view", "--ext", "set-visibility")[0] == 0


def test_identical_configs_give_identical_json(capsys):
    argv = ["check", "--mode", "reach", *SMALL, "--json"]
    bodies = []
    for _ in range(2):
        _, out, _ = run(capsys, *argv)
        body = json.loads(out)
        del body["stats"]["millis"]
        bodies.append(json.dumps(body, sort_keys=True))
    assert bodies[0] == bodies[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "socialots", "run", "bundled:add_twice"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
