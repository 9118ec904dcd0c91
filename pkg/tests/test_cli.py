import json
import subprocess
import sys

import pytest

from morsekit.cli import ANCHORS, COMMANDS, main
from morsekit.reports import SCHEMA_VERSION, report_schema_version


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_every_command_has_an_anchor():
    assert set(COMMANDS) <= set(ANCHORS) | {"check-git", "check-qgit", "check-divagation",
                                             "check-keylemma", "wag-tail", "escape"}


def test_schema_version():
    assert report_schema_version() == SCHEMA_VERSION == "morse-kit-report/1"


def test_constants_goldens(capsys):
    code, out, _ = run(capsys, "constants", "--rho", "const:0", "--L", "1", "--A", "0")
    data = json.loads(out)
    assert code == 0
    assert (data["kappa"], data["kappa_prime"], data["lambda"], data["M"]) == (3, 18, 24, 2)
    assert data["schema"] == SCHEMA_VERSION and data["anchor"]
    assert data["run"]["seed"] == 0 and data["run"]["command"] == "constants"


def test_profile_csv_all_zero(capsys):
    code, out, _ = run(capsys, "profile", "--space", "f2", "--set", "geodesic:a^6", "--radius", "6",
                       "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "r,max_diam,witness_x,witness_y"
    assert [line.split(",")[1] for line in lines[1:]] == ["0"] * 7


def test_profile_check_violation_exit(capsys):
    code, out, _ = run(capsys, "profile", "--space", "z2", "--set", "line:a", "--radius", "5",
                       "--rho", "const:1")
    assert code == 1 and json.loads(out)["result"]["check"]["verdict"] == "fail"


def test_member_u_out(capsys):
    code, out, _ = run(capsys, "member-u", "--space", "f2", "--zeta", "a^inf", "--eta", "b^inf",
                       "--r", "10")
    v = json.loads(out)["result"]["verdict"]
    assert code == 1 and v["kind"] == "Out" and v["witness"]


def test_member_u_reflexive_is_pass_with_note(capsys):
    code, out, _ = run(capsys, "member-u", "--space", "f2", "--zeta", "a^inf", "--eta", "a^inf",
                       "--r", "10")
    v = json.loads(out)["result"]["verdict"]
    assert code == 0 and v["kind"] == "NoCounterexampleFound" and "note" in v


def test_member_v_inconclusive(capsys):
    code, _, _ = run(capsys, "member-v", "--space", "z2-star-z", "--zeta", "(ca)^inf",
                     "--eta", "(ca)^inf", "--r", "12", "--horizon", "14")
    assert code == 2


def test_separation(capsys):
    code, out, _ = run(capsys, "separation", "--space", "f2", "--zeta", "a^inf", "--eta", "b^inf")
    assert code == 0 and json.loads(out)["result"]["R"] == 19


@pytest.mark.parametrize("argv", [
    ["profile", "--set", "nonsense"],
    ["profile", "--space", "no-such-space", "--set", "a^inf"],
    ["constants", "--rho", "cube"],
    ["constants", "--L", "x"],
    ["member-u", "--zeta", "a^inf", "--eta", "b^inf", "--r", "10", "--horizon", "12"],
    ["constants", "--format", "csv"],
    ["no-such-command"],
])
def test_input_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and err


def test_out_file_and_replay(capsys, tmp_path):
    path = tmp_path / "rep.json"
    assert main(["check-qgit", "--space", "z2-star-z", "--set", "c^inf", "--rho", "const:1",
                 "--count", "20", "--seed", "4", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["schema"] == SCHEMA_VERSION and data["run"]["seed"] == 4
    assert "--out" not in data["run"]["argv"]
    capsys.readouterr()
    code, out, _ = run(capsys, "replay", str(path))
    assert code == 0 and json.loads(out)["identical"]


def test_replay_detects_edits(capsys, tmp_path):
    path = tmp_path / "rep.json"
    main(["constants", "--rho", "const:0", "--out", str(path)])
    data = json.loads(path.read_text())
    data["kappa"] = 4
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    code, out, _ = run(capsys, "replay", str(path))
    assert code == 1 and not json.loads(out)["identical"]


def test_replay_version_mismatch(capsys, tmp_path):
    path = tmp_path / "rep.json"
    main(["constants", "--rho", "const:0", "--out", str(path)])
    data = json.loads(path.read_text())
    data["schema"] = "morse-kit-report/0"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "replay", str(path))
    assert code == 3 and "schema" in err


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "morsekit.cli", "exp-clopen", "--space", "z2-star-z-star-z",
                          "--n-max", "2", "--horizon", "10", "--format", "csv"],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0].startswith("n,ray,max_crossings")
