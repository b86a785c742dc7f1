import json
import subprocess
import sys
from pathlib import Path

import pytest

from localmu.cli import main

DATA = Path(__file__).parent / "data"


def run(*argv):
    return subprocess.run([sys.executable, "-m", "localmu.cli", *argv], capture_output=True, text=True)


def test_check_passes(capsys):
    assert main(["check", "ring3.lmu", "mutex"]) == 0
    assert "p0" in capsys.readouterr().out


def test_check_json(capsys):
    assert main(["check", "ring3.lmu", "mutex", "--json", "--oracle", "1000"]) == 0
    js = json.loads(capsys.readouterr().out)
    assert js["passed"] and js["results"][0]["oracle"]["holds"]


def test_violation_exit_code():
    r = run("check", str(DATA / "broken.lmu"), "mutex", "--oracle", "100000")
    assert r.returncode == 1


def test_missing_file_is_usage_error():
    r = run("check", "nope.lmu", "mutex")
    assert r.returncode == 2 and "error" in r.stderr


def test_cap_exceeded():
    assert main(["check", "ring5.lmu", "mutex", "--oracle", "10"]) == 3


@pytest.mark.parametrize("argv", [
    ["balance", "red_black_ring.lmu"],
    ["invariant", "torus_tile.lmu", "--oracle", "100000"],
    ["spaces", "ring3.lmu", "--node", "p0"],
    ["spaces", "ring3.lmu", "--node", "p0", "--global"],
    ["tiles", "--generate", "torus", "3", "3"],
    ["tiles", "red_black_ring.lmu"],
    ["report", "counting", "3", "6", "2"],
])
def test_subcommands_succeed(argv, capsys):
    assert main(argv) == 0
    assert capsys.readouterr().out.strip()


def test_outward_failure_exit(capsys):
    assert main(["outward", "non_outward.lmu"]) == 1


def test_spaces_dump(tmp_path):
    out = tmp_path / "h.txt"
    assert main(["spaces", "ring3.lmu", "--node", "p0", "--dump", str(out)]) == 0
    assert out.read_text().strip()


def test_parse_error_exit(tmp_path):
    bad = tmp_path / "bad.lmu"
    bad.write_text("domain { }")
    r = run("balance", str(bad))
    assert r.returncode == 2 and "bad.lmu:1" in r.stderr
