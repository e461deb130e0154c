import json
import os
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent.parent / "fixtures"
SM = str(FIXTURES / "sm.sct.txt")
SCENARIO = str(FIXTURES / "sm.scenario.json")
DOUBLES = str(FIXTURES / "clover.doubles.json")


def statetest(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "statetest.cli", *args],
        capture_output=True,
        text=True,
        input=stdin,
        timeout=60,
    )


def test_validate_reference_model():
    res = statetest("validate", SM)
    assert res.returncode == 0, res.stderr


def test_validate_unknown_state(tmp_path):
    bad = tmp_path / "bad.sct.txt"
    bad.write_text("statechart M { initial -> A state A { when [true] -> B } }")
    res = statetest("validate", str(bad))
    assert res.returncode == 3
    assert "E_UNKNOWN_STATE" in res.stderr


def test_validate_missing_file():
    res = statetest("validate", "no_such_file.sct.txt")
    assert res.returncode == 2


def test_validate_json_format(tmp_path):
    bad = tmp_path / "bad.sct.txt"
    bad.write_text("statechart M { }")
    res = statetest("validate", str(bad), "--format", "json")
    assert res.returncode == 3
    data = json.loads(res.stderr)
    assert any(d["code"] == "E_NO_INITIAL" for d in data["diagnostics"])


def test_run_reference_scenario_passes():
    res = statetest("run", SM, "--scenario", SCENARIO)
    assert res.returncode == 0, res.stdout + res.stderr
    assert "verdict: PASS" in res.stdout


def test_run_json_format_matches_text_verdict():
    res = statetest("run", SM, "--scenario", SCENARIO, "--format", "json")
    assert res.returncode == 0
    assert json.loads(res.stdout)["verdict"] == "PASS"


def test_run_tampered_expectation_fails(tmp_path):
    scenario = json.loads(Path(SCENARIO).read_text())
    scenario["expectations"][1] = "State1"
    tampered = tmp_path / "bad.scenario.json"
    tampered.write_text(json.dumps(scenario))
    res = statetest("run", SM, "--scenario", str(tampered))
    assert res.returncode == 1
    assert "first failure at step 1" in res.stdout


def test_run_machine_mismatch(tmp_path):
    scenario = json.loads(Path(SCENARIO).read_text())
    scenario["machine"] = "Other"
    other = tmp_path / "other.scenario.json"
    other.write_text(json.dumps(scenario))
    res = statetest("run", SM, "--scenario", str(other))
    assert res.returncode == 3
    assert "E_MACHINE_MISMATCH" in res.stderr


def test_run_with_csv_flags():
    res = statetest(
        "run", SM,
        "--expectations", "State2,State3,__final__",
        "--variables", "value1,value2,value3",
        "--inputs", "13,54,true",
    )
    assert res.returncode == 0, res.stderr
    assert "verdict: PASS" in res.stdout


def test_run_without_scenario_is_usage_error():
    res = statetest("run", SM)
    assert res.returncode == 2


def test_run_microstep_fault_exits_4(tmp_path):
    model = tmp_path / "live.sct.txt"
    model.write_text(
        "statechart M { var x: int = 0 initial -> A state A { when [x == 1] -> A } }"
    )
    res = statetest(
        "run", str(model), "--expectations", "A", "--variables", "x", "--inputs", "1"
    )
    assert res.returncode == 4


def test_repl_session():
    res = statetest("repl", SM, stdin="set value1 13\nshow\nset bogus 1\nquit\n")
    assert res.returncode == 0
    assert "active: State2" in res.stdout
    assert "E_UNKNOWN_VAR" in res.stderr


def test_repl_trace_and_reset():
    res = statetest("repl", SM, stdin="set value1 13\ntrace\nreset\nshow\nquit\n")
    assert res.returncode == 0
    assert "State1->State2" in res.stdout
    assert res.stdout.count("active: State1") >= 1


def test_gen_sm_writes_artifacts(tmp_path):
    res = statetest("gen", "sm", SM, "-o", str(tmp_path))
    assert res.returncode == 0, res.stderr
    for name in ("Sm.h", "Sm.c", "sc_types.h"):
        assert (tmp_path / "src-gen" / name).exists()
    printed = res.stdout.splitlines()
    assert len(printed) == 3


def test_gen_sm_is_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    statetest("gen", "sm", SM, "-o", str(first))
    statetest("gen", "sm", SM, "-o", str(second))
    a = (first / "src-gen" / "Sm.c").read_bytes()
    b = (second / "src-gen" / "Sm.c").read_bytes()
    assert a == b


def test_gen_test_matches_golden(tmp_path):
    res = statetest("gen", "test", SM, "--scenario", SCENARIO, "-o", str(tmp_path))
    assert res.returncode == 0, res.stderr
    produced = (tmp_path / "tests" / "TestSm.cpp").read_text()
    golden = (
        Path(__file__).parent / "goldens" / "sm_gtest" / "tests" / "TestSm.cpp"
    ).read_text()
    assert produced == golden


def test_gen_doubles(tmp_path):
    res = statetest("gen", "doubles", DOUBLES, "-o", str(tmp_path))
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "doubles" / "clover_doubles.h").exists()
    assert "__wrap_malloc" in (tmp_path / "doubles" / "clover_doubles.c").read_text()


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_gen_into_readonly_directory_exits_4(tmp_path):
    target = tmp_path / "ro"
    target.mkdir()
    target.chmod(0o555)
    res = statetest("gen", "sm", SM, "-o", str(target))
    assert res.returncode == 4


def test_serve_ephemeral_port_and_sigint():
    proc = subprocess.Popen(
        [sys.executable, "-m", "statetest.cli", "serve", "--port", "0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    try:
        line = proc.stdout.readline()
        assert "http://127.0.0.1:" in line
        port = int(line.rsplit(":", 1)[1])
        deadline = time.time() + 10
        source = Path(SM).read_text().encode()
        while True:
            try:
                req = urllib.request.Request(
                    f"http://127.0.0.1:{port}/models", data=source, method="POST"
                )
                with urllib.request.urlopen(req, timeout=2) as res:
                    body = json.loads(res.read())
                break
            except OSError:
                if time.time() > deadline:
                    raise
                time.sleep(0.1)
        assert "model_id" in body
    finally:
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=10) == 0
