import csv
import io
import os
import subprocess

import pytest

DAF = os.environ.get("DAF_CLI")

pytestmark = pytest.mark.skipif(not DAF, reason="DAF_CLI not set")


def daf(*args, check=True):
    return subprocess.run([DAF, *args], capture_output=True, text=True, check=check)


def test_golden_prints_the_frozen_vector():
    out = daf("golden").stdout
    assert "00 00 00 01 00 01 00 00 00 00 00 00 01 04 00" in out
    assert "BF 80 00 00" in out


def test_run_writes_one_row(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text(
        "trace = synthetic:constant\n"
        "trace.frames = 120\n"
        "mode = DAF-L   # uniform sampling\n"
        "code_rate = 0.7\n"
        "delay_s = 1\n"
        "channel.plr = 0\n"
    )
    out = tmp_path / "run.csv"
    daf("run", "-c", str(cfg), "--seed", "4", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert rows[0]["mode"] == "DAF-L"
    assert rows[0]["seed"] == "4"
    assert float(rows[0]["idr"]) == 1.0


def test_sweep_respects_reps_and_grid():
    r = daf("sweep", "-s", "trace=synthetic:foreman", "-s", "trace.frames=150", "-s", "sweep.modes=DAF,S-LT",
            "-s", "sweep.code_rates=0.7,0.9", "-s", "delay_s=0.8", "-s", "channel.plr=0.1", "--reps", "3")
    rows = list(csv.DictReader(io.StringIO(r.stdout)))
    assert [(x["mode"], x["code_rate"]) for x in rows] == [("DAF", "0.7"), ("DAF", "0.9"), ("S-LT", "0.7"), ("S-LT", "0.9")]


def test_optimize_profiles():
    r = daf("optimize", "-s", "trace=synthetic:burst", "-s", "window_frames=20", "-s", "dt_frames=5")
    lines = r.stdout.strip().splitlines()
    assert lines[0] == "frame,P_uniform,P_slope,P_perframe"
    assert len(lines) == 301
    assert "normalized variance" in r.stderr


def test_trace_subcommand():
    r = daf("trace", "-s", "trace=synthetic:constant", "-s", "trace.frames=5", "-s", "trace.bytes=2000")
    assert r.stdout.splitlines()[0] == "frame,bytes,type"
    assert len(r.stdout.splitlines()) == 6


@pytest.mark.parametrize("args", [
    ["run", "-s", "trace=synthetic:constant", "-s", "delay_s=1"],
    ["run", "-s", "trace=synthetic:nothing", "-s", "code_rate=0.7", "-s", "delay_s=1"],
    ["run", "-c", "/nonexistent.conf"],
    ["sweep", "-s", "trace=synthetic:constant", "-s", "code_rate=0.7", "-s", "delay_s=1", "-s", "channel.plr=2"],
])
def test_errors_exit_nonzero(args):
    r = daf(*args, check=False)
    assert r.returncode != 0
    assert "error" in r.stderr
