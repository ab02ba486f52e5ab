import json
import subprocess
import sys
from fractions import Fraction

import pytest

from normsched.cli import main
from normsched.model import load_json, three_partition_from_json, find_partition

F = Fraction


def run(args):
    return main([str(a) for a in args])


def test_gen3p_yes(tmp_path):
    out = tmp_path / "yes.json"
    assert run(["gen3p", "--m", 2, "--B", 39, "--yes", "--seed", 7, "-o", out]) == 0
    tp = three_partition_from_json(load_json(out))
    assert tp.m == 2 and tp.target == 39
    assert find_partition(tp) is not None


def test_gen3p_no_verified(tmp_path):
    out = tmp_path / "no.json"
    assert run(["gen3p", "--m", 2, "--B", 20, "--no", "--seed", 3, "-o", out]) == 0
    tp = three_partition_from_json(load_json(out))
    assert find_partition(tp) is None


def test_gen3p_tighten(tmp_path):
    out = tmp_path / "tight.json"
    assert run(["gen3p", "--m", 2, "--B", 39, "--seed", 1,
                "--tighten", "stretch2", "-o", out]) == 0
    tp = three_partition_from_json(load_json(out))
    eps = F(1, (2 * 39) ** 9)
    assert all(abs(b - F(39, 3)) <= eps for b in tp.elements)


def test_gen3p_usage_error(tmp_path):
    assert run(["gen3p", "--m", 2, "--B", "7/2", "-o", tmp_path / "x.json"]) == 2


def test_reduce_solve_eval_extract_pipeline(tmp_path):
    tp_file = tmp_path / "tp.json"
    # desk-scale rational elements keep the toy streams materializable
    with open(tp_file, "w") as fh:
        json.dump({"m": 1, "B": "2", "elements": ["3/5", "7/10", "7/10"]}, fh)
    prefix = tmp_path / "red"
    assert run(["reduce", "--variant", "flow2", "--in", tp_file,
                "--out-prefix", prefix,
                "--toy", "beta=1/4", "--toy", "rho=1/4"]) == 0
    inst_file = f"{prefix}.instance.json"
    params_file = f"{prefix}.params.json"
    threshold = load_json(f"{prefix}.threshold.json")
    assert "recomputed" in threshold and "printed" in threshold

    sched_file = tmp_path / "sched.json"
    assert run(["solve", "--algo", "brute", "--objective", "flow", "--k", "2",
                "--in", inst_file, "--out", sched_file, "--bound", 9]) == 0
    assert run(["eval", "--in", inst_file, "--schedule", sched_file,
                "--objective", "flow", "--k", "2"]) == 0
    assert run(["extract", "--in", inst_file, "--params", params_file,
                "--schedule", sched_file]) == 0


def test_reduce_sound_params_match_formulas(tmp_path):
    tp_file = tmp_path / "tp.json"
    with open(tp_file, "w") as fh:
        json.dump({"m": 2, "B": "12", "elements": ["4"] * 6}, fh)
    prefix = tmp_path / "s"
    assert run(["reduce", "--variant", "flow2", "--in", tp_file,
                "--out-prefix", prefix]) == 0
    params = load_json(f"{prefix}.params.json")
    assert params["alpha"] == "6912"
    assert params["beta"] == "663552"
    assert params["rho"] == f"1/{1327104 ** 3}"
    assert params["toy"] is False


def test_solve_srpt_and_minmax(tmp_path):
    inst_file = tmp_path / "inst.json"
    with open(inst_file, "w") as fh:
        json.dump({"jobs": [{"id": "a", "release": "0", "proc": "4"},
                            {"id": "b", "release": "1", "proc": "1"}],
                   "streams": []}, fh)
    assert run(["solve", "--algo", "srpt", "--in", inst_file]) == 0
    assert run(["solve", "--algo", "minmax", "--objective", "flow",
                "--k", "inf", "--in", inst_file]) == 0
    # minmax demands the infinity norm
    assert run(["solve", "--algo", "minmax", "--k", "2", "--in", inst_file]) == 2


def test_solve_resource_limit(tmp_path):
    inst_file = tmp_path / "big.json"
    jobs = [{"id": f"j{i}", "release": "0", "proc": str(i + 1)} for i in range(9)]
    with open(inst_file, "w") as fh:
        json.dump({"jobs": jobs, "streams": []}, fh)
    assert run(["solve", "--algo", "brute", "--k", "2", "--in", inst_file]) == 3


def test_eval_invalid_schedule_exits_one(tmp_path):
    inst_file = tmp_path / "inst.json"
    sched_file = tmp_path / "sched.json"
    with open(inst_file, "w") as fh:
        json.dump({"jobs": [{"id": "a", "release": "0", "proc": "2"}],
                   "streams": []}, fh)
    with open(sched_file, "w") as fh:
        json.dump({"slices": [{"job": "a", "from": "0", "to": "1"}],
                   "streams": {}}, fh)
    assert run(["eval", "--in", inst_file, "--schedule", sched_file]) == 1


def test_audit_sound_exit_zero(tmp_path):
    tp_file = tmp_path / "tp.json"
    with open(tp_file, "w") as fh:
        json.dump({"m": 2, "B": "12", "elements": ["4"] * 6}, fh)
    report_file = tmp_path / "report.json"
    assert run(["audit", "--variant", "flow2", "--in", tp_file,
                "--out", report_file]) == 0
    report = load_json(report_file)
    assert report["passed"] is True
    assert report["checks"]


def test_audit_toy_beta_exit_one(tmp_path):
    tp_file = tmp_path / "tp.json"
    with open(tp_file, "w") as fh:
        json.dump({"m": 2, "B": "12", "elements": ["4"] * 6}, fh)
    assert run(["audit", "--variant", "flow2", "--in", tp_file,
                "--toy", "beta=64"]) == 1


def test_audit_taylor_grid_only():
    assert run(["audit", "--grid", "taylor"]) == 0


def test_roundtrip_cli(tmp_path):
    tp_file = tmp_path / "tp.json"
    with open(tp_file, "w") as fh:
        json.dump({"m": 1, "B": "2", "elements": ["3/5", "7/10", "7/10"]}, fh)
    assert run(["roundtrip", "--variant", "flow2", "--in", tp_file,
                "--toy", "beta=1/4", "--toy", "rho=1/4", "--oracle"]) == 0


def test_cli_outputs_byte_identical(tmp_path):
    cmd = [sys.executable, "-m", "normsched.cli", "gen3p", "--m", "2",
           "--B", "39", "--seed", "5"]
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    subprocess.run([*cmd, "-o", str(a)], check=True, capture_output=True)
    subprocess.run([*cmd, "-o", str(b)], check=True, capture_output=True)
    assert a.read_bytes() == b.read_bytes()
