import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from hofa.setfile import read_set


def run_cli(*args, cwd=None):
    proc = subprocess.run([sys.executable, "-m", "hofa", *args],
                          capture_output=True, text=True, cwd=cwd)
    return proc


@pytest.fixture(scope="module")
def schema():
    with resources.files("hofa.schemas").joinpath("cli.schema.json").open() as fh:
        return json.load(fh)


def check_json(proc, schema):
    doc = json.loads(proc.stdout)
    jsonschema.validate(doc, schema)
    return doc


def test_gen_full_and_count(tmp_path, schema):
    out = tmp_path / "full.box"
    proc = run_cli("gen", "full", "--box", "8,32", "--out", str(out))
    assert proc.returncode == 0
    doc = check_json(proc, schema)
    assert doc["members"] == 256

    proc2 = run_cli("count", "--set", str(out), "--m", "1,2", "--N", "4",
                    "--oracle")
    assert proc2.returncode == 0
    doc2 = check_json(proc2, schema)
    assert doc2["lambda"]["re"] == pytest.approx(1.0)
    assert doc2["ok"] is True
    assert doc2["oracle"]["max_dev"] <= 1e-9


def test_count_empty_set(tmp_path, schema):
    out = tmp_path / "empty.box"
    run_cli("gen", "empty", "--box", "8,32", "--out", str(out))
    proc = run_cli("count", "--set", str(out), "--m", "1,2", "--N", "4")
    doc = check_json(proc, schema)
    assert doc["lambda"]["re"] == 0.0
    assert doc["integer_count"] == 0


def test_count_general_operator(tmp_path, schema):
    out = tmp_path / "rand.box"
    run_cli("gen", "random", "--box", "10,100", "--p", "0.5", "--seed", "5",
            "--out", str(out))
    proc = run_cli("count", "--set", str(out), "--m", "1,2", "--q", "2",
                   "--M", "3", "--oracle")
    assert proc.returncode == 0
    doc = check_json(proc, schema)
    assert doc["operator"] == "general"
    assert doc["normalization"] == 10 * 100 * 3
    assert doc["ok"] is True


def test_gen_determinism(tmp_path):
    a, b = tmp_path / "a.box", tmp_path / "b.box"
    run_cli("gen", "random", "--box", "6,36", "--p", "0.5", "--seed", "1",
            "--out", str(a))
    run_cli("gen", "random", "--box", "6,36", "--p", "0.5", "--seed", "1",
            "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_gen_residue_density(tmp_path, schema):
    out = tmp_path / "res.box"
    proc = run_cli("gen", "residue", "--q", "3", "--allowed", "0",
                   "--box", "9,81", "--out", str(out))
    doc = check_json(proc, schema)
    assert doc["members"] == 9 * 81 // 9  # density exactly 1/9


def test_gen_product_ap(tmp_path, schema):
    out = tmp_path / "ap.box"
    proc = run_cli("gen", "product-ap", "--box", "10,10", "--start", "2,1",
                   "--step", "3,4", "--out", str(out))
    doc = check_json(proc, schema)
    A = read_set(out)
    assert doc["members"] == A.count == 3 * 3  # {2,5,8} x {1,5,9}


def test_gen_binary_format(tmp_path, schema):
    out = tmp_path / "b.box"
    proc = run_cli("gen", "random", "--box", "5,25", "--p", "0.4", "--seed",
                   "3", "--out", str(out), "--binary")
    doc = check_json(proc, schema)
    assert doc["format"] == "binary"
    assert out.read_bytes().startswith(b"HOFA1\n")
    assert read_set(out).count == doc["members"]


def test_popdiff_direct(tmp_path, schema):
    out = tmp_path / "full.box"
    run_cli("gen", "full", "--box", "8,64", "--out", str(out))
    hist = tmp_path / "hist.json"
    proc = run_cli("popdiff", "--set", str(out), "--m", "1,2", "--M", "10",
                   "--out", str(hist))
    assert proc.returncode == 0
    doc = check_json(proc, schema)
    assert doc["r_star"] == 1
    assert doc["histogram_path"] == str(hist)
    payload = json.loads(hist.read_text())
    assert len(payload["histogram"]) == 10


def test_popdiff_pipeline_fallback(tmp_path, schema):
    out = tmp_path / "rand.box"
    run_cli("gen", "random", "--box", "16,256", "--p", "0.5", "--seed", "2",
            "--out", str(out))
    proc = run_cli("popdiff", "--set", str(out), "--m", "1,2", "--delta",
                   "0.1", "--pipeline", "--fallback")
    assert proc.returncode == 0
    doc = check_json(proc, schema)
    assert doc["certificate"]["fallback"] is True
    proc2 = run_cli("popdiff", "--set", str(out), "--m", "1,2", "--delta",
                    "0.1", "--pipeline")
    assert proc2.returncode == 3  # fallback disabled, decomposition dies


def test_popdiff_empty_set_exit3(tmp_path):
    out = tmp_path / "empty.box"
    run_cli("gen", "empty", "--box", "4,16", "--out", str(out))
    proc = run_cli("popdiff", "--set", str(out), "--m", "1,2", "--M", "3")
    assert proc.returncode == 3
    assert proc.stdout == ""


def test_verify_suite_json_and_exit(tmp_path, schema):
    proc = run_cli("verify", "partition", "--seed", "7", "--trials", "2")
    assert proc.returncode == 0
    doc = check_json(proc, schema)
    assert doc["failures"] == 0
    assert doc["suite"] == "partition"

    bad = run_cli("verify", "nosuchsuite")
    assert bad.returncode == 2


def test_verify_deterministic_given_seed():
    a = run_cli("verify", "counting", "--seed", "9", "--trials", "2")
    b = run_cli("verify", "counting", "--seed", "9", "--trials", "2")
    assert a.stdout == b.stdout


def test_bench_csv_and_agreement():
    proc = run_cli("bench", "--box", "16,64", "--M", "5", "--p", "0.5")
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "impl,box,M,total_count,seconds"
    totals = {row.split(",")[0]: row.split(",")[3] for row in lines[1:]}
    assert len(set(totals.values())) == 1  # all implementations agree
    assert "naive" in totals and "numpy" in totals


def test_bench_trivial_box():
    proc = run_cli("bench", "--box", "2,4", "--m", "1,2", "--M", "1")
    assert proc.returncode == 0


def test_threads_env_var_does_not_change_output(tmp_path):
    import os
    out = tmp_path / "r.box"
    run_cli("gen", "random", "--box", "16,128", "--p", "0.5", "--seed", "4",
            "--out", str(out))
    base = run_cli("popdiff", "--set", str(out), "--m", "1,2", "--M", "8")
    env = dict(os.environ, HOFA_THREADS="3")
    threaded = subprocess.run(
        [sys.executable, "-m", "hofa", "popdiff", "--set", str(out), "--m",
         "1,2", "--M", "8"], capture_output=True, text=True, env=env)
    assert threaded.stdout == base.stdout


def test_verify_all_single_trial_under_budget():
    import time
    t0 = time.time()
    proc = run_cli("verify", "all", "--trials", "1", "--seed", "3")
    elapsed = time.time() - t0
    assert proc.returncode == 0
    assert elapsed < 60


def test_malformed_set_exit2(tmp_path):
    bad = tmp_path / "bad.box"
    bad.write_text("garbage\n")
    proc = run_cli("count", "--set", str(bad), "--m", "1,2", "--N", "2")
    assert proc.returncode == 2
    assert "bad set file" in proc.stderr


def test_usage_error_exit2():
    proc = run_cli("count", "--set", "nowhere.box")
    assert proc.returncode == 2


def test_stdout_single_json_document(tmp_path):
    out = tmp_path / "s.box"
    run_cli("gen", "full", "--box", "4,8", "--out", str(out))
    proc = run_cli("count", "--set", str(out), "--m", "1,2", "--N", "2")
    json.loads(proc.stdout)  # exactly one parseable document
    assert proc.stderr == ""


def test_incompatible_box_exit3(tmp_path):
    out = tmp_path / "s.box"
    run_cli("gen", "full", "--box", "4,16", "--out", str(out))
    proc = run_cli("count", "--set", str(out), "--m", "1,2", "--N", "2")
    assert proc.returncode == 3
    assert "precondition" in proc.stderr
