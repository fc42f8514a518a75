import json
import math
import os
import stat

import pytest

from ratio_cs import harness as hs
from ratio_cs.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def toy(tmp_path, capsys):
    path = tmp_path / "toy"
    assert run(capsys, "gen", "--toy", "kernel4", "--out", path)[0] == 0
    return path


def test_version(capsys):
    code, out, _ = run(capsys, "version")
    assert code == 0 and out.startswith("ratio-cs ")


def test_solve_l1_on_toy(toy, tmp_path, capsys):
    code, out, _ = run(capsys, "solve", toy, "--method", "l1", "--out", tmp_path / "r.json")
    assert code == 0
    assert "method=l1" in out and "feasibility=" in out and "ratio=" in out
    res = json.loads((tmp_path / "r.json").read_text())
    assert res["feasibility"] <= 1e-6 and res["recovered"]


def test_unknown_method_is_usage_error(toy, capsys):
    assert run(capsys, "solve", toy, "--method", "nope")[0] == 2


def test_unknown_flag_is_usage_error(toy, capsys):
    code, _, err = run(capsys, "solve", toy, "--method", "l1", "--bogus")
    assert code == 2 and "usage" in err


def test_ss_reports_winning_index(tmp_path, capsys):
    path = tmp_path / "g"
    run(capsys, "gen", "--m", 30, "--n", 80, "--s", 4, "--seed", 3, "--out", path)
    code, _, _ = run(capsys, "solve", path, "--method", "l1l2+ss", "--s", 4,
                     "--out", tmp_path / "r.json")
    res = json.loads((tmp_path / "r.json").read_text())
    assert code == 0 and "winning_index" in res


@pytest.mark.parametrize("s,verdict", [(1, "holds"), (2, "fails")])
def test_certify_nsp_exact_on_toy(toy, tmp_path, capsys, s, verdict):
    out = tmp_path / "c.json"
    code, _, _ = run(capsys, "certify", toy, "--condition", "nsp", "--exact",
                     "--s", s, "--c", 1, "--out", out)
    assert code == 0 and json.loads(out.read_text())["verdict"] == verdict


def test_certify_width(capsys):
    code, out, _ = run(capsys, "certify", "--condition", "width", "--n", 100, "--samples", 4000)
    rep = json.loads(out)
    q = rep["quantities"]
    assert code == 0 and q["mean"] <= math.sqrt(8 * math.log(100)) + 3 * q["stderr"]


def test_certify_missing_flag_is_usage_error(toy, capsys):
    assert run(capsys, "certify", toy, "--condition", "nsp", "--exact")[0] == 2
    assert run(capsys, "certify", "--condition", "width")[0] == 2


def test_certify_kernel_too_large_is_domain_error(tmp_path, capsys):
    path = tmp_path / "g"
    run(capsys, "gen", "--m", 5, "--n", 10, "--s", 1, "--out", path)
    code, out, _ = run(capsys, "certify", path, "--condition", "nsp", "--exact",
                       "--s", 1, "--c", 1)
    assert code == 1 and json.loads(out)["error"] == "KernelTooLarge"


def test_oracle_on_toy(toy, capsys):
    code, out, _ = run(capsys, "oracle", toy)
    d = json.loads(out)
    assert code == 0 and d["sparsest"] == [5.0, 0.0, 0.0, 0.0]
    assert d["ratio_min"]["ratio"] == pytest.approx(1.0) and d["ratio_min"]["unique"]


def _spec(tmp_path, **kw):
    d = dict(kind="recovery_rate", m=20, n=40, s_list=[4, 6], trials=3, replications=2,
             methods=["l1", "omp"], deterministic=True)
    d.update(kw)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(d))
    return path


def test_experiment_row_count(tmp_path, capsys):
    code, _, err = run(capsys, "experiment", _spec(tmp_path), "--out", tmp_path / "o",
                       "--parallelism", 1)
    assert code == 0 and "progress" in err
    recs = hs.read_records_csv(tmp_path / "o" / "records.csv")
    assert len(recs) == 2 * 3 * 2 * 2
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert set(summary["per_method"]) == {"l1", "omp"}


def test_experiment_parallelism_identical(tmp_path, capsys):
    spec = _spec(tmp_path)
    run(capsys, "experiment", spec, "--out", tmp_path / "a", "--parallelism", 1)
    run(capsys, "experiment", spec, "--out", tmp_path / "b", "--parallelism", 8)
    for name in ("summary.json", "records.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_timing_columns(tmp_path, capsys):
    spec = _spec(tmp_path, kind="timing", n_list=[64], samples=1, methods=["omp"])
    assert run(capsys, "experiment", spec, "--out", tmp_path / "t")[0] == 0
    header = (tmp_path / "t" / "timing.csv").read_text().splitlines()[0].split(",")
    assert "log10_n" in header and "log10_ms" in header


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_experiment_unwritable_dir(tmp_path, capsys):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(stat.S_IRUSR | stat.S_IXUSR)
    assert run(capsys, "experiment", _spec(tmp_path), "--out", ro / "x")[0] == 1


def test_experiment_out_is_a_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, out, _ = run(capsys, "experiment", _spec(tmp_path), "--out", blocker / "x")
    assert code == 1 and "error" in json.loads(out)


def test_experiment_invalid_spec(tmp_path, capsys):
    assert run(capsys, "experiment", _spec(tmp_path, trials=0), "--out", tmp_path / "o")[0] == 1


def test_gen_solve_certify_round_trip(tmp_path, capsys):
    inst = tmp_path / "noisy"
    assert run(capsys, "gen", "--m", 50, "--n", 250, "--s", 1, "--noise-rel", 0.01,
               "--seed", 2, "--out", inst)[0] == 0
    assert run(capsys, "solve", inst, "--method", "l1l2", "--noisy",
               "--out", tmp_path / "r.json")[0] == 0
    res = json.loads((tmp_path / "r.json").read_text())
    assert res["method"] == "l1l2-noisy"
    code, _, _ = run(capsys, "certify", inst, "--condition", "robustness",
                     "--out", tmp_path / "c.json")
    rep = json.loads((tmp_path / "c.json").read_text())
    assert code == 0 and rep["condition"] == "robustness"
