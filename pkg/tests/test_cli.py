import csv
import io
import json

import numpy as np
import pytest
import scipy.io

from rovf.cli import main, run_experiment, validate_config

HALF_I4 = {"kind": "deterministic", "T": {"dim": 4, "entries": list((0.5 * np.eye(4)).ravel())}}
TWO_AXIS = {"kind": "fusion-frame", "subspaces": [{"basis": [[1, 0]], "w": 0.5}, {"basis": [[0, 1]], "w": 0.5}]}


def cfg(**kw):
    cfg, errors = validate_config(json.dumps(kw))
    assert errors == []
    return cfg


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_missing_seed():
    _, errors = validate_config(json.dumps({"kind": "lemma2-sweep"}))
    assert "seed required" in errors


def test_bad_fusion_weights_named():
    bad = dict(TWO_AXIS, subspaces=[{"basis": [[1, 0]], "w": 0.4}, {"basis": [[0, 1]], "w": 0.4}])
    _, errors = validate_config(json.dumps({"kind": "fusion", "seed": 1, "sampler": bad, "x": [1, 1], "n_steps": 3, "n_trials": 3}))
    assert any("fusion weights" in e and "sum to 1" in e for e in errors)


def test_all_errors_reported_at_once():
    _, errors = validate_config(json.dumps({"kind": "convergence"}))
    assert len(errors) >= 4


def test_json_syntax_error_has_position():
    _, errors = validate_config('{"kind": "x",\n  "seed": }')
    assert errors == ["line 2 column 11: Expecting value"]


def test_round_trip():
    raw = {"kind": "lemma2-sweep", "seed": 3}
    c = cfg(**raw)
    assert json.loads(c.to_json()) == raw
    c2, _ = validate_config(c.to_json())
    assert c2.to_json() == c.to_json()


def test_convergence_half_identity():
    c = cfg(kind="convergence", seed=1, sampler=HALF_I4, x=[1.0, 2.0, -1.0, 0.5], n_steps=20, n_trials=4)
    verdict, files = run_experiment(c)
    assert verdict.passed
    x_sq = 1 + 4 + 1 + 0.25
    for r in rows(files["curve.csv"]):
        n = int(r["step"])
        assert float(r["oracle_res_sq"]) == pytest.approx(4.0**-n * x_sq, rel=1e-13)
        assert float(r["mean_res_sq"]) == pytest.approx(4.0**-n * x_sq, rel=1e-13)
    doc = json.loads(files["verdict.json"])
    assert doc["pass"] and all(c["anchor"] for c in doc["checks"])


def test_parseval_two_axis():
    c = cfg(kind="parseval", seed=2, sampler=TWO_AXIS, x=[1.0, 1.0], n_steps=25, n_trials=10_000)
    verdict, files = run_experiment(c)
    assert verdict.passed
    assert all(float(r["parseval_defect"]) <= 1e-9 for r in rows(files["parseval.csv"]))


def test_lemma2_sweep_small():
    verdict, files = run_experiment(cfg(kind="lemma2-sweep", seed=3, n_pairs=500))
    assert verdict.passed
    assert min(float(r["gap_rel"]) for r in rows(files["lemma2.csv"])) >= -1e-9


def test_parseval_rejects_non_projection():
    _, errors = validate_config(
        json.dumps({"kind": "parseval", "seed": 1, "sampler": HALF_I4, "x": [1, 1, 1, 1], "n_steps": 3, "n_trials": 3})
    )
    assert any("projection" in e for e in errors)


def test_main_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"kind": "dilation-check", "seed": 1, "n_samples": 20}))
    assert main(["--config", str(good), "--out", str(tmp_path / "o1")]) == 0
    assert (tmp_path / "o1" / "verdict.json").exists()

    neg = tmp_path / "neg.json"
    P = {"kind": "deterministic", "T": {"dim": 2, "entries": [1, 0, 0, 0]}}
    neg.write_text(json.dumps({"kind": "convergence", "seed": 1, "sampler": P, "x": [1, 1], "n_steps": 10, "n_trials": 2}))
    assert main(["--config", str(neg), "--out", str(tmp_path / "o2")]) == 1
    doc = json.loads((tmp_path / "o2" / "verdict.json").read_text())
    by_name = {c["name"]: c for c in doc["checks"]}
    assert by_name["coercivity_positive"]["pass"] is False
    assert by_name["residual_plateau_detected"]["pass"] is True

    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["--config", str(bad), "--out", str(tmp_path / "o3")]) == 2
    assert main(["--out", "x"]) == 2


def test_seed_override_changes_output(tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"kind": "convergence", "seed": 1, "sampler": TWO_AXIS, "x": [1, 1], "n_steps": 5, "n_trials": 50}))
    main(["--config", str(c), "--out", str(tmp_path / "a")])
    main(["--config", str(c), "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "curve.csv").read_text() != (tmp_path / "b" / "curve.csv").read_text()
    assert json.loads((tmp_path / "b" / "verdict.json").read_text())["seed"] == 2


def test_kaczmarz_matrix_market(tmp_path):
    g = np.random.default_rng(0)
    A = g.standard_normal((8, 3))
    scipy.io.mmwrite(str(tmp_path / "A.mtx"), A)
    x_star = [1.0, -1.0, 0.5]
    c = tmp_path / "k.json"
    c.write_text(json.dumps({"kind": "kaczmarz", "seed": 4, "matrix": str(tmp_path / "A.mtx"), "x_star": x_star, "n_trials": 50}))
    assert main(["--config", str(c), "--out", str(tmp_path / "k")]) == 0
    assert rows((tmp_path / "k" / "kaczmarz.csv").read_text())[0]["step"] == "0"


def test_kaczmarz_inconsistent_is_config_error(tmp_path):
    c = tmp_path / "k.json"
    c.write_text(json.dumps({"kind": "kaczmarz", "seed": 4, "matrix": [[1, 0], [1, 0]], "b": [1, 2], "n_trials": 5}))
    assert main(["--config", str(c), "--out", str(tmp_path / "k")]) == 2


def test_full_paths(tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"kind": "convergence", "seed": 1, "sampler": TWO_AXIS, "x": [1, 2], "n_steps": 4, "n_trials": 3}))
    main(["--config", str(c), "--out", str(tmp_path / "o"), "--full-paths"])
    paths = json.loads((tmp_path / "o" / "paths.json").read_text())
    assert len(paths) == 3 and "terms" in paths[0]


def test_basis_sweep_and_coercivity():
    verdict, files = run_experiment(cfg(kind="fusion", seed=5, sampler=TWO_AXIS, x="basis-sweep", n_steps=20, n_trials=300))
    assert verdict.passed
    verdict, files = run_experiment(
        cfg(kind="coercivity", seed=6, sampler={"kind": "discrete-mixture", "atoms": [
            {"T": [[1, 0], [0, 0]], "p": 0.3}, {"T": [[0.5, 0], [0, 0.5]], "p": 0.7}]}, n_samples=20_000)
    )
    assert verdict.passed
