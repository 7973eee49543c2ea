"""Exit criteria, one test per criterion, each at its pinned tolerance.

A PASS/FAIL line per criterion is printed in the pytest terminal summary.
"""
import json
import math

import numpy as np
import pytest
from conftest import ACCEPTANCE_RESULTS

from rovf.analysis import (
    borel_cantelli_diagnostic,
    check_mean_square_bound,
    residual_plateau,
    run_trials,
)
from rovf.cli import main
from rovf.dilation import halmos_dilate, verify_dilation
from rovf.exceptions import CoercivityError
from rovf.iteration import StoppingRule, parseval_defect, run_path
from rovf.kaczmarz import LinearSystem, error_process_equivalence, kaczmarz_trials, rate
from rovf.linalg import lemma2_gap, random_positive_contraction, random_projection
from rovf.oracle import brute_force_paths, exact_exceedance, oracle_curve
from rovf.samplers import (
    Deterministic,
    DiscreteMixture,
    FusionFrameProjection,
    KaczmarzRow,
    RandomSpectral,
    RngStream,
    coercivity_constant,
    estimate_coercivity_mc,
)


def record(number, title, passed, detail):
    ACCEPTANCE_RESULTS.append((number, title, bool(passed), detail))
    assert passed, f"criterion {number} ({title}) failed: {detail}"


def random_mixture(g, d, max_atoms=3):
    m = int(g.integers(1, max_atoms + 1))
    atoms = tuple(random_positive_contraction(d, g) for _ in range(m))
    return DiscreteMixture(atoms, g.dirichlet(np.ones(m)))


def test_01_lemma_sweep():
    g = RngStream(101).generator()
    worst, worst_proj = np.inf, 0.0
    for i in range(10_000):
        d = int(g.integers(1, 17))
        if i % 5 == 0:
            T = random_projection(d, int(g.integers(1, d + 1)), g)
        else:
            T = random_positive_contraction(d, g)
        x = g.standard_normal(d)
        rel = lemma2_gap(T, x) / (x @ x)
        worst = min(worst, rel)
        if i % 5 == 0:
            worst_proj = max(worst_proj, abs(rel))
    record(1, "Lemma sweep", worst >= -1e-9 and worst_proj <= 1e-10,
           f"min gap/||x||^2 = {worst:.2e} (>= -1e-9), max projection |gap|/||x||^2 = {worst_proj:.2e} (<= 1e-10)")


def test_02_dilation_certificate():
    g = RngStream(102).generator()
    worst = np.zeros(3)
    for _ in range(1000):
        T = random_positive_contraction(int(g.integers(1, 17)), g)
        rep = verify_dilation(T, halmos_dilate(T))
        worst = np.maximum(worst, (rep.isometry_residual, rep.idempotence_residual, rep.compression_residual))
    ok = worst[0] <= 1e-12 and worst[1] <= 1e-10 and worst[2] <= 1e-10
    record(2, "Dilation certificate", ok,
           f"max ||W'W-I|| = {worst[0]:.1e}, ||P^2-P|| = {worst[1]:.1e}, ||W'PW-T|| = {worst[2]:.1e}")


def test_03_analytic_geometric_decay():
    spec = Deterministic(0.5 * np.eye(4))
    x = np.array([1.0, -2.0, 0.5, 3.0])
    x_sq = x @ x
    s = run_trials(spec, x, 20, 50, master_seed=103)
    exact = 4.0 ** -np.arange(21) * x_sq
    err = float(np.max(np.abs(s.mean_res_sq - exact)))
    err_oracle = float(np.max(np.abs(oracle_curve(spec, x, 20).exp_residual_sq - exact)))
    bound_ok = bool(np.all(s.mean_res_sq <= 0.75 ** np.arange(21) * x_sq)) and check_mean_square_bound(s, 0.25).passed
    record(3, "Analytic geometric decay", err <= 1e-12 and err_oracle <= 1e-12 and bound_ok,
           f"max |mean - 4^-n||x||^2| = {err:.1e}, oracle {err_oracle:.1e}; (3/4)^n bound holds: {bound_ok}")


def test_04_tight_bound_case():
    spec = FusionFrameProjection(([[1.0, 0.0]], [[0.0, 1.0]]), [0.5, 0.5])
    x = np.array([1.0, 1.0])
    x_sq = x @ x
    curve = oracle_curve(spec, x, 10)
    oracle_err = float(np.max(np.abs(curve.exp_residual_sq - 2.0 ** -np.arange(11) * x_sq)))
    s = run_trials(spec, x, 10, 10_000, master_seed=104)
    z = np.abs(s.mean_res_sq - curve.exp_residual_sq) - 4 * s.stderr_res_sq
    ok = oracle_err <= 1e-10 and bool(np.all(z <= 1e-12))
    record(4, "Tight-bound case C = 1/2", ok,
           f"oracle err {oracle_err:.1e} (<= 1e-10); max(|MC - oracle| - 4 se) = {z.max():.2e} (<= 0)")


def test_05_oracle_cross_validation():
    g = RngStream(105).generator()
    worst_res = worst_energy = 0.0
    for _ in range(20):
        spec = random_mixture(g, 3)
        x = g.standard_normal(3)
        curve = oracle_curve(spec, x, 6)
        for n in range(7):
            bf_res, bf_energy = brute_force_paths(spec, x, n)
            worst_res = max(worst_res, abs(curve.exp_residual_sq[n] - bf_res))
            worst_energy = max(worst_energy, abs(curve.exp_frame_energy[n] - bf_energy))
    record(5, "Oracle cross-validation", worst_res <= 1e-10 and worst_energy <= 1e-10,
           f"max |transfer - brute force|: residual {worst_res:.1e}, energy {worst_energy:.1e} (<= 1e-10)")


def test_06_per_path_parseval():
    g = RngStream(106).generator()
    d = 5
    specs = []
    for _ in range(5):
        subs = tuple([list(g.standard_normal(d)) for _ in range(int(g.integers(1, d)))] for _ in range(4))
        specs.append(FusionFrameProjection(subs, g.dirichlet(np.ones(4))))
        specs.append(KaczmarzRow(g.standard_normal((int(g.integers(d, 3 * d)), d))))
    worst, n_paths = 0.0, 0
    for si, spec in enumerate(specs):
        for i in range(100):
            x = g.standard_normal(d)
            p = run_path(spec, x, StoppingRule(max_steps=60), RngStream(106, si * 100 + i))
            worst = max(worst, parseval_defect(p) / (x @ x))
            n_paths += 1
    record(6, "Per-path Parseval", worst <= 1e-9 and n_paths == 1000,
           f"{n_paths} paths over {len(specs)} specs, max defect/||x0||^2 = {worst:.1e} (<= 1e-9)")


def test_07_frame_sandwich():
    g = RngStream(107).generator()
    margins = []
    count = 0
    while count < 20:
        spec = random_mixture(g, 3)
        C = coercivity_constant(spec)
        if C <= 0.05:
            continue
        x = g.standard_normal(3)
        x_sq = x @ x
        n = max(1, math.ceil(math.log(1e-8 / x_sq) / math.log1p(-C)))
        curve = oracle_curve(spec, x, n)
        eps = curve.exp_residual_sq[-1]
        assert eps <= 1e-8
        energy = curve.exp_frame_energy[-1]
        margins.append(min(energy - C * x_sq, x_sq - energy))
        count += 1
    worst = min(margins)
    record(7, "Frame sandwich", worst >= -1e-8, f"min margin over 20 specs = {worst:.2e} (>= -1e-8)")


def test_08_borel_cantelli_tail():
    spec = FusionFrameProjection(([[1.0, 0.0]], [[0.0, 1.0]]), [0.5, 0.5])
    x = np.array([1.0, 1.0])
    delta = 0.1 * np.linalg.norm(x)
    n_steps, n_trials = 20, 10_000
    s = run_trials(spec, x, n_steps, n_trials, master_seed=108)
    bc = borel_cantelli_diagnostic(s, delta, C=0.5)
    exact = exact_exceedance(spec, x, n_steps, delta)
    # binomial standard error at the exact probability
    se = np.sqrt(exact * (1 - exact) / n_trials)
    z = np.abs(bc.freq - exact) - 4 * se
    total = float(bc.partial_sums[-1])
    ok = total <= 200.0 and bc.bound == pytest.approx(200.0) and bool(np.all(z <= 1e-12))
    record(8, "Borel-Cantelli tail", ok,
           f"sum freq = {total:.4f} (<= 200); max(|freq - exact| - 4 se) = {z.max():.2e} (<= 0)")


def test_09_kaczmarz():
    sys_ = LinearSystem.gaussian(40, 10, RngStream(109))
    x0 = np.zeros(10)
    dev = max(error_process_equivalence(sys_, x0, 100, RngStream(109, s)) for s in range(10))
    C, coercive = rate(sys_)
    assert coercive
    n = math.ceil(math.log(1e-10) / math.log1p(-C))
    s = kaczmarz_trials(sys_, x0, n, 200, master_seed=109)
    ms = check_mean_square_bound(s, C)
    frac = float(np.mean(s.residual_norms[:, -1] <= 1e-4))
    ok = dev <= 1e-10 and ms.passed and frac >= 0.95
    record(9, "Kaczmarz", ok,
           f"(i) max deviation {dev:.1e} (<= 1e-10); (ii) bound margin {ms.margin:.2e} over {n} steps, "
           f"C = {C:.4f}; (iii) {frac:.1%} within 1e-4 (>= 95%)")


def test_10_coercivity_estimation():
    est, se = estimate_coercivity_mc(RandomSpectral(8, 0.0, 1.0), 50_000, RngStream(20261018))
    z = (est - 1 / 3) / se
    record(10, "Coercivity estimation", abs(est - 1 / 3) <= 4 * se,
           f"lam_min estimate {est:.5f} +- {se:.5f}, z = {z:.2f} (|z| <= 4)")


def test_11_negative_controls():
    P = np.diag([1.0, 0.0])
    spec = Deterministic(P)
    C = coercivity_constant(spec)
    s = run_trials(spec, np.array([1.0, 1.0]), 20, 10, master_seed=111)
    try:
        check_mean_square_bound(s, C)
        flagged = False
    except CoercivityError:
        flagged = True
    plateau = residual_plateau(s) and s.mean_res_sq[-1] == 1.0

    two = FusionFrameProjection(([[1.0, 0.0]], [[0.0, 1.0]]), [0.5, 0.5])
    s2 = run_trials(two, np.array([1.0, 1.0]), 10, 2000, master_seed=112)
    overstated_fails = not check_mean_square_bound(s2, 0.9).passed
    record(11, "Negative controls", C == 0.0 and flagged and plateau and overstated_fails,
           f"C = {C}, coercivity failure raised: {flagged}, plateau: {plateau}; overstated C = 0.9 fails: {overstated_fails}")


CONFIGS = {
    "convergence": {
        "kind": "convergence", "seed": 12, "x": "random-unit", "n_steps": 12, "n_trials": 400, "delta": 0.1,
        "sampler": {"kind": "discrete-mixture", "atoms": [
            {"T": [[0.9, 0.1], [0.1, 0.3]], "p": 0.6}, {"T": [[0.2, 0.0], [0.0, 0.8]], "p": 0.4}]},
    },
    "parseval": {
        "kind": "parseval", "seed": 13, "x": [1.0, 1.0], "n_steps": 15, "n_trials": 400,
        "sampler": {"kind": "fusion-frame", "subspaces": [{"basis": [[1, 0]], "w": 0.5}, {"basis": [[0, 1]], "w": 0.5}]},
    },
    "fusion": {
        "kind": "fusion", "seed": 14, "x": "random-unit", "n_steps": 10, "n_trials": 300,
        "sampler": {"kind": "fusion-frame", "subspaces": [
            {"basis": [[1, 0, 0]], "w": 0.3}, {"basis": [[0, 1, 0], [0, 0, 1]], "w": 0.3},
            {"basis": [[1, 1, 1]], "w": 0.4}]},
    },
    "kaczmarz": {"kind": "kaczmarz", "seed": 15, "matrix": [[1, 2], [3, -1], [0, 1]], "x_star": [0.5, -1.0], "n_trials": 60},
    "lemma2-sweep": {"kind": "lemma2-sweep", "seed": 16, "n_pairs": 300},
    "dilation-check": {"kind": "dilation-check", "seed": 17, "n_samples": 100},
    "coercivity": {"kind": "coercivity", "seed": 18, "n_samples": 2000,
                   "sampler": {"kind": "random-spectral", "dim": 3, "lo": 0.1, "hi": 0.9}},
}


def _snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_12_reproducibility(tmp_path):
    identical = True
    for name, config in CONFIGS.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(config))
        outs = []
        for run, workers in enumerate((1, 1, 3)):
            out = tmp_path / f"{name}-{run}"
            main(["--config", str(path), "--out", str(out), "--workers", str(workers)])
            outs.append(_snapshot(out))
        identical &= outs[0] == outs[1] == outs[2] and len(outs[0]) >= 2
    record(12, "Reproducibility", identical, f"{len(CONFIGS)} experiment kinds, reruns and 1 vs 3 workers byte-identical")
