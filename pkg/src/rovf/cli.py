"""Config-driven experiment runner.

Usage::

    rovf --config experiment.json --out results/ [--seed N] [--trials N] [--steps N] [--workers N] [--full-paths]

Every run writes ``verdict.json`` plus one or more CSV files into the output
directory. Exit status is 0 when every check passes, 1 when a check fails and
2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, oracle
from .dilation import halmos_dilate, verify_dilation
from .exceptions import CoercivityError, EnumerationBudgetError, InconsistentSystemError, InvalidSpecError
from .iteration import StoppingRule, run_path
from .kaczmarz import LinearSystem, error_process_equivalence, kaczmarz_trials, load_matrix, rate
from .linalg import lemma2_gap, random_positive_contraction, random_projection
from .samplers import (
    FusionFrameProjection,
    RandomSpectral,
    RngStream,
    coercivity_constant,
    estimate_coercivity_mc,
    fusion_frame_bounds,
    is_discrete,
    spec_from_json,
)

KINDS = ("lemma2-sweep", "dilation-check", "convergence", "parseval", "fusion", "kaczmarz", "coercivity")
SAMPLER_KINDS = ("convergence", "parseval", "fusion", "coercivity")
PATH_KINDS = ("convergence", "parseval", "fusion")
AUX_STREAM = 2**63  # reserved stream indices, disjoint from trial streams

# Claims checked by the verdict records.
A_LEMMA = "||Tx||^2 + ||x - Tx||^2 <= ||x||^2 for 0 <= T <= I, with equality for projections"
A_DILATION = "T = W*PW with W an isometric embedding and P a selfadjoint projection"
A_COERCIVE = "E||Psi x||^2 >= C||x||^2 with C > 0"
A_DECAY = "E||R_n x||^2 <= (1 - C)^n ||x||^2"
A_L2 = "E||x - sum_{k<=n} t_k||^2 -> 0"
A_FRAME = "C||x||^2 <= lim E sum_k ||t_k||^2 <= ||x||^2"
A_PARSEVAL = "projection-valued Psi: sum_k ||t_k||^2 + ||R_n x||^2 = ||x||^2 on every path"
A_BC = "P(||R_n x|| > delta) <= ||x||^2 (1-C)^n / delta^2, summable to ||x||^2 / (C delta^2)"
A_AS = "x = sum_k t_k almost surely; R_n x monotone along every path"
A_IDENTITY = "I = sum_k T_k in the strong operator topology"
A_EXP_PARSEVAL = "E[sum_k T_k* T_k] = I for fusion-frame projections"
A_FUSION_C = "coercivity constant equals the lower fusion frame bound A"
A_KACZMARZ = "randomized Kaczmarz error e_k = (I - P_i) e_{k-1} is the residual process"


class ConfigError(Exception):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    source: dict
    sampler: object = None
    x: object = None  # ndarray, "random-unit" or "basis-sweep"

    def get(self, key, default=None):
        return self.source.get(key, default)

    def to_json(self) -> str:
        return json.dumps(self.source, sort_keys=True, indent=2)


@dataclass
class Check:
    name: str
    anchor: str
    measured: float
    bound: float
    passed: bool
    margin: float | None = None

    def to_json(self) -> dict:
        margin = self.margin
        if margin is None:
            margin = self.bound - self.measured
        return {
            "name": self.name,
            "anchor": self.anchor,
            "measured": _num(self.measured),
            "bound": _num(self.bound),
            "margin": _num(margin),
            "pass": bool(self.passed),
        }


@dataclass
class VerdictDocument:
    kind: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kwargs) -> Check:
        c = Check(*args, **kwargs)
        self.checks.append(c)
        return c

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "seed": self.seed,
            "pass": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _positive_int(src, key, errors, required=False, minimum=1):
    if key not in src:
        if required:
            errors.append(f"'{key}' required")
        return
    v = src[key]
    if not _is_int(v) or v < minimum:
        errors.append(f"'{key}' must be an integer >= {minimum}")


def validate_config(raw_text: str) -> tuple[ExperimentConfig | None, list[str]]:
    """Parse and validate a JSON config, collecting every error found.

    Returns ``(config, [])`` on success and ``(None, errors)`` otherwise.
    """
    try:
        src = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        return None, [f"line {exc.lineno} column {exc.colno}: {exc.msg}"]
    if not isinstance(src, dict):
        return None, ["config must be a JSON object"]

    errors: list[str] = []
    kind = src.get("kind")
    if kind is None:
        errors.append("'kind' required")
    elif kind not in KINDS:
        errors.append(f"unknown kind '{kind}'; expected one of {', '.join(KINDS)}")
    if "seed" not in src:
        errors.append("seed required")
    elif not _is_int(src["seed"]) or not 0 <= src["seed"] < 2**63:
        errors.append("'seed' must be a non-negative integer below 2^63")
    _positive_int(src, "workers", errors)
    if "full_paths" in src and not isinstance(src["full_paths"], bool):
        errors.append("'full_paths' must be a boolean")
    if "out" in src and not isinstance(src["out"], str):
        errors.append("'out' must be a string")

    sampler = None
    if kind in SAMPLER_KINDS:
        if "sampler" not in src:
            errors.append("'sampler' required")
        else:
            try:
                sampler = spec_from_json(src["sampler"])
            except InvalidSpecError as exc:
                errors.append(f"sampler: {exc}")
    if sampler is not None and "dim" in src and src["dim"] != sampler.dim:
        errors.append(f"'dim' is {src['dim']} but the sampler acts on dimension {sampler.dim}")

    x = None
    if kind in PATH_KINDS:
        for key in ("n_steps", "n_trials"):
            _positive_int(src, key, errors, required=True)
        if "x" not in src:
            errors.append("'x' required (list of numbers, 'random-unit' or 'basis-sweep')")
        else:
            x = src["x"]
            if isinstance(x, str):
                if x not in ("random-unit", "basis-sweep"):
                    errors.append(f"unknown x mode '{x}'")
                elif x == "basis-sweep" and kind == "parseval":
                    errors.append("'basis-sweep' is not available for parseval")
            elif isinstance(x, list) and x and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
                x = np.array(x, dtype=float)
                if not np.all(np.isfinite(x)):
                    errors.append("'x' has non-finite entries")
                elif sampler is not None and len(x) != sampler.dim:
                    errors.append(f"'x' has {len(x)} entries but the sampler acts on dimension {sampler.dim}")
            else:
                errors.append("'x' must be a non-empty list of numbers, 'random-unit' or 'basis-sweep'")
        if "delta" in src and not (isinstance(src["delta"], (int, float)) and src["delta"] > 0):
            errors.append("'delta' must be a positive number (fraction of ||x||)")
    if kind == "parseval" and sampler is not None and not sampler.all_projections:
        errors.append("parseval needs a projection-valued sampler")
    if kind == "fusion" and sampler is not None and not isinstance(sampler, FusionFrameProjection):
        errors.append("fusion needs a 'fusion-frame' sampler")
    if kind in ("lemma2-sweep", "dilation-check"):
        _positive_int(src, "n_pairs" if kind == "lemma2-sweep" else "n_samples", errors)
        dims = src.get("dims", [1, 16])
        if not (isinstance(dims, list) and len(dims) == 2 and all(_is_int(v) for v in dims) and 1 <= dims[0] <= dims[1] <= 64):
            errors.append("'dims' must be [lo, hi] with 1 <= lo <= hi <= 64")
    if kind == "coercivity":
        _positive_int(src, "n_samples", errors, required=True, minimum=100)
    if kind == "kaczmarz":
        errors.extend(_validate_kaczmarz(src))

    if errors:
        return None, errors
    return ExperimentConfig(kind, src["seed"], src, sampler, x), []


def _validate_kaczmarz(src) -> list[str]:
    errors = []
    m = src.get("matrix")
    if m is None:
        errors.append("'matrix' required (Matrix Market path or inline rows)")
    elif not isinstance(m, (str, list)):
        errors.append("'matrix' must be a file path or a list of rows")
    if "b" not in src and "x_star" not in src:
        errors.append("one of 'b' or 'x_star' required")
    for key in ("steps", "n_trials", "equivalence_seeds", "equivalence_steps"):
        _positive_int(src, key, errors)
    if "n_trials" not in src:
        errors.append("'n_trials' required")
    return errors


def _resolve_x(cfg: ExperimentConfig, d: int) -> np.ndarray:
    if isinstance(cfg.x, np.ndarray):
        return cfg.x
    g = RngStream(cfg.seed, AUX_STREAM).generator()
    v = g.standard_normal(d)
    return v / np.linalg.norm(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, workers: int = 1, full_paths: bool = False) -> tuple[VerdictDocument, dict]:
    """Run one experiment; returns the verdict and a ``{filename: text}`` map of data files."""
    verdict = VerdictDocument(cfg.kind, cfg.seed)
    files: dict[str, str] = {}
    runner = {
        "lemma2-sweep": _lemma2_sweep,
        "dilation-check": _dilation_check,
        "convergence": _convergence,
        "parseval": _parseval,
        "fusion": _fusion,
        "kaczmarz": _kaczmarz,
        "coercivity": _coercivity,
    }[cfg.kind]
    runner(cfg, verdict, files, workers=workers, full_paths=full_paths)
    files["verdict.json"] = verdict.to_json()
    return verdict, files


def _lemma2_sweep(cfg, verdict, files, **_):
    n = cfg.get("n_pairs", 10_000)
    lo, hi = cfg.get("dims", [1, 16])
    frac = float(cfg.get("projection_fraction", 0.2))
    g = RngStream(cfg.seed, 0).generator()
    rows, contraction_gaps, projection_gaps = [], [], []
    for i in range(n):
        d = int(g.integers(lo, hi + 1))
        is_proj = bool(g.random() < frac)
        T = random_projection(d, int(g.integers(1, d + 1)), g) if is_proj else random_positive_contraction(d, g)
        x = g.standard_normal(d)
        rel = lemma2_gap(T, x) / float(x @ x)
        (projection_gaps if is_proj else contraction_gaps).append(rel)
        rows.append((i, d, int(is_proj), rel))
    files["lemma2.csv"] = _csv(["index", "dim", "projection", "gap_rel"], rows)
    all_gaps = contraction_gaps + projection_gaps
    worst = min(all_gaps)
    verdict.add("lemma_gap_nonnegative", A_LEMMA, worst, -1e-9, worst >= -1e-9, margin=worst + 1e-9)
    if projection_gaps:
        eq = max(abs(v) for v in projection_gaps)
        verdict.add("lemma_equality_projections", A_LEMMA, eq, 1e-10, eq <= 1e-10)


def _dilation_check(cfg, verdict, files, **_):
    n = cfg.get("n_samples", 1000)
    lo, hi = cfg.get("dims", [1, 16])
    g = RngStream(cfg.seed, 0).generator()
    rows = []
    worst = np.zeros(4)
    for i in range(n):
        d = int(g.integers(lo, hi + 1))
        T = random_positive_contraction(d, g)
        D = halmos_dilate(T)
        rep = verify_dilation(T, D)
        x = g.standard_normal(d)
        a, b, xx = D.certificate(x)
        cert = abs(a + b - xx) / xx
        vals = (rep.isometry_residual, rep.idempotence_residual, rep.compression_residual, cert)
        worst = np.maximum(worst, vals)
        rows.append((i, d) + vals)
    files["dilation.csv"] = _csv(
        ["index", "dim", "isometry_residual", "idempotence_residual", "compression_residual", "certificate_rel"], rows
    )
    for name, val, tol in zip(
        ("isometry", "idempotence", "compression", "norm_split"), worst, (1e-12, 1e-10, 1e-10, 1e-10)
    ):
        verdict.add(f"dilation_{name}", A_DILATION, val, tol, val <= tol)


def _coercivity_for(cfg, spec) -> float:
    if is_discrete(spec):
        return coercivity_constant(spec)
    est, se = estimate_coercivity_mc(spec, 20_000, RngStream(cfg.seed, AUX_STREAM + 1))
    return max(est - analysis.BAND * se, 0.0)


def _coercivity_gate(verdict, C) -> bool:
    verdict.add("coercivity_positive", A_COERCIVE, C, 0.0, C > 0.0, margin=C)
    return C > 0.0


def _paths_json(cfg, spec, x, n_steps, n_trials) -> str:
    out = []
    for i in range(n_trials):
        p = run_path(spec, x, StoppingRule(max_steps=n_steps), RngStream(cfg.seed, i))
        out.append(p.to_json(full=True))
    return json.dumps(out, sort_keys=True) + "\n"


def _resolution(summary) -> float:
    """Largest shift of a mean of ``[0, ||x||^2]``-valued samples caused by one trial.

    Keeps oracle comparisons honest when every trial agrees and the stderr is 0.
    """
    return summary.x_sq / summary.n_trials


def _mc_checks(verdict, summary, C, delta_abs, curve):
    x_sq = summary.x_sq
    res = _resolution(summary)
    verdict.add("path_invariants", A_AS, summary.violation_count, 0, summary.violation_count == 0)
    ms = analysis.check_mean_square_bound(summary, C)
    verdict.add("mean_square_bound", A_DECAY, float(np.max(ms.mean - ms.bound - analysis.BAND * ms.stderr)), 0.0,
                ms.passed, margin=ms.margin)
    last = summary.mean_res_sq[-1]
    bound_last = (1.0 - C) ** summary.n_steps * x_sq
    tol_last = bound_last + analysis.BAND * summary.stderr_res_sq[-1] + 1e-12 * x_sq
    verdict.add("mean_square_decay", A_L2, last, tol_last, last <= tol_last)
    fb = analysis.check_frame_bounds(summary, C)
    verdict.add("frame_bounds_mc", A_FRAME, fb.energy, fb.upper, fb.passed,
                margin=min(fb.lower_margin, fb.upper_margin) + fb.slack)
    bc = analysis.borel_cantelli_diagnostic(summary, delta_abs, C)
    verdict.add("borel_cantelli_sum", A_BC, float(bc.partial_sums[-1]), bc.bound, bc.passed,
                margin=bc.bound + analysis.BAND * bc.sum_stderr - float(bc.partial_sums[-1]))
    if curve is not None:
        dev = np.abs(summary.mean_res_sq - curve.exp_residual_sq) - analysis.BAND * summary.stderr_res_sq
        worst = float(np.max(dev))
        verdict.add("mc_matches_oracle_residual", A_DECAY, worst, res, worst <= res)
        dev = np.abs(summary.mean_energy - curve.exp_frame_energy) - analysis.BAND * summary.stderr_energy
        worst = float(np.max(dev))
        verdict.add("mc_matches_oracle_energy", A_FRAME, worst, res, worst <= res)
        ofb = analysis.check_frame_bounds(curve, C)
        verdict.add("frame_bounds_oracle", A_FRAME, ofb.energy, ofb.upper, ofb.passed,
                    margin=min(ofb.lower_margin, ofb.upper_margin) + ofb.slack)
        try:
            exact = oracle.exact_exceedance(summary.spec, summary.x, summary.n_steps, delta_abs)
        except EnumerationBudgetError:
            return
        dev = np.abs(bc.freq - exact) - analysis.BAND * bc.freq_stderr
        worst = float(np.max(dev))
        tol = 1.0 / summary.n_trials
        verdict.add("exceedance_matches_exact", A_BC, worst, tol, worst <= tol)


def _convergence(cfg, verdict, files, workers=1, full_paths=False):
    spec = cfg.sampler
    n_steps, n_trials = cfg.get("n_steps"), cfg.get("n_trials")
    C = _coercivity_for(cfg, spec)
    if isinstance(cfg.x, str) and cfg.x == "basis-sweep":
        if not _coercivity_gate(verdict, C):
            return
        if not is_discrete(spec):
            raise ConfigError(["'basis-sweep' needs a discrete sampler"])
        rep = analysis.verify_operator_identity(spec, n_steps, n_trials, cfg.seed, workers=workers)
        files["basis_sweep.csv"] = _csv(
            ["basis_index", "mean_error_sq", "stderr", "bound"],
            [(j, m, s, rep.bound) for j, (m, s) in enumerate(zip(rep.mean_error, rep.stderr))],
        )
        verdict.add("operator_identity_basis", A_IDENTITY, rep.max_error, rep.bound, rep.passed)
        return
    x = _resolve_x(cfg, spec.dim)
    summary = analysis.run_trials(spec, x, n_steps, n_trials, cfg.seed, workers=workers)
    curve = oracle.oracle_curve(spec, x, n_steps) if is_discrete(spec) else None
    delta_abs = float(cfg.get("delta", 0.1)) * float(np.linalg.norm(x))
    files["curve.csv"] = summary.to_csv(C=C, delta=delta_abs, oracle=curve)
    if full_paths:
        files["paths.json"] = _paths_json(cfg, spec, x, n_steps, n_trials)
    if not _coercivity_gate(verdict, C):
        # non-convergence is the expected outcome here; the failed gate above fails the run
        plateau = analysis.residual_plateau(summary)
        verdict.add("residual_plateau_detected", A_COERCIVE, float(summary.mean_res_sq[-1]), 0.0, plateau)
        return
    _mc_checks(verdict, summary, C, delta_abs, curve)


def _parseval(cfg, verdict, files, workers=1, full_paths=False):
    spec = cfg.sampler
    n_steps, n_trials = cfg.get("n_steps"), cfg.get("n_trials")
    x = _resolve_x(cfg, spec.dim)
    summary = analysis.run_trials(spec, x, n_steps, n_trials, cfg.seed, workers=workers)
    x_sq = summary.x_sq
    rows = [
        (i, float(summary.energies[i, -1]), float(summary.residual_norms[i, -1] ** 2), float(summary.parseval_defects[i]))
        for i in range(n_trials)
    ]
    files["parseval.csv"] = _csv(["trial", "frame_energy", "final_res_sq", "parseval_defect"], rows)
    if full_paths:
        files["paths.json"] = _paths_json(cfg, spec, x, n_steps, n_trials)
    worst = float(np.max(summary.parseval_defects)) / x_sq if x_sq > 0 else 0.0
    verdict.add("per_path_parseval", A_PARSEVAL, worst, 1e-9, worst <= 1e-9)
    verdict.add("path_invariants", A_AS, summary.violation_count, 0, summary.violation_count == 0)
    curve = oracle.oracle_curve(spec, x, n_steps)
    gap = abs(float(curve.exp_frame_energy[-1] + curve.exp_residual_sq[-1]) - x_sq)
    verdict.add("oracle_parseval_finite_n", A_PARSEVAL, gap, 1e-10 * max(x_sq, 1.0), gap <= 1e-10 * max(x_sq, 1.0))
    dev = float(abs(summary.mean_energy[-1] - curve.exp_frame_energy[-1]) - analysis.BAND * summary.stderr_energy[-1])
    verdict.add("mc_energy_matches_oracle", A_FRAME, dev, _resolution(summary), dev <= _resolution(summary))


def _fusion(cfg, verdict, files, workers=1, full_paths=False):
    spec = cfg.sampler
    A, B = fusion_frame_bounds(spec)
    C = coercivity_constant(spec)
    files["fusion_bounds.csv"] = _csv(["A", "B", "C"], [(A, B, C)])
    verdict.add("fusion_lower_bound_is_C", A_FUSION_C, abs(C - max(A, 0.0)), 1e-12, abs(C - max(A, 0.0)) <= 1e-12)
    if not _coercivity_gate(verdict, C):
        return
    tmap = oracle.TransferMap.from_spec(spec)
    S = np.eye(spec.dim)
    n_exp = 0
    while np.linalg.eigvalsh(S)[-1] > 1e-7 and n_exp < 100_000:
        S = tmap(S)
        n_exp += 1
    gap = analysis.expected_parseval_gap(spec, n_exp)
    verdict.add("expected_parseval_identity", A_EXP_PARSEVAL, gap, 1e-6, gap <= 1e-6)
    if isinstance(cfg.x, str) and cfg.x == "basis-sweep":
        rep = analysis.verify_operator_identity(spec, cfg.get("n_steps"), cfg.get("n_trials"), cfg.seed, workers=workers)
        verdict.add("operator_identity_basis", A_IDENTITY, rep.max_error, rep.bound, rep.passed)
        return
    n_steps, n_trials = cfg.get("n_steps"), cfg.get("n_trials")
    x = _resolve_x(cfg, spec.dim)
    summary = analysis.run_trials(spec, x, n_steps, n_trials, cfg.seed, workers=workers)
    curve = oracle.oracle_curve(spec, x, n_steps)
    delta_abs = float(cfg.get("delta", 0.1)) * float(np.linalg.norm(x))
    files["curve.csv"] = summary.to_csv(C=C, delta=delta_abs, oracle=curve)
    files["oracle.csv"] = curve.to_csv()
    if full_paths:
        files["paths.json"] = _paths_json(cfg, spec, x, n_steps, n_trials)
    worst = float(np.max(summary.parseval_defects)) / summary.x_sq
    verdict.add("per_path_parseval", A_PARSEVAL, worst, 1e-9, worst <= 1e-9)
    _mc_checks(verdict, summary, C, delta_abs, curve)


def _kaczmarz(cfg, verdict, files, **_):
    A = load_matrix(cfg.get("matrix"))
    x_star = cfg.get("x_star")
    b = cfg.get("b")
    if b is None:
        b = A @ np.asarray(x_star, dtype=float)
    try:
        sys_ = LinearSystem(A, b, x_star)
        x_star = sys_.solution()
    except (InconsistentSystemError, ValueError) as exc:
        raise ConfigError([f"linear system: {exc}"]) from exc
    if sys_.x_star is None:
        sys_ = LinearSystem(A, b, x_star)
    uniform = bool(cfg.get("uniform", False))
    C, coercive = rate(sys_, uniform=uniform)
    if not _coercivity_gate(verdict, C if coercive else 0.0):
        return
    steps = cfg.get("steps") or int(math.ceil(math.log(1e-10) / math.log1p(-C)))
    x0 = np.asarray(cfg.get("x0", np.zeros(sys_.dim)), dtype=float)

    eq_seeds = cfg.get("equivalence_seeds", 10)
    eq_steps = cfg.get("equivalence_steps", 100)
    dev = max(error_process_equivalence(sys_, x0, eq_steps, RngStream(cfg.seed, AUX_STREAM + s)) for s in range(eq_seeds))
    e0 = float(np.linalg.norm(x0 - x_star))
    verdict.add("error_process_equivalence", A_KACZMARZ, dev, 1e-10 * e0, dev <= 1e-10 * e0)

    summary = kaczmarz_trials(sys_, x0, steps, cfg.get("n_trials"), cfg.seed, uniform=uniform)
    files["kaczmarz.csv"] = summary.to_csv(C=C)
    ms = analysis.check_mean_square_bound(summary, C)
    verdict.add("mean_square_bound", A_DECAY, float(np.max(ms.mean - ms.bound - analysis.BAND * ms.stderr)), 0.0,
                ms.passed, margin=ms.margin)
    verdict.add("monotone_error", A_AS, summary.violation_count, 0, summary.violation_count == 0)
    worst = float(np.max(summary.parseval_defects)) / (e0 * e0) if e0 > 0 else 0.0
    verdict.add("per_path_parseval", A_PARSEVAL, worst, 1e-9, worst <= 1e-9)
    frac = float(np.mean(summary.residual_norms[:, -1] <= 1e-4))
    verdict.add("final_accuracy_fraction", A_L2, frac, 0.95, frac >= 0.95, margin=frac - 0.95)


def _coercivity(cfg, verdict, files, **_):
    spec = cfg.sampler
    est, se = estimate_coercivity_mc(spec, cfg.get("n_samples"), RngStream(cfg.seed, 0))
    if isinstance(spec, RandomSpectral):
        ref = spec.analytic_coercivity
    else:
        ref = coercivity_constant(spec)
    files["coercivity.csv"] = _csv(["estimate", "stderr", "reference"], [(est, se, ref)])
    tol = analysis.BAND * se + 1e-12
    verdict.add("coercivity_estimate", A_COERCIVE, abs(est - ref), tol, abs(est - ref) <= tol)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rovf", description="Run a random operator-valued frame experiment.")
    p.add_argument("--config", required=True, type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, help="output directory (overrides config 'out')")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--trials", type=int, help="number of trials (overrides config)")
    p.add_argument("--steps", type=int, help="number of steps (overrides config)")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--full-paths", action="store_true", help="also write every path's vectors to paths.json")
    return p


def _apply_overrides(raw: str, args) -> str:
    src = json.loads(raw)
    if not isinstance(src, dict):
        return raw
    src = copy.deepcopy(src)
    if args.seed is not None:
        src["seed"] = args.seed
    if args.trials is not None:
        src["n_trials"] = args.trials
    if args.steps is not None:
        src["steps" if src.get("kind") == "kaczmarz" else "n_steps"] = args.steps
    if args.workers is not None:
        src["workers"] = args.workers
    if args.full_paths:
        src["full_paths"] = True
    return json.dumps(src)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        raw = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        raw = _apply_overrides(raw, args)
    except json.JSONDecodeError:
        pass  # reported with position by validate_config
    cfg, errors = validate_config(raw)
    if errors:
        for e in errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    out = args.out or (Path(cfg.get("out")) if cfg.get("out") else None)
    if out is None:
        print("config error: output directory required (--out or 'out')", file=sys.stderr)
        return 2
    try:
        verdict, files = run_experiment(cfg, workers=cfg.get("workers", 1), full_paths=cfg.get("full_paths", False))
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except CoercivityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    for c in verdict.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: measured={c.measured:.6g} bound={c.bound:.6g}")
    print("overall:", "PASS" if verdict.passed else "FAIL")
    return 0 if verdict.passed else 1


if __name__ == "__main__":
    sys.exit(main())
