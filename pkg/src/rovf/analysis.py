"""Monte Carlo verification of the convergence and frame-bound claims.

Trials are independent paths driven by ``RngStream(master_seed, trial)``.
Per-trial results are stacked in trial order before any reduction, so the
summary is bitwise identical for any number of workers.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import CoercivityError
from .iteration import StoppingRule, run_path
from .linalg import as_vector
from .oracle import OracleCurve, expected_frame_operator
from .samplers import RngStream, SamplerSpec, coercivity_constant, is_discrete

BAND = 4.0  # stderr multiplier for every Monte Carlo acceptance band
ROUND_RTOL = 1e-12


def _stderr(a: np.ndarray) -> np.ndarray:
    """Standard error of the mean along axis 0 (equal to the delete-one jackknife)."""
    n = a.shape[0]
    if n < 2:
        return np.zeros(a.shape[1:])
    return a.std(axis=0, ddof=1) / np.sqrt(n)


def require_coercive(C: float) -> None:
    if not C > 0.0:
        raise CoercivityError(f"coercivity assumption unmet: C = {C:g} must be positive")
    if C > 1.0 + 1e-9:
        raise CoercivityError(f"coercivity constant {C:g} exceeds 1")


@dataclass(frozen=True, eq=False)
class TrialSummary:
    spec: SamplerSpec
    x: np.ndarray
    residual_norms: np.ndarray  # (n_trials, n_steps + 1)
    energies: np.ndarray  # (n_trials, n_steps + 1), cumulative frame energy
    parseval_defects: np.ndarray  # (n_trials,)
    violation_count: int
    master_seed: int

    @property
    def n_trials(self) -> int:
        return self.residual_norms.shape[0]

    @property
    def n_steps(self) -> int:
        return self.residual_norms.shape[1] - 1

    @property
    def x_sq(self) -> float:
        return float(self.x @ self.x)

    @property
    def mean_res_sq(self) -> np.ndarray:
        return np.mean(self.residual_norms**2, axis=0)

    @property
    def stderr_res_sq(self) -> np.ndarray:
        return _stderr(self.residual_norms**2)

    @property
    def mean_energy(self) -> np.ndarray:
        return np.mean(self.energies, axis=0)

    @property
    def stderr_energy(self) -> np.ndarray:
        return _stderr(self.energies)

    def exceedances(self, delta: float) -> np.ndarray:
        return self.residual_norms > delta

    def exceed_freq(self, delta: float) -> np.ndarray:
        return np.mean(self.exceedances(delta), axis=0)

    def to_csv(self, C: float | None = None, delta: float | None = None, oracle: OracleCurve | None = None) -> str:
        steps = np.arange(self.n_steps + 1)
        bound = (1.0 - C) ** steps * self.x_sq if C is not None else None
        freq = self.exceed_freq(delta) if delta is not None else None
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["step", "mean_res_sq", "stderr", "bound", "mean_energy", "exceed_freq"]
        if oracle is not None:
            header += ["oracle_res_sq", "oracle_energy"]
        w.writerow(header)
        mean, se, energy = self.mean_res_sq, self.stderr_res_sq, self.mean_energy
        for k in steps:
            row = [
                int(k),
                repr(float(mean[k])),
                repr(float(se[k])),
                "" if bound is None else repr(float(bound[k])),
                repr(float(energy[k])),
                "" if freq is None else repr(float(freq[k])),
            ]
            if oracle is not None:
                row += [repr(float(oracle.exp_residual_sq[k])), repr(float(oracle.exp_frame_energy[k]))]
            w.writerow(row)
        return buf.getvalue()


def _trial(spec, x, n_steps: int, seed: int, stream: int):
    path = run_path(spec, x, StoppingRule(max_steps=n_steps, residual_tol=0.0), RngStream(seed, stream))
    res = np.zeros(n_steps + 1)
    energy = np.zeros(n_steps + 1)
    n = path.step_count
    res[: n + 1] = path.residual_norms
    res[n + 1 :] = path.residual_norms[-1]  # stopped at r = 0; later terms vanish
    energy[1 : n + 1] = np.cumsum(path.term_norms**2)
    energy[n + 1 :] = energy[n]
    defect = abs(energy[n] + res[n] ** 2 - float(x @ x))
    return res, energy, defect, len(path.violations)


def _trial_chunk(args):
    spec, x, n_steps, seed, streams = args
    return [_trial(spec, x, n_steps, seed, s) for s in streams]


def run_trials(
    spec: SamplerSpec,
    x,
    n_steps: int,
    n_trials: int,
    master_seed: int,
    workers: int = 1,
    stream_offset: int = 0,
) -> TrialSummary:
    """Run ``n_trials`` independent paths of ``n_steps`` steps from ``x``.

    Trial ``i`` uses ``RngStream(master_seed, stream_offset + i)``.
    """
    if n_trials < 1 or n_steps < 1:
        raise ValueError("n_trials and n_steps must be >= 1")
    x = as_vector(x)
    streams = list(range(stream_offset, stream_offset + n_trials))
    if workers <= 1:
        results = _trial_chunk((spec, x, n_steps, master_seed, streams))
    else:
        chunks = [streams[i::workers] for i in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_trial_chunk, [(spec, x, n_steps, master_seed, c) for c in chunks]))
        by_stream = {}
        for c, part in zip(chunks, parts):
            by_stream.update(zip(c, part))
        results = [by_stream[s] for s in streams]
    res, energy, defects, viol = zip(*results)
    return TrialSummary(
        spec=spec,
        x=x,
        residual_norms=np.array(res),
        energies=np.array(energy),
        parseval_defects=np.array(defects),
        violation_count=int(sum(viol)),
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class MeanSquareCheck:
    mean: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray
    step_pass: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.step_pass))

    @property
    def margin(self) -> float:
        return float(np.min(self.bound + BAND * self.stderr - self.mean))


def check_mean_square_bound(summary: TrialSummary, C: float) -> MeanSquareCheck:
    """Step ``n`` passes iff ``mean ||r_n||^2 <= (1-C)^n ||x||^2 + 4 stderr``."""
    require_coercive(C)
    steps = np.arange(summary.n_steps + 1)
    bound = (1.0 - C) ** steps * summary.x_sq
    mean, se = summary.mean_res_sq, summary.stderr_res_sq
    ok = mean <= bound + BAND * se + ROUND_RTOL * summary.x_sq
    return MeanSquareCheck(mean, se, bound, ok)


@dataclass(frozen=True)
class FrameBoundCheck:
    energy: float
    lower: float
    upper: float
    slack: float

    @property
    def lower_margin(self) -> float:
        return self.energy - self.lower

    @property
    def upper_margin(self) -> float:
        return self.upper - self.energy

    @property
    def passed(self) -> bool:
        return self.lower_margin >= -self.slack and self.upper_margin >= -self.slack


def check_frame_bounds(source: TrialSummary | OracleCurve, C: float, step: int | None = None) -> FrameBoundCheck:
    """Check ``C ||x||^2 <= E sum_{k<=n} ||t_k||^2 <= ||x||^2`` at ``step`` (default: last).

    Monte Carlo sources use a slack of 4 stderr; oracle curves use
    ``1e-9 + E||r_n||^2`` since the energy only reaches its limit as the
    residual vanishes.
    """
    require_coercive(C)
    x_sq = float(source.x @ source.x)
    if isinstance(source, TrialSummary):
        n = source.n_steps if step is None else step
        energy = float(source.mean_energy[n])
        slack = BAND * float(source.stderr_energy[n]) + ROUND_RTOL * x_sq
    else:
        n = len(source.exp_residual_sq) - 1 if step is None else step
        energy = float(source.exp_frame_energy[n])
        slack = 1e-9 + float(source.exp_residual_sq[n])
    return FrameBoundCheck(energy, C * x_sq, x_sq, slack)


@dataclass(frozen=True)
class BorelCantelliReport:
    freq: np.ndarray  # empirical P(||r_n|| > delta), n = 0..N
    freq_stderr: np.ndarray
    partial_sums: np.ndarray
    sum_stderr: float
    bound: float  # ||x||^2 / (C delta^2)

    @property
    def passed(self) -> bool:
        return float(self.partial_sums[-1]) <= self.bound + BAND * self.sum_stderr


def borel_cantelli_diagnostic(summary: TrialSummary, delta: float, C: float | None = None) -> BorelCantelliReport:
    """Partial sums of exceedance frequencies against the Chebyshev tail bound ``||x||^2 / (C delta^2)``.

    ``C`` defaults to the exact coercivity constant of a discrete sampler.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if C is None:
        C = coercivity_constant(summary.spec)
    require_coercive(C)
    ex = summary.exceedances(delta).astype(float)
    counts = ex.sum(axis=1)  # exceedances per trial; its mean is the partial sum
    return BorelCantelliReport(
        freq=ex.mean(axis=0),
        freq_stderr=_stderr(ex),
        partial_sums=np.cumsum(ex.mean(axis=0)),
        sum_stderr=float(_stderr(counts[:, None])[0]),
        bound=summary.x_sq / (C * delta * delta),
    )


def residual_plateau(summary: TrialSummary, window: int = 5, rtol: float = 1e-9) -> bool:
    """True when the mean squared residual has stopped decreasing while still non-zero.

    This is how a non-coercive sampler shows up: e.g. a fixed proper projection
    ``P`` leaves ``||(I - P)x||^2`` untouched after the first step.
    """
    tail = summary.mean_res_sq[-(window + 1) :]
    scale = rtol * summary.x_sq
    return bool(tail[-1] > scale and np.max(tail) - np.min(tail) <= scale)


@dataclass(frozen=True)
class OperatorIdentityReport:
    mean_error: np.ndarray  # per basis vector, mean ||e_j - sum t_k||^2
    stderr: np.ndarray
    bound: float  # (1 - C)^n

    @property
    def passed(self) -> bool:
        return bool(np.all(self.mean_error <= self.bound + BAND * self.stderr + ROUND_RTOL))

    @property
    def max_error(self) -> float:
        return float(np.max(self.mean_error))


def verify_operator_identity(
    spec: SamplerSpec, n_steps: int, n_trials: int, seed: int, workers: int = 1
) -> OperatorIdentityReport:
    """Sweep the canonical basis and measure how far ``sum_k t_k`` is from the identity."""
    C = coercivity_constant(spec)
    require_coercive(C)
    d = spec.dim
    if d > 64:
        raise ValueError("basis sweep limited to d <= 64")
    means, ses = [], []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        s = run_trials(spec, e, n_steps, n_trials, seed, workers=workers, stream_offset=j * n_trials)
        means.append(s.mean_res_sq[-1])
        ses.append(s.stderr_res_sq[-1])
    return OperatorIdentityReport(np.array(means), np.array(ses), (1.0 - C) ** n_steps)


def expected_parseval_gap(spec: SamplerSpec, n: int) -> float:
    """``|| E[sum_{k<=n} T_k^T T_k] - I ||_F`` computed exactly."""
    if not is_discrete(spec):
        raise TypeError("exact expectation needs a discrete sampler")
    F = expected_frame_operator(spec, n)
    return float(np.linalg.norm(F - np.eye(spec.dim)))
