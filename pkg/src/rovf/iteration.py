"""One realized trajectory of the randomized reconstruction scheme.

Starting from ``r_0 = x`` each step draws ``Psi_k`` and sets

    t_k = Psi_k r_{k-1},    r_k = r_{k-1} - t_k,

so that ``x = t_1 + ... + t_n + r_n`` exactly and ``r_n = (I - Psi_n) ... (I - Psi_1) x``.
Only operator-vector products are formed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_vector
from .samplers import RngStream, SamplerSpec, as_generator, sample

TELESCOPE_RTOL = 1e-12
MONOTONE_RTOL = 1e-12
ENERGY_RTOL = 1e-9
DEFAULT_TERM_CAP = 10_000


@dataclass(frozen=True)
class StoppingRule:
    """Stop after ``max_steps`` steps or once ``||r_k|| <= residual_tol * ||x0||``.

    ``max_steps`` is always finite so a non-coercive sampler cannot loop forever.
    """

    max_steps: int = DEFAULT_TERM_CAP
    residual_tol: float = 0.0

    def __post_init__(self):
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError("max_steps must be an integer >= 1")
        if not (self.residual_tol >= 0.0 and np.isfinite(self.residual_tol)):
            raise ValueError("residual_tol must be finite and >= 0")


@dataclass(frozen=True, eq=False)
class IterationPath:
    x0: np.ndarray
    terms: np.ndarray  # (stored, d); stored == min(step_count, term_cap)
    residuals: np.ndarray  # (stored + 1, d) starting at r_0
    term_norms: np.ndarray  # (n,)
    residual_norms: np.ndarray  # (n + 1,) starting at ||r_0||
    final_residual: np.ndarray
    seed: int
    stream: int
    violations: tuple = field(default=())

    @property
    def step_count(self) -> int:
        return len(self.term_norms)

    def to_json(self, full: bool = False) -> dict:
        out = {
            "seed": self.seed,
            "stream": self.stream,
            "step_count": self.step_count,
            "x0": self.x0.tolist(),
            "term_norms": self.term_norms.tolist(),
            "residual_norms": self.residual_norms.tolist(),
            "final_residual": self.final_residual.tolist(),
        }
        if full:
            out["terms"] = self.terms.tolist()
        return out


def run_path(
    spec: SamplerSpec,
    x,
    stop: StoppingRule,
    rng: RngStream,
    term_cap: int = DEFAULT_TERM_CAP,
) -> IterationPath:
    """Run the scheme from ``x`` until ``stop`` triggers.

    Term and residual vectors are kept for the first ``term_cap`` steps; norms
    are kept for all steps. Each step is checked against the telescoping,
    monotonicity and per-step energy certificates; failures are recorded in
    ``violations`` rather than raised.
    """
    x = as_vector(x)
    if x.shape[0] != spec.dim:
        raise ValueError(f"vector of dim {x.shape[0]} for sampler of dim {spec.dim}")
    gen = as_generator(rng)
    seed, stream = (rng.seed, rng.stream) if isinstance(rng, RngStream) else (-1, -1)

    x_norm = float(np.linalg.norm(x))
    x_sq = x_norm * x_norm
    d = x.shape[0]
    terms, residuals = [], [x.copy()]
    term_norms, res_norms = [], [x_norm]
    violations = []
    r = x.copy()
    r_sq = x_sq
    total = np.zeros(d)

    if x_norm > 0.0:
        stop_at = stop.residual_tol * x_norm
        for k in range(1, stop.max_steps + 1):
            Psi = sample(spec, gen)
            t = Psi @ r
            r_new = r - t
            t_sq = float(t @ t)
            rn_sq = float(r_new @ r_new)
            rn = np.sqrt(rn_sq)
            if rn > np.sqrt(r_sq) + MONOTONE_RTOL * x_norm:
                violations.append(f"step {k}: residual norm increased")
            if t_sq + rn_sq > r_sq + ENERGY_RTOL * x_sq:
                violations.append(f"step {k}: energy certificate failed")
            total += t
            if k <= term_cap:
                terms.append(t)
                residuals.append(r_new)
            term_norms.append(np.sqrt(t_sq))
            res_norms.append(rn)
            r, r_sq = r_new, rn_sq
            if rn <= stop_at:
                break

    tele = float(np.linalg.norm(x - total - r))
    if tele > TELESCOPE_RTOL * max(x_norm, np.finfo(float).tiny):
        violations.append(f"telescoping residual {tele:.3e}")

    return IterationPath(
        x0=x,
        terms=np.array(terms).reshape(-1, d),
        residuals=np.array(residuals).reshape(-1, d),
        term_norms=np.array(term_norms),
        residual_norms=np.array(res_norms),
        final_residual=r,
        seed=seed,
        stream=stream,
        violations=tuple(violations),
    )


def frame_energy(path: IterationPath) -> float:
    """``sum_k ||t_k||^2`` over the realized path."""
    return float(np.sum(path.term_norms**2))


def parseval_defect(path: IterationPath, spec: SamplerSpec | None = None) -> float:
    """``| sum_k ||t_k||^2 + ||r_n||^2 - ||x0||^2 |``.

    Zero (up to rounding) when every drawn operator is a projection; strictly
    positive in general otherwise. If ``spec`` is given and has a
    non-idempotent atom a warning is emitted, since the defect then carries no
    Parseval guarantee.
    """
    if spec is not None and not getattr(spec, "all_projections", False):
        warnings.warn("sampler has non-projection atoms; parseval defect need not vanish", stacklevel=2)
    rn = path.residual_norms[-1]
    return abs(frame_energy(path) + rn * rn - float(path.x0 @ path.x0))
