"""Randomized Kaczmarz as the rank-one projection case of the scheme.

Projecting the iterate onto the hyperplane of row ``a_i`` moves the error by
``e_k = (I - P_i) e_{k-1}`` with ``P_i = a_i a_i^T / ||a_i||^2``, which is the
residual recursion of :func:`rovf.iteration.run_path` for :class:`KaczmarzRow`.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.io

from .analysis import TrialSummary
from .exceptions import DimensionError, InconsistentSystemError, InvalidSpecError
from .iteration import StoppingRule, run_path
from .linalg import as_vector
from .samplers import KaczmarzRow, RngStream, as_generator, coercivity_constant

CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: np.ndarray
    b: np.ndarray
    x_star: np.ndarray | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise DimensionError(f"A has shape {A.shape} but b has {b.shape[0]} entries")
        if np.any(np.einsum("ij,ij->i", A, A) == 0):
            raise InvalidSpecError("A has a zero row")
        for arr in (A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.x_star is not None:
            xs = as_vector(self.x_star)
            resid = np.linalg.norm(A @ xs - b)
            if resid > 1e-10 * (np.linalg.norm(A) * np.linalg.norm(xs) + np.linalg.norm(b)):
                raise InconsistentSystemError(f"x_star does not solve the system (residual {resid:.3e})")
            object.__setattr__(self, "x_star", xs)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def solution(self) -> np.ndarray:
        """``x_star`` if known, otherwise a least-squares solution checked for consistency."""
        if self.x_star is not None:
            return self.x_star
        x, *_ = np.linalg.lstsq(self.A, self.b, rcond=None)
        resid = float(np.linalg.norm(self.A @ x - self.b))
        if resid > CONSISTENCY_TOL * max(1.0, float(np.linalg.norm(self.b))):
            raise InconsistentSystemError(f"system is inconsistent (least-squares residual {resid:.3e})")
        return x

    @classmethod
    def gaussian(cls, m: int, d: int, rng) -> "LinearSystem":
        g = as_generator(rng)
        A = g.standard_normal((m, d))
        x = g.standard_normal(d)
        return cls(A, A @ x, x)


class KaczmarzRate(NamedTuple):
    value: float
    coercive: bool


@dataclass(frozen=True, eq=False)
class RKHistory:
    rows: np.ndarray
    final: np.ndarray
    errors: np.ndarray | None  # ||x_k - x_star||, k = 0..steps
    step_sq: np.ndarray  # ||x_k - x_{k-1}||^2, k = 1..steps
    iterates: np.ndarray | None = None


def solve_rk(
    sys: LinearSystem, x0, steps: int, rng, keep_iterates: bool = False, uniform: bool = False
) -> RKHistory:
    """Run ``steps`` randomized Kaczmarz updates from ``x0``.

    Rows are drawn exactly as :func:`rovf.samplers.sample` draws them for
    ``KaczmarzRow(A)``, one uniform variate per step, so the same ``rng``
    reproduces the same row sequence in both.
    """
    x_star = sys.solution()
    spec = KaczmarzRow(sys.A, uniform=uniform)
    gen = as_generator(rng)
    A, b = sys.A, sys.b
    row_sq = np.einsum("ij,ij->i", A, A)
    x = np.array(as_vector(x0))
    rows = np.empty(steps, dtype=int)
    errors = np.empty(steps + 1)
    step_sq = np.empty(steps)
    iterates = [x.copy()] if keep_iterates else None
    errors[0] = np.linalg.norm(x - x_star)
    for k in range(steps):
        i = spec.draw(gen)
        rows[k] = i
        delta = ((b[i] - A[i] @ x) / row_sq[i]) * A[i]
        x = x + delta
        step_sq[k] = delta @ delta
        errors[k + 1] = np.linalg.norm(x - x_star)
        if keep_iterates:
            iterates.append(x.copy())
    return RKHistory(rows, x, errors, step_sq, None if iterates is None else np.array(iterates))


def rate(sys: LinearSystem, uniform: bool = False) -> KaczmarzRate:
    """Coercivity constant ``lam_min(A^T A) / ||A||_F^2`` of the row sampler.

    Rank-deficient ``A`` yields ``KaczmarzRate(0.0, False)``.
    """
    if np.linalg.matrix_rank(sys.A) < sys.dim:
        return KaczmarzRate(0.0, False)
    C = coercivity_constant(KaczmarzRow(sys.A, uniform=uniform))
    return KaczmarzRate(C, C > 0.0)


def error_process_equivalence(sys: LinearSystem, x0, steps: int, rng: RngStream) -> float:
    """Max over k of ``||(x_k - x_star) - r_k||`` for solver and frame iteration sharing ``rng``."""
    if sys.x_star is None:
        raise ValueError("error process comparison needs a known x_star")
    hist = solve_rk(sys, x0, steps, rng, keep_iterates=True)
    e0 = np.asarray(x0, dtype=float) - sys.x_star
    if not np.any(e0):
        return float(np.max(np.linalg.norm(hist.iterates - sys.x_star, axis=1)))
    path = run_path(KaczmarzRow(sys.A), e0, StoppingRule(max_steps=steps), rng, term_cap=steps)
    solver_err = hist.iterates - sys.x_star
    n = path.residuals.shape[0]
    dev = np.linalg.norm(solver_err[:n] - path.residuals, axis=1)
    tail = np.linalg.norm(solver_err[n:], axis=1)  # frame path stopped at r = 0
    return float(max(dev.max(), tail.max(initial=0.0)))


def kaczmarz_trials(
    sys: LinearSystem, x0, steps: int, n_trials: int, master_seed: int, uniform: bool = False
) -> TrialSummary:
    """Monte Carlo summary of the solver's error process ``e_k = x_k - x_star``.

    Frame terms are the iterate increments, so the summary's energies are
    ``sum_k ||x_k - x_{k-1}||^2``.
    """
    x_star = sys.solution()
    x0 = as_vector(x0)
    res = np.empty((n_trials, steps + 1))
    energy = np.zeros((n_trials, steps + 1))
    for i in range(n_trials):
        h = solve_rk(sys, x0, steps, RngStream(master_seed, i), uniform=uniform)
        res[i] = h.errors
        energy[i, 1:] = np.cumsum(h.step_sq)
    e0 = x0 - x_star
    defects = np.abs(energy[:, -1] + res[:, -1] ** 2 - float(e0 @ e0))
    return TrialSummary(
        spec=KaczmarzRow(sys.A, uniform=uniform),
        x=as_vector(e0),
        residual_norms=res,
        energies=energy,
        parseval_defects=defects,
        violation_count=int(np.sum(np.diff(res, axis=1) > 1e-12 * max(np.linalg.norm(e0), 1e-300))),
        master_seed=master_seed,
    )


def load_matrix(source) -> np.ndarray:
    """Dense matrix from a Matrix Market file path or an inline nested list."""
    if isinstance(source, (str, Path)):
        M = scipy.io.mmread(str(source))
        if hasattr(M, "toarray"):
            M = M.toarray()
        return np.asarray(M, dtype=float)
    return np.asarray(source, dtype=float)
