"""Distributions over positive contractions and their second moments.

A sampler describes a random operator ``Psi`` with values in ``0 <= Psi <= I``.
Every discrete sampler exposes its atoms and probabilities so that exact
expectations can be computed (see :mod:`rovf.oracle`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .exceptions import InvalidSpecError, NotExactError
from .linalg import (
    CONTRACTION_TOL,
    as_operator,
    as_vector,
    conjugate_diag,
    make_projection,
    operator_from_json,
    operator_to_json,
    random_orthogonal,
    random_orthogonal_batch,
    require_positive_contraction,
    spectral,
)

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by ``(seed, stream)``.

    Each call to :meth:`generator` returns a fresh Philox generator, so equal
    streams always reproduce the same draws regardless of which process or
    thread consumes them.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise ValueError("seed and stream index must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _normalize(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidSpecError("need at least one atom")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidSpecError("probabilities must be finite and non-negative")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InvalidSpecError(
            f"probabilities (fusion weights v_i^2) must sum to 1 within {PROB_SUM_TOL:g}; got {total:.12g}"
        )
    p = p / total
    p.setflags(write=False)
    return p


def draw_index(cdf: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of an atom index, one uniform variate per call."""
    u = rng.random()
    return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)


class _Discrete:
    """Shared behaviour for samplers with finitely many atoms."""

    atoms: tuple
    probs: np.ndarray

    @property
    def dim(self) -> int:
        return self.atoms[0].shape[0]

    @cached_property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def draw(self, rng: np.random.Generator) -> int:
        return draw_index(self.cdf, rng)

    @property
    def all_projections(self) -> bool:
        return all(np.allclose(T @ T, T, atol=1e-10) for T in self.atoms)


@dataclass(frozen=True, eq=False)
class Deterministic:
    T: np.ndarray

    def __post_init__(self):
        try:
            object.__setattr__(self, "T", require_positive_contraction(self.T))
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def atoms(self) -> tuple:
        return (self.T,)

    @property
    def probs(self) -> np.ndarray:
        return np.ones(1)

    @property
    def all_projections(self) -> bool:
        return bool(np.allclose(self.T @ self.T, self.T, atol=1e-10))

    def draw(self, rng) -> int:
        return 0


@dataclass(frozen=True, eq=False)
class DiscreteMixture(_Discrete):
    atoms: tuple
    probs: np.ndarray

    def __post_init__(self):
        try:
            atoms = tuple(require_positive_contraction(T) for T in self.atoms)
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc
        if len({T.shape for T in atoms}) != 1:
            raise InvalidSpecError("atoms have different dimensions")
        probs = _normalize(self.probs)
        if len(probs) != len(atoms):
            raise InvalidSpecError("one probability per atom required")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True, eq=False)
class FusionFrameProjection(_Discrete):
    """Random projection onto subspace ``W_i`` with probability ``w_i = v_i^2``."""

    subspaces: tuple  # tuple of bases, each a sequence of vectors
    weights: np.ndarray
    atoms: tuple = field(init=False, repr=False)
    probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        try:
            bases = tuple(tuple(as_vector(v) for v in basis) for basis in self.subspaces)
            atoms = tuple(make_projection(basis) for basis in bases)
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc
        if len({T.shape for T in atoms}) != 1:
            raise InvalidSpecError("subspaces live in different dimensions")
        probs = _normalize(self.weights)
        if len(probs) != len(atoms):
            raise InvalidSpecError("one weight per subspace required")
        object.__setattr__(self, "subspaces", bases)
        object.__setattr__(self, "weights", probs)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @property
    def all_projections(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class KaczmarzRow(_Discrete):
    """Rank-one projection onto a row of ``A``.

    Row ``i`` is drawn with probability ``||a_i||^2 / ||A||_F^2``, or uniformly
    when ``uniform`` is set.
    """

    A: np.ndarray
    uniform: bool = False
    atoms: tuple = field(init=False, repr=False)
    probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.size == 0 or not np.all(np.isfinite(A)):
            raise InvalidSpecError("A must be a finite, non-empty matrix")
        row_sq = np.einsum("ij,ij->i", A, A)
        if np.any(row_sq == 0):
            raise InvalidSpecError("A has a zero row")
        A.setflags(write=False)
        if self.uniform:
            probs = np.full(len(A), 1.0 / len(A))
        else:
            probs = row_sq / row_sq.sum()
        probs.setflags(write=False)
        atoms = []
        for a, s in zip(A, row_sq):
            P = np.outer(a, a) / s
            P = 0.5 * (P + P.T)
            P.setflags(write=False)
            atoms.append(P)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def all_projections(self) -> bool:
        return True


@dataclass(frozen=True)
class RandomSpectral:
    """``Q diag(lam) Q^T`` with Haar ``Q`` and i.i.d. ``lam ~ U[lo, hi]``."""

    dim: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidSpecError("dim must be a positive integer")
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise InvalidSpecError(f"need 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")

    @property
    def analytic_coercivity(self) -> float:
        """``E[lam^2]``; Haar averaging makes the second moment a multiple of I."""
        lo, hi = self.lo, self.hi
        if hi == lo:
            return lo * lo
        return (hi**3 - lo**3) / (3.0 * (hi - lo))


SamplerSpec = Union[Deterministic, DiscreteMixture, FusionFrameProjection, KaczmarzRow, RandomSpectral]
DISCRETE = (Deterministic, DiscreteMixture, FusionFrameProjection, KaczmarzRow)


def is_discrete(spec) -> bool:
    return isinstance(spec, DISCRETE)


def sample(spec: SamplerSpec, rng) -> np.ndarray:
    """Draw one operator from ``spec``."""
    if isinstance(spec, RandomSpectral):
        g = as_generator(rng)
        Q = random_orthogonal(spec.dim, g)
        return conjugate_diag(Q, g.uniform(spec.lo, spec.hi, size=spec.dim))
    if isinstance(spec, DISCRETE):
        return spec.atoms[spec.draw(as_generator(rng))]
    raise InvalidSpecError(f"unknown sampler {type(spec).__name__}")


def sample_batch(spec: SamplerSpec, n: int, rng) -> np.ndarray:
    """Draw ``n`` operators as an ``(n, d, d)`` array.

    Consumes the stream differently from repeated :func:`sample` calls.
    """
    g = as_generator(rng)
    if isinstance(spec, RandomSpectral):
        Q = random_orthogonal_batch(n, spec.dim, g)
        lam = g.uniform(spec.lo, spec.hi, size=(n, spec.dim))
        out = np.einsum("nij,nj,nkj->nik", Q, lam, Q)
        return 0.5 * (out + out.transpose(0, 2, 1))
    if isinstance(spec, Deterministic):
        return np.broadcast_to(spec.T, (n,) + spec.T.shape).copy()
    if isinstance(spec, DISCRETE):
        idx = np.minimum(np.searchsorted(spec.cdf, g.random(n), side="right"), len(spec.atoms) - 1)
        return np.stack(spec.atoms)[idx]
    raise InvalidSpecError(f"unknown sampler {type(spec).__name__}")


def second_moment(spec: SamplerSpec) -> np.ndarray:
    """Exact ``M = E[Psi^T Psi]`` for discrete samplers."""
    if isinstance(spec, RandomSpectral):
        raise NotExactError("RandomSpectral has no exact second moment here; use estimate_coercivity_mc")
    if isinstance(spec, KaczmarzRow) and not spec.uniform:
        A = spec.A
        M = A.T @ A / np.sum(A * A)
    else:
        M = sum(p * (T.T @ T) for T, p in zip(spec.atoms, spec.probs))
    return as_operator(0.5 * (M + M.T))


def coercivity_constant(spec: SamplerSpec) -> float:
    """Largest ``C`` with ``E||Psi x||^2 >= C ||x||^2``, i.e. ``lam_min(M)``.

    Rounding noise below zero is clipped, so a singular ``M`` gives ``0.0``.
    """
    lam = float(spectral(second_moment(spec)).eigenvalues[0])
    return max(lam, 0.0)


def _lam_min(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def estimate_coercivity_mc(spec: SamplerSpec, n_samples: int, rng, n_batches: int = 10) -> tuple[float, float]:
    """Monte Carlo estimate of ``lam_min(E[Psi^T Psi])`` and its jackknife standard error.

    The draws are split into ``n_batches`` contiguous batches; the standard
    error is the delete-one-batch jackknife of ``lam_min``. The plug-in
    estimate is biased low when the smallest eigenvalue of ``M`` is
    degenerate.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    g = as_generator(rng)
    chunk = 5000
    batch_sums = np.zeros((n_batches, spec.dim, spec.dim))
    bounds = np.linspace(0, n_samples, n_batches + 1).astype(int)
    counts = np.diff(bounds)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        S = sample_batch(spec, m, g)
        G = np.einsum("nji,njk->nik", S, S)
        batch_of = np.searchsorted(bounds, np.arange(done, done + m), side="right") - 1
        np.add.at(batch_sums, batch_of, G)
        done += m
    total = batch_sums.sum(axis=0)
    estimate = _lam_min(total / n_samples)
    loo = np.array([_lam_min((total - batch_sums[i]) / (n_samples - counts[i])) for i in range(n_batches)])
    stderr = float(np.sqrt((n_batches - 1) / n_batches * np.sum((loo - loo.mean()) ** 2)))
    return estimate, stderr


def fusion_frame_bounds(spec: FusionFrameProjection) -> tuple[float, float]:
    """Optimal fusion frame bounds ``(A, B)`` of ``sum_i w_i P_i``."""
    S = sum(w * P for w, P in zip(spec.weights, spec.atoms))
    w = spectral(0.5 * (S + S.T)).eigenvalues
    return float(w[0]), float(w[-1])


# JSON schema: {"kind": ..., kind-specific fields}; matrices row-major.

def spec_to_json(spec: SamplerSpec) -> dict:
    if isinstance(spec, Deterministic):
        return {"kind": "deterministic", "T": operator_to_json(spec.T)}
    if isinstance(spec, DiscreteMixture):
        return {
            "kind": "discrete-mixture",
            "atoms": [{"T": operator_to_json(T), "p": float(p)} for T, p in zip(spec.atoms, spec.probs)],
        }
    if isinstance(spec, FusionFrameProjection):
        return {
            "kind": "fusion-frame",
            "subspaces": [
                {"basis": [v.tolist() for v in basis], "w": float(w)}
                for basis, w in zip(spec.subspaces, spec.weights)
            ],
        }
    if isinstance(spec, KaczmarzRow):
        out = {"kind": "kaczmarz-row", "A": spec.A.tolist()}
        if spec.uniform:
            out["uniform"] = True
        return out
    if isinstance(spec, RandomSpectral):
        return {"kind": "random-spectral", "dim": spec.dim, "lo": spec.lo, "hi": spec.hi}
    raise InvalidSpecError(f"unknown sampler {type(spec).__name__}")


def spec_from_json(obj: dict) -> SamplerSpec:
    """Build a sampler from its JSON object; raises :class:`InvalidSpecError` on bad input."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidSpecError("sampler must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "deterministic":
            return Deterministic(_operator_field(obj["T"]))
        if kind == "discrete-mixture":
            atoms = obj["atoms"]
            return DiscreteMixture(tuple(_operator_field(a["T"]) for a in atoms), [a["p"] for a in atoms])
        if kind == "fusion-frame":
            subs = obj["subspaces"]
            return FusionFrameProjection(tuple(s["basis"] for s in subs), [s["w"] for s in subs])
        if kind == "kaczmarz-row":
            return KaczmarzRow(np.asarray(obj["A"], dtype=float), bool(obj.get("uniform", False)))
        if kind == "random-spectral":
            return RandomSpectral(int(obj["dim"]), float(obj.get("lo", 0.0)), float(obj.get("hi", 1.0)))
    except KeyError as exc:
        raise InvalidSpecError(f"sampler '{kind}' is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpecError):
            raise
        raise InvalidSpecError(f"sampler '{kind}': {exc}") from exc
    raise InvalidSpecError(f"unknown sampler kind '{kind}'")


def _operator_field(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return operator_from_json(obj)
    return as_operator(obj)
