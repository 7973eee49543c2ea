"""Finite-dimensional Hilbert space primitives over the reals.

Vectors are 1-d float arrays and selfadjoint operators are dense, symmetric
2-d float arrays. The validators below return read-only copies so that values
can be shared freely between workers.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import (
    DimensionError,
    NotFiniteError,
    NotPositiveContractionError,
    NotSymmetricError,
    RankDeficientError,
    SpectralError,
)

SYMMETRY_RTOL = 1e-12
CONTRACTION_TOL = 1e-9
RECONSTRUCTION_RTOL = 1e-10
PIVOT_TOL = 1e-10


class SpectralDecomp(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"expected a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NotFiniteError("vector has non-finite entries")
    return _frozen(x)


def as_operator(T) -> np.ndarray:
    """Validate ``T`` as a symmetric d x d operator and return a read-only copy."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise DimensionError(f"expected a square matrix, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise NotFiniteError("operator has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(T))))
    asym = float(np.max(np.abs(T - T.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(f"operator is not symmetric (max |T - T^T| = {asym:.3e})")
    return _frozen(T)


def _check_dims(T: np.ndarray, x: np.ndarray) -> None:
    if T.shape[1] != x.shape[0]:
        raise DimensionError(f"operator of dim {T.shape[0]} applied to vector of dim {x.shape[0]}")


def apply(T, x) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_dims(T, x)
    return T @ x


def spectral(T) -> SpectralDecomp:
    """Eigendecomposition with ascending eigenvalues and orthonormal eigenvectors.

    Raises
    ------
    NotSymmetricError
        If ``T`` is not symmetric to relative tolerance 1e-12.
    SpectralError
        If the eigensolver does not converge or the decomposition fails the
        reconstruction check ``||Q diag(w) Q^T - T||_F <= 1e-10 max(1, ||T||_F)``.
    """
    T = as_operator(T)
    try:
        w, Q = np.linalg.eigh(T)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    err = np.linalg.norm((Q * w) @ Q.T - T)
    if err > RECONSTRUCTION_RTOL * max(1.0, np.linalg.norm(T)):
        raise SpectralError(f"reconstruction residual {err:.3e} exceeds tolerance")
    return SpectralDecomp(w, Q)


def extreme_eigenvalues(T) -> tuple[float, float]:
    w = spectral(T).eigenvalues
    return float(w[0]), float(w[-1])


def is_positive_contraction(T, tol: float = CONTRACTION_TOL) -> tuple[bool, tuple[float, float]]:
    """Test ``0 <= T <= I``; returns the verdict and the certificate ``(lam_min, lam_max)``."""
    lo, hi = extreme_eigenvalues(T)
    return (lo >= -tol and hi <= 1.0 + tol), (lo, hi)


def require_positive_contraction(T, tol: float = CONTRACTION_TOL) -> np.ndarray:
    T = as_operator(T)
    ok, (lo, hi) = is_positive_contraction(T, tol)
    if not ok:
        raise NotPositiveContractionError(
            f"spectrum [{lo:.3e}, {hi:.3e}] is not inside [0, 1] (tol {tol:g})"
        )
    return T


def lemma2_gap(T, x) -> float:
    """Return ``||x||^2 - ||Tx||^2 - ||x - Tx||^2``, which is non-negative for ``0 <= T <= I``."""
    T = require_positive_contraction(T)
    x = as_vector(x)
    _check_dims(T, x)
    Tx = T @ x
    return float(x @ x - Tx @ Tx - (x - Tx) @ (x - Tx))


def make_projection(basis: Sequence) -> np.ndarray:
    """Orthogonal projection onto the span of ``basis``.

    A basis vector whose Householder pivot falls below ``1e-10`` times its own
    norm is treated as linearly dependent on the earlier ones.
    """
    if len(basis) == 0:
        raise RankDeficientError("empty basis")
    B = np.column_stack([as_vector(b) for b in basis])
    d, k = B.shape
    if k > d:
        raise RankDeficientError(f"{k} vectors cannot be independent in dimension {d}")
    Q, R = np.linalg.qr(B)
    norms = np.linalg.norm(B, axis=0)
    pivots = np.abs(np.diag(R))
    if np.any(norms == 0) or np.any(pivots < PIVOT_TOL * norms):
        raise RankDeficientError("basis vectors are linearly dependent")
    P = Q @ Q.T
    return _frozen(0.5 * (P + P.T))


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR of a Gaussian matrix."""
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def random_orthogonal_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, d, d))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    return Q * signs[:, None, :]


def conjugate_diag(Q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``Q diag(w) Q^T`` symmetrized against rounding."""
    T = (Q * w) @ Q.T
    return 0.5 * (T + T.T)


def random_positive_contraction(d: int, rng: np.random.Generator, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return conjugate_diag(random_orthogonal(d, rng), rng.uniform(lo, hi, size=d))


def random_projection(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    return make_projection(list(rng.standard_normal((rank, d))))


def operator_to_json(T) -> dict:
    T = np.asarray(T, dtype=float)
    return {"dim": int(T.shape[0]), "entries": T.reshape(-1).tolist()}


def vector_to_json(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {"dim": int(x.shape[0]), "entries": x.tolist()}


def operator_from_json(obj: dict) -> np.ndarray:
    d = int(obj["dim"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.size != d * d:
        raise DimensionError(f"expected {d * d} entries for dim {d}, got {entries.size}")
    return as_operator(entries.reshape(d, d))


def vector_from_json(obj: dict) -> np.ndarray:
    x = as_vector(obj["entries"])
    if x.shape[0] != int(obj["dim"]):
        raise DimensionError(f"declared dim {obj['dim']} but got {x.shape[0]} entries")
    return x
