"""Halmos dilation of a positive contraction.

For ``0 <= T <= I`` on ``R^d`` the block operator

    P = [[T, S], [S, I - T]],   S = sqrt(T (I - T)),

is an orthogonal projection on ``R^{2d}`` and ``T = W^T P W`` for the
isometry ``W x = (x, 0)``. This gives a structural certificate of

    ||Tx||^2 + ||x - Tx||^2 <= ||PWx||^2 + ||(I - P)Wx||^2 = ||x||^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import CONTRACTION_TOL, conjugate_diag, require_positive_contraction, spectral


@dataclass(frozen=True, eq=False)
class Dilation:
    isometry: np.ndarray  # W, shape (2d, d)
    projection: np.ndarray  # P, shape (2d, 2d)
    clamp: float = 0.0  # largest eigenvalue adjustment made to land in [0, 1]

    @property
    def dim(self) -> int:
        return self.isometry.shape[1]

    def compress(self) -> np.ndarray:
        W, P = self.isometry, self.projection
        return W.T @ P @ W

    def certificate(self, x) -> tuple[float, float, float]:
        """Return ``(||PWx||^2, ||(I-P)Wx||^2, ||x||^2)``; the first two sum to the third."""
        x = np.asarray(x, dtype=float)
        Wx = self.isometry @ x
        PWx = self.projection @ Wx
        rest = Wx - PWx
        return float(PWx @ PWx), float(rest @ rest), float(x @ x)


@dataclass(frozen=True)
class DilationReport:
    isometry_residual: float
    idempotence_residual: float
    compression_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.isometry_residual, self.idempotence_residual, self.compression_residual) <= self.tol

    def to_json(self) -> dict:
        return {
            "isometry_residual": self.isometry_residual,
            "idempotence_residual": self.idempotence_residual,
            "compression_residual": self.compression_residual,
            "tol": self.tol,
            "pass": self.passed,
        }


def halmos_dilate(T) -> Dilation:
    T = require_positive_contraction(T, CONTRACTION_TOL)
    d = T.shape[0]
    w, Q = spectral(T)
    wc = np.clip(w, 0.0, 1.0)
    clamp = float(np.max(np.abs(wc - w)))
    Tc = conjugate_diag(Q, wc)
    S = conjugate_diag(Q, np.sqrt(wc * (1.0 - wc)))
    P = np.block([[Tc, S], [S, np.eye(d) - Tc]])
    W = np.vstack([np.eye(d), np.zeros((d, d))])
    return Dilation(W, P, clamp)


def verify_dilation(T, D: Dilation, tol: float = 1e-10) -> DilationReport:
    W, P = D.isometry, D.projection
    T = np.asarray(T, dtype=float)
    return DilationReport(
        isometry_residual=float(np.linalg.norm(W.T @ W - np.eye(W.shape[1]))),
        idempotence_residual=float(np.linalg.norm(P @ P - P)),
        compression_residual=float(np.linalg.norm(W.T @ P @ W - T)),
        tol=tol,
    )
