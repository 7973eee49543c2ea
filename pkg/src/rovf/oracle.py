"""Exact expectations for discrete samplers.

For i.i.d. draws from atoms ``T_i`` with probabilities ``p_i`` the map

    Phi(X) = sum_i p_i (I - T_i) X (I - T_i)

satisfies ``E[R_n^T X R_n] = Phi^n(X)``, which yields

    E||R_n x||^2        = <x, Phi^n(I) x>
    E||t_k||^2          = <x, Phi^{k-1}(Q) x>,   Q = sum_i p_i T_i^2.

:func:`brute_force_paths` recomputes the same quantities by summing over every
atom sequence and shares no code with the transfer-map route.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product

import numpy as np

from .exceptions import DimensionError, EnumerationBudgetError, NotExactError
from .linalg import as_operator, as_vector
from .samplers import SamplerSpec, coercivity_constant, is_discrete

ENUMERATION_BUDGET = 10**6


def _require_discrete(spec) -> None:
    if not is_discrete(spec):
        raise NotExactError(f"{type(spec).__name__} has no exact oracle; use Monte Carlo")


@dataclass(frozen=True, eq=False)
class TransferMap:
    atoms: np.ndarray  # (m, d, d)
    probs: np.ndarray  # (m,)
    complements: np.ndarray  # (m, d, d), I - T_i

    @classmethod
    def from_spec(cls, spec: SamplerSpec) -> "TransferMap":
        _require_discrete(spec)
        atoms = np.stack(spec.atoms)
        d = atoms.shape[1]
        return cls(atoms, np.asarray(spec.probs, dtype=float), np.eye(d) - atoms)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return apply_transfer(self, X)

    def term_moment(self) -> np.ndarray:
        """``Q = sum_i p_i T_i^2``."""
        Q = np.einsum("m,mij,mjk->ik", self.probs, self.atoms, self.atoms)
        return 0.5 * (Q + Q.T)


def apply_transfer(tmap: TransferMap, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (tmap.dim, tmap.dim):
        raise DimensionError(f"expected a {tmap.dim}x{tmap.dim} operand, got {X.shape}")
    Y = np.einsum("m,mij,jk,mlk->il", tmap.probs, tmap.complements, X, tmap.complements)
    return 0.5 * (Y + Y.T)


@dataclass(frozen=True, eq=False)
class OracleCurve:
    x: np.ndarray
    C: float
    exp_residual_sq: np.ndarray  # index k = 0..n
    exp_frame_energy: np.ndarray  # index k = 0..n, cumulative, starts at 0

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.exp_residual_sq))

    @property
    def bound(self) -> np.ndarray:
        return (1.0 - self.C) ** self.steps * float(self.x @ self.x)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "exp_residual_sq", "exp_frame_energy", "bound"])
        for k, r, e, b in zip(self.steps, self.exp_residual_sq, self.exp_frame_energy, self.bound):
            w.writerow([int(k), repr(float(r)), repr(float(e)), repr(float(b))])
        return buf.getvalue()


def oracle_curve(spec: SamplerSpec, x, n: int) -> OracleCurve:
    if n < 0:
        raise ValueError("n must be >= 0")
    tmap = TransferMap.from_spec(spec)
    x = as_vector(x)
    if x.shape[0] != tmap.dim:
        raise DimensionError(f"vector of dim {x.shape[0]} for sampler of dim {tmap.dim}")
    S = np.eye(tmap.dim)
    G = tmap.term_moment()
    res = [float(x @ x)]
    energy = [0.0]
    for _ in range(n):
        energy.append(energy[-1] + float(x @ G @ x))
        S = tmap(S)
        G = tmap(G)
        res.append(float(x @ S @ x))
    return OracleCurve(x, coercivity_constant(spec), np.array(res), np.array(energy))


def expected_residual_sq(spec: SamplerSpec, x, n: int) -> float:
    """Exact ``E||R_n x||^2``."""
    return float(oracle_curve(spec, x, n).exp_residual_sq[-1])


def expected_frame_energy(spec: SamplerSpec, x, n: int) -> float:
    """Exact ``E[sum_{k<=n} ||t_k||^2]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(oracle_curve(spec, x, n).exp_frame_energy[-1])


def expected_frame_operator(spec: SamplerSpec, n: int) -> np.ndarray:
    """``E[sum_{k<=n} T_k^T T_k] = sum_{k<=n} Phi^{k-1}(Q)``; tends to I for projection atoms."""
    tmap = TransferMap.from_spec(spec)
    G = tmap.term_moment()
    total = np.zeros_like(G)
    for _ in range(n):
        total += G
        G = tmap(G)
    return as_operator(0.5 * (total + total.T))


def brute_force_paths(spec: SamplerSpec, x, n: int, budget: int = ENUMERATION_BUDGET) -> tuple[float, float]:
    """Enumerate every length-``n`` atom sequence and return ``(E||r_n||^2, E sum ||t_k||^2)``."""
    _require_discrete(spec)
    atoms = [np.asarray(T) for T in spec.atoms]
    probs = [float(p) for p in spec.probs]
    if len(atoms) ** n > budget:
        raise EnumerationBudgetError(f"{len(atoms)}^{n} paths exceed the budget of {budget}")
    x = np.asarray(as_vector(x))
    exp_res = 0.0
    exp_energy = 0.0
    for seq in product(range(len(atoms)), repeat=n):
        weight = 1.0
        r = x.copy()
        energy = 0.0
        for i in seq:
            weight *= probs[i]
            t = atoms[i] @ r
            energy += float(t @ t)
            r = r - t
        exp_res += weight * float(r @ r)
        exp_energy += weight * energy
    return exp_res, exp_energy


def exact_exceedance(spec: SamplerSpec, x, n: int, delta: float, max_states: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Exact ``P(||r_k|| > delta)`` for ``k = 0..n``.

    Propagates the distribution of the residual vector step by step, merging
    residuals that agree to 13 decimals.
    """
    _require_discrete(spec)
    x = np.asarray(as_vector(x))
    states = {x.tobytes(): (x, 1.0)}
    out = [float(np.linalg.norm(x) > delta)]
    for _ in range(n):
        nxt: dict = {}
        for r, w in states.values():
            for T, p in zip(spec.atoms, spec.probs):
                if p == 0.0:
                    continue
                rn = r - T @ r
                key = (np.round(rn, 13) + 0.0).tobytes()
                if key in nxt:
                    nxt[key] = (nxt[key][0], nxt[key][1] + w * p)
                else:
                    nxt[key] = (rn, w * p)
        if len(nxt) > max_states:
            raise EnumerationBudgetError(f"residual distribution has more than {max_states} states")
        states = nxt
        out.append(sum(w for r, w in states.values() if np.linalg.norm(r) > delta))
    return np.array(out)
