"""Finite sections of the unilateral shift on quaternionic sequences.

The truncation keeps indices ``0..N-1`` with ``(T x)_i = x_{i+1}`` and
``(T x)_{N-1} = 0``.  Its S-spectrum is just ``{0}``; the unit-ball spectrum
of the full operator shows up through geometric approximate eigenvectors
and through uniform lower bounds of ``mu(Q_q(T_N))`` outside the ball.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .analysis import min_modulus
from .errors import DivergentSeed, InvalidArgument
from .qlinalg import QMatrix, SpectrumResult, apply_Qq, qmatmul, s_spectrum, vnorm
from .quaternion import Quaternion, Sphere


@dataclass(frozen=True)
class ShiftTruncation:
    N: int
    matrix: QMatrix


def truncated_shift(N: int) -> ShiftTruncation:
    if N < 2:
        raise InvalidArgument("N must be at least 2")
    d = np.zeros((N, N, 4))
    d[np.arange(N - 1), np.arange(1, N), 0] = 1.0
    return ShiftTruncation(N, QMatrix(d))


def geometric_vector(q: Quaternion, N: int) -> np.ndarray:
    """``v_i = q^i`` for ``i = 0..N-1``."""
    v = np.zeros((N, 4))
    cur = Quaternion(1.0)
    for i in range(N):
        v[i] = cur.as_array()
        cur = cur * q
    return v


def approx_eigvector(q: Quaternion, N: int) -> Tuple[np.ndarray, float]:
    """Seed ``v_i = q^i`` and its relative residual ``|Q_q(T_N) v| / |v|``.

    On the full shift ``T v = v q`` exactly; the truncation only disturbs the
    last two rows, giving a residual of order ``|q|^N``.
    """
    if abs(q) >= 1.0:
        raise DivergentSeed(f"|q| = {abs(q):.6g} >= 1; q^i does not decay")
    t = truncated_shift(N).matrix
    v = geometric_vector(q, N)
    r = apply_Qq(t, q) @ v
    return v, vnorm(r) / vnorm(v)


def exterior_margin(q: Quaternion, N: int) -> float:
    """``mu(Q_q(T_N))`` for ``|q| > 1``."""
    if abs(q) <= 1.0:
        raise InvalidArgument("exterior_margin needs |q| > 1")
    return min_modulus(apply_Qq(truncated_shift(N).matrix, q))


def random_low_rank(rng: np.random.Generator, N: int, rank: int) -> QMatrix:
    """``U V^*`` with Gaussian quaternion factors of shape ``N x rank`` scaled by ``1/sqrt(N)``."""
    if rank == 0:
        return QMatrix.zeros(N)
    u = rng.standard_normal((N, rank, 4)) / np.sqrt(N)
    v = rng.standard_normal((N, rank, 4)) / np.sqrt(N)
    vstar = (v * np.array([1.0, -1.0, -1.0, -1.0])).transpose(1, 0, 2)
    return QMatrix(qmatmul(u, vstar))


@dataclass(frozen=True)
class PerturbationReport:
    N: int
    rank: int
    seed: int
    trials: Tuple[SpectrumResult, ...]
    persistent_spheres: Tuple[Sphere, ...]

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "rank": self.rank,
            "seed": self.seed,
            "trials": [t.to_json() for t in self.trials],
            "persistent_spheres": [{"re": s.re, "rho": s.rho} for s in self.persistent_spheres],
        }


def perturbation_experiment(
    N: int, rank: int, trials: int, seed: int, tol: float = 1e-6
) -> PerturbationReport:
    """S-spectra of ``T_N + K`` for random rank-``rank`` ``K``.

    ``persistent_spheres`` are the spheres of the first trial that reappear,
    within ``tol``, in every other trial.
    """
    if not 0 <= rank < N:
        raise InvalidArgument(f"rank must satisfy 0 <= rank < N, got rank={rank}, N={N}")
    rng = np.random.default_rng(seed)
    t = truncated_shift(N).matrix
    results: List[SpectrumResult] = []
    for _ in range(trials):
        results.append(s_spectrum(t + random_low_rank(rng, N, rank)))
    persistent: List[Sphere] = []
    if results:
        for s in results[0].sphere_list:
            if all(r.contains(s, tol) for r in results[1:]):
                persistent.append(s)
    return PerturbationReport(N, rank, seed, tuple(results), tuple(persistent))
