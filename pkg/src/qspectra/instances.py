"""Seeded random test matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .qlinalg import QMatrix, qsolve
from .quaternion import ImaginaryUnit, Quaternion, Sphere, sphere_point


def random_quaternion(rng: np.random.Generator) -> Quaternion:
    return Quaternion.from_seq(rng.standard_normal(4))


def random_unit(rng: np.random.Generator) -> ImaginaryUnit:
    return ImaginaryUnit.from_vector(rng.standard_normal(3))


def random_matrix(rng: np.random.Generator, n: int) -> QMatrix:
    return QMatrix(rng.standard_normal((n, n, 4)))


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, 4))


def separated_spheres(rng: np.random.Generator, k: int, gap: float = 0.5) -> List[Sphere]:
    """``k`` spheres pairwise at least ``gap`` apart, real or with ``rho >= gap``."""
    out: List[Sphere] = []
    while len(out) < k:
        re = float(rng.uniform(-3.0, 3.0))
        rho = 0.0 if rng.uniform() < 0.3 else float(rng.uniform(gap, 3.0))
        s = Sphere(re, rho)
        if all(s.distance(t) >= gap for t in out):
            out.append(s)
    return out


@dataclass(frozen=True)
class Instance:
    A: QMatrix
    spheres: Tuple[Tuple[Sphere, int], ...]  # exact spectrum with multiplicities


def similar_to_diagonal(
    rng: np.random.Generator, spheres_with_mult: List[Tuple[Sphere, int]], cond_max: float = 30.0
) -> QMatrix:
    """``S D S^{-1}`` with ``D`` holding each sphere in random slices and ``cond(S) <= cond_max``."""
    diag = []
    for s, m in spheres_with_mult:
        diag.extend(sphere_point(s, random_unit(rng)) for _ in range(m))
    n = len(diag)
    d = QMatrix.diag(diag)
    while True:
        s_mat = random_matrix(rng, n)
        sv = np.linalg.svd(s_mat.chi(), compute_uv=False)
        if sv[0] / sv[-1] <= cond_max:
            break
    return s_mat @ d @ qsolve(s_mat, QMatrix.identity(n))


def well_separated_instance(
    rng: np.random.Generator, n_min: int = 3, n_max: int = 6, gap: float = 0.5
) -> Instance:
    """Random ``n x n`` matrix with known spheres pairwise ``>= gap`` apart.

    Roughly one instance in three carries a sphere of multiplicity two.
    """
    n = int(rng.integers(n_min, n_max + 1))
    repeat = n >= 3 and rng.uniform() < 0.35
    k = n - 1 if repeat else n
    spheres = separated_spheres(rng, k, gap)
    mults = [1] * k
    if repeat:
        mults[0] = 2
    pairs = list(zip(spheres, mults))
    return Instance(similar_to_diagonal(rng, pairs), tuple(sorted(pairs, key=lambda sm: (sm[0].re, sm[0].rho))))


def standard_instances(seed: int, count: int = 25, gap: float = 0.5) -> List[Instance]:
    rng = np.random.default_rng(seed)
    return [well_separated_instance(rng, gap=gap) for _ in range(count)]


def block_instance(rng: np.random.Generator, gap: float = 0.5) -> Tuple[QMatrix, int]:
    """Block-diagonal ``diag(B1, B2)`` with disjoint block spectra; returns ``(A, size of B1)``."""
    n1 = int(rng.integers(1, 4))
    n2 = int(rng.integers(1, 4))
    spheres = separated_spheres(rng, n1 + n2, gap)
    b1 = similar_to_diagonal(rng, [(s, 1) for s in spheres[:n1]])
    b2 = similar_to_diagonal(rng, [(s, 1) for s in spheres[n1:]])
    return QMatrix.block_diag(b1, b2), n1
