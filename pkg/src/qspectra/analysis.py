"""Isolated parts, multiplicities, Riesz decomposition and related checks.

The functions here combine the contour machinery with rank and spectrum
computations to check, instance by instance, the structural statements about
finite-type eigenvalues, decompositions under commuting projectors, minimum
modulus and powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .calculus import (
    DEFAULT_NODES,
    ProjectionResult,
    isolation_gap,
    match_spheres,
    riesz_projection,
)
from .errors import (
    DegenerateCase,
    InvalidArgument,
    NotIsolated,
    OnSpectrum,
    RankMismatch,
    SpectraNotDisjoint,
    ZeroImage,
)
from .qlinalg import (
    QMatrix,
    SpectrumResult,
    apply_Qq,
    column_basis,
    hausdorff,
    qmatmul,
    qrank,
    qsolve,
    s_spectrum,
    single_linkage,
    singular_values,
    vnorm,
)
from .quaternion import (
    ImaginaryUnit,
    Quaternion,
    Sphere,
    canonical,
    conj_array,
    hamilton,
    slice_power,
)

INVARIANCE_TOL = 1e-7
SPLIT_TOL = 1e-6


@dataclass(frozen=True)
class IsolatedPart:
    spheres: Tuple[Tuple[Sphere, int], ...]
    gap: float  # inf when the part is the whole spectrum

    @property
    def sphere_list(self) -> List[Sphere]:
        return [s for s, _ in self.spheres]

    def to_json(self) -> dict:
        return {
            "spheres": [{"re": s.re, "rho": s.rho, "mult": m} for s, m in self.spheres],
            "gap": self.gap if math.isfinite(self.gap) else None,
        }


def isolated_parts(spec: SpectrumResult, gap_tol: float) -> List[IsolatedPart]:
    """Group spheres by single linkage at ``gap_tol`` in the ``(re, rho)`` plane."""
    if gap_tol <= 0:
        raise InvalidArgument("gap_tol must be positive")
    if not spec.spheres:
        return []
    pts = np.array([[s.re, s.rho] for s in spec.sphere_list])
    labels = single_linkage(pts, gap_tol)
    parts = []
    for lab in sorted(set(labels.tolist()), key=lambda l: int(np.flatnonzero(labels == l)[0])):
        idx = [int(k) for k in np.flatnonzero(labels == lab)]
        parts.append(IsolatedPart(tuple(spec.spheres[k] for k in idx), isolation_gap(idx, spec)))
    return parts


def part_of(spec: SpectrumResult, spheres: Sequence[Sphere]) -> IsolatedPart:
    """Wrap spheres of ``spec`` as an :class:`IsolatedPart` with its realised gap."""
    idx = match_spheres(spheres, spec)
    return IsolatedPart(tuple(spec.spheres[k] for k in idx), isolation_gap(idx, spec))


def multiplicity(a: QMatrix, s: Sphere, spectrum: Optional[SpectrumResult] = None, **kw) -> int:
    """Algebraic multiplicity ``dim R(P_[s])``."""
    return riesz_projection(a, [s], spectrum=spectrum, **kw).rank


def restrict(a: QMatrix, basis: np.ndarray) -> QMatrix:
    """Matrix of ``a`` on the span of an orthonormal ``(n, k, 4)`` basis ``B``: ``B^* A B``."""
    if basis.shape[1] == 0:
        return QMatrix.zeros(0)
    bstar = conj_array(basis).transpose(1, 0, 2)
    return QMatrix(qmatmul(bstar, qmatmul(a.data, basis)))


def _invariance_residual(a: QMatrix, p: QMatrix, basis: np.ndarray) -> float:
    """``max ||(I - P) A v||`` over the basis columns."""
    if basis.shape[1] == 0:
        return 0.0
    av = qmatmul(a.data, basis)
    r = av - qmatmul(p.data, av)
    return float(np.sqrt((r ** 2).sum(axis=(0, 2))).max())


@dataclass(frozen=True)
class DecompositionReport:
    P: ProjectionResult
    basis_range: np.ndarray
    basis_null: np.ndarray
    T1: QMatrix
    T2: QMatrix
    spectra1: SpectrumResult
    spectra2: SpectrumResult
    split_error: float
    multiplicity_match: bool
    invariance_residual: float

    def to_json(self) -> dict:
        def cols(b):
            return [b[:, k, :].tolist() for k in range(b.shape[1])]

        return {
            "projection": self.P.to_json(),
            "basis_range": cols(self.basis_range),
            "basis_null": cols(self.basis_null),
            "T1": self.T1.to_json(),
            "T2": self.T2.to_json(),
            "spectra1": self.spectra1.to_json(),
            "spectra2": self.spectra2.to_json(),
            "split_error": self.split_error,
            "multiplicity_match": self.multiplicity_match,
            "invariance_residual": self.invariance_residual,
        }


def _split_error(
    got: SpectrumResult, want: Sequence[Tuple[Sphere, int]]
) -> Tuple[float, bool]:
    d = hausdorff(got.sphere_list, [s for s, _ in want])
    mult_ok = sorted(m for _, m in got.spheres) == sorted(m for _, m in want) and all(
        got.multiplicity(s, SPLIT_TOL) == m for s, m in want
    )
    return d, mult_ok


def riesz_decompose(
    a: QMatrix,
    part: IsolatedPart,
    spectrum: Optional[SpectrumResult] = None,
    nodes: int = DEFAULT_NODES,
    unit: Optional[ImaginaryUnit] = None,
    tol: float = 1e-8,
) -> DecompositionReport:
    """Split ``H^n = R(P) + N(P)`` for the Riesz projector of ``part``.

    Returns both restrictions expressed in orthonormal bases together with
    their spectra; ``split_error`` is the Hausdorff distance between the
    computed spectra and the expected partition (``inf`` if one side is
    empty on only one of the two).
    """
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    if not part.spheres:
        raise InvalidArgument("empty part")
    if part.gap <= tol:
        raise NotIsolated(f"part has gap {part.gap:.3e}")
    idx = match_spheres(part.sphere_list, spectrum)
    proj = riesz_projection(a, part.sphere_list, unit, nodes, spectrum=spectrum, tol=tol)
    k = proj.rank
    expected_k = sum(spectrum.spheres[i][1] for i in idx)
    if k != expected_k:
        raise RankMismatch(f"rank(P) = {k} but multiplicities sum to {expected_k}")
    n = a.n
    p = proj.P
    comp = QMatrix.identity(n) - p
    b1 = column_basis(p, k)
    b2 = column_basis(comp, n - k)
    inv = max(_invariance_residual(a, p, b1), _invariance_residual(a, comp, b2))
    t1, t2 = restrict(a, b1), restrict(a, b2)
    sp1 = s_spectrum(t1, spectrum.tol)
    sp2 = s_spectrum(t2, spectrum.tol)
    want1 = [spectrum.spheres[i] for i in idx]
    want2 = [sm for i, sm in enumerate(spectrum.spheres) if i not in idx]
    e1, m1 = _split_error(sp1, want1)
    e2, m2 = _split_error(sp2, want2)
    return DecompositionReport(
        P=proj,
        basis_range=b1,
        basis_null=b2,
        T1=t1,
        T2=t2,
        spectra1=sp1,
        spectra2=sp2,
        split_error=max(e1, e2),
        multiplicity_match=m1 and m2,
        invariance_residual=inv,
    )


def projector_uniqueness_check(
    a: QMatrix,
    p: QMatrix,
    tol: float = 1e-8,
    nodes: int = DEFAULT_NODES,
    spectrum: Optional[SpectrumResult] = None,
) -> float:
    """``||P - P_sigma1||`` where ``sigma1`` is the spectrum of ``A`` restricted to ``R(P)``.

    ``P`` must be a projection commuting with ``A`` and the two restricted
    spectra must be disjoint; then the Riesz projector of ``sigma1`` has the
    same range and kernel as ``P``, so the returned residual should vanish.
    """
    idem = (p @ p - p).norm()
    comm = (p @ a - a @ p).norm()
    if idem > tol or comm > tol:
        raise InvalidArgument(
            f"P is not a commuting projection (||P^2-P|| = {idem:.2e}, ||PA-AP|| = {comm:.2e})"
        )
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    n = a.n
    k = qrank(p, tol)
    t1 = restrict(a, column_basis(p, k))
    t2 = restrict(a, column_basis(QMatrix.identity(n) - p, n - k))
    s1 = s_spectrum(t1, spectrum.tol)
    s2 = s_spectrum(t2, spectrum.tol)
    if s1.spheres and s2.spheres:
        d = min(x.distance(y) for x in s1.sphere_list for y in s2.sphere_list)
        if d <= SPLIT_TOL:
            raise SpectraNotDisjoint(f"restricted spectra are {d:.3e} apart")
    p1 = riesz_projection(a, s1.sphere_list, nodes=nodes, spectrum=spectrum, tol=tol).P
    return (p - p1).norm()


@dataclass(frozen=True)
class FiniteTypeResult:
    is_finite_type: bool
    multiplicity: Optional[int]
    gap: float
    finite_range: bool = False  # range of P is finite dimensional and nonzero
    disjoint: bool = False  # restricted spectra are separated
    single_sphere: bool = False  # spectrum on the range is exactly [s]

    def __iter__(self):
        return iter((self.is_finite_type, self.multiplicity))


def finite_type_check(
    a: QMatrix,
    s: Sphere,
    gap_tol: float = 1e-6,
    spectrum: Optional[SpectrumResult] = None,
    nodes: int = DEFAULT_NODES,
) -> FiniteTypeResult:
    """Is ``s`` a right eigenvalue of finite type?

    True iff ``[s]`` is isolated at ``gap_tol`` and the Riesz splitting
    verifies a finite-dimensional range, disjoint restricted spectra and
    ``sigma_S(A|V1) = [s]``.  Unpacks as ``(is_finite_type, m)``.
    """
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    idx = match_spheres([s], spectrum)
    gap = isolation_gap(idx, spectrum)
    if gap <= gap_tol:
        return FiniteTypeResult(False, None, gap)
    rep = riesz_decompose(a, IsolatedPart((spectrum.spheres[idx[0]],), gap), spectrum, nodes)
    sphere = spectrum.spheres[idx[0]][0]
    finite = rep.basis_range.shape[1] == rep.P.rank and rep.P.rank > 0
    disjoint = all(
        x.distance(y) > gap_tol for x in rep.spectra1.sphere_list for y in rep.spectra2.sphere_list
    )
    single = len(rep.spectra1.spheres) == 1 and rep.spectra1.sphere_list[0].distance(sphere) <= SPLIT_TOL
    ok = finite and disjoint and single and rep.invariance_residual <= INVARIANCE_TOL
    return FiniteTypeResult(ok, rep.P.rank if ok else None, gap, finite, disjoint, single)


def multiplicity_sum_check(
    a: QMatrix,
    part: IsolatedPart,
    spectrum: Optional[SpectrumResult] = None,
    nodes: int = DEFAULT_NODES,
) -> Tuple[int, int]:
    """``(rank P_part, sum of rank P_[q] over the part's spheres)``."""
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    lhs = riesz_projection(a, part.sphere_list, nodes=nodes, spectrum=spectrum).rank
    rhs = sum(riesz_projection(a, [s], nodes=nodes, spectrum=spectrum).rank for s in part.sphere_list)
    return lhs, rhs


@dataclass(frozen=True)
class RankOneShiftReport:
    y: np.ndarray
    functional: np.ndarray  # left coefficients c_k with f(u) = sum c_k u_k
    f_x: Quaternion
    f_y: Quaternion
    identity_residual: float  # ||(T+A)^2 x - 2 (T+A) x + x||
    one_in_sum: bool
    one_in_shift: bool
    zero_in_shift: bool
    mu_one_sum: float
    mu_one_shift: float
    mu_zero_shift: float

    def to_json(self) -> dict:
        return {
            "y": self.y.tolist(),
            "functional": self.functional.tolist(),
            "f_x": self.f_x.to_list(),
            "f_y": self.f_y.to_list(),
            "identity_residual": self.identity_residual,
            "one_in_sum": self.one_in_sum,
            "one_in_shift": self.one_in_shift,
            "zero_in_shift": self.zero_in_shift,
        }


def _apply_functional(c: np.ndarray, u: np.ndarray) -> Quaternion:
    return Quaternion.from_seq(hamilton(c, u).sum(axis=0))


def _functional(x: np.ndarray, y: np.ndarray, tol: float) -> np.ndarray:
    """Left coefficients of a right-linear ``f`` with ``f(x) = 1`` and ``f(y) != 0``."""
    n = x.shape[0]
    cols = np.stack([x, y], axis=1)
    if qrank(QMatrix(np.pad(cols, ((0, 0), (0, n - 2), (0, 0)))), tol) < 2:
        # y = x q: f(u) = <x, u> / |x|^2 gives f(x) = 1, f(y) = q^{-1}
        return conj_array(x) / vnorm(x) ** 2
    # complete {x, y} to a right basis Z with unit vectors, pivoting on the residual
    chosen = [x, y]
    for k in range(n):
        if len(chosen) == n:
            break
        e = np.zeros((n, 4))
        e[k, 0] = 1.0
        trial = np.stack(chosen + [e], axis=1)
        pad = np.pad(trial, ((0, 0), (0, n - trial.shape[1]), (0, 0)))
        if qrank(QMatrix(pad), tol) == len(chosen) + 1:
            chosen.append(e)
    z = QMatrix(np.stack(chosen, axis=1))
    zinv = qsolve(z, QMatrix.identity(n))
    # coordinates of u are Z^{-1} u; f picks coordinate(x) + coordinate(y)
    return zinv.data[0] + zinv.data[1]


def rank_one_shift(
    t: QMatrix, x: np.ndarray, tol: float = 1e-10
) -> Tuple[QMatrix, RankOneShiftReport]:
    """Rank-one ``A = (x - y) (x) f`` with ``y = T x`` such that ``1`` is in ``sigma_S(T + A)``
    but not in ``sigma_S(A)``.
    """
    x = np.asarray(x, dtype=float)
    y = t @ x
    if vnorm(y) <= tol * max(1.0, vnorm(x)):
        raise ZeroImage("T x = 0; pick x outside the kernel")
    if vnorm(x - y) <= tol * max(1.0, vnorm(x)):
        raise DegenerateCase("T x = x; the construction needs x != y")
    c = _functional(x, y, tol)
    d = x - y
    aop = QMatrix(hamilton(d[:, None, :], c[None, :, :]))
    s = t + aop
    sx = s @ x
    resid = vnorm((s @ sx) - 2.0 * sx + x)
    one, zero = Quaternion(1.0), Quaternion(0.0)
    scale_s = max(1.0, s.norm() ** 2)
    scale_a = max(1.0, aop.norm() ** 2)
    mu1s = float(singular_values(apply_Qq(s, one))[-1])
    mu1a = float(singular_values(apply_Qq(aop, one))[-1])
    mu0a = float(singular_values(apply_Qq(aop, zero))[-1])
    rep = RankOneShiftReport(
        y=y,
        functional=c,
        f_x=_apply_functional(c, x),
        f_y=_apply_functional(c, y),
        identity_residual=resid,
        one_in_sum=mu1s <= 1e-10 * scale_s,
        one_in_shift=mu1a <= 1e-10 * scale_a,
        zero_in_shift=mu0a <= 1e-10 * scale_a,
        mu_one_sum=mu1s,
        mu_one_shift=mu1a,
        mu_zero_shift=mu0a,
    )
    return aop, rep


def deflate_sphere(
    a: QMatrix,
    s: Sphere,
    alpha: float,
    spectrum: Optional[SpectrumResult] = None,
    nodes: int = DEFAULT_NODES,
) -> QMatrix:
    """``A + alpha P_[s]``: moves ``[s]`` to ``(re + alpha, rho)`` and leaves the rest alone."""
    if alpha == 0:
        raise InvalidArgument("alpha must be non-zero")
    p = riesz_projection(a, [s], nodes=nodes, spectrum=spectrum).P
    return a + p * float(alpha)


def min_modulus(a: QMatrix) -> float:
    """``mu(A) = inf_{|x|=1} |A x|``."""
    s = singular_values(a)
    return float(s[-1]) if s.size else 0.0


@dataclass(frozen=True)
class NeighborhoodReport:
    q0: Quaternion
    epsilon: float
    norm_t: float
    probes: Tuple[Tuple[Quaternion, float], ...]  # (q', mu(Q_q'(A)))
    worst_margin: float
    violations: int

    def to_json(self) -> dict:
        return {
            "q0": self.q0.to_list(),
            "epsilon": self.epsilon,
            "norm_T": self.norm_t,
            "probes": [{"q": q.to_list(), "mu": m} for q, m in self.probes],
            "worst_margin": self.worst_margin,
            "violations": self.violations,
        }


def _sample_neighborhood(rng, q0: Quaternion, eps: float, norm_t: float) -> Quaternion:
    # 2|dre| ||T|| + |d|q|^2| < eps, then rebuild an imaginary part of the right length
    r0 = q0.norm2()
    for _ in range(1000):
        share = rng.uniform(0.0, 1.0)
        budget = eps * rng.uniform(0.0, 1.0)
        if norm_t > 0:
            dre = rng.choice([-1.0, 1.0]) * share * budget / (2.0 * norm_t)
        else:
            dre = rng.uniform(-1.0, 1.0) * (1.0 + abs(q0.re))
        dn = rng.choice([-1.0, 1.0]) * (1.0 - share) * budget
        re = q0.re + dre
        im2 = r0 + dn - re * re
        if im2 < 0:
            continue
        v = rng.standard_normal(3)
        v = v / np.linalg.norm(v)
        return Quaternion(re, *(math.sqrt(im2) * v))
    raise RuntimeError("could not sample the neighbourhood")


def resolvent_neighborhood(a: QMatrix, q0: Quaternion, probes: int = 100, seed: int = 0) -> NeighborhoodReport:
    """Sample ``q'`` with ``2|Re q0 - Re q'| ||A|| + ||q'|^2 - |q0|^2| < mu(Q_q0(A))`` and
    record ``mu(Q_q'(A))``; every sample should stay in the S-resolvent set.
    """
    eps = min_modulus(apply_Qq(a, q0))
    norm_t = a.norm()
    if eps <= 1e-13 * max(1.0, norm_t ** 2, q0.norm2()):
        raise OnSpectrum(f"q0 = {q0.to_list()} lies on the S-spectrum (mu = {eps:.3e})")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(probes):
        q = _sample_neighborhood(rng, q0, eps, norm_t)
        out.append((q, min_modulus(apply_Qq(a, q))))
    worst = min((m for _, m in out), default=math.inf)
    return NeighborhoodReport(q0, eps, norm_t, tuple(out), worst, sum(1 for _, m in out if not m > 0))


def spectral_mapping_power(a: QMatrix, n: int, tol: float = 1e-8) -> Tuple[SpectrumResult, SpectrumResult, float]:
    """Compare ``sigma_S(A^n)`` with the image of ``sigma_S(A)`` under ``q -> q^n``."""
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    lhs = s_spectrum(a ** n, tol)
    base = s_spectrum(a, tol)
    images: List[Tuple[Sphere, int]] = []
    for s, m in base.spheres:
        q = Quaternion(s.re, s.rho) if s.rho > 0 else Quaternion(s.re)
        img, _ = canonical(slice_power(q, n))
        images.append((img, m))
    # aggregate collisions at the spectrum's clustering scale
    scale = tol * max(1.0, max((abs(complex(s.re, s.rho)) for s, _ in images), default=0.0))
    pts = np.array([[s.re, s.rho] for s, _ in images]).reshape(-1, 2)
    labels = single_linkage(pts, scale)
    agg = []
    for lab in np.unique(labels):
        members = [images[k] for k in np.flatnonzero(labels == lab)]
        re = float(np.mean([s.re for s, _ in members]))
        rho = float(np.mean([s.rho for s, _ in members]))
        agg.append((Sphere(re, rho), sum(m for _, m in members)))
    agg.sort(key=lambda sm: (sm[0].re, sm[0].rho))
    rhs = SpectrumResult(tuple(agg), tol)
    return lhs, rhs, hausdorff(lhs.sphere_list, rhs.sphere_list)
