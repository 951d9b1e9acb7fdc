"""S-resolvents, slice contours, Riesz projections and the polynomial S-calculus.

All Cauchy-type integrals are evaluated on circles in a slice ``C_I``.  For
``q(t) = c + r exp(I t)`` the measure ``dq_I = -dq I`` reduces to
``r exp(I t) dt`` because every factor lives in ``C_I``.  Quadrature is the
trapezoidal rule, which converges geometrically for these analytic
integrands.

Operator-scalar products follow the standard basis: ``M * p`` multiplies
entries on the right, ``p * M`` on the left.  In the complex adjoint picture
these are ``chi(M) @ chi(p I)`` and ``chi(p I) @ chi(M)``, which is how the
integrals are batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidArgument, NotInSpectrum, NotIsolated, OnSpectrum, SingularOperator
from .qlinalg import QMatrix, SpectrumResult, apply_Qq, qrank, qsolve, s_spectrum, split
from .quaternion import UNIT_I, ImaginaryUnit, Quaternion, Sphere, hamilton, slice_power

DEFAULT_NODES = 256
MATCH_TOL = 1e-6
NODE_TOL = 1e-13

Side = str  # "left" | "right"


def s_resolvent(q: Quaternion, a: QMatrix, side: Side = "left", tol: float = NODE_TOL) -> QMatrix:
    """Left ``-Q_q(A)^{-1} (A - conj(q) I)`` or right ``-(A - conj(q) I) Q_q(A)^{-1}`` S-resolvent."""
    n = a.n
    shifted = a - QMatrix.identity(n) * q.conj()
    qq = apply_Qq(a, q)
    try:
        if side == "left":
            return -qsolve(qq, shifted, tol)
        if side == "right":
            # X Q = S  <=>  Q^* X^* = S^*
            return -qsolve(qq.adjoint(), shifted.adjoint(), tol).adjoint()
    except SingularOperator as exc:
        raise OnSpectrum(f"q = {q.to_list()} lies on the S-spectrum: {exc}") from exc
    raise InvalidArgument(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class Circle:
    center: complex  # coordinates in C_I: re + I im
    radius: float


@dataclass(frozen=True)
class Contour:
    """Counterclockwise circles in the slice ``C_I``."""

    unit: ImaginaryUnit
    circles: Tuple[Circle, ...]
    nodes_per_circle: int = DEFAULT_NODES

    def __post_init__(self):
        if self.nodes_per_circle < 16:
            raise InvalidArgument("nodes_per_circle must be at least 16")
        for c in self.circles:
            if c.radius <= 0:
                raise InvalidArgument("circle radius must be positive")

    def centers(self) -> List[Quaternion]:
        return [Quaternion.from_complex(c.center, self.unit) for c in self.circles]

    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Slice coordinates of all quadrature nodes and their weights for ``dq_I / (2 pi)``."""
        if not self.circles:
            return np.zeros(0, complex), np.zeros(0, complex)
        m = self.nodes_per_circle
        e = np.exp(2j * np.pi * np.arange(m) / m)
        z = np.concatenate([c.center + c.radius * e for c in self.circles])
        w = np.concatenate([c.radius * e / m for c in self.circles])
        return z, w

    def to_json(self) -> dict:
        return {
            "I": self.unit.to_list(),
            "circles": [
                {"center": [c.center.real, c.center.imag], "radius": c.radius} for c in self.circles
            ],
            "nodes": self.nodes_per_circle,
        }


def match_spheres(targets: Iterable[Sphere], spectrum: SpectrumResult, tol: float = MATCH_TOL) -> List[int]:
    """Indices of ``spectrum`` spheres matching each target (deduplicated, ordered)."""
    idx = []
    for s in targets:
        k = spectrum.find(s, tol * max(1.0, abs(s.re) + s.rho))
        if k is None:
            raise NotInSpectrum(f"sphere ({s.re}, {s.rho}) is not in the computed S-spectrum")
        if k not in idx:
            idx.append(k)
    return sorted(idx)


def isolation_gap(indices: Sequence[int], spectrum: SpectrumResult) -> float:
    """Slice-plane distance from the selected spheres to the rest (``inf`` if none remain)."""
    spheres = spectrum.sphere_list
    rest = [s for k, s in enumerate(spheres) if k not in indices]
    if not rest or not indices:
        return math.inf
    return min(spheres[i].distance(t) for i in indices for t in rest)


def build_contour(
    target: Iterable[Sphere],
    spectrum: SpectrumResult,
    unit: Optional[ImaginaryUnit] = None,
    nodes: int = DEFAULT_NODES,
    tol: float = 1e-8,
) -> Contour:
    """One circle per slice point of every target sphere.

    The radius around a slice point is half its distance to the nearest other
    spectral slice point (its own conjugate partner included), capped at
    ``0.9 rho`` for non-real spheres.  Raises :class:`NotIsolated` when a
    target slice point is within ``tol`` of any other spectral slice point.
    """
    unit = unit or UNIT_I
    idx = match_spheres(target, spectrum)
    gap = isolation_gap(idx, spectrum)
    # a non-real target must also stay clear of its own conjugate slice point
    gap = min([gap] + [2.0 * spectrum.spheres[k][0].rho for k in idx if spectrum.spheres[k][0].rho > 0])
    if gap <= tol:
        raise NotIsolated(f"target spheres are within {gap:.3e} of the remaining spectrum")
    points = [p for s in spectrum.sphere_list for p in s.slice_points()]
    circles = []
    for k in idx:
        s = spectrum.spheres[k][0]
        for p in s.slice_points():
            others = [abs(p - o) for o in points if o != p]
            g = min(others) if others else math.inf
            radius = 0.5 * g if math.isfinite(g) else 1.0
            if s.rho > 0:
                radius = min(radius, 0.9 * s.rho)
            circles.append(Circle(p, radius))
    return Contour(unit, tuple(circles), nodes)


def _scalar_chi(q: np.ndarray) -> np.ndarray:
    """``chi`` of the 1x1 matrices ``[q]`` for a batch of quaternions, shape ``(m, 2, 2)``."""
    a, b = split(q)
    return np.stack([np.stack([a, b], -1), np.stack([-b.conj(), a.conj()], -1)], -2)


def _lift(z: np.ndarray, unit: ImaginaryUnit) -> np.ndarray:
    z = np.asarray(z, complex)
    return np.stack([z.real, z.imag * unit.x, z.imag * unit.y, z.imag * unit.z], axis=-1)


def _kron_scalar(s: np.ndarray, n: int) -> np.ndarray:
    """Batch of ``chi(p I_n) = kron(chi([p]), I_n)``, shape ``(m, 2n, 2n)``."""
    c = _scalar_chi(s)
    return np.einsum("mab,ij->maibj", c, np.eye(n)).reshape(len(s), 2 * n, 2 * n)


def _scalar_times(mats: np.ndarray, s: np.ndarray, n: int, side: Side) -> np.ndarray:
    """``mats[m] @ chi(s[m] I)`` (``side="right"``) or ``chi(s[m] I) @ mats[m]`` (``"left"``)."""
    c = _scalar_chi(s)
    m, rows, cols = mats.shape
    if side == "right":
        out = np.einsum("mraj,mab->mrbj", mats.reshape(m, rows, 2, n), c)
    else:
        out = np.einsum("mab,mbic->maic", c, mats.reshape(m, 2, n, cols))
    return out.reshape(m, rows, cols)


def _pairwise_sum(stack: np.ndarray) -> np.ndarray:
    # numpy sums contiguous trailing axes pairwise; move the node axis there
    if stack.shape[0] == 0:
        return np.zeros(stack.shape[1:], dtype=stack.dtype)
    return np.ascontiguousarray(np.moveaxis(stack, 0, -1)).sum(axis=-1)


def _resolvent_batch(a: QMatrix, q: np.ndarray, side: Side, tol: float = NODE_TOL) -> np.ndarray:
    """chi of ``S^{-1}(q_m, A)`` for a batch of quaternions ``q`` of shape ``(m, 4)``."""
    n = a.n
    x = a.chi()
    eye = np.eye(2 * n)
    re = q[:, 0]
    nrm2 = (q ** 2).sum(axis=1)
    x2 = x @ x
    qq = x2[None] - 2.0 * re[:, None, None] * x[None] + nrm2[:, None, None] * eye[None]
    sv = np.linalg.svd(qq, compute_uv=False)
    bad = sv[:, -1] <= tol * np.maximum(1.0, sv[:, 0])
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularOperator(f"quadrature node {q[k].tolist()} touches the S-spectrum")
    qbar = q * np.array([1.0, -1.0, -1.0, -1.0])
    shifted = x[None] - _kron_scalar(qbar, n)
    if side == "left":
        return -np.linalg.solve(qq, shifted)
    if side == "right":
        return -np.swapaxes(np.linalg.solve(np.swapaxes(qq, 1, 2), np.swapaxes(shifted, 1, 2)), 1, 2)
    raise InvalidArgument(f"side must be 'left' or 'right', got {side!r}")


def contour_integral(
    a: QMatrix,
    contour: Contour,
    side: Side = "left",
    values: Optional[np.ndarray] = None,
) -> QMatrix:
    """``(1/2pi) int S_L^{-1}(q,A) dq_I f(q)`` (left) or ``(1/2pi) int f(q) dq_I S_R^{-1}(q,A)`` (right).

    ``values`` holds ``f`` at the contour nodes as an ``(m, 4)`` array;
    ``None`` means ``f = 1``.
    """
    n = a.n
    z, w = contour.nodes()
    if z.size == 0:
        return QMatrix.zeros(n)
    q = _lift(z, contour.unit)
    scal = _lift(w, contour.unit)
    if values is not None:
        scal = hamilton(scal, values) if side == "left" else hamilton(values, scal)
    res = _resolvent_batch(a, q, side)
    if side == "left":
        terms = _scalar_times(res, scal, n, "right")
    else:
        terms = _scalar_times(res, scal, n, "left")
    return QMatrix.from_chi(_pairwise_sum(terms))


@dataclass(frozen=True)
class ProjectionResult:
    P: QMatrix
    idempotency_residual: float
    commutator_residual: float
    rank: int
    slice_unit: ImaginaryUnit
    nodes: int
    contour: Optional[Contour] = None
    side: Side = "left"

    def diagnostics(self) -> dict:
        return {
            "idempotency_residual": self.idempotency_residual,
            "commutator_residual": self.commutator_residual,
            "rank": self.rank,
            "slice_unit": self.slice_unit.to_list(),
            "nodes": self.nodes,
            "side": self.side,
        }

    def to_json(self) -> dict:
        out = {"P": self.P.to_json(), "diagnostics": self.diagnostics()}
        if self.contour is not None:
            out["contour"] = self.contour.to_json()
        return out


def riesz_projection(
    a: QMatrix,
    target: Iterable[Sphere],
    unit: Optional[ImaginaryUnit] = None,
    nodes: int = DEFAULT_NODES,
    side: Side = "left",
    spectrum: Optional[SpectrumResult] = None,
    tol: float = 1e-8,
) -> ProjectionResult:
    """Riesz projection onto the spectral subspace of the target spheres.

    An empty target gives the empty contour and hence ``P = 0``.
    """
    unit = unit or UNIT_I
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    contour = build_contour(list(target), spectrum, unit, nodes, tol)
    p = contour_integral(a, contour, side)
    return ProjectionResult(
        P=p,
        idempotency_residual=(p @ p - p).norm(),
        commutator_residual=(p @ a - a @ p).norm(),
        rank=qrank(p, tol),
        slice_unit=unit,
        nodes=nodes,
        contour=contour,
        side=side,
    )


def _coeff_array(coeffs: Sequence[Union[Quaternion, float]]) -> np.ndarray:
    return np.array(
        [c.as_array() if isinstance(c, Quaternion) else [float(c), 0.0, 0.0, 0.0] for c in coeffs]
    ).reshape(-1, 4)


def poly_values(z: np.ndarray, unit: ImaginaryUnit, coeffs: Sequence[Union[Quaternion, float]]) -> np.ndarray:
    """``f(q) = sum q^m a_m`` at slice points ``q = lift(z)``; returns ``(len(z), 4)``."""
    c = _coeff_array(coeffs)
    out = np.zeros((len(z), 4))
    for m in range(len(c)):
        out = out + hamilton(_lift(np.asarray(z, complex) ** m, unit), c[m])
    return out


def poly_direct(a: QMatrix, coeffs: Sequence[Union[Quaternion, float]]) -> QMatrix:
    """``sum A^m a_m`` with right scalar multiplication, by Horner's rule."""
    c = _coeff_array(coeffs)
    n = a.n
    if len(c) == 0:
        return QMatrix.zeros(n)
    eye = QMatrix.identity(n)
    acc = eye * Quaternion.from_seq(c[-1])
    for m in range(len(c) - 2, -1, -1):
        acc = a @ acc + eye * Quaternion.from_seq(c[m])
    return acc


def poly_calculus(
    a: QMatrix,
    coeffs: Sequence[Union[Quaternion, float]],
    unit: Optional[ImaginaryUnit] = None,
    nodes: int = DEFAULT_NODES,
    spectrum: Optional[SpectrumResult] = None,
) -> QMatrix:
    """``f(A)`` for ``f(q) = sum q^m a_m`` via the left Cauchy integral over the whole spectrum."""
    unit = unit or UNIT_I
    spectrum = spectrum if spectrum is not None else s_spectrum(a)
    contour = build_contour(spectrum.sphere_list, spectrum, unit, nodes)
    z, _ = contour.nodes()
    return contour_integral(a, contour, "left", poly_values(z, unit, coeffs))


@dataclass(frozen=True)
class RealPolynomial:
    """Real coefficients in ascending degree; trailing |c| <= 1e-14 are trimmed."""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        c = [float(x) for x in self.coefficients]
        while c and abs(c[-1]) <= 1e-14:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coefficients), default=0.0)

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        if not self.coefficients or not other.coefficients:
            return RealPolynomial(())
        return RealPolynomial(tuple(np.convolve(self.coefficients, other.coefficients)))

    def __call__(self, x):
        acc = 0.0 * x
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def of_matrix(self, a: QMatrix) -> QMatrix:
        """Evaluate at an operator (real coefficients, so no ordering issue)."""
        acc = QMatrix.zeros(a.n)
        eye = QMatrix.identity(a.n)
        for c in reversed(self.coefficients):
            acc = a @ acc + eye * c
        return acc


def companion(s: Quaternion) -> RealPolynomial:
    """``q^2 - 2 Re(s) q + |s|^2``."""
    return RealPolynomial((s.norm2(), -2.0 * s.re, 1.0))


def power_companion(n: int, s: Quaternion) -> RealPolynomial:
    """``P_2n(q) = q^{2n} - 2 Re(s^n) q^n + |s^n|^2`` with ``s^n`` taken in ``C_{I_s}``."""
    sn = slice_power(s, n)
    c = [0.0] * (2 * n + 1)
    c[0] += sn.norm2()
    c[n] += -2.0 * sn.re
    c[2 * n] += 1.0
    return RealPolynomial(tuple(c))


def _divmod_monic(num: Sequence[float], den: Sequence[float]) -> Tuple[List[float], List[float]]:
    num = list(num)
    d = len(den) - 1
    if len(num) - 1 < d:
        return [], num
    quot = [0.0] * (len(num) - d)
    for k in range(len(num) - 1, d - 1, -1):
        c = num[k] / den[d]
        quot[k - d] = c
        for i in range(d + 1):
            num[k - d + i] -= c * den[i]
    return quot, num[:d]


def divide_companion(n: int, s: Quaternion) -> Tuple[RealPolynomial, RealPolynomial]:
    """Divide ``P_2n`` by the companion quadratic of ``s``; the remainder vanishes."""
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    quot, rem = _divmod_monic(power_companion(n, s).coefficients, companion(s).coefficients)
    return RealPolynomial(tuple(quot)), RealPolynomial(tuple(rem))
