"""Quaternion arithmetic, imaginary units and spheres ``[q]``.

Scalars are plain double precision.  Array helpers operate on ``(..., 4)``
float arrays holding ``(w, x, y, z)`` so matrix code can reuse them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from .errors import InvalidArgument

SPHERE_TOL = 1e-8


def hamilton(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise Hamilton product of two broadcastable ``(..., 4)`` arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def conj_array(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True, slots=True)
class Quaternion:
    """``w + x i + y j + z k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_seq(cls, seq: Iterable[float]) -> "Quaternion":
        w, x, y, z = (float(c) for c in seq)
        return cls(w, x, y, z)

    @classmethod
    def from_complex(cls, z: complex, unit: "ImaginaryUnit") -> "Quaternion":
        """Lift ``a + b i`` into the slice ``C_I`` as ``a + b I``."""
        z = complex(z)
        return cls(z.real, z.imag * unit.x, z.imag * unit.y, z.imag * unit.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list:
        return [self.w, self.x, self.y, self.z]

    @property
    def re(self) -> float:
        return self.w

    @property
    def im(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def im_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("quaternion inverse of zero")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def complex_pair(self) -> Tuple[complex, complex]:
        """``(a, b)`` with ``q = a + b j`` and ``a, b`` in ``C_i``."""
        return complex(self.w, self.x), complex(self.y, self.z)

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        if isinstance(other, (Quaternion, int, float)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)
        if isinstance(other, Quaternion):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, n: int) -> "Quaternion":
        return slice_power(self, n)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return abs(self - other) <= tol


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


@dataclass(frozen=True, slots=True)
class ImaginaryUnit:
    """A point of the unit 2-sphere of pure imaginary quaternions."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if abs(self.x * self.x + self.y * self.y + self.z * self.z - 1.0) > 1e-12:
            raise InvalidArgument(f"not a unit imaginary: ({self.x}, {self.y}, {self.z})")

    @classmethod
    def from_vector(cls, v: Iterable[float], min_norm: float = 1e-6) -> "ImaginaryUnit":
        """Normalise an arbitrary 3-vector; rejects vectors shorter than ``min_norm``."""
        x, y, z = (float(c) for c in v)
        r = math.sqrt(x * x + y * y + z * z)
        if r < min_norm:
            raise InvalidArgument(f"slice direction too short to normalise (norm {r:.3g})")
        return cls(x / r, y / r, z / r)

    @property
    def quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def to_list(self) -> list:
        return [self.x, self.y, self.z]


UNIT_I = ImaginaryUnit(1.0, 0.0, 0.0)
UNIT_J = ImaginaryUnit(0.0, 1.0, 0.0)
UNIT_K = ImaginaryUnit(0.0, 0.0, 1.0)


@dataclass(frozen=True, slots=True)
class Sphere:
    """Similarity class ``[q]`` stored as ``(Re q, |Im q|)``."""

    re: float
    rho: float

    def __post_init__(self):
        if self.rho < 0:
            raise InvalidArgument(f"sphere radius must be non-negative, got {self.rho}")

    @property
    def is_real(self) -> bool:
        return self.rho == 0.0

    def distance(self, other: "Sphere") -> float:
        """Smallest distance between points of the two spheres within any slice."""
        return math.hypot(self.re - other.re, self.rho - other.rho)

    def close(self, other: "Sphere", tol: float = SPHERE_TOL) -> bool:
        return abs(self.re - other.re) <= tol and abs(self.rho - other.rho) <= tol

    def slice_points(self) -> Tuple[complex, ...]:
        """Intersection with a slice, in slice coordinates (one point when real)."""
        if self.rho == 0.0:
            return (complex(self.re, 0.0),)
        return (complex(self.re, self.rho), complex(self.re, -self.rho))

    def to_list(self) -> list:
        return [self.re, self.rho]


def canonical(q: Quaternion) -> Tuple[Sphere, Optional[ImaginaryUnit]]:
    """Sphere of ``q`` and, for non-real ``q``, the unit ``I_q = Im q / |Im q|``."""
    r = q.im_norm
    if r == 0.0:
        return Sphere(q.w, 0.0), None
    unit = ImaginaryUnit.from_vector((q.x, q.y, q.z), min_norm=0.0)
    return Sphere(q.w, r), unit


def sphere_point(s: Sphere, unit: ImaginaryUnit) -> Quaternion:
    """The point ``re + I rho`` of the sphere lying in the slice ``C_I``."""
    return Quaternion(s.re, s.rho * unit.x, s.rho * unit.y, s.rho * unit.z)


def slice_power(q: Quaternion, n: int) -> Quaternion:
    """``q**n`` evaluated in the commutative slice containing ``q``."""
    if n < 0:
        return slice_power(q.inverse(), -n)
    sphere, unit = canonical(q)
    if unit is None:
        return Quaternion(q.w ** n)
    return Quaternion.from_complex(complex(sphere.re, sphere.rho) ** n, unit)
