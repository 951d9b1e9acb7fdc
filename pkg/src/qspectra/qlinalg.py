"""Right quaternionic matrices on ``H^n`` and their complex adjoint.

Convention: every quaternion is written ``q = a + b j`` with ``a, b`` in
``C_i``; a matrix ``A = A1 + A2 j`` maps to the complex adjoint

    chi(A) = [[A1, A2], [-conj(A2), conj(A1)]]

which is a unital, isometric ring homomorphism.  Spectral data of ``A`` is
read off ``chi(A)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DependentInput, EigenFailure, SingularOperator
from .quaternion import Quaternion, Sphere, conj_array, hamilton

SOLVE_TOL = 1e-13


def split(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``(..., 4)`` quaternion array -> complex parts ``(a1, a2)`` with ``a = a1 + a2 j``."""
    return a[..., 0] + 1j * a[..., 1], a[..., 2] + 1j * a[..., 3]


def join(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    return np.stack([a1.real, a1.imag, a2.real, a2.imag], axis=-1)


def qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of quaternion arrays ``(m, k, 4) @ (k, p, 4)``."""
    a1, a2 = split(a)
    b1, b2 = split(b)
    return join(a1 @ b1 - a2 @ b2.conj(), a1 @ b2 + a2 @ b1.conj())


def chi_array(a: np.ndarray) -> np.ndarray:
    """Complex adjoint of an ``(m, p, 4)`` quaternion array, shape ``(2m, 2p)``."""
    a1, a2 = split(a)
    return np.block([[a1, a2], [-a2.conj(), a1.conj()]])


def unchi_array(m: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`chi_array`, projecting onto its image by averaging both copies."""
    a1 = 0.5 * (m[:rows, :cols] + m[rows:, cols:].conj())
    a2 = 0.5 * (m[:rows, cols:] - m[rows:, :cols].conj())
    return join(a1, a2)


def vec_to_chi(v: np.ndarray) -> np.ndarray:
    """First chi-column of a vector ``v = v1 + v2 j``: ``(v1, -conj(v2))``."""
    v1, v2 = split(v)
    return np.concatenate([v1, -v2.conj()])


def chi_to_vec(c: np.ndarray) -> np.ndarray:
    n = c.shape[0] // 2
    return join(c[:n], -c[n:].conj())


class QMatrix:
    """Square matrix over ``H`` acting on column vectors from the left.

    Entries multiply vector components on the left, so ``A (v q) = (A v) q``.
    ``A * q`` multiplies every entry by ``q`` on the right and ``q * A`` on
    the left; for real ``q`` both coincide.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != 4 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected an (n, n, 4) array, got shape {arr.shape}")
        arr.setflags(write=False)
        self._data = arr

    # constructors

    @classmethod
    def zeros(cls, n: int) -> "QMatrix":
        return cls(np.zeros((n, n, 4)))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        d = np.zeros((n, n, 4))
        d[np.arange(n), np.arange(n), 0] = 1.0
        return cls(d)

    @classmethod
    def diag(cls, entries: Sequence) -> "QMatrix":
        n = len(entries)
        d = np.zeros((n, n, 4))
        for k, e in enumerate(entries):
            d[k, k] = _as_quat_array(e)
        return cls(d)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence]) -> "QMatrix":
        return cls(np.array([[_as_quat_array(e) for e in row] for row in rows]))

    @classmethod
    def from_chi(cls, m: np.ndarray) -> "QMatrix":
        n = m.shape[0] // 2
        return cls(unchi_array(m, n, n))

    @classmethod
    def block_diag(cls, *blocks: "QMatrix") -> "QMatrix":
        n = sum(b.n for b in blocks)
        d = np.zeros((n, n, 4))
        k = 0
        for b in blocks:
            d[k:k + b.n, k:k + b.n] = b.data
            k += b.n
        return cls(d)

    # accessors

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def n(self) -> int:
        return self._data.shape[0]

    def __getitem__(self, idx) -> Quaternion:
        i, j = idx
        return Quaternion.from_seq(self._data[i, j])

    def __repr__(self) -> str:
        return f"QMatrix(n={self.n})"

    # algebra

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(qmatmul(self._data, other._data))
        other = np.asarray(other, dtype=float)
        if other.ndim == 2:
            return qmatmul(self._data, other[:, None, :])[:, 0, :]
        return qmatmul(self._data, other)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``A v`` for a vector ``v`` of shape ``(n, 4)``."""
        return self @ v

    def __add__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self._data + other._data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self._data - other._data)
        return NotImplemented

    def __neg__(self):
        return QMatrix(-self._data)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return QMatrix(self._data * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(hamilton(self._data, other.as_array()))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return QMatrix(self._data * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(hamilton(other.as_array(), self._data))
        return NotImplemented

    def __pow__(self, k: int) -> "QMatrix":
        if k < 0:
            raise ValueError("negative matrix powers are not supported")
        return QMatrix.from_chi(np.linalg.matrix_power(self.chi(), k))

    def adjoint(self) -> "QMatrix":
        return QMatrix(conj_array(self._data).transpose(1, 0, 2))

    def chi(self) -> np.ndarray:
        return chi_array(self._data)

    def norm(self) -> float:
        """Operator 2-norm (largest singular value of ``chi``)."""
        if self.n == 0:
            return 0.0
        return float(np.linalg.norm(self.chi(), 2))

    def maxabs(self) -> float:
        """Largest entry modulus."""
        if self.n == 0:
            return 0.0
        return float(np.sqrt((self._data ** 2).sum(axis=-1)).max())

    def allclose(self, other: "QMatrix", atol: float = 1e-10) -> bool:
        return (self - other).maxabs() <= atol

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self._data.tolist()}


def _as_quat_array(e) -> np.ndarray:
    if isinstance(e, Quaternion):
        return e.as_array()
    if isinstance(e, (int, float, np.floating)):
        return np.array([float(e), 0.0, 0.0, 0.0])
    arr = np.asarray(e, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"quaternion entry needs 4 components, got {arr.shape}")
    return arr


def chi(a: QMatrix) -> np.ndarray:
    """Complex adjoint ``[[A1, A2], [-conj A2, conj A1]]`` of ``a``."""
    return a.chi()


def singular_values(a: QMatrix) -> np.ndarray:
    """Singular values of ``chi(a)``, descending (each appears twice)."""
    if a.n == 0:
        return np.zeros(0)
    return np.linalg.svd(a.chi(), compute_uv=False)


def qsolve(a: QMatrix, b: QMatrix, tol: float = SOLVE_TOL) -> QMatrix:
    """Solve ``a X = b``.  Raises :class:`SingularOperator` if ``a`` is singular at ``tol``.

    ``tol`` is relative to ``max(1, ||a||)``.
    """
    ca = a.chi()
    s = np.linalg.svd(ca, compute_uv=False)
    if s[-1] <= tol * max(1.0, s[0]):
        raise SingularOperator(
            f"smallest singular value {s[-1]:.3e} below tolerance {tol * max(1.0, s[0]):.3e}"
        )
    return QMatrix.from_chi(np.linalg.solve(ca, b.chi()))


def qrank(a: QMatrix, tol: float = 1e-8) -> int:
    """Rank over ``H``: half the number of chi singular values above ``tol * s_max``."""
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    count = int(np.count_nonzero(s > tol * s[0]))
    return (count + 1) // 2


def apply_Qq(a: QMatrix, q: Quaternion) -> QMatrix:
    """``Q_q(A) = A^2 - 2 Re(q) A + |q|^2 I``."""
    n = a.n
    return a @ a - a * (2.0 * q.re) + QMatrix.identity(n) * q.norm2()


def min_singular_Qq(a: QMatrix, q: Quaternion) -> float:
    """Smallest singular value of ``chi(Q_q(a))``."""
    return float(singular_values(apply_Qq(a, q))[-1])


@dataclass(frozen=True)
class SpectrumResult:
    """Spheres of the S-spectrum with their H-multiplicities."""

    spheres: Tuple[Tuple[Sphere, int], ...]
    tol: float = 1e-8

    @property
    def n(self) -> int:
        return sum(m for _, m in self.spheres)

    @property
    def sphere_list(self) -> List[Sphere]:
        return [s for s, _ in self.spheres]

    def find(self, s: Sphere, tol: float = 1e-8) -> Optional[int]:
        """Index of the stored sphere closest to ``s`` if within ``tol``."""
        best, best_d = None, np.inf
        for k, (t, _) in enumerate(self.spheres):
            d = s.distance(t)
            if d < best_d:
                best, best_d = k, d
        return best if best_d <= tol else None

    def contains(self, s: Sphere, tol: float = 1e-8) -> bool:
        return self.find(s, tol) is not None

    def multiplicity(self, s: Sphere, tol: float = 1e-8) -> int:
        k = self.find(s, tol)
        return 0 if k is None else self.spheres[k][1]

    def to_json(self) -> dict:
        return {
            "spheres": [{"re": s.re, "rho": s.rho, "mult": m} for s, m in self.spheres],
            "tol": self.tol,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpectrumResult":
        return cls(
            tuple((Sphere(float(d["re"]), float(d["rho"])), int(d["mult"])) for d in obj["spheres"]),
            float(obj["tol"]),
        )


def single_linkage(points: np.ndarray, threshold: float) -> np.ndarray:
    """Cluster labels of points whose chains of pairwise distances stay ``<= threshold``."""
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    _, labels = connected_components(d <= threshold, directed=False)
    return labels


def s_spectrum(a: QMatrix, tol: float = 1e-8) -> SpectrumResult:
    """S-spectrum of ``a`` as spheres with multiplicities summing to ``n``.

    Eigenvalues ``l`` of ``chi(a)`` are mapped to ``(Re l, |Im l|)`` and
    clustered at ``tol * max(1, spectral radius)``; every sphere collects
    exactly twice its H-multiplicity of such points (the conjugate pair for
    a non-real sphere, the doubled real eigenvalue for a real one).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = a.n
    if n == 0:
        return SpectrumResult((), tol)
    try:
        ev = np.linalg.eigvals(a.chi())
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise EigenFailure("eigenvalue iteration returned non-finite values")
    ctol = tol * max(1.0, float(np.abs(ev).max()))
    pts = np.column_stack([ev.real, np.abs(ev.imag)])
    pts[pts[:, 1] < ctol, 1] = 0.0
    labels = single_linkage(pts, ctol)
    labels = _pair_odd_clusters(pts, labels)
    spheres = []
    for lab in np.unique(labels):
        members = pts[labels == lab]
        spheres.append((Sphere(float(members[:, 0].mean()), float(members[:, 1].mean())), len(members) // 2))
    spheres.sort(key=lambda sm: (sm[0].re, sm[0].rho))
    return SpectrumResult(tuple(spheres), tol)


def _pair_odd_clusters(pts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    # An odd cluster means a conjugate partner fell into a neighbouring cluster;
    # merge odd clusters with their nearest odd neighbour until all are even.
    labels = labels.copy()
    while True:
        labs, counts = np.unique(labels, return_counts=True)
        odd = labs[counts % 2 == 1]
        if odd.size == 0:
            return labels
        cents = {lab: pts[labels == lab].mean(axis=0) for lab in odd}
        best = None
        for ii, la in enumerate(odd):
            for lb in odd[ii + 1:]:
                d = np.linalg.norm(cents[la] - cents[lb])
                if best is None or d < best[0]:
                    best = (d, la, lb)
        labels[labels == best[2]] = best[1]


def hausdorff(a: Iterable[Sphere], b: Iterable[Sphere]) -> float:
    """Hausdorff distance of two finite sphere sets in the ``(re, rho)`` half-plane."""
    pa = np.array([[s.re, s.rho] for s in a]).reshape(-1, 2)
    pb = np.array([[s.re, s.rho] for s in b]).reshape(-1, 2)
    if len(pa) == 0 and len(pb) == 0:
        return 0.0
    if len(pa) == 0 or len(pb) == 0:
        return float("inf")
    d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# vectors in H^n are (n, 4) arrays


def inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``<u, v> = sum conj(u_k) v_k``; conjugate-linear in ``u``, right-linear in ``v``."""
    return hamilton(conj_array(u), v).sum(axis=0)


def vnorm(v: np.ndarray) -> float:
    return float(np.sqrt((np.asarray(v) ** 2).sum()))


def gram_schmidt(vectors: Sequence[np.ndarray], tol: float = 1e-10) -> List[np.ndarray]:
    """Right-orthonormalise ``vectors`` (modified Gram-Schmidt, two passes)."""
    basis: List[np.ndarray] = []
    for k, v in enumerate(vectors):
        w = np.array(v, dtype=float)
        scale = vnorm(w)
        for _ in range(2):
            for u in basis:
                w = w - hamilton(u, inner(u, w))
        r = vnorm(w)
        if scale == 0.0 or r <= tol * scale:
            raise DependentInput(f"vector {k} is right-linearly dependent on its predecessors")
        basis.append(w / r)
    return basis


def column_basis(m: QMatrix, rank: int) -> np.ndarray:
    """Orthonormal basis (as an ``(n, rank, 4)`` array) of the right column span of ``m``.

    Columns are chosen greedily by largest residual after projecting out
    those already picked, i.e. pivoted Gram-Schmidt.
    """
    n = m.n
    cols = [m.data[:, j, :].copy() for j in range(n)]
    basis: List[np.ndarray] = []
    for _ in range(rank):
        resid = []
        for c in cols:
            w = c
            for _pass in range(2):
                for u in basis:
                    w = w - hamilton(u, inner(u, w))
            resid.append(w)
        norms = [vnorm(w) for w in resid]
        j = int(np.argmax(norms))
        if norms[j] == 0.0:
            raise DependentInput("column span smaller than requested rank")
        basis.append(resid[j] / norms[j])
    if not basis:
        return np.zeros((n, 0, 4))
    return np.stack(basis, axis=1)


def null_vector(a: QMatrix) -> np.ndarray:
    """Unit vector minimising ``||a v||`` (right singular vector of ``chi(a)``)."""
    _, _, vh = np.linalg.svd(a.chi())
    v = chi_to_vec(vh[-1].conj())
    return v / vnorm(v)
