"""
Complex projective space CP^n: normalized homogeneous points, the canonical
chart atlas, transition maps, the Hopf projection, the projective distance
and the bump-function embedding into real Euclidean space
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.config import settings
from app.utils.errors import ChartDomainError, InvalidInputError

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps
# normalization leaves a few ulps of angle between equal classes
_ROUNDING_ANGLE = 8.0 * _EPS

# K_j = {|z_j| >= K_RATIO * max|z_k|}; partition functions vanish below SUPPORT_RATIO
K_RATIO = 0.6
SUPPORT_RATIO = 0.3


def normalize_homogeneous(z) -> np.ndarray:
    """
    Unit-norm representative with the largest-modulus component rotated
    to be real positive. Already-normalized input is returned unchanged.
    """
    v = np.asarray(z, dtype=np.complex128).reshape(-1)
    if v.size < 1 or not np.all(np.isfinite(v)):
        raise InvalidInputError("homogeneous coordinates must be finite and non-empty")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidInputError("the zero vector has no projective class")
    pivot = int(np.argmax(np.abs(v)))
    if abs(norm - 1.0) <= 8 * _EPS and v[pivot].imag == 0.0 and v[pivot].real > 0.0:
        return v.copy()
    v = v / norm
    v = v * (np.conj(v[pivot]) / abs(v[pivot]))
    v[pivot] = abs(v[pivot])
    return v


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Point (z_0 : ... : z_n) of CP^n held by its canonical representative"""
    homog: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "homog", normalize_homogeneous(self.homog))
        self.homog.setflags(write=False)

    @property
    def n(self) -> int:
        return self.homog.size - 1

    @property
    def pivot(self) -> int:
        return int(np.argmax(np.abs(self.homog)))

    def distance(self, other: "ProjectivePoint") -> float:
        return proj_distance(self, other)

    def __repr__(self) -> str:
        coords = ":".join(f"{c:.6g}" for c in self.homog)
        return f"ProjectivePoint({coords})"


@dataclass(frozen=True)
class AffineCoords:
    """Coordinates w = (z_k/z_j)_{k != j} of a point in chart U_j"""
    chart: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("affine coordinates must be finite")
        if not 0 <= self.chart <= w.size:
            raise InvalidInputError(f"chart index {self.chart} outside [0, {w.size}]")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.size

    def lift(self) -> np.ndarray:
        """Homogeneous lift with z_j = 1"""
        return np.insert(self.w, self.chart, 1.0)


def check_chart(j: int, n: int):
    if not 0 <= j <= n:
        raise InvalidInputError(f"chart index {j} outside [0, {n}]")


def to_chart(p: ProjectivePoint, j: int, tol_chart: Optional[float] = None) -> AffineCoords:
    """phi_j: (z_0 : ... : z_n) -> (z_k / z_j)_{k != j}"""
    tol_chart = settings.TOL_CHART if tol_chart is None else tol_chart
    check_chart(j, p.n)
    z = p.homog
    if abs(z[j]) <= tol_chart * np.linalg.norm(z):
        raise ChartDomainError(j)
    return AffineCoords(chart=j, w=np.delete(z / z[j], j))


def from_chart(a: AffineCoords) -> ProjectivePoint:
    return ProjectivePoint(a.lift())


def pivot_chart(p: ProjectivePoint) -> AffineCoords:
    """Chart of the largest-modulus coordinate (|z_j| >= ||z||/sqrt(n+1))"""
    return to_chart(p, p.pivot)


def transition(w, i: int, j: int, tol_chart: Optional[float] = None) -> AffineCoords:
    """
    psi_ij = phi_j o phi_i^{-1}: divide through by the coordinate in the
    z_j slot and put its reciprocal in the z_i slot.
    """
    tol_chart = settings.TOL_CHART if tol_chart is None else tol_chart
    coords = w.w if isinstance(w, AffineCoords) else np.asarray(w, dtype=np.complex128).reshape(-1)
    n = coords.size
    check_chart(i, n)
    check_chart(j, n)
    if i == j:
        return AffineCoords(chart=j, w=coords.copy())
    # position of z_k inside chart-i coordinates
    slot_j = j if j < i else j - 1
    pivot = coords[slot_j]
    if abs(pivot) <= tol_chart * max(1.0, float(np.linalg.norm(coords))):
        raise ChartDomainError(j)
    out = np.empty(n, dtype=np.complex128)
    pos = 0
    for k in range(n + 1):
        if k == j:
            continue
        if k == i:
            out[pos] = 1.0 / pivot
        else:
            out[pos] = coords[k if k < i else k - 1] / pivot
        pos += 1
    return AffineCoords(chart=j, w=out)


def hopf_project(v) -> Tuple[np.ndarray, ProjectivePoint]:
    """C^{n+1} minus 0 -> S^{2n+1} -> CP^n"""
    z = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(z)
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidInputError("Hopf projection needs a finite non-zero vector")
    return z / norm, ProjectivePoint(z)


def proj_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """
    Geodesic (Fubini-Study) distance arccos |<p, q>| in [0, pi/2],
    evaluated through atan2 so that nearby classes keep full precision.
    Angles within rounding of zero are reported as 0.
    """
    if p.n != q.n:
        raise InvalidInputError(f"dimension mismatch: CP^{p.n} vs CP^{q.n}")
    inner = np.vdot(p.homog, q.homog)
    perp = np.linalg.norm(q.homog - inner * p.homog)
    angle = float(np.arctan2(perp, abs(inner)))
    return 0.0 if angle <= _ROUNDING_ANGLE else angle


def bump(x):
    """B(x) = exp(-(x^2 + 1)/(x^2 - 1)^2) on |x| < 1, zero elsewhere"""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-(xi ** 2 + 1.0) / (xi ** 2 - 1.0) ** 2)
    return out if out.ndim else float(out)


def partition_functions(p: ProjectivePoint) -> np.ndarray:
    """
    lambda_j(p), smooth, equal to 1 on K_j and supported where
    |z_j| > SUPPORT_RATIO * max|z_k| (so inside U_j).
    """
    ratios = np.abs(p.homog) / np.max(np.abs(p.homog))
    s = np.clip((K_RATIO - ratios) / (K_RATIO - SUPPORT_RATIO), 0.0, 1.0)
    up = bump(s)
    down = bump(1.0 - s)
    return up / (up + down)


def realify(w: np.ndarray) -> np.ndarray:
    """(re w_0, im w_0, re w_1, im w_1, ...)"""
    return np.column_stack([w.real, w.imag]).reshape(-1)


def embed(p: ProjectivePoint) -> np.ndarray:
    """
    gamma(p) = (sigma_0, ..., sigma_n, lambda_0, ..., lambda_n) in
    R^{(n+1)(2n+1)}, sigma_j = lambda_j * phi_j realified and zero off U_j.
    """
    n = p.n
    lam = partition_functions(p)
    blocks = []
    for j in range(n + 1):
        if lam[j] > 0.0:
            blocks.append(lam[j] * realify(to_chart(p, j).w))
        else:
            blocks.append(np.zeros(2 * n))
    blocks.append(lam)
    return np.concatenate(blocks)


def random_point(rng: np.random.Generator, n: int) -> ProjectivePoint:
    return ProjectivePoint(rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1))
