"""
Vector fields: the axis field of a matrix (ambient and per chart),
the radial field and Euler's identity, the Milnor-Hopf exemplar and its flow,
the odd-order hedgehog field, sphere fields and the tubular extension
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.utils.errors import InvalidInputError, NearSingularError, TubeDomainError
from app.utils.forms import sphere_tangent_frame
from app.utils.linalg import as_complex_matrix, as_real_matrix
from app.utils.projective import AffineCoords, check_chart

logger = logging.getLogger(__name__)

SphereField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AmbientField:
    """Phi_A = sum_j sum_i a_ji z_i d/dz_j on C^{n+1}"""
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_complex_matrix(self.matrix))

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ChartField:
    """The descended field of a matrix written in chart U_j"""
    matrix: np.ndarray
    chart: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_complex_matrix(self.matrix))
        check_chart(self.chart, self.matrix.shape[0] - 1)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1


def evaluate_ambient(f: AmbientField, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.size != f.order:
        raise InvalidInputError(f"vector length {z.size} does not match order {f.order}")
    return f.matrix @ z


def radial_field(z) -> np.ndarray:
    """Euler field Delta = sum z_j d/dz_j"""
    return np.asarray(z, dtype=np.complex128).copy()


def chart_field_values(a: np.ndarray, j: int, w: np.ndarray) -> np.ndarray:
    """F_k(w) = (A z)_k - z_k (A z)_j with z_j = 1, component j dropped"""
    z = np.insert(w, j, 1.0)
    az = a @ z
    return np.delete(az - z * az[j], j)


def chart_jacobian_values(a: np.ndarray, j: int, w: np.ndarray) -> np.ndarray:
    """dF_k/dw_m = a_km - delta_km (A z)_j - z_k a_jm over k, m != j"""
    z = np.insert(w, j, 1.0)
    az_j = a[j] @ z
    full = a - np.outer(z, a[j]) - az_j * np.eye(a.shape[0])
    keep = np.delete(np.arange(a.shape[0]), j)
    return full[np.ix_(keep, keep)]


def _coords(f: ChartField, w) -> np.ndarray:
    if isinstance(w, AffineCoords):
        if w.chart != f.chart:
            raise InvalidInputError(f"coordinates live in chart {w.chart}, field in chart {f.chart}")
        w = w.w
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.size != f.n:
        raise InvalidInputError(f"expected {f.n} affine coordinates, got {w.size}")
    return w


def evaluate_chart(f: ChartField, w) -> np.ndarray:
    return chart_field_values(f.matrix, f.chart, _coords(f, w))


def chart_jacobian(f: ChartField, w) -> np.ndarray:
    return chart_jacobian_values(f.matrix, f.chart, _coords(f, w))


def chart_eigenvalue(f: ChartField, w) -> complex:
    """lambda = (A z)_j / z_j for the lift z (z_j = 1)"""
    z = np.insert(_coords(f, w), f.chart, 1.0)
    return complex(f.matrix[f.chart] @ z)


def is_radial(f: ChartField, w, tol_radial: Optional[float] = None) -> bool:
    """A z = lambda z for the lift of w, within tol_radial * ||A||_F * ||z||"""
    tol_radial = settings.TOL_RADIAL if tol_radial is None else tol_radial
    z = np.insert(_coords(f, w), f.chart, 1.0)
    lam = chart_eigenvalue(f, w)
    residual = np.linalg.norm(f.matrix @ z - lam * z)
    return bool(residual <= tol_radial * np.linalg.norm(f.matrix) * np.linalg.norm(z))


def realified_determinant(jac: np.ndarray) -> float:
    """Determinant of the real 2n x 2n form of a complex n x n matrix"""
    real = np.block([[jac.real, -jac.imag], [jac.imag, jac.real]])
    return float(np.linalg.det(real))


# --- homogeneous polynomials and Euler's identity -------------------------

Monomial = Tuple[complex, Sequence[int]]


def _check_homogeneous(terms: Sequence[Monomial]) -> Tuple[int, int]:
    if not terms:
        raise InvalidInputError("polynomial needs at least one term")
    degrees = {int(sum(e)) for _, e in terms}
    nvars = {len(e) for _, e in terms}
    if len(degrees) != 1:
        raise InvalidInputError(f"terms have mixed total degrees {sorted(degrees)}")
    if len(nvars) != 1:
        raise InvalidInputError("terms disagree on the number of variables")
    if any(k < 0 for _, e in terms for k in e):
        raise InvalidInputError("exponents must be non-negative")
    return degrees.pop(), nvars.pop()


def evaluate_polynomial(terms: Sequence[Monomial], p) -> complex:
    p = np.asarray(p, dtype=np.complex128)
    return complex(sum(c * np.prod(p ** np.asarray(e)) for c, e in terms))


def euler_identity_check(terms: Sequence[Monomial], p) -> Tuple[complex, complex]:
    """
    Returns (sum_j z_j df/dz_j, d * f) at p for a homogeneous polynomial
    given as (coefficient, exponent multi-index) pairs.
    """
    d, nvars = _check_homogeneous(terms)
    p = np.asarray(p, dtype=np.complex128).reshape(-1)
    if p.size != nvars:
        raise InvalidInputError(f"point has {p.size} coordinates, polynomial {nvars} variables")
    lhs = 0j
    for j in range(nvars):
        partial = 0j
        for c, e in terms:
            e = np.asarray(e)
            if e[j] == 0:
                continue
            lowered = e.copy()
            lowered[j] -= 1
            partial += c * e[j] * np.prod(p ** lowered)
        lhs += p[j] * partial
    return complex(lhs), d * evaluate_polynomial(terms, p)


# --- Milnor-Hopf exemplar -------------------------------------------------

def milnor_hopf_matrix(n: int) -> np.ndarray:
    """L = diag(0, 1, ..., n)"""
    if n < 0:
        raise InvalidInputError("n must be non-negative")
    return np.diag(np.arange(n + 1, dtype=np.complex128))


def milnor_hopf_flow(n: int, w0, t: float, chart: int = 0) -> np.ndarray:
    """Closed-form flow of the exemplar in chart j: w_k -> e^{(k - j) t} w_k"""
    if n < 1:
        raise InvalidInputError("the exemplar flow needs n >= 1")
    check_chart(chart, n)
    w0 = np.asarray(w0, dtype=np.complex128).reshape(-1)
    if w0.size != n:
        raise InvalidInputError(f"expected {n} coordinates, got {w0.size}")
    rates = np.delete(np.arange(n + 1), chart) - chart
    return w0 * np.exp(rates * t)


def integrate_rk4(field: Callable[[np.ndarray], np.ndarray], w0, t: float, step: float = 1e-3) -> np.ndarray:
    """Classical fixed-step RK4 from 0 to t"""
    w = np.asarray(w0, dtype=np.complex128).copy()
    if t == 0.0:
        return w
    steps = max(1, int(np.ceil(abs(t) / step)))
    h = t / steps
    for _ in range(steps):
        k1 = field(w)
        k2 = field(w + 0.5 * h * k1)
        k3 = field(w + 0.5 * h * k2)
        k4 = field(w + h * k3)
        w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return w


# --- hedgehog field on even spheres ---------------------------------------

def hedgehog_field(a, y, tol: float = 1e-12) -> np.ndarray:
    """
    sigma(y) = a(y) - (a(y).y) y with a(y) = A y / ||A y||: the tangential
    part of the normalized image, vanishing exactly at real eigenvectors.
    """
    a = as_real_matrix(a)
    if a.shape[0] % 2 == 0:
        raise InvalidInputError("hedgehog field needs a matrix of odd order")
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size != a.shape[0]:
        raise InvalidInputError(f"vector length {y.size} does not match order {a.shape[0]}")
    ay = a @ y
    norm = np.linalg.norm(ay)
    if norm <= tol * max(1.0, float(np.linalg.norm(a))):
        raise NearSingularError("A y vanishes; route through null_vector")
    unit = ay / norm
    return unit - np.dot(unit, y) * y


def hedgehog_jacobian(a, y) -> np.ndarray:
    """Ambient Jacobian of sigma at y (y need not be exactly unit)"""
    a = as_real_matrix(a)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    ay = a @ y
    norm = np.linalg.norm(ay)
    if norm == 0.0:
        raise NearSingularError("A y vanishes; route through null_vector")
    unit = ay / norm
    d_unit = (a - np.outer(unit, unit @ a)) / norm
    return d_unit - np.outer(y, d_unit.T @ y + unit) - np.dot(unit, y) * np.eye(y.size)


# --- sphere fields, stereographic identification --------------------------

def north_south_field(p: np.ndarray) -> np.ndarray:
    """v(p) = e_3 - (e_3 . p) p, zeros at the poles"""
    p = np.asarray(p, dtype=np.float64)
    e3 = np.zeros(p.shape[-1])
    e3[-1] = 1.0
    return e3 - p[..., -1:] * p


def stereographic(w) -> np.ndarray:
    """C -> S^2 minus the north pole, w = 0 to the south pole"""
    w = np.asarray(w, dtype=np.complex128)
    r2 = np.abs(w) ** 2
    return np.stack([2 * w.real, 2 * w.imag, r2 - 1.0], axis=-1) / (r2 + 1.0)[..., None]


def inverse_stereographic(x: np.ndarray) -> np.ndarray:
    """S^2 minus the north pole -> C"""
    x = np.asarray(x, dtype=np.float64)
    return (x[..., 0] + 1j * x[..., 1]) / (1.0 - x[..., 2])


def cp1_sphere_field(matrix, h: float = 1e-6) -> SphereField:
    """
    Push the axis field of a 2x2 matrix down to S^2 through the
    stereographic identification CP^1 = S^2 (chart 0 -> w, chart 1 -> 1/w).
    The chart expression is pushed forward by central differences.
    """
    a = as_complex_matrix(matrix)
    if a.shape != (2, 2):
        raise InvalidInputError("CP^1 field needs a 2x2 matrix")

    def sigma0(w):
        return stereographic(w)

    def sigma1(u):
        # stereographic(1/u) written without the reciprocal, u = 0 to the north pole
        u = np.asarray(u, dtype=np.complex128)
        r2 = np.abs(u) ** 2
        return np.stack([2 * u.real, -2 * u.imag, 1.0 - r2], axis=-1) / (1.0 + r2)[..., None]

    def field(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        flat = x.reshape(-1, 3)
        out = np.empty_like(flat)
        south = flat[:, 2] <= 0.0
        if np.any(south):
            w = inverse_stereographic(flat[south])
            # chart 0: F(w) = (Az)_1 - w (Az)_0 with z = (1, w)
            fw = (a[1, 0] + a[1, 1] * w) - w * (a[0, 0] + a[0, 1] * w)
            out[south] = (sigma0(w + h * fw) - sigma0(w - h * fw)) / (2 * h)
        if np.any(~south):
            top = flat[~south]
            u = (top[:, 0] - 1j * top[:, 1]) / (1.0 + top[:, 2])
            # chart 1: F(u) = (Az)_0 - u (Az)_1 with z = (u, 1)
            fu = (a[0, 0] * u + a[0, 1]) - u * (a[1, 0] * u + a[1, 1])
            out[~south] = (sigma1(u + h * fu) - sigma1(u - h * fu)) / (2 * h)
        return out.reshape(x.shape)

    return field


def milnor_hopf_sphere_field(h: float = 1e-6) -> SphereField:
    """The CP^1 exemplar diag(0, 1) as a tangent field on S^2"""
    return cp1_sphere_field(milnor_hopf_matrix(1), h=h)


# --- tubular neighborhood of the unit sphere -------------------------------

class UnitSphere:
    """S^{m-1} in R^m with the closed-form nearest-point projection"""

    reach = 1.0

    def __init__(self, ambient_dim: int = 3):
        self.ambient_dim = ambient_dim

    def project(self, q: np.ndarray) -> np.ndarray:
        return q / np.linalg.norm(q, axis=-1, keepdims=True)

    def distance(self, q: np.ndarray) -> np.ndarray:
        return np.abs(np.linalg.norm(q, axis=-1) - 1.0)


@dataclass(frozen=True)
class TubularConfig:
    epsilon: float
    surface: UnitSphere = UnitSphere()

    def __post_init__(self):
        if not 0.0 < self.epsilon < self.surface.reach:
            raise InvalidInputError(f"epsilon {self.epsilon} must lie in (0, reach={self.surface.reach})")


def tubular_extend(cfg: TubularConfig, v: SphereField, q) -> np.ndarray:
    """w(q) = [q - pi(q)] + v(pi(q)) on the closed tube of radius epsilon"""
    q = np.asarray(q, dtype=np.float64)
    norms = np.linalg.norm(q, axis=-1)
    if np.any(norms == 0.0) or np.any(cfg.surface.distance(q) > cfg.epsilon * (1.0 + 1e-12)):
        raise TubeDomainError(f"point outside the tube of radius {cfg.epsilon}")
    base = cfg.surface.project(q)
    return (q - base) + v(base)


def tubular_differential(cfg: TubularConfig, v: SphereField, q, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian dw(q) of the tube extension"""
    h = settings.FD_STEP if h is None else h
    q = np.asarray(q, dtype=np.float64)
    cols = []
    for e in np.eye(q.size):
        cols.append((tubular_extend(cfg, v, q + h * e) - tubular_extend(cfg, v, q - h * e)) / (2 * h))
    return np.column_stack(cols)


def _retract(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def tangent_jacobian(v: SphereField, x, h: Optional[float] = None) -> np.ndarray:
    """2x2 Jacobian of a tangent field on S^2 in the oriented frame at x"""
    h = settings.FD_STEP if h is None else h
    x = np.asarray(x, dtype=np.float64)
    frame = sphere_tangent_frame(x)
    jac = np.empty((frame.shape[-1], frame.shape[-1]))
    for b in range(frame.shape[-1]):
        t = frame[:, b]
        dv = (v(_retract(x + h * t)) - v(_retract(x - h * t))) / (2 * h)
        jac[:, b] = frame.T @ dv
    return jac


def fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(1.0 - z ** 2)
    phi = np.pi * (1.0 + 5 ** 0.5) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def find_sphere_zeros(
    v: SphereField,
    seeds: int = 400,
    max_iter: int = 40,
    tol: float = 1e-10,
    merge: float = 1e-6,
    h: Optional[float] = None,
) -> np.ndarray:
    """
    Zeros of a tangent field on S^2: batched tangent-plane Newton from a
    Fibonacci seed set, then de-duplication.
    """
    h = settings.FD_STEP if h is None else h
    x = fibonacci_sphere(seeds)
    for _ in range(max_iter):
        frame = sphere_tangent_frame(x)
        f = np.einsum("mib,mi->mb", frame, v(x))
        jac = np.empty((x.shape[0], 2, 2))
        for b in range(2):
            t = frame[:, :, b]
            dv = (v(_retract(x + h * t)) - v(_retract(x - h * t))) / (2 * h)
            jac[:, :, b] = np.einsum("mia,mi->ma", frame, dv)
        finite = np.all(np.isfinite(f), axis=1) & np.all(np.isfinite(jac), axis=(1, 2))
        if not np.all(finite):
            logger.warning(f"Dropping {int(np.sum(~finite))} seeds with non-finite field values")
            x, frame, f, jac = x[finite], frame[finite], f[finite], jac[finite]
        if x.shape[0] == 0:
            break
        step = -np.einsum("mab,mb->ma", np.linalg.pinv(jac), f)
        x = _retract(x + np.einsum("mib,mb->mi", frame, step))
    found = []
    for p in x[np.linalg.norm(v(x), axis=-1) <= tol]:
        if all(np.linalg.norm(p - q) > merge for q in found):
            found.append(p)
    logger.info(f"Sphere field zero scan found {len(found)} zeros")
    return np.array(found).reshape(-1, 3)
