"""
Dense complex matrix helpers: companion matrices, null vectors,
the L/K operators on Hermitian matrices and the singular-combination search
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.config import settings
from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolynomialCoeffs:
    """Monic polynomial λ^d + c_{d-1} λ^{d-1} + ... + c_0, stored as c_0..c_{d-1}"""
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size < 1:
            raise InvalidInputError("polynomial degree must be at least 1")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return int(self.coeffs.size)

    def __call__(self, x):
        """Evaluate p(x) by Horner's rule"""
        acc = np.ones_like(np.asarray(x, dtype=np.complex128))
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate a square matrix of finite complex scalars"""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise InvalidInputError(f"{name} must have order >= 1")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


def as_real_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise InvalidInputError(f"{name} must be real")
        a = a.real
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


def hermitian_defect(b: np.ndarray) -> float:
    """max |b_ji - conj(b_ij)| normalized by the Frobenius norm"""
    scale = np.linalg.norm(b)
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(b - b.conj().T)) / scale)


def as_hermitian_matrix(b, tol_herm: Optional[float] = None) -> np.ndarray:
    tol_herm = settings.TOL_HERM if tol_herm is None else tol_herm
    h = as_complex_matrix(b, name="hermitian matrix")
    if hermitian_defect(h) > tol_herm:
        raise InvalidInputError("matrix is not Hermitian within tolerance")
    return h


def companion(p: PolynomialCoeffs) -> np.ndarray:
    """
    Companion matrix with 1's on the first subdiagonal and the negated
    coefficients -c_0..-c_{d-1} down the last column
    """
    if p.degree < 1:
        raise InvalidInputError("companion matrix needs degree >= 1")
    d = p.degree
    c = np.zeros((d, d), dtype=np.complex128)
    if d > 1:
        c[np.arange(1, d), np.arange(d - 1)] = 1.0
    c[:, -1] = -p.coeffs
    return c


def null_vector(
    m,
    tol_rank: Optional[float] = None,
    tol_res: Optional[float] = None,
) -> Optional[np.ndarray]:
    """
    Kernel vector of a numerically rank-deficient matrix.

    Row echelon form by Gaussian elimination with scaled partial pivoting;
    a column whose best scaled pivot falls below the rank threshold is free.
    Returns None for full-rank input.
    """
    tol_rank = settings.TOL_RANK if tol_rank is None else tol_rank
    tol_res = settings.TOL_RES if tol_res is None else tol_res

    a = as_complex_matrix(m).copy()
    order = a.shape[0]
    row_norms = np.linalg.norm(a, axis=1)
    threshold = tol_rank * order * float(np.max(row_norms))
    scale = np.where(row_norms > 0.0, row_norms, 1.0)

    pivots = []  # (row, column)
    row = 0
    for col in range(order):
        if row >= order:
            break
        candidates = np.abs(a[row:, col])
        if np.max(candidates) <= threshold:
            continue
        ratios = np.where(candidates > threshold, candidates / scale[row:], -1.0)
        best = row + int(np.argmax(ratios))
        if best != row:
            a[[row, best]] = a[[best, row]]
            scale[[row, best]] = scale[[best, row]]
        factors = a[row + 1:, col] / a[row, col]
        a[row + 1:, col:] -= np.outer(factors, a[row, col:])
        a[row + 1:, col] = 0.0
        pivots.append((row, col))
        row += 1

    if len(pivots) == order:
        return None

    pivot_cols = {c for _, c in pivots}
    free = next(c for c in range(order) if c not in pivot_cols)
    v = np.zeros(order, dtype=np.complex128)
    v[free] = 1.0
    for r, c in reversed(pivots):
        v[c] = -np.dot(a[r, c + 1:], v[c + 1:]) / a[r, c]

    original = as_complex_matrix(m)
    residual = np.linalg.norm(original @ v)
    bound = tol_res * np.linalg.norm(original) * np.linalg.norm(v)
    if residual > bound:
        logger.warning(
            f"Rank-deficient matrix but kernel vector residual {residual:.3e} exceeds {bound:.3e}"
        )
        return None
    return v / np.linalg.norm(v)


def lk_operators(a, b, tol_herm: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    L(B) = (AB + BA*)/2 and K(B) = (AB - BA*)/(2i).

    Both are Hermitian whenever B is, and the two real operators commute.
    """
    a = as_complex_matrix(a)
    h = as_hermitian_matrix(b, tol_herm)
    if a.shape != h.shape:
        raise InvalidInputError(f"order mismatch: {a.shape[0]} vs {h.shape[0]}")
    ab = a @ h
    ba = h @ a.conj().T
    return 0.5 * (ab + ba), (ab - ba) / 2j


def _adjugate(m: np.ndarray) -> np.ndarray:
    """Adjugate of a real square matrix via its SVD (stable near singularity)"""
    u, s, vt = np.linalg.svd(m)
    q = s.size
    cofactor = np.array([np.prod(np.delete(s, i)) for i in range(q)])
    sign = np.linalg.det(u) * np.linalg.det(vt)
    return sign * (vt.T * cofactor) @ u.T


def find_singular_combination(
    a,
    b,
    c,
    seed: int = 0,
    restarts: Optional[int] = None,
    tol_det: Optional[float] = None,
    max_iter: int = 100,
) -> Optional[Tuple[np.ndarray, float]]:
    """
    Search the unit sphere of coefficient triples for a singular combination
    αa + βb + γc of three real matrices.

    Each restart runs a projected Gauss-Newton descent on |det|^2: the
    tangential gradient of det is taken from the adjugate and the step drives
    det toward zero along it. Returns (triple, |det|) or None when the budget
    is spent; a failed search proves nothing.
    """
    restarts = settings.SINGULAR_COMBO_RESTARTS if restarts is None else restarts
    tol_det = settings.TOL_DET if tol_det is None else tol_det

    mats = [as_real_matrix(x, name=n) for x, n in zip((a, b, c), "abc")]
    if len({x.shape for x in mats}) != 1:
        raise InvalidInputError("coefficient matrices must share one order")
    stack = np.stack(mats)
    order = stack.shape[1]
    scale = max(1.0, float(np.prod([np.linalg.norm(x) for x in mats])) ** (order / 3.0))
    rng = np.random.default_rng(seed)

    for attempt in range(restarts):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        for _ in range(max_iter):
            m = np.tensordot(u, stack, axes=1)
            det = float(np.linalg.det(m))
            adj = _adjugate(m)
            grad = np.array([np.sum(adj.T * x) for x in mats])
            grad -= np.dot(grad, u) * u
            g2 = float(np.dot(grad, grad))
            if det == 0.0 or g2 == 0.0:
                break
            step = -det * grad / g2
            u = u + step
            u /= np.linalg.norm(u)
            if np.linalg.norm(step) < 1e-15:
                break
        det = abs(float(np.linalg.det(np.tensordot(u, stack, axes=1))))
        if det <= tol_det * scale:
            logger.info(f"Singular combination found after {attempt + 1} restarts, |det|={det:.3e}")
            return u, det

    logger.warning(f"No singular combination found in {restarts} restarts")
    return None
