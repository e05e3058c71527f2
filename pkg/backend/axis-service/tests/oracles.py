"""
Independent reference computations used only by the test suite
"""
import numpy as np
import sympy


def durand_kerner(coeffs, iterations: int = 2000, tol: float = 1e-15) -> np.ndarray:
    """Simultaneous (Weierstrass) iteration for the roots of a monic polynomial c_0..c_{d-1}"""
    c = np.asarray(coeffs, dtype=np.complex128)
    d = c.size

    def p(x):
        acc = np.ones_like(x)
        for ck in c[::-1]:
            acc = acc * x + ck
        return acc

    radius = 1.0 + np.max(np.abs(c))
    roots = radius * (0.4 + 0.9j) ** np.arange(d)
    for _ in range(iterations):
        diffs = roots[:, None] - roots[None, :]
        np.fill_diagonal(diffs, 1.0)
        step = p(roots) / np.prod(diffs, axis=1)
        roots = roots - step
        if np.max(np.abs(step)) < tol * radius:
            break
    return roots


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def lu_det(m) -> complex:
    """Determinant by Gaussian elimination with partial pivoting"""
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    det = 1.0 + 0j
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0:
            return 0j
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det *= a[col, col]
        a[col + 1:, col:] -= np.outer(a[col + 1:, col] / a[col, col], a[col, col:])
    return det


def char_poly(a) -> np.ndarray:
    """Faddeev-LeVerrier: coefficients of det(x I - A), highest degree first"""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def real_roots_by_bisection(coeffs, bound: float, grid: int = 20000, tol: float = 1e-13) -> np.ndarray:
    """Real roots of a real polynomial on [-bound, bound] from sign changes on a grid"""

    def p(x):
        return np.polyval(coeffs, x)

    xs = np.linspace(-bound, bound, grid + 1)
    values = p(xs)
    roots = []
    for lo, hi, f_lo, f_hi in zip(xs[:-1], xs[1:], values[:-1], values[1:]):
        if f_lo == 0.0:
            roots.append(lo)
            continue
        if f_lo * f_hi > 0.0:
            continue
        while hi - lo > tol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            f_mid = p(mid)
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


def angle_sweep_winding(F, center: complex, radius: float, nodes: int = 4096) -> float:
    """Total change of arg F along the circle, divided by 2 pi"""
    theta = 2.0 * np.pi * np.arange(nodes + 1) / nodes
    values = F(center + radius * np.exp(1j * theta))
    return float(np.sum(np.diff(np.unwrap(np.angle(values)))) / (2.0 * np.pi))


def symbolic_char_poly(matrix_entries):
    """Expanded det(x I - C) for a matrix of sympy-compatible rationals"""
    x = sympy.Symbol("x")
    c = sympy.Matrix(matrix_entries)
    return sympy.Poly(sympy.expand((x * sympy.eye(c.shape[0]) - c).det()), x)


def random_hermitian(rng: np.random.Generator, order: int) -> np.ndarray:
    x = rng.standard_normal((order, order)) + 1j * rng.standard_normal((order, order))
    return 0.5 * (x + x.conj().T)


def outer_projector(v) -> np.ndarray:
    """B = b b* for the normalized vector b"""
    b = np.asarray(v, dtype=np.complex128)
    b = b / np.linalg.norm(b)
    return np.outer(b, b.conj())
