"""
Differential forms on R^N and quadrature on S^{N-1}: the Hodge duals of the
coordinate 1-forms, tau = sum x_i dx_i and omega = *tau, sphere areas and
ball volumes, and the quadrature rules used for degree integrals
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

SCHEMES = ("counting", "trapezoid-circle", "product-gauss", "monte-carlo")


class HodgeDual(NamedTuple):
    """*dx_i = sign * dx_1 ^ ... ^ (omit dx_i) ^ ... ^ dx_N"""
    sign: int
    omit: int


def hodge_star_1form(N: int, i: int) -> HodgeDual:
    """Roster of the Hodge star on coordinate 1-forms: sign (-1)^(i-1)"""
    if N < 1:
        raise InvalidInputError("ambient dimension must be >= 1")
    if not 1 <= i <= N:
        raise InvalidInputError(f"index {i} outside [1, {N}]")
    return HodgeDual(sign=-1 if (i - 1) % 2 else 1, omit=i)


@dataclass(frozen=True)
class CoordinateOneForm:
    """A 1-form sum f_i(x) dx_i on R^N"""
    N: int
    coeffs: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x: np.ndarray, vec: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...i->...", self.coeffs(x), vec)


def tau_form(N: int) -> CoordinateOneForm:
    """tau = sum x_i dx_i, the dual of the radial field"""
    if N < 1:
        raise InvalidInputError("ambient dimension must be >= 1")
    return CoordinateOneForm(N=N, coeffs=lambda x: np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class SphereVolumeForm:
    """omega = *tau = sum (-1)^(i-1) x_i dx_1 ^ ... ^ (omit dx_i) ^ ... ^ dx_N"""
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInputError("ambient dimension must be >= 1")

    def __call__(self, y: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """
        Evaluate omega at points y (..., N) on N-1 tangent vectors given as
        columns of vectors (..., N, N-1), expanding along the Hodge roster.
        """
        y = np.asarray(y, dtype=np.float64)
        vectors = np.asarray(vectors, dtype=np.float64)
        total = np.zeros(y.shape[:-1])
        for i in range(1, self.N + 1):
            dual = hodge_star_1form(self.N, i)
            minor = np.delete(vectors, dual.omit - 1, axis=-2)
            det = np.linalg.det(minor) if self.N > 1 else np.ones(y.shape[:-1])
            total = total + dual.sign * y[..., i - 1] * det
        return total


def sphere_area(N: int) -> float:
    """
    A(S^{N-1}) from the closed forms: 2 pi^a/(a-1)! for N = 2a, and
    2^{a+1} pi^a/(1*3*5*...*(N-2)) for N = 2a+1; A(S^0) = 2.
    """
    if N < 1:
        raise InvalidInputError("sphere_area needs N >= 1")
    if N == 1:
        return 2.0
    a = N // 2
    if N % 2 == 0:
        return 2.0 * math.pi ** a / math.factorial(a - 1)
    odd_product = math.prod(range(1, N - 1, 2))
    return 2.0 ** (a + 1) * math.pi ** a / odd_product


def ball_volume(N: int) -> float:
    """Vol(B^N) = pi^{N/2} / Gamma(N/2 + 1)"""
    if N < 1:
        raise InvalidInputError("ball_volume needs N >= 1")
    return float(math.pi ** (N / 2.0) / special.gamma(N / 2.0 + 1.0))


def sphere_tangent_frame(x: np.ndarray) -> np.ndarray:
    """
    Orthonormal tangent frames at points of S^{N-1}, shape (..., N, N-1),
    oriented so that det[x, frame] = +1 (outer normal first).
    """
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1, x.shape[-1])
    m, dim = flat.shape
    basis = np.concatenate([flat[:, :, None], np.broadcast_to(np.eye(dim), (m, dim, dim))], axis=2)
    q, _ = np.linalg.qr(basis)
    q = q[:, :, :dim].copy()
    # first column spans x; replace it by x itself before fixing orientation
    q[:, :, 0] = flat
    if dim > 1:
        orient = np.sign(np.linalg.det(q))
        orient[orient == 0] = 1.0
        q[:, :, -1] *= orient[:, None]
    return q[:, :, 1:].reshape(x.shape + (dim - 1,))


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes and positive weights on S^{N-1}; orientation is -1 only on S^0's lower point"""
    N: int
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    est_error: float
    orientation: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown quadrature scheme {self.scheme!r}")
        if self.orientation is None:
            object.__setattr__(self, "orientation", np.ones(self.weights.shape))

    @property
    def size(self) -> int:
        return int(self.weights.size)


def counting_quadrature() -> SphereQuadrature:
    """S^0 = {+1, -1} with counting measure, lower point negatively oriented"""
    return SphereQuadrature(
        N=1,
        nodes=np.array([[1.0], [-1.0]]),
        weights=np.ones(2),
        scheme="counting",
        est_error=0.0,
        orientation=np.array([1.0, -1.0]),
    )


def trapezoid_circle(nodes: int) -> SphereQuadrature:
    """Composite trapezoid on S^1, spectrally accurate for periodic integrands"""
    if nodes < 3:
        raise InvalidInputError("circle quadrature needs at least 3 nodes")
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    weights = np.full(nodes, 2.0 * np.pi / nodes)
    return SphereQuadrature(
        N=2,
        nodes=np.column_stack([np.cos(theta), np.sin(theta)]),
        weights=weights,
        scheme="trapezoid-circle",
        est_error=float(abs(weights.sum() - 2.0 * np.pi) + 64 * np.finfo(float).eps * 2.0 * np.pi),
    )


def _blumenson_polar(n_polar: int, power: int):
    """Gauss rule for int_0^pi sin^power(theta) g(theta) d theta"""
    if power == 1:
        u, w = special.roots_legendre(n_polar)
        return np.arccos(u)[::-1], w[::-1]
    x, w = special.roots_legendre(n_polar)
    theta = 0.5 * np.pi * (x + 1.0)
    return theta, 0.5 * np.pi * w * np.sin(theta) ** power


def product_gauss(N: int, n_polar: int, n_azimuth: int) -> SphereQuadrature:
    """
    Gauss-Legendre in the polar Blumenson angles times trapezoid in the
    azimuth, for S^2 (N = 3) and S^3 (N = 4). Area element
    sin^{N-2}(theta_1) ... sin(theta_{N-2}) d theta_1 ... d phi.
    """
    if N not in (3, 4):
        raise InvalidInputError("product Gauss rule is built for N = 3 or 4")
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    w_phi = np.full(n_azimuth, 2.0 * np.pi / n_azimuth)
    if N == 3:
        t1, w1 = _blumenson_polar(n_polar, 1)
        T1, P = np.meshgrid(t1, phi, indexing="ij")
        nodes = np.stack([np.cos(T1), np.sin(T1) * np.cos(P), np.sin(T1) * np.sin(P)], axis=-1)
        weights = np.outer(w1, w_phi)
    else:
        t1, w1 = _blumenson_polar(n_polar, 2)
        t2, w2 = _blumenson_polar(n_polar, 1)
        T1, T2, P = np.meshgrid(t1, t2, phi, indexing="ij")
        nodes = np.stack(
            [
                np.cos(T1),
                np.sin(T1) * np.cos(T2),
                np.sin(T1) * np.sin(T2) * np.cos(P),
                np.sin(T1) * np.sin(T2) * np.sin(P),
            ],
            axis=-1,
        )
        weights = w1[:, None, None] * w2[None, :, None] * w_phi[None, None, :]
    nodes = nodes.reshape(-1, N)
    weights = weights.reshape(-1)
    area = sphere_area(N)
    return SphereQuadrature(
        N=N,
        nodes=nodes,
        weights=weights,
        scheme="product-gauss",
        est_error=float(abs(weights.sum() - area) + 1e3 * np.finfo(float).eps * area),
    )


def monte_carlo(N: int, samples: int, seed: int = 0) -> SphereQuadrature:
    """Antithetic Monte Carlo on S^{N-1}; est_error = 3 sigma / sqrt(M) for |f| <= 1"""
    if N < 2:
        raise InvalidInputError("Monte Carlo quadrature needs N >= 2")
    rng = np.random.default_rng(seed)
    half = max(1, samples // 2)
    g = rng.standard_normal((half, N))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    nodes = np.concatenate([g, -g])
    area = sphere_area(N)
    weights = np.full(nodes.shape[0], area / nodes.shape[0])
    return SphereQuadrature(
        N=N,
        nodes=nodes,
        weights=weights,
        scheme="monte-carlo",
        est_error=float(3.0 * area / np.sqrt(nodes.shape[0])),
    )


def default_quadrature(N: int, circle_nodes: int = 256, n_polar: int = 64,
                       n_azimuth: int = 128, mc_nodes: int = 200000, seed: int = 0) -> SphereQuadrature:
    if N == 1:
        return counting_quadrature()
    if N == 2:
        return trapezoid_circle(circle_nodes)
    if N == 3:
        return product_gauss(3, n_polar, n_azimuth)
    if N == 4:
        return product_gauss(4, max(8, n_polar // 2), max(16, n_azimuth // 2))
    return monte_carlo(N, mc_nodes, seed=seed)
