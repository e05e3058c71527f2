"""
Degree service: boundary integrals of the sphere volume form, Brouwer degrees
of sphere maps, winding numbers of planar fields and the Hopf-lemma harness
on the tubular shell around S^2
"""
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from app.config import Settings, settings as default_settings
from app.models import DegreeEstimate, HopfLemmaResult, StokesReport
from app.utils.errors import (
    InvalidInputError,
    ResolutionError,
    UnresolvedDegreeError,
    UnsupportedConfigurationError,
)
from app.utils.fields import (
    SphereField,
    TubularConfig,
    find_sphere_zeros,
    tangent_jacobian,
    tubular_extend,
)
from app.utils.forms import (
    SphereQuadrature,
    SphereVolumeForm,
    ball_volume,
    default_quadrature,
    sphere_area,
    sphere_tangent_frame,
    trapezoid_circle,
)

logger = logging.getLogger(__name__)

SphereMap = Callable[[np.ndarray], np.ndarray]
PlanarField = Callable[[np.ndarray], np.ndarray]


def _retract(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def identity_map(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def antipodal_map(x: np.ndarray) -> np.ndarray:
    return -np.asarray(x, dtype=np.float64)


def power_map(k: int) -> SphereMap:
    """
    z -> z^k / |z|^(k-1) on the last two coordinates, the others fixed.
    On S^1 this is theta -> k theta; on higher spheres its suspension.
    """

    def apply(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] == 1:
            return np.sign(x) ** abs(k)
        out = x.copy()
        z = x[..., -2] + 1j * x[..., -1]
        r = np.abs(z)
        safe = np.where(r == 0.0, 1.0, r)
        image = np.where(r == 0.0, 0.0, r * (z / safe) ** k)
        out[..., -2] = image.real
        out[..., -1] = image.imag
        return out

    return apply


def parse_map(name: str) -> SphereMap:
    """identity | antipodal | power:k"""
    if name == "identity":
        return identity_map
    if name == "antipodal":
        return antipodal_map
    if name.startswith("power:"):
        try:
            return power_map(int(name.split(":", 1)[1]))
        except ValueError:
            raise InvalidInputError(f"bad power map {name!r}")
    raise InvalidInputError(f"unknown map {name!r}")


class DegreeService:
    """Service for degree and index computations on spheres"""

    def __init__(self, settings: Optional[Settings] = None):
        """Initialize degree service"""
        self.settings = settings or default_settings

    def quadrature(self, N: int, nodes: Optional[int] = None, polar_nodes: Optional[int] = None,
                   seed: int = 0) -> SphereQuadrature:
        """Default rule for S^{N-1} at the configured node counts"""
        cfg = self.settings
        return default_quadrature(
            N,
            circle_nodes=nodes or cfg.CIRCLE_NODES,
            n_polar=polar_nodes or cfg.POLAR_NODES,
            n_azimuth=nodes or cfg.AZIMUTH_NODES,
            mc_nodes=nodes or cfg.MC_NODES,
            seed=seed,
        )

    def integrate_form_on_sphere(self, q: SphereQuadrature, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Weighted, oriented sum of a pulled-back density over the nodes"""
        values = np.asarray(f(q.nodes), dtype=np.float64)
        return float(np.sum(q.weights * q.orientation * values))

    def omega_density(self, q: SphereQuadrature) -> Callable[[np.ndarray], np.ndarray]:
        """omega evaluated on the positively oriented tangent frame at each node"""
        form = SphereVolumeForm(q.N)

        def density(x: np.ndarray) -> np.ndarray:
            return form(x, sphere_tangent_frame(x))

        return density

    def stokes_check(self, N: int, q: Optional[SphereQuadrature] = None) -> StokesReport:
        """int_{S^{N-1}} omega against N * Vol(B^N)"""
        q = q or self.quadrature(N)
        integral = self.integrate_form_on_sphere(q, self.omega_density(q))
        expected = N * ball_volume(N)
        residual = abs(integral - expected)
        # rounding allowance on top of the rule's own error estimate
        passed = residual <= q.est_error + 64 * np.finfo(float).eps * expected
        logger.info(f"Stokes check N={N}: integral={integral:.15g}, expected={expected:.15g}")
        return StokesReport(
            N=N,
            integral=integral,
            expected=expected,
            residual=residual,
            est_error=q.est_error,
            nodes=q.size,
            scheme=q.scheme,
            passed=passed,
        )

    def _pullback_density(self, G: SphereMap, q: SphereQuadrature) -> np.ndarray:
        """
        G*(omega) on the oriented frame at each node: omega at G(x) applied to
        the central-difference pushforwards of the frame vectors.
        """
        x = q.nodes
        N = q.N
        gx = np.asarray(G(x), dtype=np.float64)
        if N == 1:
            return gx[:, 0]
        h = self.settings.FD_STEP
        frame = sphere_tangent_frame(x)
        # columns b of frame, moved to (M, N-1, N) for batched map evaluation
        steps = np.swapaxes(frame, -1, -2)
        plus = np.asarray(G(_retract(x[:, None, :] + h * steps).reshape(-1, N)), dtype=np.float64)
        minus = np.asarray(G(_retract(x[:, None, :] - h * steps).reshape(-1, N)), dtype=np.float64)
        push = ((plus - minus) / (2 * h)).reshape(x.shape[0], N - 1, N)
        return SphereVolumeForm(N)(gx, np.swapaxes(push, -1, -2))

    def degree_estimate(self, G: SphereMap, q: SphereQuadrature) -> DegreeEstimate:
        """Normalized integral of G*(omega), never raising on a large gap"""
        raw = self.integrate_form_on_sphere(q, lambda _: self._pullback_density(G, q)) / sphere_area(q.N)
        return DegreeEstimate.from_raw(raw, q.size)

    def map_degree(self, G: SphereMap, q: SphereQuadrature) -> DegreeEstimate:
        """Brouwer degree of G: S^{N-1} -> S^{N-1}, snapped within SNAP_TOL"""
        estimate = self.degree_estimate(G, q)
        if not estimate.resolved(self.settings.SNAP_TOL):
            logger.warning(f"Degree estimate {estimate.raw:.6f} unresolved at {q.size} nodes")
            raise UnresolvedDegreeError(estimate)
        return estimate

    def winding_number(self, F: PlanarField, center: complex, radius: float,
                       nodes: Optional[int] = None) -> int:
        """
        Winding of w -> F(w) about 0 along |w - center| = radius, as the
        degree of the normalized field on the circle.
        """
        if radius <= 0.0:
            raise InvalidInputError("winding radius must be positive")
        q = trapezoid_circle(nodes or self.settings.WINDING_NODES)
        circle = center + radius * (q.nodes[:, 0] + 1j * q.nodes[:, 1])
        on_circle = np.abs(F(circle))
        if np.min(on_circle) == 0.0 or not np.all(np.isfinite(on_circle)):
            raise ResolutionError(float("nan"), "field vanishes on the winding circle; change the radius")

        def gauss(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=np.float64)
            values = F(center + radius * (x[..., 0] + 1j * x[..., 1]) / np.linalg.norm(x, axis=-1))
            values = values / np.abs(values)
            return np.stack([values.real, values.imag], axis=-1)

        estimate = self.degree_estimate(gauss, q)
        if not estimate.resolved(self.settings.SNAP_TOL):
            raise ResolutionError(estimate.raw)
        return estimate.snapped

    def zero_indices(self, field: SphereField) -> Tuple[np.ndarray, list]:
        """Zeros of a tangent field on S^2 with their indices"""
        zeros = find_sphere_zeros(field, h=self.settings.FD_STEP)
        indices = []
        for x in zeros:
            det = float(np.linalg.det(tangent_jacobian(field, x, h=self.settings.FD_STEP)))
            if abs(det) <= self.settings.TOL_DEGEN:
                raise UnsupportedConfigurationError(
                    f"degenerate zero at {np.round(x, 8).tolist()} (det {det:.3e}); the harness needs nondegenerate zeros"
                )
            indices.append(1 if det > 0 else -1)
        return zeros, indices

    def hopf_lemma_check(
        self,
        field: SphereField,
        cfg: Optional[TubularConfig] = None,
        q: Optional[SphereQuadrature] = None,
    ) -> HopfLemmaResult:
        """
        Degree of w/|w| over the shell boundary of the tube around S^2 against
        the index sum of the field's zeros. The inner sphere of the shell has
        its outward normal pointing at the origin, so its degree enters with
        a minus sign.
        """
        cfg = cfg or TubularConfig(epsilon=self.settings.TUBE_EPSILON)
        q = q or self.quadrature(3)
        if q.N != 3:
            raise InvalidInputError("the tubular harness lives on S^2 (N = 3)")
        zeros, indices = self.zero_indices(field)

        def shell_map(scale: float) -> SphereMap:
            def g(x: np.ndarray) -> np.ndarray:
                w = tubular_extend(cfg, field, scale * _retract(x))
                return w / np.linalg.norm(w, axis=-1, keepdims=True)
            return g

        outer = self.degree_estimate(shell_map(1.0 + cfg.epsilon), q)
        inner = self.degree_estimate(shell_map(1.0 - cfg.epsilon), q)
        total = DegreeEstimate.from_raw(outer.raw - inner.raw, q.size)
        if not total.resolved(self.settings.SNAP_TOL):
            raise UnresolvedDegreeError(total)
        result = HopfLemmaResult(
            lhs=total.snapped,
            rhs=int(sum(indices)),
            lhs_raw=total.raw,
            outer_raw=outer.raw,
            inner_raw=inner.raw,
            zeros=zeros.tolist(),
            indices=indices,
            epsilon=cfg.epsilon,
            nodes=q.size,
        )
        logger.info(f"Hopf lemma check: boundary degree {result.lhs}, index sum {result.rhs}")
        return result

    def disk_gauss_check(self, field: Optional[PlanarField] = None, seeds: int = 64,
                         max_iter: int = 50) -> HopfLemmaResult:
        """
        The same identity on the unit disk: winding of the field along S^1
        against the indices of its zeros inside. Fields act on complex
        points; the default is the radial field v(x) = x.
        """
        field = field or (lambda w: np.asarray(w, dtype=np.complex128))
        q = trapezoid_circle(self.settings.CIRCLE_NODES)
        lhs = self.winding_number(field, 0.0, 1.0, nodes=q.size)
        h = self.settings.FD_STEP

        def jac(w: complex) -> np.ndarray:
            dx = (field(np.array([w + h])) - field(np.array([w - h])))[0] / (2 * h)
            dy = (field(np.array([w + 1j * h])) - field(np.array([w - 1j * h])))[0] / (2 * h)
            return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])

        found = []
        theta = np.pi * (1.0 + 5 ** 0.5) * np.arange(seeds)
        radii = 0.95 * np.sqrt((np.arange(seeds) + 0.5) / seeds)
        for w in radii * np.exp(1j * theta):
            for _ in range(max_iter):
                f = field(np.array([w]))[0]
                step = np.linalg.lstsq(jac(w), -np.array([f.real, f.imag]), rcond=None)[0]
                w = w + step[0] + 1j * step[1]
                if np.hypot(*step) < 1e-14:
                    break
            if abs(w) < 1.0 and abs(field(np.array([w]))[0]) <= 1e-10:
                if all(abs(w - p) > 1e-6 for p in found):
                    found.append(w)
        indices = []
        for w in found:
            det = float(np.linalg.det(jac(w)))
            if abs(det) <= self.settings.TOL_DEGEN:
                raise UnsupportedConfigurationError(f"degenerate zero at {w:.8g} inside the disk")
            indices.append(1 if det > 0 else -1)
        return HopfLemmaResult(
            lhs=lhs,
            rhs=int(sum(indices)),
            lhs_raw=float(lhs),
            outer_raw=float(lhs),
            inner_raw=0.0,
            zeros=[[float(w.real), float(w.imag)] for w in found],
            indices=indices,
            epsilon=0.0,
            nodes=q.size,
        )

    def compare_index_sums(
        self,
        field_a: SphereField,
        field_b: SphereField,
        cfg: Optional[TubularConfig] = None,
        q: Optional[SphereQuadrature] = None,
    ) -> Tuple[HopfLemmaResult, HopfLemmaResult]:
        """Run the shell harness on two fields over the same tube"""
        cfg = cfg or TubularConfig(epsilon=self.settings.TUBE_EPSILON)
        q = q or self.quadrature(3)
        first = self.hopf_lemma_check(field_a, cfg, q)
        second = self.hopf_lemma_check(field_b, cfg, q)
        if first.rhs != second.rhs:
            logger.warning(f"Index sums differ: {first.rhs} vs {second.rhs}")
        return first, second
