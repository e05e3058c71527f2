"""
Axis solver service: locates every zero of the axis field of a matrix
on CP^n by homotopy continuation from the Milnor-Hopf exemplar, then polishes,
deduplicates, indexes and certifies them
"""
import hashlib
import logging
import time
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np

from app.config import Settings, settings as default_settings
from app.models import HedgehogResult, PolyRootsReport, RootRecord, SolveReport, ZeroRecord
from app.services.degree import DegreeService
from app.utils.errors import InvalidInputError, NearSingularError, ResolutionError
from app.utils.fields import (
    chart_field_values,
    chart_jacobian_values,
    hedgehog_field,
    hedgehog_jacobian,
    milnor_hopf_matrix,
)
from app.utils.forms import sphere_tangent_frame
from app.utils.linalg import (
    PolynomialCoeffs,
    as_complex_matrix,
    as_real_matrix,
    companion,
    null_vector,
)
from app.utils.projective import AffineCoords, ProjectivePoint, proj_distance, to_chart

logger = logging.getLogger(__name__)

PathStatus = Literal["tracking", "converged", "diverged", "merged"]


@dataclass
class HomotopyPath:
    """One continuation path, started at the exemplar zero p_k in chart k"""
    start: ProjectivePoint
    gamma: complex
    chart: int
    w: np.ndarray
    t: float = 0.0
    status: PathStatus = "tracking"
    steps: int = 0
    repivots: int = 0

    def __post_init__(self):
        if abs(abs(self.gamma) - 1.0) > 1e-12:
            raise InvalidInputError("homotopy phase must have unit modulus")


def matrix_hash(m) -> str:
    """sha256 over the shape and the complex128 bytes of the matrix"""
    a = np.ascontiguousarray(as_complex_matrix(m))
    digest = hashlib.sha256()
    digest.update(str(a.shape).encode("utf-8"))
    digest.update(a.tobytes())
    return digest.hexdigest()


def _newton_step(jac: np.ndarray, f: np.ndarray) -> np.ndarray:
    try:
        step = np.linalg.solve(jac, -f)
        if np.all(np.isfinite(step)):
            return step
    except np.linalg.LinAlgError:
        pass
    return np.linalg.lstsq(jac, -f, rcond=None)[0]


def _repivot(chart: int, w: np.ndarray) -> Tuple[int, np.ndarray]:
    """Move to the chart of the largest homogeneous coordinate"""
    p = ProjectivePoint(np.insert(w, chart, 1.0))
    return p.pivot, to_chart(p, p.pivot).w


class AxisSolverService:
    """Service for finding and certifying the axes (eigen-directions) of a matrix"""

    def __init__(self, settings: Optional[Settings] = None, degree_service: Optional[DegreeService] = None):
        """Initialize solver service"""
        self.settings = settings or default_settings
        self.degree_service = degree_service or DegreeService(self.settings)

    # --- zero records -----------------------------------------------------

    def _make_record(self, a: np.ndarray, chart: int, w: np.ndarray, path_id: int) -> ZeroRecord:
        n = a.shape[0] - 1
        point = ProjectivePoint(np.insert(w, chart, 1.0))
        if n > 0:
            chart = point.pivot
            w = to_chart(point, chart).w
        z = np.insert(w, chart, 1.0)
        az = a @ z
        lam = complex(az[chart])
        scale = float(np.linalg.norm(a) * np.linalg.norm(z))
        residual = float(np.linalg.norm(az - lam * z) / scale) if scale > 0.0 else 0.0
        if n == 0:
            return ZeroRecord(point=point, chart=0, eigenvalue=lam, residual=residual,
                              jac_det=1.0 + 0j, index=1, degenerate=False, path_id=path_id)

        jac_det = complex(np.linalg.det(chart_jacobian_values(a, chart, w)))
        degenerate = abs(jac_det) <= self.settings.TOL_DEGEN * float(np.linalg.norm(a)) ** n
        index: Optional[int] = 1
        if degenerate:
            index = None
            if n == 1:
                try:
                    index = self.local_winding_cp1(a, AffineCoords(chart=chart, w=w))
                except ResolutionError as e:
                    logger.warning(f"Local winding unresolved at {point}: {str(e)}")
        return ZeroRecord(point=point, chart=chart, eigenvalue=lam, residual=residual,
                          jac_det=jac_det, index=index, degenerate=degenerate, path_id=path_id)

    def newton_polish(self, m, w0: AffineCoords, path_id: int = -1) -> Optional[ZeroRecord]:
        """
        Damped Newton on the chart field from w0. Re-pivots whenever a
        coordinate leaves the box |w_k| <= REPIVOT_THRESHOLD. Returns None
        when the iteration does not settle or the eigen residual fails.
        """
        a = as_complex_matrix(m)
        n = a.shape[0] - 1
        if w0.n != n:
            raise InvalidInputError(f"expected {n} affine coordinates, got {w0.n}")
        if n == 0:
            return self._make_record(a, 0, np.zeros(0, dtype=np.complex128), path_id)

        cfg = self.settings
        chart, w = w0.chart, w0.w.copy()
        converged = False
        for _ in range(cfg.NEWTON_MAX_ITER):
            if np.max(np.abs(w)) > cfg.REPIVOT_THRESHOLD:
                chart, w = _repivot(chart, w)
            f = chart_field_values(a, chart, w)
            f_norm = np.linalg.norm(f)
            if f_norm == 0.0:
                converged = True
                break
            step = _newton_step(chart_jacobian_values(a, chart, w), f)
            damping = 1.0
            while damping > 1e-3:
                if np.linalg.norm(chart_field_values(a, chart, w + damping * step)) < f_norm:
                    break
                damping *= 0.5
            w = w + damping * step
            if not np.all(np.isfinite(w)):
                break
            if np.linalg.norm(damping * step) < 1e-12 * (1.0 + np.linalg.norm(w)):
                converged = True
                break

        if not converged:
            logger.debug(f"Newton polish did not settle from chart {w0.chart}")
            return None
        record = self._make_record(a, chart, w, path_id)
        if record.residual > cfg.TOL_ACCEPT:
            logger.debug(f"Newton polish residual {record.residual:.3e} above acceptance")
            return None
        return record

    # --- homotopy continuation ---------------------------------------------

    def _correct(self, a: np.ndarray, chart: int, w: np.ndarray) -> Optional[np.ndarray]:
        """At most four Newton corrections; None on a jump or no convergence"""
        scale = 1.0 + np.linalg.norm(w)
        for _ in range(4):
            try:
                delta = np.linalg.solve(chart_jacobian_values(a, chart, w), -chart_field_values(a, chart, w))
            except np.linalg.LinAlgError:
                return None
            delta_norm = np.linalg.norm(delta)
            if not np.isfinite(delta_norm) or delta_norm > 0.1 * scale:
                return None
            w = w + delta
            if delta_norm <= 1e-10 * scale:
                return w
        return None

    def _track_path(self, target: np.ndarray, exemplar: np.ndarray, path: HomotopyPath) -> HomotopyPath:
        """
        Euler predictor and Newton corrector along A(t) = (1 - t) gamma L + t M.
        The t-derivative of the chart field is the chart field of M - gamma L.
        """
        cfg = self.settings
        start = path.gamma * exemplar
        velocity = target - start
        dt = cfg.HOMOTOPY_START_STEP
        while path.t < 1.0:
            if np.max(np.abs(path.w), initial=0.0) > cfg.REPIVOT_THRESHOLD:
                path.chart, path.w = _repivot(path.chart, path.w)
                path.repivots += 1
            t = path.t
            a_t = (1.0 - t) * start + t * target
            h = min(dt, 1.0 - t)
            corrected = None
            try:
                tangent = np.linalg.solve(
                    chart_jacobian_values(a_t, path.chart, path.w),
                    -chart_field_values(velocity, path.chart, path.w),
                )
            except np.linalg.LinAlgError:
                tangent = None
            if tangent is not None and np.all(np.isfinite(tangent)):
                t_next = 1.0 if 1.0 - (t + h) < 1e-14 else t + h
                a_next = (1.0 - t_next) * start + t_next * target
                corrected = self._correct(a_next, path.chart, path.w + (t_next - t) * tangent)
            if corrected is not None:
                path.t = t_next
                path.w = corrected
                path.steps += 1
                dt = min(2.0 * dt, cfg.HOMOTOPY_MAX_STEP)
            else:
                dt *= 0.5
                if dt < cfg.HOMOTOPY_MIN_STEP:
                    path.status = "diverged"
                    return path
        path.status = "converged"
        return path

    def _merge(self, zeros: List[ZeroRecord], record: ZeroRecord) -> bool:
        """Add record unless it repeats a known class; keeps the better residual"""
        for i, known in enumerate(zeros):
            if proj_distance(known.point, record.point) < self.settings.TOL_DEDUP:
                if record.residual < known.residual:
                    zeros[i] = record.model_copy(update={"path_id": known.path_id})
                return True
        zeros.append(record)
        return False

    def _basis_zeros(self, a: np.ndarray, mu: complex) -> List[ZeroRecord]:
        n = a.shape[0] - 1
        zeros = []
        for k in range(n + 1):
            z = np.eye(n + 1, dtype=np.complex128)[k]
            residual = float(np.linalg.norm(a @ z - mu * z) / max(np.linalg.norm(a), np.finfo(float).tiny))
            zeros.append(ZeroRecord(point=ProjectivePoint(z), chart=k, eigenvalue=mu, residual=residual,
                                    jac_det=0j, index=None, degenerate=True, path_id=-1))
        return zeros

    def solve(self, m, seed: int = 0) -> SolveReport:
        """
        All zeros of the field of m on CP^n, with the total index and the
        certificate that it equals n + 1.
        """
        started = time.perf_counter()
        try:
            a = as_complex_matrix(m)
        except InvalidInputError as e:
            logger.error(f"Error validating matrix: {str(e)}")
            raise
        cfg = self.settings
        n = a.shape[0] - 1
        digest = matrix_hash(a)
        invertible = null_vector(a, cfg.TOL_RANK, cfg.TOL_RES) is None
        diagnostics: List[str] = []

        if n == 0:
            record = self._make_record(a, 0, np.zeros(0, dtype=np.complex128), 0)
            return SolveReport(matrix_hash=digest, order=1, zeros=[record], total_index=1,
                               certified=record.residual <= cfg.TOL_ACCEPT, invertible=invertible,
                               seed=seed, wall_time=time.perf_counter() - started,
                               diagnostics=["CP^0 is a single point"])

        mu = complex(np.trace(a)) / (n + 1)
        if np.linalg.norm(a - mu * np.eye(n + 1)) <= cfg.TOL_SCALAR * np.linalg.norm(a):
            logger.warning(f"Scalar matrix (mu={mu:.6g}): every line is an axis")
            return SolveReport(
                matrix_hash=digest, order=n + 1, zeros=self._basis_zeros(a, mu), total_index=None,
                certified=False, continuum=True, invertible=invertible, seed=seed,
                wall_time=time.perf_counter() - started,
                diagnostics=[
                    f"scalar matrix {mu:.6g}*I: the field vanishes identically, a continuum of zeros on CP^{n}; "
                    "basis classes listed as representatives"
                ],
            )

        exemplar = milnor_hopf_matrix(n)
        # zeros are invariant under rescaling, so track at the exemplar's scale
        target = a * (np.linalg.norm(exemplar) / np.linalg.norm(a))
        rng = np.random.default_rng(seed)
        zeros: List[ZeroRecord] = []
        total = 0
        known = True
        for round_no in range(cfg.HOMOTOPY_MAX_RETRIES + 1):
            gamma = complex(np.exp(2j * np.pi * rng.random()))
            failures = 0
            for k in range(n + 1):
                path_id = round_no * (n + 1) + k
                path = HomotopyPath(
                    start=ProjectivePoint(np.eye(n + 1, dtype=np.complex128)[k]),
                    gamma=gamma,
                    chart=k,
                    w=np.zeros(n, dtype=np.complex128),
                )
                path = self._track_path(target, exemplar, path)
                record = self.newton_polish(a, AffineCoords(chart=path.chart, w=path.w), path_id)
                if record is None:
                    failures += 1
                    outcome = "diverged"
                elif self._merge(zeros, record):
                    outcome = "merged"
                    path.status = "merged"
                else:
                    outcome = "converged" if path.status == "converged" else "rescued"
                diagnostics.append(
                    f"path {path_id}: {outcome} at t={path.t:.6g} after {path.steps} steps, {path.repivots} re-pivots"
                )

            indices = [z.index for z in zeros]
            known = all(i is not None for i in indices)
            total = sum(i for i in indices if i is not None)
            if not known or total >= n + 1:
                break
            if round_no < cfg.HOMOTOPY_MAX_RETRIES:
                message = f"retry {round_no + 1}: index sum {total} of {n + 1} with {failures} failed paths; fresh phase"
                logger.info(message)
                diagnostics.append(message)

        if not known:
            diagnostics.append("degenerate zero with unknown index (local degree only computed on CP^1)")
        zeros.sort(key=lambda z: (z.eigenvalue.real, z.eigenvalue.imag,
                                  tuple(np.concatenate([z.point.homog.real, z.point.homog.imag]))))
        residuals_ok = all(z.residual <= cfg.TOL_ACCEPT for z in zeros)
        certified = known and total == n + 1 and residuals_ok
        if not certified:
            logger.warning(f"Uncertified solve: index sum {total if known else 'unknown'} of {n + 1}")
        return SolveReport(
            matrix_hash=digest,
            order=n + 1,
            zeros=zeros,
            total_index=total if known else None,
            certified=certified,
            continuum=False,
            invertible=invertible,
            seed=seed,
            wall_time=time.perf_counter() - started,
            diagnostics=diagnostics,
        )

    # --- CP^1 local index, polynomial roots, odd real matrices -----------------

    def local_winding_cp1(self, m, center: AffineCoords, radius: Optional[float] = None) -> int:
        """Winding of the chart field of a 2x2 matrix around a circle in C"""
        a = as_complex_matrix(m)
        if a.shape != (2, 2):
            raise InvalidInputError("local winding is defined on CP^1 (order-2 matrices)")
        j = center.chart
        other = 1 - j

        def field(w):
            w = np.asarray(w, dtype=np.complex128)
            ones = np.ones_like(w)
            z = np.stack([ones, w]) if j == 0 else np.stack([w, ones])
            az = np.tensordot(a, z, axes=1)
            return az[other] - z[other] * az[j]

        return self.degree_service.winding_number(
            field, complex(center.w[0]), radius or self.settings.WINDING_RADIUS
        )

    def poly_roots(self, p: PolynomialCoeffs, seed: int = 0) -> PolyRootsReport:
        """Roots of a monic polynomial as eigenvalues of its companion matrix"""
        report = self.solve(companion(p), seed)
        roots = []
        passed = True
        for z in report.zeros:
            value = float(abs(complex(p(z.eigenvalue))))
            bound = self.settings.TOL_POLY * (1.0 + abs(z.eigenvalue)) ** p.degree
            if value > bound:
                passed = False
                report.diagnostics.append(f"root {z.eigenvalue:.6g}: |p| = {value:.3e} above {bound:.3e}")
            roots.append(RootRecord(root=z.eigenvalue, index=z.index, poly_residual=value))
        return PolyRootsReport(degree=p.degree, roots=roots, certified=report.certified and passed, solve=report)

    def _sigma_descent(self, a: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
        """
        Projected descent on S^{d-1} for |sigma(y)|^2 / 2.

        The step is the Gauss-Newton direction in the tangent plane (steepest
        descent when that is not downhill), with Armijo backtracking and
        retraction by normalization. Returns the last point and |sigma| there.
        """
        cfg = self.settings

        def energy(z: np.ndarray) -> Tuple[np.ndarray, float]:
            s = hedgehog_field(a, z)
            return s, 0.5 * float(s @ s)

        try:
            sigma, f = energy(y)
        except NearSingularError:
            return y, float("inf")
        for _ in range(cfg.HEDGEHOG_DESCENT_STEPS):
            if np.sqrt(2.0 * f) <= cfg.HEDGEHOG_DESCENT_TOL:
                break
            frame = sphere_tangent_frame(y)
            jac = hedgehog_jacobian(a, y) @ frame
            grad = jac.T @ sigma
            step = np.linalg.lstsq(jac, -sigma, rcond=None)[0]
            slope = float(grad @ step)
            if not slope < 0.0:
                step = -grad
                slope = -float(grad @ grad)
            if slope == 0.0:
                break
            t = 1.0
            while t > 1e-12:
                trial = y + frame @ (t * step)
                trial /= np.linalg.norm(trial)
                try:
                    trial_sigma, trial_f = energy(trial)
                except NearSingularError:
                    trial_f = float("inf")
                if trial_f <= f + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            y, sigma, f = trial, trial_sigma, trial_f
        return y, float(np.sqrt(2.0 * f))

    def _eigen_newton(self, a: np.ndarray, y: np.ndarray, iterations: int = 50) -> Tuple[np.ndarray, float]:
        """Newton on (A y - mu y, (y.y - 1)/2) = 0"""
        d = a.shape[0]
        mu = float(y @ a @ y)
        for _ in range(iterations):
            g = np.concatenate([a @ y - mu * y, [0.5 * (y @ y - 1.0)]])
            if np.linalg.norm(g) <= 1e-15 * max(1.0, np.linalg.norm(a)):
                break
            jac = np.zeros((d + 1, d + 1))
            jac[:d, :d] = a - mu * np.eye(d)
            jac[:d, d] = -y
            jac[d, :d] = y
            delta = np.linalg.lstsq(jac, -g, rcond=None)[0]
            y = y + delta[:d]
            mu = mu + delta[d]
            if not np.all(np.isfinite(y)) or np.linalg.norm(delta) < 1e-15:
                break
        norm = np.linalg.norm(y)
        if norm == 0.0 or not np.isfinite(norm):
            return y, mu
        y = y / norm
        return y, float(y @ a @ y)

    def hedgehog_solve(self, a, seed: int = 0) -> HedgehogResult:
        """
        Real eigenpair of an odd-order real matrix. Singular input goes
        through null_vector (mu = 0). Otherwise each restart descends
        |sigma|^2 on the sphere from a random start; once sigma is within
        HEDGEHOG_POLISH_RADIUS of zero, Newton on (A y - mu y) polishes it.
        """
        try:
            a = as_real_matrix(a)
        except InvalidInputError as e:
            logger.error(f"Error validating matrix: {str(e)}")
            raise
        d = a.shape[0]
        if d % 2 == 0:
            raise InvalidInputError("hedgehog_solve needs a matrix of odd order")
        cfg = self.settings
        scale = float(np.linalg.norm(a))

        kernel = null_vector(a, cfg.TOL_RANK, cfg.TOL_RES)
        if kernel is not None:
            pivot = kernel[np.argmax(np.abs(kernel))]
            y = np.real(kernel * np.conj(pivot) / abs(pivot))
            y = y / np.linalg.norm(y)
            residual = float(np.linalg.norm(a @ y))
            logger.info("Singular matrix: kernel vector gives the real axis with mu = 0")
            return HedgehogResult(y=y.tolist(), mu=0.0, residual=residual,
                                  converged=residual <= cfg.TOL_ACCEPT * max(scale, 1.0), restarts=0)

        rng = np.random.default_rng(seed)
        best: Optional[Tuple[np.ndarray, float, float]] = None
        for restart in range(cfg.HEDGEHOG_RESTARTS):
            y = rng.standard_normal(d)
            y /= np.linalg.norm(y)
            y, sigma_norm = self._sigma_descent(a, y)
            if not sigma_norm <= cfg.HEDGEHOG_POLISH_RADIUS:
                logger.debug(f"Restart {restart}: descent stalled at |sigma| = {sigma_norm:.3e}")
                continue
            y, mu = self._eigen_newton(a, y)
            residual = float(np.linalg.norm(a @ y - mu * y))
            if not np.isfinite(residual):
                continue
            if best is None or residual < best[2]:
                best = (y, mu, residual)
            if residual <= cfg.TOL_ACCEPT * scale:
                logger.info(f"Real axis found after {restart + 1} restarts: mu={mu:.12g}")
                return HedgehogResult(y=y.tolist(), mu=mu, residual=residual, converged=True, restarts=restart)

        logger.error(f"Error in hedgehog_solve: no real axis within {cfg.HEDGEHOG_RESTARTS} restarts")
        if best is None:
            best = (np.eye(d)[0], 0.0, float("inf"))
        y, mu, residual = best
        return HedgehogResult(y=y.tolist(), mu=mu, residual=residual, converged=False,
                              restarts=cfg.HEDGEHOG_RESTARTS)
