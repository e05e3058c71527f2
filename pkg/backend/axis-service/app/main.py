"""
Complex Axis Solver
Command-line entry point
"""
import argparse
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from app.config import Settings, settings
from app.models import COMMANDS, RunConfig, SingularCombination
from app.services import AxisSolverService, DegreeService, StorageService
from app.services.degree import parse_map
from app.utils.errors import AxisError, InvalidInputError, UnresolvedDegreeError, UnsupportedConfigurationError
from app.utils.fields import TubularConfig, milnor_hopf_sphere_field, north_south_field
from app.utils.linalg import find_singular_combination

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

Outcome = Tuple[Dict[str, Any], bool]


def configure_logging(cfg: Settings = settings) -> None:
    """Console logging on stderr, plus a rotating file when LOG_TO_FILE is set"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if cfg.LOG_TO_FILE:
        os.makedirs(cfg.LOG_DIR, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                os.path.join(cfg.LOG_DIR, "axis-service.log"),
                maxBytes=10485760,  # 10MB
                backupCount=5,
                encoding="utf-8",
            )
        )
    logging.basicConfig(
        level=getattr(logging, cfg.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
    )


class CommandRunner:
    """Executes one RunConfig against freshly configured services"""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.settings = settings.model_copy(update=cfg.tolerances) if cfg.tolerances else settings
        self.degree = DegreeService(self.settings)
        self.solver = AxisSolverService(self.settings, self.degree)
        self.storage = StorageService()

    def _require_input(self):
        if self.cfg.input_path is None:
            raise InvalidInputError(f"{self.cfg.command} needs --input")
        return self.cfg.input_path

    def roots(self) -> Outcome:
        poly = self.storage.load_polynomial(self._require_input())
        report = self.solver.poly_roots(poly, self.cfg.seed)
        return report.to_payload(not self.cfg.no_meta), report.certified

    def eigen(self) -> Outcome:
        matrix = self.storage.load_matrix(self._require_input())
        report = self.solver.solve(matrix, self.cfg.seed)
        if report.continuum:
            logger.warning("Continuum of zeros: the matrix is scalar, every line is an axis")
        return report.to_payload(not self.cfg.no_meta), report.certified or report.continuum

    def verify_index(self) -> Outcome:
        cfg = self.cfg
        order = cfg.n + 1
        rng = np.random.default_rng(cfg.seed)
        failures = []
        worst = 0.0
        for trial in tqdm(range(cfg.trials), desc=f"verify-index n={cfg.n}", disable=cfg.output == "json"):
            m = rng.standard_normal((order, order)) + 1j * rng.standard_normal((order, order))
            report = self.solver.solve(m, cfg.seed + trial)
            worst = max([worst] + [z.residual for z in report.zeros])
            if not report.certified or report.total_index != order:
                failures.append({"trial": trial, "total_index": report.total_index,
                                 "diagnostics": report.diagnostics[-3:]})
        payload = {
            "n": cfg.n,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "certified": cfg.trials - len(failures),
            "max_residual": worst,
            "failures": failures,
        }
        return payload, not failures

    def verify_stokes(self) -> Outcome:
        q = self.degree.quadrature(self.cfg.N, self.cfg.nodes, self.cfg.polar_nodes, self.cfg.seed)
        report = self.degree.stokes_check(self.cfg.N, q)
        payload = report.to_payload()
        payload["seed"] = self.cfg.seed
        return payload, report.passed

    def degree_map(self) -> Outcome:
        G = parse_map(self.cfg.map)
        q = self.degree.quadrature(self.cfg.N, self.cfg.nodes, self.cfg.polar_nodes, self.cfg.seed)
        try:
            estimate = self.degree.map_degree(G, q)
        except UnresolvedDegreeError as e:
            payload = e.estimate.to_payload()
            payload.update({"map": self.cfg.map, "N": self.cfg.N, "resolved": False})
            return payload, False
        payload = estimate.to_payload()
        payload.update({"map": self.cfg.map, "N": self.cfg.N, "resolved": True})
        return payload, True

    def hedgehog(self) -> Outcome:
        if self.cfg.input_path is not None:
            matrix = self.storage.load_matrix(self.cfg.input_path)
        else:
            rng = np.random.default_rng(self.cfg.seed)
            matrix = rng.standard_normal((self.cfg.order, self.cfg.order))
        result = self.solver.hedgehog_solve(matrix, self.cfg.seed)
        payload = result.to_payload()
        payload["seed"] = self.cfg.seed
        return payload, result.converged

    def verify_tubular(self) -> Outcome:
        epsilon = self.cfg.epsilon if self.cfg.epsilon is not None else self.settings.TUBE_EPSILON
        tube = TubularConfig(epsilon=epsilon)
        q = self.degree.quadrature(3, self.cfg.nodes, self.cfg.polar_nodes)
        fields = {
            "north-south": north_south_field,
            "milnor-hopf": milnor_hopf_sphere_field(),
        }
        if self.cfg.field == "both":
            first, second = self.degree.compare_index_sums(fields["north-south"], fields["milnor-hopf"], tube, q)
            payload = {
                "north-south": first.to_payload(),
                "milnor-hopf": second.to_payload(),
                "same_index_sum": first.rhs == second.rhs,
            }
            return payload, first.holds and second.holds and first.rhs == second.rhs
        result = self.degree.hopf_lemma_check(fields[self.cfg.field], tube, q)
        payload = result.to_payload()
        payload["field"] = self.cfg.field
        return payload, result.holds

    def singular_combo(self) -> Outcome:
        cfg = self.cfg
        if cfg.input_path is not None:
            a, b, c = self.storage.load_matrix_triple(cfg.input_path)
        else:
            rng = np.random.default_rng(cfg.seed)
            a, b, c = (rng.standard_normal((cfg.order, cfg.order)) for _ in range(3))
        restarts = self.settings.SINGULAR_COMBO_RESTARTS
        found = find_singular_combination(a, b, c, seed=cfg.seed, restarts=restarts, tol_det=self.settings.TOL_DET)
        result = SingularCombination(
            found=found is not None,
            coefficients=found[0].tolist() if found is not None else None,
            residual=found[1] if found is not None else None,
            order=np.asarray(a).shape[0],
            restarts=restarts,
        )
        payload = result.to_payload()
        payload["seed"] = cfg.seed
        return payload, result.found

    def execute(self) -> Outcome:
        handler = {
            "roots": self.roots,
            "eigen": self.eigen,
            "verify-index": self.verify_index,
            "verify-stokes": self.verify_stokes,
            "degree": self.degree_map,
            "hedgehog": self.hedgehog,
            "verify-tubular": self.verify_tubular,
            "singular-combo": self.singular_combo,
        }[self.cfg.command]
        return handler()


def render_text(command: str, payload: Dict[str, Any], passed: bool) -> str:
    """Plain-text view of a JSON report"""
    lines = [f"{command}: {'PASS' if passed else 'FAIL'}"]
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            for item in value:
                lines.append("  - " + ", ".join(f"{k}={item[k]}" for k in sorted(item)))
        elif isinstance(value, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {value[k]}" for k in sorted(value))
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def run(cfg: RunConfig, stream=None) -> int:
    """Run one command and write its report; returns the exit status"""
    stream = stream or sys.stdout
    storage = StorageService()
    try:
        payload, passed = CommandRunner(cfg).execute()
    except (InvalidInputError, UnsupportedConfigurationError, ValidationError) as e:
        logger.error(f"Error running {cfg.command}: {str(e)}")
        stream.write(storage.dumps({"command": cfg.command, "error": str(e)}) + "\n")
        return EXIT_INPUT
    except np.linalg.LinAlgError as e:
        logger.error(f"Linear algebra failure in {cfg.command}: {str(e)}")
        stream.write(storage.dumps({"command": cfg.command, "error": f"linear algebra failure: {e}"}) + "\n")
        return EXIT_INPUT
    except AxisError as e:
        logger.error(f"Error running {cfg.command}: {str(e)}")
        stream.write(storage.dumps({"command": cfg.command, "error": str(e)}) + "\n")
        return EXIT_FAILED
    if cfg.output == "json":
        stream.write(storage.dumps(payload) + "\n")
    else:
        stream.write(render_text(cfg.command, payload, passed) + "\n")
    return EXIT_OK if passed else EXIT_FAILED


def _tolerance(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name} has non-numeric value {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Certified eigenpairs and polynomial roots as zeros of vector fields on CP^n")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", dest="input_path", default=None, help="JSON matrix or polynomial file")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (AXIS_SEED overrides)")
    parser.add_argument("--tol", type=_tolerance, action="append", default=[],
                        help="Tolerance override name=value, repeatable")
    parser.add_argument("--output", choices=["text", "json"], default="text")
    parser.add_argument("--nodes", type=int, default=None, help="Quadrature node count")
    parser.add_argument("--polar-nodes", type=int, default=None, help="Polar Gauss nodes on S^2 and S^3")
    parser.add_argument("--n", type=int, default=1, help="CP^n dimension for verify-index")
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--N", type=int, default=3, help="Ambient dimension of the sphere S^{N-1}")
    parser.add_argument("--map", default="identity", help="identity, antipodal or power:k")
    parser.add_argument("--field", choices=["north-south", "milnor-hopf", "both"], default="north-south")
    parser.add_argument("--epsilon", type=float, default=None, help="Tube radius around S^2")
    parser.add_argument("--order", type=int, default=3, help="Order of random matrices")
    parser.add_argument("--no-meta", action="store_true", help="Omit wall-clock fields from reports")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    # re-read so AXIS_SEED set after import still applies
    env_seed = Settings().AXIS_SEED
    seed = args.seed if env_seed is None else env_seed
    return RunConfig(
        command=args.command,
        input_path=args.input_path,
        seed=seed,
        tolerances=dict(args.tol),
        output=args.output,
        nodes=args.nodes,
        polar_nodes=args.polar_nodes,
        n=args.n,
        trials=args.trials,
        N=args.N,
        map=args.map,
        field=args.field,
        epsilon=args.epsilon,
        order=args.order,
        no_meta=args.no_meta,
    )


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        cfg = parse_config(argv)
    except (InvalidInputError, ValidationError) as e:
        logger.error(f"Error parsing arguments: {str(e)}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    logger.info(f"Running {cfg.command} with seed {cfg.seed}")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
