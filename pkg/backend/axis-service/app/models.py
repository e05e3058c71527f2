"""
Pydantic models for the Axis Service
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.utils.linalg import PolynomialCoeffs
from app.utils.projective import ProjectivePoint

ComplexPair = Tuple[float, float]


def pair(z: complex) -> List[float]:
    """Complex scalar as [re, im]"""
    z = complex(z)
    return [float(z.real), float(z.imag)]


class MatrixPayload(BaseModel):
    """Matrix JSON: {"order": n, "rows": [[[re, im], ...], ...]}"""
    order: int = Field(..., ge=1, description="Matrix order")
    rows: List[List[ComplexPair]] = Field(..., description="Row-major entries as [re, im] pairs")

    @model_validator(mode="after")
    def check_square(self):
        """Rows must form an order x order array of finite numbers"""
        if len(self.rows) != self.order or any(len(r) != self.order for r in self.rows):
            raise ValueError(f"rows must form a {self.order}x{self.order} array")
        if not np.all(np.isfinite(np.asarray(self.rows, dtype=float))):
            raise ValueError("matrix entries must be finite")
        return self

    def to_array(self) -> np.ndarray:
        raw = np.asarray(self.rows, dtype=np.float64)
        return raw[..., 0] + 1j * raw[..., 1]

    @classmethod
    def from_array(cls, m) -> "MatrixPayload":
        m = np.asarray(m, dtype=np.complex128)
        return cls(order=m.shape[0], rows=[[tuple(pair(z)) for z in row] for row in m])


class PolynomialPayload(BaseModel):
    """Polynomial JSON: {"degree": d, "coeffs": [[re, im], ...]} for c_0..c_{d-1}"""
    degree: int = Field(..., ge=1, description="Degree of the monic polynomial")
    coeffs: List[ComplexPair] = Field(..., description="c_0..c_{d-1} as [re, im] pairs")

    @model_validator(mode="after")
    def check_length(self):
        """Coefficient count must equal the degree"""
        if len(self.coeffs) != self.degree:
            raise ValueError(f"expected {self.degree} coefficients, got {len(self.coeffs)}")
        if not np.all(np.isfinite(np.asarray(self.coeffs, dtype=float))):
            raise ValueError("coefficients must be finite")
        return self

    def to_coeffs(self) -> PolynomialCoeffs:
        raw = np.asarray(self.coeffs, dtype=np.float64)
        return PolynomialCoeffs(raw[:, 0] + 1j * raw[:, 1])


class TripleMatrixPayload(BaseModel):
    """{"matrices": [A, B, C]} for the singular-combination search"""
    matrices: List[MatrixPayload]


class PointPayload(BaseModel):
    """Projective point JSON: {"n": n, "homog": [[re, im], ...]}"""
    n: int = Field(..., ge=0)
    homog: List[ComplexPair]

    @model_validator(mode="after")
    def check_length(self):
        """n + 1 homogeneous coordinates"""
        if len(self.homog) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} homogeneous coordinates")
        return self

    @classmethod
    def from_point(cls, p: ProjectivePoint) -> "PointPayload":
        return cls(n=p.n, homog=[tuple(pair(z)) for z in p.homog])


class ZeroRecord(BaseModel):
    """A located zero of the axis field"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    point: ProjectivePoint
    chart: int
    eigenvalue: complex = Field(..., description="lambda with A z = lambda z")
    residual: float = Field(..., description="||A z - lambda z|| / (||A|| ||z||)")
    jac_det: complex = Field(..., description="Chart Jacobian determinant")
    index: Optional[int] = Field(None, description="Local index; None when unknown")
    degenerate: bool = False
    path_id: int = -1

    def to_payload(self) -> Dict[str, Any]:
        return {
            "point": PointPayload.from_point(self.point).model_dump(),
            "chart": self.chart,
            "lambda": pair(self.eigenvalue),
            "residual": self.residual,
            "jac_det": pair(self.jac_det),
            "index": self.index,
            "degenerate": self.degenerate,
            "path_id": self.path_id,
        }


class SolveReport(BaseModel):
    """Outcome of one solver run"""
    matrix_hash: str
    order: int
    zeros: List[ZeroRecord] = Field(default_factory=list)
    total_index: Optional[int] = None
    certified: bool = False
    continuum: bool = False
    invertible: bool = True
    seed: int = 0
    wall_time: float = 0.0
    diagnostics: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_certification(self):
        """A continuum of zeros is never certified"""
        if self.certified and self.continuum:
            raise ValueError("a continuum report cannot be certified")
        return self

    def to_payload(self, include_meta: bool = True) -> Dict[str, Any]:
        payload = {
            "matrix_hash": self.matrix_hash,
            "order": self.order,
            "zeros": [z.to_payload() for z in self.zeros],
            "total_index": self.total_index,
            "certified": self.certified,
            "continuum": self.continuum,
            "invertible": self.invertible,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
        }
        if include_meta:
            payload["wall_time"] = self.wall_time
        return payload


class RootRecord(BaseModel):
    """A polynomial root with its zero index"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    root: complex
    index: Optional[int] = None
    poly_residual: float = Field(..., description="|p(root)|")

    def to_payload(self) -> Dict[str, Any]:
        return {"root": pair(self.root), "index": self.index, "poly_residual": self.poly_residual}


class PolyRootsReport(BaseModel):
    degree: int
    roots: List[RootRecord] = Field(default_factory=list)
    certified: bool = False
    solve: SolveReport

    def to_payload(self, include_meta: bool = True) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "roots": [r.to_payload() for r in self.roots],
            "certified": self.certified,
            "solve": self.solve.to_payload(include_meta),
        }


class DegreeEstimate(BaseModel):
    """Brouwer degree as a normalized boundary integral"""
    raw: float
    snapped: int
    gap: float
    nodes: int

    @classmethod
    def from_raw(cls, raw: float, nodes: int) -> "DegreeEstimate":
        snapped = int(round(raw))
        return cls(raw=raw, snapped=snapped, gap=abs(raw - snapped), nodes=nodes)

    def resolved(self, snap_tol: float) -> bool:
        return self.gap <= snap_tol

    def to_payload(self) -> Dict[str, Any]:
        return self.model_dump()


class StokesReport(BaseModel):
    """int_{S^{N-1}} omega against N * Vol(B^N)"""
    N: int
    integral: float
    expected: float
    residual: float
    est_error: float
    nodes: int
    scheme: str
    passed: bool = False

    def to_payload(self) -> Dict[str, Any]:
        return self.model_dump()


class HopfLemmaResult(BaseModel):
    """Boundary degree of the tube extension against the index sum of the zeros"""
    lhs: int
    rhs: int
    lhs_raw: float
    outer_raw: float
    inner_raw: float
    zeros: List[List[float]] = Field(default_factory=list)
    indices: List[int] = Field(default_factory=list)
    epsilon: float
    nodes: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def to_payload(self) -> Dict[str, Any]:
        payload = self.model_dump()
        payload["holds"] = self.holds
        return payload


class HedgehogResult(BaseModel):
    """Real eigenpair of an odd-order real matrix"""
    y: List[float]
    mu: float
    residual: float
    converged: bool
    restarts: int

    def to_payload(self) -> Dict[str, Any]:
        return self.model_dump()


class SingularCombination(BaseModel):
    """Outcome of the singular-combination search"""
    found: bool
    coefficients: Optional[List[float]] = None
    residual: Optional[float] = None
    order: int
    restarts: int

    def to_payload(self) -> Dict[str, Any]:
        return self.model_dump()


COMMANDS = (
    "roots",
    "eigen",
    "verify-index",
    "verify-stokes",
    "degree",
    "hedgehog",
    "verify-tubular",
    "singular-combo",
)


class RunConfig(BaseModel):
    """One CLI invocation"""
    command: Literal[
        "roots", "eigen", "verify-index", "verify-stokes",
        "degree", "hedgehog", "verify-tubular", "singular-combo",
    ]
    input_path: Optional[Path] = None
    seed: int = 0
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output: Literal["text", "json"] = "text"
    nodes: Optional[int] = Field(None, ge=3)
    polar_nodes: Optional[int] = Field(None, ge=2)
    n: int = Field(1, ge=0)
    trials: int = Field(10, ge=1)
    N: int = Field(3, ge=1)
    map: str = "identity"
    field: Literal["north-south", "milnor-hopf", "both"] = "north-south"
    epsilon: Optional[float] = None
    order: int = Field(3, ge=1)
    no_meta: bool = False

    @field_validator("tolerances")
    @classmethod
    def check_tolerances(cls, v: Dict[str, float]) -> Dict[str, float]:
        """Tolerances are known names with values in (0, 1)"""
        known = settings.tolerances()
        normalized = {}
        for name, value in v.items():
            key = name.upper()
            if key not in known and f"TOL_{key}" in known:
                key = f"TOL_{key}"
            if key not in known:
                raise ValueError(f"unknown tolerance {name!r}; expected one of {sorted(known)}")
            if not 0.0 < value < 1.0:
                raise ValueError(f"tolerance {name}={value} must lie in (0, 1)")
            normalized[key] = value
        return normalized

    @field_validator("map")
    @classmethod
    def check_map(cls, v: str) -> str:
        """identity, antipodal or power:k"""
        if v in ("identity", "antipodal"):
            return v
        if v.startswith("power:"):
            try:
                int(v.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad power map {v!r}")
            return v
        raise ValueError(f"unknown map {v!r}; expected identity, antipodal or power:k")
