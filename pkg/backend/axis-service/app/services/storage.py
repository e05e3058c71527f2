"""
Storage service for JSON input and report output
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from app.models import MatrixPayload, PolynomialPayload, TripleMatrixPayload
from app.utils.errors import InvalidInputError
from app.utils.linalg import PolynomialCoeffs

logger = logging.getLogger(__name__)

Payload = TypeVar("Payload", bound=BaseModel)


def _finite(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


class StorageService:
    """Storage service for reading payloads and writing reports"""

    def read_json(self, path: Path) -> Any:
        """Parse a JSON file, reporting line and column on malformed input"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"Error reading {path}: {str(e)}")
            raise InvalidInputError(f"cannot read {path}: {e.strerror}")
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            logger.error(f"Error parsing {path}: {str(e)}")
            raise InvalidInputError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}")

    def _validate(self, path: Path, model: Type[Payload]) -> Payload:
        data = self.read_json(path)
        try:
            return model.model_validate(data)
        except ValidationError as e:
            logger.error(f"Error validating {path}: {str(e)}")
            raise InvalidInputError(f"{path}: does not match the {model.__name__} schema: {e}")

    def load_matrix(self, path: Path) -> np.ndarray:
        return self._validate(path, MatrixPayload).to_array()

    def load_polynomial(self, path: Path) -> PolynomialCoeffs:
        return self._validate(path, PolynomialPayload).to_coeffs()

    def load_matrix_triple(self, path: Path) -> List[np.ndarray]:
        payload = self._validate(path, TripleMatrixPayload)
        if len(payload.matrices) != 3:
            raise InvalidInputError(f"{path}: expected exactly three matrices, got {len(payload.matrices)}")
        return [m.to_array() for m in payload.matrices]

    def dumps(self, payload: Dict[str, Any]) -> str:
        """Deterministic JSON: sorted keys, fixed indentation, non-finite floats as null"""
        return json.dumps(_finite(payload), sort_keys=True, indent=2, allow_nan=False)

