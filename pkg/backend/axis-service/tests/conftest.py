import numpy as np
import pytest

from app.config import settings as app_settings
from app.services import AxisSolverService, DegreeService, StorageService


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def settings():
    return app_settings


@pytest.fixture
def degree_service(settings):
    return DegreeService(settings)


@pytest.fixture
def solver(settings, degree_service):
    return AxisSolverService(settings, degree_service)


@pytest.fixture
def storage():
    return StorageService()
