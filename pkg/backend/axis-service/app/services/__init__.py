"""
Service modules
"""
from app.services.degree import DegreeService
from app.services.solver import AxisSolverService
from app.services.storage import StorageService
