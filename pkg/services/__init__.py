"""
Services package - Business Logic Layer
"""

from services.exclusion_service import ExclusionSolver
from services.antimeas_service import AntimeasService
from services.verification_service import VerificationService

__all__ = ['ExclusionSolver', 'AntimeasService', 'VerificationService']
