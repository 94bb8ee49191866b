"""
Models package.
"""

from models.quantum import (
    BipartiteState,
    ComplexMatrix,
    DensityOperator,
    MeasurementEnsemble,
    ProjectiveMeasurement,
    PureState,
)
from models.exclusion import ExclusionInstance, ExclusionResult, HeinosaariCertificate
from models.report import OutcomeEnsemble, OutcomeSummary, ProbeState, RunConfig, VerificationReport

__all__ = [
    'BipartiteState',
    'ComplexMatrix',
    'DensityOperator',
    'MeasurementEnsemble',
    'ProjectiveMeasurement',
    'PureState',
    'ExclusionInstance',
    'ExclusionResult',
    'HeinosaariCertificate',
    'OutcomeEnsemble',
    'OutcomeSummary',
    'ProbeState',
    'RunConfig',
    'VerificationReport',
]
