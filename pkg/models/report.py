"""
Measurement-antidistinguishability data model: probes, per-outcome ensembles,
verification reports and run configuration.
"""

from pathlib import Path
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import Settings, Tolerances
from core.exceptions import InvalidParameterError
from models.exclusion import ExclusionInstance
from models.quantum import DensityOperator, PureState


class ProbeState(BaseModel):
    """Single-system probe state"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    state: PureState

    @field_validator("state", mode="before")
    @classmethod
    def _as_state(cls, value):
        return value if isinstance(value, PureState) else PureState.normalized(value)

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.amplitudes


class OutcomeEnsemble(BaseModel):
    """
    Bob's conditional states for one outcome a of Alice's measurement.

    weights[x] = p_x p(a|x); reduced_states[x] is None when p(a|x) fell below
    the weight floor and the label was dropped.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    outcome: int
    dim: int
    reduced_states: Tuple[Optional[DensityOperator], ...]
    weights: Tuple[float, ...]

    @model_validator(mode="after")
    def _aligned(self):
        if len(self.reduced_states) != len(self.weights):
            raise InvalidParameterError("one weight is needed per reduced state")
        if any(w < 0.0 for w in self.weights):
            raise InvalidParameterError("outcome weights must be non-negative")
        return self

    @property
    def labels(self) -> Tuple[int, ...]:
        """Zero-based measurement labels that carry a reduced state"""
        return tuple(x for x, rho in enumerate(self.reduced_states) if rho is not None)

    @property
    def dropped(self) -> Tuple[int, ...]:
        return tuple(x for x, rho in enumerate(self.reduced_states) if rho is None)

    @property
    def kept_states(self) -> Tuple[DensityOperator, ...]:
        return tuple(rho for rho in self.reduced_states if rho is not None)

    @property
    def kept_weights(self) -> Tuple[float, ...]:
        return tuple(self.weights[x] for x in self.labels)

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    def instance(self) -> Optional[ExclusionInstance]:
        """Exclusion instance over the kept labels, or None if every label was dropped"""
        if not self.labels:
            return None
        return ExclusionInstance(states=self.kept_states, weights=self.kept_weights)


class OutcomeSummary(BaseModel):
    """Per-outcome line of a verification report"""

    model_config = ConfigDict(frozen=True)

    outcome: int
    as_value: float
    total_weight: float
    duality_gap: float
    method: str
    adjustment: str


class VerificationReport(BaseModel):
    """
    Outcome of checking one entangled state against its measurement family.

    passed holds exactly when ame >= 1 - theorem_tol, no single probe satisfies
    the structural condition for perfect exclusion, and the best single probe
    found stays at least ams_margin below 1.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theorem: Literal["T1", "T2", "T3"]
    family: Literal["R", "S", "Q"]
    dim: int
    parameter_name: str
    parameter_used: float
    bound: float
    schmidt_weights: Tuple[float, ...]
    ame: float
    expected_ame: float
    per_outcome_as: Tuple[OutcomeSummary, ...]
    ams_structural: bool
    lemma2_witness: Optional[PureState] = None
    ams_numeric_best: float
    ams_probe: Optional[PureState] = None
    reduced_non_orthogonal: bool
    max_barrett_overlap: Optional[float] = None
    theorem_tol: float
    ams_margin: float
    seed: int
    passed: bool

    @model_validator(mode="after")
    def _passed_consistent(self):
        expected = self.evaluate(self.ame, self.ams_structural, self.ams_numeric_best, self.theorem_tol, self.ams_margin)
        if self.passed != expected:
            raise InvalidParameterError("passed flag disagrees with the report's evidence")
        return self

    @staticmethod
    def evaluate(ame: float, ams_structural: bool, ams_best: float, theorem_tol: float, ams_margin: float) -> bool:
        return bool(ame >= 1.0 - theorem_tol and not ams_structural and ams_best <= 1.0 - ams_margin)


class RunConfig(BaseModel):
    """Everything a CLI run depends on besides its input files"""

    model_config = ConfigDict(frozen=True)

    seed: int = 0
    tolerances: Tolerances = Tolerances()
    restarts: int = 16
    max_workers: int = 1
    output_format: Optional[Literal["json", "csv"]] = None
    output_path: Optional[Path] = None

    @classmethod
    def from_settings(cls, source: Settings, **overrides) -> "RunConfig":
        values = {
            "seed": source.seed,
            "tolerances": Tolerances.from_settings(source),
            "restarts": source.restarts,
            "max_workers": source.max_workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
