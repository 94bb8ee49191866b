"""
State-exclusion data model: weighted state sets and solver results.
"""

import math
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.exceptions import DimensionMismatchError, InvalidParameterError
from models.quantum import ComplexMatrix, DensityOperator


class ExclusionInstance(BaseModel):
    """States rho_k with positive weights q_k (the weights need not sum to 1)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: Tuple[DensityOperator, ...]
    weights: Tuple[float, ...]

    @field_validator("weights", mode="before")
    @classmethod
    def _as_floats(cls, value):
        return tuple(float(q) for q in value)

    @model_validator(mode="after")
    def _consistent(self):
        if not self.states:
            raise InvalidParameterError("an exclusion instance needs at least one state")
        if len(self.weights) != len(self.states):
            raise InvalidParameterError(f"{len(self.weights)} weights for {len(self.states)} states")
        if any(not math.isfinite(q) or q <= 0.0 for q in self.weights):
            raise InvalidParameterError("every weight must be positive and finite")
        dim = self.states[0].dim
        for index, rho in enumerate(self.states):
            if rho.dim != dim:
                raise DimensionMismatchError(f"state {index + 1} has dimension {rho.dim}, expected {dim}")
        return self

    @classmethod
    def uniform(cls, states) -> "ExclusionInstance":
        states = tuple(states)
        return cls(states=states, weights=tuple([1.0 / len(states)] * len(states)))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    def weighted_operators(self) -> np.ndarray:
        """Array A[k] = q_k rho_k, shape (n, d, d)"""
        return np.array([q * rho.data for q, rho in zip(self.weights, self.states)])

    def scaled(self, factor: float) -> "ExclusionInstance":
        return ExclusionInstance(states=self.states, weights=tuple(factor * q for q in self.weights))


class ExclusionResult(BaseModel):
    """
    Certified value of the antidistinguishability functional.

    primal_value is sum_k q_k Tr(rho_k M_k) for the returned POVM and dual_value
    is Tr(Z) for the returned certificate; the true inner minimum lies between them.
    as_value = total_weight - primal_value, so it never overstates the optimum.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    as_value: float
    total_weight: float
    primal_value: float
    dual_value: float
    duality_gap: float
    povm: Tuple[ComplexMatrix, ...]
    dual_certificate: ComplexMatrix
    iterations: int = 0
    method: Literal["fixed_point", "conic", "trivial", "closed_form", "supplied"] = "fixed_point"
    adjustment: Literal["none", "null-padding", "absent-label"] = "none"
    perfect: bool = False

    @field_validator("povm", mode="before")
    @classmethod
    def _as_matrices(cls, value):
        return tuple(ComplexMatrix.of(m) for m in value)

    @field_validator("dual_certificate", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return ComplexMatrix.of(value)

    @property
    def inner_minimum(self) -> float:
        return self.primal_value

    def povm_traces(self) -> Tuple[float, ...]:
        return tuple(float(m.trace().real) for m in self.povm)


class HeinosaariCertificate(BaseModel):
    """Positive mu_i with sum_i mu_i rho_i = I"""

    model_config = ConfigDict(frozen=True)

    mu: Tuple[float, ...]
    residual: float = 0.0

    @model_validator(mode="after")
    def _positive(self):
        if not self.mu or any(m <= 0.0 for m in self.mu):
            raise InvalidParameterError("certificate coefficients must be positive")
        return self

    def as_array(self) -> np.ndarray:
        return np.array(self.mu, dtype=float)

