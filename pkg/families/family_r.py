"""
Family R: three two-outcome measurements for a qubit-qubit probe.

    measurement 1   {psi, psi_perp}
    measurement 2   {cos x psi + e^{i theta} sin x psi_perp,  sin x psi - e^{i theta} cos x psi_perp}
    measurement 3   {cos x psi - e^{i theta} sin x psi_perp,  sin x psi + e^{i theta} cos x psi_perp}
"""

import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from core.exceptions import InvalidParameterError
from families.base import MeasurementFamily, check_interior
from models.quantum import MeasurementEnsemble


class FamilyRParams(BaseModel):
    """Schmidt weight lambda, angle x and phase theta of family R"""

    model_config = ConfigDict(frozen=True)

    lam: float
    x_angle: float
    phase: float = 0.0

    @model_validator(mode="after")
    def _interior(self):
        check_interior("lambda", self.lam, 0.0, 1.0)
        check_interior("x", self.x_angle, 0.0, math.pi / 2)
        if not math.isfinite(self.phase):
            raise InvalidParameterError("phase must be finite")
        return self


def theorem1_x_bound(lam: float) -> float:
    """
    Infimum of the admissible tan^2 x: max{lambda/(1-lambda), (1-lambda)/lambda}.
    Diverges as lambda approaches 0 or 1.
    """
    check_interior("lambda", lam, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return float(max(lam / (1.0 - lam), (1.0 - lam) / lam))


def x_from_tan_squared(tan_sq: float) -> float:
    if math.isinf(tan_sq):
        raise InvalidParameterError("Schmidt weight is too close to 0 or 1 for an admissible x")
    return math.atan(math.sqrt(tan_sq))


class FamilyR(MeasurementFamily):
    """Three qubit measurements tuned to a two-qubit state with Schmidt weight lambda"""

    def __init__(self, params: FamilyRParams, basis: Optional[Sequence] = None):
        self.params = params
        super().__init__(2, basis)

    def get_name(self) -> str:
        return "R"

    @property
    def theorem(self) -> str:
        return "T1"

    @property
    def parameter_name(self) -> str:
        return "x"

    @property
    def parameter(self) -> float:
        return self.params.x_angle

    def validate(self) -> None:
        check_interior("x", self.params.x_angle, 0.0, math.pi / 2)

    def coefficient_table(self) -> np.ndarray:
        c, s = math.cos(self.params.x_angle), math.sin(self.params.x_angle)
        e = np.exp(1j * self.params.phase)
        return np.array(
            [
                [[1.0, 0.0], [0.0, 1.0]],
                [[c, e * s], [s, -e * c]],
                [[c, -e * s], [s, e * c]],
            ],
            dtype=complex,
        )

    def bound(self) -> float:
        return theorem1_x_bound(self.params.lam)

    def satisfies_bound(self) -> bool:
        """tan^2 x strictly above the bound"""
        return math.tan(self.params.x_angle) ** 2 > self.bound()

    def describe(self):
        info = super().describe()
        info.update({"lambda": self.params.lam, "phase": self.params.phase, "bound": self.bound()})
        return info


def build_family_R(params: FamilyRParams, basis: Optional[Sequence] = None) -> MeasurementEnsemble:
    return FamilyR(params, basis).build()
