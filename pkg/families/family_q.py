"""
Family Q: three n-outcome measurements for n = 2 (mod 4), n >= 6.

Measurements 1 and 2 follow family S with epsilon in place of omega.
Measurement 3 mirrors a with n+1-a on the outer indices, while the four middle
indices (n-2)/2, n/2, (n+2)/2, (n+4)/2 are paired by a shift of two: the mirror
pairing there would reproduce a measurement-2 pair.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.exceptions import InvalidParameterError
from families.base import MeasurementFamily, check_interior, check_nonzero
from families.family_s import neighbour_partner, paired_bound, paired_table, partner_table
from models.quantum import MeasurementEnsemble


def check_dimension_q(n: int) -> None:
    if n < 6 or n % 4 != 2:
        raise InvalidParameterError(f"family Q needs a dimension n >= 6 with n = 2 (mod 4), got {n}")


def shifted_partners(n: int) -> List[int]:
    """Measurement-3 partners of family Q (one-based)"""
    partners = []
    for a in range(1, n + 1):
        if a in ((n - 2) // 2, n // 2):
            partners.append(a + 2)
        elif a in ((n + 2) // 2, (n + 4) // 2):
            partners.append(a - 2)
        else:
            partners.append(n + 1 - a)
    return partners


def q_partners(n: int) -> List[Tuple[int, int]]:
    check_dimension_q(n)
    return partner_table([neighbour_partner(a) for a in range(1, n + 1)], shifted_partners(n))


class FamilyQParams(BaseModel):
    """Parameter epsilon and Schmidt coefficients theta of family Q"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    epsilon: float
    coeffs: Tuple[complex, ...]

    @field_validator("coeffs", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return tuple(complex(c) for c in np.asarray(value, dtype=complex).reshape(-1))

    @model_validator(mode="after")
    def _invariants(self):
        check_dimension_q(len(self.coeffs))
        check_nonzero(np.array(self.coeffs), "theta")
        check_interior("epsilon", self.epsilon, 0.0, 1.0)
        return self

    @property
    def n(self) -> int:
        return len(self.coeffs)


def theorem3_epsilon_bound(coeffs: Sequence[complex]) -> float:
    """
    Largest admissible epsilon^2: the family-S ratio rule evaluated with the
    partners family Q actually uses (a+-1 in measurement 2; n+1-a or a+-2 in
    measurement 3).
    """
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    return paired_bound(coeffs, q_partners(len(coeffs)))


class FamilyQ(MeasurementFamily):
    """Three n-outcome measurements for n = 2 (mod 4)"""

    def __init__(self, params: FamilyQParams, basis: Optional[Sequence] = None):
        self.params = params
        super().__init__(params.n, basis)

    def get_name(self) -> str:
        return "Q"

    @property
    def theorem(self) -> str:
        return "T3"

    @property
    def parameter_name(self) -> str:
        return "epsilon"

    @property
    def parameter(self) -> float:
        return self.params.epsilon

    def validate(self) -> None:
        check_dimension_q(self.dim)
        check_interior("epsilon", self.params.epsilon, 0.0, 1.0)

    def partners(self) -> List[Tuple[int, int]]:
        return q_partners(self.dim)

    def coefficient_table(self) -> np.ndarray:
        return paired_table(self.dim, self.params.epsilon, self.partners())

    def bound(self) -> float:
        return theorem3_epsilon_bound(self.params.coeffs)

    def describe(self):
        info = super().describe()
        info.update({"bound": self.bound()})
        return info


def build_family_Q(params: FamilyQParams, basis: Optional[Sequence] = None) -> MeasurementEnsemble:
    return FamilyQ(params, basis).build()
