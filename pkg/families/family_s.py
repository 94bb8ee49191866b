"""
Family S: three m-outcome measurements for m = 0 (mod 4).

Measurement 1 is the Schmidt basis {eta_a}. Measurement 2 pairs a with a+1 for
odd a, measurement 3 pairs a with m+1-a; each pair (a, p) with a < p becomes
    omega eta_a + sqrt(1-omega^2) eta_p,   sqrt(1-omega^2) eta_a - omega eta_p.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.exceptions import InvalidParameterError
from families.base import MeasurementFamily, check_interior, check_nonzero, paired_vector, pairing_ratio
from models.quantum import MeasurementEnsemble


def neighbour_partner(a: int) -> int:
    """Measurement-2 partner (one-based): a+1 for odd a, a-1 for even a"""
    return a + 1 if a % 2 == 1 else a - 1


def mirror_partners(m: int) -> List[int]:
    """Measurement-3 partners of family S (one-based): m+1-a"""
    return [m + 1 - a for a in range(1, m + 1)]


def check_dimension_s(m: int) -> None:
    if m < 4 or m % 4 != 0:
        raise InvalidParameterError(f"family S needs a dimension divisible by 4, got {m}")


class FamilySParams(BaseModel):
    """Parameter omega and Schmidt coefficients nu of family S"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    omega: float
    coeffs: Tuple[complex, ...]

    @field_validator("coeffs", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return tuple(complex(c) for c in np.asarray(value, dtype=complex).reshape(-1))

    @model_validator(mode="after")
    def _invariants(self):
        check_dimension_s(len(self.coeffs))
        check_nonzero(np.array(self.coeffs), "nu")
        check_interior("omega", self.omega, 0.0, 1.0)
        return self

    @property
    def m(self) -> int:
        return len(self.coeffs)


def partner_table(partners_2: Sequence[int], partners_3: Sequence[int]) -> List[Tuple[int, int]]:
    return list(zip(partners_2, partners_3))


def paired_bound(coeffs: Sequence[complex], partners: Sequence[Tuple[int, int]]) -> float:
    """min over a of the pairing ratios for both partners of a (one-based partners)"""
    moduli_sq = check_nonzero(np.asarray(coeffs, dtype=complex), "c")
    ratios = []
    for a, (p2, p3) in enumerate(partners):
        ratios.append(pairing_ratio(moduli_sq, a, p2 - 1))
        ratios.append(pairing_ratio(moduli_sq, a, p3 - 1))
    return float(min(ratios))


def s_partners(m: int) -> List[Tuple[int, int]]:
    check_dimension_s(m)
    return partner_table([neighbour_partner(a) for a in range(1, m + 1)], mirror_partners(m))


def theorem2_omega_bound(coeffs: Sequence[complex]) -> float:
    """
    Largest admissible omega^2:
        min_a min{ |nu_p2|^2 / (3|nu_a|^2 + |nu_p2|^2),  |nu_p3|^2 / (3|nu_a|^2 + |nu_p3|^2) }
    with p2, p3 the measurement-2 and measurement-3 partners of a. Depends only on |nu_a|.
    """
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    return paired_bound(coeffs, s_partners(len(coeffs)))


def paired_table(dim: int, weight: float, partners: Sequence[Tuple[int, int]]) -> np.ndarray:
    table = np.zeros((3, dim, dim), dtype=complex)
    table[0] = np.eye(dim)
    for a, (p2, p3) in enumerate(partners):
        table[1, a] = paired_vector(dim, a, p2 - 1, weight)
        table[2, a] = paired_vector(dim, a, p3 - 1, weight)
    return table


class FamilyS(MeasurementFamily):
    """Three m-outcome measurements for m divisible by 4"""

    def __init__(self, params: FamilySParams, basis: Optional[Sequence] = None):
        self.params = params
        super().__init__(params.m, basis)

    def get_name(self) -> str:
        return "S"

    @property
    def theorem(self) -> str:
        return "T2"

    @property
    def parameter_name(self) -> str:
        return "omega"

    @property
    def parameter(self) -> float:
        return self.params.omega

    def validate(self) -> None:
        check_dimension_s(self.dim)
        check_interior("omega", self.params.omega, 0.0, 1.0)

    def partners(self) -> List[Tuple[int, int]]:
        return s_partners(self.dim)

    def coefficient_table(self) -> np.ndarray:
        return paired_table(self.dim, self.params.omega, self.partners())

    def bound(self) -> float:
        return theorem2_omega_bound(self.params.coeffs)

    def describe(self):
        info = super().describe()
        info.update({"bound": self.bound()})
        return info


def build_family_S(params: FamilySParams, basis: Optional[Sequence] = None) -> MeasurementEnsemble:
    return FamilyS(params, basis).build()
