"""
Measurement families package.
Each family builds three projective measurements tuned to an entangled state.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import Tolerances, default_tolerances
from core.exceptions import InvalidParameterError
from families.base import MeasurementFamily
from families.family_q import FamilyQ, FamilyQParams, build_family_Q, q_partners, theorem3_epsilon_bound
from families.family_r import FamilyR, FamilyRParams, build_family_R, theorem1_x_bound, x_from_tan_squared
from families.family_s import FamilyS, FamilySParams, build_family_S, s_partners, theorem2_omega_bound
from models.quantum import BipartiteState, MeasurementEnsemble

logger = logging.getLogger(__name__)


def family_kind(dim: int) -> str:
    """'R' for d = 2, 'S' for d = 0 (mod 4), 'Q' for d = 2 (mod 4) with d >= 6"""
    if dim < 2 or dim % 2 != 0:
        raise InvalidParameterError(f"even dimension required, got {dim}")
    if dim == 2:
        return "R"
    return "S" if dim % 4 == 0 else "Q"


def pairing_partners(kind: str, dim: int) -> List[Tuple[int, int]]:
    """
    One-based (measurement-2, measurement-3) partner of every outcome a.
    Family R has no pairing beyond its single qubit pair.
    """
    if kind == "S":
        return s_partners(dim)
    if kind == "Q":
        return q_partners(dim)
    if kind == "R":
        if dim != 2:
            raise InvalidParameterError("family R is two-dimensional")
        return [(2, 2), (1, 1)]
    raise InvalidParameterError(f"unknown family {kind!r}")


def family_from_parameters(
    dim: int,
    parameter: float,
    coeffs: Sequence[complex],
    basis: Optional[Sequence] = None,
    phase: float = 0.0,
) -> MeasurementFamily:
    """
    Family for an explicit parameter (x for d = 2, omega or epsilon otherwise).

    Args:
        coeffs: Schmidt coefficients of the intended probe; they fix lambda for
            family R and the reported bound for S and Q
    """
    kind = family_kind(dim)
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    if coeffs.shape[0] != dim:
        raise InvalidParameterError(f"need {dim} Schmidt coefficients, got {coeffs.shape[0]}")
    if kind == "R":
        lam = float(abs(coeffs[0]) ** 2)
        return FamilyR(FamilyRParams(lam=lam, x_angle=parameter, phase=phase), basis)
    if kind == "S":
        return FamilyS(FamilySParams(omega=parameter, coeffs=coeffs), basis)
    return FamilyQ(FamilyQParams(epsilon=parameter, coeffs=coeffs), basis)


def bound_parameter(dim: int, coeffs: Sequence[complex]) -> float:
    """
    The parameter family_for_state picks: tan^2 x = 2 x the Theorem-1 bound for
    d = 2, omega^2 or epsilon^2 at the bound otherwise.
    """
    kind = family_kind(dim)
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    if kind == "R":
        return x_from_tan_squared(2.0 * theorem1_x_bound(float(abs(coeffs[0]) ** 2)))
    if kind == "S":
        return math.sqrt(theorem2_omega_bound(coeffs))
    return math.sqrt(theorem3_epsilon_bound(coeffs))


def family_for_state(
    state: BipartiteState,
    tolerances: Optional[Tolerances] = None,
) -> Tuple[MeasurementEnsemble, float]:
    """Ensemble tailored to `state` and the parameter chosen for it"""
    family = family_object_for_state(state, tolerances)
    return family.build(), family.parameter


def family_object_for_state(
    state: BipartiteState,
    tolerances: Optional[Tolerances] = None,
) -> MeasurementFamily:
    """The family behind family_for_state, built on the state's A-side Schmidt basis"""
    tolerances = tolerances or default_tolerances()
    d = state.dim
    family_kind(d)
    if not state.is_entangled(tolerances.algebraic):
        raise InvalidParameterError("entangled state required")
    if d >= 4 and not state.is_full_schmidt_rank(tolerances.algebraic):
        raise InvalidParameterError("every Schmidt coefficient must be non-zero")
    parameter = bound_parameter(d, state.schmidt_coeffs)
    family = family_from_parameters(d, parameter, state.schmidt_coeffs, basis=state.basis_a)
    logger.info(f"Chose family {family.name} for a {d}x{d} state: {family.parameter_name}={parameter:.6g}")
    return family


def expected_reduced_weights(family: MeasurementFamily, state: BipartiteState) -> np.ndarray:
    """Closed-form p_x p(a|x), shape (d, 3), for a state whose A-side basis is the family basis"""
    return family.expected_weights(state.weights)


__all__ = [
    'MeasurementFamily',
    'FamilyR',
    'FamilyS',
    'FamilyQ',
    'FamilyRParams',
    'FamilySParams',
    'FamilyQParams',
    'build_family_R',
    'build_family_S',
    'build_family_Q',
    'theorem1_x_bound',
    'theorem2_omega_bound',
    'theorem3_epsilon_bound',
    'family_kind',
    'pairing_partners',
    'family_from_parameters',
    'bound_parameter',
    'family_for_state',
    'family_object_for_state',
    'expected_reduced_weights',
]
