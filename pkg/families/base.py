"""
Base class that all measurement families inherit from.
Every family is three rank-1 projective measurements sampled with priors 1/3,
written as coefficient vectors over a local orthonormal basis.
"""

from abc import ABC, abstractmethod
from typing import Dict, Optional, Sequence, Tuple
import logging

import numpy as np

from core.exceptions import DimensionMismatchError, InvalidParameterError
from models.quantum import MeasurementEnsemble, ProjectiveMeasurement, PureState

logger = logging.getLogger(__name__)

PRIORS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


class MeasurementFamily(ABC):
    """Abstract base class for the R, S and Q constructions"""

    def __init__(self, dim: int, basis: Optional[Sequence] = None):
        self.dim = dim
        self.name = self.get_name()
        self.logger = logging.getLogger(f"families.{self.name}")
        self.basis = self._resolve_basis(dim, basis)

    @abstractmethod
    def get_name(self) -> str:
        """Return the family identifier ('R', 'S' or 'Q')"""
        pass

    @property
    @abstractmethod
    def theorem(self) -> str:
        """Tag of the theorem this family realizes"""
        pass

    @property
    @abstractmethod
    def parameter_name(self) -> str:
        pass

    @property
    @abstractmethod
    def parameter(self) -> float:
        """The construction parameter (x for R, omega for S, epsilon for Q)"""
        pass

    @abstractmethod
    def validate(self) -> None:
        """Raise InvalidParameterError if the parameters are outside the family's domain"""
        pass

    @abstractmethod
    def coefficient_table(self) -> np.ndarray:
        """
        Effect vectors in basis coordinates.

        Returns:
            Array T[x, a] of shape (3, d, d); row T[x, a] is the coefficient
            vector of outcome a of measurement x
        """
        pass

    @abstractmethod
    def bound(self) -> float:
        """The parameter bound of the matching theorem for this family's state data"""
        pass

    def build(self) -> MeasurementEnsemble:
        """Realize the family as a measurement ensemble with priors 1/3"""
        self.validate()
        table = self.coefficient_table()
        basis = self.basis_matrix()
        measurements = []
        for x in range(table.shape[0]):
            vectors = [PureState.normalized(basis @ table[x, a]) for a in range(self.dim)]
            measurements.append(ProjectiveMeasurement.from_vectors(vectors))
        ensemble = MeasurementEnsemble(measurements=tuple(measurements), priors=PRIORS)
        self.logger.info(
            f"Built family {self.name} in dimension {self.dim} with "
            f"{self.parameter_name}={self.parameter:.6g}"
        )
        return ensemble

    def basis_matrix(self) -> np.ndarray:
        """Basis vectors as columns"""
        return np.array([v.amplitudes for v in self.basis]).T

    def expected_weights(self, schmidt_weights: Sequence[float]) -> np.ndarray:
        """
        Closed-form p_x p(a|x) for the probe sum_c nu_c |basis_c>|B_c>.

        Returns:
            Array W[a, x] of shape (d, 3)
        """
        w = np.asarray(schmidt_weights, dtype=float)
        if w.shape != (self.dim,):
            raise DimensionMismatchError(f"need {self.dim} Schmidt weights, got {w.shape}")
        table = np.abs(self.coefficient_table()) ** 2
        return (np.einsum("xac,c->ax", table, w) * np.array(PRIORS)).real

    def describe(self) -> Dict:
        return {
            "family": self.name,
            "theorem": self.theorem,
            "dim": self.dim,
            "parameter_name": self.parameter_name,
            "parameter": float(self.parameter),
        }

    @staticmethod
    def _resolve_basis(dim: int, basis: Optional[Sequence]) -> Tuple[PureState, ...]:
        if basis is None:
            return tuple(PureState.basis(dim, i) for i in range(dim))
        states = tuple(v if isinstance(v, PureState) else PureState(amplitudes=v) for v in basis)
        if len(states) != dim or any(s.dim != dim for s in states):
            raise DimensionMismatchError(f"need {dim} basis vectors of dimension {dim}")
        gram = np.array([[a.inner(b) for b in states] for a in states])
        if np.max(np.abs(gram - np.eye(dim)), initial=0.0) > 1e-9:
            raise InvalidParameterError("family basis is not orthonormal")
        return states


def paired_vector(dim: int, a: int, partner: int, weight: float) -> np.ndarray:
    """
    Coefficient vector of outcome a paired with `partner` (zero-based indices).

    The lower index of a pair takes w|a> + sqrt(1-w^2)|partner>, the higher one
    sqrt(1-w^2)|partner> - w|a>, so the two vectors of a pair are orthogonal.
    """
    vec = np.zeros(dim, dtype=complex)
    other = np.sqrt(1.0 - weight * weight)
    if a < partner:
        vec[a] = weight
        vec[partner] = other
    else:
        vec[partner] = other
        vec[a] = -weight
    return vec


def pairing_ratio(moduli_sq: np.ndarray, a: int, partner: int) -> float:
    """|c_partner|^2 / (3|c_a|^2 + |c_partner|^2)"""
    return float(moduli_sq[partner] / (3.0 * moduli_sq[a] + moduli_sq[partner]))


def check_interior(name: str, value: float, low: float, high: float) -> None:
    if not (low < value < high):
        raise InvalidParameterError(f"{name} must lie strictly inside ({low:g}, {high:g}), got {value!r}")


def check_nonzero(coeffs: np.ndarray, symbol: str) -> np.ndarray:
    moduli_sq = np.abs(np.asarray(coeffs, dtype=complex)) ** 2
    if np.any(moduli_sq <= 0.0):
        raise InvalidParameterError(f"every coefficient {symbol}_a must be non-zero")
    return moduli_sq
