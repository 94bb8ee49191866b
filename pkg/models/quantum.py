"""
Quantum state and measurement data model.
Pydantic models over immutable numpy arrays; invariants are checked on construction.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import settings
from core import linalg
from core.exceptions import DimensionMismatchError, InvalidParameterError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


class ComplexMatrix(BaseModel):
    """Dense complex matrix, stored row-major"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def _coerce(cls, value):
        if isinstance(value, ComplexMatrix):
            value = value.data
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"ComplexMatrix needs a 2-D array, got shape {arr.shape}")
        return _frozen(arr)

    @classmethod
    def of(cls, value) -> "ComplexMatrix":
        return value if isinstance(value, ComplexMatrix) else cls(data=value)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Sequence[complex]) -> "ComplexMatrix":
        if len(entries) != rows * cols:
            raise DimensionMismatchError(f"{len(entries)} entries cannot fill a {rows}x{cols} matrix")
        return cls(data=np.asarray(entries, dtype=complex).reshape(rows, cols))

    @classmethod
    def identity(cls, dim: int) -> "ComplexMatrix":
        return cls(data=np.eye(dim, dtype=complex))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def entries(self) -> List[complex]:
        return [complex(z) for z in self.data.reshape(-1)]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def dagger(self) -> "ComplexMatrix":
        return ComplexMatrix(data=self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, tol: Optional[float] = None) -> bool:
        return linalg.is_hermitian(self.data, settings.algebraic_tol if tol is None else tol)

    def is_psd(self, tol: Optional[float] = None) -> bool:
        return linalg.is_psd(self.data, settings.algebraic_tol if tol is None else tol)

    def is_projector(self, tol: Optional[float] = None) -> bool:
        return linalg.is_projector(self.data, settings.algebraic_tol if tol is None else tol)

    def distance(self, other: "ComplexMatrix") -> float:
        """Operator (spectral) norm of the difference"""
        return float(np.linalg.norm(self.data - np.asarray(other), ord=2))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


class PureState(BaseModel):
    """Unit vector in C^dim"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _unit_norm(cls, value):
        if isinstance(value, PureState):
            value = value.amplitudes
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatchError(f"PureState needs a non-empty 1-D array, got shape {arr.shape}")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > settings.algebraic_tol:
            raise InvalidParameterError(f"state is not normalized (norm {norm:.12f})")
        return _frozen(arr)

    @classmethod
    def normalized(cls, vector) -> "PureState":
        vec = np.asarray(vector, dtype=complex)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise InvalidParameterError("cannot normalize the zero vector")
        return cls(amplitudes=vec / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        vec = np.zeros(dim, dtype=complex)
        vec[index] = 1.0
        return cls(amplitudes=vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def projector(self) -> ComplexMatrix:
        return ComplexMatrix(data=np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, np.asarray(other)))

    def overlap(self, other: "PureState") -> float:
        """Squared overlap |<self|other>|^2"""
        return abs(self.inner(other)) ** 2


class DensityOperator(BaseModel):
    """Hermitian, PSD, unit-trace operator"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: ComplexMatrix

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return ComplexMatrix.of(value)

    @model_validator(mode="after")
    def _state_invariants(self):
        data = self.matrix.data
        tol = settings.algebraic_tol
        if data.shape[0] != data.shape[1]:
            raise DimensionMismatchError(f"density operator must be square, got {data.shape}")
        if not linalg.is_hermitian(data, tol):
            raise InvalidParameterError("density operator is not Hermitian")
        trace = np.trace(data).real
        if abs(trace - 1.0) > tol:
            raise InvalidParameterError(f"density operator trace is {trace:.12f}, expected 1")
        if linalg.min_eigenvalue(data) < -tol:
            raise InvalidParameterError("density operator is not positive semidefinite")
        return self

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityOperator":
        return cls(matrix=psi.projector())

    @classmethod
    def from_unnormalized(cls, operator) -> "DensityOperator":
        data = linalg.hermitian_part(linalg.as_matrix(operator))
        trace = np.trace(data).real
        if trace <= 0.0:
            raise InvalidParameterError("operator has non-positive trace")
        return cls(matrix=data / trace)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(matrix=np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.rows

    @property
    def data(self) -> np.ndarray:
        return self.matrix.data

    def __array__(self, dtype=None, copy=None):
        return self.matrix.data if dtype is None else self.matrix.data.astype(dtype)

    def purity_overlap(self, other: "DensityOperator") -> float:
        """Tr(rho sigma)"""
        return float(np.real(np.trace(self.data @ other.data)))


class ProjectiveMeasurement(BaseModel):
    """Rank-1 projective measurement {|v_a><v_a|}"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    effects: Tuple[ComplexMatrix, ...]

    @field_validator("effects", mode="before")
    @classmethod
    def _as_matrices(cls, value):
        return tuple(ComplexMatrix.of(e) for e in value)

    @model_validator(mode="after")
    def _complete_rank_one(self):
        tol = settings.algebraic_tol
        if not self.effects:
            raise InvalidParameterError("a measurement needs at least one effect")
        dim = self.effects[0].rows
        total = np.zeros((dim, dim), dtype=complex)
        for index, effect in enumerate(self.effects):
            if effect.data.shape != (dim, dim):
                raise DimensionMismatchError(f"effect {index + 1} has shape {effect.data.shape}, expected {(dim, dim)}")
            if not effect.is_projector(tol):
                raise InvalidParameterError(f"effect {index + 1} is not a projector")
            if abs(effect.trace().real - 1.0) > tol:
                raise InvalidParameterError(f"effect {index + 1} is not rank one")
            total = total + effect.data
        if np.max(np.abs(total - np.eye(dim)), initial=0.0) > tol:
            raise InvalidParameterError("effects do not sum to the identity")
        return self

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> "ProjectiveMeasurement":
        states = [v if isinstance(v, PureState) else PureState.normalized(v) for v in vectors]
        return cls(effects=[s.projector() for s in states])

    @property
    def dim(self) -> int:
        return self.effects[0].rows

    @property
    def outcomes(self) -> int:
        return len(self.effects)

    def vectors(self) -> np.ndarray:
        """Unit vectors spanning each effect, one per row (phase fixed by the leading eigenvector)"""
        rows = []
        for effect in self.effects:
            _, vecs = np.linalg.eigh(effect.data)
            rows.append(vecs[:, -1])
        return np.array(rows)


class MeasurementEnsemble(BaseModel):
    """Measurements {M_{a|x}} sampled with priors {p_x}"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    measurements: Tuple[ProjectiveMeasurement, ...]
    priors: Tuple[float, ...]

    @model_validator(mode="after")
    def _consistent(self):
        if not self.measurements:
            raise InvalidParameterError("an ensemble needs at least one measurement")
        if len(self.priors) != len(self.measurements):
            raise InvalidParameterError(
                f"{len(self.priors)} priors for {len(self.measurements)} measurements"
            )
        if any(p <= 0.0 for p in self.priors):
            raise InvalidParameterError("every prior must be positive")
        if abs(sum(self.priors) - 1.0) > 1e-12:
            raise InvalidParameterError(f"priors sum to {sum(self.priors):.15f}, expected 1")
        dim, outcomes = self.measurements[0].dim, self.measurements[0].outcomes
        for index, m in enumerate(self.measurements):
            if m.dim != dim or m.outcomes != outcomes:
                raise DimensionMismatchError(
                    f"measurement {index + 1} is {m.dim}-dimensional with {m.outcomes} outcomes, "
                    f"expected {dim} and {outcomes}"
                )
        return self

    @classmethod
    def uniform(cls, measurements: Sequence[ProjectiveMeasurement]) -> "MeasurementEnsemble":
        count = len(measurements)
        return cls(measurements=tuple(measurements), priors=tuple([1.0 / count] * count))

    @property
    def dim(self) -> int:
        return self.measurements[0].dim

    @property
    def outcomes(self) -> int:
        return self.measurements[0].outcomes

    @property
    def size(self) -> int:
        return len(self.measurements)

    def effect_tensor(self) -> np.ndarray:
        """Array E[x, a] of effects, shape (l, f, d, d)"""
        return np.array([[e.data for e in m.effects] for m in self.measurements])

    def vector_table(self) -> np.ndarray:
        """Array V[a, x] of unit effect vectors, shape (f, l, d)"""
        return np.stack([m.vectors() for m in self.measurements], axis=1)


class BipartiteState(BaseModel):
    """A d (x) d pure state in Schmidt form: sum_a c_a |A_a>|B_a>"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    schmidt_coeffs: np.ndarray
    basis_a: Tuple[PureState, ...]
    basis_b: Tuple[PureState, ...]

    @field_validator("schmidt_coeffs", mode="before")
    @classmethod
    def _coeffs(cls, value):
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 1:
            raise DimensionMismatchError("Schmidt coefficients must be a vector")
        return _frozen(arr)

    @field_validator("basis_a", "basis_b", mode="before")
    @classmethod
    def _basis(cls, value):
        return tuple(v if isinstance(v, PureState) else PureState(amplitudes=v) for v in value)

    @model_validator(mode="after")
    def _schmidt_invariants(self):
        tol = settings.algebraic_tol
        d = self.schmidt_coeffs.shape[0]
        if len(self.basis_a) != d or len(self.basis_b) != d:
            raise DimensionMismatchError(f"need {d} basis vectors per side")
        weight = float(np.sum(np.abs(self.schmidt_coeffs) ** 2))
        if abs(weight - 1.0) > tol:
            raise InvalidParameterError(f"squared Schmidt coefficients sum to {weight:.12f}, expected 1")
        for side, basis in (("A", self.basis_a), ("B", self.basis_b)):
            if any(v.dim != d for v in basis):
                raise DimensionMismatchError(f"basis {side} vectors must be {d}-dimensional")
            mat = np.array([v.amplitudes for v in basis])
            if np.max(np.abs(mat.conj() @ mat.T - np.eye(d)), initial=0.0) > tol:
                raise InvalidParameterError(f"basis {side} is not orthonormal")
        return self

    @classmethod
    def from_schmidt(
        cls,
        coeffs: Sequence[complex],
        basis_a: Optional[Sequence] = None,
        basis_b: Optional[Sequence] = None,
    ) -> "BipartiteState":
        coeffs = np.asarray(coeffs, dtype=complex)
        d = coeffs.shape[0]
        eye = np.eye(d, dtype=complex)
        return cls(
            schmidt_coeffs=coeffs,
            basis_a=list(eye) if basis_a is None else list(basis_a),
            basis_b=list(eye) if basis_b is None else list(basis_b),
        )

    @classmethod
    def maximally_entangled(cls, dim: int) -> "BipartiteState":
        return cls.from_schmidt(np.full(dim, 1.0 / np.sqrt(dim)))

    @classmethod
    def product(cls, a: PureState, b: PureState) -> "BipartiteState":
        """|a>|b> written with a single non-zero Schmidt coefficient"""
        if a.dim != b.dim:
            raise DimensionMismatchError("product probe needs equal local dimensions")
        d = a.dim
        coeffs = np.zeros(d, dtype=complex)
        coeffs[0] = 1.0
        comp_a = linalg.orthonormal_complement(a.amplitudes.reshape(-1, 1), d)
        comp_b = linalg.orthonormal_complement(b.amplitudes.reshape(-1, 1), d)
        return cls(
            schmidt_coeffs=coeffs,
            basis_a=[a] + [PureState(amplitudes=comp_a[:, i]) for i in range(d - 1)],
            basis_b=[b] + [PureState(amplitudes=comp_b[:, i]) for i in range(d - 1)],
        )

    @property
    def dim(self) -> int:
        return self.schmidt_coeffs.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Schmidt weights |c_a|^2"""
        return np.abs(self.schmidt_coeffs) ** 2

    def nonzero_count(self, tol: Optional[float] = None) -> int:
        tol = settings.algebraic_tol if tol is None else tol
        return int(np.sum(np.abs(self.schmidt_coeffs) > tol))

    def is_entangled(self, tol: Optional[float] = None) -> bool:
        return self.nonzero_count(tol) >= 2

    def is_full_schmidt_rank(self, tol: Optional[float] = None) -> bool:
        return self.nonzero_count(tol) == self.dim

    def to_pure_state(self) -> PureState:
        vec = np.zeros(self.dim * self.dim, dtype=complex)
        for c, a, b in zip(self.schmidt_coeffs, self.basis_a, self.basis_b):
            vec = vec + c * np.kron(a.amplitudes, b.amplitudes)
        return PureState(amplitudes=vec)

    def density(self) -> DensityOperator:
        return DensityOperator.from_pure(self.to_pure_state())
