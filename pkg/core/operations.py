"""
Typed linear-algebra operations on the quantum data model.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from config import Tolerances, default_tolerances
from core import linalg
from core.exceptions import DimensionMismatchError
from models.quantum import BipartiteState, ComplexMatrix, DensityOperator, PureState

logger = logging.getLogger(__name__)


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product a (x) b"""
    return ComplexMatrix(data=linalg.kron(np.asarray(a), np.asarray(b)))


def partial_trace_A(rho: DensityOperator, d_a: int) -> DensityOperator:
    """Marginal on B of an operator on C^{d_a} (x) C^{d_b}"""
    return DensityOperator(matrix=linalg.hermitian_part(linalg.partial_trace(rho.data, d_a, keep="B")))


def partial_trace_B(rho: DensityOperator, d_a: int) -> DensityOperator:
    """Marginal on A of an operator on C^{d_a} (x) C^{d_b}"""
    return DensityOperator(matrix=linalg.hermitian_part(linalg.partial_trace(rho.data, d_a, keep="A")))


def hermitian_eig(
    h: ComplexMatrix,
    tolerances: Optional[Tolerances] = None,
    backend: Optional[str] = None,
) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    Eigenvalues (descending) and orthonormal eigenvectors (columns) of a Hermitian matrix.

    Raises:
        NotHermitianError: if h deviates from Hermitian by more than the algebraic tolerance
    """
    tol = (tolerances or default_tolerances()).algebraic
    values, vectors = linalg.hermitian_eig(np.asarray(h), tol=tol, backend=backend)
    return values, ComplexMatrix(data=vectors)


def square_side(total: int) -> int:
    d = math.isqrt(total)
    if d * d != total:
        raise DimensionMismatchError(f"dimension {total} is not a perfect square")
    return d


def schmidt_decompose(
    psi: PureState,
    tolerances: Optional[Tolerances] = None,
) -> BipartiteState:
    """
    Schmidt form of a pure state on C^d (x) C^d.

    The reduced state on B is diagonalized; with rho_B = sum_a w_a |v_a><v_a| the
    A-side vectors are C conj(v_a) / sqrt(w_a), where C is the d x d amplitude matrix.
    Coefficients come out real, non-negative and descending.
    """
    tolerances = tolerances or default_tolerances()
    d = square_side(psi.dim)
    amplitudes = psi.amplitudes.reshape(d, d)

    rho_b = partial_trace_A(DensityOperator.from_pure(psi), d)
    weights, vectors = hermitian_eig(rho_b.matrix, tolerances)
    weights = np.clip(weights, 0.0, None)
    basis_b = vectors.data

    coeffs = np.sqrt(weights)
    support = coeffs > 1e-12
    columns = []
    for a in range(d):
        if support[a]:
            columns.append(amplitudes @ basis_b[:, a].conj() / coeffs[a])
    basis_a = np.array(columns).T if columns else np.zeros((d, 0), dtype=complex)

    # Re-orthonormalize the A side and complete it where the spectrum vanishes.
    if basis_a.shape[1]:
        q, r = np.linalg.qr(basis_a)
        diag = np.diag(r)
        magnitude = np.abs(diag)
        basis_a = q * np.where(magnitude > 0.0, diag / np.where(magnitude > 0.0, magnitude, 1.0), 1.0)
    missing = d - basis_a.shape[1]
    if missing:
        complement = linalg.orthonormal_complement(basis_a, d)
        basis_a = np.hstack([basis_a, complement[:, :missing]])
        coeffs = np.concatenate([coeffs[support], np.zeros(missing)])
        basis_b = np.hstack([basis_b[:, support], basis_b[:, ~support]])

    logger.debug(f"Schmidt decomposition of a {d}x{d} state: weights {np.round(coeffs ** 2, 6)}")
    return BipartiteState(
        schmidt_coeffs=coeffs,
        basis_a=[basis_a[:, a] for a in range(d)],
        basis_b=[basis_b[:, a] for a in range(d)],
    )
