"""
Dense complex linear algebra on numpy arrays.

Everything here is array-in, array-out; the typed wrappers that speak in
ComplexMatrix / DensityOperator values live in core.operations.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from config import settings
from core.exceptions import DimensionMismatchError, NotHermitianError

logger = logging.getLogger(__name__)


def as_matrix(a) -> np.ndarray:
    """Coerce anything array-like (including ComplexMatrix) into a 2-D complex array"""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def check_hermitian(a: np.ndarray, tol: float) -> np.ndarray:
    """Return the Hermitian part of `a`, raising if `a` is not Hermitian within tol"""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    deviation = float(np.max(np.abs(a - a.conj().T), initial=0.0))
    if deviation > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |A - A^dagger| = {deviation:.3e})")
    return hermitian_part(a)


def jacobi_eigh(
    a: np.ndarray,
    tol: float = 1e-14,
    max_sweeps: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi diagonalization of a Hermitian matrix.

    Each rotation first removes the phase of a[p, q] with a diagonal unitary,
    then applies the real Jacobi rotation that zeroes it.

    Returns:
        (eigenvalues, eigenvectors) in the order the sweeps leave them
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if max_sweeps is None:
        max_sweeps = settings.jacobi_max_sweeps

    scale = float(np.linalg.norm(a))
    if n < 2 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2)), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= tol * scale * 1e-3:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                v[:, cols] = v[:, cols] @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
        logger.debug(f"Jacobi sweep {sweep + 1}: off-diagonal norm {off:.3e}")
    else:
        logger.warning(f"Jacobi eigensolver hit {max_sweeps} sweeps on a {n}x{n} matrix")

    return np.real(np.diag(a)).copy(), v


def hermitian_eig(
    a: np.ndarray,
    tol: Optional[float] = None,
    backend: Optional[str] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a Hermitian matrix.

    Returns:
        eigenvalues in descending order and the matching orthonormal eigenvectors as columns
    """
    tol = settings.algebraic_tol if tol is None else tol
    h = check_hermitian(a, tol * max(1.0, float(np.max(np.abs(as_matrix(a)), initial=0.0))))
    backend = backend or settings.eigensolver

    if backend == "jacobi":
        values, vectors = jacobi_eigh(h)
    elif backend == "lapack":
        values, vectors = np.linalg.eigh(h)
    else:
        raise ValueError(f"Unknown eigensolver backend: {backend}")

    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def eigvalsh(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part, via LAPACK (hot-loop helper)"""
    return np.linalg.eigvalsh(hermitian_part(as_matrix(a)))


def min_eigenvalue(a: np.ndarray) -> float:
    return float(eigvalsh(a)[0])


def is_psd(a: np.ndarray, tol: float) -> bool:
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        return False
    return min_eigenvalue(a) >= -tol


def is_projector(a: np.ndarray, tol: float) -> bool:
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        return False
    return bool(np.max(np.abs(a @ a - a), initial=0.0) <= tol)


def psd_power(a: np.ndarray, power: float, floor: float = 0.0) -> np.ndarray:
    """Matrix power of a PSD matrix; eigenvalues below `floor` are treated as zero"""
    values, vectors = np.linalg.eigh(hermitian_part(as_matrix(a)))
    values = np.where(values > floor, values, 0.0)
    with np.errstate(divide="ignore"):
        powered = np.where(values > 0.0, np.abs(values) ** power, 0.0)
    return (vectors * powered) @ vectors.conj().T


def project_psd(a: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (clip negative eigenvalues)"""
    values, vectors = np.linalg.eigh(hermitian_part(as_matrix(a)))
    return (vectors * np.clip(values, 0.0, None)) @ vectors.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def split_dims(total: int, d_a: int) -> Tuple[int, int]:
    if d_a <= 0 or total % d_a != 0:
        raise DimensionMismatchError(f"subsystem dimension {d_a} does not divide {total}")
    return d_a, total // d_a


def partial_trace(rho: np.ndarray, d_a: int, keep: str = "B") -> np.ndarray:
    """
    Partial trace of an operator on C^{d_a} (x) C^{d_b}.

    Args:
        keep: "B" traces out A, "A" traces out B
    """
    rho = as_matrix(rho)
    d_a, d_b = split_dims(rho.shape[0], d_a)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"expected a square operator, got shape {rho.shape}")
    blocks = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "B":
        return np.einsum("ijik->jk", blocks)
    if keep == "A":
        return np.einsum("ijkj->ik", blocks)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def orthonormal_complement(vectors: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """
    Orthonormal basis (as columns) of the complement of span(columns of `vectors`).
    """
    if vectors.size == 0:
        return np.eye(dim, dtype=complex)
    frame = vectors @ vectors.conj().T
    values, basis = np.linalg.eigh(hermitian_part(frame))
    return basis[:, values <= tol]
