"""
Seeded random sampling of states and operators.
All functions take an explicit numpy Generator so results are reproducible.
"""

from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from models.quantum import BipartiteState, DensityOperator, PureState


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    return PureState(amplitudes=random_vector(dim, rng))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary"""
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def random_density_operator(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Induced-measure density operator of the given rank (full rank by default)"""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return DensityOperator.from_unnormalized(g @ g.conj().T)


def random_bipartite_state(
    dim: int,
    rng: np.random.Generator,
    min_modulus: float = 0.0,
    random_bases: bool = True,
) -> BipartiteState:
    """
    Random d (x) d state in Schmidt form with complex coefficients.

    Args:
        min_modulus: lower bound on the unnormalized coefficient moduli, drawn in [min_modulus, 1]
        random_bases: draw Haar-random local bases instead of the computational ones
    """
    moduli = min_modulus + (1.0 - min_modulus) * rng.random(dim)
    moduli = np.where(moduli > 0.0, moduli, 1e-3)
    phases = np.exp(2j * np.pi * rng.random(dim))
    coeffs = moduli * phases
    coeffs = coeffs / np.linalg.norm(coeffs)
    if not random_bases:
        return BipartiteState.from_schmidt(coeffs)
    u_a = random_unitary(dim, rng)
    u_b = random_unitary(dim, rng)
    return BipartiteState.from_schmidt(
        coeffs,
        basis_a=[u_a[:, i] for i in range(dim)],
        basis_b=[u_b[:, i] for i in range(dim)],
    )
