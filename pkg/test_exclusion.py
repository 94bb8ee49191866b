"""
Tests for the certified state-exclusion solver and the qubit certificates.

Run with pytest, or directly:
    python test_exclusion.py
"""

import logging
import math

import numpy as np
import pytest

from config import Settings
from core import linalg
from core.exceptions import DimensionMismatchError, InvalidParameterError, NonConvergenceError
from core.sampling import random_density_operator, random_pure_state, rng_from
from families import FamilyR, FamilyRParams, theorem1_x_bound
from models.exclusion import ExclusionInstance, ExclusionResult
from models.quantum import BipartiteState, DensityOperator, PureState
from services.antimeas_service import AntimeasService
from services.exclusion_service import (
    ExclusionSolver,
    as_value,
    barrett_sufficient,
    certify,
    heinosaari_certificate,
    pairwise_closed_form,
    pairwise_overlaps,
    theorem1_mu_closed_form,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

TOL = 1e-7


def trine() -> list:
    return [PureState(amplitudes=[math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)]) for k in range(3)]


def density(psi: PureState) -> DensityOperator:
    return DensityOperator.from_pure(psi)


def assert_certified(instance: ExclusionInstance, result: ExclusionResult, tol: float = TOL) -> None:
    """POVM validity, dual feasibility and the gap bound"""
    povm = np.array([m.data for m in result.povm])
    assert np.max(np.abs(povm.sum(axis=0) - np.eye(instance.dim))) <= 1e-8
    assert all(linalg.min_eigenvalue(m) >= -1e-8 for m in povm)
    z = result.dual_certificate.data
    for a_k in instance.weighted_operators():
        assert linalg.min_eigenvalue(a_k - z) >= -1e-8
    assert result.dual_value <= result.primal_value + 1e-12
    assert result.duality_gap <= tol
    assert result.as_value == pytest.approx(instance.total_weight - result.primal_value, abs=1e-15)


def test_orthogonal_pair():
    instance = ExclusionInstance.uniform([density(PureState.basis(2, 0)), density(PureState.basis(2, 1))])
    result = as_value(instance, TOL)
    assert_certified(instance, result)
    assert result.as_value == pytest.approx(1.0, abs=1e-6)
    assert result.perfect
    logger.info("✓ orthogonal pair excluded perfectly")


def test_identical_pair():
    rho = random_density_operator(3, rng_from(1))
    instance = ExclusionInstance.uniform([rho, rho])
    result = as_value(instance, TOL)
    assert_certified(instance, result)
    assert result.as_value == pytest.approx(0.5, abs=1e-6)
    assert not result.perfect


def test_trine_is_perfect():
    instance = ExclusionInstance.uniform([density(psi) for psi in trine()])
    result = as_value(instance, TOL)
    assert_certified(instance, result)
    assert result.as_value == pytest.approx(1.0, abs=1e-6)
    assert result.perfect
    assert all(t >= 1e-8 for t in result.povm_traces())
    logger.info(f"✓ trine: value {result.as_value:.12f} after {result.iterations} iterations ({result.method})")


def test_orthogonal_qutrit_triple():
    instance = ExclusionInstance.uniform([density(PureState.basis(3, k)) for k in range(3)])
    result = as_value(instance, TOL)
    assert_certified(instance, result)
    assert result.as_value == pytest.approx(1.0, abs=1e-6)


def test_null_element_is_padded():
    """{|0>, |1>, |+>} is perfectly excluded only with M_3 = 0; the result keeps every element non-null"""
    plus = PureState.normalized([1, 1])
    instance = ExclusionInstance.uniform([density(PureState.basis(2, 0)), density(PureState.basis(2, 1)), density(plus)])
    result = as_value(instance, TOL)
    assert_certified(instance, result)
    assert result.perfect
    assert result.adjustment in ("none", "null-padding")
    assert all(t >= 1e-8 for t in result.povm_traces())


@pytest.mark.parametrize("dim", (2, 3))
def test_two_state_oracle(dim):
    """Solver against the closed form 1/2 (q1 + q2) - 1/2 ||q1 rho1 - q2 rho2||_1"""
    rng = rng_from(50 + dim)
    solver = ExclusionSolver()
    for _ in range(500):
        rank = int(rng.integers(1, dim + 1))
        states = [random_density_operator(dim, rng, rank=rank) for _ in range(2)]
        weights = tuple(float(q) for q in rng.uniform(0.1, 1.0, size=2))
        instance = ExclusionInstance(states=tuple(states), weights=weights)
        result = solver.solve(instance, TOL)
        assert_certified(instance, result)

        trace_norm = np.sum(np.abs(np.linalg.eigvalsh(weights[0] * states[0].data - weights[1] * states[1].data)))
        inner = 0.5 * sum(weights) - 0.5 * trace_norm
        assert result.primal_value == pytest.approx(inner, abs=1e-6)

        closed = pairwise_closed_form(instance)
        assert closed.method == "closed_form"
        assert closed.primal_value == pytest.approx(inner, abs=1e-10)
        assert closed.duality_gap <= 1e-10


def test_weight_scaling():
    rng = rng_from(8)
    states = tuple(random_density_operator(2, rng) for _ in range(3))
    instance = ExclusionInstance(states=states, weights=(0.2, 0.3, 0.5))
    base = as_value(instance, 1e-9)
    doubled = as_value(instance.scaled(2.5), 1e-9)
    assert doubled.as_value == pytest.approx(2.5 * base.as_value, abs=1e-8)
    assert doubled.total_weight == pytest.approx(2.5)


def test_weights_are_not_normalized():
    instance = ExclusionInstance(
        states=(density(PureState.basis(2, 0)), density(PureState.basis(2, 1))),
        weights=(0.1, 0.2),
    )
    result = as_value(instance, TOL)
    assert result.as_value == pytest.approx(0.3, abs=1e-6)


def test_instance_validation():
    rho = DensityOperator.maximally_mixed(2)
    with pytest.raises(InvalidParameterError):
        ExclusionInstance(states=(rho,), weights=(0.0,))
    with pytest.raises(InvalidParameterError):
        ExclusionInstance(states=(rho, rho), weights=(0.5,))
    with pytest.raises(DimensionMismatchError):
        ExclusionInstance(states=(rho, DensityOperator.maximally_mixed(3)), weights=(0.5, 0.5))


@pytest.mark.parametrize("method", ("fixed_point", "conic"))
def test_back_ends_agree(method):
    rng = rng_from(77)
    states = tuple(random_density_operator(3, rng, rank=2) for _ in range(3))
    instance = ExclusionInstance.uniform(states)
    config = Settings(solver_method=method)
    result = ExclusionSolver(config).solve(instance, 1e-6)
    assert_certified(instance, result, 1e-6)
    reference = ExclusionSolver().solve(instance, 1e-6)
    assert result.as_value == pytest.approx(reference.as_value, abs=2e-6)


def test_unreachable_tolerance_raises():
    instance = ExclusionInstance.uniform([density(psi) for psi in trine()])
    config = Settings(fixed_point_iterations=50)
    with pytest.raises(NonConvergenceError) as info:
        ExclusionSolver(config).solve(instance, -1.0)
    assert info.value.best_gap is not None


def test_certify_supplied_povm():
    """Antitrine measurement certified from the outside"""
    states = trine()
    instance = ExclusionInstance.uniform([density(psi) for psi in states])
    anti = []
    for psi in states:
        perp = np.array([-psi.amplitudes[1], psi.amplitudes[0]])
        anti.append((2.0 / 3.0) * np.outer(perp, perp.conj()))
    result = certify(instance, anti)
    assert result.method == "supplied"
    assert result.primal_value == pytest.approx(0.0, abs=1e-12)
    assert result.duality_gap <= 1e-10


def test_pairwise_overlaps_order():
    a, b, c = PureState.basis(3, 0), PureState.normalized([1, 1, 0]), PureState.basis(3, 1)
    assert pairwise_overlaps([a, b, c]) == pytest.approx((0.5, 0.0, 0.5))
    mixed = pairwise_overlaps([density(a), DensityOperator.maximally_mixed(3)])
    assert mixed == pytest.approx((1.0 / 3.0,))


def test_barrett_examples():
    assert barrett_sufficient(*trine())
    assert not barrett_sufficient(PureState.basis(2, 0), PureState.basis(2, 0), PureState.basis(2, 1))
    assert barrett_sufficient(*[PureState.basis(3, k) for k in range(3)])


def test_barrett_implies_perfect_exclusion():
    rng = rng_from(31)
    checked = 0
    while checked < 10:
        states = [random_pure_state(3, rng) for _ in range(3)]
        if not barrett_sufficient(*states):
            continue
        result = as_value(ExclusionInstance.uniform([density(psi) for psi in states]), TOL)
        assert result.as_value == pytest.approx(1.0, abs=1e-6)
        checked += 1


def test_heinosaari_examples():
    trine_cert = heinosaari_certificate([density(psi) for psi in trine()])
    assert trine_cert is not None
    assert np.allclose(trine_cert.as_array(), [2.0 / 3.0] * 3, atol=1e-10)

    basis = heinosaari_certificate([density(PureState.basis(2, 0)), density(PureState.basis(2, 1))])
    assert np.allclose(basis.mu, (1.0, 1.0))

    assert heinosaari_certificate([density(PureState.basis(2, 0))] * 2) is None

    with pytest.raises(DimensionMismatchError):
        heinosaari_certificate([DensityOperator.maximally_mixed(3)])


def test_theorem1_mu_examples():
    mu, mu_prime = theorem1_mu_closed_form(0.5, math.pi / 3)
    assert mu == pytest.approx((2 / 3, 2 / 3, 2 / 3))
    assert mu_prime == pytest.approx((2 / 3, 2 / 3, 2 / 3))

    mu, _ = theorem1_mu_closed_form(0.5, math.pi / 4)
    assert mu[0] == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(InvalidParameterError):
        theorem1_mu_closed_form(0.5, math.pi / 2)


def test_theorem1_mu_matches_reduced_triples():
    """Closed forms against certificates computed from the reduced qubit states of family R"""
    rng = rng_from(12)
    service = AntimeasService()
    for _ in range(100):
        lam = float(rng.uniform(0.1, 0.9))
        bound = max(lam / (1 - lam), (1 - lam) / lam)
        x = math.atan(math.sqrt(bound * float(rng.uniform(1.05, 4.0))))
        state = BipartiteState.from_schmidt([math.sqrt(lam), math.sqrt(1 - lam)])
        ensemble = FamilyR(FamilyRParams(lam=lam, x_angle=x)).build()
        outcomes = service.reduced_ensembles(ensemble, state)

        expected = theorem1_mu_closed_form(lam, x)
        for outcome, mu in zip(outcomes, expected):
            assert all(m > 0 for m in mu)
            cert = heinosaari_certificate(list(outcome.kept_states))
            assert cert is not None
            assert np.allclose(cert.as_array(), mu, atol=1e-8)

            result = service.outcome_as(outcome)
            assert result.as_value == pytest.approx(outcome.total_weight, abs=1e-6)


def solve_identity_decomposition(states) -> np.ndarray:
    """Least-squares mu with sum_i mu_i rho_i = I, asserting the residual vanishes"""
    dim = states[0].dim
    columns = np.array([np.concatenate([s.data.real.ravel(), s.data.imag.ravel()]) for s in states]).T
    target = np.concatenate([np.eye(dim).ravel(), np.zeros(dim * dim)])
    mu, *_ = np.linalg.lstsq(columns, target, rcond=None)
    assert np.max(np.abs(columns @ mu - target)) <= 1e-9
    return mu


def test_theorem1_mu_vanishes_at_the_bound():
    """At tan^2 x equal to the bound one coefficient of the heavier triple is exactly zero"""
    rng = rng_from(21)
    service = AntimeasService()
    for _ in range(50):
        lam = float(rng.uniform(0.05, 0.95))
        x = math.atan(math.sqrt(theorem1_x_bound(lam)))
        mu, mu_prime = theorem1_mu_closed_form(lam, x)
        assert min(abs(mu[0]), abs(mu_prime[0])) <= 1e-8
        assert min(mu + mu_prime) >= -1e-8

        state = BipartiteState.from_schmidt([math.sqrt(lam), math.sqrt(1 - lam)])
        outcomes = service.reduced_ensembles(FamilyR(FamilyRParams(lam=lam, x_angle=x)).build(), state)
        for outcome, expected in zip(outcomes, (mu, mu_prime)):
            assert np.allclose(solve_identity_decomposition(outcome.kept_states), expected, atol=1e-8)
            assert service.outcome_as(outcome).as_value == pytest.approx(outcome.total_weight, abs=1e-6)


if __name__ == "__main__":
    logger.info("=" * 60)
    logger.info("Exclusion solver checks")
    logger.info("=" * 60)
    test_orthogonal_pair()
    test_identical_pair()
    test_trine_is_perfect()
    test_two_state_oracle(2)
    test_two_state_oracle(3)
    test_weight_scaling()
    test_heinosaari_examples()
    test_theorem1_mu_examples()
    test_theorem1_mu_matches_reduced_triples()
    test_theorem1_mu_vanishes_at_the_bound()
    logger.info("All exclusion checks passed ✓")
