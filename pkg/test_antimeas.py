"""
Tests for measurement antidistinguishability: reduced ensembles, entangled and
single-system values, the structural single-probe test and full verification.

Run with pytest, or directly:
    python test_antimeas.py
"""

import logging
import math

import numpy as np
import pytest

from config import Settings
from core.exceptions import CapabilityError, DimensionMismatchError, InvalidParameterError
from core.sampling import random_bipartite_state, random_pure_state, random_unitary, rng_from
from families import (
    FamilyQ,
    FamilyQParams,
    FamilyR,
    FamilyRParams,
    FamilyS,
    FamilySParams,
    bound_parameter,
    family_from_parameters,
    family_object_for_state,
    theorem1_x_bound,
)
from families.family_r import x_from_tan_squared
from models.quantum import BipartiteState, DensityOperator, MeasurementEnsemble, ProjectiveMeasurement, PureState
from models.report import OutcomeEnsemble, ProbeState, VerificationReport
from services.antimeas_service import (
    AntimeasService,
    ame_for_probe,
    ams_evaluate,
    ams_optimize,
    barrett_ratios,
    lemma2_feasible,
    reduced_ensembles,
    reduced_pairwise_overlap_check,
    reduced_pairwise_overlaps,
)
from services.verification_service import VerificationService, schmidt_coeffs_for_lambda, verify_theorem

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

BASIS = ProjectiveMeasurement.from_vectors([[1, 0], [0, 1]])
SWAPPED = ProjectiveMeasurement.from_vectors([[0, 1], [1, 0]])


def relabeled_pair() -> MeasurementEnsemble:
    return MeasurementEnsemble.uniform([BASIS, SWAPPED])


def family_r(lam: float = 0.5, x: float = math.pi / 3) -> FamilyR:
    return FamilyR(FamilyRParams(lam=lam, x_angle=x))


def random_ensemble(dim: int, count: int, rng: np.random.Generator) -> MeasurementEnsemble:
    measurements = []
    for _ in range(count):
        u = random_unitary(dim, rng)
        measurements.append(ProjectiveMeasurement.from_vectors([u[:, i] for i in range(dim)]))
    priors = rng.uniform(0.2, 1.0, size=count)
    priors = priors / priors.sum()
    priors[-1] = 1.0 - priors[:-1].sum()
    return MeasurementEnsemble(measurements=tuple(measurements), priors=tuple(float(p) for p in priors))


def test_bell_probe_steers_basis_states():
    ensemble = MeasurementEnsemble(measurements=(BASIS,), priors=(1.0,))
    outcomes = reduced_ensembles(ensemble, BipartiteState.maximally_entangled(2))
    assert outcomes[0].weights == pytest.approx((0.5,))
    assert np.allclose(outcomes[0].reduced_states[0].data, np.diag([1, 0]), atol=1e-12)
    assert np.allclose(outcomes[1].reduced_states[0].data, np.diag([0, 1]), atol=1e-12)


def test_product_probe_carries_no_label_information():
    rng = rng_from(4)
    ensemble = random_ensemble(3, 3, rng)
    chi = random_pure_state(3, rng)
    probe = BipartiteState.product(random_pure_state(3, rng), chi)
    for outcome in reduced_ensembles(ensemble, probe):
        for rho in outcome.kept_states:
            assert np.allclose(rho.data, np.outer(chi.amplitudes, chi.amplitudes.conj()), atol=1e-9)


def test_family_r_outcome_one_triple():
    """Outcome 1 of family R: |0>, and (sqrt(lam) c, +-sqrt(1-lam) s) with weights lam/3, (lam c^2 + (1-lam) s^2)/3"""
    lam, x = 0.3, math.pi / 3
    c, s = math.cos(x), math.sin(x)
    state = BipartiteState.from_schmidt(schmidt_coeffs_for_lambda(lam))
    outcome = reduced_ensembles(family_r(lam, x).build(), state)[0]

    mixed = lam * c * c + (1 - lam) * s * s
    assert outcome.weights == pytest.approx((lam / 3, mixed / 3, mixed / 3), abs=1e-12)
    expected = [
        np.array([1.0, 0.0]),
        np.array([math.sqrt(lam) * c, math.sqrt(1 - lam) * s]) / math.sqrt(mixed),
        np.array([math.sqrt(lam) * c, -math.sqrt(1 - lam) * s]) / math.sqrt(mixed),
    ]
    for rho, vec in zip(outcome.reduced_states, expected):
        assert np.allclose(rho.data, np.outer(vec, vec), atol=1e-9)


@pytest.mark.parametrize("dim", (2, 4, 6))
def test_weight_bookkeeping(dim):
    rng = rng_from(60 + dim)
    ensemble = random_ensemble(dim, 3, rng)
    probe = random_bipartite_state(dim, rng)
    outcomes = reduced_ensembles(ensemble, probe)
    table = np.array([o.weights for o in outcomes])
    assert table.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(table.sum(axis=0), ensemble.priors, atol=1e-9)
    for o in outcomes:
        assert o.dim == dim
        for rho in o.kept_states:
            assert abs(rho.data.trace() - 1.0) <= 1e-9


def test_probe_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        reduced_ensembles(relabeled_pair(), BipartiteState.maximally_entangled(4))
    with pytest.raises(DimensionMismatchError):
        ams_evaluate(relabeled_pair(), [1, 0, 0])


def test_ame_examples():
    """Family R at the Bell state and family S at omega = 1/2 with the maximally entangled probe"""
    ame, per_outcome = ame_for_probe(family_r().build(), BipartiteState.maximally_entangled(2))
    assert ame == pytest.approx(1.0, abs=1e-6)
    assert [a for a, _ in per_outcome] == [1, 2]

    family = FamilyS(FamilySParams(omega=0.5, coeffs=np.full(4, 0.5)))
    ame, per_outcome = ame_for_probe(family.build(), BipartiteState.maximally_entangled(4))
    assert ame == pytest.approx(1.0, abs=1e-6)
    assert all(result.duality_gap <= 1e-7 for _, result in per_outcome)
    logger.info("✓ entangled probes reach 1")


def test_dropped_labels_are_named_for_free():
    """A product probe |0>|0> gives zero probability to some labels; each outcome is worth its kept weight"""
    probe = BipartiteState.product(PureState.basis(2, 0), PureState.basis(2, 0))
    service = AntimeasService()
    outcomes = service.reduced_ensembles(relabeled_pair(), probe)
    assert outcomes[0].dropped == (1,)
    assert outcomes[0].instance().size == 1

    result = service.outcome_as(outcomes[0])
    assert result.adjustment == "absent-label"
    assert result.method == "trivial"
    assert result.as_value == pytest.approx(0.5)
    assert np.allclose(result.povm[1].data, np.eye(2))

    ame, _ = service.ame_from_outcomes(outcomes)
    assert ame == pytest.approx(1.0)


def test_product_probes_match_single_system_value():
    """Entangled-probe value at a product probe equals the single-system value at its A side"""
    rng = rng_from(90)
    for _ in range(100):
        ensemble = random_ensemble(3, 3, rng)
        a, b = random_pure_state(3, rng), random_pure_state(3, rng)
        ame, _ = ame_for_probe(ensemble, BipartiteState.product(a, b))
        assert ame == pytest.approx(ams_evaluate(ensemble, a), abs=1e-6)


def test_ams_evaluate_examples():
    assert ams_evaluate(family_r().build(), PureState.basis(2, 0)) == pytest.approx(11 / 12)
    assert ams_evaluate(relabeled_pair(), ProbeState(state=[1, 0])) == pytest.approx(1.0)


def test_ams_evaluate_range():
    rng = rng_from(13)
    ensemble = random_ensemble(4, 3, rng)
    for _ in range(20):
        value = ams_evaluate(ensemble, random_pure_state(4, rng))
        assert -1e-12 <= value <= 1.0 + 1e-12


def test_ams_optimize_finds_relabeled_optimum():
    best, probe = ams_optimize(relabeled_pair(), restarts=4, seed=0)
    assert best == pytest.approx(1.0, abs=1e-9)
    assert max(abs(probe.amplitudes)) == pytest.approx(1.0, abs=1e-6)


def test_ams_optimize_single_measurement():
    """With one measurement every outcome's minimum is its own probability, so the value is 0"""
    ensemble = MeasurementEnsemble(measurements=(BASIS,), priors=(1.0,))
    best, _ = ams_optimize(ensemble, restarts=3, seed=1)
    assert best == pytest.approx(0.0, abs=1e-12)
    feasible, witness = lemma2_feasible(ensemble)
    assert not feasible and witness is None


def test_ams_optimize_is_deterministic():
    ensemble = family_r(0.4, 1.2).build()
    first = ams_optimize(ensemble, restarts=5, seed=42)
    second = ams_optimize(ensemble, restarts=5, seed=42)
    parallel = AntimeasService(Settings(max_workers=4)).ams_optimize(ensemble, restarts=5, seed=42)
    assert first[0] == second[0] == parallel[0]
    assert np.array_equal(first[1].amplitudes, parallel[1].amplitudes)


def test_family_r_single_probe_gap():
    lam = 0.5
    x = math.atan(math.sqrt(2.0))
    best, _ = ams_optimize(family_r(lam, x).build(), restarts=16, seed=0)
    assert best < 1.0 - 1e-3


def test_lemma2_examples():
    feasible, witness = lemma2_feasible(relabeled_pair())
    assert feasible
    assert ams_evaluate(relabeled_pair(), witness) == pytest.approx(1.0, abs=1e-12)

    assert lemma2_feasible(family_r(0.3, 1.3).build()) == (False, None)
    for m in (4, 8):
        coeffs = np.full(m, 1.0 / math.sqrt(m))
        family = FamilyS(FamilySParams(omega=0.4, coeffs=coeffs))
        feasible, _ = lemma2_feasible(family.build())
        assert not feasible


def test_lemma2_selection_cap():
    family = FamilyS(FamilySParams(omega=0.4, coeffs=np.full(4, 0.5)))
    with pytest.raises(CapabilityError):
        lemma2_feasible(family.build(), Settings(selection_cap=10))


def test_reduced_overlap_check():
    state = BipartiteState.from_schmidt(schmidt_coeffs_for_lambda(0.3))
    outcomes = reduced_ensembles(family_r(0.3, 1.2).build(), state)
    assert reduced_pairwise_overlap_check(outcomes)
    assert len(barrett_ratios(outcomes[0])) == 3

    q = FamilyQ(FamilyQParams(epsilon=0.4, coeffs=np.full(6, 1.0 / math.sqrt(6))))
    assert reduced_pairwise_overlap_check(reduced_ensembles(q.build(), BipartiteState.maximally_entangled(6)))

    orthogonal = OutcomeEnsemble(
        outcome=1,
        dim=2,
        reduced_states=(DensityOperator.from_pure(PureState.basis(2, 0)), DensityOperator.from_pure(PureState.basis(2, 1))),
        weights=(0.25, 0.25),
    )
    assert not reduced_pairwise_overlap_check([orthogonal])
    assert reduced_pairwise_overlaps(orthogonal) == pytest.approx(np.eye(2))


def test_outcome_ensemble_validation():
    rho = DensityOperator.maximally_mixed(2)
    with pytest.raises(InvalidParameterError):
        OutcomeEnsemble(outcome=1, dim=2, reduced_states=(rho,), weights=(0.5, 0.5))
    with pytest.raises(InvalidParameterError):
        OutcomeEnsemble(outcome=1, dim=2, reduced_states=(rho,), weights=(-0.1,))


def test_verify_qubit_state():
    state = BipartiteState.from_schmidt(schmidt_coeffs_for_lambda(0.3))
    report = verify_theorem(state, seed=0, restarts=6)
    assert report.theorem == "T1"
    assert report.family == "R"
    assert math.tan(report.parameter_used) ** 2 == pytest.approx(2 * report.bound)
    assert report.ame == pytest.approx(1.0, abs=1e-6)
    assert report.expected_ame == pytest.approx(1.0, abs=1e-12)
    assert not report.ams_structural
    assert report.ams_numeric_best <= 1.0 - 1e-4
    assert report.reduced_non_orthogonal
    assert report.passed
    logger.info(f"✓ qubit state: single-probe best {report.ams_numeric_best:.6f}")


@pytest.mark.parametrize("dim, seed", ((4, 3), (6, 5), (8, 7), (10, 9), (12, 11)))
def test_verify_random_states(dim, seed):
    rng = rng_from(seed)
    state = random_bipartite_state(dim, rng, min_modulus=0.4)
    report = VerificationService().verify(state, seed=seed, restarts=2)
    assert report.theorem == ("T2" if dim % 4 == 0 else "T3")
    assert report.parameter_used ** 2 == pytest.approx(report.bound)
    assert report.ame == pytest.approx(1.0, abs=1e-6)
    assert len(report.per_outcome_as) == dim
    assert report.ame == pytest.approx(report.expected_ame, abs=1e-6)
    assert report.max_barrett_overlap <= 0.25 + 1e-9
    assert report.lemma2_witness is None
    assert report.passed


@pytest.mark.parametrize("dim", (4, 6))
def test_half_bound_parameters_stay_perfect(dim):
    rng = rng_from(200 + dim)
    state = random_bipartite_state(dim, rng, min_modulus=0.3)
    parameter = bound_parameter(dim, state.schmidt_coeffs) * math.sqrt(0.5)
    family = family_from_parameters(dim, parameter, state.schmidt_coeffs, basis=state.basis_a)
    ame, _ = ame_for_probe(family.build(), state)
    assert ame == pytest.approx(1.0, abs=1e-6)


def scaled_parameter(state: BipartiteState, scale: float) -> float:
    """
    Parameter at `scale` times the admissible range: omega^2 or epsilon^2 equal to
    scale x bound, and tan^2 x equal to 2 x scale x bound for a qubit pair, so
    that scale 1/2 puts x on the bound itself.
    """
    if state.dim == 2:
        lam = float(abs(state.schmidt_coeffs[0]) ** 2)
        return x_from_tan_squared(2.0 * scale * theorem1_x_bound(lam))
    return bound_parameter(state.dim, state.schmidt_coeffs) * math.sqrt(scale)


STATES_PER_CASE = 25


@pytest.mark.parametrize("scale", (1.0, 0.5))
@pytest.mark.parametrize("dim", (
    2,
    4,
    6,
    pytest.param(8, marks=pytest.mark.slow),
    pytest.param(10, marks=pytest.mark.slow),
    pytest.param(12, marks=pytest.mark.slow),
))
def test_random_states_across_the_admissible_range(dim, scale):
    """
    Random Schmidt bases and small Schmidt coefficients, at the bound and at half
    of it. Single-probe gaps shrink with the smallest coefficient, so the margin
    is lowered to 1e-6.
    """
    rng = rng_from(1000 + 10 * dim + int(10 * scale))
    service = VerificationService(Settings(ams_margin=1e-6))
    for _ in range(STATES_PER_CASE):
        state = random_bipartite_state(dim, rng, min_modulus=0.05, random_bases=True)
        family = family_from_parameters(
            dim, scaled_parameter(state, scale), state.schmidt_coeffs, basis=state.basis_a
        )
        report = service.verify(state, seed=0, restarts=1, family=family)
        assert report.ame == pytest.approx(report.expected_ame, abs=1e-6)
        assert report.expected_ame == pytest.approx(1.0, abs=1e-9)
        assert not report.ams_structural
        assert report.lemma2_witness is None
        assert report.reduced_non_orthogonal
        if dim >= 4:
            assert report.max_barrett_overlap <= 0.25 + 1e-9
        assert report.passed
    logger.info(f"✓ {STATES_PER_CASE} random {dim}x{dim} states at {scale} x bound")


@pytest.mark.slow
def test_qubit_family_over_random_weights_and_phases():
    """Two hundred qubit pairs with lambda in [0.05, 0.95], random local bases and a random family phase"""
    rng = rng_from(4242)
    service = VerificationService()
    for _ in range(200):
        lam = float(rng.uniform(0.05, 0.95))
        coeffs = np.array([math.sqrt(lam), math.sqrt(1 - lam) * np.exp(2j * math.pi * rng.random())])
        u_a, u_b = random_unitary(2, rng), random_unitary(2, rng)
        state = BipartiteState.from_schmidt(
            coeffs, basis_a=[u_a[:, i] for i in range(2)], basis_b=[u_b[:, i] for i in range(2)]
        )
        family = family_from_parameters(
            2,
            bound_parameter(2, state.schmidt_coeffs),
            state.schmidt_coeffs,
            basis=state.basis_a,
            phase=float(2 * math.pi * rng.random()),
        )
        report = service.verify(state, seed=0, restarts=32, family=family)
        assert report.theorem == "T1"
        assert report.ame == pytest.approx(report.expected_ame, abs=1e-6)
        assert not report.ams_structural
        assert report.ams_numeric_best <= 1.0 - 1e-4
        assert report.passed


def test_verify_threads_configured_tolerance():
    """A tiny second Schmidt coefficient counts as entangled only under a fine algebraic tolerance"""
    state = BipartiteState.from_schmidt([math.sqrt(1 - 1e-8), 1e-4])
    assert family_object_for_state(state).name == "R"
    with pytest.raises(InvalidParameterError, match="entangled state required"):
        VerificationService(Settings(algebraic_tol=1e-3)).verify(state, restarts=1)


def test_verify_rejects_family_of_other_dimension():
    state = BipartiteState.maximally_entangled(2)
    family = FamilyS(FamilySParams(omega=0.4, coeffs=np.full(4, 0.5)))
    with pytest.raises(DimensionMismatchError):
        VerificationService().verify(state, restarts=1, family=family)


def test_verify_rejects_product_state():
    product = BipartiteState.from_schmidt([1.0, 0.0])
    with pytest.raises(InvalidParameterError, match="entangled state required"):
        verify_theorem(product)


def test_report_pass_flag_is_checked():
    state = BipartiteState.from_schmidt(schmidt_coeffs_for_lambda(0.5))
    report = verify_theorem(state, seed=0, restarts=2)
    with pytest.raises(InvalidParameterError):
        VerificationReport(**{**dict(report), "passed": not report.passed})


def test_sweep_rows():
    service = VerificationService(Settings(max_workers=2))
    rows = service.sweep(2, [0.6, 1.0, 1.2], schmidt_coeffs_for_lambda(0.5), seed=0, restarts=2)
    assert [row["parameter"] for row in rows] == [0.6, 1.0, 1.2]
    for row in rows:
        assert set(row) == {"parameter", "ame", "as_1", "as_2", "lemma2_feasible", "ams_best"}
        if math.tan(row["parameter"]) ** 2 > 1.0:
            assert row["ame"] == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidParameterError):
        service.sweep(2, [], schmidt_coeffs_for_lambda(0.5))


if __name__ == "__main__":
    logger.info("=" * 60)
    logger.info("Measurement antidistinguishability checks")
    logger.info("=" * 60)
    test_bell_probe_steers_basis_states()
    test_family_r_outcome_one_triple()
    test_ame_examples()
    test_dropped_labels_are_named_for_free()
    test_ams_evaluate_examples()
    test_ams_optimize_finds_relabeled_optimum()
    test_lemma2_examples()
    test_verify_qubit_state()
    logger.info("All antimeas checks passed ✓")
