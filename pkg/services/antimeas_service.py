"""
Antimeas Service - antidistinguishability of measurement ensembles.

With a single-system probe rho the value is 1 - sum_a min_x p_x Tr(rho M_{a|x}).
With an entangled probe each outcome a of Alice leaves Bob an ensemble of
conditional states rho^B_{a|x} with weights p_x p(a|x); the value at that probe
is the sum over a of the antidistinguishability of those ensembles.
"""

import hashlib
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from config import Settings, settings
from core import linalg
from core.exceptions import CapabilityError, DimensionMismatchError
from core.parallel import ordered_map
from core.sampling import random_vector, rng_from
from models.exclusion import ExclusionResult
from models.quantum import BipartiteState, DensityOperator, MeasurementEnsemble, PureState
from models.report import OutcomeEnsemble, ProbeState
from services.exclusion_service import ExclusionSolver, pairwise_overlaps

logger = logging.getLogger(__name__)

ProbeLike = Union[ProbeState, PureState, Sequence[complex], np.ndarray]


class AntimeasService:
    """
    Measurement antidistinguishability with single-system and entangled probes.
    """

    def __init__(self, config: Optional[Settings] = None):
        self.config = config or settings
        self.solver = ExclusionSolver(self.config)

    # ------------------------------------------------------------------
    # Entangled probes
    # ------------------------------------------------------------------

    def reduced_ensembles(self, ensemble: MeasurementEnsemble, probe: BipartiteState) -> List[OutcomeEnsemble]:
        """
        Bob's conditional states Tr_A[(M_{a|x} (x) I) rho^AB] / p(a|x) for every outcome.

        With C the d x d amplitude matrix of the probe the unnormalized state is
        C^T M^T conj(C). Labels with p(a|x) at or below the weight floor are dropped.
        """
        d = ensemble.dim
        if probe.dim != d:
            raise DimensionMismatchError(f"probe is {probe.dim}x{probe.dim}, measurements act on dimension {d}")

        amplitudes = probe.to_pure_state().amplitudes.reshape(d, d)
        sigma = np.einsum("ij,xaqi,qk->xajk", amplitudes, ensemble.effect_tensor(), amplitudes.conj(), optimize=True)
        probabilities = np.einsum("xajj->xa", sigma).real
        floor = self.config.weight_floor

        outcomes = []
        for a in range(ensemble.outcomes):
            states, weights = [], []
            for x, prior in enumerate(ensemble.priors):
                p = probabilities[x, a]
                if p <= floor:
                    states.append(None)
                    weights.append(0.0)
                    continue
                states.append(DensityOperator.from_unnormalized(linalg.project_psd(sigma[x, a])))
                weights.append(float(prior * p))
            outcome = OutcomeEnsemble(outcome=a + 1, dim=d, reduced_states=tuple(states), weights=tuple(weights))
            if outcome.dropped:
                logger.warning(
                    f"Outcome {a + 1}: measurement label(s) {[x + 1 for x in outcome.dropped]} "
                    f"have zero probability and were dropped"
                )
            outcomes.append(outcome)
        return outcomes

    def outcome_as(self, outcome: OutcomeEnsemble, tol: Optional[float] = None) -> ExclusionResult:
        """
        Antidistinguishability of one outcome ensemble.

        A dropped label can always be named by Bob without error, so an outcome
        with a dropped label is worth the sum of its kept weights exactly.
        """
        if not outcome.dropped:
            return self.solver.solve(outcome.instance(), tol)

        size = len(outcome.weights)
        dim = outcome.dim
        povm = [np.zeros((dim, dim), dtype=complex) for _ in range(size)]
        povm[outcome.dropped[0]] = np.eye(dim, dtype=complex)
        total = float(sum(outcome.kept_weights))
        return ExclusionResult(
            as_value=total,
            total_weight=total,
            primal_value=0.0,
            dual_value=0.0,
            duality_gap=0.0,
            povm=tuple(povm),
            dual_certificate=np.zeros((dim, dim), dtype=complex),
            method="trivial",
            adjustment="absent-label",
            perfect=True,
        )

    def ame_from_outcomes(
        self,
        outcomes: Sequence[OutcomeEnsemble],
        tol: Optional[float] = None,
    ) -> Tuple[float, List[Tuple[int, ExclusionResult]]]:
        results = ordered_map(lambda o: self.outcome_as(o, tol), outcomes, self.config.max_workers)
        per_outcome = [(o.outcome, r) for o, r in zip(outcomes, results)]
        ame = float(sum(r.as_value for r in results))
        return ame, per_outcome

    def ame_for_probe(
        self,
        ensemble: MeasurementEnsemble,
        probe: BipartiteState,
        tol: Optional[float] = None,
    ) -> Tuple[float, List[Tuple[int, ExclusionResult]]]:
        """Value of the ensemble at the given entangled probe (no optimization over probes)"""
        return self.ame_from_outcomes(self.reduced_ensembles(ensemble, probe), tol)

    # ------------------------------------------------------------------
    # Single-system probes
    # ------------------------------------------------------------------

    def ams_evaluate(self, ensemble: MeasurementEnsemble, probe: ProbeLike) -> float:
        """1 - sum_a min_x p_x Tr(rho M_{a|x}) at rho = |probe><probe|"""
        psi = _probe_amplitudes(probe)
        if psi.shape[0] != ensemble.dim:
            raise DimensionMismatchError(f"probe has dimension {psi.shape[0]}, measurements act on {ensemble.dim}")
        born = np.einsum("i,xaij,j->xa", psi.conj(), ensemble.effect_tensor(), psi).real
        weighted = np.array(ensemble.priors)[:, None] * born
        return float(1.0 - np.sum(np.min(weighted, axis=0)))

    def ams_optimize(
        self,
        ensemble: MeasurementEnsemble,
        restarts: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> Tuple[float, ProbeState]:
        """
        Best single-system value found by multi-start coordinate ascent over pure probes.

        Pure probes suffice: sum_a min_x p_x Tr(rho M_{a|x}) is concave in rho, so
        its minimum over density operators sits at an extreme point. Probes are
        parametrized by d-1 hyperspherical angles and d-1 relative phases; each
        coordinate is line-searched with bounded Brent on a soft-min objective
        (temperature `smoothing`), and the result is scored unsmoothed. The value
        returned is a lower bound on the true optimum.
        """
        restarts = self.config.restarts if restarts is None else restarts
        seed = self.config.seed if seed is None else seed
        rng = rng_from(seed)
        d = ensemble.dim
        table = _weighted_vectors(ensemble)

        # Seed with the best effect vector, then random restarts drawn up front.
        effect_vectors = ensemble.vector_table().reshape(-1, d)
        seeded = max(effect_vectors, key=lambda v: self.ams_evaluate(ensemble, v))
        starts = [seeded] + [random_vector(d, rng) for _ in range(restarts)]

        polished = ordered_map(lambda v: self._ascend(table, v), starts, self.config.max_workers)
        scores = [self.ams_evaluate(ensemble, psi) for psi in polished]
        best_index = int(np.argmax(scores))
        logger.debug(f"Single-probe search: {len(starts)} starts, best {scores[best_index]:.12f}")
        return scores[best_index], ProbeState(state=PureState.normalized(polished[best_index]))

    def _ascend(self, table: Tuple[np.ndarray, np.ndarray], start: np.ndarray) -> np.ndarray:
        vectors, priors = table
        d = vectors.shape[-1]
        tau = self.config.smoothing
        params = _angles_from_vector(start)
        half = d - 1

        def objective(p: np.ndarray) -> float:
            psi = _vector_from_angles(p, d)
            weighted = priors * np.abs(vectors.conj() @ psi) ** 2
            return float(np.sum(-tau * logsumexp(-weighted / tau, axis=1)))

        current = objective(params)
        for sweep in range(self.config.optimizer_sweeps):
            before = current
            for i in range(params.shape[0]):
                if i < half:
                    low, high = 0.0, math.pi / 2
                else:
                    low, high = params[i] - math.pi, params[i] + math.pi
                trial = params.copy()

                def line(t: float) -> float:
                    trial[i] = t
                    return objective(trial)

                found = minimize_scalar(line, bounds=(low, high), method="bounded", options={"xatol": 1e-10})
                if found.fun < current:
                    params[i] = found.x
                    current = float(found.fun)
            if before - current <= 1e-13:
                break
        return _vector_from_angles(params, d)

    # ------------------------------------------------------------------
    # Structural test
    # ------------------------------------------------------------------

    def lemma2_feasible(self, ensemble: MeasurementEnsemble) -> Tuple[bool, Optional[ProbeState]]:
        """
        Decide whether some pure probe is orthogonal, for every outcome a, to at
        least one effect vector v_{a|x}. That is necessary for a single-system
        value of 1, so infeasibility proves the value is below 1.

        A selection of one vector per outcome works iff the selected vectors span
        a proper subspace. Selections are searched depth first, keeping an
        orthonormal basis of the span; a branch dies once the span is the whole
        space and succeeds early once the remaining outcomes cannot fill it.
        The outcome of a branch depends only on its depth and span, so exhausted
        (depth, span) pairs are remembered and not searched again.
        """
        vectors = ensemble.vector_table()
        f, l, d = vectors.shape
        if l ** f > self.config.selection_cap:
            raise CapabilityError(f"{l}^{f} selections exceed the cap of {self.config.selection_cap}")
        dependent = math.sqrt(self.config.algebraic_tol)

        def witness_for(choice: List[int]) -> Optional[np.ndarray]:
            chosen = np.array([vectors[a, x] for a, x in enumerate(choice)]).T
            complement = linalg.orthonormal_complement(chosen, d, self.config.algebraic_tol)
            if complement.shape[1] == 0:
                return None
            w = complement[:, 0]
            overlaps = np.abs(vectors.conj() @ w) ** 2
            if np.all(np.min(overlaps, axis=1) <= self.config.algebraic_tol):
                return w
            return None

        exhausted = set()

        def search(a: int, basis: np.ndarray, choice: List[int]) -> Optional[np.ndarray]:
            k = basis.shape[1]
            if k + (f - a) < d:
                return witness_for(choice + [0] * (f - a))
            if a == f:
                return witness_for(choice) if k < d else None
            key = (a, span_key(basis))
            if key in exhausted:
                return None
            group = vectors[a]
            residual = group - (group @ basis.conj()) @ basis.T if k else group.copy()
            norms = np.linalg.norm(residual, axis=1)
            for x in np.argsort(norms, kind="stable"):
                if norms[x] <= dependent:
                    found = search(a + 1, basis, choice + [int(x)])
                elif k + 1 >= d:
                    continue
                else:
                    grown = np.hstack([basis, (residual[x] / norms[x]).reshape(d, 1)])
                    found = search(a + 1, grown, choice + [int(x)])
                if found is not None:
                    return found
            exhausted.add(key)
            return None

        witness = search(0, np.zeros((d, 0), dtype=complex), [])
        if witness is None:
            logger.info(f"No single probe annihilates an effect of every outcome ({l} measurements, d={d})")
            return False, None
        logger.info(f"Found a single probe annihilating an effect of every outcome (d={d})")
        return True, ProbeState(state=PureState.normalized(witness))

    def reduced_pairwise_overlap_check(self, ensembles: Sequence[OutcomeEnsemble]) -> bool:
        """Every pair of kept reduced states within every outcome has Tr(rho_i rho_j) above the overlap floor"""
        floor = self.config.overlap_floor
        for outcome in ensembles:
            overlaps = reduced_pairwise_overlaps(outcome)
            upper = overlaps[np.triu_indices(overlaps.shape[0], k=1)]
            if np.any(upper <= floor):
                return False
        return True


def reduced_pairwise_overlaps(outcome: OutcomeEnsemble) -> np.ndarray:
    """Matrix of Tr(rho_x rho_y) over the kept labels of one outcome"""
    states = outcome.kept_states
    return np.array([[rho.purity_overlap(sigma) for sigma in states] for rho in states]).reshape(len(states), len(states))


def barrett_ratios(outcome: OutcomeEnsemble) -> Tuple[float, ...]:
    """Pairwise overlaps of the kept reduced states (x_1, x_2, x_3 for a triple)"""
    return pairwise_overlaps(list(outcome.kept_states))


def span_key(basis: np.ndarray) -> bytes:
    """Digest of the projector onto span(basis), stable under a change of basis"""
    projector = basis @ basis.conj().T
    rounded = np.round(np.concatenate([projector.real, projector.imag]), 7) + 0.0
    return hashlib.blake2b(rounded.tobytes(), digest_size=16).digest()


def _probe_amplitudes(probe: ProbeLike) -> np.ndarray:
    if isinstance(probe, ProbeState):
        return probe.amplitudes
    if isinstance(probe, PureState):
        return probe.amplitudes
    return PureState.normalized(probe).amplitudes


def _weighted_vectors(ensemble: MeasurementEnsemble) -> Tuple[np.ndarray, np.ndarray]:
    """Effect vectors V[a, x] and the matching priors, broadcast to (f, l)"""
    vectors = ensemble.vector_table()
    priors = np.broadcast_to(np.array(ensemble.priors), vectors.shape[:2])
    return vectors, priors


def _vector_from_angles(params: np.ndarray, d: int) -> np.ndarray:
    theta, phi = params[: d - 1], params[d - 1:]
    moduli = np.empty(d)
    carry = 1.0
    for k in range(d - 1):
        moduli[k] = carry * math.cos(theta[k])
        carry *= math.sin(theta[k])
    moduli[d - 1] = carry
    return moduli * np.exp(1j * np.concatenate([[0.0], phi]))


def _angles_from_vector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    d = vec.shape[0]
    moduli = np.abs(vec)
    theta = np.array([math.atan2(float(np.linalg.norm(moduli[k + 1:])), float(moduli[k])) for k in range(d - 1)])
    phi = np.mod(np.angle(vec[1:]) - np.angle(vec[0]), 2.0 * math.pi)
    return np.concatenate([theta, phi])


def reduced_ensembles(ensemble: MeasurementEnsemble, probe: BipartiteState, config: Optional[Settings] = None) -> List[OutcomeEnsemble]:
    return AntimeasService(config).reduced_ensembles(ensemble, probe)


def ame_for_probe(
    ensemble: MeasurementEnsemble,
    probe: BipartiteState,
    tol: Optional[float] = None,
    config: Optional[Settings] = None,
) -> Tuple[float, List[Tuple[int, ExclusionResult]]]:
    return AntimeasService(config).ame_for_probe(ensemble, probe, tol)


def ams_evaluate(ensemble: MeasurementEnsemble, probe: ProbeLike) -> float:
    return AntimeasService().ams_evaluate(ensemble, probe)


def ams_optimize(
    ensemble: MeasurementEnsemble,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[Settings] = None,
) -> Tuple[float, ProbeState]:
    return AntimeasService(config).ams_optimize(ensemble, restarts, seed)


def lemma2_feasible(ensemble: MeasurementEnsemble, config: Optional[Settings] = None) -> Tuple[bool, Optional[ProbeState]]:
    return AntimeasService(config).lemma2_feasible(ensemble)


def reduced_pairwise_overlap_check(ensembles: Sequence[OutcomeEnsemble], config: Optional[Settings] = None) -> bool:
    return AntimeasService(config).reduced_pairwise_overlap_check(ensembles)
