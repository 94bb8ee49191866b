"""
Verification Service - end-to-end checks of the entangled-probe advantage.
Builds the family for a state, evaluates it with that state as probe, and
collects the single-probe evidence into a report or a sweep table.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import Settings, Tolerances, settings
from core.exceptions import DimensionMismatchError, InvalidParameterError
from core.parallel import ordered_map
from families import MeasurementFamily, family_from_parameters, family_kind, family_object_for_state
from models.quantum import BipartiteState
from models.report import OutcomeEnsemble, OutcomeSummary, VerificationReport
from services.antimeas_service import AntimeasService, barrett_ratios

logger = logging.getLogger(__name__)


class VerificationService:
    """
    Runs the family construction, the entangled-probe evaluation, the structural
    single-probe test and the numeric single-probe search for one state.
    """

    def __init__(self, config: Optional[Settings] = None):
        self.config = config or settings
        self.antimeas = AntimeasService(self.config)

    def verify(
        self,
        state: BipartiteState,
        theorem_tol: Optional[float] = None,
        seed: Optional[int] = None,
        restarts: Optional[int] = None,
        family: Optional[MeasurementFamily] = None,
    ) -> VerificationReport:
        """
        Full check of one state. `family` overrides the family built from the
        state, e.g. one with a different parameter or phase.
        """
        theorem_tol = self.config.theorem_tol if theorem_tol is None else theorem_tol
        seed = self.config.seed if seed is None else seed

        if family is None:
            family = family_object_for_state(state, Tolerances.from_settings(self.config))
        elif family.dim != state.dim:
            raise DimensionMismatchError(f"family acts on dimension {family.dim}, the state is {state.dim}x{state.dim}")
        ensemble = family.build()
        outcomes = self.antimeas.reduced_ensembles(ensemble, state)
        ame, per_outcome = self.antimeas.ame_from_outcomes(outcomes)
        feasible, witness = self.antimeas.lemma2_feasible(ensemble)
        best, probe = self.antimeas.ams_optimize(ensemble, restarts, seed)

        if not feasible and best >= 1.0:
            logger.warning(f"Single-probe search reached {best:.12f} although no structural witness exists")

        expected = family.expected_weights(state.weights)
        passed = VerificationReport.evaluate(ame, feasible, best, theorem_tol, self.config.ams_margin)
        report = VerificationReport(
            theorem=family.theorem,
            family=family.name,
            dim=state.dim,
            parameter_name=family.parameter_name,
            parameter_used=family.parameter,
            bound=family.bound(),
            schmidt_weights=tuple(float(w) for w in state.weights),
            ame=ame,
            expected_ame=float(expected.sum()),
            per_outcome_as=tuple(
                summarize(a, result, outcome) for (a, result), outcome in zip(per_outcome, outcomes)
            ),
            ams_structural=feasible,
            lemma2_witness=witness.state if witness is not None else None,
            ams_numeric_best=best,
            ams_probe=probe.state,
            reduced_non_orthogonal=self.antimeas.reduced_pairwise_overlap_check(outcomes),
            max_barrett_overlap=max_barrett_overlap(outcomes),
            theorem_tol=theorem_tol,
            ams_margin=self.config.ams_margin,
            seed=seed,
            passed=passed,
        )
        log = logger.info if passed else logger.warning
        log(
            f"Theorem {report.theorem} check for a {state.dim}x{state.dim} state: "
            f"ame={ame:.12f}, structural={feasible}, single-probe best={best:.6f}, passed={passed}"
        )
        return report

    def sweep(
        self,
        dim: int,
        values: Sequence[float],
        coeffs: Sequence[complex],
        seed: Optional[int] = None,
        restarts: Optional[int] = None,
    ) -> List[Dict]:
        """
        One row per parameter value: the family for that value is evaluated with
        the probe sum_a c_a |a>|a>. Rows keep the order of `values`.
        """
        if not values:
            raise InvalidParameterError("the parameter grid is empty")
        kind = family_kind(dim)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        state = BipartiteState.from_schmidt(coeffs)
        if not state.is_entangled(self.config.algebraic_tol):
            raise InvalidParameterError("entangled state required")
        seed = self.config.seed if seed is None else seed
        families = [family_from_parameters(dim, float(v), coeffs) for v in values]
        logger.info(f"Sweeping family {kind} over {len(families)} values of {families[0].parameter_name}")

        def row(family: MeasurementFamily) -> Dict:
            # rows already fan out; each row stays serial
            worker = AntimeasService(self.config.model_copy(update={"max_workers": 1}))
            ensemble = family.build()
            ame, per_outcome = worker.ame_for_probe(ensemble, state)
            feasible, _ = worker.lemma2_feasible(ensemble)
            best, _ = worker.ams_optimize(ensemble, restarts, seed)
            record = {"parameter": family.parameter, "ame": ame}
            for a, result in per_outcome:
                record[f"as_{a}"] = result.as_value
            record["lemma2_feasible"] = feasible
            record["ams_best"] = best
            return record

        return ordered_map(row, families, self.config.max_workers)


def summarize(outcome_index: int, result, outcome: OutcomeEnsemble) -> OutcomeSummary:
    return OutcomeSummary(
        outcome=outcome_index,
        as_value=result.as_value,
        total_weight=outcome.total_weight,
        duality_gap=result.duality_gap,
        method=result.method,
        adjustment=result.adjustment,
    )


def max_barrett_overlap(outcomes: Sequence[OutcomeEnsemble]) -> Optional[float]:
    overlaps = [x for outcome in outcomes for x in barrett_ratios(outcome)]
    return float(max(overlaps)) if overlaps else None


def sweep_columns(dim: int) -> List[str]:
    return ["parameter", "ame"] + [f"as_{a}" for a in range(1, dim + 1)] + ["lemma2_feasible", "ams_best"]


def verify_theorem(
    state: BipartiteState,
    theorem_tol: Optional[float] = None,
    seed: Optional[int] = None,
    config: Optional[Settings] = None,
    restarts: Optional[int] = None,
    family: Optional[MeasurementFamily] = None,
) -> VerificationReport:
    return VerificationService(config).verify(state, theorem_tol, seed, restarts, family)


def schmidt_coeffs_for_lambda(lam: float) -> np.ndarray:
    """Two-qubit Schmidt coefficients (sqrt(lambda), sqrt(1 - lambda))"""
    if not (0.0 < lam < 1.0):
        raise InvalidParameterError(f"lambda must lie strictly inside (0, 1), got {lam!r}")
    return np.array([math.sqrt(lam), math.sqrt(1.0 - lam)], dtype=complex)
