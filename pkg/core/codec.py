"""
JSON value encoding shared by every file the package reads or writes.

    complex scalar   [re, im]
    vector           [[re, im], ...]
    ComplexMatrix    {"rows": r, "cols": c, "entries": [[re, im], ...]}   (row-major)

Floats are emitted with Python's shortest round-trip repr, keys are sorted and
non-finite reals are written as the strings "inf", "-inf" and "nan".
"""

import json
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from core.exceptions import SchemaError
from models.exclusion import ExclusionInstance, ExclusionResult
from models.quantum import (
    BipartiteState,
    ComplexMatrix,
    DensityOperator,
    MeasurementEnsemble,
    ProjectiveMeasurement,
    PureState,
)
from models.report import OutcomeSummary, VerificationReport

_NON_FINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def encode_real(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def decode_real(value) -> float:
    if isinstance(value, str):
        if value not in _NON_FINITE:
            raise SchemaError(f"expected a number, got {value!r}")
        return _NON_FINITE[value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}")
    return float(value)


def encode_complex(z: complex) -> List[float]:
    z = complex(z)
    return [encode_real(z.real), encode_real(z.imag)]


def decode_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SchemaError(f"complex scalar must be an [re, im] pair, got {value!r}")
        return complex(decode_real(value[0]), decode_real(value[1]))
    return complex(decode_real(value))


def encode_vector(vec: Sequence[complex]) -> List[List[float]]:
    return [encode_complex(z) for z in np.asarray(vec, dtype=complex).reshape(-1)]


def decode_vector(value) -> np.ndarray:
    if not isinstance(value, list):
        raise SchemaError("vector must be a list of [re, im] pairs")
    return np.array([decode_complex(z) for z in value], dtype=complex)


def encode_matrix(matrix) -> Dict[str, Any]:
    data = np.asarray(matrix, dtype=complex)
    return {"rows": int(data.shape[0]), "cols": int(data.shape[1]), "entries": encode_vector(data.reshape(-1))}


def decode_matrix(value) -> ComplexMatrix:
    _require(value, ("rows", "cols", "entries"), "matrix")
    entries = decode_vector(value["entries"])
    return _translate(lambda: ComplexMatrix.from_entries(int(value["rows"]), int(value["cols"]), list(entries)))


def encode_pure_state(psi: PureState) -> Dict[str, Any]:
    return {"dim": psi.dim, "amplitudes": encode_vector(psi.amplitudes)}


def decode_pure_state(value) -> PureState:
    _require(value, ("amplitudes",), "pure state")
    amplitudes = decode_vector(value["amplitudes"])
    return _translate(lambda: PureState(amplitudes=amplitudes))


def encode_density(rho: DensityOperator) -> Dict[str, Any]:
    return {"dim": rho.dim, "matrix": encode_matrix(rho.data)}


def decode_density(value) -> DensityOperator:
    _require(value, ("matrix",), "density operator")
    matrix = decode_matrix(value["matrix"])
    return _translate(lambda: DensityOperator(matrix=matrix))


def encode_measurement(m: ProjectiveMeasurement) -> Dict[str, Any]:
    return {"dim": m.dim, "effects": [encode_matrix(e.data) for e in m.effects]}


def decode_measurement(value) -> ProjectiveMeasurement:
    _require(value, ("effects",), "measurement")
    effects = [decode_matrix(e) for e in value["effects"]]
    return _translate(lambda: ProjectiveMeasurement(effects=effects))


def encode_ensemble(ensemble: MeasurementEnsemble) -> Dict[str, Any]:
    return {
        "dim": ensemble.dim,
        "outcomes": ensemble.outcomes,
        "priors": [encode_real(p) for p in ensemble.priors],
        "measurements": [encode_measurement(m) for m in ensemble.measurements],
    }


def decode_ensemble(value) -> MeasurementEnsemble:
    _require(value, ("priors", "measurements"), "measurement ensemble")
    measurements = [decode_measurement(m) for m in value["measurements"]]
    priors = tuple(decode_real(p) for p in value["priors"])
    return _translate(lambda: MeasurementEnsemble(measurements=tuple(measurements), priors=priors))


def encode_bipartite(state: BipartiteState) -> Dict[str, Any]:
    return {
        "dim": state.dim,
        "schmidt_coeffs": encode_vector(state.schmidt_coeffs),
        "basis_a": [encode_vector(v.amplitudes) for v in state.basis_a],
        "basis_b": [encode_vector(v.amplitudes) for v in state.basis_b],
    }


def decode_bipartite(value) -> BipartiteState:
    """
    Accepts either Schmidt form or a plain amplitude vector of length d^2
    (which is Schmidt-decomposed).
    """
    if isinstance(value, dict) and "schmidt_coeffs" in value:
        coeffs = decode_vector(value["schmidt_coeffs"])
        basis_a = [decode_vector(v) for v in value["basis_a"]] if "basis_a" in value else None
        basis_b = [decode_vector(v) for v in value["basis_b"]] if "basis_b" in value else None
        return _translate(lambda: BipartiteState.from_schmidt(coeffs, basis_a, basis_b))

    from core.operations import schmidt_decompose

    psi = decode_pure_state(value)
    return _translate(lambda: schmidt_decompose(psi))


def encode_exclusion_instance(instance: ExclusionInstance) -> Dict[str, Any]:
    return {
        "kind": "as",
        "dim": instance.dim,
        "states": [encode_density(rho) for rho in instance.states],
        "weights": [encode_real(q) for q in instance.weights],
    }


def decode_exclusion_instance(value) -> ExclusionInstance:
    """
    States may be given as density operators ({"matrix": ...}) or as pure
    states ({"amplitudes": ...}); weights default to uniform.
    """
    _require(value, ("states",), "exclusion instance")
    if not isinstance(value["states"], list):
        raise SchemaError("exclusion instance states must be a list")
    states = [_decode_state(s) for s in value["states"]]
    if "weights" not in value:
        return _translate(lambda: ExclusionInstance.uniform(states))
    if not isinstance(value["weights"], list):
        raise SchemaError("exclusion instance weights must be a list")
    weights = tuple(decode_real(q) for q in value["weights"])
    return _translate(lambda: ExclusionInstance(states=tuple(states), weights=weights))


def _decode_state(value) -> DensityOperator:
    if isinstance(value, dict) and "matrix" in value:
        return decode_density(value)
    return DensityOperator.from_pure(decode_pure_state(value))


def encode_exclusion_result(result: ExclusionResult) -> Dict[str, Any]:
    return {
        "as_value": encode_real(result.as_value),
        "total_weight": encode_real(result.total_weight),
        "primal_value": encode_real(result.primal_value),
        "dual_value": encode_real(result.dual_value),
        "duality_gap": encode_real(result.duality_gap),
        "povm": [encode_matrix(m.data) for m in result.povm],
        "dual_certificate": encode_matrix(result.dual_certificate.data),
        "iterations": result.iterations,
        "method": result.method,
        "adjustment": result.adjustment,
        "perfect": result.perfect,
    }


def decode_exclusion_result(value) -> ExclusionResult:
    _require(value, ("as_value", "povm", "dual_certificate"), "exclusion result")
    fields = {
        key: decode_real(value[key])
        for key in ("as_value", "total_weight", "primal_value", "dual_value", "duality_gap")
        if key in value
    }
    fields["povm"] = tuple(decode_matrix(m) for m in value["povm"])
    fields["dual_certificate"] = decode_matrix(value["dual_certificate"])
    for key in ("iterations", "method", "adjustment", "perfect"):
        if key in value:
            fields[key] = value[key]
    return _translate(lambda: ExclusionResult(**fields))


def encode_outcome_summary(summary: OutcomeSummary) -> Dict[str, Any]:
    return {
        "outcome": summary.outcome,
        "as_value": encode_real(summary.as_value),
        "total_weight": encode_real(summary.total_weight),
        "duality_gap": encode_real(summary.duality_gap),
        "method": summary.method,
        "adjustment": summary.adjustment,
    }


def encode_probe(probe: Optional[PureState]):
    return None if probe is None else encode_pure_state(probe)


def encode_verification_report(report: VerificationReport) -> Dict[str, Any]:
    payload = {}
    for key, value in report:
        if key == "per_outcome_as":
            payload[key] = [encode_outcome_summary(s) for s in value]
        elif key in ("lemma2_witness", "ams_probe"):
            payload[key] = encode_probe(value)
        elif key == "schmidt_weights":
            payload[key] = [encode_real(w) for w in value]
        elif isinstance(value, float):
            payload[key] = encode_real(value)
        else:
            payload[key] = value
    return payload


def decode_verification_report(value) -> VerificationReport:
    _require(value, ("theorem", "family", "ame", "passed"), "verification report")
    fields = dict(value)
    fields["per_outcome_as"] = _translate(lambda: tuple(OutcomeSummary(**s) for s in value.get("per_outcome_as", [])))
    for key in ("lemma2_witness", "ams_probe"):
        if fields.get(key) is not None:
            fields[key] = decode_pure_state(fields[key])
    fields["schmidt_weights"] = tuple(decode_real(w) for w in value.get("schmidt_weights", []))
    for key in ("parameter_used", "bound", "ame", "expected_ame", "ams_numeric_best", "theorem_tol", "ams_margin"):
        if key in fields:
            fields[key] = decode_real(fields[key])
    if fields.get("max_barrett_overlap") is not None:
        fields["max_barrett_overlap"] = decode_real(fields["max_barrett_overlap"])
    return _translate(lambda: VerificationReport(**fields))


def dumps(payload: Any) -> str:
    """Deterministic JSON text for a payload"""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e


def _require(value, keys, what: str) -> None:
    if not isinstance(value, dict):
        raise SchemaError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in value]
    if missing:
        raise SchemaError(f"{what} is missing field(s): {', '.join(missing)}")


def _translate(build):
    try:
        return build()
    except ValidationError as e:
        raise SchemaError(str(e)) from e
    except (TypeError, ValueError) as e:
        raise SchemaError(str(e)) from e
