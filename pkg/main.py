"""
Command-line front end.

    family   build the three-measurement family for a dimension or a state file
    verify   check a state file against its family (exit 0 when the check passes)
    sweep    tabulate the family over a grid of parameter values
    solve    evaluate a standalone as / ams / ame instance file

Exit codes: 0 success, 2 invalid input, 3 verification failed,
4 solver did not converge, 5 capability limit exceeded.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import Settings, settings as default_settings
from core import codec
from core.exceptions import AntidistError, CapabilityError, InvalidParameterError, NonConvergenceError
from families import bound_parameter, family_from_parameters, family_kind, family_object_for_state
from models.report import RunConfig
from repositories import ReportRepository
from services import AntimeasService, ExclusionSolver, VerificationService
from services.exclusion_service import pairwise_overlaps
from services.verification_service import schmidt_coeffs_for_lambda, sweep_columns

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3
EXIT_NON_CONVERGENCE = 4
EXIT_CAPABILITY = 5

PARAMETER_FLAGS = {"R": "x_angle", "S": "omega", "Q": "epsilon"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antidist",
        description="Entanglement-assisted antidistinguishability of quantum measurements",
    )
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    parser.add_argument("--config", type=Path, default=None, help="explicit dotenv file with settings")
    parser.add_argument("--workers", type=int, default=None, help="worker threads for independent solves")
    parser.add_argument("--seed", type=int, default=None, help="seed of the single-probe search")
    parser.add_argument("--tol-gap", type=float, default=None, help="certified duality-gap tolerance")
    parser.add_argument("--restarts", type=int, default=None, help="random restarts of the single-probe search")
    parser.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default=None, help="output format")

    sub = parser.add_subparsers(dest="command", required=True)

    family = sub.add_parser("family", help="build a measurement family")
    family.add_argument("--dim", type=int, default=None)
    source = family.add_mutually_exclusive_group()
    source.add_argument("--max-entangled", action="store_true")
    source.add_argument("--coeffs", default=None, help="comma-separated Schmidt moduli")
    source.add_argument("--state", type=Path, default=None, help="bipartite state file")
    family.add_argument("--omega", default=None, help="number or 'bound'")
    family.add_argument("--epsilon", default=None, help="number or 'bound'")
    family.add_argument("--x-angle", dest="x_angle", default=None, help="radians or 'bound'")
    family.add_argument("--phase", type=float, default=0.0)

    verify = sub.add_parser("verify", help="verify a state against its family")
    verify.add_argument("state", type=Path)

    sweep = sub.add_parser("sweep", help="sweep the family parameter")
    sweep.add_argument("--dim", type=int, required=True)
    grid = sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--values", default=None, help="comma-separated parameter values")
    grid.add_argument("--linspace", default=None, help="start:stop:count")
    probe = sweep.add_mutually_exclusive_group()
    probe.add_argument("--lambda", dest="lam", type=float, default=None, help="Schmidt weight for d = 2")
    probe.add_argument("--coeffs", default=None, help="comma-separated Schmidt moduli")
    probe.add_argument("--max-entangled", action="store_true")

    solve = sub.add_parser("solve", help="solve an as / ams / ame instance file")
    solve.add_argument("instance", type=Path)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, (args.log_level or default_settings.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        config = load_settings(args)
        run = RunConfig.from_settings(config, output_format=args.format, output_path=args.out)
        repository = ReportRepository(run.output_path)
        handler = COMMANDS[args.command]
        return handler(args, config, run, repository)
    except NonConvergenceError as e:
        logger.error(f"Solver did not converge: {e}")
        return EXIT_NON_CONVERGENCE
    except CapabilityError as e:
        logger.error(f"Capability limit: {e}")
        return EXIT_CAPABILITY
    except InvalidParameterError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except AntidistError as e:
        logger.error(f"Run aborted: {e}")
        return EXIT_INVALID


def load_settings(args: argparse.Namespace) -> Settings:
    overrides = {
        "seed": args.seed,
        "solver_gap_tol": args.tol_gap,
        "restarts": args.restarts,
        "max_workers": args.workers,
        "log_level": args.log_level,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config is not None and not args.config.is_file():
        raise InvalidParameterError(f"config file {args.config} does not exist")
    return Settings.from_file(args.config, **overrides)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_family(args: argparse.Namespace, config: Settings, run: RunConfig, repository: ReportRepository) -> int:
    if args.state is not None:
        state = repository.read_state(args.state)
        kind = family_kind(state.dim)
        value = _parameter_flag(args, kind)
        if value is None or value == "bound":
            family = family_object_for_state(state)
        else:
            family = family_from_parameters(
                state.dim, _parse_number(value, PARAMETER_FLAGS[kind]), state.schmidt_coeffs,
                basis=state.basis_a, phase=args.phase,
            )
    else:
        if args.dim is None:
            raise InvalidParameterError("family needs --dim or --state")
        kind = family_kind(args.dim)
        coeffs = _probe_coeffs(args.dim, args.coeffs, args.max_entangled)
        value = _parameter_flag(args, kind)
        if value is None:
            raise InvalidParameterError(f"family {kind} needs --{PARAMETER_FLAGS[kind].replace('_', '-')}")
        if value == "bound":
            parameter = bound_parameter(args.dim, coeffs)
        else:
            parameter = _parse_number(value, PARAMETER_FLAGS[kind])
        family = family_from_parameters(args.dim, parameter, coeffs, phase=args.phase)

    ensemble = family.build()
    payload = family.describe()
    payload["bound"] = codec.encode_real(family.bound())
    payload["ensemble"] = codec.encode_ensemble(ensemble)
    repository.write_json(payload)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: Settings, run: RunConfig, repository: ReportRepository) -> int:
    state = repository.read_state(args.state)
    report = VerificationService(config).verify(state, seed=run.seed, restarts=run.restarts)
    repository.write_json(codec.encode_verification_report(report))
    if not report.passed:
        logger.warning(f"Verification failed for the state in {args.state}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: Settings, run: RunConfig, repository: ReportRepository) -> int:
    values = parse_grid(args.values, args.linspace)
    if args.lam is not None:
        if args.dim != 2:
            raise InvalidParameterError("--lambda applies to d = 2 only")
        coeffs = schmidt_coeffs_for_lambda(args.lam)
    else:
        coeffs = _probe_coeffs(args.dim, args.coeffs, args.max_entangled)
    rows = VerificationService(config).sweep(args.dim, values, coeffs, seed=run.seed, restarts=run.restarts)
    repository.write_rows(rows, sweep_columns(args.dim), run.output_format or "csv")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, config: Settings, run: RunConfig, repository: ReportRepository) -> int:
    kind, payload = repository.read_instance(args.instance)
    if kind == "as":
        instance = repository.decode_as_instance(payload)
        result = ExclusionSolver(config).solve(instance, run.tolerances.solver_gap)
        out = {"kind": "as", "value": codec.encode_real(result.as_value), "result": codec.encode_exclusion_result(result)}
        if instance.size <= 3:
            out["pairwise_overlaps"] = [codec.encode_real(x) for x in pairwise_overlaps(list(instance.states))]
    elif kind == "ams":
        out = solve_ams(repository.decode_ams_instance(payload), config, run)
    else:
        ensemble, state = repository.decode_ame_instance(payload)
        ame, per_outcome = AntimeasService(config).ame_for_probe(ensemble, state, run.tolerances.solver_gap)
        out = {
            "kind": "ame",
            "value": codec.encode_real(ame),
            "per_outcome": [
                {"outcome": a, "result": codec.encode_exclusion_result(result)} for a, result in per_outcome
            ],
        }
    repository.write_json(out)
    return EXIT_OK


def solve_ams(ensemble, config: Settings, run: RunConfig) -> Dict:
    """Numeric lower bound, its probe and the structural witness; a witness attains 1 exactly"""
    service = AntimeasService(config)
    best, probe = service.ams_optimize(ensemble, run.restarts, run.seed)
    feasible, witness = service.lemma2_feasible(ensemble)
    if witness is not None:
        at_witness = service.ams_evaluate(ensemble, witness)
        if at_witness > best:
            best, probe = at_witness, witness
    return {
        "kind": "ams",
        "value": codec.encode_real(best),
        "probe": codec.encode_pure_state(probe.state),
        "lemma2_feasible": feasible,
        "lemma2_witness": codec.encode_probe(witness.state if witness is not None else None),
    }


COMMANDS = {
    "family": cmd_family,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "solve": cmd_solve,
}


# ----------------------------------------------------------------------
# Argument helpers
# ----------------------------------------------------------------------

def parse_grid(values: Optional[str], linspace: Optional[str]) -> List[float]:
    """`--values 0.1,0.2` or `--linspace start:stop:count` (count may be 0)"""
    if values is not None:
        return [_parse_number(v, "grid value") for v in values.split(",") if v.strip()]
    parts = linspace.split(":")
    if len(parts) != 3:
        raise InvalidParameterError(f"linspace must be start:stop:count, got {linspace!r}")
    start, stop = _parse_number(parts[0], "start"), _parse_number(parts[1], "stop")
    try:
        count = int(parts[2])
    except ValueError:
        raise InvalidParameterError(f"linspace count must be an integer, got {parts[2]!r}")
    if count < 0:
        raise InvalidParameterError("linspace count must be non-negative")
    return [float(v) for v in np.linspace(start, stop, count)]


def _probe_coeffs(dim: int, coeffs: Optional[str], max_entangled: bool) -> np.ndarray:
    if coeffs is None or max_entangled:
        return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    moduli = np.array([_parse_number(c, "Schmidt modulus") for c in coeffs.split(",") if c.strip()])
    if moduli.shape[0] != dim:
        raise InvalidParameterError(f"need {dim} Schmidt moduli, got {moduli.shape[0]}")
    norm = float(np.linalg.norm(moduli))
    if norm == 0.0:
        raise InvalidParameterError("Schmidt moduli are all zero")
    if abs(norm - 1.0) > 1e-12:
        logger.info(f"Normalizing Schmidt moduli (norm was {norm:.6g})")
    return (moduli / norm).astype(complex)


def _parameter_flag(args: argparse.Namespace, kind: str) -> Optional[str]:
    wanted = PARAMETER_FLAGS[kind]
    for name in PARAMETER_FLAGS.values():
        if name != wanted and getattr(args, name) is not None:
            raise InvalidParameterError(
                f"--{name.replace('_', '-')} does not apply to family {kind}; use --{wanted.replace('_', '-')}"
            )
    return getattr(args, wanted)


def _parse_number(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidParameterError(f"{what} must be a number, got {text!r}")
    if not math.isfinite(value):
        raise InvalidParameterError(f"{what} must be finite, got {text!r}")
    return value


if __name__ == "__main__":
    sys.exit(main())
