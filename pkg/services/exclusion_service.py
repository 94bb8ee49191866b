"""
Exclusion Service - antidistinguishability of weighted state sets.

The functional is AS = sum_k q_k - min_M sum_k q_k Tr(rho_k M_k) over POVMs M.
Every value returned is certified by a Hermitian Z with Z <= q_k rho_k for all k;
Tr(Z) lower-bounds the inner minimum, so the gap bounds the error.
"""

import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog

from config import Settings, settings
from core import linalg
from core.exceptions import DimensionMismatchError, InvalidParameterError, NonConvergenceError
from families.base import check_interior
from models.exclusion import ExclusionInstance, ExclusionResult, HeinosaariCertificate
from models.quantum import DensityOperator, PureState

logger = logging.getLogger(__name__)


class _Candidate(NamedTuple):
    povm: np.ndarray
    z: np.ndarray
    primal: float
    dual: float
    gap: float
    iterations: int
    method: str


class ExclusionSolver:
    """
    Certified solver for the inner minimization of the antidistinguishability functional.

    The problem is first restricted to the support of sum_k q_k rho_k. A fixed-point
    iteration on the reflected operators B_k = cI - q_k rho_k runs first; when its
    certificate does not close the gap, a conic solve via cvxpy takes over.
    """

    def __init__(self, config: Optional[Settings] = None):
        self.config = config or settings

    def solve(
        self,
        instance: ExclusionInstance,
        tol: Optional[float] = None,
        method: Optional[str] = None,
    ) -> ExclusionResult:
        tol = self.config.solver_gap_tol if tol is None else tol
        method = method or self.config.solver_method
        ops = instance.weighted_operators()
        basis = self._support(ops)
        reduced = np.einsum("ia,kij,jb->kab", basis.conj(), ops, basis)
        reduced = 0.5 * (reduced + reduced.conj().transpose(0, 2, 1))

        candidate = None
        if method in ("auto", "fixed_point"):
            budget = self.config.fixed_point_iterations if method == "auto" else self.config.solver_max_iterations
            candidate = self._fixed_point(reduced, tol, budget)
        if method in ("auto", "conic") and (candidate is None or candidate.gap > tol):
            if candidate is not None:
                logger.info(
                    f"Fixed-point gap {candidate.gap:.3e} above {tol:.1e} after "
                    f"{candidate.iterations} iterations, switching to the conic solver"
                )
            conic = self._conic(reduced)
            if candidate is None or conic.gap <= candidate.gap:
                candidate = conic
        if candidate is None:
            raise InvalidParameterError(f"unknown solver method {method!r}")

        povm, z = self._embed(candidate, basis, instance.size)
        result = self._finalize(instance, ops, povm, z, candidate.iterations, candidate.method, tol)
        if result.duality_gap > tol:
            raise NonConvergenceError(
                "exclusion solver did not certify its value",
                best_gap=result.duality_gap,
                iterations=result.iterations,
            )
        if result.perfect:
            result = self._pad_null_operators(instance, ops, result, tol)
        return result

    def certify(self, instance: ExclusionInstance, povm: Sequence) -> ExclusionResult:
        """Polish a candidate POVM and certify it with the dual point built from Gamma = sum_k q_k rho_k M_k"""
        ops = instance.weighted_operators()
        if len(povm) != instance.size:
            raise DimensionMismatchError(f"{len(povm)} POVM elements for {instance.size} states")
        effects = polish_povm(np.array([linalg.as_matrix(m) for m in povm]))
        z = gamma_certificate(ops, effects)
        return self._finalize(instance, ops, effects, z, 0, "supplied", self.config.solver_gap_tol)

    def _support(self, ops: np.ndarray) -> np.ndarray:
        values, vectors = np.linalg.eigh(linalg.hermitian_part(ops.sum(axis=0)))
        floor = self.config.weight_floor * max(float(values[-1]), 0.0)
        return vectors[:, values > floor]

    def _fixed_point(self, a: np.ndarray, tol: float, budget: int) -> _Candidate:
        n, r = a.shape[0], a.shape[1]
        eye = np.eye(r, dtype=complex)
        top = max(float(linalg.eigvalsh(a_k)[-1]) for a_k in a)
        c = top * (1.0 + 1e-3) + 1e-300
        b = c * eye - a
        m = np.repeat((eye / n)[None, :, :], n, axis=0)
        best = None
        every = max(1, self.config.certificate_check_every)

        for iteration in range(1, budget + 1):
            bmb = b @ m @ b
            r_inv = linalg.psd_power(bmb.sum(axis=0), -0.5)
            m = r_inv @ bmb @ r_inv
            m = 0.5 * (m + m.conj().transpose(0, 2, 1))
            if iteration % every == 0 or iteration == budget:
                z = gamma_certificate(a, m)
                primal, dual = objective(a, m), float(np.trace(z).real)
                gap = max(primal - dual, 0.0)
                if best is None or gap < best.gap:
                    best = _Candidate(m.copy(), z, primal, dual, gap, iteration, "fixed_point")
                logger.debug(f"Fixed-point iteration {iteration}: gap {gap:.3e}")
                if gap <= tol:
                    break
        return best

    def _conic(self, a: np.ndarray) -> _Candidate:
        n, r = a.shape[0], a.shape[1]
        solver, options = self._conic_solver()
        try:
            effects = [cp.Variable((r, r), hermitian=True) for _ in range(n)]
            primal_problem = cp.Problem(
                cp.Minimize(cp.real(sum(cp.trace(cp.Constant(a[k]) @ effects[k]) for k in range(n)))),
                [m >> 0 for m in effects] + [sum(effects) == np.eye(r)],
            )
            primal_problem.solve(solver=solver, **options)

            z_var = cp.Variable((r, r), hermitian=True)
            dual_problem = cp.Problem(
                cp.Maximize(cp.real(cp.trace(z_var))),
                [(cp.Constant(a[k]) - z_var) >> 0 for k in range(n)],
            )
            dual_problem.solve(solver=solver, **options)
        except cp.error.SolverError as e:
            raise NonConvergenceError(f"conic solver failed: {e}") from e

        if any(m.value is None for m in effects) or z_var.value is None:
            raise NonConvergenceError(
                f"conic solver returned no point (status {primal_problem.status}/{dual_problem.status})"
            )

        povm = polish_povm(np.array([m.value for m in effects]))
        z = best_dual_point([shift_feasible(a, np.asarray(z_var.value)), gamma_certificate(a, povm)])
        primal, dual = objective(a, povm), float(np.trace(z).real)
        iterations = sum(int(getattr(p.solver_stats, "num_iters", None) or 0) for p in (primal_problem, dual_problem))
        logger.debug(f"Conic solve: primal {primal:.12g}, dual {dual:.12g}")
        return _Candidate(povm, z, primal, dual, max(primal - dual, 0.0), iterations, "conic")

    @staticmethod
    def _conic_solver():
        if cp.CLARABEL in cp.installed_solvers():
            return cp.CLARABEL, {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}
        return None, {}

    @staticmethod
    def _embed(candidate: _Candidate, basis: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
        d = basis.shape[0]
        outside = np.eye(d, dtype=complex) - basis @ basis.conj().T
        povm = np.array([basis @ m @ basis.conj().T + outside / n for m in candidate.povm])
        z = basis @ candidate.z @ basis.conj().T
        return povm, z

    def _finalize(
        self,
        instance: ExclusionInstance,
        ops: np.ndarray,
        povm: np.ndarray,
        z: np.ndarray,
        iterations: int,
        method: str,
        tol: float,
        adjustment: str = "none",
    ) -> ExclusionResult:
        z = shift_feasible(ops, z)
        primal = objective(ops, povm)
        dual = float(np.trace(z).real)
        total = instance.total_weight
        return ExclusionResult(
            as_value=total - primal,
            total_weight=total,
            primal_value=primal,
            dual_value=dual,
            duality_gap=max(primal - dual, 0.0),
            povm=tuple(povm),
            dual_certificate=z,
            iterations=iterations,
            method=method,
            adjustment=adjustment,
            perfect=primal <= tol,
        )

    def _pad_null_operators(
        self,
        instance: ExclusionInstance,
        ops: np.ndarray,
        result: ExclusionResult,
        tol: float,
    ) -> ExclusionResult:
        povm = np.array([m.data for m in result.povm])
        traces = np.einsum("kii->k", povm).real
        null = [k for k in range(len(povm)) if traces[k] < self.config.iterative_tol]
        if not null:
            return result

        padded = povm.copy()
        for k in null:
            kernel = kernel_projector(ops[k], self.config.algebraic_tol)
            if not np.any(kernel):
                logger.warning(f"POVM element {k + 1} is null and state {k + 1} has full support; left as is")
                return result
            padded[k] = padded[k] + self.config.null_padding * kernel
        padded = polish_povm(padded)

        candidate = self._finalize(
            instance, ops, padded, result.dual_certificate.data, result.iterations, result.method, tol, "null-padding"
        )
        if candidate.duality_gap > tol or not candidate.perfect:
            logger.warning(f"Null-operator padding broke the certificate (gap {candidate.duality_gap:.3e}); reverted")
            return result
        logger.warning(f"Padded null POVM element(s) {[k + 1 for k in null]} with kernel projectors")
        return candidate


def objective(ops: np.ndarray, povm: np.ndarray) -> float:
    """sum_k Tr(A_k M_k)"""
    return float(np.einsum("kij,kji->", ops, povm).real)


def gamma_certificate(ops: np.ndarray, povm: np.ndarray) -> np.ndarray:
    """Dual point Herm(sum_k A_k M_k) shifted down until it is below every A_k"""
    gamma = linalg.hermitian_part(np.einsum("kij,kjl->il", ops, povm))
    return shift_feasible(ops, gamma)


def shift_feasible(ops: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Z - t I with t = max_k lambda_max(Z - A_k), the largest feasible multiple-of-identity shift"""
    z = linalg.hermitian_part(linalg.as_matrix(z))
    t = max(float(linalg.eigvalsh(z - a_k)[-1]) for a_k in ops)
    return z - t * np.eye(z.shape[0], dtype=complex)


def best_dual_point(points: Sequence[np.ndarray]) -> np.ndarray:
    return max(points, key=lambda z: float(np.trace(z).real))


def polish_povm(povm: np.ndarray) -> np.ndarray:
    """Clip each element to PSD and renormalize so the elements sum to the identity"""
    clipped = np.array([linalg.project_psd(m) for m in povm])
    root = linalg.psd_power(clipped.sum(axis=0), -0.5)
    polished = root @ clipped @ root
    return 0.5 * (polished + polished.conj().transpose(0, 2, 1))


def kernel_projector(a: np.ndarray, tol: float) -> np.ndarray:
    values, vectors = np.linalg.eigh(linalg.hermitian_part(a))
    scale = max(float(np.max(np.abs(values), initial=0.0)), 1.0)
    kernel = vectors[:, values <= tol * scale]
    return kernel @ kernel.conj().T


def as_value(
    instance: ExclusionInstance,
    tol: Optional[float] = None,
    config: Optional[Settings] = None,
) -> ExclusionResult:
    """Certified antidistinguishability value of a weighted state set"""
    return ExclusionSolver(config).solve(instance, tol)


def certify(instance: ExclusionInstance, povm: Sequence, config: Optional[Settings] = None) -> ExclusionResult:
    return ExclusionSolver(config).certify(instance, povm)


def pairwise_closed_form(instance: ExclusionInstance) -> ExclusionResult:
    """
    Exact solution for two states: with D = q_1 rho_1 - q_2 rho_2, M_1 projects onto
    the negative eigenspace of D and Z = (A_1 + A_2 - |D|) / 2; the inner minimum is
    (q_1 + q_2)/2 - ||D||_1 / 2.
    """
    if instance.size != 2:
        raise InvalidParameterError(f"closed form needs exactly two states, got {instance.size}")
    ops = instance.weighted_operators()
    values, vectors = np.linalg.eigh(linalg.hermitian_part(ops[0] - ops[1]))
    negative = vectors[:, values < 0.0]
    m1 = negative @ negative.conj().T
    m2 = np.eye(instance.dim, dtype=complex) - m1
    absolute = (vectors * np.abs(values)) @ vectors.conj().T
    z = 0.5 * (ops[0] + ops[1] - absolute)
    primal = objective(ops, np.array([m1, m2]))
    dual = float(np.trace(z).real)
    total = instance.total_weight
    return ExclusionResult(
        as_value=total - primal,
        total_weight=total,
        primal_value=primal,
        dual_value=dual,
        duality_gap=abs(primal - dual),
        povm=(m1, m2),
        dual_certificate=z,
        method="closed_form",
        perfect=primal <= settings.solver_gap_tol,
    )


def pairwise_overlaps(states: Sequence[Union[PureState, DensityOperator]]) -> Tuple[float, ...]:
    """
    Overlaps of every pair i < j in lexicographic order: |<psi_i|psi_j>|^2 for
    pure states, Tr(rho_i rho_j) otherwise. For three states these are x_1, x_2, x_3.
    """
    overlaps = []
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            a, b = states[i], states[j]
            if a.dim != b.dim:
                raise DimensionMismatchError(f"states {i + 1} and {j + 1} differ in dimension")
            if isinstance(a, PureState) and isinstance(b, PureState):
                overlaps.append(a.overlap(b))
            else:
                rho = a if isinstance(a, DensityOperator) else DensityOperator.from_pure(a)
                sigma = b if isinstance(b, DensityOperator) else DensityOperator.from_pure(b)
                overlaps.append(rho.purity_overlap(sigma))
    return tuple(overlaps)


def barrett_sufficient(psi1: PureState, psi2: PureState, psi3: PureState, slack: Optional[float] = None) -> bool:
    """All three pairwise squared overlaps at most 1/4 (plus slack)"""
    slack = settings.barrett_slack if slack is None else slack
    return all(x <= 0.25 + slack for x in pairwise_overlaps([psi1, psi2, psi3]))


def heinosaari_certificate(
    states: Sequence[DensityOperator],
    residual_tol: float = 1e-8,
    positivity_floor: float = 1e-10,
) -> Optional[HeinosaariCertificate]:
    """
    Positive mu with sum_i mu_i rho_i = I for qubit states, or None.

    The four real equations of the Hermitian 2x2 identity are solved by least
    squares. When the states leave part of mu undetermined and the least-squares
    point is not positive, a linear program searches the solution set for a
    strictly positive point. None does not mean the states fail to be antidistinguishable.
    """
    if not states:
        raise InvalidParameterError("need at least one state")
    if any(rho.dim != 2 for rho in states):
        raise DimensionMismatchError("Heinosaari certificates are defined for qubit states only")

    system = np.array(
        [[rho.data[0, 0].real, rho.data[1, 1].real, rho.data[0, 1].real, rho.data[0, 1].imag] for rho in states]
    ).T
    target = np.array([1.0, 1.0, 0.0, 0.0])
    mu, _, rank, _ = np.linalg.lstsq(system, target, rcond=None)
    residual = float(np.linalg.norm(system @ mu - target))

    if residual <= residual_tol and np.all(mu > positivity_floor):
        return HeinosaariCertificate(mu=tuple(float(m) for m in mu), residual=residual)
    if residual > residual_tol or rank == len(states):
        return None

    n = len(states)
    result = linprog(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.hstack([-np.eye(n), np.ones((n, 1))]),
        b_ub=np.zeros(n),
        A_eq=np.hstack([system, np.zeros((4, 1))]),
        b_eq=target,
        bounds=[(0.0, None)] * n + [(0.0, 1.0)],
        method="highs",
    )
    if not result.success or result.x[-1] <= positivity_floor:
        return None
    mu = result.x[:n]
    residual = float(np.linalg.norm(system @ mu - target))
    if residual > residual_tol:
        return None
    return HeinosaariCertificate(mu=tuple(float(m) for m in mu), residual=residual)


def theorem1_mu_closed_form(lam: float, x: float) -> Tuple[Tuple[float, float, float], Tuple[float, float, float]]:
    """
    Certificate coefficients of the two reduced qubit triples of family R:
        mu_2 = mu_3 = (lam c^2 + (1-lam) s^2) / (2 (1-lam) s^2),   mu_1 = 1 - lam c^2 / ((1-lam) s^2)
        mu'_2 = mu'_3 = (lam s^2 + (1-lam) c^2) / (2 lam s^2),     mu'_1 = 1 - (1-lam) c^2 / (lam s^2)
    with c = cos x, s = sin x.
    """
    check_interior("lambda", lam, 0.0, 1.0)
    check_interior("x", x, 0.0, math.pi / 2)
    c2, s2 = math.cos(x) ** 2, math.sin(x) ** 2
    side = (lam * c2 + (1.0 - lam) * s2) / (2.0 * (1.0 - lam) * s2)
    side_prime = (lam * s2 + (1.0 - lam) * c2) / (2.0 * lam * s2)
    mu = (1.0 - lam * c2 / ((1.0 - lam) * s2), side, side)
    mu_prime = (1.0 - (1.0 - lam) * c2 / (lam * s2), side_prime, side_prime)
    return mu, mu_prime
