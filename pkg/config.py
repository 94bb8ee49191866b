from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical and run settings with defaults that reproduce the published constructions"""

    # Tolerances
    algebraic_tol: float = 1e-9       # identities that hold exactly in exact arithmetic
    iterative_tol: float = 1e-8       # quantities produced by an iteration
    solver_gap_tol: float = 1e-7      # certified primal-dual gap of the exclusion solver
    barrett_slack: float = 1e-12      # slack on the 1/4 overlap condition
    weight_floor: float = 1e-12       # outcome probabilities below this are treated as zero
    overlap_floor: float = 1e-9       # Tr(rho_i rho_j) above this counts as non-orthogonal
    ams_margin: float = 1e-4          # single-probe value must stay this far below 1
    theorem_tol: float = 1e-6         # entangled-probe value must reach 1 within this

    # Exclusion solver
    solver_method: Literal["auto", "fixed_point", "conic"] = "auto"
    solver_max_iterations: int = 100_000
    fixed_point_iterations: int = 4_000
    certificate_check_every: int = 25
    null_padding: float = 2e-8

    # Eigensolver
    eigensolver: Literal["jacobi", "lapack"] = "jacobi"
    jacobi_max_sweeps: int = 60

    # Single-probe optimizer
    restarts: int = 16
    optimizer_sweeps: int = 40
    smoothing: float = 1e-6

    # Lemma-2 structural search
    selection_cap: int = 10_000_000

    # Run
    seed: int = 0
    max_workers: int = 1

    # Logging
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_file=None, case_sensitive=False, extra="ignore")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # Configuration is explicit: constructor arguments and, when given, a dotenv file.
        return (init_settings, dotenv_settings)

    @classmethod
    def from_file(cls, path: Optional[Path], **overrides) -> "Settings":
        """Load settings from an explicit dotenv file, then apply overrides"""
        if path is None:
            return cls(**overrides)
        return cls(_env_file=str(path), **overrides)


class Tolerances(BaseModel):
    """Tolerance record threaded explicitly through the numerical operations"""

    model_config = ConfigDict(frozen=True)

    algebraic: float = 1e-9
    iterative: float = 1e-8
    solver_gap: float = 1e-7
    barrett_slack: float = 1e-12
    weight_floor: float = 1e-12
    overlap_floor: float = 1e-9
    ams_margin: float = 1e-4
    theorem: float = 1e-6

    @classmethod
    def from_settings(cls, source: Settings) -> "Tolerances":
        return cls(
            algebraic=source.algebraic_tol,
            iterative=source.iterative_tol,
            solver_gap=source.solver_gap_tol,
            barrett_slack=source.barrett_slack,
            weight_floor=source.weight_floor,
            overlap_floor=source.overlap_floor,
            ams_margin=source.ams_margin,
            theorem=source.theorem_tol,
        )


settings = Settings()


def default_tolerances() -> Tolerances:
    return Tolerances.from_settings(settings)
