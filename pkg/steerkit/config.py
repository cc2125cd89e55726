from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    """Runtime defaults loaded from environment variables (STEERKIT_*)."""

    # Oracle
    seed: int = 0
    samples: int = 10_000
    workers: int = 1

    # Tolerances
    tol: float = 1e-10
    input_tol: float = 1e-4

    # Ladder
    residual_tol: float = 1e-14
    max_steps: int = 10_000

    # FR scenario: sign of |1> in the ok / ok-bar vectors
    fr_ok_sign: int = -1

    log_level: str = "WARNING"

    @property
    def tolerances(self) -> dict[str, float]:
        """Tolerances echoed into every run report."""
        return {
            "tol": self.tol,
            "input_tol": self.input_tol,
            "residual_tol": self.residual_tol,
        }


def validate_settings(s: Settings) -> None:
    """Fail-fast validation for numeric ranges and basic consistency."""
    errors: list[str] = []

    def check_int(
        name: str,
        value: int,
        *,
        min_v: int | None = None,
        max_v: int | None = None,
    ) -> None:
        if min_v is not None and value < min_v:
            errors.append(f"{name} must be >= {min_v} (got {value})")
        if max_v is not None and value > max_v:
            errors.append(f"{name} must be <= {max_v} (got {value})")

    def check_tol(name: str, value: float) -> None:
        if not (0.0 < value < 1.0):
            errors.append(f"{name} must be in (0, 1) (got {value})")

    check_int("STEERKIT_SEED", s.seed, min_v=0, max_v=2**64 - 1)
    check_int("STEERKIT_SAMPLES", s.samples, min_v=1, max_v=10_000_000)
    check_int("STEERKIT_WORKERS", s.workers, min_v=1, max_v=64)
    check_int("STEERKIT_MAX_STEPS", s.max_steps, min_v=0, max_v=10_000_000)

    check_tol("STEERKIT_TOL", s.tol)
    check_tol("STEERKIT_INPUT_TOL", s.input_tol)
    check_tol("STEERKIT_RESIDUAL_TOL", s.residual_tol)

    if s.fr_ok_sign not in (-1, 1):
        errors.append(f"STEERKIT_FR_OK_SIGN must be -1 or 1 (got {s.fr_ok_sign})")

    if s.log_level not in _LOG_LEVELS:
        errors.append(f"STEERKIT_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)} (got {s.log_level!r})")

    if errors:
        raise RuntimeError("Invalid configuration: " + "; ".join(errors))


def get_settings() -> Settings:
    load_dotenv()

    def env_int(name: str, default: str) -> int:
        raw = os.getenv(name, default)
        try:
            return int(raw)
        except ValueError as exc:
            raise RuntimeError(f"{name} must be an integer (got {raw!r})") from exc

    def env_float(name: str, default: str) -> float:
        raw = os.getenv(name, default)
        try:
            return float(raw)
        except ValueError as exc:
            raise RuntimeError(f"{name} must be a number (got {raw!r})") from exc

    settings = Settings(
        seed=env_int("STEERKIT_SEED", "0"),
        samples=env_int("STEERKIT_SAMPLES", "10000"),
        workers=env_int("STEERKIT_WORKERS", "1"),
        tol=env_float("STEERKIT_TOL", "1e-10"),
        input_tol=env_float("STEERKIT_INPUT_TOL", "1e-4"),
        residual_tol=env_float("STEERKIT_RESIDUAL_TOL", "1e-14"),
        max_steps=env_int("STEERKIT_MAX_STEPS", "10000"),
        fr_ok_sign=env_int("STEERKIT_FR_OK_SIGN", "-1"),
        log_level=(os.getenv("STEERKIT_LOG_LEVEL", "WARNING") or "WARNING").strip().upper(),
    )

    validate_settings(settings)
    return settings
