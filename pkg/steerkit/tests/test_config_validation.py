from __future__ import annotations

import dataclasses

import pytest

from steerkit.config import Settings, get_settings, validate_settings


def test_validate_settings_rejects_invalid_ranges() -> None:
    s = Settings(
        seed=-1,  # invalid
        samples=0,  # invalid
        workers=65,  # invalid
        tol=0.0,  # invalid
        fr_ok_sign=0,  # invalid
        log_level="LOUD",  # invalid
    )

    with pytest.raises(RuntimeError) as exc:
        validate_settings(s)

    message = str(exc.value)
    for name in ("STEERKIT_SEED", "STEERKIT_SAMPLES", "STEERKIT_WORKERS", "STEERKIT_TOL", "STEERKIT_FR_OK_SIGN"):
        assert name in message


def test_validate_settings_accepts_valid_config() -> None:
    s = Settings(
        seed=2**64 - 1,
        samples=100_000,
        workers=8,
        tol=1e-8,
        input_tol=1e-3,
        residual_tol=1e-12,
        max_steps=0,
        fr_ok_sign=1,
        log_level="DEBUG",
    )

    validate_settings(s)


def test_defaults_are_valid() -> None:
    validate_settings(Settings())
    assert Settings().tolerances == {"tol": 1e-10, "input_tol": 1e-4, "residual_tol": 1e-14}


def test_get_settings_reads_environment(monkeypatch) -> None:
    monkeypatch.setenv("STEERKIT_SEED", "17")
    monkeypatch.setenv("STEERKIT_SAMPLES", "500")
    monkeypatch.setenv("STEERKIT_RESIDUAL_TOL", "1e-12")
    monkeypatch.setenv("STEERKIT_LOG_LEVEL", " info ")

    s = get_settings()

    assert s.seed == 17
    assert s.samples == 500
    assert s.residual_tol == 1e-12
    assert s.log_level == "INFO"


@pytest.mark.parametrize(
    ("name", "value"),
    [
        ("STEERKIT_SEED", "seven"),
        ("STEERKIT_TOL", "tiny"),
        ("STEERKIT_MAX_STEPS", "-1"),
        ("STEERKIT_INPUT_TOL", "2"),
    ],
)
def test_get_settings_fails_fast(monkeypatch, name: str, value: str) -> None:
    monkeypatch.setenv(name, value)
    with pytest.raises(RuntimeError) as exc:
        get_settings()
    assert name in str(exc.value)


def test_settings_are_frozen() -> None:
    with pytest.raises(dataclasses.FrozenInstanceError):
        Settings().seed = 3  # type: ignore[misc]
