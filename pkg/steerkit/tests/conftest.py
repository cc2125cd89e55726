from __future__ import annotations

import math
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from steerkit.core_states import KetVector, SchmidtSpectrum
from steerkit.fr_scenario import build_fr_state

FIXTURES = Path(__file__).parent / "fixtures"

STEERKIT_ENV = (
    "STEERKIT_SEED",
    "STEERKIT_SAMPLES",
    "STEERKIT_WORKERS",
    "STEERKIT_TOL",
    "STEERKIT_INPUT_TOL",
    "STEERKIT_RESIDUAL_TOL",
    "STEERKIT_MAX_STEPS",
    "STEERKIT_FR_OK_SIGN",
    "STEERKIT_LOG_LEVEL",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch) -> None:
    for name in STEERKIT_ENV:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20241016)


@pytest.fixture()
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture()
def make_spectrum(rng) -> Callable[..., SchmidtSpectrum]:
    """Random ascending spectrum; `floor` keeps the smallest entry away from zero."""

    def _make(n: int, *, floor: float = 0.01) -> SchmidtSpectrum:
        w = rng.uniform(floor, 1.0, size=n)
        return SchmidtSpectrum.normalized(w)

    return _make


@pytest.fixture()
def make_ket(rng) -> Callable[..., KetVector]:
    """Random ket from complex Gaussian amplitudes (real when real=True)."""

    def _make(n: int, *, real: bool = False) -> KetVector:
        amps = rng.standard_normal(n)
        if not real:
            amps = amps + 1j * rng.standard_normal(n)
        return KetVector.normalized(amps)

    return _make


@pytest.fixture()
def make_unitary(rng) -> Callable[[int], np.ndarray]:
    def _make(n: int) -> np.ndarray:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    return _make


@pytest.fixture()
def fr_state():
    return build_fr_state()


@pytest.fixture()
def plus() -> KetVector:
    return KetVector(np.array([1.0, 1.0]) / math.sqrt(2.0))


@pytest.fixture()
def minus() -> KetVector:
    return KetVector(np.array([1.0, -1.0]) / math.sqrt(2.0))
