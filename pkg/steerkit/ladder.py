from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core_states import DEGENERACY_RTOL, KetVector, SchmidtSpectrum, inner_product
from .errors import DimensionMismatchError, NoMaxClassWeightError, ZeroProbabilityError

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10_000
DEFAULT_RESIDUAL_TOL = 1e-14


@dataclass(frozen=True)
class LadderTrace:
    """psi_0 ... psi_M of the politeness exchange; even m are Bob's, odd m Alice's."""

    states: tuple[KetVector, ...]
    converged: bool
    limit: KetVector
    steps_taken: int
    # residuals[m] = 1 - |<psi_m|psi_{m+1}>|, including the final candidate step
    residuals: tuple[float, ...] = ()


def _check_dim(spectrum: SchmidtSpectrum, psi: KetVector) -> None:
    if psi.dim != spectrum.dim:
        raise DimensionMismatchError(f"ket has dimension {psi.dim}, spectrum has {spectrum.dim}")


def ladder_step(spectrum: SchmidtSpectrum, psi: KetVector) -> KetVector:
    """
    One half-step: psi_k -> c_k psi_k, renormalized.

    No conjugation is applied, so for complex psi this is the conjugate of
    the steered state; for real psi the two coincide.
    """
    _check_dim(spectrum, psi)
    nxt = spectrum.sqrt_probs * psi.amplitudes
    norm = float(np.linalg.norm(nxt))
    if norm == 0.0:
        raise ZeroProbabilityError("ket has no overlap with the Schmidt support")
    return KetVector(nxt / norm)


def run_ladder(
    spectrum: SchmidtSpectrum,
    psi0: KetVector,
    max_steps: int = DEFAULT_MAX_STEPS,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> LadderTrace:
    """Iterate ladder_step until 1 - |<psi_m|psi_{m+1}>| < residual_tol or max_steps is reached."""
    _check_dim(spectrum, psi0)
    states = [psi0]
    residuals: list[float] = []
    converged = False

    current = psi0
    for _ in range(max_steps + 1):
        candidate = ladder_step(spectrum, current)
        residual = 1.0 - abs(inner_product(current, candidate))
        residuals.append(residual)
        if residual < residual_tol:
            converged = True
            break
        if len(states) > max_steps:
            break
        states.append(candidate)
        current = candidate

    trace = LadderTrace(
        states=tuple(states),
        converged=converged,
        limit=states[-1],
        steps_taken=len(states) - 1,
        residuals=tuple(residuals),
    )
    logger.info(
        "ladder_done",
        extra={
            "event": "ladder_done",
            "steps_taken": trace.steps_taken,
            "converged": converged,
            "final_residual": residuals[-1],
        },
    )
    return trace


def max_class(spectrum: SchmidtSpectrum) -> tuple[int, ...]:
    p_max = spectrum.p_max
    return tuple(
        k for k in spectrum.support if p_max - spectrum.probs[k] <= DEGENERACY_RTOL * p_max
    )


def fixed_point(spectrum: SchmidtSpectrum, psi0: KetVector) -> KetVector:
    """psi0 restricted to the p_max class, renormalized."""
    _check_dim(spectrum, psi0)
    keep = list(max_class(spectrum))
    restricted = np.zeros(spectrum.dim, dtype=complex)
    restricted[keep] = psi0.amplitudes[keep]
    if float(np.linalg.norm(restricted)) == 0.0:
        raise NoMaxClassWeightError("psi0 has no weight on the largest Schmidt class")
    return KetVector.normalized(restricted)
