from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core_states import (
    COMPARE_TOL,
    SUPPORT_EPS,
    BipartiteState,
    KetVector,
    SchmidtSpectrum,
    Side,
    SteeringResult,
    generic_steer,
    inner_product,
    require_support,
)
from .errors import DimensionMismatchError, EmptyInputError, OffSupportError, ZeroProbabilityError

logger = logging.getLogger(__name__)

__all__ = [
    "OverlapReport",
    "ReportClass",
    "SteeringResult",
    "classify_report",
    "cross_overlap",
    "mutual_overlap",
    "overlap_report",
    "round_trip",
    "steered_state",
    "steering_state",
]


class ReportClass(str, Enum):
    DIRECT_MEASUREMENT = "ConsistentWithDirectMeasurement"
    STEERING = "ConsistentWithSteering"
    INCONSISTENT = "Inconsistent"


@dataclass(frozen=True)
class OverlapReport:
    steered: SteeringResult
    steering: SteeringResult
    overlap: float

    @property
    def p_beta(self) -> float:
        return self.steered.probability

    @property
    def p_alpha(self) -> float:
        return self.steering.probability


def _check_dim(spectrum: SchmidtSpectrum, phi: KetVector) -> None:
    if phi.dim != spectrum.dim:
        raise DimensionMismatchError(f"ket has dimension {phi.dim}, spectrum has {spectrum.dim}")


def steered_state(spectrum: SchmidtSpectrum, phi: KetVector) -> SteeringResult:
    """
    Alice's state after Bob finds `phi` himself: beta_k^* sqrt(p_k) / sqrt(P_beta).

    P_beta = sum_k p_k |beta_k|^2 is returned as the probability.
    """
    _check_dim(spectrum, phi)
    beta = phi.amplitudes
    p_beta = float(np.sum(spectrum.probs * np.abs(beta) ** 2))
    if p_beta <= SUPPORT_EPS:
        raise ZeroProbabilityError("phi is supported only on zero Schmidt coefficients (P_beta = 0)")

    remote = np.conj(beta) * spectrum.sqrt_probs / np.sqrt(p_beta)
    return SteeringResult(remote_state=KetVector.normalized(remote), probability=p_beta)


def steering_state(spectrum: SchmidtSpectrum, phi: KetVector) -> SteeringResult:
    """
    The outcome Alice must have found to steer `phi` onto Bob.

    Inverts alpha_k^* sqrt(p_k) / sqrt(P_alpha) = beta_k on the support, with
    P_alpha = (sum_k |beta_k|^2 / p_k)^-1.
    """
    require_support(spectrum, phi)
    mask = spectrum.support_mask
    beta = np.where(mask, phi.amplitudes, 0.0)

    inv_p = np.zeros(spectrum.dim)
    inv_p[mask] = 1.0 / spectrum.probs[mask]
    p_alpha = 1.0 / float(np.sum(np.abs(beta) ** 2 * inv_p))

    alpha = np.conj(beta) * np.sqrt(p_alpha * inv_p)
    return SteeringResult(remote_state=KetVector.normalized(alpha), probability=p_alpha)


def mutual_overlap(spectrum: SchmidtSpectrum, phi: KetVector) -> float:
    """<chi_steered(phi)|chi_steering(phi)>; real and in (0, 1]."""
    return overlap_report(spectrum, phi).overlap


def overlap_report(spectrum: SchmidtSpectrum, phi: KetVector) -> OverlapReport:
    steered = steered_state(spectrum, phi)
    steering = steering_state(spectrum, phi)
    value = inner_product(steered.remote_state, steering.remote_state)
    return OverlapReport(steered=steered, steering=steering, overlap=float(value.real))


def cross_overlap(spectrum: SchmidtSpectrum, phi: KetVector, phi_prime: KetVector) -> complex:
    """
    <chi_steered(phi)|chi_steering(phi')> from the explicit amplitudes.

    Equals sqrt(P'_alpha / P_beta) <phi'|phi>, so it vanishes exactly when phi' is orthogonal to phi.
    """
    steered = steered_state(spectrum, phi)
    steering = steering_state(spectrum, phi_prime)
    return inner_product(steered.remote_state, steering.remote_state)


def round_trip(spectrum: SchmidtSpectrum, phi: KetVector) -> SteeringResult:
    """
    Bob steers chi_steered(phi) onto Alice; Alice then treats it as her own
    outcome and steers Bob. The result is proportional to p_k beta_k.
    """
    state = BipartiteState.from_spectrum(spectrum)
    alice = steered_state(spectrum, phi)
    return generic_steer(state, Side.A, alice.remote_state)


def classify_report(
    spectrum: SchmidtSpectrum,
    reported_states: Sequence[KetVector],
    tol: float = COMPARE_TOL,
) -> ReportClass:
    """
    Tell a direct-measurement report from a steering report.

    Bob asks Bobby for the updated state in every round. Outcomes of a direct
    measurement are mutually orthogonal; states steered by Alice are not
    (unless the state is maximally entangled on the measured subspace).
    """
    if not reported_states:
        raise EmptyInputError("classify_report needs at least one reported state")
    for ket in reported_states:
        _check_dim(spectrum, ket)

    distinct: list[KetVector] = []
    for ket in reported_states:
        if all(abs(inner_product(ket, seen)) < 1.0 - tol for seen in distinct):
            distinct.append(ket)

    overlaps = [
        abs(inner_product(a, b))
        for i, a in enumerate(distinct)
        for b in distinct[i + 1 :]
    ]
    all_orthogonal = all(o < tol for o in overlaps)

    if all_orthogonal and len(distinct) >= 2:
        reachable = all(
            float(np.sum(spectrum.probs * np.abs(k.amplitudes) ** 2)) > SUPPORT_EPS for k in distinct
        )
        verdict = ReportClass.DIRECT_MEASUREMENT if reachable else ReportClass.INCONSISTENT
    elif not all_orthogonal:
        try:
            for ket in distinct:
                require_support(spectrum, ket)
            verdict = ReportClass.STEERING
        except OffSupportError:
            verdict = ReportClass.INCONSISTENT
    else:
        verdict = ReportClass.INCONSISTENT

    logger.debug(
        "classify_report",
        extra={"event": "classify_report", "distinct": len(distinct), "verdict": verdict.value},
    )
    return verdict
