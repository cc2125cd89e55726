"""
Frauchiger-Renner state and the two steering inferences its argument chains.

Agents' internal labs are collapsed to the |0>/|1> relabeling of each side;
the extra tensor factors would add dimension without changing any number.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core_states import (
    BipartiteState,
    KetVector,
    Side,
    equal_up_to_phase,
    generic_steer,
    schmidt_decompose,
)
from .errors import InvariantViolationError, ZeroProbabilityError
from .ladder import ladder_step

logger = logging.getLogger(__name__)

FR_AMPLITUDES = np.array([[1.0, 1.0], [1.0, 0.0]]) / math.sqrt(3.0)


class InferenceStep(NamedTuple):
    agent: str
    state: KetVector
    # probability of the measurement / steering event that produced `state`
    probability: float


@dataclass(frozen=True)
class FrOutcomeTable:
    p_ok_ok: float
    p_naive: float
    inference_chain: tuple[InferenceStep, ...]
    # keys like "ok_bar,ok"; all four sum to 1
    outcome_probs: dict[str, float]


def _ok_vectors(ok_sign: int) -> tuple[KetVector, KetVector]:
    if ok_sign not in (-1, 1):
        raise InvariantViolationError(f"ok_sign must be -1 or 1 (got {ok_sign})")
    ok = KetVector(np.array([1.0, ok_sign]) / math.sqrt(2.0))
    fail = KetVector(np.array([1.0, -ok_sign]) / math.sqrt(2.0))
    return ok, fail


def build_fr_state() -> BipartiteState:
    return schmidt_decompose(FR_AMPLITUDES)


def run_inference_chain(state: BipartiteState | None = None) -> tuple[InferenceStep, ...]:
    """
    Bob finds |1>_B and infers Alice holds |0>_A; Alice, taking that as her
    outcome, infers Bob holds (|0> + |1>)/sqrt(2).
    """
    state = state or build_fr_state()
    bob = KetVector.basis(2, 1)

    to_alice = generic_steer(state, Side.B, bob)
    to_bob = generic_steer(state, Side.A, to_alice.remote_state)

    return (
        InferenceStep("Bob", bob, to_alice.probability),
        InferenceStep("Alice-inferred", to_alice.remote_state, to_alice.probability),
        InferenceStep("Bob-naive", to_bob.remote_state, to_bob.probability),
    )


def joint_probability(state: BipartiteState, alice: KetVector, bob: KetVector) -> float:
    """P(alice, bob) = P(alice) * |<bob|remote>|^2, through a steering step on Alice's side."""
    try:
        remote = generic_steer(state, Side.A, alice)
    except ZeroProbabilityError:
        return 0.0
    amp = np.vdot(bob.amplitudes, remote.remote_state.amplitudes)
    return remote.probability * float(abs(amp) ** 2)


def compute_ok_probabilities(ok_sign: int = -1, state: BipartiteState | None = None) -> FrOutcomeTable:
    state = state or build_fr_state()
    ok, fail = _ok_vectors(ok_sign)

    outcome_probs = {
        f"{a_label},{b_label}": joint_probability(state, a_vec, b_vec)
        for a_label, a_vec in (("ok_bar", ok), ("fail_bar", fail))
        for b_label, b_vec in (("ok", ok), ("fail", fail))
    }

    table = FrOutcomeTable(
        p_ok_ok=outcome_probs["ok_bar,ok"],
        # naive update: ok_bar certainly implies fail
        p_naive=0.0,
        inference_chain=run_inference_chain(state),
        outcome_probs=outcome_probs,
    )
    logger.info(
        "fr_probabilities",
        extra={"event": "fr_probabilities", "p_ok_ok": table.p_ok_ok, "ok_sign": ok_sign},
    )
    return table


def ladder_matches_chain(state: BipartiteState | None = None, tol: float = 1e-10) -> bool:
    """
    Two ladder half-steps from |1>_B, taken in Bob's Schmidt frame, land on the
    chain's Bob-naive state once mapped back to the computational basis.
    """
    state = state or build_fr_state()
    r = state.spectrum.dim
    basis_b = state.basis_B[:, :r]

    # <k_B|1_B>
    psi0 = KetVector.normalized(np.conj(basis_b[1, :]))
    psi2 = ladder_step(state.spectrum, ladder_step(state.spectrum, psi0))
    bob_naive = KetVector.normalized(basis_b @ psi2.amplitudes)

    return equal_up_to_phase(bob_naive, run_inference_chain(state)[-1].state, tol)
