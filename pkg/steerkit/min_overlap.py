"""
Minimum of the steered/steering overlap over Bob's outcome phi.

The closed form is 2 sqrt(p_min p_max) / (p_min + p_max) over the support.
`solve_by_reduction` rebuilds it constructively: the fractional problem in
alpha is linearised in a_k = alpha_k^2, stationarity limits the optimizer to
two indices, and the resulting scalar problem in (k0, k1, s, a) is solved in
closed form per pair. `brute_force_oracle` checks all of this numerically.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .core_states import KetVector, SchmidtSpectrum
from .errors import DimensionMismatchError, InvariantViolationError
from .steering import mutual_overlap

logger = logging.getLogger(__name__)

ORACLE_CHUNK = 4096
_THETA_GRID = 64
_TIE_TOL = 1e-15


@dataclass(frozen=True)
class ReductionTrace:
    k0: int
    k1: int
    s_star: float
    a_star: float
    ratio_r: float
    objective: float
    K_min: tuple[int, ...]
    K_max: tuple[int, ...]
    # (k0, k1, objective) for every class pair the solver looked at
    pair_objectives: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class MinOverlapSolution:
    value: float
    optimal_phi: KetVector
    optimal_alpha: KetVector
    trace: ReductionTrace


def closed_form_min(spectrum: SchmidtSpectrum) -> float:
    p0, pn = spectrum.p_min, spectrum.p_max
    return 2.0 * math.sqrt(p0 * pn) / (p0 + pn)


def optimal_phi(spectrum: SchmidtSpectrum, lambda_phase: float = 0.0) -> KetVector:
    """
    (|i> + e^{i lambda}|j>) / sqrt(2) with i, j the lowest indices of the smallest
    and largest support classes. A single-class support gives |i>, where every phi
    attains the minimum.
    """
    classes = spectrum.classes()
    i = classes[0][0]
    if len(classes) == 1:
        return KetVector.basis(spectrum.dim, i)

    j = classes[-1][0]
    amps = np.zeros(spectrum.dim, dtype=complex)
    amps[i] = 1.0
    amps[j] = np.exp(1j * lambda_phase)
    return KetVector(amps / math.sqrt(2.0))


def fractional_objective(probs: np.ndarray, weights: np.ndarray) -> float:
    """sum_k p_k a_k / sqrt(sum_k p_k^2 a_k) with a_k = |alpha_k|^2."""
    p = np.asarray(probs, dtype=float)
    a = np.asarray(weights, dtype=float)
    return float(np.dot(p, a) / math.sqrt(float(np.dot(p * p, a))))


def pair_objective(p_i: float, p_j: float) -> float:
    """Scalar objective of a two-index candidate at its optimal s: 2 sqrt(p_i p_j)/(p_i + p_j)."""
    s = 1.0 / math.sqrt(p_i * p_j)
    return (1.0 / s + s * p_i * p_j) / (p_i + p_j)


def _a_star(p_k0: float, p_k1: float, s: float) -> float:
    return (1.0 - s * s * p_k1 * p_k1) / (s * s * (p_k0 * p_k0 - p_k1 * p_k1))


def solve_by_reduction(spectrum: SchmidtSpectrum) -> MinOverlapSolution:
    """
    Enumerate merged class pairs (k0 < k1), solve each scalar problem in closed
    form and keep the best; then spread the optimal weights back over K_min and K_max.

    `value` is the scalar optimum at (p_k0, p_k1), the outer members of the two
    classes, so it matches `closed_form_min` even when a class merges entries that
    differ within the degeneracy tolerance.
    """
    probs = spectrum.probs
    classes = spectrum.classes()

    if len(classes) == 1:
        k = classes[0][0]
        phi = KetVector.basis(spectrum.dim, k)
        trace = ReductionTrace(
            k0=k,
            k1=k,
            s_star=1.0 / float(probs[k]),
            a_star=1.0,
            ratio_r=1.0,
            objective=1.0,
            K_min=classes[0],
            K_max=classes[0],
        )
        logger.debug("single class support", extra={"event": "reduction_single_class"})
        return MinOverlapSolution(value=1.0, optimal_phi=phi, optimal_alpha=phi, trace=trace)

    # a pair is scored on its outer members: lowest of the lower class, highest of the upper
    candidates: list[tuple[int, int, float]] = []
    best: tuple[float, float, int, int] | None = None
    for i, j in itertools.combinations(range(len(classes)), 2):
        lo, hi = classes[i][0], classes[j][-1]
        p_i, p_j = float(probs[lo]), float(probs[hi])
        value = pair_objective(p_i, p_j)
        ratio = p_i / p_j
        candidates.append((lo, hi, value))
        # near r = 1 the objective is flat to rounding; the ratio orders it exactly
        if (
            best is None
            or value < best[0] - _TIE_TOL
            or (abs(value - best[0]) <= _TIE_TOL and ratio < best[1])
        ):
            best = (value, ratio, i, j)

    assert best is not None
    objective, _, ci, cj = best
    k0, k1 = classes[ci][0], classes[cj][-1]
    p_k0, p_k1 = float(probs[k0]), float(probs[k1])
    s_star = 1.0 / math.sqrt(p_k0 * p_k1)
    a_star = _a_star(p_k0, p_k1, s_star)

    weights = np.zeros(spectrum.dim)
    weights[list(classes[ci])] = a_star / len(classes[ci])
    weights[list(classes[cj])] = (1.0 - a_star) / len(classes[cj])

    alpha = np.sqrt(weights)
    p_alpha = float(np.dot(probs, weights))
    # beta_k = alpha_k^* sqrt(p_k) / sqrt(P_alpha); alpha is real here
    beta = alpha * np.sqrt(probs) / math.sqrt(p_alpha)

    trace = ReductionTrace(
        k0=k0,
        k1=k1,
        s_star=s_star,
        a_star=a_star,
        ratio_r=p_k0 / p_k1,
        objective=objective,
        K_min=classes[ci],
        K_max=classes[cj],
        pair_objectives=tuple(candidates),
    )
    if (ci, cj) != (0, len(classes) - 1):
        # monotonicity in r guarantees the extremes; anything else is a numerical defect
        raise InvariantViolationError(f"reduction selected non-extreme classes {trace.K_min}, {trace.K_max}")

    return MinOverlapSolution(
        value=objective,
        optimal_phi=KetVector.normalized(beta),
        optimal_alpha=KetVector.normalized(alpha),
        trace=trace,
    )


def degenerate_split_value(spectrum: SchmidtSpectrum, weights: np.ndarray) -> float:
    """Fractional objective for an arbitrary weight vector a (nonnegative, summing to 1)."""
    a = np.asarray(weights, dtype=float)
    if a.shape != (spectrum.dim,):
        raise DimensionMismatchError(f"weights have shape {a.shape}, spectrum has {spectrum.dim}")
    return fractional_objective(spectrum.probs, a / a.sum())


def stationarity_residual(q: np.ndarray, support: tuple[int, ...] | list[int]) -> float:
    """
    Least-squares residual of q_k + lam + mu q_k^2 = 0 for k in `support`.

    Zero (to rounding) when |support| <= 2; strictly positive otherwise for distinct q.
    """
    q_k = np.asarray(q, dtype=float)[list(support)]
    a = np.column_stack([np.ones_like(q_k), q_k**2])
    x, _, _, _ = scipy.linalg.lstsq(a, -q_k)
    return float(np.linalg.norm(a @ x + q_k))


def _state_overlaps(sqrt_p: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Row-wise <chi_steered|chi_steering> built from the two explicit states."""
    p = sqrt_p**2
    weights = np.abs(betas) ** 2
    p_beta = weights @ p
    inv_p = np.divide(1.0, p, out=np.zeros_like(p), where=p > 0)
    p_alpha = 1.0 / (weights @ inv_p)

    chi_steered = np.conj(betas) * sqrt_p / np.sqrt(p_beta)[:, None]
    chi_steering = np.conj(betas) * np.sqrt(p_alpha[:, None] * inv_p)
    return np.einsum("ij,ij->i", np.conj(chi_steered), chi_steering).real


def _sample_chunk(seed_seq: np.random.SeedSequence, size: int, sqrt_p: np.ndarray, support: np.ndarray):
    rng = np.random.default_rng(seed_seq)
    n_sup = support.size
    draws = rng.standard_normal((size, n_sup)) + 1j * rng.standard_normal((size, n_sup))
    draws /= np.linalg.norm(draws, axis=1)[:, None]

    betas = np.zeros((size, sqrt_p.size), dtype=complex)
    betas[:, support] = draws
    values = _state_overlaps(sqrt_p, betas)
    idx = int(np.argmin(values))
    return float(values[idx]), betas[idx]


def _refine_pair(sqrt_p: np.ndarray, i: int, j: int, phase: float) -> tuple[float, np.ndarray] | None:
    n = sqrt_p.size

    def ket(theta: float) -> np.ndarray:
        b = np.zeros(n, dtype=complex)
        b[i] = math.cos(theta)
        b[j] = math.sin(theta) * np.exp(1j * phase)
        return b

    def f(theta: float) -> float:
        return float(_state_overlaps(sqrt_p, ket(theta)[None, :])[0])

    hi = math.pi / 2.0
    grid = np.linspace(0.0, hi, _THETA_GRID + 2)[1:-1]
    values = np.array([f(t) for t in grid])
    mid = float(grid[int(np.argmin(values))])
    f_mid = float(values.min())
    if not (f_mid < f(0.0) and f_mid < f(hi)):
        # equal probabilities: flat in theta
        return None

    theta, value, _ = scipy.optimize.golden(f, brack=(0.0, mid, hi), full_output=True)
    return float(value), ket(float(theta))


def brute_force_oracle(
    spectrum: SchmidtSpectrum,
    samples: int,
    seed: int,
    *,
    workers: int = 1,
) -> tuple[float, KetVector]:
    """
    Random search over Bob's outcome phi followed by a two-index refinement.

    Samples are Gaussian complex amplitudes on the support, drawn in fixed-size
    chunks from SeedSequence(seed).spawn(...), so the result depends only on
    (samples, seed) and never on `workers`.
    """
    if samples < 1:
        raise InvariantViolationError(f"samples must be >= 1 (got {samples})")

    if spectrum.is_uniform():
        # every phi attains 1
        k = spectrum.support[0]
        logger.info(
            "oracle_done",
            extra={"event": "oracle_done", "samples": 0, "seed": seed, "raw_value": 1.0, "value": 1.0},
        )
        return 1.0, KetVector.basis(spectrum.dim, k)

    sqrt_p = spectrum.sqrt_probs
    support = np.asarray(spectrum.support)
    sizes = [ORACLE_CHUNK] * (samples // ORACLE_CHUNK)
    if samples % ORACLE_CHUNK:
        sizes.append(samples % ORACLE_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    jobs = list(zip(seeds, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _sample_chunk(job[0], job[1], sqrt_p, support), jobs))
    else:
        results = [_sample_chunk(s, size, sqrt_p, support) for s, size in jobs]

    best_value, best_beta = results[0]
    for value, beta in results[1:]:
        if value < best_value:
            best_value, best_beta = value, beta
    raw_value = best_value

    for i, j in itertools.combinations(spectrum.support, 2):
        phase = float(np.angle(best_beta[j]) - np.angle(best_beta[i]))
        refined = _refine_pair(sqrt_p, i, j, phase)
        if refined is not None and refined[0] < best_value:
            best_value, best_beta = refined

    logger.info(
        "oracle_done",
        extra={
            "event": "oracle_done",
            "samples": samples,
            "seed": seed,
            "raw_value": raw_value,
            "value": best_value,
        },
    )
    return best_value, KetVector.normalized(best_beta)


def check_solution(spectrum: SchmidtSpectrum, solution: MinOverlapSolution) -> float:
    """Overlap evaluated through the steering states at the solver's phi."""
    return mutual_overlap(spectrum, solution.optimal_phi)
