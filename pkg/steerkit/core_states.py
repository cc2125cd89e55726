from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvariantViolationError,
    NormalizationError,
    OffSupportError,
    ZeroProbabilityError,
)

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
COMPARE_TOL = 1e-10
SUPPORT_EPS = 1e-12
DEGENERACY_RTOL = 1e-10
MATRIX_NORM_TOL = 1e-10


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.array(values, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class KetVector:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise EmptyInputError(f"ket needs a non-empty 1-D amplitude list (got shape {amps.shape})")
        if not np.all(np.isfinite(amps)):
            raise InvariantViolationError("ket amplitudes must be finite")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise NormalizationError(f"ket is not unit norm (|v|^2 = {norm_sq!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes: Iterable[complex] | np.ndarray) -> KetVector:
        """Build a ket from any nonzero amplitude list, rescaling it to unit norm."""
        amps = np.asarray(list(amplitudes) if not isinstance(amplitudes, np.ndarray) else amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise EmptyInputError("ket needs a non-empty 1-D amplitude list")
        norm = float(np.linalg.norm(amps))
        if norm == 0.0 or not np.isfinite(norm):
            raise NormalizationError("cannot normalize a zero (or non-finite) vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> KetVector:
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def conjugate(self) -> KetVector:
        return KetVector(np.conj(self.amplitudes))

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"KetVector({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """
    Ascending Schmidt probabilities p_0 <= ... <= p_{n-1}, summing to 1.

    Entries at or below SUPPORT_EPS are outside the support and treated as zero.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise EmptyInputError("spectrum needs at least one probability")
        if not np.all(np.isfinite(p)):
            raise InvariantViolationError("spectrum entries must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise InvariantViolationError(f"spectrum entries must lie in [0, 1] (got {p.tolist()})")
        if np.any(np.diff(p) < 0.0):
            raise InvariantViolationError(f"spectrum must be ascending (got {p.tolist()})")
        total = float(p.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise NormalizationError(f"spectrum must sum to 1 (got {total!r})")
        if not np.any(p > SUPPORT_EPS):
            raise InvariantViolationError("spectrum support is empty")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def normalized(cls, weights: Iterable[float] | np.ndarray) -> SchmidtSpectrum:
        """Sort nonnegative weights ascending and rescale them to sum to 1."""
        w = np.sort(np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float))
        if w.size < 1:
            raise EmptyInputError("spectrum needs at least one weight")
        if np.any(w < 0.0):
            raise InvariantViolationError("spectrum weights must be nonnegative")
        total = float(w.sum())
        if total <= 0.0:
            raise NormalizationError("spectrum weights sum to zero")
        return cls(w / total)

    @classmethod
    def uniform(cls, dim: int) -> SchmidtSpectrum:
        return cls(np.full(dim, 1.0 / dim))

    @property
    def dim(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.probs > SUPPORT_EPS))

    @property
    def support_mask(self) -> np.ndarray:
        return self.probs > SUPPORT_EPS

    @property
    def sqrt_probs(self) -> np.ndarray:
        """c_k = sqrt(p_k), exactly zero off the support."""
        return np.where(self.support_mask, np.sqrt(self.probs), 0.0)

    @property
    def p_min(self) -> float:
        return float(self.probs[self.support[0]])

    @property
    def p_max(self) -> float:
        return float(self.probs[-1])

    def classes(self) -> tuple[tuple[int, ...], ...]:
        """Degeneracy classes of the support, ascending; neighbours within DEGENERACY_RTOL merge."""
        groups: list[list[int]] = []
        for k in self.support:
            if groups:
                head = self.probs[groups[-1][0]]
                if abs(self.probs[k] - head) <= DEGENERACY_RTOL * max(self.probs[k], head):
                    groups[-1].append(k)
                    continue
            groups.append([k])
        return tuple(tuple(g) for g in groups)

    def is_uniform(self) -> bool:
        """True when the support carries a single degeneracy class (maximal entanglement on it)."""
        return len(self.classes()) == 1

    def __repr__(self) -> str:
        return f"SchmidtSpectrum({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """
    Pure state sum_k sqrt(p_k) |k>_A |k>_B.

    Column k of basis_A / basis_B is the k-th Schmidt vector in the
    computational basis; only the first spectrum.dim columns carry weight.
    """

    spectrum: SchmidtSpectrum
    basis_A: np.ndarray
    basis_B: np.ndarray

    def __post_init__(self) -> None:
        for name in ("basis_A", "basis_B"):
            u = np.asarray(getattr(self, name), dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise InvariantViolationError(f"{name} must be square (got shape {u.shape})")
            if u.shape[0] < self.spectrum.dim:
                raise DimensionMismatchError(f"{name} has fewer columns than Schmidt coefficients")
            if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0.0, atol=COMPARE_TOL):
                raise InvariantViolationError(f"{name} is not unitary")
            object.__setattr__(self, name, _frozen(u))

    @property
    def dims(self) -> tuple[int, int]:
        return int(self.basis_A.shape[0]), int(self.basis_B.shape[0])

    @property
    def amplitude_matrix(self) -> np.ndarray:
        """M[i, j] = amplitude of |i>_A |j>_B, reassembled from the decomposition."""
        r = self.spectrum.dim
        c = self.spectrum.sqrt_probs
        return (self.basis_A[:, :r] * c) @ self.basis_B[:, :r].T

    @classmethod
    def from_spectrum(cls, spectrum: SchmidtSpectrum) -> BipartiteState:
        """State written directly in its Schmidt basis (identity bases)."""
        eye = np.eye(spectrum.dim, dtype=complex)
        return cls(spectrum=spectrum, basis_A=eye, basis_B=eye)


class Side(str, Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> Side:
        return Side.B if self is Side.A else Side.A


@dataclass(frozen=True, eq=False)
class SteeringResult:
    """A steered or steering state together with the probability of the outcome behind it."""

    remote_state: KetVector
    probability: float = field(default=1.0)

    def __post_init__(self) -> None:
        if not (0.0 < self.probability <= 1.0 + NORM_TOL):
            raise InvariantViolationError(f"outcome probability must be in (0, 1] (got {self.probability!r})")
        object.__setattr__(self, "probability", float(min(self.probability, 1.0)))


def _check_dims(a: KetVector, b: KetVector) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


def inner_product(a: KetVector, b: KetVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def equal_up_to_phase(a: KetVector, b: KetVector, tol: float = COMPARE_TOL) -> bool:
    return abs(abs(inner_product(a, b)) - 1.0) < tol


def schmidt_decompose(amplitude_matrix: np.ndarray | list[list[complex]]) -> BipartiteState:
    """
    Schmidt-decompose M[i, j] = <i_A j_B|Psi> through an SVD.

    Coefficients come out ascending and both bases are permuted with them;
    for rectangular M the extra basis columns are appended after the paired ones.
    """
    m = np.asarray(amplitude_matrix, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise EmptyInputError(f"amplitude matrix must be a non-empty 2-D array (got shape {m.shape})")
    if not np.all(np.isfinite(m)):
        raise InvariantViolationError("amplitude matrix entries must be finite")

    frob = float(np.linalg.norm(m))
    if abs(frob - 1.0) > MATRIX_NORM_TOL:
        raise NormalizationError(f"amplitude matrix must have unit Frobenius norm (got {frob!r})")

    u, s, vh = scipy.linalg.svd(m, full_matrices=True)
    r = s.size

    probs = s**2
    probs = probs / probs.sum()
    order = np.argsort(probs, kind="stable")

    basis_a = np.concatenate([u[:, order], u[:, r:]], axis=1)
    # M = U S Vh, so the Bob Schmidt vectors are the rows of Vh (unconjugated)
    v = vh.T
    basis_b = np.concatenate([v[:, order], v[:, r:]], axis=1)

    state = BipartiteState(
        spectrum=SchmidtSpectrum(probs[order]),
        basis_A=basis_a,
        basis_B=basis_b,
    )
    logger.debug("schmidt_decompose", extra={"event": "schmidt_decompose", "shape": list(m.shape)})
    return state


def generic_steer(state: BipartiteState, measured_side: Side | str, outcome: KetVector) -> SteeringResult:
    """
    Project `measured_side` onto `outcome` and return the other side's conditional state.

    The remote amplitudes are the partial inner product <outcome|Psi>, normalized.
    """
    side = Side(measured_side)
    m = state.amplitude_matrix
    n_a, n_b = m.shape
    expected = n_a if side is Side.A else n_b
    if outcome.dim != expected:
        raise DimensionMismatchError(f"outcome has dimension {outcome.dim}, side {side.value} has {expected}")

    conj_outcome = np.conj(outcome.amplitudes)
    remote = m @ conj_outcome if side is Side.B else m.T @ conj_outcome

    probability = float(np.vdot(remote, remote).real)
    if probability <= SUPPORT_EPS:
        raise ZeroProbabilityError(f"outcome on side {side.value} has zero probability")

    return SteeringResult(remote_state=KetVector(remote / np.sqrt(probability)), probability=probability)


def require_support(spectrum: SchmidtSpectrum, ket: KetVector) -> None:
    """Raise OffSupportError when `ket` has weight on a zero Schmidt coefficient."""
    if ket.dim != spectrum.dim:
        raise DimensionMismatchError(f"ket has dimension {ket.dim}, spectrum has {spectrum.dim}")
    off = np.abs(ket.amplitudes[~spectrum.support_mask]) ** 2
    if off.size and float(off.sum()) > SUPPORT_EPS:
        raise OffSupportError("ket has weight on indices outside the Schmidt support")
