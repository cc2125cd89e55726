"""State documents in, run reports out."""

from __future__ import annotations

import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core_states import KetVector, SchmidtSpectrum
from .errors import EmptyInputError, InputParseError, InvariantViolationError, NormalizationError

logger = logging.getLogger(__name__)

STRUCTURED_DIGITS = 15
HUMAN_DIGITS = 7


def _parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise InputParseError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        return complex(float(value[0]), float(value[1]))
    raise InputParseError(f"{where}: expected a number or [re, im], got {value!r}")


def _parse_vector(raw: Any, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise InputParseError(f"{where}: expected a non-empty list")
    return np.array([_parse_complex(v, f"{where}[{i}]") for i, v in enumerate(raw)], dtype=complex)


@dataclass(frozen=True)
class StateInput:
    """A parsed state document: exactly one of `spectrum` / `matrix`, plus optional kets."""

    spectrum: list[float] | None = None
    matrix: np.ndarray | None = None
    kets: dict[str, np.ndarray] = field(default_factory=dict)
    reports: list[np.ndarray] = field(default_factory=list)
    labels: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_document(cls, doc: Any) -> StateInput:
        if not isinstance(doc, dict):
            raise InputParseError("state document must be a JSON object")

        has_spectrum = "spectrum" in doc
        has_matrix = "matrix" in doc
        if has_spectrum and has_matrix:
            raise InputParseError("state document must hold exactly one of 'spectrum' or 'matrix'")

        spectrum = None
        if has_spectrum:
            raw = doc["spectrum"]
            if not isinstance(raw, list) or not raw or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw
            ):
                raise InputParseError("'spectrum' must be a non-empty list of numbers")
            spectrum = [float(x) for x in raw]

        matrix = None
        if has_matrix:
            rows = doc["matrix"]
            if not isinstance(rows, list) or not rows:
                raise InputParseError("'matrix' must be a non-empty list of rows")
            parsed = [_parse_vector(row, f"matrix[{i}]") for i, row in enumerate(rows)]
            if len({r.size for r in parsed}) != 1:
                raise InputParseError("'matrix' rows must all have the same length")
            matrix = np.vstack(parsed)

        kets = {key: _parse_vector(doc[key], key) for key in ("phi", "phi_prime", "psi0", "outcome") if key in doc}

        reports: list[np.ndarray] = []
        if "reports" in doc:
            raw_reports = doc["reports"]
            if not isinstance(raw_reports, list):
                raise InputParseError("'reports' must be a list of kets")
            reports = [_parse_vector(r, f"reports[{i}]") for i, r in enumerate(raw_reports)]

        labels = doc.get("labels") or {}
        if not isinstance(labels, dict):
            raise InputParseError("'labels' must be an object")

        return cls(
            spectrum=spectrum,
            matrix=matrix,
            kets=kets,
            reports=reports,
            labels={str(k): str(v) for k, v in labels.items()},
        )

    def require_spectrum(self, *, input_tol: float) -> SchmidtSpectrum:
        if self.spectrum is None:
            raise InputParseError("this command needs a 'spectrum'")
        p = np.asarray(self.spectrum, dtype=float)
        if np.any(p < 0.0):
            raise InvariantViolationError("spectrum entries must be nonnegative")
        if np.any(np.diff(p) < 0.0):
            raise InvariantViolationError("spectrum must be ascending")
        total = float(p.sum())
        if abs(total - 1.0) > input_tol:
            raise NormalizationError(f"spectrum sums to {total!r}, farther than {input_tol} from 1")
        if total != 1.0:
            logger.warning(
                "input_renormalized",
                extra={"event": "input_renormalized", "field": "spectrum", "deviation": total - 1.0},
            )
        return SchmidtSpectrum(p / total)

    def require_ket(self, key: str, *, input_tol: float) -> KetVector:
        if key not in self.kets:
            raise InputParseError(f"this command needs '{key}'")
        return _lenient_ket(self.kets[key], key, input_tol)

    def require_reports(self, *, input_tol: float) -> list[KetVector]:
        if not self.reports:
            raise EmptyInputError("'reports' must hold at least one ket")
        return [_lenient_ket(r, f"reports[{i}]", input_tol) for i, r in enumerate(self.reports)]


def _lenient_ket(amps: np.ndarray, where: str, input_tol: float) -> KetVector:
    norm_sq = float(np.vdot(amps, amps).real)
    if abs(norm_sq - 1.0) > input_tol:
        raise NormalizationError(f"{where} has |v|^2 = {norm_sq!r}, farther than {input_tol} from 1")
    if norm_sq != 1.0:
        logger.warning(
            "input_renormalized",
            extra={"event": "input_renormalized", "field": where, "deviation": norm_sq - 1.0},
        )
    return KetVector.normalized(amps)


def load_document(source: str) -> StateInput:
    """Read a state document from a path, '-' (stdin) or an inline JSON string."""
    try:
        if source == "-":
            text = sys.stdin.read()
        elif source.lstrip().startswith("{"):
            text = source
        else:
            text = Path(source).read_text(encoding="utf-8")
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputParseError(f"cannot read state document {source!r}: {exc}") from exc
    return StateInput.from_document(doc)


def _round_sig(x: float, digits: int) -> float:
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{digits}g}")


def encode(value: Any, digits: int = STRUCTURED_DIGITS) -> Any:
    """Plain JSON types; complex as [re, im]; floats rounded to `digits` significant digits."""
    if isinstance(value, KetVector):
        return encode(value.amplitudes, digits)
    if isinstance(value, SchmidtSpectrum):
        return encode(value.probs, digits)
    if isinstance(value, np.ndarray):
        return [encode(v, digits) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round_sig(float(value), digits)
    if isinstance(value, (complex, np.complexfloating)):
        return [_round_sig(value.real, digits), _round_sig(value.imag, digits)]
    if isinstance(value, dict):
        return {str(k): encode(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v, digits) for v in value]
    if hasattr(value, "value"):
        return value.value
    return value


@dataclass
class RunReport:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any]
    seed: int | None
    tolerances: dict[str, float]
    wall_time_s: float = 0.0

    def to_document(self, *, include_timing: bool = False) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "command": self.command,
            "inputs": encode(self.inputs),
            "outputs": encode(self.outputs),
            "seed": self.seed,
            "tolerances": encode(self.tolerances),
        }
        if include_timing:
            doc["wall_time_s"] = encode(self.wall_time_s)
        return doc

    def render_json(self, *, include_timing: bool = False) -> str:
        return json.dumps(self.to_document(include_timing=include_timing), indent=2, sort_keys=True)

    def render_human(self) -> str:
        lines = [f"steerkit {self.command}"]
        if self.seed is not None:
            lines.append(f"  seed: {self.seed}")
        for section in ("inputs", "outputs"):
            lines.append(f"{section}:")
            for key, value in getattr(self, section).items():
                lines.append(f"  {key}: {_human(value)}")
        lines.append(f"wall_time_s: {self.wall_time_s:.3f}")
        return "\n".join(lines)


def _human(value: Any) -> str:
    encoded = encode(value, HUMAN_DIGITS)
    if isinstance(encoded, list) and encoded and all(
        isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v) for v in encoded
    ):
        parts = [f"{complex(re, im):.{HUMAN_DIGITS}g}" for re, im in encoded]
        return "[" + ", ".join(parts) + "]"
    if isinstance(encoded, float):
        return f"{encoded:.{HUMAN_DIGITS}g}"
    return json.dumps(encoded, ensure_ascii=False)
