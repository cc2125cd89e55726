from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
import uuid
from typing import Any, Callable

from .config import Settings, get_settings, validate_settings
from .core_states import BipartiteState, Side, equal_up_to_phase, generic_steer, schmidt_decompose
from .errors import InputParseError, SteerkitError, ZeroProbabilityError
from .fr_scenario import compute_ok_probabilities, ladder_matches_chain
from .ladder import fixed_point, run_ladder
from .logging_utils import LogContext, configure_logging
from .min_overlap import brute_force_oracle, check_solution, closed_form_min, solve_by_reduction
from .report import RunReport, StateInput, load_document
from .steering import classify_report, cross_overlap, overlap_report, steered_state

logger = logging.getLogger("steerkit")

CommandFn = Callable[[StateInput | None, argparse.Namespace, Settings], RunReport]


def _report(
    command: str,
    inputs: dict[str, Any],
    outputs: dict[str, Any],
    settings: Settings,
    *,
    seeded: bool = False,
) -> RunReport:
    return RunReport(
        command=command,
        inputs=inputs,
        outputs=outputs,
        seed=settings.seed if seeded else None,
        tolerances=settings.tolerances,
    )


def cmd_decompose(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    if doc.matrix is None:
        raise InputParseError("decompose needs a 'matrix'")
    state = schmidt_decompose(doc.matrix)
    r = state.spectrum.dim
    return _report(
        "decompose",
        {"matrix": doc.matrix},
        {
            "spectrum": state.spectrum,
            "support": list(state.spectrum.support),
            "basis_A": state.basis_A[:, :r].T,
            "basis_B": state.basis_B[:, :r].T,
        },
        settings,
    )


def cmd_steer(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    outcome = doc.require_ket("outcome", input_tol=settings.input_tol)
    side = Side(args.side)
    if doc.matrix is not None:
        state = schmidt_decompose(doc.matrix)
        result = generic_steer(state, side, outcome)
        inputs: dict[str, Any] = {"matrix": doc.matrix, "side": side, "outcome": outcome}
    else:
        spectrum = doc.require_spectrum(input_tol=settings.input_tol)
        if side is Side.B:
            result = steered_state(spectrum, outcome)
        else:
            result = generic_steer(BipartiteState.from_spectrum(spectrum), side, outcome)
        inputs = {"spectrum": spectrum, "side": side, "outcome": outcome}
    return _report(
        "steer",
        inputs,
        {"remote_state": result.remote_state, "probability": result.probability},
        settings,
    )


def cmd_overlap(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    spectrum = doc.require_spectrum(input_tol=settings.input_tol)
    phi = doc.require_ket("phi", input_tol=settings.input_tol)
    result = overlap_report(spectrum, phi)

    outputs: dict[str, Any] = {
        "chi_steered": result.steered.remote_state,
        "chi_steering": result.steering.remote_state,
        "P_beta": result.p_beta,
        "P_alpha": result.p_alpha,
        "overlap": result.overlap,
        "sqrt_P_alpha_over_P_beta": math.sqrt(result.p_alpha / result.p_beta),
    }
    inputs: dict[str, Any] = {"spectrum": spectrum, "phi": phi}
    if "phi_prime" in doc.kets:
        phi_prime = doc.require_ket("phi_prime", input_tol=settings.input_tol)
        inputs["phi_prime"] = phi_prime
        outputs["cross_overlap"] = cross_overlap(spectrum, phi, phi_prime)
    return _report("overlap", inputs, outputs, settings)


def cmd_min_overlap(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    spectrum = doc.require_spectrum(input_tol=settings.input_tol)

    closed = closed_form_min(spectrum)
    solution = solve_by_reduction(spectrum)
    oracle_value, oracle_phi = brute_force_oracle(
        spectrum, settings.samples, settings.seed, workers=settings.workers
    )
    trace = solution.trace

    return _report(
        "min-overlap",
        {"spectrum": spectrum, "samples": settings.samples},
        {
            "closed_form": closed,
            "reduction_value": solution.value,
            "reduction_phi_overlap": check_solution(spectrum, solution),
            "optimal_phi": solution.optimal_phi,
            "optimal_alpha": solution.optimal_alpha,
            "trace": {
                "k0": trace.k0,
                "k1": trace.k1,
                "s_star": trace.s_star,
                "a_star": trace.a_star,
                "ratio_r": trace.ratio_r,
                "objective": trace.objective,
                "K_min": list(trace.K_min),
                "K_max": list(trace.K_max),
                "pair_objectives": [list(p) for p in trace.pair_objectives],
            },
            "oracle_value": oracle_value,
            "oracle_phi": oracle_phi,
            "reduction_minus_closed_form": solution.value - closed,
            "oracle_minus_closed_form": oracle_value - closed,
        },
        settings,
        seeded=True,
    )


def cmd_ladder(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    spectrum = doc.require_spectrum(input_tol=settings.input_tol)
    psi0 = doc.require_ket("psi0", input_tol=settings.input_tol)

    trace = run_ladder(spectrum, psi0, max_steps=settings.max_steps, residual_tol=settings.residual_tol)

    outputs: dict[str, Any] = {
        "steps_taken": trace.steps_taken,
        "converged": trace.converged,
        "limit": trace.limit,
        "residuals": list(trace.residuals),
    }
    try:
        analytic = fixed_point(spectrum, psi0)
    except ZeroProbabilityError as exc:
        logger.warning(
            "fixed_point_unavailable",
            extra={"event": "fixed_point_unavailable", "reason": str(exc)},
        )
        outputs["fixed_point"] = None
        outputs["agreement"] = None
        outputs["phase_equal"] = None
    else:
        outputs["fixed_point"] = analytic
        outputs["agreement"] = abs(complex(trace.limit.amplitudes.conj() @ analytic.amplitudes))
        outputs["phase_equal"] = equal_up_to_phase(trace.limit, analytic, settings.tol)

    return _report(
        "ladder",
        {"spectrum": spectrum, "psi0": psi0, "max_steps": settings.max_steps},
        outputs,
        settings,
    )


def cmd_fr(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    table = compute_ok_probabilities(ok_sign=settings.fr_ok_sign)
    return _report(
        "fr",
        {"ok_sign": settings.fr_ok_sign},
        {
            "inference_chain": [
                {"agent": step.agent, "state": step.state, "probability": step.probability}
                for step in table.inference_chain
            ],
            "p_ok_ok": table.p_ok_ok,
            "p_naive": table.p_naive,
            "outcome_probs": table.outcome_probs,
            "outcome_total": sum(table.outcome_probs.values()),
            "ladder_matches_chain": ladder_matches_chain(),
        },
        settings,
    )


def cmd_classify(doc: StateInput | None, args: argparse.Namespace, settings: Settings) -> RunReport:
    assert doc is not None
    spectrum = doc.require_spectrum(input_tol=settings.input_tol)
    reports = doc.require_reports(input_tol=settings.input_tol)
    verdict = classify_report(spectrum, reports, tol=settings.tol)
    return _report(
        "classify",
        {"spectrum": spectrum, "reports": reports},
        {"verdict": verdict},
        settings,
    )


COMMANDS: dict[str, CommandFn] = {
    "decompose": cmd_decompose,
    "steer": cmd_steer,
    "overlap": cmd_overlap,
    "min-overlap": cmd_min_overlap,
    "ladder": cmd_ladder,
    "fr": cmd_fr,
    "classify": cmd_classify,
}


def _common_flags(*, suppress: bool) -> argparse.ArgumentParser:
    """
    Flags accepted before or after the subcommand. The subcommand copy uses
    SUPPRESS defaults so it only overwrites what was actually given after it.
    """
    flag = argparse.SUPPRESS if suppress else False
    value = argparse.SUPPRESS if suppress else None

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=flag, help="emit one structured JSON document")
    common.add_argument("--timing", action="store_true", default=flag, help="include wall_time_s in the JSON document")
    common.add_argument("--seed", type=int, default=value, help="oracle seed (falls back to STEERKIT_SEED)")
    common.add_argument("--samples", type=int, default=value, help="oracle sample count")
    common.add_argument("--workers", type=int, default=value, help="oracle threads; never changes results")
    common.add_argument("--tol", type=float, default=value, help="comparison tolerance")
    common.add_argument("--input-tol", type=float, default=value, help="renormalization slack for typed kets")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags(suppress=True)
    parser = argparse.ArgumentParser(
        prog="steerkit",
        description="Steered/steering states of bipartite pure states.",
        parents=[_common_flags(suppress=False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("decompose", "overlap", "min-overlap", "classify"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("source", help="state document: path, '-' for stdin, or inline JSON")

    steer = sub.add_parser("steer", parents=[common])
    steer.add_argument("source")
    steer.add_argument("--side", choices=[s.value for s in Side], default=Side.B.value, help="measured side")

    ladder = sub.add_parser("ladder", parents=[common])
    ladder.add_argument("source")
    ladder.add_argument("--max-steps", type=int, default=None)
    ladder.add_argument("--residual-tol", type=float, default=None)

    sub.add_parser("fr", parents=[common])
    return parser


def _apply_overrides(settings: Settings, args: argparse.Namespace) -> Settings:
    overrides = {
        "seed": args.seed,
        "samples": args.samples,
        "workers": args.workers,
        "tol": args.tol,
        "input_tol": args.input_tol,
        "max_steps": getattr(args, "max_steps", None),
        "residual_tol": getattr(args, "residual_tol", None),
    }
    settings = dataclasses.replace(settings, **{k: v for k, v in overrides.items() if v is not None})
    validate_settings(settings)
    return settings


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    run_id = str(uuid.uuid4())
    context = LogContext(run_id=run_id, command=args.command)
    log = configure_logging(context=context, level="WARNING")

    try:
        settings = _apply_overrides(get_settings(), args)
    except Exception:
        log.exception("invalid_settings", extra={"event": "invalid_settings"})
        return 2

    log = configure_logging(context=context, level=settings.log_level)
    log.info("cli_start", extra={"event": "cli_start"})

    started = time.perf_counter()
    try:
        doc = load_document(args.source) if hasattr(args, "source") else None
        report = COMMANDS[args.command](doc, args, settings)
    except SteerkitError as exc:
        log.error(
            "command_failed",
            extra={"event": "command_failed", "exit_code": exc.exit_code, "error": str(exc)},
        )
        print(f"steerkit: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        log.exception("command_failed", extra={"event": "command_failed", "exit_code": 1})
        return 1

    if doc is not None and doc.labels:
        report.inputs["labels"] = doc.labels
    report.wall_time_s = time.perf_counter() - started
    if args.json:
        print(report.render_json(include_timing=args.timing))
    else:
        print(report.render_human())

    log.info("cli_done", extra={"event": "cli_done", "wall_time_s": report.wall_time_s})
    return 0
