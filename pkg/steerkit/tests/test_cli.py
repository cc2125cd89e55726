from __future__ import annotations

import io
import json
import math

import pytest

from steerkit import cli
from steerkit.cli import main


def _run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _run_json(capsys, *argv: str) -> dict:
    code, out, err = _run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


def _log_events(err: str) -> list[str]:
    return [json.loads(line).get("event") for line in err.splitlines() if line.startswith("{")]


def _ket(encoded: list) -> list[complex]:
    return [complex(re, im) for re, im in encoded]


def test_decompose_fr_matrix(capsys, fixtures_dir) -> None:
    doc = _run_json(capsys, "decompose", str(fixtures_dir / "fr_matrix.json"))
    assert doc["command"] == "decompose"
    assert doc["outputs"]["spectrum"] == pytest.approx([0.1273, 0.8727], abs=1e-4)
    assert doc["outputs"]["support"] == [0, 1]
    assert doc["seed"] is None
    assert doc["inputs"]["labels"] == {"A": "Alice", "B": "Bob"}


def test_inputs_without_labels_stay_unlabelled(capsys) -> None:
    doc = _run_json(capsys, "overlap", '{"spectrum": [0.2, 0.8], "phi": [1, 0]}')
    assert "labels" not in doc["inputs"]


def test_global_flags_before_the_subcommand(capsys) -> None:
    code, out, _ = _run(capsys, "--json", "fr")
    assert code == 0
    assert json.loads(out)["command"] == "fr"

    source = '{"spectrum": [0.2, 0.3, 0.5]}'
    code, out, _ = _run(capsys, "--json", "--seed", "5", "--samples", "2000", "min-overlap", source)
    assert code == 0
    assert json.loads(out)["seed"] == 5

    # the copy after the subcommand wins
    code, out, _ = _run(capsys, "--seed", "5", "min-overlap", source, "--seed", "7", "--samples", "2000", "--json")
    assert code == 0
    assert json.loads(out)["seed"] == 7


def test_decompose_inline_identity(capsys) -> None:
    r = 1 / math.sqrt(2.0)
    doc = _run_json(capsys, "decompose", json.dumps({"matrix": [[r, 0.0], [0.0, r]]}))
    assert doc["outputs"]["spectrum"] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_malformed_document_exits_2(capsys) -> None:
    code, out, err = _run(capsys, "decompose", "{not json")
    assert code == 2
    assert out == ""
    assert "steerkit:" in err
    assert "command_failed" in _log_events(err)


def test_missing_field_exits_2(capsys) -> None:
    code, _, _ = _run(capsys, "decompose", '{"spectrum": [0.5, 0.5]}')
    assert code == 2


def test_descending_spectrum_exits_3(capsys) -> None:
    code, _, _ = _run(capsys, "overlap", '{"spectrum": [0.7, 0.3], "phi": [1, 0]}')
    assert code == 3


def test_far_from_normalized_ket_exits_3(capsys) -> None:
    code, _, _ = _run(capsys, "overlap", '{"spectrum": [0.3, 0.7], "phi": [1, 1]}')
    assert code == 3


def test_unnormalized_matrix_exits_3(capsys) -> None:
    code, _, _ = _run(capsys, "decompose", '{"matrix": [[1, 0], [0, 1]]}')
    assert code == 3


def test_zero_probability_exits_4(capsys) -> None:
    code, _, err = _run(capsys, "overlap", '{"spectrum": [0, 1], "phi": [1, 0]}')
    assert code == 4
    assert "P_beta" in err


def test_off_support_exits_5(capsys) -> None:
    code, _, _ = _run(capsys, "overlap", '{"spectrum": [0, 0.5, 0.5], "phi": [0.6, 0.8, 0]}')
    assert code == 5


def test_overlap_example_with_rounded_input(capsys, fixtures_dir) -> None:
    code, out, err = _run(capsys, "overlap", str(fixtures_dir / "thirds_overlap.json"), "--json")
    assert code == 0
    doc = json.loads(out)

    outputs = doc["outputs"]
    assert outputs["overlap"] == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)
    assert outputs["overlap"] == pytest.approx(0.9428090, abs=1e-7)
    assert outputs["P_beta"] == pytest.approx(0.5, abs=1e-12)
    assert outputs["P_alpha"] == pytest.approx(4 / 9, abs=1e-12)
    assert outputs["sqrt_P_alpha_over_P_beta"] == pytest.approx(outputs["overlap"], abs=1e-12)

    cross = complex(*outputs["cross_overlap"])
    assert cross == pytest.approx(math.sqrt(1 / 3), abs=1e-12)
    assert "input_renormalized" in _log_events(err)


def test_overlap_schmidt_basis_and_uniform_cases(capsys) -> None:
    doc = _run_json(capsys, "overlap", '{"spectrum": [0.2, 0.8], "phi": [1, 0]}')
    assert doc["outputs"]["overlap"] == pytest.approx(1.0, abs=1e-12)

    doc = _run_json(capsys, "overlap", '{"spectrum": [0.5, 0.5], "phi": [0.6, [0, 0.8]]}')
    assert doc["outputs"]["overlap"] == pytest.approx(1.0, abs=1e-12)


def test_min_overlap_three_level(capsys, fixtures_dir) -> None:
    doc = _run_json(capsys, "min-overlap", str(fixtures_dir / "three_level.json"), "--samples", "20000", "--seed", "3")
    outputs = doc["outputs"]

    assert doc["seed"] == 3
    assert doc["inputs"]["samples"] == 20000
    assert outputs["closed_form"] == pytest.approx(0.6614378, abs=1e-7)
    assert outputs["reduction_value"] == pytest.approx(outputs["closed_form"], abs=1e-12)
    assert abs(outputs["oracle_minus_closed_form"]) < 1e-6
    assert outputs["trace"]["K_min"] == [0]
    assert outputs["trace"]["K_max"] == [2]
    assert len(outputs["trace"]["pair_objectives"]) == 3


def test_min_overlap_uniform_and_two_level(capsys) -> None:
    doc = _run_json(capsys, "min-overlap", '{"spectrum": [0.25, 0.25, 0.25, 0.25]}', "--samples", "2000")
    assert doc["outputs"]["closed_form"] == 1.0
    assert doc["outputs"]["oracle_value"] == pytest.approx(1.0, abs=1e-12)

    doc = _run_json(capsys, "min-overlap", '{"spectrum": [0.3333333333333333, 0.6666666666666667]}', "--samples", "2000")
    assert doc["outputs"]["closed_form"] == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)


def test_min_overlap_output_is_deterministic(capsys, fixtures_dir) -> None:
    argv = ("min-overlap", str(fixtures_dir / "three_level.json"), "--json", "--samples", "12000", "--seed", "11")
    first = _run(capsys, *argv)[1]
    second = _run(capsys, *argv)[1]
    threaded = _run(capsys, *argv, "--workers", "4")[1]

    assert first == second == threaded
    assert "wall_time_s" not in json.loads(first)


def test_seed_falls_back_to_environment(capsys, monkeypatch, fixtures_dir) -> None:
    monkeypatch.setenv("STEERKIT_SEED", "7")
    source = str(fixtures_dir / "three_level.json")

    assert _run_json(capsys, "min-overlap", source, "--samples", "1000")["seed"] == 7
    assert _run_json(capsys, "min-overlap", source, "--samples", "1000", "--seed", "9")["seed"] == 9


def test_timing_flag_adds_wall_time(capsys) -> None:
    doc = _run_json(capsys, "fr", "--timing")
    assert doc["wall_time_s"] >= 0.0


def test_ladder_degenerate_top_class(capsys, fixtures_dir) -> None:
    doc = _run_json(capsys, "ladder", str(fixtures_dir / "ladder_degenerate.json"))
    outputs = doc["outputs"]

    r = 1 / math.sqrt(2.0)
    assert outputs["converged"] is True
    assert [abs(z) for z in _ket(outputs["limit"])] == pytest.approx([0.0, r, r], abs=1e-8)
    assert outputs["phase_equal"] is True
    assert outputs["agreement"] == pytest.approx(1.0, abs=1e-10)
    assert len(outputs["residuals"]) == outputs["steps_taken"] + 1


def test_ladder_uniform_converges_at_step_zero(capsys) -> None:
    doc = _run_json(capsys, "ladder", '{"spectrum": [0.5, 0.5], "psi0": [0.6, 0.8]}')
    assert doc["outputs"]["steps_taken"] == 0
    assert doc["outputs"]["converged"] is True


def test_ladder_two_level_respects_max_steps(capsys) -> None:
    doc = _run_json(
        capsys,
        "ladder",
        '{"spectrum": [0.3333333333333333, 0.6666666666666667], "psi0": [0.7071067811865476, 0.7071067811865476]}',
        "--max-steps",
        "3",
    )
    assert doc["outputs"]["steps_taken"] == 3
    assert doc["outputs"]["converged"] is False
    assert doc["inputs"]["max_steps"] == 3


def test_ladder_without_top_class_weight_reports_no_fixed_point(capsys) -> None:
    code, out, err = _run(capsys, "ladder", '{"spectrum": [0.1, 0.45, 0.45], "psi0": [1, 0, 0]}', "--json")
    assert code == 0
    assert json.loads(out)["outputs"]["fixed_point"] is None
    assert "fixed_point_unavailable" in _log_events(err)


def test_fr_command(capsys) -> None:
    outputs = _run_json(capsys, "fr")["outputs"]

    assert outputs["p_ok_ok"] == pytest.approx(1 / 12, abs=1e-12)
    assert outputs["p_ok_ok"] == pytest.approx(0.0833333, abs=1e-7)
    assert outputs["p_naive"] == 0.0
    assert outputs["outcome_total"] == pytest.approx(1.0, abs=1e-12)
    assert outputs["ladder_matches_chain"] is True

    chain = outputs["inference_chain"]
    assert [step["agent"] for step in chain] == ["Bob", "Alice-inferred", "Bob-naive"]
    assert [abs(z) for z in _ket(chain[1]["state"])] == pytest.approx([1.0, 0.0], abs=1e-12)


def test_fr_ok_sign_from_environment(capsys, monkeypatch) -> None:
    monkeypatch.setenv("STEERKIT_FR_OK_SIGN", "1")
    doc = _run_json(capsys, "fr")
    assert doc["inputs"]["ok_sign"] == 1
    assert doc["outputs"]["p_ok_ok"] == pytest.approx(0.75, abs=1e-12)


def test_classify_command(capsys, fixtures_dir) -> None:
    doc = _run_json(capsys, "classify", str(fixtures_dir / "classify_steering.json"))
    assert doc["outputs"]["verdict"] == "ConsistentWithSteering"

    doc = _run_json(capsys, "classify", '{"spectrum": [0.5, 0.5], "reports": [[1, 0], [0, 1]]}')
    assert doc["outputs"]["verdict"] == "ConsistentWithDirectMeasurement"


def test_classify_without_reports_exits_3(capsys) -> None:
    code, _, _ = _run(capsys, "classify", '{"spectrum": [0.5, 0.5], "reports": []}')
    assert code == 3


def test_steer_on_matrix(capsys, fixtures_dir) -> None:
    outputs = _run_json(capsys, "steer", str(fixtures_dir / "fr_matrix.json"), "--side", "B")["outputs"]
    assert [abs(z) for z in _ket(outputs["remote_state"])] == pytest.approx([1.0, 0.0], abs=1e-12)
    assert outputs["probability"] == pytest.approx(1 / 3, abs=1e-12)


def test_steer_on_spectrum_conjugates_outcome(capsys, fixtures_dir) -> None:
    outputs = _run_json(capsys, "steer", str(fixtures_dir / "complex_outcome.json"))["outputs"]
    remote = _ket(outputs["remote_state"])
    assert remote[0] == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert remote[1] == pytest.approx(-1j * math.sqrt(2 / 3), abs=1e-12)
    assert outputs["probability"] == pytest.approx(0.5, abs=1e-12)

    outputs = _run_json(capsys, "steer", str(fixtures_dir / "complex_outcome.json"), "--side", "A")["outputs"]
    assert outputs["probability"] == pytest.approx(0.5, abs=1e-12)


def test_document_from_stdin(capsys, monkeypatch) -> None:
    monkeypatch.setattr("sys.stdin", io.StringIO('{"spectrum": [0.2, 0.8], "phi": [0, 1]}'))
    doc = _run_json(capsys, "overlap", "-")
    assert doc["outputs"]["overlap"] == pytest.approx(1.0, abs=1e-12)


def test_human_output(capsys) -> None:
    doc = '{"spectrum": [0.3333333333333333, 0.6666666666666667], "phi": [0.7, 0.7]}'
    code, out, _ = _run(capsys, "overlap", doc, "--input-tol", "0.05")
    assert code == 0
    assert out.startswith("steerkit overlap")
    assert "overlap: 0.942809" in out
    assert "wall_time_s:" in out


def test_invalid_settings_exit_2(capsys, monkeypatch) -> None:
    code, _, err = _run(capsys, "fr", "--samples", "0")
    assert code == 2
    assert "invalid_settings" in _log_events(err)

    monkeypatch.setenv("STEERKIT_TOL", "abc")
    code, _, _ = _run(capsys, "fr")
    assert code == 2


def test_argparse_errors_exit_2() -> None:
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2

    with pytest.raises(SystemExit) as exc:
        main(["overlap"])
    assert exc.value.code == 2


def test_unexpected_error_exits_1(capsys, monkeypatch) -> None:
    def boom(doc, args, settings):
        raise ValueError("boom")

    monkeypatch.setitem(cli.COMMANDS, "fr", boom)
    code, out, err = _run(capsys, "fr")
    assert code == 1
    assert out == ""
    assert "command_failed" in _log_events(err)
