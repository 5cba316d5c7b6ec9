import json

import pytest

from app.core.settings import settings
from app.scripts.cli import (
    CHAIN_COLUMNS,
    EXIT_CERTIFICATION,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_PRECONDITION,
    RATE_COLUMNS,
    main,
)


def test_fmax_of_poisson_profile(json_file, capsys) -> None:
    """fmax prints the bracket for chi_1 as JSON on stdout."""
    path = json_file("chi.json", {"poisson": 1})
    assert main(["fmax", str(path), "--tol", "1e-4"]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["value"] == pytest.approx(4.0, abs=2e-4)
    assert result["kind"] == "exact"


def test_amaj_reflexive_witness(json_file, capsys) -> None:
    """p a-majorizes itself with the exact witness delta_0."""
    path = json_file("coin.json", {"values": ["1/2", "1/2"]})
    assert main(["amaj", str(path), str(path)]) == EXIT_OK
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["holds"] is True
    assert verdict["mode"] == "exact"
    assert verdict["witness"]["values"] == ["1"]
    assert verdict["witness"]["backend"] == "rational"


def test_convert_emits_channel(json_file, capsys) -> None:
    """Two coherence bits convert to one and the channel is written out."""
    two = json_file("two.json", {"distribution": {"values": ["1/4", "1/2", "1/4"]}})
    one = json_file("one.json", {"coherence_bit": True})
    assert main(["convert", str(two), str(one)]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert result["verdict"]["holds"] is True
    assert sorted(branch["shift"] for branch in result["channel"]["kraus"]) == [0, 1]


def test_malformed_json_exits_with_input_error(tmp_path) -> None:
    """Unparseable input files map to exit code 1."""
    path = tmp_path / "bad.json"
    path.write_text("{", encoding="utf-8")
    assert main(["qfi", str(path)]) == EXIT_INPUT


def test_missing_file_exits_with_input_error(tmp_path) -> None:
    """A path that does not exist is an input error."""
    assert main(["qfi", str(tmp_path / "absent.json")]) == EXIT_INPUT


def test_unknown_state_schema_is_precondition_error(json_file) -> None:
    """Well-formed JSON without a known state key maps to exit code 2."""
    path = json_file("odd.json", {"foo": 1})
    assert main(["fmin", str(path)]) == EXIT_PRECONDITION


def test_incomplete_channel_fails_certification(json_file) -> None:
    """Channels that lose trace map to exit code 3."""
    path = json_file("leaky.json", {"in_trunc": 2, "kraus": [{"shift": 0, "coeffs": [0.5, 0.5]}]})
    assert main(["channel-verify", str(path)]) == EXIT_CERTIFICATION


def test_invalid_eps_is_rejected(json_file) -> None:
    """eps outside [0, 1) never reaches the calculus."""
    path = json_file("coin.json", {"coherence_bit": True})
    assert main(["smooth", str(path), "--eps", "1.5"]) == EXIT_PRECONDITION


def test_rates_csv_on_stdout(capsys) -> None:
    """A single family writes the plain rate columns."""
    assert main(["rates", "--family", "eigen", "--ms", "1,2", "--eps", "0.1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(RATE_COLUMNS)
    assert len(lines) == 3


def test_rates_with_out_prints_summary(tmp_path, capsys) -> None:
    """With --out the CSV goes to disk and the aggregate summary to stdout."""
    out = tmp_path / "rates.csv"
    code = main(["rates", "--family", "eigen", "--family", "iid:coin", "--ms", "1,2", "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["total_families"] == 2
    assert out.read_text(encoding="utf-8").splitlines()[0] == "family," + ",".join(RATE_COLUMNS)


def test_rates_needs_ms() -> None:
    """rates without --ms is a precondition error."""
    assert main(["rates", "--family", "eigen"]) == EXIT_PRECONDITION


def test_bridge_output_is_deterministic(tmp_path) -> None:
    """The same seed reproduces the correspondence table byte for byte."""
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["bridge", "--count", "6", "--seed", "3", "--out", str(first)]) == EXIT_OK
    assert main(["bridge", "--count", "6", "--seed", "3", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert len(first.read_text(encoding="utf-8").splitlines()) == 7


def test_chain_columns(capsys) -> None:
    """chain writes one row per m under the chain header."""
    assert main(["chain", "--ms", "16"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CHAIN_COLUMNS)
    assert lines[1].startswith("16,")


def test_backend_setting_is_restored(json_file) -> None:
    """--backend applies to one run only."""
    before = settings.default_backend
    path = json_file("coin.json", {"values": [0.5, 0.5]})
    assert main(["amaj", str(path), str(path), "--backend", "f64"]) == EXIT_OK
    assert settings.default_backend == before
