import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from deformed_bs import reference as ref
from deformed_bs.cli import dumps_canonical, main, parse_levels, ConfigError

GOLDEN = Path(__file__).parent / "golden" / "well_a1_alpha1_beta025.csv"
GOLDEN_ARGS = ["spectrum", "--problem", "well", "--a", "1", "--alpha", "1", "--beta", "0.25",
               "--delta", "0", "--levels", "1..3", "--format", "csv"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------- spectrum

def test_spectrum_undeformed_oscillator(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "0", "--beta", "0", "--delta", "0.5",
                       "--levels", "0..2", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert [float(r["energy"]) for r in rows] == pytest.approx([1.0, 3.0, 5.0], rel=1e-9)
    assert all(r["status"] == "bound" for r in rows)


def test_spectrum_well_beta_zero(capsys):
    code, out, _ = run(capsys, "spectrum", "--problem", "well", "--a", "1", "--alpha", "1",
                       "--beta", "0", "--delta", "0", "--levels", "1..2", "--format", "csv")
    assert code == 0
    assert [float(r["energy"]) for r in csv_rows(out)] == pytest.approx([4.0, 16.0], rel=1e-9)


def test_spectrum_unbound_rows(capsys):
    code, out, _ = run(capsys, *GOLDEN_ARGS)
    assert code == 0
    rows = csv_rows(out)
    assert [r["status"] for r in rows] == ["bound", "unbound", "unbound"]
    assert rows[1]["energy"] == "" and rows[2]["iterations"] == ""


def test_golden_csv_byte_for_byte(capsys):
    _, out, _ = run(capsys, *GOLDEN_ARGS)
    assert out.encode() == GOLDEN.read_bytes()


def test_table_format_is_default(capsys):
    code, out, _ = run(capsys, "spectrum", "--levels", "0..1")
    assert code == 0
    header = out.splitlines()[0].split()
    assert header == ["n", "energy", "target_area", "achieved_area", "iterations", "status"]
    assert "3" in out.splitlines()[-1].split()


def test_default_levels_for_well_start_at_one(capsys):
    _, out, _ = run(capsys, "spectrum", "--problem", "well", "--a", "1", "--format", "csv")
    assert [r["n"] for r in csv_rows(out)] == ["1", "2", "3", "4", "5"]


def test_custom_potential_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--problem", "custom", "--potential-expr", "X^2",
                       "--scan-lo", "-20", "--scan-hi", "20", "--levels", "0..2", "--format", "csv")
    assert code == 0
    assert [float(r["energy"]) for r in csv_rows(out)] == pytest.approx([1.0, 3.0, 5.0], rel=1e-8)


def test_deformation_expression_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--deformation-expr", "1 + 0.01*X^2 + 0.01*P^2",
                       "--levels", "0..3", "--format", "csv")
    assert code == 0
    expected = [ref.oscillator_wkb_closed(0.01, 0.01, n) for n in range(4)]
    assert [float(r["energy"]) for r in csv_rows(out)] == pytest.approx(expected, rel=1e-7)


# ----------------------------------------------------------------- compare

def test_compare_oscillator_wkb(capsys):
    code, out, _ = run(capsys, "compare", "--alpha", "0.01", "--beta", "0.01", "--levels", "0..5",
                       "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 6
    for r in rows:
        assert float(r["wkb_closed_rel_diff"]) <= 1e-6
        assert float(r["oscillator_exact_offset"]) == pytest.approx(0.005)
        assert float(r["exact_leading_order"]) > 0


def test_compare_well_beta0(capsys):
    code, out, _ = run(capsys, "compare", "--problem", "well", "--a", "1", "--alpha", "1",
                       "--beta", "0", "--levels", "1..10", "--format", "csv")
    assert code == 0
    assert all(float(r["beta0_exact_rel_diff"]) <= 1e-8 for r in csv_rows(out))


def test_compare_oscillator_linear_regime(capsys):
    code, out, _ = run(capsys, "compare", "--alpha", "1e-4", "--beta", "1e-4", "--levels", "0..5",
                       "--format", "csv")
    assert code == 0
    assert all(float(r["linear_rel_diff"]) <= 1e-6 for r in csv_rows(out))


def test_compare_rejects_custom(capsys):
    code, _, err = run(capsys, "compare", "--problem", "custom", "--potential-expr", "X^4",
                       "--scan-lo", "-3", "--scan-hi", "3")
    assert code == 1
    assert "--problem" in err


def test_compare_rejects_hbar(capsys):
    code, _, err = run(capsys, "compare", "--hbar", "2")
    assert code == 1
    assert "--hbar" in err


# -------------------------------------------------------------------- area

def test_area_undeformed(capsys):
    code, out, _ = run(capsys, "area", "--energy", "2", "--format", "csv")
    assert code == 0
    row = csv_rows(out)[0]
    assert float(row["area"]) == pytest.approx(2 * math.pi, rel=1e-11)
    assert float(row["n_plus_delta"]) == pytest.approx(1.0, rel=1e-11)


def test_area_deformed_oscillator(capsys):
    _, out, _ = run(capsys, "area", "--alpha", "0.1", "--beta", "0.1", "--energy", "10",
                    "--format", "csv")
    area = float(csv_rows(out)[0]["area"])
    assert area == pytest.approx(10 * math.pi * math.log(2.0), rel=1e-10)
    assert area == pytest.approx(21.775861, abs=5e-7)


def test_area_well(capsys):
    _, out, _ = run(capsys, "area", "--problem", "well", "--a", "1", "--alpha", "1", "--energy", "4",
                    "--format", "csv")
    assert float(csv_rows(out)[0]["area"]) == pytest.approx(2 * math.pi, rel=1e-11)


def test_area_requires_energy(capsys):
    code, _, err = run(capsys, "area")
    assert code == 1 and "--energy" in err


# -------------------------------------------------------------------- nmax

def test_nmax_well(capsys):
    code, out, _ = run(capsys, "nmax", "--problem", "well", "--a", "1", "--alpha", "1",
                       "--beta", "0.25", "--format", "csv")
    assert code == 0
    row = csv_rows(out)[0]
    assert float(row["area_limit"]) == pytest.approx(4 * math.pi * math.asinh(1.0), rel=1e-8)
    assert row["n_max"] == "1"


def test_nmax_alpha_to_zero(capsys):
    _, out, _ = run(capsys, "nmax", "--problem", "well", "--a", "1", "--alpha", "1e-12",
                    "--beta", "0.01", "--format", "csv")
    assert csv_rows(out)[0]["n_max"] == "10"


def test_nmax_oscillator_unbounded(capsys):
    _, out, _ = run(capsys, "nmax", "--alpha", "0.3", "--beta", "0.7", "--format", "csv")
    row = csv_rows(out)[0]
    assert row == {"area_limit": "infinite", "n_max": "unbounded"}


# ------------------------------------------------------------- uncertainty

def test_uncertainty_values(capsys):
    _, out, _ = run(capsys, "uncertainty", "--alpha", "0.01", "--beta", "0.01", "--format", "csv")
    row = csv_rows(out)[0]
    assert float(row["delta_x"]) == pytest.approx(0.1000050, abs=5e-8)
    assert float(row["delta_p"]) == pytest.approx(0.1000050, abs=5e-8)
    # (1 + 0.01)/(1 - 0.01) = 1.0202020
    assert float(row["q_factor"]) == pytest.approx(1.01 / 0.99, rel=1e-15)


def test_uncertainty_position_only(capsys):
    _, out, _ = run(capsys, "uncertainty", "--alpha", "0", "--beta", "0.01", "--format", "csv")
    row = csv_rows(out)[0]
    assert float(row["delta_x"]) == pytest.approx(0.1, rel=1e-15)
    assert float(row["delta_p"]) == 0.0


def test_uncertainty_domain_error(capsys):
    code, _, err = run(capsys, "uncertainty", "--alpha", "1", "--beta", "1")
    assert code == 1 and "alpha" in err


# --------------------------------------------------------------- exit codes

@pytest.mark.parametrize("argv,code", [
    (["spectrum", "--levels", "0..1", "--format", "csv"], 0),
    (["nmax", "--problem", "well", "--a", "2", "--beta", "0.1"], 0),
    (["uncertainty", "--alpha", "0.1"], 0),
    (["bogus"], 1),
    (["spectrum", "--format", "xml"], 1),
    (["spectrum", "--levels", "3..1"], 1),
    (["spectrum", "--levels", "a..b"], 1),
    (["spectrum", "--problem", "well"], 1),
    (["spectrum", "--problem", "well", "--a", "-1"], 1),
    (["spectrum", "--alpha", "-0.1"], 1),
    (["spectrum", "--hbar", "0"], 1),
    (["spectrum", "--tol", "0"], 1),
    (["spectrum", "--problem", "well", "--a", "1", "--delta", "0", "--levels", "0..2"], 1),
    (["spectrum", "--problem", "custom", "--potential-expr", "X^"], 1),
    (["spectrum", "--problem", "custom", "--potential-expr", "Y^2", "--scan-lo", "-1", "--scan-hi", "1"], 1),
    (["spectrum", "--deformation-expr", "1 + P^2", "--alpha", "0.1"], 1),
    (["spectrum", "--config", "/nonexistent/config.json"], 1),
    # f changes sign inside the allowed region
    (["spectrum", "--deformation-expr", "1 - P^2", "--levels", "3..3"], 2),
    # two separate wells at the requested energy
    (["spectrum", "--problem", "custom", "--potential-expr", "(X^2 - 4)^2", "--scan-lo", "-5",
      "--scan-hi", "5", "--levels", "0..0"], 2),
])
def test_exit_code_corpus(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_usage_error_message_names_flag(capsys):
    code, _, err = run(capsys, "spectrum", "--problem", "well")
    assert code == 1
    assert "--a" in err


# ------------------------------------------------------------------- config

def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"problem": "well", "a": 1.0, "alpha": 1.0, "beta": 0.0,
                                "delta": 0.0, "levels": [1, 3], "format": "csv"}))
    _, out, _ = run(capsys, "spectrum", "--config", str(path))
    assert [float(r["energy"]) for r in csv_rows(out)] == pytest.approx([4.0, 16.0, 36.0], rel=1e-9)
    _, out, _ = run(capsys, "spectrum", "--config", str(path), "--levels", "2..2")
    assert [r["n"] for r in csv_rows(out)] == ["2"]


def test_config_file_hyphenated_keys(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"problem": "custom", "potential-expr": "X^2", "scan-lo": -10,
                                "scan-hi": 10, "levels": "0..0", "format": "csv"}))
    code, out, _ = run(capsys, "spectrum", "--config", str(path))
    assert code == 0
    assert float(csv_rows(out)[0]["energy"]) == pytest.approx(1.0, rel=1e-8)


def test_config_file_unknown_key(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text('{"gamma": 1}')
    code, _, err = run(capsys, "spectrum", "--config", str(path))
    assert code == 1 and "gamma" in err


def test_parse_levels():
    assert parse_levels("1..10") == (1, 10)
    assert parse_levels("4") == (4, 4)
    assert parse_levels([2, 5]) == (2, 5)
    with pytest.raises(ConfigError):
        parse_levels("5..2")


# ---------------------------------------------------------------- formats

JSON_CASES = [
    ["spectrum", "--alpha", "0.04", "--beta", "0.01", "--levels", "0..4"],
    GOLDEN_ARGS[:-2],
    ["compare", "--alpha", "0.01", "--beta", "0.02", "--levels", "0..3"],
    ["nmax", "--problem", "well", "--a", "1", "--alpha", "1", "--beta", "0.25"],
    ["area", "--alpha", "0.1", "--energy", "3.3"],
    ["uncertainty", "--alpha", "0.2", "--beta", "0.3", "--hbar", "1.5"],
]


@pytest.mark.parametrize("argv", JSON_CASES)
def test_json_round_trip_byte_identical(capsys, argv):
    _, out, _ = run(capsys, *argv, "--format", "json")
    doc = json.loads(out)
    assert dumps_canonical(doc) == out
    assert doc["meta"]["tool_version"]
    assert doc["meta"]["tolerance"] == 1e-9


def test_json_top_level_shape(capsys):
    _, out, _ = run(capsys, *GOLDEN_ARGS[:-2], "--format", "json")
    doc = json.loads(out)
    assert sorted(doc) == ["config", "levels", "meta"]
    assert doc["config"]["problem"] == "well"
    assert doc["levels"][1]["status"] == "unbound"
    assert doc["levels"][1]["energy"] is None


@pytest.mark.parametrize("argv", [JSON_CASES[0], JSON_CASES[1], JSON_CASES[2]])
def test_csv_and_json_agree(capsys, argv):
    _, csv_out, _ = run(capsys, *argv, "--format", "csv")
    _, json_out, _ = run(capsys, *argv, "--format", "json")
    rows = csv_rows(csv_out)
    levels = json.loads(json_out)["levels"]
    assert len(rows) == len(levels)
    for row, level in zip(rows, levels):
        for key, text in row.items():
            value = level[key]
            if isinstance(value, float):
                assert text == format(value, ".17g")
                assert float(text) == value
            elif value is None:
                assert text == ""
            else:
                assert text == str(value)


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "levels.csv"
    code, out, _ = run(capsys, *GOLDEN_ARGS, "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_bytes() == GOLDEN.read_bytes()


def test_reruns_are_bit_identical(capsys):
    argv = ["spectrum", "--alpha", "0.1", "--beta", "0.04", "--levels", "0..6", "--format", "json"]
    outputs = {run(capsys, *argv)[1] for _ in range(3)}
    assert len(outputs) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "deformed_bs", *GOLDEN_ARGS],
                          capture_output=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == GOLDEN.read_bytes()
