import csv
import io
import json
import math

import pytest

from omegahunt.cli import main
from omegahunt.serialize import canonical_json, content_hash, emit_csv, emit_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def manifest_of(err):
    lines = [l for l in err.strip().splitlines() if l.startswith("{")]
    assert lines, f"no manifest on stderr: {err!r}"
    return json.loads(lines[-1])


# ------------------------------------------------------------ serialization


def test_canonical_json_deterministic_and_sorted():
    a = canonical_json({"b": 1.5, "a": [1, 2.0, None, True]})
    assert a == '{"a":[1,2.0,null,true],"b":1.5}'
    assert canonical_json({"a": 1, "b": 1.5}) == canonical_json({"b": 1.5, "a": 1})


def test_float_seventeen_digits_roundtrip():
    vals = [math.pi, 1 / 3, 1e-300, 12345.678901234567, 2.0]
    for v in vals:
        assert json.loads(canonical_json(v)) == v


def test_nonfinite_floats_are_programming_errors():
    with pytest.raises(AssertionError):
        canonical_json(float("nan"))
    with pytest.raises(AssertionError):
        emit_json({"v": float("inf")})


def test_emit_csv_header_only_and_quoting():
    assert emit_csv(("a", "b"), []) == b"a,b\n"
    out = emit_csv(("a", "b"), [("x,y", 0.5)])
    assert out == b'a,b\n"x,y",0.5\n'


def test_emit_repeatable():
    payload = {"x": 1.23456789012345678, "y": [1, 2, 3]}
    assert emit_json(payload) == emit_json(payload)
    assert content_hash(payload) == content_hash(payload)


def test_json_roundtrip_of_records():
    rec = {"kind": "divisor", "x": 123.456, "ok": True, "n": 42, "note": None}
    assert json.loads(canonical_json(rec)) == rec


# ------------------------------------------------------------------- CLI


def test_delta_exact_value(capsys):
    code, out, err = run_cli(capsys, "delta", "--x", "6", "--exact")
    assert code == 0
    assert abs(float(out.strip()) - 2.322855) < 1e-6
    m = manifest_of(err)
    assert m["version"]
    assert m["config_hash"]


def test_circle_exact_values(capsys):
    code, out, _ = run_cli(capsys, "circle", "--x", "5")
    assert code == 0
    assert abs(float(out.strip()) - 4.292037) < 1e-6
    code, out, _ = run_cli(capsys, "circle", "--x", "3")
    assert abs(float(out.strip()) - (-1.424778)) < 1e-6


def test_delta_voronoi_mode(capsys):
    code, out, _ = run_cli(
        capsys, "delta", "--x", "30.5", "--voronoi", "--terms", "5000"
    )
    assert code == 0
    assert math.isfinite(float(out.strip()))


def test_kernel_check_reference(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, _, err = run_cli(
        capsys,
        "kernel",
        "check",
        "--beta",
        "-0.7853981634",
        "--delta",
        "0.1",
        "--points",
        "2000",
        "--out",
        str(out_file),
    )
    assert code == 0
    report = json.loads(out_file.read_text())
    assert report["pass"] is True
    assert abs(report["alpha"] - 0.451652) < 1e-3
    assert report["matched"] is True
    m = manifest_of(err)
    assert str(out_file) in m["outputs"]


def test_sieve_csv(capsys, tmp_path):
    out_file = tmp_path / "table.csv"
    code, _, _ = run_cli(capsys, "sieve", "--limit", "10", "--out", str(out_file))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_file.read_text())))
    assert rows[0] == {"n": "1", "d": "1", "r": "4"}
    assert rows[5] == {"n": "6", "d": "4", "r": "0"}


def test_count_command(capsys):
    code, out, _ = run_cli(capsys, "count", "--kind", "divisor", "--x", "1", "--limit", "1000")
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] >= 2


def test_scan_command(capsys, tmp_path):
    samples = tmp_path / "samples.csv"
    samples.write_text("x\n31.22898\n44.72772\n")
    out_file = tmp_path / "scan.json"
    code, _, _ = run_cli(
        capsys, "scan", "--kind", "divisor", "--terms", "20000",
        "--samples", str(samples), "--out", str(out_file),
    )
    assert code == 0
    payload = json.loads(out_file.read_text())
    assert len(payload["samples"]) == 2
    assert payload["max_abs_residual"] >= 0


def test_resonator_expand(capsys, tmp_path):
    freqs = tmp_path / "freqs.txt"
    freqs.write_text("1\n2\n")
    out_file = tmp_path / "coeffs.csv"
    code, _, _ = run_cli(
        capsys, "resonator", "expand", "--freqs", str(freqs),
        "--r", "0.5", "--degree", "2", "--out", str(out_file),
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_file.read_text())))
    coeffs = {float(r["value"]): float(r["coefficient"]) for r in rows}
    assert coeffs[2.0] == pytest.approx(0.75, abs=1e-12)


def test_resonance_verify_random(capsys):
    code, out, _ = run_cli(
        capsys, "resonance", "verify", "--random", "2", "--seed", "4", "--spectral"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["all_pass"] is True
    assert len(payload["instances"]) == 2


def test_resonance_verify_config_file(capsys, tmp_path):
    cfg = tmp_path / "inst.json"
    cfg.write_text(
        json.dumps(
            {
                "kind": "custom",
                "support": [[1, 1.0, "1"], [2, 0.5, "3/2"]],
                "resonant": [0],
                "beta": -0.6,
                "delta": 0.1,
                "r": 0.3,
                "T": 3.0,
            }
        )
    )
    code, out, _ = run_cli(capsys, "resonance", "verify", "--config", str(cfg))
    assert code == 0
    payload = json.loads(out)
    assert payload["pass"] is True


def test_extremal_commands(capsys):
    code, out, _ = run_cli(
        capsys, "extremal", "sum", "--kind", "divisor", "--m", "4", "--limit", "10000"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["sum"] == pytest.approx(4.29326, abs=1e-5)
    code, out, _ = run_cli(
        capsys, "extremal", "count", "--kind", "circle", "--y", "2", "--limit", "10000"
    )
    assert json.loads(out)["count"] >= 3


def test_hunt_command_and_reproducibility(capsys, tmp_path):
    args = [
        "hunt", "--kind", "divisor", "--xmin", "15", "--xmax", "40",
        "--budget", "1500", "--terms", "300", "--seed", "5",
        "--record-time", "2026-01-01T00:00:00Z",
    ]
    s1, s2 = tmp_path / "s1.jsonl", tmp_path / "s2.jsonl"
    code, out, _ = run_cli(capsys, *args, "--store", str(s1))
    assert code == 0
    assert json.loads(out)["records"] >= 1
    code, _, _ = run_cli(capsys, *args, "--store", str(s2))
    assert code == 0
    assert s1.read_bytes() == s2.read_bytes()


def test_usage_error_exit_code(capsys):
    code = main(["delta"])  # missing required --x
    assert code == 2
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_runtime_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "delta", "--x", "0.5")
    assert code == 1
    assert "error" in err.lower()


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["delta", "--x", "6", "--frobnicate"])
    assert exc.value.code == 2


def test_config_file_defaults_flags_win(capsys, tmp_path):
    cfg = tmp_path / "defaults.json"
    cfg.write_text(json.dumps({"x": "5"}))
    code, out, _ = run_cli(capsys, "--config", str(cfg), "circle")
    assert code == 0
    assert abs(float(out.strip()) - 4.292037) < 1e-6
    code, out, _ = run_cli(capsys, "--config", str(cfg), "circle", "--x", "3")
    assert abs(float(out.strip()) - (-1.424778)) < 1e-6


def test_manifest_config_hash_stable(capsys):
    _, _, err1 = run_cli(capsys, "delta", "--x", "6")
    _, _, err2 = run_cli(capsys, "delta", "--x", "6")
    assert manifest_of(err1)["config_hash"] == manifest_of(err2)["config_hash"]
    _, _, err3 = run_cli(capsys, "delta", "--x", "7")
    assert manifest_of(err1)["config_hash"] != manifest_of(err3)["config_hash"]
