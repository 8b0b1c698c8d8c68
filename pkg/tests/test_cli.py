import json
import math

import pytest

from heatseries.cli import main


def run_cli(*argv):
    return main(list(argv))


def read(path):
    with open(path) as handle:
        return handle.read()


def test_forward_oracle_line_value(tmp_path):
    out = tmp_path / "u.csv"
    code = run_cli(
        "forward", "--geometry", "line", "--variant", "oracle", "--tau", "1",
        "--profile", "gaussian:a=1", "--eval-grid", "0:0:1", "--output", str(out),
    )
    assert code == 0
    last = read(out).strip().splitlines()[-1]
    x, value, flag = last.split(",")
    assert float(value) == pytest.approx(math.sqrt(0.5), rel=1e-9)


def test_forward_oracle_polar_value(tmp_path):
    out = tmp_path / "u.csv"
    code = run_cli(
        "forward", "--geometry", "polar", "--variant", "oracle", "--tau", "1",
        "--profile", "gaussian:a=1", "--eval-grid", "0:0:1", "--output", str(out),
    )
    assert code == 0
    assert float(read(out).strip().splitlines()[-1].split(",")[1]) == pytest.approx(0.5, rel=1e-9)


def test_forward_rejects_zero_tau():
    code = run_cli(
        "forward", "--variant", "CD-A", "--order", "0", "--tau", "0",
        "--profile", "gaussian:a=1", "--eval-grid", "0:0:1",
    )
    assert code == 2


def test_unknown_variant_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(
            "forward", "--variant", "XX-Q", "--tau", "1",
            "--profile", "gaussian:a=1", "--eval-grid", "0:0:1",
        )
    assert exc.value.code == 2
    assert "CD-A" in capsys.readouterr().err  # the valid choices are listed


def test_geometry_variant_mismatch_exits_2():
    code = run_cli(
        "forward", "--geometry", "polar", "--variant", "CD-A", "--tau", "0.5",
        "--beta", "1", "--profile", "gaussian:a=1", "--eval-grid", "0:1:3",
    )
    assert code == 2


def test_round_trip_pipeline(tmp_path):
    u_file = tmp_path / "u.csv"
    f_file = tmp_path / "f.csv"
    assert 0 == run_cli(
        "forward", "--geometry", "line", "--variant", "oracle", "--tau", "0.3",
        "--profile", "gaussian:a=1", "--eval-grid", "-10:10:1601", "--output", str(u_file),
    )
    assert 0 == run_cli(
        "inverse", "--geometry", "line", "--variant", "CI-A", "--tau", "0.3",
        "--beta", "auto", "--order", "40", "--input", str(u_file),
        "--eval-grid", "-3:3:25", "--truth", "gaussian:a=1", "--output", str(f_file),
    )
    text = read(f_file)
    summary = [l for l in text.splitlines() if "summary_rel_l2" in l][0]
    assert float(summary.split("=")[1]) <= 1e-3


def test_noise_zero_and_seed_are_byte_deterministic(tmp_path):
    u_file = tmp_path / "u.csv"
    run_cli(
        "forward", "--variant", "oracle", "--tau", "0.3",
        "--profile", "gaussian:a=1", "--eval-grid", "-8:8:401", "--output", str(u_file),
    )
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert 0 == run_cli(
            "inverse", "--variant", "CI-A", "--tau", "0.3", "--beta", "1.0",
            "--order", "20", "--input", str(u_file), "--noise", "0", "--seed", "33",
            "--eval-grid", "-3:3:13", "--output", str(out),
        )
        outs.append(read(out))
    assert outs[0] == outs[1]


def test_noisy_inverse_deterministic_given_seed(tmp_path):
    u_file = tmp_path / "u.csv"
    run_cli(
        "forward", "--variant", "oracle", "--tau", "0.3",
        "--profile", "gaussian:a=1", "--eval-grid", "-8:8:401", "--output", str(u_file),
    )
    texts = []
    for name in ("a.csv", "b.csv", "c.csv"):
        seed = "33" if name != "c.csv" else "34"
        out = tmp_path / name
        run_cli(
            "inverse", "--variant", "CI-A", "--tau", "0.3", "--beta", "1.0",
            "--order", "12", "--input", str(u_file), "--noise", "1e-3", "--seed", seed,
            "--eval-grid", "-3:3:13", "--output", str(out),
        )
        texts.append(read(out))
    assert texts[0] == texts[1]
    assert texts[0] != texts[2]


def test_noise_requires_input():
    code = run_cli(
        "inverse", "--variant", "CI-A", "--tau", "0.3", "--beta", "1",
        "--profile", "gaussian:a=1.3", "--noise", "1e-3",
        "--eval-grid", "-3:3:5",
    )
    assert code == 2


def test_metadata_header_reproduces_run(tmp_path):
    # the header alone is enough to re-run the command and get the same bytes
    out1 = tmp_path / "run1.csv"
    run_cli(
        "forward", "--variant", "CD-A", "--tau", "0.5", "--beta", "auto",
        "--order", "24", "--profile", "gaussian:a=1", "--eval-grid", "-2:2:9",
        "--output", str(out1),
    )
    meta = {}
    for line in read(out1).splitlines():
        if line.startswith("# "):
            key, val = line[2:].split(" = ", 1)
            meta[key] = val
    out2 = tmp_path / "run2.csv"
    run_cli(
        "forward", "--variant", meta["variant"], "--tau", meta["tau"],
        "--beta", meta["beta"], "--order", meta["order"],
        "--profile", meta["profile"], "--eval-grid", meta["eval_grid"],
        "--output", str(out2),
    )
    data1 = [l for l in read(out1).splitlines() if not l.startswith("#")]
    data2 = [l for l in read(out2).splitlines() if not l.startswith("#")]
    assert data1 == data2


def test_json_output_round_trips(tmp_path):
    out = tmp_path / "u.json"
    run_cli(
        "forward", "--variant", "oracle", "--tau", "1", "--profile", "gaussian:a=1",
        "--eval-grid", "-1:1:5", "--format", "json", "--output", str(out),
    )
    payload = json.loads(read(out))
    assert payload["metadata"]["variant"] == "oracle"
    assert len(payload["rows"]) == 5
    mid = payload["rows"][2]
    assert mid["x"] == 0.0
    assert mid["value"] == pytest.approx(math.sqrt(0.5), rel=1e-9)


def test_validate_oracle_mode_exits_zero(tmp_path):
    out = tmp_path / "audit.csv"
    assert 0 == run_cli("validate", "--output", str(out))
    text = read(out)
    assert text.count("pass") >= 48  # 12 variants x 4 orders, plus expected column


def test_validate_literal_mode_expected_failures(tmp_path):
    out = tmp_path / "audit.csv"
    assert 0 == run_cli("validate", "--constants-mode", "paper_literal", "--output", str(out))
    text = read(out)
    for variant in ("CD-C", "CI-C", "PD-C", "PI-C"):
        fail_rows = [l for l in text.splitlines() if l.startswith(variant) and ",fail," in l]
        assert fail_rows, variant
    assert "literal_value_ratios" in text


def test_validate_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli("validate", "--output", str(a))
    run_cli("validate", "--output", str(b))
    assert read(a) == read(b)


STUDY_CFG = """
[study]
kind = noise
geometry = line
profile = gaussian:a=1
tau = 0.3
seed = 20250808
variants = CI-A, CI-classical

[grid]
lo = -8
hi = 8
n = 401

[sweep]
orders = 0:24:4
deltas = 0, 1e-3
betas = 0.6
"""


def test_study_runs_and_is_deterministic_mod_runtime(tmp_path):
    cfg = tmp_path / "study.cfg"
    cfg.write_text(STUDY_CFG)
    outs = []
    for name in ("s1.csv", "s2.csv"):
        out = tmp_path / name
        assert 0 == run_cli("study", "--config", str(cfg), "--output", str(out))
        outs.append(read(out))

    def strip_runtime(text):
        rows = []
        for line in text.splitlines():
            if line.startswith("#") or line.startswith("variant"):
                rows.append(line)
            else:
                rows.append(",".join(line.split(",")[:-1]))
        return rows

    assert strip_runtime(outs[0]) == strip_runtime(outs[1])
    header = [l for l in outs[0].splitlines() if l.startswith("variant")][0]
    assert header == "variant,N,beta,delta,error_l2,error_max,diverged,status,runtime_ms"


def test_study_malformed_config_names_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[study]\nkind = noise\n\n[sweep]\norders = a,b\n")
    code = run_cli("study", "--config", str(cfg))
    assert code == 2
    err = capsys.readouterr().err
    assert ":5:" in err  # the offending line number


def test_study_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[study]\nkind = noise\nwavelength = 3\n")
    assert 2 == run_cli("study", "--config", str(cfg))
    assert "wavelength" in capsys.readouterr().err


def test_input_rejects_nonuniform_grid(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("0,1\n0.5,2\n2.0,3\n")
    code = run_cli(
        "inverse", "--variant", "CI-A", "--tau", "0.3", "--beta", "1",
        "--input", str(data), "--eval-grid", "0:1:3",
    )
    assert code == 2
