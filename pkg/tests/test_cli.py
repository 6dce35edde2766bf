import csv
import io
import json

import pytest

from kinkcollide import cli
from kinkcollide import studies

FAST = ["--samples", "257", "--grid", "2048,60"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def spec_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("spec") / "spec.json"
    assert cli.main(["build-ansatz", "--v", "0.1", *FAST, "--out", str(path)]) == 0
    return path


def test_check_identities_pass_and_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "check-identities", "--output-dir", str(tmp_path / "new" / "dir"))
    assert code == 0
    assert "\r\n" in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12 and all(r["pass"] == "true" for r in rows)
    assert (tmp_path / "new" / "dir" / "identities.csv").read_bytes() == out.encode()


def test_fault_injection_exits_one(capsys):
    code, out, _ = run(capsys, "check-identities", "--k1-offset", "0.01")
    assert code == 1
    assert "false" in out


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["separate"],
    ["invert-l", "--rhs", "H("],
    ["modulate", "--v", "0.1,0.05"],
    ["build-ansatz", "--v", "1.5", "--out", "x.json"],
    ["check-identities", "--samples", "256"],
    ["check-identities", "--grid", "abc"],
    ["residual-scan", "--spec", "/nonexistent.json", "--times", "0"],
    ["scaling-study", "--v", "0.1,0.05"],
    ["report", "--dir", "/nonexistent"],
])
def test_usage_errors_exit_two(capsys, argv):
    assert cli.main(argv) == 2


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    with pytest.raises(cli.UsageError):
        cli.thread_cap(3)
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.thread_cap(5) == 2
    assert cli.thread_cap(1) == 1


def test_config_schema_and_override(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"schema_version": 1, "v_list": [0.2], "format": "json"}))
    args = cli.make_parser().parse_args(["modulate", "--config", str(cfg_path), "--format", "csv"])
    cfg = cli.build_config(args)
    assert cfg.v_list == (0.2,) and cfg.format == "csv"
    assert cli.load_config(cfg_path).to_dict()["schema_version"] == 1
    cfg_path.write_text(json.dumps({"schema_version": 2}))
    with pytest.raises(cli.UsageError):
        cli.load_config(cfg_path)
    cfg_path.write_text(json.dumps({"schema_version": 1, "speed": 3}))
    with pytest.raises(cli.UsageError):
        cli.load_config(cfg_path)


def test_separate_l1(capsys):
    code, out, _ = run(capsys, "separate", "--preset", "l1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert any(r["kind"] == "certificate" and r["pass"] == "true" for r in rows) or rows[-1]["pass"] == "true"


def test_separate_expressions(capsys):
    code, out, _ = run(capsys, "separate", "--f", "Hd", "--g=H(-x)**2", "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"]


def test_invert_l_json_is_stable(capsys, tmp_path):
    argv = ["invert-l", "--rhs", "24*M - 30*N + 8*1.4142135623730951*Hd", "--grid", "801,20", "--format", "json"]
    code, a, _ = run(capsys, *argv)
    assert code == 0
    _, b, _ = run(capsys, *argv)
    assert a == b
    data = json.loads(a)
    assert list(data) == sorted(data)
    rhs = tmp_path / "g.csv"
    rhs.write_text("x,g\r\n" + "".join(f"{x / 10},{0.0}\r\n" for x in range(-100, 101)))
    code, _, _ = run(capsys, "invert-l", "--rhs", str(rhs))
    assert code == 0


def test_modulate_outputs_table(capsys):
    code, out, _ = run(capsys, "modulate", "--v", "0.1", *FAST)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 257 and list(rows[0]) == ["t", "r", "rdot", "rddot", "F"]


def test_residual_scan(capsys, spec_file):
    code, out, _ = run(capsys, "residual-scan", "--spec", str(spec_file), "--times", "0,5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["t"]) for r in rows] == [0.0, 5.0]
    assert all(0 < float(r["L2"]) < 1e-3 for r in rows)


def test_evolve_and_report(capsys, spec_file, tmp_path):
    out_dir = tmp_path / "evo"
    code, _, _ = run(capsys, "evolve", "--spec", str(spec_file), "--t0", "-20", "--T", "5", "--dt", "0.01",
                     "--snap", "-20,-15", "--output-dir", str(out_dir), "--format", "json")
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["energy"]["relative_drift"] < 1e-6
    assert (out_dir / "snapshots.csv").exists()
    run(capsys, "check-identities", "--output-dir", str(out_dir))
    code, out, _ = run(capsys, "report", "--dir", str(out_dir))
    assert code == 0
    assert "identities.csv" in out


def test_scaling_study_skips_failed_speed(capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "1")

    def fake(v, order=2, *a, **k):
        if v == 0.05:
            return {"v": v, "error": "NumericFailure: boom"}
        out = {"v": v}
        for label in ("t0", "thalf"):
            out[f"residual_L2_k2_{label}"] = v ** 4
            out[f"residual_H1_k2_{label}"] = v ** 4
            out[f"projection_k2_{label}"] = v ** 6
            out[f"unmodulated_projection_k2_{label}"] = v ** 4
        return out

    monkeypatch.setattr(studies, "study_point", fake)
    code, out, err = run(capsys, "scaling-study", "--v", "0.1,0.05,0.025,0.0125")
    assert "0.05" in err and "boom" in err
    assert code == 1
    rows = {r["quantity"]: r for r in csv.DictReader(io.StringIO(out))}
    assert rows["residual_L2_k2_t0"]["pass"] == "true"
