import json

import pytest

from localizer_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_compute_oscillator_auto(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, err = run(capsys, "compute", "--model", "oscillator:n=40",
                         "--auto", "--out", str(out_file))
    assert code == 0
    payload = json.loads(out_file.read_text())
    assert payload["indices"] == {"graded_kernel": 1, "localizer": 1,
                                  "window_formula": 1}
    assert payload["agreement"] is True
    assert payload["certificate"]["admissible"] is True
    assert payload["truncation"]["within_guard"] is True


def test_compute_report_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = run(capsys, "compute", "--model", "oscillator:n=30",
                         "--auto", "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_compute_manual_scales(capsys):
    code, out, err = run(capsys, "compute", "--model", "oscillator:n=30",
                         "--kappa", "0.5", "--rho", "2.0")
    assert code == 0
    payload = json.loads(out)
    assert payload["params_source"] == "manual"
    assert payload["certificate"]["kappa"] == 0.5
    assert payload["certificate"]["admissible"] is True


def test_compute_needs_model(capsys):
    code, out, err = run(capsys, "compute", "--auto")
    assert code == 2
    assert "error:" in err


def test_compute_rejects_auto_plus_manual(capsys):
    code, out, err = run(capsys, "compute", "--model", "oscillator:n=20",
                         "--auto", "--kappa", "1.0", "--rho", "2.0")
    assert code == 2


def test_compute_unknown_model(capsys):
    code, out, err = run(capsys, "compute", "--model", "nosuch:n=2", "--auto")
    assert code == 2


def test_compute_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "oscillator:n=30",
                               "localizer.auto": True}))
    code, out, err = run(capsys, "compute", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["model"]["name"] == "oscillator"


def test_sweep_constant_signature(capsys):
    code, out, err = run(capsys, "sweep", "--model", "oscillator:n=30",
                         "--kappa", "0.5,1.0", "--rho", "2.0,4.0")
    assert code == 0
    lines = out.strip().splitlines()
    header = lines[0]
    assert header.startswith("kappa,rho")
    data = [l for l in lines[1:] if not l.startswith("#")]
    assert len(data) == 4
    comments = [l for l in lines if l.startswith("#")]
    assert any("signature_constant=True" in c for c in comments)


def test_sweep_requires_both_grids(capsys):
    code, out, err = run(capsys, "sweep", "--model", "oscillator:n=20",
                         "--kappa", "0.5")
    assert code == 2


def test_export_phi_stdout(capsys):
    code, out, err = run(capsys, "export-phi")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "x,phi(x)"
    x0, v0 = rows[1].split(",")
    assert float(x0) == -1.0
    assert float(v0) == 0.0


def test_export_model_writes_files(capsys, tmp_path):
    prefix = tmp_path / "osc"
    code, out, err = run(capsys, "export-model", "--model", "oscillator:n=20",
                         "--out", str(prefix))
    assert code == 0
    for suffix in ("_H.csv", "_H.json", "_D.csv", "_D.json", "_model.json"):
        assert (tmp_path / f"osc{suffix}").exists()
    meta = json.loads((tmp_path / "osc_model.json").read_text())
    assert meta["name"] == "oscillator"
    assert meta["n_plus"] == 20


def test_export_model_requires_out(capsys):
    code, out, err = run(capsys, "export-model", "--model", "oscillator:n=20")
    assert code == 2


def test_verify_identities_suite(capsys):
    code, out, err = run(capsys, "verify", "identities")
    assert code == 0
    assert "PASS" in out
    assert "FAIL" not in out


def test_verify_unknown_suite_exits_twoish(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
