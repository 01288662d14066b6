import json

import numpy as np
import pytest

from mgforge import formats as fmt
from mgforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gates(capsys):
    code, out, _ = run(capsys, "gates")
    assert code == 0 and "G_HH" in json.loads(out)["gates"]
    code, out, _ = run(capsys, "gates", "G_IX")
    assert code == 0 and "relaxed" in json.loads(out)["note"]
    code, _, err = run(capsys, "gates", "FOO")
    assert code == 2 and "error" in err


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", "G_HH", "--symmetric")
    d = json.loads(out)
    assert code == 0
    assert d["theta"] == pytest.approx(np.pi, abs=1e-9)
    assert d["residual"] < 1e-9
    code, _, _ = run(capsys, "decompose", "SWAP")
    assert code == 2


def test_kak(capsys):
    code, out, _ = run(capsys, "kak", "--gate", "CNOT")
    assert code == 0
    assert np.allclose(json.loads(out)["c"], [np.pi / 2, 0, 0], atol=1e-8)
    with pytest.raises(SystemExit) as exc:
        main(["kak"])
    assert exc.value.code == 2


def test_tomo_pipeline(capsys, tmp_path):
    code, _, _ = run(capsys, "tomo", "simulate", "--gate", "G_HH", "--counts", "10000",
                     "--output-dir", str(tmp_path), "--seed", "7")
    assert code == 0
    code, out, _ = run(capsys, "tomo", "reconstruct", "--output-dir", str(tmp_path))
    d = json.loads(out)
    assert code == 0
    assert d["ideal"] == "G_HH" and d["fidelity"] > 0.99
    x = fmt.process_from_json(fmt.read_json(tmp_path / "chi_mle.json"))
    assert x.chi.shape == (16, 16)
    runs = fmt.read_json(tmp_path / "manifest.json")["runs"]
    assert set(runs) == {"tomo simulate", "tomo reconstruct"}
    assert runs["tomo simulate"]["seed"] == 7


def test_missing_dataset(capsys, tmp_path):
    code, _, _ = run(capsys, "tomo", "reconstruct", str(tmp_path / "none.jsonl"))
    assert code == 2


def test_seed_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("MG_FORGE_SEED", "5")
    run(capsys, "tomo", "simulate", "--gate", "CZ", "--output-dir", str(tmp_path))
    assert fmt.read_json(tmp_path / "manifest.json")["runs"]["tomo simulate"]["seed"] == 5
    monkeypatch.setenv("MG_FORGE_SEED", "abc")
    code, _, _ = run(capsys, "tomo", "simulate", "--gate", "CZ", "--output-dir", str(tmp_path))
    assert code == 2


def test_weylmap_reruns_are_identical(capsys, tmp_path):
    code, _, _ = run(capsys, "chi", "--gate", "CZ", "--noise", "depolarizing", "--p", "0.1",
                     "--output-dir", str(tmp_path))
    assert code == 0
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        code, out, _ = run(capsys, "weylmap", "--target", str(tmp_path / "chi.json"), "--grid", "30",
                           "--restarts", "2", "--output-dir", str(d))
        assert code == 0
        outputs.append(((d / "map.csv").read_bytes(), (d / "map_summary.json").read_bytes(), out))
    assert outputs[0] == outputs[1]
    summary = json.loads(outputs[0][2])
    assert summary["grid_size"] == len(outputs[0][0].splitlines()) - 1


def test_calibrate_failure_exit_code(capsys, tmp_path):
    code, out, err = run(capsys, "experiment", "calibrate", "--raw-f", "0.99", "--f-max", "0.99",
                         "--purity", "0.5", "--output-dir", str(tmp_path))
    assert code == 1
    assert json.loads(out)["success"] is False
    assert "failed" in err
