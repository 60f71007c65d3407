"""CLI behaviour: outputs, exit codes, determinism."""

import json
import os

import pytest

from mixlab.cli import bundled_roof_path, main


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    return code, out


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


@pytest.fixture
def roofs():
    return {
        name: bundled_roof_path(name)
        for name in ("example1", "example2", "example3", "constant",
                     "coboundary")
    }


def test_classify_examples(tmp_path, capsys, roofs):
    verdicts = {}
    for name, path in roofs.items():
        code, out = run(tmp_path / name, "classify", "--roof", path)
        assert code == 0
        verdicts[name] = capsys.readouterr().out.strip()
        doc = json.loads(read(out / "classify_report.json"))
        assert doc["verdict"] == verdicts[name]
    assert verdicts["example1"] == "mixing"
    assert verdicts["example2"] == "mixing"
    assert verdicts["example3"] == "mixing"
    assert verdicts["constant"] == "trivial"
    assert verdicts["coboundary"] == "trivial"


def test_summary_embeds_config_and_version(tmp_path, roofs):
    code, out = run(tmp_path, "classify", "--roof", roofs["example1"])
    assert code == 0
    doc = json.loads(read(out / "classify_summary.json"))
    assert doc["experiment"] == "classify"
    assert doc["config"]["roof"] == roofs["example1"]
    assert doc["config"]["tol"] == 1e-9
    assert "version" in doc and "wall_time_s" in doc
    assert "classify_report.json" in doc["outputs"]


def test_solve_emits_transfer(tmp_path, roofs):
    code, out = run(tmp_path, "solve", "--roof", roofs["coboundary"])
    assert code == 0
    rep = json.loads(read(out / "solve_report.json"))
    assert rep["mean"] == 3.0
    assert rep["residual_sup_128"] <= 1e-9
    from mixlab.skewshift import load_roof

    f, u = load_roof(out / "transfer_u.json")
    assert u.real
    # cos(2 pi y): modes (0, +-1) with coefficient 1/2
    assert abs(u.c(1).coeff(0) - 0.5) < 1e-12
    assert abs(u.c(-1).coeff(0) - 0.5) < 1e-12


def test_solve_mixing_roof_exits_3(tmp_path, roofs, capsys):
    code, _ = run(tmp_path, "solve", "--roof", roofs["example1"])
    assert code == 3
    assert "ObstructionNonzero" in capsys.readouterr().err


def test_stretch_csv_format(tmp_path, roofs):
    code, out = run(
        tmp_path, "stretch", "--roof", roofs["example1"], "--C", "2",
        "--n", "10,100", "--grid", "256",
    )
    assert code == 0
    lines = read(out / "stretch.csv").decode().splitlines()
    assert lines[0] == "n,measure"
    assert len(lines) == 3
    n10 = float(lines[1].split(",")[1])
    n100 = float(lines[2].split(",")[1])
    assert n100 < n10


def test_visits_and_l2(tmp_path, roofs):
    code, out = run(
        tmp_path / "a", "visits", "--roof", roofs["example1"], "--C", "2",
        "--N", "10,100",
    )
    assert code == 0
    lines = read(out / "visits.csv").decode().splitlines()
    assert lines[0] == "n,measure"

    code, out = run(
        tmp_path / "b", "l2", "--roof", roofs["example1"], "--N", "1,10,100"
    )
    assert code == 0
    lines = read(out / "l2.csv").decode().splitlines()
    assert [line.split(",")[1] for line in lines[1:]] == ["0.5", "5", "50"]


def test_correlate_determinism_across_workers(tmp_path, roofs):
    argv = [
        "correlate", "--roof", roofs["example1"],
        "--cube", "0,0.5,0,0.5,0.5", "--t", "0,2", "--samples", "100000",
        "--seed", "7",
    ]
    outs = []
    for workers in ("1", "4"):
        code, out = run(tmp_path / workers, *argv, "--workers", workers)
        assert code == 0
        outs.append(read(out / "correlate.csv"))
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header == "t,value,stderr,samples,seed"


def test_workers_env_default(tmp_path, roofs, monkeypatch):
    monkeypatch.setenv("MIXLAB_WORKERS", "3")
    code, out = run(tmp_path, "classify", "--roof", roofs["example1"])
    assert code == 0
    doc = json.loads(read(out / "classify_summary.json"))
    assert doc["config"]["workers"] == 3


def test_weyl_and_hitting_run(tmp_path, roofs):
    code, out = run(
        tmp_path / "w", "weyl", "--roof", roofs["example1"], "--levels", "5",
        "--grid", "128",
    )
    assert code == 0
    lines = read(out / "weyl.csv").decode().splitlines()
    assert lines[0] == "ell,N,value"
    assert len(lines) == 6

    code, out = run(
        tmp_path / "h", "hitting", "--roof", roofs["example1"], "--C", "2",
        "--t", "20",
    )
    assert code == 0
    assert (out / "hitting.csv").exists()


def test_fiber_profile_runs(tmp_path, roofs):
    code, out = run(
        tmp_path, "fiber-profile", "--roof", roofs["example1"],
        "--x", "0.3", "--arc", "0.2,0.6", "--cube", "0.2,0.6,0.1,0.7,0.5",
        "--t", "0",
    )
    assert code == 0
    lines = read(out / "fiber_profile.csv").decode().splitlines()
    assert float(lines[1].split(",")[1]) == pytest.approx(0.4, abs=1e-12)


def test_conjugacy_cli(tmp_path, roofs):
    code, out = run(
        tmp_path, "conjugacy", "--roof", roofs["coboundary"],
        "--t", "0.7,3.3", "--points", "20",
    )
    assert code == 0
    lines = read(out / "conjugacy.csv").decode().splitlines()
    assert all(float(line.split(",")[1]) <= 1e-8 for line in lines[1:])


def test_conjugacy_mixing_roof_exits_3(tmp_path, roofs):
    code, _ = run(
        tmp_path, "conjugacy", "--roof", roofs["example1"], "--t", "1.0"
    )
    assert code == 3


def test_return_check_cli(tmp_path):
    code, out = run(
        tmp_path, "return-check", "--wx", "0.3", "--wy", "1.1", "--wz",
        "-0.2", "--count", "5",
    )
    assert code == 0
    doc = json.loads(read(out / "return-check_summary.json"))
    assert doc["max_coord_err"] <= 1e-9
    assert doc["max_time_err"] <= 1e-10


def test_invalid_inputs_exit_2(tmp_path, roofs, capsys):
    code, _ = run(tmp_path / "a", "classify", "--roof", "/nonexistent.json")
    assert code == 2

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "alpha": 0.5, "beta": 0.0, "degree_y": 1, "real": True,
        "coeffs": [{"k": 1, "m": 0, "re": 1.0, "im": 0.0}],
    }))
    code, _ = run(tmp_path / "b", "classify", "--roof", str(bad))
    assert code == 2
    assert "realness" in capsys.readouterr().err or True

    code, _ = run(
        tmp_path / "c", "stretch", "--roof", roofs["example1"], "--C", "-1",
        "--n", "10",
    )
    assert code == 2

    code, _ = run(
        tmp_path / "d", "correlate", "--roof", roofs["example1"],
        "--cube", "0,0.5,0,0.5", "--t", "1", "--samples", "2000",
    )
    assert code == 2


def test_rational_alpha_small_divisor_exit_3(tmp_path, capsys):
    # rational alpha hits the resonant frequency m = 2 during solve
    roof = tmp_path / "xonly.json"
    roof.write_text(json.dumps({
        "alpha": 0.5, "beta": 0.0, "degree_y": 0, "real": True,
        "coeffs": [
            {"k": 0, "m": 0, "re": 2.0, "im": 0.0},
            {"k": 0, "m": 2, "re": 0.5, "im": 0.0},
            {"k": 0, "m": -2, "re": 0.5, "im": 0.0},
        ],
    }))
    code, _ = run(tmp_path, "solve", "--roof", str(roof))
    assert code == 3
    assert "SmallDivisor" in capsys.readouterr().err


def test_unknown_roof_keys_rejected(tmp_path):
    bad = tmp_path / "extra.json"
    bad.write_text(json.dumps({
        "alpha": 0.3, "beta": 0.0, "degree_y": 0, "real": True,
        "coeffs": [{"k": 0, "m": 0, "re": 2.0, "im": 0.0}],
        "surprise": 1,
    }))
    code, _ = run(tmp_path, "classify", "--roof", str(bad))
    assert code == 2
