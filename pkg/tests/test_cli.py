import csv
import json
from pathlib import Path

import numpy as np
import pytest

from cedgrp.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from cedgrp.io import load_state

PLANE = """\
[problem]
kind = plane_wave
[mesh]
dims = {n}, {n}
limiter = none
[time]
cfl = 0.45
final_time = {t}
[output]
formats = csv, vtk, npz
"""


def _cfg(tmp_path, n=8, t="3.5e-9", extra=""):
    p = tmp_path / "run.cfg"
    p.write_text(PLANE.format(n=n, t=t) + extra)
    return p


def _data_rows(path):
    return [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", str(_cfg(tmp_path)), "--out", str(out)]) == EXIT_OK
    assert "completed" in capsys.readouterr().out
    man = json.loads((out / "manifest.json").read_text())
    for key in ("schema", "version", "config", "config_text", "problem", "numpy", "python",
                "wall_time", "step_count", "files", "summary"):
        assert key in man
    for name in man["files"]:
        assert (out / name).exists()
    assert _data_rows(out / "divergence.csv")[0] == "step,time,max_div_b,max_div_d,rel_div_b,rel_div_d"
    snap = sorted(out.glob("fields_*.csv"))[-1]
    assert _data_rows(snap)[0] == "x,y,z,Dx,Dy,Dz,Bx,By,Bz"
    assert man["summary"]["rel_div_b"] < 1e-12
    assert man["summary"]["L1_Dy"] == pytest.approx(5.92e-4, rel=0.05)


def test_zero_final_time_emits_initial_state_only(tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(_cfg(tmp_path, t="0")), "--out", str(out)]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["step_count"] == 0
    assert sorted(p.name for p in out.glob("fields_*.csv")) == ["fields_000000.csv"]
    assert len(_data_rows(out / "divergence.csv")) == 2


def test_rerun_from_manifest_is_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(_cfg(tmp_path, t="1e-9")), "--out", str(a)]) == EXIT_OK
    text = json.loads((a / "manifest.json").read_text())["config_text"]
    again = tmp_path / "again.cfg"
    again.write_text(text)
    assert main(["run", str(again), "--out", str(b)]) == EXIT_OK
    sa, sb = load_state(a / "state_final.npz"), load_state(b / "state_final.npz")
    for x, y in zip(sa.d_faces + sa.b_faces, sb.d_faces + sb.b_faces):
        np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["run"],
    ["run", "/nonexistent/x.cfg"],
    ["convergence", "CFG", "--levels", "16"],
    ["convergence", "CFG", "--levels", "16,x"],
    ["convergence", "CFG", "--levels", "16,32", "--components", "Ex"],
    ["convergence", "CFG", "--levels", "16,32", "--mode", "self"],
    ["amplification", "--chi-max", "-1"],
    ["diagnose", "/nonexistent/s.npz"],
])
def test_usage_errors_exit_2(tmp_path, argv, capsys):
    cfg = str(_cfg(tmp_path))
    argv = [cfg if a == "CFG" else a for a in argv]
    assert main(argv) == EXIT_CONFIG


def test_bad_config_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(PLANE.format(n=8, t="1e-9").replace("cfl = 0.45", "cfl = 2"))
    assert main(["run", str(p)]) == EXIT_CONFIG
    assert "line 7:" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    p = tmp_path / "boom.cfg"
    p.write_text(PLANE.format(n=8, t="1e-9").replace("[mesh]", "amplitude = 1e308\n[mesh]"))
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
    assert "non-finite" in capsys.readouterr().err


def test_amplification_output(tmp_path, capsys):
    assert main(["amplification", "--samples", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["# schema: amplification/1", "chi,G_exact,G_backward_euler,G_l_stable_average"]
    assert len(lines) == 7
    out = tmp_path / "g.csv"
    assert main(["amplification", "--out", str(out)]) == EXIT_OK
    assert len(_data_rows(out)) == 402


def _orders(path, comp="Dy"):
    with open(path) as fh:
        rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
    return [float(r["L1_order"]) for r in rows if r["component"] == comp and r["L1_order"] != "—"]


def test_convergence_header_and_orders(tmp_path, capsys):
    cfg = str(_cfg(tmp_path))
    o1, o2 = tmp_path / "oracle", tmp_path / "self"
    assert main(["convergence", cfg, "--levels", "8,16", "--components", "Dy",
                 "--out", str(o1)]) == EXIT_OK
    rows = (o1 / "convergence.csv").read_text().splitlines()
    assert rows[:2] == ["# schema: convergence/1", "component,N,L1,L1_order,Linf,Linf_order"]
    # the reference must be well beyond the measured levels for the orders to agree
    assert main(["convergence", cfg, "--levels", "8,16,64", "--mode", "self",
                 "--components", "Dy", "--out", str(o2)]) == EXIT_OK
    oracle, self_ = _orders(o1 / "convergence.csv"), _orders(o2 / "convergence.csv")
    assert len(oracle) == len(self_) == 1
    assert abs(oracle[0] - self_[0]) <= 0.1


def test_diagnose(tmp_path, capsys):
    out = tmp_path / "o"
    main(["run", str(_cfg(tmp_path, t="1e-9")), "--out", str(out)])
    capsys.readouterr()
    state = out / "state_final.npz"
    assert main(["diagnose", str(state)]) == EXIT_OK
    assert "constraint audit passed" in capsys.readouterr().out
    m = load_state(state)
    m.b_faces[2][3, 3, 0] += 1.0
    from cedgrp.io import save_state
    save_state(m, tmp_path / "broken.npz")
    assert main(["diagnose", str(tmp_path / "broken.npz")]) == EXIT_NUMERIC
    assert "FAILED" in capsys.readouterr().out
