import json
import os
import subprocess
import sys

import pytest

from chirpspdc.cli import main
from chirpspdc.gridio import read_grid_binary, read_grid_text

SMALL_GRID = """
[grid]
k_xs = [-0.4, 0.4, 16]
omega_i = [1.0, 1.35, 16]
inner_counts = [16, 16]
"""


def write(tmp_path, body, name="run.conf"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def files(d):
    return {f: open(os.path.join(d, f), "rb").read() for f in sorted(os.listdir(d))}


@pytest.fixture
def joint_conf(tmp_path):
    return write(tmp_path, "observable = joint\n[crystal]\nchirp_per_um2 = 2e-6\n" + SMALL_GRID)


def test_run_is_byte_reproducible(tmp_path, joint_conf):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", joint_conf, "--output-dir", str(a)]) == 0
    assert main(["run", joint_conf, "--output-dir", str(b)]) == 0
    assert files(a) == files(b)
    assert set(files(a)) == {"grid.txt", "heatmap.pgm", "manifest.json"}


def test_threads_do_not_change_output(tmp_path, joint_conf):
    main(["run", joint_conf, "--output-dir", str(tmp_path / "one"), "--threads", "1"])
    main(["run", joint_conf, "--output-dir", str(tmp_path / "three"), "--threads", "3"])
    assert files(tmp_path / "one") == files(tmp_path / "three")


def test_manifest_contents(tmp_path, joint_conf):
    main(["run", joint_conf, "--output-dir", str(tmp_path / "o")])
    m = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert m["format"] == "chirpspdc-run/1"
    assert m["observable"] == "joint"
    assert m["config"]["crystal"]["chirp_per_um2"] == 2e-6
    assert m["config"]["crystal"]["period_solved"] is True
    assert set(m["versions"]) >= {"chirpspdc", "numpy", "scipy", "numba", "python"}
    assert m["outputs"] == {"grid": "grid.txt", "heatmap": "heatmap.pgm"}
    g = read_grid_text(tmp_path / "o" / "grid.txt")
    assert g.values.shape == (16, 16)


def test_binary_grid_and_no_heatmap(tmp_path):
    conf = write(tmp_path, "observable = joint\ngrid_format = binary\n" + SMALL_GRID)
    assert main(["run", conf, "--output-dir", str(tmp_path / "o"), "--no-heatmap"]) == 0
    assert set(os.listdir(tmp_path / "o")) == {"grid.bin", "manifest.json"}
    assert read_grid_binary(tmp_path / "o" / "grid.bin").values.shape == (16, 16)


def test_spacetime_manifest_reports_widths(tmp_path):
    conf = write(tmp_path, "observable = spacetime\n" + SMALL_GRID.replace("16]", "32]", 2))
    assert main(["run", conf, "--output-dir", str(tmp_path / "o")]) == 0
    m = json.loads((tmp_path / "o" / "manifest.json").read_text())
    w = m["widths"]
    assert ("delta_x_um" in w and w["delta_x_um"] > 0) or "error" in w


def test_marginal_and_pmf_runs(tmp_path):
    conf = write(tmp_path, "observable = marginal\n[marginal]\nk_xs = 0.0\n" + SMALL_GRID)
    assert main(["run", conf, "--output-dir", str(tmp_path / "m")]) == 0
    assert read_grid_text(tmp_path / "m" / "grid.txt").values.shape == (16,)
    assert not (tmp_path / "m" / "heatmap.pgm").exists()
    conf = write(tmp_path, "observable = pmf\n[pmf]\nomega_s = [1.0, 1.35, 20]\nomega_i = [1.0, 1.35, 20]\n", "p.conf")
    assert main(["run", conf, "--output-dir", str(tmp_path / "p")]) == 0


def test_convergence_check_recorded(tmp_path):
    conf = write(tmp_path, "observable = joint\n" + SMALL_GRID + "convergence_check = true\n")
    main(["run", conf, "--output-dir", str(tmp_path / "o")])
    c = json.loads((tmp_path / "o" / "manifest.json").read_text())["convergence"]
    assert c["checked"] and c["max_relative_change"] >= 0


def test_sweep_makes_one_directory_per_value(tmp_path):
    conf = write(
        tmp_path,
        "observable = joint\n" + SMALL_GRID + "[sweep]\nparameter = crystal.chirp_per_um2\nvalues = [-5e-6, -2e-6, 0, 2e-6, 5e-6]\n",
    )
    out = tmp_path / "s"
    assert main(["sweep", conf, "--output-dir", str(out), "--no-heatmap"]) == 0
    runs = sorted(p for p in os.listdir(out) if p != "sweep.json")
    assert len(runs) == 5
    index = json.loads((out / "sweep.json").read_text())
    assert index["runs"] == runs and index["parameter"] == "crystal.chirp_per_um2"
    for r in runs:
        assert set(os.listdir(out / r)) == {"grid.txt", "manifest.json"}
    assert main(["run", conf, "--output-dir", str(out)]) == 2


def test_sweep_requires_sweep_section(tmp_path, joint_conf):
    assert main(["sweep", joint_conf]) == 2


def test_validate_prints_canonical_config(tmp_path, joint_conf, capsys):
    assert main(["validate", joint_conf]) == 0
    out = capsys.readouterr().out
    assert out.startswith("observable = joint\n")
    assert "chirp_per_um2 = 2e-06" in out


def test_config_error_exit_code(tmp_path, capsys):
    conf = write(tmp_path, "observable = joint\n[crystal]\nr = 2\n")
    assert main(["validate", conf]) == 2
    assert "line 3:" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.conf")]) == 1


def test_entry_point_subprocess(tmp_path, joint_conf):
    r = subprocess.run([sys.executable, "-m", "chirpspdc.cli", "validate", joint_conf], capture_output=True, text=True)
    assert r.returncode == 0 and "observable = joint" in r.stdout
