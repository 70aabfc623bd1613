"""Command-line interface: subcommands, CSV output, and error handling."""

import csv

import numpy as np
import pytest

from polydg.cli import main
from polydg.experiments import CSV_HEADER
from polydg.mesh import read_mesh


def read_csv(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0][0].startswith("# ")  # config comment line
    return rows[1], rows[2:]


def test_analyze_subcommand(tmp_path, capsys):
    out = tmp_path / "an.csv"
    rc = main(["analyze", "--p", "0", "--k", "k1", "--theta-samples", "3",
               "--wave-samples", "6", "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    assert header == CSV_HEADER + ["lambda_max", "log_ratio"]
    assert len(rows) == 4  # one row per pattern
    ratios = {r[header.index("pattern")]: float(r[header.index("log_ratio")])
              for r in rows}
    assert min(ratios.values()) == pytest.approx(1.0)
    assert "log_ratio" in capsys.readouterr().out


def test_advect_subcommand(tmp_path):
    out = tmp_path / "ad.csv"
    rc = main(["advect", "--pattern", "square", "--p", "0", "--k", "k1",
               "--h", "0.25", "--steps", "2", "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    assert header == CSV_HEADER
    assert len(rows) == 1
    row = dict(zip(header, rows[0]))
    assert row["experiment"] == "advect"
    assert row["solver"] == "jacobi"
    assert int(row["iterations"]) > 0
    assert float(row["final_residual"]) < 1e-13


def test_advect_gmres_ilu0(tmp_path):
    out = tmp_path / "gm.csv"
    rc = main(["advect", "--pattern", "hex", "--p", "1", "--k", "k1",
               "--h", "0.25", "--steps", "1", "--solver", "gmres",
               "--preconditioner", "ilu0", "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    row = dict(zip(header, rows[0]))
    assert row["preconditioner"] == "ilu0"
    assert int(row["iterations"]) > 0


def test_random_advect_subcommand(tmp_path):
    out = tmp_path / "ra.csv"
    rc = main(["random-advect", "--h", "0.25", "--p", "0", "--k", "k1",
               "--steps", "1", "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    assert {r[header.index("pattern")] for r in rows} == {"voronoi",
                                                          "delaunay"}


def test_euler_vortex_subcommand(tmp_path):
    out = tmp_path / "ev.csv"
    rc = main(["euler-vortex", "--pattern", "square", "--p", "0",
               "--k", "k1", "--solver", "gmres", "--preconditioner", "ilu0",
               "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    row = dict(zip(header, rows[0]))
    assert int(row["newton_iters"]) >= 1
    assert int(row["iterations"]) > 0


def test_euler_vortex_rejects_bad_combination(capsys):
    rc = main(["euler-vortex", "--solver", "gmres",
               "--preconditioner", "none"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_mesh_gen_roundtrip(tmp_path):
    out = tmp_path / "m.mesh"
    rc = main(["mesh", "gen", "--pattern", "hex", "--area", "0.02",
               "--domain", "0", "0", "1", "1", "--out", str(out)])
    assert rc == 0
    mesh = read_mesh(out)
    assert mesh.cell_areas.sum() == pytest.approx(1.0, rel=1e-12)
    # the generated file can drive an advection run
    out2 = tmp_path / "file.csv"
    rc = main(["advect", "--mesh-file", str(out), "--p", "0", "--k", "k1",
               "--steps", "1", "--out", str(out2)])
    assert rc == 0


def test_mesh_gen_voronoi(tmp_path):
    out = tmp_path / "v.mesh"
    rc = main(["mesh", "gen", "--pattern", "voronoi", "--h", "0.25",
               "--delta", "0.05", "--seed", "3", "--out", str(out)])
    assert rc == 0
    mesh = read_mesh(out)
    # boundary-crossing perturbed points are discarded, so the count varies,
    # but the clipped Voronoi cells still tile the domain
    assert mesh.n_cells > 0
    assert mesh.cell_areas.sum() == pytest.approx(1.0, rel=1e-12)


def test_mesh_gen_missing_required_flag(capsys):
    rc = main(["mesh", "gen", "--pattern", "voronoi",
               "--out", "/tmp/never.mesh"])
    assert rc == 2
    rc = main(["mesh", "gen", "--pattern", "hex", "--out", "/tmp/never.mesh"])
    assert rc == 2


def test_bad_flags_exit_nonzero(capsys):
    with pytest.raises(SystemExit) as e:
        main(["advect", "--bc", "sideways"])
    assert e.value.code != 0
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code != 0
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code != 0


def test_unknown_pattern_name(capsys):
    rc = main(["advect", "--pattern", "heptagon", "--p", "0", "--k", "k1"])
    assert rc == 2
    assert "unknown pattern" in capsys.readouterr().err
