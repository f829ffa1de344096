import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from maxnorm_afem import cli
from maxnorm_afem.io import rates, read_mesh_text, read_records, write_rates
from maxnorm_afem.mesh import structured_unit_square

HEADER = "step,dof,err_max,star,starstar,eta_max,osc,ell_h,seconds"


def run(tmp_path, *flags, name="run.csv"):
    out = tmp_path / name
    code = cli.main(list(flags) + ["--out", str(out)])
    return code, out


def test_header_and_rows(tmp_path):
    code, out = run(tmp_path, "--problem", "u1", "--refine", "uniform", "--max-dof", "300")
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert [int(l.split(",")[1]) for l in lines[1:]] == [9, 49, 225, 961]
    rates_file = tmp_path / "run_rates.csv"
    assert rates_file.exists()
    assert rates_file.read_text().splitlines()[0] == "quantity,dof_from,dof_to,slope"


def test_deterministic_apart_from_seconds(tmp_path):
    flags = ["--problem", "u2", "--eps", "1e-3", "--stab", "supg", "--max-dof", "3000"]
    _, a = run(tmp_path, *flags, name="a.csv")
    _, b = run(tmp_path, *flags, name="b.csv")
    strip = lambda p: [l.rsplit(",", 1)[0] for l in p.read_text().splitlines()]
    assert strip(a) == strip(b)


def test_uniform_u1_err_slope(tmp_path):
    _, out = run(tmp_path, "--problem", "u1", "--eps", "1", "--refine", "uniform",
                 "--max-dof", "5000")
    rows = read_records(out)
    r = rates([x["dof"] for x in rows], [x["err_max"] for x in rows], "err_max")
    assert r.tail == pytest.approx(-1.0, abs=0.15)


@pytest.mark.parametrize("flags", [
    ["--eps", "0"], ["--eps", "2"], ["--stab", "upwind"], ["--refine", "red"],
    ["--kmax", "0"], ["--max-dof", "abc"], ["--problem", "u7"], ["--nope"],
    ["--c-vol", "-1"], ["--sample-order", "0"],
])
def test_bad_flags_exit_1(tmp_path, flags):
    with pytest.raises(SystemExit) as info:
        cli.main(flags + ["--out", str(tmp_path / "x.csv")])
    assert info.value.code == 1


def test_missing_output_directory_exits_1(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["--out", str(tmp_path / "missing" / "x.csv")])
    assert info.value.code == 1


def test_solver_failure_exits_2_with_partial_csv(tmp_path):
    code, out = run(tmp_path, "--problem", "u1", "--refine", "uniform", "--max-dof", "1000",
                    "--lin-tol", "1e-30")
    assert code == 2
    assert out.read_text().splitlines() == [HEADER]


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "maxnorm_afem", "--max-dof", "10",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith(HEADER)
    bad = subprocess.run([sys.executable, "-m", "maxnorm_afem", "--stab", "x"],
                         capture_output=True, text=True)
    assert bad.returncode == 1


def test_mesh_export(tmp_path):
    code, out = run(tmp_path, "--problem", "u3", "--eps", "1e-2", "--max-dof", "200",
                    "--export-mesh-every", "1")
    assert code == 0
    txt = sorted(tmp_path.glob("run_mesh*.txt"))
    vtk = sorted(tmp_path.glob("run_mesh*.vtk"))
    assert len(txt) == len(vtk) == len(read_records(out))
    V, T, vals = read_mesh_text(txt[0])
    m = structured_unit_square(4)
    assert np.allclose(V, m.vertices) and np.array_equal(T, m.triangles)
    assert vals.shape == (m.n_vertices,)
    head = vtk[0].read_text().splitlines()
    assert head[0].startswith("# vtk DataFile") and "UNSTRUCTURED_GRID" in head[3]


def test_rates_synthetic():
    dof = [10, 40, 160, 640]
    assert all(s == pytest.approx(-0.5) for *_, s in rates(dof, [8, 4, 2, 1]).pairs)
    assert all(s == 0 for *_, s in rates(dof, [3, 3, 3, 3]).pairs)
    # exact h^2 on structured meshes: DOF = (n-1)^2, error = n^-2
    n = np.array([8, 16, 32, 64, 128])
    r = rates((n - 1.0) ** 2, 1.0 / n ** 2)
    assert r.pairs[-1][2] == pytest.approx(-1.0, abs=0.02)
    r = rates(n ** 2.0, 1.0 / n ** 2)
    assert r.tail == pytest.approx(-1.0, abs=1e-10)
    assert all(s == pytest.approx(-1.0, abs=1e-10) for *_, s in r.pairs)


def test_rates_skip_nonpositive():
    r = rates([1, 2, 4, 8], [1.0, 0.0, 0.25, float("nan")], "q")
    assert math.isnan(r.pairs[0][2]) and math.isnan(r.pairs[2][2])
    assert len(r.notes) == 2
    assert r.tail == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        rates([1], [1.0])


def test_write_rates_file(tmp_path):
    rows = [{"dof": d, "err_max": 1 / d, "star": 1 / d, "starstar": 1 / d, "eta_max": 1 / d,
             "osc": 0.0} for d in (10, 100, 1000)]
    write_rates(tmp_path / "r.csv", rows)
    text = (tmp_path / "r.csv").read_text()
    body = [r for r in csv.reader(l for l in text.splitlines() if not l.startswith("#"))]
    tails = {r[0]: float(r[3]) for r in body[1:] if r[1] == "tail"}
    assert tails["err_max"] == pytest.approx(-1.0)
    assert "# row 0: osc=0 skipped" in text
