"""CSV tables, empirical convergence rates and mesh export."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .adaptivity import AdaptRecord

HEADER = AdaptRecord.CSV_COLUMNS
RATE_QUANTITIES = ("err_max", "star", "starstar", "eta_max", "osc")


class RecordWriter:
    """Stream :class:`AdaptRecord` rows to a CSV file, flushing after each row."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(HEADER)
        self._fh.flush()

    def write(self, record):
        self._w.writerow(record.csv_row())
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path):
    """Rows of a record CSV as a list of dicts of floats."""
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


@dataclass
class Rates:
    """Empirical orders of one quantity against DOF."""

    quantity: str
    pairs: list                     # (dof_from, dof_to, slope or nan)
    tail: float
    notes: list = field(default_factory=list)


def rates(dof, values, quantity="value", tail=3):
    """Slopes of ``log(value)`` vs ``log(dof)``.

    Consecutive pairs plus a least-squares fit over the last ``tail`` usable
    rows.  Nonpositive or non-finite values are skipped with a note.
    """
    dof = np.asarray(dof, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(dof) < 2:
        raise ValueError("need at least two rows")
    ok = np.isfinite(values) & (values > 0) & (dof > 0)
    notes = ["row %d: %s=%g skipped" % (i, quantity, values[i]) for i in np.flatnonzero(~ok)]
    pairs = []
    for i in range(len(dof) - 1):
        if ok[i] and ok[i + 1] and dof[i + 1] != dof[i]:
            s = math.log(values[i + 1] / values[i]) / math.log(dof[i + 1] / dof[i])
        else:
            s = float("nan")
        pairs.append((dof[i], dof[i + 1], s))
    use = np.flatnonzero(ok)[-tail:]
    if len(use) >= 2 and np.ptp(dof[use]) > 0:
        tail_slope = float(np.polyfit(np.log(dof[use]), np.log(values[use]), 1)[0])
    else:
        tail_slope = float("nan")
        notes.append("%s: too few positive rows for a tail fit" % quantity)
    return Rates(quantity, pairs, tail_slope, notes)


def write_rates(path, records, quantities=RATE_QUANTITIES, tail=3):
    """Companion rates file: one line per consecutive pair and quantity, then tail fits."""
    dof = [r.dof if hasattr(r, "dof") else r["dof"] for r in records]
    out = []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("quantity", "dof_from", "dof_to", "slope"))
        for q in quantities:
            vals = [getattr(r, q) if hasattr(r, q) else r[q] for r in records]
            if len(vals) < 2:
                continue
            rr = rates(dof, vals, q, tail)
            out.append(rr)
            for a, b, s in rr.pairs:
                w.writerow((q, int(a), int(b), "%.6f" % s))
        for rr in out:
            w.writerow((rr.quantity, "tail", tail, "%.6f" % rr.tail))
        for rr in out:
            for note in rr.notes:
                fh.write("# %s\n" % note)
    return out


def write_mesh_text(path, mesh, values=None):
    """Plain text mesh: a vertex block and a triangle block with counts."""
    with open(path, "w") as fh:
        fh.write("vertices %d\n" % mesh.n_vertices)
        for i, (x, y) in enumerate(mesh.vertices):
            v = "" if values is None else " %.17g" % values[i]
            fh.write("%.17g %.17g%s\n" % (x, y, v))
        fh.write("triangles %d\n" % mesh.n_triangles)
        for t in mesh.triangles:
            fh.write("%d %d %d\n" % tuple(t))


def read_mesh_text(path):
    """Inverse of :func:`write_mesh_text`; returns ``(vertices, triangles, values)``."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    nv = int(lines[0].split()[1])
    rows = [list(map(float, ln.split())) for ln in lines[1:1 + nv]]
    V = np.array([r[:2] for r in rows])
    vals = np.array([r[2] for r in rows]) if rows and len(rows[0]) > 2 else None
    nt = int(lines[1 + nv].split()[1])
    T = np.array([list(map(int, ln.split())) for ln in lines[2 + nv:2 + nv + nt]], dtype=np.int64)
    return V, T.reshape(-1, 3), vals


def write_vtk(path, mesh, point_data=None, cell_data=None):
    """Legacy ASCII VTK unstructured grid with optional scalar fields."""
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write("POINTS %d double\n" % mesh.n_vertices)
        np.savetxt(fh, np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)]), fmt="%.17g")
        m = mesh.n_triangles
        fh.write("CELLS %d %d\n" % (m, 4 * m))
        np.savetxt(fh, np.column_stack([np.full(m, 3), mesh.triangles]), fmt="%d")
        fh.write("CELL_TYPES %d\n" % m)
        np.savetxt(fh, np.full(m, 5), fmt="%d")       # VTK_TRIANGLE
        for kind, n, data in (("POINT_DATA", mesh.n_vertices, point_data),
                              ("CELL_DATA", m, cell_data)):
            if not data:
                continue
            fh.write("%s %d\n" % (kind, n))
            for name, arr in data.items():
                fh.write("SCALARS %s double 1\nLOOKUP_TABLE default\n" % name)
                np.savetxt(fh, np.asarray(arr, dtype=float), fmt="%.17g")
