"""CSV point-cloud / table writers and OBJ meshes for surface slices."""

from __future__ import annotations

import numpy as np

__all__ = ["grid_faces", "write_csv", "write_obj", "read_obj_vertices"]

_FMT = "%.17g"


def write_csv(path, colnames, rows, header_lines=()):
    """Plain CSV with optional '#' header comment lines, full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(colnames) + "\n")
        for row in rows:
            fh.write(",".join(_FMT % float(x) for x in row) + "\n")


def grid_faces(ns, nt):
    """Triangle index pairs of an ns x nt open grid: 2 (ns-1)(nt-1) faces."""
    faces = []
    for i in range(ns - 1):
        for j in range(nt - 1):
            v00 = i * nt + j
            v01 = v00 + 1
            v10 = v00 + nt
            v11 = v10 + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return faces


def write_obj(path, vertices, faces):
    """Wavefront OBJ: one v record per vertex row, 1-based f records."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise ValueError("OBJ vertices must be an (n, 3) array")
    with open(path, "w", encoding="utf-8") as fh:
        for v in vertices:
            fh.write("v " + " ".join(_FMT % x for x in v) + "\n")
        for f in faces:
            fh.write("f " + " ".join(str(i + 1) for i in f) + "\n")


def read_obj_vertices(path):
    verts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("v "):
                verts.append([float(x) for x in line.split()[1:4]])
    return np.asarray(verts, dtype=float)


def project_r3(points, projection="re"):
    """Fixed linear projections C^3 -> R^3 used for OBJ export."""
    points = np.asarray(points, dtype=complex)
    if projection == "re":
        return points.real
    if projection == "im":
        return points.imag
    if projection == "mixed":
        return np.column_stack([points[:, 0].real, points[:, 1].real, points[:, 2].imag])
    raise ValueError(f"unknown projection {projection!r}")
