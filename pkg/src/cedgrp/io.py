"""Snapshots, saved states and run manifests."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import MaterialTensors, PhysicalConstants
from .mesh import StaggeredMesh, divergence_diagnostics

SNAPSHOT_SCHEMA = "snapshot/1"
DIVERGENCE_SCHEMA = "divergence/1"
STATE_SCHEMA = "state/1"
SNAPSHOT_COLUMNS = ("x", "y", "z", "Dx", "Dy", "Dz", "Bx", "By", "Bz")


class SnapshotError(ValueError):
    pass


def _centers(mesh: StaggeredMesh):
    return np.meshgrid(mesh.coords(0), mesh.coords(1), mesh.coords(2), indexing="ij")


def write_csv_snapshot(mesh: StaggeredMesh, path) -> Path:
    """Zone-centered fields from the reconstruction, one row per zone (x fastest)."""
    path = Path(path)
    u = mesh.state_at_centers()
    x, y, z = _centers(mesh)
    cols = [x, y, z] + [u[q] for q in range(6)]
    # x varies fastest
    table = np.column_stack([np.transpose(c, (2, 1, 0)).ravel() for c in cols])
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# schema: {SNAPSHOT_SCHEMA}\n")
        fh.write(f"# time: {mesh.time:.12e}\n")
        fh.write(",".join(SNAPSHOT_COLUMNS) + "\n")
        np.savetxt(fh, table, fmt="%.12e", delimiter=",")
    return path


def read_csv_snapshot(path):
    """Return ``(columns, table, meta)`` from a CSV snapshot."""
    meta = {}
    with open(path, encoding="utf-8") as fh:
        line = fh.readline()
        while line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            line = fh.readline()
        cols = tuple(line.strip().split(","))
        if meta.get("schema") != SNAPSHOT_SCHEMA or cols != SNAPSHOT_COLUMNS:
            raise SnapshotError(f"{path}: not a {SNAPSHOT_SCHEMA} file")
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    return cols, table, meta


def write_vtk(mesh: StaggeredMesh, path, title: str = "fields") -> Path:
    """Legacy-VTK ASCII structured points with D and B as point vectors at zone centers."""
    path = Path(path)
    u = mesh.state_at_centers()
    nx, ny, nz = mesh.dims
    origin = [o + 0.5 * h for o, h in zip(mesh.origin, mesh.spacing)]
    with path.open("w", encoding="ascii") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title} t={mesh.time:.12e}\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
        fh.write("ORIGIN {:.12e} {:.12e} {:.12e}\n".format(*origin))
        fh.write("SPACING {:.12e} {:.12e} {:.12e}\n".format(*mesh.spacing))
        fh.write(f"POINT_DATA {nx * ny * nz}\n")
        for name, sl in (("D", slice(0, 3)), ("B", slice(3, 6))):
            fh.write(f"VECTORS {name} double\n")
            vec = np.stack([np.transpose(c, (2, 1, 0)).ravel() for c in u[sl]], axis=1)
            np.savetxt(fh, vec, fmt="%.12e")
    return path


def save_state(mesh: StaggeredMesh, path) -> Path:
    """Everything needed to continue or audit a run, in one ``.npz``."""
    path = Path(path)
    arrays = {f"d{a}": mesh.d_faces[a] for a in range(3)}
    arrays.update({f"b{a}": mesh.b_faces[a] for a in range(3)})
    mat = mesh.materials
    meta = dict(schema=STATE_SCHEMA, dims=list(mesh.dims), spacing=list(mesh.spacing),
                origin=list(mesh.origin), time=mesh.time, boundary=list(mesh.boundary),
                limiter=mesh.limiter, step_count=mesh.step_count,
                source_kind=None if mesh.source_kind is None else mesh.source_kind.value,
                eps0=mesh.constants.eps0, mu0=mesh.constants.mu0)
    np.savez_compressed(path, rho_e=mesh.rho_e, rho_m=mesh.rho_m, eps_inv=mat.eps_inv,
                        mu_inv=mat.mu_inv, sigma=np.asarray(mat.sigma),
                        sigma_star=np.asarray(mat.sigma_star),
                        meta=np.array(json.dumps(meta)), **arrays)
    return path


def load_state(path) -> StaggeredMesh:
    with np.load(path, allow_pickle=False) as z:
        try:
            meta = json.loads(str(z["meta"]))
        except KeyError:
            raise SnapshotError(f"{path}: missing metadata") from None
        if meta.get("schema") != STATE_SCHEMA:
            raise SnapshotError(f"{path}: unsupported state schema {meta.get('schema')!r}")
        mats = MaterialTensors(z["eps_inv"], z["mu_inv"], z["sigma"], z["sigma_star"],
                               validate=False)
        return StaggeredMesh(
            dims=tuple(meta["dims"]), spacing=tuple(meta["spacing"]),
            d_faces=[z[f"d{a}"] for a in range(3)], b_faces=[z[f"b{a}"] for a in range(3)],
            materials=mats, origin=tuple(meta["origin"]), time=meta["time"],
            boundary=tuple(meta["boundary"]), limiter=meta["limiter"],
            source_kind=meta["source_kind"], rho_e=z["rho_e"], rho_m=z["rho_m"],
            constants=PhysicalConstants(meta["eps0"], meta["mu0"]),
            step_count=meta["step_count"])


class DivergenceLog:
    """Constraint-residual time series written as CSV."""

    header = "step,time,max_div_b,max_div_d,rel_div_b,rel_div_d"

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w", encoding="utf-8")
        self._fh.write(f"# schema: {DIVERGENCE_SCHEMA}\n{self.header}\n")

    def record(self, mesh: StaggeredMesh):
        r = divergence_diagnostics(mesh)
        self._fh.write(f"{mesh.step_count},{mesh.time:.12e},{r.max_div_b:.12e},{r.max_div_d:.12e},"
                       f"{r.rel_div_b:.12e},{r.rel_div_d:.12e}\n")
        return r

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
                    encoding="utf-8")
    return path
