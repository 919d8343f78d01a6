"""Staggered mesh: face-averaged normal D and B, edge solves and the curl update.

Layout (zones ``Nx x Ny x Nz``):

* face family ``a`` stores the ``a`` component of D and B with shape ``N``
  plus one along axis ``a``; on periodic axes the last face duplicates face 0.
* the edge family along ``a`` has shape ``N`` plus one along both other axes.

The update advances every face by the circulation of the time-centered edge
fields, so the discrete divergence of B (and of D minus the tracked charge)
is preserved to round-off.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (SI, MaterialTensors, PhysicalConstants, axis_speed,
                   build_characteristic_matrices, eigendecompose_axis)
from .grp_edge import EdgeGrpInput, edge_frame, solve_edge_grp
from .stiff_source import KIND_CODES, SourceOperatorKind

log = logging.getLogger(__name__)

BOUNDARY_KINDS = ("periodic", "continuative")
LIMITERS = ("minmod", "none")
BACKENDS = ("auto", "numba", "numpy")


class DivergenceFailure(FloatingPointError):
    pass


@dataclass
class ZoneReconstruction:
    """Linear profile per zone, including one ghost zone on each side.

    ``packed`` is ``(Nx+2, Ny+2, Nz+2, 4, 6)``: the zone value followed by its
    x, y and z slopes, for each of the six components.  Padded index ``n`` is
    zone ``n - 1``.  ``values`` ``(6, ...)`` and ``slopes`` ``(3, 6, ...)``
    are component-first views.
    """

    packed: np.ndarray

    @classmethod
    def empty(cls, dims):
        return cls(np.empty(tuple(n + 2 for n in dims) + (4, 6)))

    @property
    def values(self):
        return np.moveaxis(self.packed[..., 0, :], -1, 0)

    @property
    def slopes(self):
        return np.moveaxis(self.packed[..., 1:, :], (3, 4), (0, 1))

    def interior(self):
        s = (slice(None), slice(1, -1), slice(1, -1), slice(1, -1))
        return self.values[s], self.slopes[(slice(None),) + s]


@dataclass
class StaggeredMesh:
    dims: tuple
    spacing: tuple
    d_faces: list
    b_faces: list
    materials: MaterialTensors
    origin: tuple = (0.0, 0.0, 0.0)
    time: float = 0.0
    boundary: tuple = ("periodic", "periodic", "periodic")
    limiter: str = "minmod"
    source_kind: Optional[SourceOperatorKind] = SourceOperatorKind.L_STABLE_AVERAGE
    rho_e: Optional[np.ndarray] = None
    rho_m: Optional[np.ndarray] = None
    backend: str = "auto"
    constants: PhysicalConstants = SI
    step_count: int = 0
    _pad_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.spacing = tuple(float(h) for h in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if min(self.spacing) <= 0:
            raise ValueError("spacing must be positive")
        self.boundary = tuple(self.boundary)
        for b in self.boundary:
            if b not in BOUNDARY_KINDS:
                raise ValueError(f"unknown boundary kind {b!r}")
        if self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.source_kind is not None:
            self.source_kind = SourceOperatorKind.parse(self.source_kind)
        self.d_faces = [np.asarray(f, dtype=float) for f in self.d_faces]
        self.b_faces = [np.asarray(f, dtype=float) for f in self.b_faces]
        for a in range(3):
            want = face_shape(self.dims, a)
            for f in (self.d_faces[a], self.b_faces[a]):
                if f.shape != want:
                    raise ValueError(f"face family {a} has shape {f.shape}, expected {want}")
        if self.materials.batch_shape != self.dims:
            raise ValueError("materials must carry one tensor per zone")
        if self.rho_e is None:
            self.rho_e = divergence(self.d_faces, self.spacing)
        if self.rho_m is None:
            self.rho_m = divergence(self.b_faces, self.spacing)

    @classmethod
    def from_arrays(cls, dims, extent, materials=None, **kw) -> "StaggeredMesh":
        """Empty (zero-field) mesh covering ``extent = ((x0, x1), (y0, y1), (z0, z1))``."""
        dims = tuple(int(n) for n in dims)
        spacing = tuple((hi - lo) / n for (lo, hi), n in zip(extent, dims))
        origin = tuple(lo for lo, _ in extent)
        consts = kw.get("constants", SI)
        if materials is None:
            materials = uniform_materials(MaterialTensors.vacuum(consts), dims)
        zeros = [np.zeros(face_shape(dims, a)) for a in range(3)]
        return cls(dims, spacing, zeros, [z.copy() for z in zeros], materials, origin=origin, **kw)

    @property
    def periodic(self):
        return tuple(b == "periodic" for b in self.boundary)

    @property
    def active_axes(self):
        return tuple(a for a in range(3) if self.dims[a] > 1)

    def copy(self) -> "StaggeredMesh":
        return dataclasses.replace(
            self,
            d_faces=[f.copy() for f in self.d_faces],
            b_faces=[f.copy() for f in self.b_faces],
            rho_e=self.rho_e.copy(), rho_m=self.rho_m.copy(),
            _pad_cache=self._pad_cache,
        )

    def coords(self, axis, where="center"):
        n, h, o = self.dims[axis], self.spacing[axis], self.origin[axis]
        if where == "center":
            return o + (np.arange(n) + 0.5) * h
        return o + np.arange(n + 1) * h

    def state_at_centers(self) -> np.ndarray:
        """Zone-centered values of all six components from the reconstruction."""
        vals, _ = reconstruct(self).interior()
        return vals.copy()


def face_shape(dims, axis):
    s = list(dims)
    s[axis] += 1
    return tuple(s)


def edge_shape(dims, axis):
    s = [n + 1 for n in dims]
    s[axis] = dims[axis]
    return tuple(s)


def uniform_materials(mat: MaterialTensors, dims) -> MaterialTensors:
    dims = tuple(dims)
    tile = lambda t: np.broadcast_to(np.asarray(t)[..., None, None, None], t.shape + dims).copy()
    return MaterialTensors(tile(mat.eps_inv), tile(mat.mu_inv),
                           np.full(dims, float(mat.sigma)), np.full(dims, float(mat.sigma_star)))


# ---------------------------------------------------------------------------
# ghost data
# ---------------------------------------------------------------------------

def _pad_indices(n, periodic, lo, hi, faces):
    idx = np.arange(lo, hi)
    if periodic:
        return np.mod(idx, n)
    return np.clip(idx, 0, n if faces else n - 1)


def _face_pad_maps(mesh, a, ng=2):
    key = ("facemaps", a, ng)
    maps = mesh._pad_cache.get(key)
    if maps is None:
        maps = []
        for ax in range(3):
            n = mesh.dims[ax]
            if ax == a:
                maps.append(_pad_indices(n, mesh.periodic[ax], -ng + 1, n + ng, True))
            else:
                maps.append(_pad_indices(n, mesh.periodic[ax], -ng, n + ng, False))
        mesh._pad_cache[key] = maps
    return maps


def _padded_stack(mesh):
    """All six face families padded by two on every axis, stacked ``(6, ...)``."""
    shape = (6,) + tuple(n + 4 for n in mesh.dims)
    out = np.empty(shape)
    for a in range(3):
        maps = mesh._pad_cache.get(("stackmaps", a))
        if maps is None:
            maps = []
            for ax in range(3):
                n = mesh.dims[ax]
                maps.append(_pad_indices(n, mesh.periodic[ax], -2, n + 2, ax == a))
            mesh._pad_cache[("stackmaps", a)] = maps
        m0, m1, m2 = maps
        for off, f in ((0, mesh.d_faces[a]), (3, mesh.b_faces[a])):
            out[off + a] = f.take(m0, 0).take(m1, 1).take(m2, 2)
    return out


def apply_boundaries(mesh: StaggeredMesh, ng: int = 2):
    """Padded copies of the face arrays: ``(d_padded, b_padded)``.

    Along its own axis a face family is padded to faces ``-ng+1 .. N+ng-1``;
    along the other axes to zones ``-ng .. N+ng-1``.  Periodic axes wrap,
    continuative axes repeat the outermost data.
    """
    out_d, out_b = [], []
    for a in range(3):
        m0, m1, m2 = _face_pad_maps(mesh, a, ng)
        out_d.append(mesh.d_faces[a].take(m0, 0).take(m1, 1).take(m2, 2))
        out_b.append(mesh.b_faces[a].take(m0, 0).take(m1, 1).take(m2, 2))
    return out_d, out_b


def padded_zone_field(mesh: StaggeredMesh, arr: np.ndarray, ng: int = 1) -> np.ndarray:
    """Pad a per-zone array (trailing 3 axes are zones) with ``ng`` ghost zones."""
    key = ("zones", ng)
    ix = mesh._pad_cache.get(key)
    if ix is None:
        ix = np.ix_(*[_pad_indices(mesh.dims[ax], mesh.periodic[ax], -ng, mesh.dims[ax] + ng, False)
                      for ax in range(3)])
        mesh._pad_cache[key] = ix
    return arr[(Ellipsis,) + ix]


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _sl(axis, s):
    out = [slice(None)] * 3
    out[axis] = s
    return tuple(out)


def _trim(arr, keep):
    return arr[tuple(slice(None) if ax in keep else slice(1, -1) for ax in range(3))]


def _reconstruct_family(p, axis, spacing, limiter):
    """Zone value and slopes of a normal component from padded faces ``p``.

    ``p`` covers faces -1..N+1 along ``axis`` and zones -2..N+1 elsewhere;
    results cover zones -1..N on every axis.
    """
    lo, hi = p[_sl(axis, slice(0, -1))], p[_sl(axis, slice(1, None))]
    value = _trim(0.5 * (lo + hi), (axis,))
    slopes = [None] * 3
    slopes[axis] = _trim((hi - lo) / spacing[axis], (axis,))
    for t in range(3):
        if t == axis:
            continue
        tr = []
        for f in (lo, hi):
            left = f[_sl(t, slice(1, -1))] - f[_sl(t, slice(0, -2))]
            right = f[_sl(t, slice(2, None))] - f[_sl(t, slice(1, -1))]
            tr.append(_minmod(left, right) if limiter == "minmod" else 0.5 * (left + right))
        slopes[t] = _trim(0.5 * (tr[0] + tr[1]) / spacing[t], (axis, t))
    return value, slopes


def reconstruct(mesh: StaggeredMesh, compiled: Optional[bool] = None) -> ZoneReconstruction:
    """Per-zone linear profiles for all six components (with ghost zones)."""
    if compiled is None:
        compiled = mesh.backend != "numpy"
    rec = ZoneReconstruction.empty(mesh.dims)
    if compiled:
        from ._kernels import reconstruct_zones
        reconstruct_zones(_padded_stack(mesh), np.asarray(mesh.spacing),
                          mesh.limiter == "minmod", rec.packed)
        return rec
    pd, pb = apply_boundaries(mesh)
    vals, slopes = rec.values, rec.slopes
    for a in range(3):
        for off, p in ((0, pd[a]), (3, pb[a])):
            v, s = _reconstruct_family(p, a, mesh.spacing, mesh.limiter)
            vals[off + a] = v
            for t in range(3):
                slopes[t, off + a] = s[t]
    return rec


# ---------------------------------------------------------------------------
# edge inputs and solves
# ---------------------------------------------------------------------------

def _edge_node_counts(mesh, axis):
    axes, _ = edge_frame(axis)
    counts = []
    for l in range(2):
        g = axes[l]
        n = mesh.dims[g]
        counts.append(n if mesh.periodic[g] else n + 1)
    counts.append(mesh.dims[axis])
    return axes, counts


def _complete_periodic(arr, mesh, axis):
    """Append the duplicate last node on periodic transverse axes."""
    axes, _ = edge_frame(axis)
    for g in axes[:2]:
        if mesh.periodic[g]:
            first = np.take(arr, [0], axis=arr.ndim - 3 + g)
            arr = np.concatenate([arr, first], axis=arr.ndim - 3 + g)
    return arr


def _fill_periodic(arr, mesh, axis):
    """Copy node 0 onto the duplicate last node along periodic transverse axes."""
    axes, _ = edge_frame(axis)
    for g in axes[:2]:
        if mesh.periodic[g]:
            dst = [slice(None)] * arr.ndim
            src = [slice(None)] * arr.ndim
            dst[arr.ndim - 3 + g] = -1
            src[arr.ndim - 3 + g] = 0
            arr[tuple(dst)] = arr[tuple(src)]
    return arr


def _quadrant_slices(mesh, axis):
    """Padded-zone index slices (global order) of the ru, lu, ld, rd zones."""
    axes, counts = _edge_node_counts(mesh, axis)
    out = []
    for dx, dy in ((1, 1), (0, 1), (0, 0), (1, 0)):
        sl = [None] * 3
        sl[axes[0]] = slice(dx, dx + counts[0])
        sl[axes[1]] = slice(dy, dy + counts[1])
        sl[axes[2]] = slice(1, 1 + counts[2])
        out.append((tuple(sl), dx, dy))
    return out


def gather_edge_inputs(mesh: StaggeredMesh, recon: ZoneReconstruction, axis) -> EdgeGrpInput:
    """Edge-local GRP input for every edge of the family along ``axis``.

    Batch shape is the global edge grid without periodic duplicates.  States,
    gradients and materials are expressed in the edge frame (``edge_frame``).
    """
    axes, perm = edge_frame(axis)
    pe = padded_zone_field(mesh, mesh.materials.eps_inv)
    pm = padded_zone_field(mesh, mesh.materials.mu_inv)
    ps = padded_zone_field(mesh, np.broadcast_to(mesh.materials.sigma, mesh.dims))
    pss = padded_zone_field(mesh, np.broadcast_to(mesh.materials.sigma_star, mesh.dims))
    hx, hy = 0.5 * mesh.spacing[axes[0]], 0.5 * mesh.spacing[axes[1]]
    states, grads, mats = [], [], []
    for sl, dx, dy in _quadrant_slices(mesh, axis):
        v = recon.values[(slice(None),) + sl]
        g = recon.slopes[(slice(None), slice(None)) + sl]
        ox = -hx if dx else hx
        oy = -hy if dy else hy
        u = v + ox * g[axes[0]] + oy * g[axes[1]]
        states.append(u[perm])
        grads.append(g[list(axes)][:, perm])
        mats.append(MaterialTensors(pe[(slice(None), slice(None)) + sl][list(axes)][:, list(axes)],
                                    pm[(slice(None), slice(None)) + sl][list(axes)][:, list(axes)],
                                    ps[sl], pss[sl], validate=False))
    edge_mat = MaterialTensors(
        sum(m.eps_inv for m in mats) / 4.0, sum(m.mu_inv for m in mats) / 4.0,
        sum(m.sigma for m in mats) / 4.0, sum(m.sigma_star for m in mats) / 4.0, validate=False)
    sx = np.max([axis_speed(m, 0) for m in mats], axis=0)
    sy = np.max([axis_speed(m, 1) for m in mats], axis=0)
    cm = build_characteristic_matrices(edge_mat)
    return EdgeGrpInput(*states, *grads, speeds=(-sx, sx, -sy, sy), matrices=cm,
                        eig_x=eigendecompose_axis(cm, 0), eig_y=eigendecompose_axis(cm, 1),
                        material=edge_mat)


def _edge_fields_numpy(mesh, recon, axis, dt):
    inp = gather_edge_inputs(mesh, recon, axis)
    out = solve_edge_grp(inp, dt, mesh.source_kind)
    axes, perm = edge_frame(axis)
    mat = inp.material
    u = out.u_star_half
    e = np.einsum("ij...,j...->i...", mat.eps_inv, u[:3])
    h = np.einsum("ij...,j...->i...", mat.mu_inv, u[3:])
    j, m = mat.sigma * e, mat.sigma_star * h
    res = []
    for f in (e, h, j, m):
        g = np.empty_like(f)
        g[list(axes)] = f
        res.append(_complete_periodic(g, mesh, axis))
    return res


def _diagonal_parts(mesh):
    key = ("diag_mats",)
    cached = mesh._pad_cache.get(key)
    if cached is not None and cached[0] is mesh.materials:
        return cached[1]
    mat = mesh.materials
    cols = [np.einsum("ii...->i...", mat.eps_inv), np.einsum("ii...->i...", mat.mu_inv),
            np.broadcast_to(mat.sigma, mesh.dims)[None], np.broadcast_to(mat.sigma_star, mesh.dims)[None],
            np.stack([axis_speed(mat, a) for a in range(3)])]
    packed = np.concatenate(cols, axis=0)
    parts = np.ascontiguousarray(np.moveaxis(padded_zone_field(mesh, packed), 0, -1))
    mesh._pad_cache[key] = (mat, parts)
    return parts


def _edge_fields_numba(mesh, recon, axis, dt):
    from ._kernels import edge_sweep
    packed_mat = _diagonal_parts(mesh)
    axes, counts = _edge_node_counts(mesh, axis)
    shape = [0, 0, 0]
    for l in range(3):
        shape[axes[l]] = counts[l]
    outs = [np.empty((3,) + edge_shape(mesh.dims, axis)) for _ in range(4)]
    edge_sweep(recon.packed, packed_mat,
               np.asarray(axes, dtype=np.int64), np.asarray(mesh.spacing), np.asarray(shape, dtype=np.int64),
               float(dt), KIND_CODES[mesh.source_kind], *outs)
    return [_fill_periodic(o, mesh, axis) for o in outs]


def _materials_diagonal(mesh):
    cached = mesh._pad_cache.get("is_diag")
    if cached is not None and cached[0] is mesh.materials:
        return cached[1]
    flag = mesh.materials.is_diagonal
    mesh._pad_cache["is_diag"] = (mesh.materials, flag)
    return flag


def _use_numba(mesh):
    if mesh.backend == "numpy":
        return False
    if mesh.backend == "numba":
        if not _materials_diagonal(mesh):
            raise ValueError("the numba backend needs diagonal material tensors")
        return True
    return _materials_diagonal(mesh)


def edge_fields(mesh: StaggeredMesh, dt: float, recon: Optional[ZoneReconstruction] = None):
    """Time-centered ``(E, H, J, M)`` on every edge family.

    Returns a list indexed by edge axis; each entry holds four ``(3, ...)``
    arrays on that family's edge grid.
    """
    if recon is None:
        recon = reconstruct(mesh)
    fn = _edge_fields_numba if _use_numba(mesh) else _edge_fields_numpy
    return [fn(mesh, recon, a, dt) for a in range(3)]


# ---------------------------------------------------------------------------
# discrete operators
# ---------------------------------------------------------------------------

def _diff(arr, axis):
    return np.diff(arr, axis=axis)


def face_circulation(edge_vals, spacing):
    """Discrete curl of an edge-collocated vector field onto the three face families.

    ``edge_vals[a]`` holds the ``a`` component on edges along ``a``.
    """
    out = []
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        out.append(_diff(edge_vals[c], b) / spacing[b] - _diff(edge_vals[b], c) / spacing[c])
    return out


def face_average_from_edges(comp_on_edges, axis):
    """Average the ``axis`` component over the four edges bounding each ``axis`` face.

    ``comp_on_edges[e]`` is that component on the edge family along ``e``.
    """
    b, c = (axis + 1) % 3, (axis + 2) % 3
    fb = comp_on_edges[b]  # edges along b bound the face on its c-sides
    fc = comp_on_edges[c]
    lo_c = fb[_sl(c, slice(0, -1))]
    hi_c = fb[_sl(c, slice(1, None))]
    lo_b = fc[_sl(b, slice(0, -1))]
    hi_b = fc[_sl(b, slice(1, None))]
    return 0.25 * (lo_c + hi_c + lo_b + hi_b)


def divergence(faces, spacing) -> np.ndarray:
    """Zone divergence: sum of outward face fluxes over the zone volume."""
    return sum(_diff(faces[a], a) / spacing[a] for a in range(3))


def cfl_timestep(mesh: StaggeredMesh, cfl: float) -> float:
    if not 0 < cfl <= 1:
        raise ValueError("cfl must lie in (0, 1]")
    rate = np.zeros(mesh.dims)
    for a in mesh.active_axes:
        rate = rate + axis_speed(mesh.materials, a) / mesh.spacing[a]
    peak = float(np.max(rate))
    if peak <= 0:
        raise ValueError("mesh has no active dimension")
    return cfl / peak


def _check_finite(mesh, faces, name):
    for a, f in enumerate(faces):
        bad = ~np.isfinite(f)
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise DivergenceFailure(
                f"non-finite {name}{'xyz'[a]} on face {idx} at step {mesh.step_count + 1}")


def update_step(mesh: StaggeredMesh, dt: float) -> StaggeredMesh:
    """Advance every face by one step of size ``dt`` and return a new mesh."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    fields = edge_fields(mesh, dt)
    e = [fields[a][0][a] for a in range(3)]
    h = [fields[a][1][a] for a in range(3)]
    curl_e = face_circulation(e, mesh.spacing)
    curl_h = face_circulation(h, mesh.spacing)
    j_face = [face_average_from_edges([fields[x][2][a] for x in range(3)], a) for a in range(3)]
    m_face = [face_average_from_edges([fields[x][3][a] for x in range(3)], a) for a in range(3)]

    new = mesh.copy()
    new.d_faces = [mesh.d_faces[a] + dt * (curl_h[a] - j_face[a]) for a in range(3)]
    new.b_faces = [mesh.b_faces[a] - dt * (curl_e[a] + m_face[a]) for a in range(3)]
    _check_finite(mesh, new.d_faces, "D")
    _check_finite(mesh, new.b_faces, "B")
    new.rho_e = mesh.rho_e - dt * divergence(j_face, mesh.spacing)
    new.rho_m = mesh.rho_m - dt * divergence(m_face, mesh.spacing)
    new.time = mesh.time + dt
    new.step_count = mesh.step_count + 1
    return new


@dataclass
class DivergenceReport:
    max_div_b: float
    max_div_d: float
    div_b: np.ndarray
    div_d: np.ndarray
    rel_div_b: float
    rel_div_d: float


def divergence_diagnostics(mesh: StaggeredMesh) -> DivergenceReport:
    """Constraint residuals ``div B - rho_M`` and ``div D - rho_E`` per zone.

    The relative numbers scale by the smallest spacing over the largest face
    value, i.e. they compare a face-difference residual with the face data.
    """
    div_b = divergence(mesh.b_faces, mesh.spacing) - mesh.rho_m
    div_d = divergence(mesh.d_faces, mesh.spacing) - mesh.rho_e
    h = min(mesh.spacing[a] for a in mesh.active_axes) if mesh.active_axes else min(mesh.spacing)
    nb = max(max(float(np.max(np.abs(f))) for f in mesh.b_faces), 1e-300)
    nd = max(max(float(np.max(np.abs(f))) for f in mesh.d_faces), 1e-300)
    mb, md = float(np.max(np.abs(div_b))), float(np.max(np.abs(div_d)))
    return DivergenceReport(mb, md, div_b, div_d, mb * h / nb, md * h / nd)


def advance(mesh: StaggeredMesh, t_final: float, cfl: float, max_steps: int | None = None,
            callback=None, post_step=None) -> StaggeredMesh:
    """Step until ``t_final`` (the last step is shortened to land on it).

    ``post_step(mesh)`` may modify the new mesh in place (drivers, sources);
    ``callback(mesh)`` is called after every step for diagnostics.
    """
    dt_max = cfl_timestep(mesh, cfl)
    steps = 0
    while mesh.time < t_final * (1 - 1e-14):
        if max_steps is not None and steps >= max_steps:
            break
        dt = min(dt_max, t_final - mesh.time)
        mesh = update_step(mesh, dt)
        if post_step is not None:
            post_step(mesh)
        if callback is not None:
            callback(mesh)
        steps += 1
    return mesh
