"""Initial data, exact solutions and error norms for the verification problems.

Face data are always built as circulations of a vector potential around each
face (edge line-averages by Gauss-Legendre quadrature), using the same
discrete curl as the update.  Initial data are therefore divergence-free to
round-off whatever the profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import NORMALIZED, SI, MaterialTensors, PhysicalConstants
from .mesh import (StaggeredMesh, divergence, face_circulation, uniform_materials)

PROBLEM_KINDS = ("plane_wave", "gaussian_pulse_disk", "beam_refraction", "beam_tir",
                 "beam_conductor", "skin_depth_1d", "random_field")


class ProblemError(ValueError):
    pass


# ---------------------------------------------------------------------------
# vector-potential machinery
# ---------------------------------------------------------------------------

def edge_line_averages(mesh: StaggeredMesh, potential: Callable, t: float = 0.0,
                       order: int = 6):
    """Average of ``A_a`` along every edge of family ``a``.

    ``potential(x, y, z, t)`` returns a length-3 sequence of arrays
    broadcastable to the coordinate arrays.
    """
    xg, wg = np.polynomial.legendre.leggauss(order)
    out = []
    for a in range(3):
        coords = []
        for ax in range(3):
            if ax == a:
                coords.append(mesh.coords(ax, "center"))
            else:
                coords.append(mesh.coords(ax, "node"))
        acc = 0.0
        for xi, wi in zip(xg, wg):
            c = list(coords)
            c[a] = coords[a] + 0.5 * xi * mesh.spacing[a]
            grid = np.meshgrid(*c, indexing="ij", sparse=True)
            acc = acc + 0.5 * wi * np.broadcast_to(potential(*grid, t)[a], tuple(len(v) for v in c))
        acc = np.array(acc, dtype=float)
        # periodic duplicates are exact copies of the first node
        for ax in range(3):
            if ax != a and mesh.periodic[ax]:
                idx = [slice(None)] * 3
                idx[ax] = -1
                src = [slice(None)] * 3
                src[ax] = 0
                acc[tuple(idx)] = acc[tuple(src)]
        out.append(acc)
    return out


def faces_from_potential(mesh: StaggeredMesh, potential: Callable, t: float = 0.0, order: int = 6):
    return face_circulation(edge_line_averages(mesh, potential, t, order), mesh.spacing)


def set_fields_from_potentials(mesh: StaggeredMesh, a_d: Optional[Callable], a_b: Optional[Callable],
                               t: float = 0.0) -> StaggeredMesh:
    zeros = [np.zeros_like(f) for f in mesh.d_faces]
    mesh.d_faces = faces_from_potential(mesh, a_d, t) if a_d is not None else zeros
    mesh.b_faces = faces_from_potential(mesh, a_b, t) if a_b is not None else [z.copy() for z in zeros]
    mesh.rho_e = divergence(mesh.d_faces, mesh.spacing)
    mesh.rho_m = divergence(mesh.b_faces, mesh.spacing)
    return mesh


def zone_materials(mesh_dims, extent, background: MaterialTensors, regions=()) -> MaterialTensors:
    """Per-zone materials; ``regions`` is a sequence of ``(predicate(x, y, z), material)``
    applied in order to zone centers (later regions win)."""
    dims = tuple(mesh_dims)
    mats = uniform_materials(background, dims)
    centers = [lo + (np.arange(n) + 0.5) * (hi - lo) / n for (lo, hi), n in zip(extent, dims)]
    x, y, z = np.meshgrid(*centers, indexing="ij")
    eps, mu = mats.eps_inv.copy(), mats.mu_inv.copy()
    sig, sigs = np.array(mats.sigma, dtype=float), np.array(mats.sigma_star, dtype=float)
    for pred, mat in regions:
        mask = np.asarray(pred(x, y, z), dtype=bool)
        eps[:, :, mask] = np.asarray(mat.eps_inv)[..., None]
        mu[:, :, mask] = np.asarray(mat.mu_inv)[..., None]
        sig[mask] = float(mat.sigma)
        sigs[mask] = float(mat.sigma_star)
    return MaterialTensors(eps, mu, sig, sigs)


def _constants(units: str) -> PhysicalConstants:
    if units == "si":
        return SI
    if units == "normalized":
        return NORMALIZED
    raise ProblemError(f"unknown unit system {units!r}")


# ---------------------------------------------------------------------------
# plane wave
# ---------------------------------------------------------------------------

@dataclass
class PlaneWaveSpec:
    n: int = 16
    length: float = 1.0
    b0: float = 1.0
    cfl: float = 0.45
    t_final: float = 3.5e-9
    limiter: str = "none"
    units: str = "si"
    boundary: str = "periodic"


class PlaneWave:
    """Vacuum plane wave travelling along the (1, 1) diagonal of a periodic square."""

    def __init__(self, spec: PlaneWaveSpec):
        if spec.boundary != "periodic":
            raise ProblemError("the plane-wave problem needs periodic boundaries")
        self.spec = spec
        self.constants = _constants(spec.units)
        c = self.constants.c
        self.k = 2 * np.pi / spec.length * np.array([1.0, 1.0])
        self.kmag = float(np.hypot(*self.k))
        self.omega = c * self.kmag
        self.d0 = self.constants.eps0 * c * spec.b0
        self.khat = self.k / self.kmag
        # z x khat
        self.dhat = np.array([-self.khat[1], self.khat[0], 0.0])
        self.lo = -0.5 * spec.length

    def phase(self, x, y, t):
        return self.k[0] * x + self.k[1] * y - self.omega * t

    def oracle(self, x, y, z, t):
        cph = np.cos(self.phase(x, y, t))
        out = np.zeros((6,) + np.broadcast(x, y, z).shape)
        out[0] = self.d0 * self.dhat[0] * cph
        out[1] = self.d0 * self.dhat[1] * cph
        out[5] = self.spec.b0 * cph
        return out

    def potential_b(self, x, y, z, t):
        s = self.spec.b0 * np.sin(self.phase(x, y, t)) / self.kmag**2
        # (z x k) = (-ky, kx, 0)
        return (-self.k[1] * s, self.k[0] * s, 0.0)

    def potential_d(self, x, y, z, t):
        return (0.0, 0.0, -self.d0 / self.kmag * np.sin(self.phase(x, y, t)))

    def mesh(self, **kw) -> StaggeredMesh:
        n, L = self.spec.n, self.spec.length
        h = L / n
        extent = ((self.lo, self.lo + L), (self.lo, self.lo + L), (0.0, h))
        m = StaggeredMesh.from_arrays((n, n, 1), extent, limiter=self.spec.limiter,
                                      constants=self.constants, **kw)
        return set_fields_from_potentials(m, self.potential_d, self.potential_b)

    def exact_faces(self, mesh: StaggeredMesh, t: float):
        d = faces_from_potential(mesh, self.potential_d, t)
        b = faces_from_potential(mesh, self.potential_b, t)
        return d, b


def init_plane_wave(spec: PlaneWaveSpec | None = None, **kw):
    prob = PlaneWave(spec or PlaneWaveSpec())
    return prob.mesh(**kw), prob.oracle


# ---------------------------------------------------------------------------
# compact pulse and refractive disk
# ---------------------------------------------------------------------------

def _bump(r2, radius):
    q = np.clip(1.0 - r2 / radius**2, 0.0, None)
    return q**3


@dataclass
class PulseSpec:
    n: int = 120
    half_width: float = 7.0
    disk_radius: float = 0.75
    disk_index: float = 3.0
    center: tuple = (-3.0, 0.0)
    width: float = 0.5
    b0: float = 1.0
    cfl: float = 0.45
    t_final: float = 2.33e-8
    limiter: str = "minmod"
    units: str = "si"


class GaussianPulseDisk:
    """Compact Gaussian pulse moving in +x toward a dielectric disk at the origin."""

    def __init__(self, spec: PulseSpec):
        self.spec = spec
        self.constants = _constants(spec.units)
        self.support = 4.0 * spec.width

    def profile(self, x, y):
        s = self.spec
        r2 = (x - s.center[0]) ** 2 + (y - s.center[1]) ** 2
        return s.b0 * s.width * np.exp(-0.5 * r2 / s.width**2) * _bump(r2, self.support)

    def potential_b(self, x, y, z, t):
        return (0.0, -self.profile(x, y), 0.0)

    def potential_d(self, x, y, z, t):
        c = self.constants.c
        return (0.0, 0.0, self.constants.eps0 * c * self.profile(x, y))

    def mesh(self, **kw) -> StaggeredMesh:
        s = self.spec
        L = 2 * s.half_width
        h = L / s.n
        extent = ((-s.half_width, s.half_width), (-s.half_width, s.half_width), (0.0, h))
        disk = MaterialTensors.isotropic(eps_r=s.disk_index**2, constants=self.constants)
        mats = zone_materials((s.n, s.n, 1), extent, MaterialTensors.vacuum(self.constants),
                              [(lambda x, y, z: x**2 + y**2 < s.disk_radius**2, disk)])
        m = StaggeredMesh.from_arrays((s.n, s.n, 1), extent, materials=mats, limiter=s.limiter,
                                      boundary=("continuative", "continuative", "periodic"),
                                      constants=self.constants, **kw)
        return set_fields_from_potentials(m, self.potential_d, self.potential_b)


def init_gaussian_pulse_disk(spec: PulseSpec | None = None, **kw) -> StaggeredMesh:
    return GaussianPulseDisk(spec or PulseSpec()).mesh(**kw)


# ---------------------------------------------------------------------------
# beams
# ---------------------------------------------------------------------------

@dataclass
class BeamSpec:
    """Compact beam launched toward a planar interface at ``x = interface_x``.

    Lengths in metres.  ``medium_eps`` is the relative permittivity on the
    launch side, ``far_eps``/``far_sigma`` describe the material past the
    interface.
    """

    kind: str = "beam_refraction"
    dims: tuple = (325, 238)
    extent: tuple = ((-5e-6, 8e-6), (-2.5e-6, 7e-6))
    wavelength: float = 0.8e-6
    waist: float = 1.0e-6
    length: float = 1.5e-6
    angle_deg: float = 45.0
    start: tuple = (-3.0e-6, -1.0e-6)
    interface_x: float = 0.0
    medium_eps: float = 1.0
    far_eps: float = 2.25
    far_sigma: float = 0.0
    far_is_left: bool = False
    b0: float = 1.0
    cfl: float = 0.45
    t_final: float = 4.0e-14
    limiter: str = "minmod"
    units: str = "si"

    @classmethod
    def refraction(cls, **kw):
        return cls(**kw)

    @classmethod
    def tir(cls, **kw):
        base = dict(kind="beam_tir", dims=(350, 425), extent=((-10e-6, 4e-6), (-2e-6, 15e-6)),
                    wavelength=1.0e-6, waist=1.5e-6, length=2.0e-6, start=(-6e-6, 0.0),
                    medium_eps=4.0, far_eps=1.0, cfl=0.45, t_final=9.0e-14)
        base.update(kw)
        return cls(**base)

    @classmethod
    def conductor(cls, **kw):
        base = dict(kind="beam_conductor", dims=(250, 250), extent=((-8e-6, 2e-6), (-3e-6, 7e-6)),
                    wavelength=0.8e-6, waist=1.0e-6, length=1.5e-6, start=(-5e-6, -1.5e-6),
                    far_eps=1.0, far_sigma=5.9e7, cfl=0.40, t_final=5.0e-14)
        base.update(kw)
        return cls(**base)


class Beam:
    def __init__(self, spec: BeamSpec):
        self.spec = spec
        self.constants = _constants(spec.units)
        th = math.radians(spec.angle_deg)
        self.khat = np.array([math.cos(th), math.sin(th)])
        self.that = np.array([-math.sin(th), math.cos(th)])
        self.n_launch = math.sqrt(spec.medium_eps)
        self.k = 2 * np.pi / spec.wavelength * self.n_launch
        self.r_par = 2.0 * spec.length
        self.r_perp = 2.5 * spec.waist

    def _local(self, x, y):
        dx, dy = x - self.spec.start[0], y - self.spec.start[1]
        return dx * self.khat[0] + dy * self.khat[1], dx * self.that[0] + dy * self.that[1]

    def envelope(self, x, y):
        s = self.spec
        sp, st = self._local(x, y)
        g = np.exp(-0.5 * (sp / s.length) ** 2 - 0.5 * (st / s.waist) ** 2)
        return g * _bump(sp**2, self.r_par) * _bump(st**2, self.r_perp)

    def _q(self, x, y):
        sp, _ = self._local(x, y)
        return -(self.spec.b0 / self.k) * self.envelope(x, y) * np.sin(self.k * sp)

    def potential_b(self, x, y, z, t):
        q = self._q(x, y)
        # q (khat x z) = q (ky, -kx, 0)
        return (q * self.khat[1], -q * self.khat[0], 0.0)

    def potential_d(self, x, y, z, t):
        c = self.constants.c
        return (0.0, 0.0, self.n_launch * self.constants.eps0 * c * self._q(x, y))

    def materials(self, dims3, extent3) -> MaterialTensors:
        s = self.spec
        launch = MaterialTensors.isotropic(eps_r=s.medium_eps, constants=self.constants)
        far = MaterialTensors.isotropic(eps_r=s.far_eps, sigma=s.far_sigma, constants=self.constants)
        if s.far_is_left:
            pred = lambda x, y, z: x < s.interface_x
        else:
            pred = lambda x, y, z: x >= s.interface_x
        return zone_materials(dims3, extent3, launch, [(pred, far)])

    def mesh(self, **kw) -> StaggeredMesh:
        s = self.spec
        nx, ny = s.dims
        h = (s.extent[0][1] - s.extent[0][0]) / nx
        extent3 = (tuple(s.extent[0]), tuple(s.extent[1]), (0.0, h))
        dims3 = (nx, ny, 1)
        m = StaggeredMesh.from_arrays(dims3, extent3, materials=self.materials(dims3, extent3),
                                      limiter=s.limiter,
                                      boundary=("continuative", "continuative", "periodic"),
                                      constants=self.constants, **kw)
        return set_fields_from_potentials(m, self.potential_d, self.potential_b)


def init_beam_problems(spec: BeamSpec | None = None, **kw) -> StaggeredMesh:
    return Beam(spec or BeamSpec()).mesh(**kw)


# ---------------------------------------------------------------------------
# lossy-medium skin depth
# ---------------------------------------------------------------------------

SKIN_PRESETS = {
    "carbon": dict(sigma=2.0e3, frequency=1.679e13, cfl=0.90, t_final=4.76e-13),
    "copper": dict(sigma=5.9e7, frequency=1.0e13, cfl=0.75, t_final=4.0e-13),
}


@dataclass(frozen=True)
class AnalyticEnvelope:
    alpha: float
    delta: float
    omega: float
    beta: float

    @classmethod
    def lossy(cls, sigma: float, frequency: float, eps_r: float = 1.0, mu_r: float = 1.0,
              constants: PhysicalConstants = SI) -> "AnalyticEnvelope":
        eps, mu = eps_r * constants.eps0, mu_r * constants.mu0
        w = 2 * np.pi * frequency
        ratio = sigma / (eps * w)
        root = math.sqrt(1.0 + ratio**2)
        alpha = w * math.sqrt(mu * eps / 2.0) * math.sqrt(root - 1.0)
        beta = w * math.sqrt(mu * eps / 2.0) * math.sqrt(root + 1.0)
        delta = math.inf if alpha == 0 else 1.0 / alpha
        return cls(alpha, delta, w, beta)

    def __call__(self, r, a0: float = 1.0):
        return a0 * np.exp(-self.alpha * np.asarray(r, dtype=float))


@dataclass
class SkinDepthSpec:
    material: str = "carbon"
    sigma: float = 2.0e3
    frequency: float = 1.679e13
    n_zones: int = 100
    n_delta: float = 10.0
    cfl: float = 0.90
    t_final: float = 4.76e-13
    e0: float = 1.0
    drive_zones: int = 2
    fit_max_delta: float = 8.0
    init: str = "exact"
    source: str = "l_stable_average"
    limiter: str = "minmod"

    @classmethod
    def preset(cls, name: str, **kw) -> "SkinDepthSpec":
        if name not in SKIN_PRESETS:
            raise ProblemError(f"unknown skin-depth material {name!r}")
        base = dict(SKIN_PRESETS[name], material=name)
        base.update(kw)
        return cls(**base)


class SkinDepth1D:
    """Time-harmonic wave in a uniform conductor along x (fields Ey, Bz)."""

    def __init__(self, spec: SkinDepthSpec):
        self.spec = spec
        self.constants = SI
        self.env = AnalyticEnvelope.lossy(spec.sigma, spec.frequency, constants=SI)
        eps, mu = SI.eps0, SI.mu0
        w = self.env.omega
        self.kc = complex(np.sqrt(mu * eps * w**2 * (1 + 1j * spec.sigma / (eps * w))))
        self.length = spec.n_delta * self.env.delta

    def _wave(self, x, t):
        return np.exp(1j * (self.kc * x - self.env.omega * t))

    def potential_d(self, x, y, z, t):
        # Dy = -d/dx A_z
        val = -(SI.eps0 * self.spec.e0 / (1j * self.kc)) * self._wave(x, t)
        return (0.0, 0.0, np.real(val) + 0.0 * y)

    def potential_b(self, x, y, z, t):
        # Bz = d/dx A_y with Bz = k E / omega
        val = (self.spec.e0 / (1j * self.env.omega)) * self._wave(x, t)
        return (0.0, np.real(val) + 0.0 * y, 0.0)

    def ey(self, x, t):
        return np.real(self.spec.e0 * self._wave(x, t))

    def mesh(self, **kw) -> StaggeredMesh:
        s = self.spec
        h = self.length / s.n_zones
        extent = ((0.0, self.length), (0.0, h), (0.0, h))
        mat = MaterialTensors.isotropic(sigma=s.sigma)
        m = StaggeredMesh.from_arrays((s.n_zones, 1, 1), extent,
                                      materials=uniform_materials(mat, (s.n_zones, 1, 1)),
                                      boundary=("continuative", "periodic", "periodic"),
                                      source_kind=None if s.source == "none" else s.source,
                                      limiter=s.limiter, **kw)
        if s.init == "exact":
            set_fields_from_potentials(m, self.potential_d, self.potential_b)
        elif s.init != "zero":
            raise ProblemError(f"unknown skin-depth init {s.init!r}")
        return m

    def drive(self, mesh: StaggeredMesh) -> None:
        """Overwrite the driver strip with exact data at the mesh time.

        The potentials depend on x only, so the face averages of the strip
        are node differences of the potential.
        """
        k = self.spec.drive_zones
        xn = mesh.coords(0, "node")[:k + 1]
        h = mesh.spacing[0]
        az = self.potential_d(xn, 0.0, 0.0, mesh.time)[2]
        ay = self.potential_b(xn, 0.0, 0.0, mesh.time)[1]
        mesh.d_faces[1][:k] = (-np.diff(az) / h)[:, None, None]
        mesh.b_faces[2][:k] = (np.diff(ay) / h)[:, None, None]

    def envelope_oracle(self, r, a0: float = 1.0):
        return self.env(r, a0)


def init_skin_depth_1d(spec: SkinDepthSpec | None = None, **kw):
    prob = SkinDepth1D(spec or SkinDepthSpec())
    return prob.mesh(**kw), prob.envelope_oracle


# ---------------------------------------------------------------------------
# random constraint-clean data
# ---------------------------------------------------------------------------

def init_random_field(dims=(64, 64, 1), seed: int = 0, units: str = "normalized",
                      **kw) -> StaggeredMesh:
    """Periodic mesh with face data equal to discrete curls of random edge potentials."""
    rng = np.random.default_rng(seed)
    consts = _constants(units)
    extent = tuple((0.0, n / max(dims)) for n in dims)
    m = StaggeredMesh.from_arrays(dims, extent, constants=consts, **kw)

    def random_edges():
        out = []
        for a in range(3):
            shape = [n + 1 for n in dims]
            shape[a] = dims[a]
            core = rng.normal(size=tuple(dims))
            idx = np.ix_(*[np.arange(s) % dims[x] for x, s in enumerate(shape)])
            out.append(core[idx])
        return out

    scale_d = consts.eps0 * consts.c
    d_edges = [scale_d * e for e in random_edges()]
    m.d_faces = face_circulation(d_edges, m.spacing)
    m.b_faces = face_circulation(random_edges(), m.spacing)
    m.rho_e = divergence(m.d_faces, m.spacing)
    m.rho_m = divergence(m.b_faces, m.spacing)
    return m


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _unique_faces(mesh: StaggeredMesh, arr: np.ndarray, axis: int) -> np.ndarray:
    if mesh.periodic[axis]:
        sl = [slice(None)] * 3
        sl[axis] = slice(0, -1)
        return arr[tuple(sl)]
    return arr


COMPONENT_INDEX = {"Dx": 0, "Dy": 1, "Dz": 2, "Bx": 3, "By": 4, "Bz": 5}


def error_norms(mesh: StaggeredMesh, exact_faces, component: str):
    """(L1, Linf) of a face family against exact face averages.

    ``exact_faces`` is ``(d_faces, b_faces)``; L1 is the mean absolute error
    over distinct faces.
    """
    q = COMPONENT_INDEX[component]
    axis = q % 3
    num = (mesh.d_faces if q < 3 else mesh.b_faces)[axis]
    ref = (exact_faces[0] if q < 3 else exact_faces[1])[axis]
    err = np.abs(_unique_faces(mesh, num, axis) - _unique_faces(mesh, ref, axis)).ravel()
    return float(np.sum(err) / err.size), float(np.max(err))


def energy_density(mesh: StaggeredMesh) -> np.ndarray:
    """Zone-centered ``(E.D + H.B) / 2`` from the reconstruction."""
    u = mesh.state_at_centers()
    e = np.einsum("ij...,j...->i...", mesh.materials.eps_inv, u[:3])
    h = np.einsum("ij...,j...->i...", mesh.materials.mu_inv, u[3:])
    return 0.5 * (np.sum(e * u[:3], axis=0) + np.sum(h * u[3:], axis=0))


def poynting(mesh: StaggeredMesh) -> np.ndarray:
    """Zone-centered Poynting vector ``E x H``, shape ``(3, Nx, Ny, Nz)``."""
    u = mesh.state_at_centers()
    e = np.einsum("ij...,j...->i...", mesh.materials.eps_inv, u[:3])
    h = np.einsum("ij...,j...->i...", mesh.materials.mu_inv, u[3:])
    return np.cross(e, h, axis=0)
