"""Config-driven runs: problem construction, stepping and artifact output."""
from __future__ import annotations

import dataclasses
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .io import DivergenceLog, save_state, write_csv_snapshot, write_manifest, write_vtk
from .mesh import StaggeredMesh, cfl_timestep, update_step
from .problems import (Beam, BeamSpec, GaussianPulseDisk, PlaneWave, PlaneWaveSpec, PulseSpec,
                       SkinDepth1D, SkinDepthSpec, error_norms, init_random_field)

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "manifest/1"


@dataclass
class Problem:
    kind: str
    mesh: StaggeredMesh
    post_step: Optional[Callable] = None
    exact_faces: Optional[Callable] = None
    info: dict = field(default_factory=dict)


def _source(cfg: RunConfig):
    return None if cfg.source.kind == "none" else cfg.source.kind


def _extent2(cfg: RunConfig):
    ext = cfg.mesh.extent
    return None if ext is None else tuple(ext[:2])


def _width(cfg: RunConfig, default: float) -> float:
    ext = cfg.mesh.extent
    if ext is None:
        return default
    (x0, x1), (y0, y1) = ext[0], ext[1] if len(ext) > 1 else ext[0]
    if not np.isclose(x1 - x0, y1 - y0):
        raise ConfigError(f"{cfg.problem.kind} needs a square extent")
    return x1 - x0


def build_problem(cfg: RunConfig) -> Problem:
    p, m, t = cfg.problem, cfg.mesh, cfg.time
    kw = dict(source_kind=_source(cfg), backend=m.backend)
    units = p.units or ("normalized" if p.kind == "random_field" else "si")
    if p.kind == "plane_wave":
        spec = PlaneWaveSpec(n=m.dims[0], length=_width(cfg, 1.0), b0=p.amplitude, cfl=t.cfl,
                             t_final=t.final_time, limiter=m.limiter, units=units)
        prob = PlaneWave(spec)
        out = Problem(p.kind, prob.mesh(**kw), exact_faces=prob.exact_faces,
                      info=dataclasses.asdict(spec))
    elif p.kind == "gaussian_pulse_disk":
        spec = PulseSpec(n=m.dims[0], half_width=0.5 * _width(cfg, 14.0), b0=p.amplitude,
                         cfl=t.cfl, t_final=t.final_time, limiter=m.limiter, units=units)
        out = Problem(p.kind, GaussianPulseDisk(spec).mesh(**kw), info=dataclasses.asdict(spec))
    elif p.kind.startswith("beam_"):
        preset = {"beam_refraction": BeamSpec.refraction, "beam_tir": BeamSpec.tir,
                  "beam_conductor": BeamSpec.conductor}[p.kind]
        over = dict(dims=m.dims[:2], b0=p.amplitude, cfl=t.cfl, t_final=t.final_time,
                    limiter=m.limiter, units=units)
        if _extent2(cfg) is not None:
            over["extent"] = _extent2(cfg)
        if p.wavelength is not None:
            over["wavelength"] = p.wavelength
        if p.angle is not None:
            over["angle_deg"] = p.angle
        if p.sigma is not None:
            over["far_sigma"] = p.sigma
        spec = preset(**over)
        out = Problem(p.kind, Beam(spec).mesh(**kw), info=dataclasses.asdict(spec))
    elif p.kind == "skin_depth_1d":
        spec = SkinDepthSpec.preset(p.material, sigma=p.sigma, frequency=p.frequency,
                                    n_zones=m.dims[0], cfl=t.cfl, t_final=t.final_time,
                                    e0=p.amplitude, limiter=m.limiter,
                                    source=cfg.source.kind)
        prob = SkinDepth1D(spec)
        out = Problem(p.kind, prob.mesh(backend=m.backend), post_step=prob.drive,
                      info=dict(dataclasses.asdict(spec), delta=prob.env.delta))
    elif p.kind == "random_field":
        mesh = init_random_field(m.dims, seed=p.seed, units=units, limiter=m.limiter, **kw)
        out = Problem(p.kind, mesh, info=dict(seed=p.seed, units=units))
    else:  # pragma: no cover - the parser rejects unknown kinds
        raise ConfigError(f"unknown problem kind {p.kind!r}")
    if m.boundary is not None and tuple(m.boundary) != out.mesh.boundary:
        out.mesh = dataclasses.replace(out.mesh, boundary=tuple(m.boundary), _pad_cache={})
    return out


@dataclass
class RunResult:
    mesh: StaggeredMesh
    steps: int
    wall_time: float
    out_dir: Path
    summary: dict


def _write_snapshot(mesh, out_dir: Path, formats, tag: str):
    written = []
    if "csv" in formats:
        written.append(write_csv_snapshot(mesh, out_dir / f"fields_{tag}.csv"))
    if "vtk" in formats:
        written.append(write_vtk(mesh, out_dir / f"fields_{tag}.vtk"))
    if "npz" in formats:
        written.append(save_state(mesh, out_dir / f"state_{tag}.npz"))
    return [p.name for p in written]


def set_threads(n: Optional[int]) -> Optional[int]:
    if n is None:
        return None
    if n < 1:
        raise ConfigError("--threads must be at least 1")
    import numba
    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n


def run(cfg: RunConfig, out_dir=None, threads: Optional[int] = None,
        config_text: Optional[str] = None) -> RunResult:
    """Execute a configured run and write snapshots, diagnostics and a manifest.

    Raises ``DivergenceFailure`` if the solution stops being finite.
    """
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    used_threads = set_threads(threads)
    prob = build_problem(cfg)
    mesh = prob.mesh
    fmts, cadence = cfg.output.formats, cfg.output.cadence
    t_final = cfg.time.final_time
    files = _write_snapshot(mesh, out, fmts, f"{mesh.step_count:06d}")
    t0 = time.perf_counter()
    with DivergenceLog(out / "divergence.csv") as dlog:
        final = dlog.record(mesh)
        if t_final > 0:
            dt_max = cfl_timestep(mesh, cfg.time.cfl)
            while mesh.time < t_final * (1 - 1e-14):
                if cfg.time.max_steps is not None and mesh.step_count >= cfg.time.max_steps:
                    break
                mesh = update_step(mesh, min(dt_max, t_final - mesh.time))
                if prob.post_step is not None:
                    prob.post_step(mesh)
                final = dlog.record(mesh)
                if cadence and mesh.step_count % cadence == 0:
                    files += _write_snapshot(mesh, out, fmts, f"{mesh.step_count:06d}")
            tag = f"{mesh.step_count:06d}"
            if not (cadence and mesh.step_count % cadence == 0):
                files += _write_snapshot(mesh, out, fmts, tag)
    wall = time.perf_counter() - t0
    save_state(mesh, out / "state_final.npz")
    summary = dict(final_time=mesh.time, steps=mesh.step_count,
                   rel_div_b=final.rel_div_b, rel_div_d=final.rel_div_d)
    if prob.exact_faces is not None:
        exact = prob.exact_faces(mesh, mesh.time)
        for comp in ("Dx", "Dy", "Bz"):
            l1, li = error_norms(mesh, exact, comp)
            summary[f"L1_{comp}"], summary[f"Linf_{comp}"] = l1, li
    manifest = dict(
        schema=MANIFEST_SCHEMA, version=__version__, config=cfg.to_dict(),
        config_text=config_text, problem=prob.info, threads=used_threads,
        numpy=np.__version__, python=platform.python_version(),
        wall_time=wall, step_count=mesh.step_count, files=files + ["state_final.npz",
                                                                   "divergence.csv"],
        summary=summary)
    write_manifest(out / "manifest.json", manifest)
    return RunResult(mesh, mesh.step_count, wall, out, summary)
