"""Command-line driver: ``run``, ``convergence``, ``amplification``, ``diagnose``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .io import SnapshotError, load_state, write_manifest
from .mesh import DivergenceFailure, advance, divergence_diagnostics
from .problems import ProblemError, error_norms
from .stiff_source import InvalidSourceError, amplification_table, write_amplification_csv
from .studies import (convergence_table, format_convergence, restrict_faces,
                      write_convergence_csv)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("cedgrp")


def _read_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text), text


def cmd_run(args) -> int:
    from .runner import run
    cfg, text = _read_config(args.config)
    res = run(cfg, out_dir=args.out, threads=args.threads, config_text=text)
    print(f"completed {res.steps} steps to t = {res.mesh.time:.9e} s in {res.wall_time:.2f} s")
    for k, v in res.summary.items():
        if k.startswith(("L1", "Linf", "rel_")):
            print(f"  {k} = {v:.9e}")
    print(f"artifacts in {res.out_dir}")
    return EXIT_OK


def _levels(text: str):
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--levels: expected comma-separated integers, got {text!r}") from None
    if any(n <= 0 for n in out):
        raise ConfigError("--levels: sizes must be positive")
    return out


def _config_at(cfg: RunConfig, n: int) -> RunConfig:
    c = copy.deepcopy(cfg)
    d = list(c.mesh.dims)
    d[0] = n
    if d[1] > 1:
        d[1] = n * cfg.mesh.dims[1] // cfg.mesh.dims[0]
    c.mesh.dims = tuple(d)
    return c


def cmd_convergence(args) -> int:
    from .runner import build_problem
    cfg, _ = _read_config(args.config)
    levels = _levels(args.levels)
    if len(levels) < 2:
        raise ConfigError("convergence needs at least two levels")
    comps = tuple(args.components.split(","))
    for c in comps:
        if c not in ("Dx", "Dy", "Dz", "Bx", "By", "Bz"):
            raise ConfigError(f"unknown component {c!r}")
    mode = args.mode
    if mode == "self" and len(levels) < 3:
        raise ConfigError("self-convergence needs two measured levels plus a reference")
    runs = []
    for n in levels:
        prob = build_problem(_config_at(cfg, n))
        if mode == "oracle" and prob.exact_faces is None:
            raise ConfigError(f"{cfg.problem.kind} has no exact solution; use --mode self")
        mesh = advance(prob.mesh, cfg.time.final_time, cfg.time.cfl,
                       max_steps=cfg.time.max_steps, post_step=prob.post_step)
        runs.append((n, prob, mesh))
        log.info("level %d done (%d steps)", n, mesh.step_count)
    errs = {c: [] for c in comps}
    measured = runs if mode == "oracle" else runs[:-1]
    for n, prob, mesh in measured:
        exact = (prob.exact_faces(mesh, mesh.time) if mode == "oracle"
                 else restrict_faces(runs[-1][2], mesh))
        for c in comps:
            errs[c].append(error_norms(mesh, exact, c))
    lv = [n for n, _, _ in measured]
    tables = {c: convergence_table(lv, errs[c]) for c in comps}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_convergence_csv(out / "convergence.csv", tables)
    write_manifest(out / "manifest.json", dict(command="convergence", mode=mode, levels=levels,
                                               config=cfg.to_dict()))
    print(format_convergence(tables))
    return EXIT_OK


def cmd_amplification(args) -> int:
    try:
        table = amplification_table(args.chi_max, args.samples)
    except InvalidSourceError as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        write_amplification_csv(args.out, table)
        print(f"wrote {args.out}")
    else:
        print("# schema: amplification/1")
        print("chi,G_exact,G_backward_euler,G_l_stable_average")
        for row in table:
            print(",".join(f"{v:.12e}" for v in row))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    try:
        mesh = load_state(args.snapshot)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load {args.snapshot}: {exc}") from None
    r = divergence_diagnostics(mesh)
    print(f"time = {mesh.time:.9e} s, steps = {mesh.step_count}")
    print(f"max |div B - rho_M| = {r.max_div_b:.9e}  (relative {r.rel_div_b:.3e})")
    print(f"max |div D - rho_E| = {r.max_div_d:.9e}  (relative {r.rel_div_d:.3e})")
    finite = all(np.all(np.isfinite(f)) for f in mesh.d_faces + mesh.b_faces)
    if not finite or max(r.rel_div_b, r.rel_div_d) > args.tol:
        print(f"constraint audit FAILED (tolerance {args.tol:.1e})")
        return EXIT_NUMERIC
    print("constraint audit passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cedgrp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configured problem")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [output] directory)")
    r.add_argument("--threads", type=int)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convergence", help="mesh-refinement study")
    c.add_argument("config")
    c.add_argument("--levels", required=True, help="comma-separated zone counts, e.g. 16,32,64")
    c.add_argument("--mode", choices=("oracle", "self"), default="oracle",
                   help="exact solution or finest level as the reference")
    c.add_argument("--components", default="Dy,Bz")
    c.add_argument("--out", default="convergence_out")
    c.set_defaults(func=cmd_convergence)

    a = sub.add_parser("amplification", help="G(chi) for the source operators")
    a.add_argument("--chi-max", type=float, default=40.0)
    a.add_argument("--samples", type=int, default=401)
    a.add_argument("--out", help="CSV path (stdout if omitted)")
    a.set_defaults(func=cmd_amplification)

    d = sub.add_parser("diagnose", help="divergence audit of a saved state (.npz)")
    d.add_argument("snapshot")
    d.add_argument("--tol", type=float, default=1e-10)
    d.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ProblemError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceFailure, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
