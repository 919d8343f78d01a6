"""Run configuration files.

Format::

    # comment
    [problem]
    kind = plane_wave
    [mesh]
    dims = 32, 32
    [time]
    cfl = 0.45
    final_time = 3.5e-9

Sections are ``problem``, ``mesh``, ``time``, ``source`` and ``output``.
Lists are comma or whitespace separated.  Every error carries the line it
was detected on.
"""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from typing import Optional

from .mesh import BACKENDS, BOUNDARY_KINDS, LIMITERS
from .problems import PROBLEM_KINDS, SKIN_PRESETS
from .stiff_source import SourceOperatorKind

FORMATS = ("csv", "vtk", "npz")
SOURCE_KINDS = tuple(k.value for k in SourceOperatorKind) + ("none",)
UNITS = ("si", "normalized")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class ProblemSection:
    kind: str
    material: Optional[str] = None
    sigma: Optional[float] = None
    frequency: Optional[float] = None
    amplitude: float = 1.0
    wavelength: Optional[float] = None
    angle: Optional[float] = None
    seed: int = 0
    units: Optional[str] = None


@dataclass
class MeshSection:
    dims: tuple
    extent: Optional[tuple] = None
    boundary: Optional[tuple] = None
    limiter: str = "minmod"
    backend: str = "auto"


@dataclass
class TimeSection:
    cfl: float
    final_time: float
    max_steps: Optional[int] = None


@dataclass
class SourceSection:
    kind: str = SourceOperatorKind.L_STABLE_AVERAGE.value


@dataclass
class OutputSection:
    directory: str = "out"
    cadence: int = 0
    formats: tuple = ("csv",)


@dataclass
class RunConfig:
    problem: ProblemSection
    mesh: MeshSection
    time: TimeSection
    source: SourceSection = field(default_factory=SourceSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return asdict(self)


def _split(v):
    return [p for p in re.split(r"[,\s]+", v.strip()) if p]


def _float(v, key, line):
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {v!r}", line) from None


def _int(v, key, line):
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}", line) from None


def _enum(v, choices, key, line):
    v = v.strip().lower()
    if v not in choices:
        raise ConfigError(f"{key}: {v!r} is not one of {', '.join(choices)}", line)
    return v


def _dims(v, key, line):
    parts = [_int(p, key, line) for p in _split(v)]
    if not 1 <= len(parts) <= 3:
        raise ConfigError(f"{key}: expected one to three sizes", line)
    if any(p <= 0 for p in parts):
        raise ConfigError(f"{key}: sizes must be positive", line)
    return tuple(parts + [1] * (3 - len(parts)))


def _extent(v, key, line):
    vals = [_float(p, key, line) for p in _split(v)]
    if len(vals) % 2 or not 2 <= len(vals) <= 6:
        raise ConfigError(f"{key}: expected lo hi pairs for one to three axes", line)
    pairs = tuple(zip(vals[::2], vals[1::2]))
    if any(hi <= lo for lo, hi in pairs):
        raise ConfigError(f"{key}: each upper bound must exceed its lower bound", line)
    return pairs


def _boundary(v, key, line):
    kinds = tuple(_enum(p, BOUNDARY_KINDS, key, line) for p in _split(v))
    if len(kinds) == 1:
        return kinds * 3
    if len(kinds) != 3:
        raise ConfigError(f"{key}: give one kind or one per axis", line)
    return kinds


def _formats(v, key, line):
    out = tuple(_enum(p, FORMATS, key, line) for p in _split(v))
    if not out:
        raise ConfigError(f"{key}: empty list", line)
    return out


def _positive(conv):
    def f(v, key, line):
        x = conv(v, key, line)
        if not x > 0:
            raise ConfigError(f"{key}: must be positive", line)
        return x
    return f


def _nonneg(conv):
    def f(v, key, line):
        x = conv(v, key, line)
        if x < 0:
            raise ConfigError(f"{key}: must be non-negative", line)
        return x
    return f


def _cfl(v, key, line):
    x = _float(v, key, line)
    if not 0 < x <= 1:
        raise ConfigError(f"{key}: {x} is outside (0, 1]", line)
    return x


def _str(v, key, line):
    return v.strip()


def _choice(choices):
    return lambda v, key, line: _enum(v, choices, key, line)


SCHEMA = {
    "problem": {
        "kind": (_choice(PROBLEM_KINDS), True),
        "material": (_choice(tuple(SKIN_PRESETS)), False),
        "sigma": (_nonneg(_float), False),
        "frequency": (_positive(_float), False),
        "amplitude": (_float, False),
        "wavelength": (_positive(_float), False),
        "angle": (_float, False),
        "seed": (_int, False),
        "units": (_choice(UNITS), False),
    },
    "mesh": {
        "dims": (_dims, True),
        "extent": (_extent, False),
        "boundary": (_boundary, False),
        "limiter": (_choice(LIMITERS), False),
        "backend": (_choice(BACKENDS), False),
    },
    "time": {
        "cfl": (_cfl, True),
        "final_time": (_nonneg(_float), True),
        "max_steps": (_positive(_int), False),
    },
    "source": {
        "kind": (_choice(SOURCE_KINDS), False),
    },
    "output": {
        "directory": (_str, False),
        "cadence": (_nonneg(_int), False),
        "formats": (_formats, False),
    },
}

_SECTION_TYPES = {"problem": ProblemSection, "mesh": MeshSection, "time": TimeSection,
                  "source": SourceSection, "output": OutputSection}


def _read(text: str):
    """Raw ``{section: {key: (value, line)}}`` plus section header lines."""
    raw, headers = {}, {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", s)
        if m:
            section = m.group(1).lower()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", no)
            if section in raw:
                raise ConfigError(f"duplicate section [{section}]", no)
            raw[section], headers[section] = {}, no
            continue
        if "=" not in s:
            raise ConfigError(f"expected 'key = value', got {s!r}", no)
        if section is None:
            raise ConfigError("key outside of any section", no)
        key, _, val = (p.strip() for p in s.partition("="))
        key = key.lower()
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", no)
        if key in raw[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", no)
        if not val:
            raise ConfigError(f"empty value for {key!r}", no)
        raw[section][key] = (val, no)
    return raw, headers


def parse_config(text: str) -> RunConfig:
    raw, headers = _read(text)
    sections = {}
    for name, keys in SCHEMA.items():
        got = raw.get(name, {})
        vals = {}
        for key, (conv, required) in keys.items():
            if key in got:
                v, no = got[key]
                vals[key] = conv(v, key, no)
            elif required:
                where = f"[{name}]" if name in raw else f"section [{name}]"
                raise ConfigError(f"missing required key {key!r} in {where}", headers.get(name))
        sections[name] = _SECTION_TYPES[name](**vals)
    cfg = RunConfig(**sections)
    _check_problem(cfg, raw)
    return cfg


def _check_problem(cfg: RunConfig, raw) -> None:
    p, m = cfg.problem, cfg.mesh
    if p.kind == "skin_depth_1d":
        preset = SKIN_PRESETS[p.material or "carbon"]
        if p.material is None:
            p.material = "carbon"
        if p.sigma is None:
            p.sigma = preset["sigma"]
        if p.frequency is None:
            p.frequency = preset["frequency"]
        if m.dims[1] != 1 or m.dims[2] != 1:
            raise ConfigError("skin_depth_1d needs dims = N (one-dimensional)", raw["mesh"]["dims"][1])
    elif p.material is not None:
        raise ConfigError("material presets only apply to skin_depth_1d", raw["problem"]["material"][1])
    if p.kind == "plane_wave":
        if m.boundary is not None and m.boundary[:2] != ("periodic", "periodic"):
            raise ConfigError("plane_wave needs periodic boundaries", raw["mesh"]["boundary"][1])
        if m.dims[0] != m.dims[1] or m.dims[2] != 1:
            raise ConfigError("plane_wave needs a square two-dimensional mesh", raw["mesh"]["dims"][1])
    if p.kind == "gaussian_pulse_disk" and (m.dims[0] != m.dims[1] or m.dims[2] != 1):
        raise ConfigError("gaussian_pulse_disk needs a square two-dimensional mesh", raw["mesh"]["dims"][1])
    if p.kind.startswith("beam_") and m.dims[2] != 1:
        raise ConfigError("beam problems are two-dimensional", raw["mesh"]["dims"][1])
    if p.kind == "random_field" and m.boundary is not None and set(m.boundary) != {"periodic"}:
        raise ConfigError("random_field needs periodic boundaries", raw["mesh"]["boundary"][1])


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
