"""INI-style run configuration.

Every key has a default; physical constraints are checked while parsing and
reported as ``[section] key: message``.  Vectors are comma-separated, lists
of vectors in ``[scan] speeds`` are separated by ``;``.

Example::

    [grid]
    dim = 1
    n = 256
    half_width = 16

    [params]
    gamma = 1, 1, 2
    omega = 1
    c = 0
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .evolution import EvolveConfig
from .grid import Grid
from .solvers import SolveOptions
from .state import Params, dressing_wavenumbers


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSection:
    dim: int = 1
    n: int = 256
    half_width: float = 16.0


@dataclass(frozen=True)
class ParamsSection:
    gamma: tuple[float, float, float] = (1.0, 1.0, 2.0)
    omega: float = 1.0
    c: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class SolverSection:
    max_iters: int = 4000
    step_size: float = 0.5
    tol_grad: float = 1e-7
    restarts: int = 5
    seed: int = 0


@dataclass(frozen=True)
class EvolveSection:
    dt: float = 1e-3
    t_final: float = 1.0
    snapshot_every: int = 10
    blowup_factor: float = 1e3


@dataclass(frozen=True)
class InitialSection:
    # "gaussian" builds component Gaussians; "snapshot" loads a TRIW file.
    kind: str = "gaussian"
    amplitudes: tuple[float, float, float] = (1.0, 1.0, 1.0)
    widths: tuple[float, float, float] = (1.0, 1.0, 1.0)
    path: str = ""


@dataclass(frozen=True)
class ScanSection:
    speeds: tuple[tuple[float, ...], ...] = ()
    # empty: compute mu at each velocity; otherwise one value per velocity
    mu: tuple[float, ...] = ()
    mu_unit: float = 0.0
    branch: str = ""


@dataclass(frozen=True)
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    params: ParamsSection = field(default_factory=ParamsSection)
    solver: SolverSection = field(default_factory=SolverSection)
    evolve: EvolveSection = field(default_factory=EvolveSection)
    initial: InitialSection = field(default_factory=InitialSection)
    scan: ScanSection = field(default_factory=ScanSection)

    def make_grid(self) -> Grid:
        return Grid(self.grid.dim, self.grid.n, self.grid.half_width)

    def make_params(self) -> Params:
        g1, g2, g3 = self.params.gamma
        return Params(g1, g2, g3, self.params.omega, self.params.c)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(**asdict(self.solver))

    def evolve_config(self) -> EvolveConfig:
        return EvolveConfig(**asdict(self.evolve))


_SECTIONS = {
    "grid": GridSection,
    "params": ParamsSection,
    "solver": SolverSection,
    "evolve": EvolveSection,
    "initial": InitialSection,
    "scan": ScanSection,
}


def _fail(section: str, key: str, msg: str):
    raise ConfigError(f"[{section}] {key}: {msg}")


def _vector(text: str) -> tuple[float, ...]:
    text = text.strip()
    return tuple(float(x) for x in text.split(",")) if text else ()


def _convert(section: str, key: str, default, text: str):
    try:
        if isinstance(default, bool):
            raise TypeError
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, str):
            return text.strip()
        if key == "speeds":
            return tuple(_vector(part) for part in text.split(";") if part.strip())
        return _vector(text)
    except ValueError:
        _fail(section, key, f"cannot parse {text!r}")


def _format(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return repr(value)
    if value and isinstance(value[0], tuple):
        return "; ".join(", ".join(repr(x) for x in v) for v in value)
    return ", ".join(repr(x) for x in value)


def parse(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    parts = {}
    for name in cp.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"[{name}]: unknown section (expected one of {', '.join(_SECTIONS)})")
    for name, cls in _SECTIONS.items():
        defaults = cls()
        known = {f.name for f in fields(cls)}
        values = {}
        if cp.has_section(name):
            for key, raw in cp.items(name):
                if key not in known:
                    _fail(name, key, "unknown key")
                values[key] = _convert(name, key, getattr(defaults, key), raw)
        parts[name] = cls(**{**asdict(defaults), **values})
    cfg = RunConfig(**parts)
    validate(cfg)
    return cfg


def load(path) -> RunConfig:
    with open(path) as fh:
        return parse(fh.read())


def dumps(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    for name in _SECTIONS:
        section = getattr(cfg, name)
        cp[name] = {f.name: _format(getattr(section, f.name)) for f in fields(section)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def validate(cfg: RunConfig) -> None:
    g = cfg.grid
    if g.dim not in (1, 2, 3, 4):
        _fail("grid", "dim", f"must be 1..4, got {g.dim}")
    if g.n < 8 or g.n % 2:
        _fail("grid", "n", f"must be even and >= 8, got {g.n}")
    if not (g.half_width > 0 and math.isfinite(g.half_width)):
        _fail("grid", "half_width", f"must be positive, got {g.half_width}")
    p = cfg.params
    if len(p.gamma) != 3:
        _fail("params", "gamma", f"needs three values, got {len(p.gamma)}")
    if not all(x > 0 and math.isfinite(x) for x in p.gamma):
        _fail("params", "gamma", f"all couplings must be positive, got {p.gamma}")
    if not math.isfinite(p.omega):
        _fail("params", "omega", "must be finite")
    if len(p.c) not in (1, g.dim) or (len(p.c) == 1 and g.dim > 1 and any(p.c)):
        _fail("params", "c", f"needs {g.dim} components, got {len(p.c)}")
    grid = cfg.make_grid()
    for i, cvec in enumerate([p.c] + list(cfg.scan.speeds)):
        where = ("params", "c") if i == 0 else ("scan", "speeds")
        vec = np.zeros(g.dim) if (len(cvec) == 1 and not any(cvec)) else np.asarray(cvec, dtype=float)
        if vec.shape != (g.dim,):
            _fail(*where, f"velocity {cvec} needs {g.dim} components")
        kappa = dressing_wavenumbers(Params(*p.gamma, c=tuple(vec)), grid)
        if not grid.on_lattice(kappa):
            _fail(*where, f"velocity {cvec} is not commensurate with the torus: gamma_j c / 2 must be multiples of pi/L")
    for key, cls, build in (("solver", SolverSection, SolveOptions), ("evolve", EvolveSection, EvolveConfig)):
        try:
            build(**asdict(getattr(cfg, key)))
        except ValueError as exc:
            raise ConfigError(f"[{key}] {exc}") from exc
    ini = cfg.initial
    if ini.kind not in ("gaussian", "snapshot"):
        _fail("initial", "kind", f"must be 'gaussian' or 'snapshot', got {ini.kind!r}")
    if ini.kind == "snapshot" and not ini.path:
        _fail("initial", "path", "required when kind = snapshot")
    if len(ini.amplitudes) != 3 or len(ini.widths) != 3:
        _fail("initial", "widths", "amplitudes and widths need three values each")
    if not all(w > 0 for w in ini.widths):
        _fail("initial", "widths", "must be positive")
    s = cfg.scan
    if s.mu and len(s.mu) != len(s.speeds):
        _fail("scan", "mu", f"{len(s.mu)} values for {len(s.speeds)} velocities")
    if s.mu_unit < 0:
        _fail("scan", "mu_unit", "must be non-negative")
    if s.branch not in ("", "A0", "B0", "C0", "D0"):
        _fail("scan", "branch", f"unknown branch {s.branch!r}")
