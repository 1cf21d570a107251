"""Time integration, invariant monitoring and the global-existence machinery.

Sign convention: with the forward transform kernel ``exp(-i k.x)`` the free
part ``i g d_t u = -Lap u`` is solved exactly by ``u_hat(t) = exp(-i |k|^2 t / g) u_hat(0)``.
The quadratic part ``i g1 u' = -w conj(v)``, ``i g2 v' = -w conj(u)``,
``i g3 w' = -u v`` is integrated pointwise with classical RK4.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .functionals import FunctionalReport, mass_coefficients, report
from .grid import Grid, from_spectral, to_spectral
from .state import InvariantSet, Params, TriField, gradient_norm, invariants, oscillating_data

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    t_final: float
    snapshot_every: int = 1
    blowup_factor: float = 1e3
    store_snapshots: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= self.dt:
            raise ValueError(f"t_final must be >= dt, got t_final={self.t_final}, dt={self.dt}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if not self.blowup_factor > 1:
            raise ValueError("blowup_factor must exceed 1")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_final / self.dt + 1e-9))


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    snapshots: list[TriField] = field(default_factory=list)
    invariant_series: list[InvariantSet] = field(default_factory=list)
    verdict: str = "completed"
    final: TriField | None = None

    def drift(self) -> dict[str, float]:
        return invariant_drift(self.invariant_series)


def invariant_drift(series: list[InvariantSet]) -> dict[str, float]:
    """Maximum relative deviation from the initial value for each invariant.

    ``P`` is compared as a vector; a vanishing initial value falls back to the
    absolute deviation.
    """
    first = series[0]
    out = {}
    for name in ("M", "M1", "M2", "M3", "K", "E"):
        q0 = getattr(first, name)
        dev = max(abs(getattr(s, name) - q0) for s in series)
        out[name] = dev / abs(q0) if q0 != 0 else dev
    p0 = np.asarray(first.P)
    dev = max(float(np.linalg.norm(np.asarray(s.P) - p0)) for s in series)
    n0 = float(np.linalg.norm(p0))
    out["P"] = dev / n0 if n0 > 0 else dev
    return out


class _Stepper:
    def __init__(self, params: Params, grid: Grid, dt: float):
        self.params = params
        self.grid = grid
        self.dt = dt
        inv_g = (1.0 / params.gammas).reshape((3,) + (1,) * grid.dim)
        self.half_free = np.exp(-1j * grid.k2 * inv_g * (dt / 2.0))

    def free(self, data: np.ndarray) -> np.ndarray:
        return from_spectral(self.grid, self.half_free * to_spectral(self.grid, data))

    def rhs(self, data: np.ndarray) -> np.ndarray:
        u, v, w = data
        g1, g2, g3 = self.params.gammas
        return 1j * np.stack([w * np.conj(v) / g1, w * np.conj(u) / g2, u * v / g3])

    def nonlinear(self, data: np.ndarray) -> np.ndarray:
        h = self.dt
        k1 = self.rhs(data)
        k2 = self.rhs(data + 0.5 * h * k1)
        k3 = self.rhs(data + 0.5 * h * k2)
        k4 = self.rhs(data + h * k3)
        return data + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def step(self, data: np.ndarray) -> np.ndarray:
        return self.free(self.nonlinear(self.free(data)))


def strang_step(params: Params, field: TriField, dt: float) -> TriField:
    """One Strang step: half free flow, full quadratic substep, half free flow."""
    return field.with_data(_Stepper(params, field.grid, dt).step(field.data))


def evolve(params: Params, field: TriField, config: EvolveConfig) -> Trajectory:
    """Integrate to ``t_final`` recording invariants every ``snapshot_every`` steps.

    Stops early with verdict ``blowup_flagged`` when samples become non-finite
    or ``||grad||`` exceeds ``blowup_factor`` times its initial value.
    """
    stepper = _Stepper(params, field.grid, config.dt)
    traj = Trajectory()

    def record(t, f):
        traj.times.append(t)
        traj.invariant_series.append(invariants(params, f))
        if config.store_snapshots:
            traj.snapshots.append(f)

    record(0.0, field)
    g0 = gradient_norm(field)
    data = np.array(field.data)
    current = field
    for step in range(1, config.n_steps + 1):
        data = stepper.step(data)
        if not np.all(np.isfinite(data)):
            log.warning("non-finite samples at step %d", step)
            traj.verdict = "blowup_flagged"
            break
        if step % config.snapshot_every == 0:
            current = field.with_data(data)
            if g0 > 0 and gradient_norm(current) > config.blowup_factor * g0:
                traj.verdict = "blowup_flagged"
                record(step * config.dt, current)
                break
            record(step * config.dt, current)
    traj.final = field.with_data(data) if np.all(np.isfinite(data)) else current
    return traj


class Region(str, enum.Enum):
    A_plus = "A_plus"
    A_minus = "A_minus"
    outside = "outside"


def classify_region(params: Params, field: TriField, mu: float, rep: FunctionalReport | None = None) -> Region:
    """``A+`` (``S < mu, N >= 0``), ``A-`` (``S < mu, N < 0``) or outside.

    The action bound is strict; data with ``S == mu`` are left unclassified
    (``outside``).
    """
    rep = report(params, field) if rep is None else rep
    if not rep.S < mu:
        return Region.outside
    return Region.A_plus if rep.N >= 0 else Region.A_minus


def region_series(params: Params, traj: Trajectory, mu: float) -> list[Region]:
    """Classify every stored snapshot with the initial (conserved) action and recomputed ``N``."""
    S0 = report(params, traj.snapshots[0]).S
    out = []
    for snap in traj.snapshots:
        rep = report(params, snap)
        rep = FunctionalReport(S=S0, Q=rep.Q, V=rep.V, N=rep.N)
        out.append(classify_region(params, snap, mu, rep))
    return out


def h1_bound(mu: float, mass0: float, params: Params) -> float:
    """A priori bound on ``K(t)`` for data in ``A+``.

    On ``A+``, ``sum ||grad(e^{-i g_j c.x/2} u_j)||^2 <= 2Q < 6 mu``; undoing the
    phases by the triangle inequality and bounding
    ``sum g_j^2 ||u_j||^2 <= max(g1, g2, g3/2) M`` gives

        K(t) <= (sqrt(6 mu) + |c|/2 sqrt(max(g1, g2, g3/2) M0))^2.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    a = mass_coefficients(params)
    if np.any(a < -1e-12 * max(1.0, float(np.max(np.abs(a))))):
        raise ValueError(f"stripped L2 coefficients {a.tolist()} must be non-negative for the bound")
    g1, g2, g3 = params.gammas
    shift = 0.5 * params.speed * math.sqrt(max(g1, g2, g3 / 2) * mass0)
    return (math.sqrt(6.0 * mu) + shift) ** 2


@dataclass(frozen=True)
class Threshold:
    name: str
    value: float
    capped: tuple[str, ...]

    def __float__(self):
        return self.value


_BRANCH_CAPS = {"A0": ("u", "v"), "B0": ("u", "w"), "C0": ("v", "w"), "D0": ("w",)}


def select_branch(params: Params) -> str:
    g1, g2, g3 = params.gammas
    if params.mass_resonant:
        raise ValueError("mass-resonant couplings (gamma1 + gamma2 = gamma3) have no oscillating-data threshold")
    if g3 > g1 + g2:
        return "A0"
    if g1 < g2:
        return "B0"
    if g1 > g2:
        return "C0"
    return "D0"


def threshold_constants(params: Params, mu_unit: float, branch: str | None = None) -> Threshold:
    """Mass caps of the oscillating-data global existence result.

    ``mu_unit`` is the minimal action at the branch's unit-speed parameters
    (see :func:`unit_params`).
    """
    g1, g2, g3 = params.gammas
    branch = select_branch(params) if branch is None else branch
    if branch == "A0":
        denom, cond = 2 * max(g1, g2) * (g3 - g1 - g2), "gamma3 > gamma1 + gamma2"
        num = 16.0
    elif branch == "B0":
        denom, cond = max(g1, g3) * (3 * g2 - g1 - g3), "3 gamma2 > gamma1 + gamma3"
        num = 8.0
        if not (g3 < g1 + g2 and g1 < g2):
            raise ValueError("B0 applies when gamma3 < gamma1 + gamma2 and gamma1 < gamma2")
    elif branch == "C0":
        denom, cond = max(g2, g3) * (3 * g1 - g2 - g3), "3 gamma1 > gamma2 + gamma3"
        num = 8.0
        if not (g3 < g1 + g2 and g1 > g2):
            raise ValueError("C0 applies when gamma3 < gamma1 + gamma2 and gamma1 > gamma2")
    elif branch == "D0":
        denom, cond = g3 * (2 * g1 - g3), "2 gamma1 > gamma3"
        num = 8.0
        if not (g3 < g1 + g2 and g1 == g2):
            raise ValueError("D0 applies when gamma3 < gamma1 + gamma2 and gamma1 = gamma2")
    else:
        raise ValueError(f"unknown branch {branch!r}; expected A0, B0, C0 or D0")
    if not denom > 0:
        raise ValueError(f"{branch} inapplicable: requires {cond} (denominator {denom:g} <= 0)")
    if not mu_unit > 0:
        raise ValueError(f"mu_unit must be positive, got {mu_unit}")
    return Threshold(branch, num / denom * mu_unit, _BRANCH_CAPS[branch])


def branch_frequency(params: Params, branch: str, speed: float) -> float:
    """The frequency paired with velocity ``|c| = speed`` on each branch."""
    g1, g2, g3 = params.gammas
    s2 = speed**2
    return {"A0": g3 * s2 / 8, "B0": g2 * s2 / 4, "C0": g1 * s2 / 4, "D0": g1 * s2 / 4}[branch]


def unit_params(params: Params, branch: str, direction) -> Params:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return params.with_(omega=branch_frequency(params, branch, 1.0), c=tuple(d))


def dressed_cubic(params: Params, field: TriField, c) -> float:
    """``V`` of the oscillating data built from ``field`` with velocity ``c``."""
    return report(params, oscillating_data(params, field, c)).V


@dataclass(frozen=True)
class ScanRow:
    speed: float
    omega: float
    V: float
    S: float
    N: float
    mu: float
    region: Region


def oscillation_scan(params: Params, field: TriField, c_list, mu=None, branch: str | None = None) -> list[ScanRow]:
    """Dress ``field`` with each velocity and classify it against ``mu``.

    ``mu`` is either a callable ``mu(params_at_c) -> float`` or a sequence
    aligned with ``c_list``.
    """
    if params.mass_resonant:
        raise ValueError("oscillation scan needs gamma1 + gamma2 != gamma3 (V is c-independent at resonance)")
    branch = select_branch(params) if branch is None else branch
    rows = []
    for i, c in enumerate(c_list):
        cvec = field.grid.vector(c)
        speed = float(np.linalg.norm(cvec))
        pc = params.with_(omega=branch_frequency(params, branch, speed), c=tuple(cvec))
        dressed = oscillating_data(pc, field, cvec)
        rep = report(pc, dressed)
        mu_c = float(mu(pc)) if callable(mu) else float(mu[i])
        rows.append(
            ScanRow(speed=speed, omega=pc.omega, V=rep.V, S=rep.S, N=rep.N, mu=mu_c, region=classify_region(pc, dressed, mu_c, rep))
        )
        log.info("|c|=%g V=%.6e S=%.6e N=%.6e mu=%.6e -> %s", speed, rep.V, rep.S, rep.N, mu_c, rows[-1].region.value)
    return rows
