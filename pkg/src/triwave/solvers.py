"""Ground states, boosted traveling waves and related variational estimates.

The general engine is preconditioned gradient descent on the stripped action,
with a radial rescaling back onto the Nehari manifold after every step.
Positive ground states (``c = 0``) are found first by a damped Petviashvili
fixed-point iteration, which is far cheaper per step, and fall back to the
descent if it stalls.  On the Nehari manifold the action equals

    F(f) = (4/27) Q(f)^3 / V(f)^2,

a degree-zero function whose gradient there coincides with the action
gradient, so the backtracking line search is run on ``F``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .functionals import (
    Case,
    FunctionalReport,
    action_gradient,
    classify_case,
    cubic_weight,
    mass_coefficients,
    nehari_project,
    phase_map,
    report,
    require_case,
    tilde_parts,
    tilde_report,
    zero_mass_slots,
)
from .grid import Grid, from_spectral, from_spectral_real, inner, to_spectral, to_spectral_real
from .state import Params, TriField, component_norms, cubic, gaussian_triple, invariants, kinetic_parts, scaling_transform

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Descent failed to meet its tolerance; ``best`` holds the best attempt."""

    def __init__(self, message: str, best: "WaveResult | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 4000
    step_size: float = 0.5
    tol_grad: float = 1e-7
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.tol_grad > 0:
            raise ValueError("tol_grad must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")


@dataclass
class DescentRun:
    profile: TriField
    action: float
    grad_residual: float
    iterations: int
    converged: bool
    trace_Q: list[float] = field(default_factory=list)


@dataclass
class WaveResult:
    """Outcome of a Nehari descent (stripped profile when ``c != 0``)."""

    profile: TriField
    action_value: float
    mu_estimate: float
    grad_residual: float
    case: Case | None
    params: Params
    iterations: int = 0
    converged: bool = True
    restart_values: list[float] = field(default_factory=list)
    suspicious_spread: bool = False

    @property
    def report(self) -> FunctionalReport:
        return tilde_report(self.params, self.profile)

    def dressed(self) -> TriField:
        """The profile with boost phases restored (the ``phi`` of the traveling ansatz)."""
        if self.params.speed == 0:
            return self.profile
        return phase_map(self.profile, self.params, "dress")


def _nehari_value(Q: float, V: float) -> float:
    return 4.0 / 27.0 * Q**3 / V**2


def _random_initial(params: Params, grid: Grid, rng: np.random.Generator, positive: bool) -> TriField:
    L = grid.half_width
    a = mass_coefficients(params)
    # Widths comparable to the decay lengths of the linear part.
    base = np.array([1.0 / math.sqrt(x) if x > 1e-12 else L / 4 for x in a])
    base = np.clip(base, 2 * grid.spacing, L / 3)
    widths = base * rng.uniform(0.7, 1.4, size=3)
    # shared center, per-component offsets small against the widths so the
    # cubic overlap stays order one
    centers = rng.uniform(-0.1 * L, 0.1 * L, size=(1, grid.dim)) + 0.25 * widths[:, None] * rng.uniform(-1, 1, size=(3, grid.dim))
    if positive:
        # Positive ground states are radial; centring at a grid point keeps the
        # iterates reflection-symmetric and removes a slow lattice drift mode.
        centers[:] = 0.0
    f = gaussian_triple(grid, (1.0, 1.0, 1.0), widths, centers)
    data = np.array(f.data)
    if not positive:
        data = data * np.exp(1j * rng.uniform(0, 2 * np.pi, size=3)).reshape((3,) + (1,) * grid.dim)
        if params.speed > 0:
            # random dual-lattice linear phase, small compared with the grid band
            m = rng.integers(-2, 3, size=grid.dim)
            data = data * grid.plane_wave(np.pi * m / L)
    weight = cubic_weight(params, grid)
    if weight is not None:
        # cancel the cubic weight's oscillation, otherwise V can start near zero
        data[0] = data[0] * np.conj(weight)
    z = np.sum(data[0] * data[1] * np.conj(data[2]) * (1.0 if weight is None else weight))
    if abs(z) > 0:
        # rotate w so the cubic term starts positive
        data[2] = data[2] * z / abs(z)
    return TriField(grid, data)


def _fix_slots(data: np.ndarray, zero_slots: np.ndarray, positive: bool) -> np.ndarray:
    if positive:
        data = np.abs(data).astype(complex)
    for j in np.flatnonzero(zero_slots):
        data[j] = data[j] - data[j].mean()
    return data


def _orient(data: np.ndarray, dim: int) -> np.ndarray:
    """Fix the two phase freedoms ``(e^ia u, e^ib v, e^i(a+b) w)``.

    Afterwards the largest samples of ``u`` and ``v`` are real positive.
    """
    phases = []
    for j in (0, 1):
        idx = np.unravel_index(np.argmax(np.abs(data[j])), data[j].shape)
        phases.append(np.conj(data[j][idx]) / abs(data[j][idx]))
    pu, pv = phases
    return data * np.array([pu, pv, pu * pv]).reshape((3,) + (1,) * dim)


def nehari_descent(
    params: Params,
    f0: TriField,
    opts: SolveOptions,
    positive: bool = False,
    record_trace: bool = False,
) -> DescentRun:
    """Preconditioned, Nehari-projected descent on the stripped action.

    Stops once the relative gradient norm and the relative action change both
    stay below ``opts.tol_grad`` for 10 consecutive iterations.
    """
    g = f0.grid
    a = mass_coefficients(params)
    zero_slots = zero_mass_slots(params)
    floor = (np.pi / g.half_width) ** 2
    shift = np.where(a > floor, a, floor).reshape((3,) + (1,) * g.dim)
    precond = 1.0 / (g.k2 + shift)
    metric = g.k2 + shift

    def project(data):
        data = _fix_slots(g.drop_nyquist(data), zero_slots, positive)
        return nehari_project(params, TriField(g, data))[0]

    f = project(f0.data)
    Q, V = tilde_parts(params, f)
    F = _nehari_value(Q, V)
    trace = [Q] if record_trace else []
    tau = opts.step_size
    prev = None
    calm = 0
    res = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        G = action_gradient(params, f).data
        res = math.sqrt(inner(g, G, G)) / f.norm()
        Gh = to_spectral(g, G)
        d = -from_spectral(g, precond * Gh)
        slope = inner(g, G, d)
        if prev is not None:
            s = f.data - prev[0]
            y = G - prev[1]
            sy = inner(g, s, y)
            if sy > 0:
                sPs = float(np.sum(metric * np.abs(to_spectral(g, s)) ** 2).real) * g.cell_volume / g.size
                tau = float(np.clip(sPs / sy, 1e-4 * opts.step_size, 50.0 * opts.step_size))
            else:
                tau = min(2.0 * tau, 50.0 * opts.step_size)
        accepted = False
        for _ in range(40):
            try:
                trial = project(f.data + tau * d)
            except ValueError:
                tau *= 0.5
                continue
            Qt, Vt = tilde_parts(params, trial)
            Ft = _nehari_value(Qt, Vt)
            if Ft <= F + 1e-4 * tau * slope:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            # Line search exhausted: roundoff floor reached.
            break
        prev = (f.data, G)
        change = abs(F - Ft) / abs(F)
        f, F, Q = trial, Ft, Qt
        if record_trace:
            trace.append(Q)
        calm = calm + 1 if (res <= opts.tol_grad and change <= opts.tol_grad) else 0
        if calm >= 10:
            break
    G = action_gradient(params, f).data
    res = math.sqrt(inner(g, G, G)) / f.norm()
    data = f.data if positive else _orient(np.array(f.data), g.dim)
    f = TriField(g, data)
    return DescentRun(
        profile=f,
        action=tilde_report(params, f).S,
        grad_residual=res,
        iterations=it,
        converged=res <= opts.tol_grad,
        trace_Q=trace,
    )


def petviashvili(params: Params, f0: TriField, opts: SolveOptions, damping: float = 0.5) -> DescentRun:
    """Damped Petviashvili iteration for real positive solutions with ``c = 0``.

    Iterates ``f <- (1 - d) f + d m^2 L^{-1} B(f)`` where ``L = -Lap + a``,
    ``B(f) = (w v, w u, u v)`` and ``m = <f, L f> / <f, B(f)>``.  The stabilising
    factor removes the unstable amplitude mode; damping keeps the
    ``u - v`` antisymmetric mode (eigenvalue below -1) from oscillating.
    """
    if params.speed != 0:
        raise ValueError("the Petviashvili iteration handles c = 0 only")
    g = f0.grid
    a = mass_coefficients(params)
    if np.any(a <= 0):
        raise ValueError("the Petviashvili iteration needs positive L2 coefficients")
    symbol = g.k2_half + a.reshape((3,) + (1,) * g.dim)
    f = np.abs(f0.data)
    res = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        u, v, w = f
        B = np.stack([w * v, w * u, u * v])
        Lf = from_spectral_real(g, symbol * to_spectral_real(g, f))
        fB = float(np.sum(f * B))
        if not (fB > 0 and np.all(np.isfinite(f))):
            log.warning("Petviashvili iteration lost positivity of the cubic term at step %d", it)
            break
        res = math.sqrt(float(np.sum((Lf - B) ** 2)) / float(np.sum(f * f)))
        if res <= opts.tol_grad:
            break
        m = float(np.sum(f * Lf)) / fB
        f = (1.0 - damping) * f + damping * m**2 * from_spectral_real(g, to_spectral_real(g, B) / symbol)
    prof = TriField(g, f)
    G = action_gradient(params, prof).data
    res_final = math.sqrt(inner(g, G, G)) / prof.norm()
    return DescentRun(
        profile=prof,
        action=tilde_report(params, prof).S,
        grad_residual=res_final,
        iterations=it,
        converged=res_final <= opts.tol_grad,
    )


def _ground_run(params: Params, f0: TriField, opts: SolveOptions) -> DescentRun:
    run = petviashvili(params, f0, opts)
    if run.converged:
        return run
    log.info("Petviashvili stalled at residual %.3e; continuing with Nehari descent", run.grad_residual)
    start = run.profile if run.profile.is_finite() and cubic(run.profile) > 0 else f0
    return nehari_descent(params, start, opts, positive=True)


def _solve(params: Params, grid: Grid, opts: SolveOptions, positive: bool, case: Case | None, runner=None) -> WaveResult:
    rng = np.random.default_rng(opts.seed)
    runs = []
    for r in range(opts.restarts):
        f0 = _random_initial(params, grid, rng, positive)
        if runner is None:
            run = nehari_descent(params, f0, opts, positive=positive)
        else:
            run = runner(params, f0, opts)
        log.info("restart %d: S=%.12g residual=%.3e iters=%d", r, run.action, run.grad_residual, run.iterations)
        runs.append(run)
    good = [r for r in runs if r.converged]
    pool = good or runs
    best = min(pool, key=lambda r: r.action)
    values = [r.action for r in good]
    spread = (max(values) - min(values)) / abs(min(values)) if len(values) > 1 else 0.0
    if spread > 0.01:
        log.warning("restart spread %.2e exceeds 1%%; local minima suspected", spread)
    result = WaveResult(
        profile=best.profile,
        action_value=best.action,
        mu_estimate=min(values) if values else best.action,
        grad_residual=best.grad_residual,
        case=case,
        params=params,
        iterations=best.iterations,
        converged=best.converged,
        restart_values=[r.action for r in runs],
        suspicious_spread=spread > 0.01,
    )
    if not good:
        raise ConvergenceError(
            f"no restart converged: best residual {best.grad_residual:.3e} > tol {opts.tol_grad:.1e}", result
        )
    return result


def ground_state(params: Params, grid: Grid, opts: SolveOptions = SolveOptions()) -> WaveResult:
    """Positive ground state of the standing-wave system (``c = 0``, ``omega > 0``)."""
    if params.speed != 0:
        raise ValueError("ground_state requires c = 0; use traveling_wave for boosted waves")
    if not params.omega > 0:
        raise ValueError(f"ground_state requires omega > 0, got {params.omega}")
    params = params.with_(c=(0.0,) * grid.dim)
    return _solve(params, grid, opts, positive=True, case=Case.A, runner=_ground_run)


def traveling_wave(
    params: Params,
    grid: Grid,
    opts: SolveOptions = SolveOptions(),
    case: Case | str | None = None,
    strict: bool = True,
) -> WaveResult:
    """Boosted ground state of the stripped stationary system.

    For ``c = 0`` this is :func:`ground_state`.  Cases C and E at dim 4 are
    accepted only with ``strict=False`` (convergence not guaranteed).
    """
    if params.speed == 0:
        return ground_state(params, grid, opts)
    found = require_case(params, grid.dim, case, strict=strict)
    params.velocity(grid)
    tilde_report(params, TriField.zeros(grid))  # commensurability of the cubic weight
    phase_map(TriField.zeros(grid), params, "strip")  # commensurability of the dressing
    return _solve(params, grid, opts, positive=False, case=found)


def mu_estimate(params: Params, grid: Grid, opts: SolveOptions = SolveOptions(), strict: bool = True) -> float:
    """Minimum over restarts of the stripped action at converged Nehari critical points."""
    if params.speed == 0:
        res = ground_state(params, grid, opts)
    else:
        res = traveling_wave(params, grid, opts, strict=strict)
    return res.mu_estimate


@dataclass(frozen=True)
class PohozaevResiduals:
    first: float
    second: float
    critical: float | None = None

    def __iter__(self):
        return iter((self.first, self.second))


def pohozaev_check(params: Params, profile: TriField) -> PohozaevResiduals:
    """Residuals of ``K + w M = 3 V`` and ``(N-2)K/2 + N w M / 2 = N V``, relative to ``K``.

    At dim 4 the combination ``K = 2 V`` is also reported.
    """
    inv = invariants(params, profile)
    K, M, V = inv.K, inv.M, cubic(profile)
    w = params.omega
    n = profile.grid.dim
    r1 = K + w * M - 3 * V
    r2 = (n - 2) / 2 * K + n / 2 * w * M - n * V
    r3 = K - 2 * V if n == 4 else None
    if K == 0:
        return PohozaevResiduals(abs(r1), abs(r2), None if r3 is None else abs(r3))
    return PohozaevResiduals(abs(r1) / K, abs(r2) / K, None if r3 is None else abs(r3) / K)


def gn_functional(params: Params, field: TriField) -> float:
    """``J = K M^(1/2) / int u v w`` (real part of the cubic integral)."""
    inv = invariants(params, field)
    T = float(np.real(np.sum(field.u * field.v * field.w))) * field.grid.cell_volume
    if not T > 0:
        raise ValueError("J is defined only for triples with positive int uvw")
    return inv.K * math.sqrt(inv.M) / T


@dataclass
class GNResult:
    alpha: float
    C_opt: float
    ground_profile: TriField
    ground: WaveResult

    def __iter__(self):
        return iter((self.alpha, self.C_opt, self.ground_profile))


def gn_constant(
    grid: Grid,
    opts: SolveOptions = SolveOptions(restarts=1, tol_grad=1e-6),
    params: Params = Params(1.0, 1.0, 2.0),
) -> GNResult:
    """Sharp constant of ``int uvw <= C K M^(1/2)`` in four dimensions.

    The infimum ``alpha`` of ``J`` is attained (after amplitude/dilation
    normalisation) at the positive ground state with ``omega = 1, c = 0``;
    ``C_opt = 1 / alpha``.
    """
    if grid.dim != 4:
        raise ValueError(f"the sharp Gagliardo-Nirenberg constant is computed at dim 4, got {grid.dim}")
    p = params.with_(omega=1.0, c=(0.0,) * 4)
    gs = ground_state(p, grid, opts)
    alpha = gn_functional(p, gs.profile)
    return GNResult(alpha=alpha, C_opt=1.0 / alpha, ground_profile=gs.profile, ground=gs)


@dataclass(frozen=True)
class ScalingReport:
    speed: float
    factor_Q: float
    factor_V: float
    expected: float
    N_original: float
    N_mapped: float
    mapped: TriField


def scaling_consistency(params: Params, field: TriField) -> ScalingReport:
    """Apply ``f -> |c|^-2 f(x / |c|)`` and compare ``Q`` and ``V`` before and after.

    The mapped triple is evaluated at ``(omega / |c|^2, c / |c|)``.  Both parts
    scale by the same factor, so Nehari membership and the minimisation are
    conjugate; at dim 4 direct substitution gives ``|c|^-2`` for that factor.
    """
    g = field.grid
    if g.dim != 4:
        raise ValueError(f"scaling conjugacy is a dim-4 statement, got dim {g.dim}")
    cs = params.speed
    if cs == 0:
        raise ValueError("scaling consistency needs c != 0")
    mapped = scaling_transform(field, 1.0 / cs)
    unit = params.with_(omega=params.omega / cs**2, c=tuple(np.asarray(params.c) / cs))
    before = report(params, field)
    after = report(unit, mapped)
    return ScalingReport(
        speed=cs,
        factor_Q=after.Q / before.Q,
        factor_V=after.V / before.V,
        expected=cs**-2.0,
        N_original=before.N,
        N_mapped=after.N,
        mapped=mapped,
    )


@dataclass
class ProbeResult:
    trace_Q: list[float]
    final: TriField
    final_Q: float
    nehari_residual: float
    dilation_residual: float
    verdict: str
    iterations: int


def nonexistence_probe(params: Params, grid: Grid, opts: SolveOptions = SolveOptions(restarts=1)) -> ProbeResult:
    """Nehari descent at the exact mass-resonant zero-mass point.

    All three stripped L2 coefficients vanish, so critical points must satisfy
    both ``K = 3V`` (Nehari) and ``K = (N/2) V`` (dilation); for ``N < 6``
    only ``K = 0`` is compatible.  The descent is expected to drain ``Q``
    rather than converge to a nontrivial profile.
    """
    g1, g2, g3 = params.gammas
    if not (params.mass_resonant and abs(g1 - g2) <= 1e-12 * g1):
        raise ValueError("probe requires gamma1 = gamma2 and gamma1 + gamma2 = gamma3")
    c2 = params.speed**2
    if c2 == 0 or abs(params.omega - g1 * c2 / 4) > 1e-12 * max(1.0, params.omega):
        raise ValueError("probe requires c != 0 and omega = gamma1 |c|^2 / 4")
    rng = np.random.default_rng(opts.seed)
    f0 = _random_initial(params, grid, rng, positive=False)
    run = nehari_descent(params, f0, opts, record_trace=True)
    f = run.profile
    kin, _ = kinetic_parts(f)
    K = float(kin.sum())
    V = tilde_report(params, f).V
    n = grid.dim
    neh = abs(K - 3 * V) / K if K > 0 else 0.0
    dil = abs(K - n / 2 * V) / K if K > 0 else 0.0
    drop = run.trace_Q[-1] / run.trace_Q[0]
    if run.converged and run.trace_Q[-1] > 0:
        verdict = (
            f"descent reached a torus critical point (Q={run.trace_Q[-1]:.3e}, {drop:.2e} of start); "
            f"dilation identity residual {dil:.2e} shows it is a box artifact"
        )
    else:
        verdict = f"no nontrivial critical point: Q drained to {drop:.2e} of its initial value"
    return ProbeResult(
        trace_Q=run.trace_Q,
        final=f,
        final_Q=run.trace_Q[-1],
        nehari_residual=neh,
        dilation_residual=dil,
        verdict=verdict,
        iterations=run.iterations,
    )


def identities_incompatible(K: float, V: float, dim: int, tol: float = 1e-12) -> bool:
    """True when ``K = 3V`` and ``K = (dim/2) V`` cannot both hold (i.e. ``K > 0`` and ``dim != 6``)."""
    both = abs(K - 3 * V) <= tol * max(1.0, K) and abs(K - dim / 2 * V) <= tol * max(1.0, K)
    return not both if K > tol else False
