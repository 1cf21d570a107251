"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary) and
then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest
from conftest import random_smooth, record

from triwave.evolution import (
    EvolveConfig,
    Region,
    classify_region,
    evolve,
    h1_bound,
    oscillation_scan,
    region_series,
    strang_step,
    threshold_constants,
    unit_params,
)
from triwave.functionals import action_gradient, nehari_project, report, tilde_report
from triwave.grid import inner, make_grid, translate
from triwave.solvers import (
    SolveOptions,
    gn_constant,
    ground_state,
    mu_estimate,
    nonexistence_probe,
    pohozaev_check,
    scaling_consistency,
    traveling_wave,
)
from triwave.state import (
    Params,
    TriField,
    component_norms,
    galilean_boost,
    gauge_transform,
    gaussian_triple,
    invariants,
    oscillating_data,
)

pytestmark = pytest.mark.slow


def run(params, f, dt, t_final):
    for _ in range(int(round(t_final / dt))):
        f = strang_step(params, f, dt)
    return f


def test_01_conservation():
    start = time.perf_counter()
    g = make_grid(1, 256, 16.0)
    p = Params(1, 1, 2)
    f = gaussian_triple(g, (1.0, 0.8, 1.2), (1.0, 1.3, 0.9), [[0.5], [-0.4], [0.0]], [[np.pi / 8], [0.0], [-np.pi / 16]])
    d = evolve(p, f, EvolveConfig(1e-3, 1.0, snapshot_every=10)).drift()
    mass = max(d["M"], d["M1"], d["M2"], d["M3"])
    other = max(d["E"], d["P"])
    elapsed = time.perf_counter() - start
    ok = mass < 1e-8 and other < 1e-6 and elapsed < 10
    record(1, "conservation", ok, f"mass drift {mass:.2e}, E/|P| drift {other:.2e}, {elapsed:.1f} s")
    assert ok


def test_02_integrator_order():
    start = time.perf_counter()
    g = make_grid(1, 256, 16.0)
    p = Params(1, 1, 2)
    f = gaussian_triple(g, (1.0, 0.8, 1.2), (1.0, 1.3, 0.9), [[0.5], [-0.4], [0.0]], [[np.pi / 8], [0.0], [-np.pi / 16]])
    T = 1.0
    ref = run(p, f, 1.25e-4, T)
    errs = [run(p, f, dt, T).rel_distance(ref) for dt in (4e-3, 2e-3, 1e-3)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    elapsed = time.perf_counter() - start
    ok = all(1.8 <= q <= 2.2 for q in orders) and elapsed < 30
    record(2, "integrator order", ok, f"orders {orders[0]:.3f}, {orders[1]:.3f}, {elapsed:.1f} s")
    assert ok


def test_03_ground_state():
    start = time.perf_counter()
    p = Params(1, 1, 2, omega=1.0)
    gs = ground_state(p, make_grid(1, 256, 16.0))
    rep = report(gs.params, gs.profile)
    pz = pohozaev_check(gs.params, gs.profile)
    n_rel = abs(rep.N) / rep.Q
    s_rel = abs(rep.S - rep.Q / 3) / rep.S
    elapsed = time.perf_counter() - start
    ok = gs.grad_residual < 1e-6 and pz.first < 1e-4 and pz.second < 1e-4 and n_rel < 1e-8 and s_rel < 1e-8 and elapsed < 60
    record(
        3,
        "ground state",
        ok,
        f"residual {gs.grad_residual:.1e}, Pohozaev {pz.first:.1e}/{pz.second:.1e}, N/Q {n_rel:.1e}, "
        f"S vs Q/3 {s_rel:.1e}, S = {rep.S:.10f}, {elapsed:.1f} s",
    )
    assert ok


def test_04_gn_sharpness():
    start = time.perf_counter()
    g = make_grid(4, 24, 4.0)
    res = gn_constant(g, SolveOptions(restarts=1, tol_grad=1e-9, max_iters=3000))
    p = res.ground.params
    M = invariants(p, res.ground_profile).M
    gap = abs(res.alpha - 2 * math.sqrt(M)) / res.alpha
    rng = np.random.default_rng(2024)
    worst = -np.inf
    for _ in range(200):
        f = gaussian_triple(g, rng.uniform(0.2, 3, 3), rng.uniform(0.5, 1.5, 3), rng.uniform(-0.7, 0.7, (3, 4)))
        inv = invariants(p, f)
        T = float(np.real(np.sum(f.u * f.v * f.w))) * g.cell_volume
        scale = inv.K * math.sqrt(inv.M)
        worst = max(worst, (T - res.C_opt * scale) / scale)
    elapsed = time.perf_counter() - start
    ok = gap < 1e-3 and worst < 1e-6 and elapsed < 900
    record(
        4,
        "GN sharpness",
        ok,
        f"|J - 2 sqrt(M)|/J = {gap:.2e} (budget 1e-3), C_opt = {res.C_opt:.6f}, "
        f"worst trial margin {worst:.2e} (budget 1e-6), {elapsed:.1f} s",
    )
    assert ok


def _commensurate_case_a(rng, L):
    gam = tuple(float(x) for x in rng.integers(1, 4, size=3))
    c = 2 * np.pi * rng.integers(1, 3) / L
    g1, g2, g3 = gam
    floor = max(g1 * c * c / 4, g2 * c * c / 4, g3 * c * c / 8)
    return Params(*gam, omega=floor + rng.uniform(0.2, 2.0), c=(c,))


def test_05_gradient_oracle():
    L = 8.0
    g = make_grid(1, 128, L)
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(3):
        p = _commensurate_case_a(rng, L)
        f = random_smooth(g, rng)
        G = action_gradient(p, f).data
        for _ in range(10):
            d = rng.standard_normal(f.data.shape) + 1j * rng.standard_normal(f.data.shape)
            h = 1e-5
            fd = (tilde_report(p, f.with_data(f.data + h * d)).S - tilde_report(p, f.with_data(f.data - h * d)).S) / (2 * h)
            an = inner(g, G, d)
            worst = max(worst, abs(fd - an) / abs(an))
    ok = worst < 1e-6
    record(5, "gradient oracle", ok, f"worst relative error {worst:.2e} over 30 directions")
    assert ok


def test_06_nehari_projection():
    L = 8.0
    g = make_grid(1, 128, L)
    rng = np.random.default_rng(66)
    worst = 0.0
    trials = 0
    while trials < 100:
        p = _commensurate_case_a(rng, L)
        f = random_smooth(g, rng)
        if not tilde_report(p, f).V > 0:
            continue
        proj, _ = nehari_project(p, f)
        rep = tilde_report(p, proj)
        worst = max(worst, abs(rep.N) / rep.Q)
        trials += 1
    ok = worst < 1e-10
    record(6, "Nehari projection", ok, f"worst |N|/Q {worst:.2e} over 100 trials")
    assert ok


def test_07_galilean_dichotomy():
    start = time.perf_counter()
    g = make_grid(1, 256, 16.0)
    f = gaussian_triple(g, (1.0, 0.8, 1.1), (1.2, 1.0, 1.5), [[0.5], [-0.3], [0.0]])
    c = [math.pi / 4]
    errs = {}
    for gam in ((1, 1, 2), (1, 1, 3)):
        p = Params(*gam)
        lhs = run(p, galilean_boost(p, f, c, 0.0), 1e-3, 0.5)
        rhs = galilean_boost(p, run(p, f, 1e-3, 0.5), c, 0.5)
        errs[gam] = lhs.rel_distance(rhs)
    elapsed = time.perf_counter() - start
    ok = errs[(1, 1, 2)] < 1e-6 and errs[(1, 1, 3)] > 1e-2 and elapsed < 60
    record(
        7,
        "Galilean dichotomy",
        ok,
        f"resonant {errs[(1, 1, 2)]:.2e}, gamma=(1,1,3) {errs[(1, 1, 3)]:.2e}, {elapsed:.1f} s",
    )
    assert ok


def test_08_traveling_wave_self_propagation():
    start = time.perf_counter()
    g = make_grid(1, 256, 16.0)
    c = math.pi / 8
    p = Params(1, 1, 3, omega=1.0, c=(c,))
    tw = traveling_wave(p, g, SolveOptions(restarts=2))
    f0 = tw.dressed()
    # shift of exactly four grid cells
    T = 4 * g.spacing / c
    traj = evolve(p, f0, EvolveConfig(T / 1000, T, snapshot_every=1000, store_snapshots=False))
    expect = gauge_transform(f0.with_data(translate(g, f0.data, [c * T])), p.omega * T)
    err = traj.final.rel_distance(expect)
    elapsed = time.perf_counter() - start
    ok = tw.grad_residual < 1e-7 and err < 1e-4 and elapsed < 300
    record(8, "traveling-wave self-propagation", ok, f"relative L2 mismatch {err:.2e} at T = {T:.4f}, {elapsed:.1f} s")
    assert ok


def test_09_global_existence_scan():
    start = time.perf_counter()
    g = make_grid(1, 512, 4 * math.pi)
    p = Params(1, 1, 3)
    opts = SolveOptions(restarts=2)
    mu_unit = mu_estimate(unit_params(p, "A0", [1.0]), g, opts, strict=False)
    cap = threshold_constants(p, mu_unit, "A0")
    f = gaussian_triple(g, (0.25, 0.25, 0.25), (1.0, 1.0, 1.0))
    masses = component_norms(f)
    under = max(masses[0], masses[1]) < cap.value
    rows = oscillation_scan(p, f, [[2.0], [4.0], [8.0], [16.0]], mu=lambda pc: mu_estimate(pc, g, opts, strict=False))
    vs = [abs(r.V) for r in rows]
    monotone = all(a > b for a, b in zip(vs, vs[1:]))
    decay = vs[0] / vs[-1]
    last = rows[-1]
    pc = p.with_(omega=last.omega, c=(last.speed,))
    data = oscillating_data(pc, f, [last.speed])
    traj = evolve(pc, data, EvolveConfig(1e-3, 2.0, snapshot_every=10, store_snapshots=False))
    bound = h1_bound(last.mu, invariants(pc, data).M, pc)
    kmax = max(inv.K for inv in traj.invariant_series)
    elapsed = time.perf_counter() - start
    ok = (
        under
        and monotone
        and decay >= 1e3
        and last.region == Region.A_plus
        and traj.verdict == "completed"
        and kmax < bound
        and elapsed < 600
    )
    record(
        9,
        "global-existence scan",
        ok,
        f"max mass {max(masses[0], masses[1]):.4f} < cap {cap.value:.4f}, |V| decay x{decay:.2e}, "
        f"|c|=16 region {last.region.value}, max K {kmax:.3g} < bound {bound:.4g}, {elapsed:.1f} s",
    )
    assert ok


def test_10_scaling_conjugacy():
    g = make_grid(4, 8, 6.0)
    rng = np.random.default_rng(1010)
    worst = 0.0
    factors = []
    for _ in range(20):
        gam = rng.uniform(0.5, 3.0, 3)
        c = rng.uniform(-2, 2, 4)
        p = Params(*gam, omega=rng.uniform(1.0, 5.0), c=tuple(c))
        f = random_smooth(g, rng, decay=1.2)
        sc = scaling_consistency(p, f)
        worst = max(worst, abs(sc.factor_Q - sc.factor_V) / abs(sc.factor_V))
        factors.append(sc.factor_Q * sc.speed**2)
    spread = max(abs(x - 1) for x in factors)
    ok = worst < 1e-10
    record(
        10,
        "scaling conjugacy",
        ok,
        f"worst Q/V factor mismatch {worst:.2e}; factor = |c|^-2 (max deviation {spread:.1e})",
    )
    assert ok


def test_11_a_plus_invariance():
    g = make_grid(1, 128, 16.0)
    p = Params(1, 1, 2, omega=1.0)
    mu = ground_state(p, g, SolveOptions(restarts=1)).action_value
    rng = np.random.default_rng(1111)
    ok_all, done = True, 0
    while done < 10:
        f = random_smooth(g, rng).scaled(rng.uniform(0.2, 0.6))
        if classify_region(p, f, mu) != Region.A_plus:
            continue
        traj = evolve(p, f, EvolveConfig(2e-3, 2.0, snapshot_every=25))
        ok_all &= traj.verdict == "completed" and all(r == Region.A_plus for r in region_series(p, traj, mu))
        done += 1
    record(11, "A+ invariance", ok_all, f"10 trajectories to T=2, mu = {mu:.6f}")
    assert ok_all


def test_12_nonexistence_probe():
    g = make_grid(1, 256, 16.0)
    c = math.pi / 4
    probe = nonexistence_probe(Params(1, 1, 2, omega=c * c / 4, c=(c,)), g, SolveOptions(restarts=1))
    matched = Params(1, 1, 3, c=(c,))
    threshold = max(c * c / 4, 3 * c * c / 8)
    ref = traveling_wave(matched.with_(omega=1.5 * threshold), g, SolveOptions(restarts=2))
    q_ref = tilde_report(ref.params, ref.profile).Q
    ratio = probe.final_Q / q_ref
    ok = ratio < 0.1
    record(12, "nonexistence probe", ok, f"probe Q {probe.final_Q:.3e} / matched Q {q_ref:.3e} = {ratio:.2e}")
    assert ok
