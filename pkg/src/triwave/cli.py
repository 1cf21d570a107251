"""Command-line entry point.

Exit codes: 0 success, 1 invalid input (bad arguments, configuration or
parameters), 2 numerical failure (non-convergence, unexpected blowup flag,
failed self-check).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import config as cfgmod
from .evolution import (
    EvolveConfig,
    evolve,
    invariant_drift,
    oscillation_scan,
    select_branch,
    strang_step,
    threshold_constants,
    unit_params,
)
from .functionals import action_gradient, classify_case, nehari_project, report, tilde_report
from .grid import inner
from .io import read_series, read_snapshot, write_series, write_snapshot, write_table
from .solvers import (
    ConvergenceError,
    ground_state,
    gn_constant,
    mu_estimate,
    nonexistence_probe,
    pohozaev_check,
    traveling_wave,
)
from .state import Params, TriField, gauge_transform, gaussian_triple, invariants

log = logging.getLogger("triwave")

COMMANDS = ("evolve", "ground", "twave", "gn", "mu", "threshold", "scan", "probe", "check")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triwave", description="Three-wave interaction solver")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}", parser_class=_Parser)
    sub.required = True
    helps = {
        "evolve": "integrate initial data and write the invariant series (CSV)",
        "ground": "compute the positive ground state (c = 0)",
        "twave": "compute a boosted traveling-wave profile",
        "gn": "estimate the sharp Gagliardo-Nirenberg constant (dim 4)",
        "mu": "estimate the minimal action on the Nehari manifold",
        "threshold": "mass cap of the oscillating-data global existence result",
        "scan": "oscillation scan over the configured velocities (CSV table)",
        "probe": "descent at the mass-resonant zero-mass point (Q trace CSV)",
        "check": "invariant self-tests; prints PASS/FAIL per property",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--log-level", default=argparse.SUPPRESS, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        p.add_argument("--config", help="INI run configuration (defaults used when omitted)")
        p.add_argument("--out", help="output path")
        if name == "evolve":
            p.add_argument("--final", help="also write the final state as a snapshot")
            p.add_argument("--allow-blowup", action="store_true", help="exit 0 even when the blowup flag is raised")
        if name == "twave":
            p.add_argument("--case", choices=["A", "B", "C", "D", "E"])
            p.add_argument("--exploratory", action="store_true", help="skip the dimension restriction of the case")
            p.add_argument("--dressed", action="store_true", help="write the profile with boost phases restored")
        if name in ("mu", "scan", "threshold"):
            p.add_argument("--exploratory", action="store_true", help="skip the dimension restriction of the case")
        if name == "check":
            p.add_argument("--series", help="recompute drift statistics from a series CSV instead")
    return parser


def _initial(cfg: cfgmod.RunConfig) -> TriField:
    ini = cfg.initial
    if ini.kind == "snapshot":
        field, _ = read_snapshot(ini.path)
        if field.grid != cfg.make_grid():
            raise ValueError(f"snapshot grid {field.grid} differs from the configured grid")
        return field
    return gaussian_triple(cfg.make_grid(), ini.amplitudes, ini.widths)


def _print_report(params, field, tilde):
    rep = tilde_report(params, field) if tilde else report(params, field)
    print(f"S = {rep.S:.15g}\nQ = {rep.Q:.15g}\nV = {rep.V:.15g}\nN = {rep.N:.15g}")


def _cmd_evolve(cfg, args):
    params, field = cfg.make_params(), _initial(cfg)
    traj = evolve(params, field, cfg.evolve_config())
    if args.out:
        write_series(args.out, traj.times, traj.invariant_series, traj.verdict)
    if args.final:
        write_snapshot(args.final, traj.final, params)
    for name, val in traj.drift().items():
        print(f"drift {name} = {val:.3e}")
    print(f"verdict = {traj.verdict}")
    if traj.verdict != "completed" and not args.allow_blowup:
        raise NumericalFailure("gradient growth exceeded blowup_factor")


def _cmd_ground(cfg, args):
    params = cfg.make_params()
    res = ground_state(params.with_(c=()), cfg.make_grid(), cfg.solve_options())
    _print_report(res.params, res.profile, tilde=False)
    pz = pohozaev_check(res.params, res.profile)
    print(f"pohozaev_1 = {pz.first:.3e}\npohozaev_2 = {pz.second:.3e}")
    if pz.critical is not None:
        print(f"pohozaev_critical = {pz.critical:.3e}")
    print(f"grad_residual = {res.grad_residual:.3e}")
    if args.out:
        write_snapshot(args.out, res.profile, res.params)


def _cmd_twave(cfg, args):
    params = cfg.make_params()
    res = traveling_wave(params, cfg.make_grid(), cfg.solve_options(), case=args.case, strict=not args.exploratory)
    print(f"case = {res.case.value if res.case else '-'}")
    _print_report(res.params, res.profile, tilde=True)
    print(f"grad_residual = {res.grad_residual:.3e}")
    if args.out:
        write_snapshot(args.out, res.dressed() if args.dressed else res.profile, res.params)


def _cmd_gn(cfg, args):
    grid = cfg.make_grid()
    g1, g2, g3 = cfg.params.gamma
    res = gn_constant(grid, cfg.solve_options(), Params(g1, g2, g3))
    M = invariants(res.ground.params, res.ground_profile).M
    print(f"alpha = {res.alpha:.15g}\nC_opt = {res.C_opt:.15g}\n2*sqrt(M) = {2 * math.sqrt(M):.15g}")
    print(f"relative gap = {abs(res.alpha - 2 * math.sqrt(M)) / res.alpha:.3e}")
    if args.out:
        write_snapshot(args.out, res.ground_profile, res.ground.params)


def _cmd_mu(cfg, args):
    mu = mu_estimate(cfg.make_params(), cfg.make_grid(), cfg.solve_options(), strict=not args.exploratory)
    print(f"mu = {mu:.15g}")


def _direction(cfg):
    c = np.asarray(cfg.make_params().velocity(cfg.make_grid()))
    if np.any(c):
        return c
    if cfg.scan.speeds:
        return np.asarray(cfg.scan.speeds[-1], dtype=float)
    return np.eye(cfg.grid.dim)[0]


def _mu_unit(cfg, branch, args):
    if cfg.scan.mu_unit > 0:
        return cfg.scan.mu_unit
    unit = unit_params(cfg.make_params(), branch, _direction(cfg))
    return mu_estimate(unit, cfg.make_grid(), cfg.solve_options(), strict=not args.exploratory)


def _cmd_threshold(cfg, args):
    params = cfg.make_params()
    branch = cfg.scan.branch or select_branch(params)
    mu_unit = _mu_unit(cfg, branch, args)
    th = threshold_constants(params, mu_unit, branch)
    print(f"branch = {th.name}\nmu_unit = {mu_unit:.15g}\ncap = {th.value:.15g}\ncapped = {','.join(th.capped)}")


def _cmd_scan(cfg, args):
    params = cfg.make_params()
    if not cfg.scan.speeds:
        raise ValueError("[scan] speeds: at least one velocity is required")
    field = _initial(cfg)
    grid, opts = cfg.make_grid(), cfg.solve_options()
    mu = cfg.scan.mu or (lambda p: mu_estimate(p, grid, opts, strict=not args.exploratory))
    rows = oscillation_scan(params, field, cfg.scan.speeds, mu=mu, branch=cfg.scan.branch or None)
    table = [[r.speed, r.omega, r.V, r.S, r.N, r.mu, r.region.value] for r in rows]
    header = ["speed", "omega", "V", "S", "N", "mu", "region"]
    if args.out:
        write_table(args.out, header, table)
    print(",".join(header))
    for row in table:
        print(",".join(f"{x:.6e}" if isinstance(x, float) else x for x in row))


def _cmd_probe(cfg, args):
    res = nonexistence_probe(cfg.make_params(), cfg.make_grid(), cfg.solve_options())
    print(f"final_Q = {res.final_Q:.6e}\nnehari_residual = {res.nehari_residual:.3e}")
    print(f"dilation_residual = {res.dilation_residual:.3e}\nverdict = {res.verdict}")
    if args.out:
        write_table(args.out, ["iteration", "Q"], [[i, q] for i, q in enumerate(res.trace_Q)])


def _self_checks(cfg) -> list[tuple[str, bool, str]]:
    params, field = cfg.make_params(), _initial(cfg)
    grid = field.grid
    out = []
    ev = cfg.evolve_config()
    traj = evolve(params, field, ev)
    d = traj.drift()
    worst_mass = max(d[k] for k in ("M", "M1", "M2", "M3"))
    out.append(("mass conservation (< 1e-8)", worst_mass < 1e-8, f"{worst_mass:.2e}"))
    worst = max(d["E"], d["P"])
    out.append(("energy and momentum conservation (< 1e-6)", worst < 1e-6, f"{worst:.2e}"))
    steps = min(ev.n_steps, 50)
    a = field
    b = gauge_transform(field, 0.7)
    for _ in range(steps):
        a = strang_step(params, a, ev.dt)
        b = strang_step(params, b, ev.dt)
    err = gauge_transform(a, 0.7).rel_distance(b) if a.norm() > 0 else 0.0
    out.append(("gauge equivariance (< 1e-10)", err < 1e-10, f"{err:.2e}"))
    if params.gamma1 == params.gamma2:
        f = TriField.from_components(grid, field.u, field.u, field.w)
        for _ in range(steps):
            f = strang_step(params, f, ev.dt)
        err = TriField.from_components(grid, f.u, 0, 0).rel_distance(TriField.from_components(grid, f.v, 0, 0))
        out.append(("two-wave reduction u = v (< 1e-10)", err < 1e-10, f"{err:.2e}"))
    if classify_case(params) is not None and tilde_report(params, field).V > 0:
        rng = np.random.default_rng(cfg.solver.seed)
        G = action_gradient(params, field, project_zero_mass=False).data
        h = 1e-5
        worst = 0.0
        for _ in range(3):
            dirn = rng.standard_normal(field.data.shape) + 1j * rng.standard_normal(field.data.shape)
            fd = (
                tilde_report(params, field.with_data(field.data + h * dirn)).S
                - tilde_report(params, field.with_data(field.data - h * dirn)).S
            ) / (2 * h)
            an = inner(grid, G, dirn)
            worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
        out.append(("action gradient vs finite differences (< 1e-6)", worst < 1e-6, f"{worst:.2e}"))
        proj, _ = nehari_project(params, field)
        rep = tilde_report(params, proj)
        ratio = abs(rep.N) / rep.Q
        out.append(("Nehari projection exactness (< 1e-10 Q)", ratio < 1e-10, f"{ratio:.2e}"))
    zero = evolve(params, TriField.zeros(grid), EvolveConfig(ev.dt, min(ev.t_final, 10 * ev.dt), 1))
    ok = all(not np.any(s.data) for s in zero.snapshots)
    out.append(("zero data stays zero", ok, ""))
    return out


def _cmd_check(cfg, args):
    if args.series:
        times, series, verdict = read_series(args.series)
        print(f"samples = {len(times)}\nverdict = {verdict}")
        for name, val in invariant_drift(series).items():
            print(f"drift {name} = {val!r}")
        return
    failed = 0
    for name, ok, detail in _self_checks(cfg):
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        failed += not ok
    if failed:
        raise NumericalFailure(f"{failed} self-check(s) failed")


_HANDLERS = {
    "evolve": _cmd_evolve,
    "ground": _cmd_ground,
    "twave": _cmd_twave,
    "gn": _cmd_gn,
    "mu": _cmd_mu,
    "threshold": _cmd_threshold,
    "scan": _cmd_scan,
    "probe": _cmd_probe,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = cfgmod.load(args.config) if args.config else cfgmod.parse("")
        log.info("resolved configuration:\n%s", cfgmod.dumps(cfg).strip())
        _HANDLERS[args.command](cfg, args)
    except (ConvergenceError, NumericalFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
