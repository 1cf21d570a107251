"""Action, Nehari functional and their phase-stripped forms.

Notation: ``Q`` is the quadratic part of the action, ``V = Re int u v conj(w)``
the cubic part, ``S = Q - V`` the action and ``N = 2Q - 3V`` the Nehari
functional.  The *tilde* forms act on triples with the boost phases
``exp(i gamma_j c.x / 2)`` stripped off; the boost then reappears as the
oscillating weight ``exp(i (g1 + g2 - g3) c.x / 2)`` inside ``V``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import Grid, apply_laplacian, translate
from .state import (
    Params,
    TriField,
    _require_commensurate,
    component_norms,
    cubic,
    dressing_phases,
    kinetic_parts,
)

EQ_TOL = 1e-12


@dataclass(frozen=True)
class FunctionalReport:
    S: float
    Q: float
    V: float
    N: float
    tilde: bool = False


class Case(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


# Admissible dimensions per case; C and E are only proven for N = 5.
CASE_DIMS = {Case.A: (1, 5), Case.B: (3, 5), Case.C: (4, 5), Case.D: (3, 5), Case.E: (4, 5)}


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= EQ_TOL * max(1.0, abs(a), abs(b))


def classify_case(params: Params) -> Case | None:
    """Which of the admissible parameter regimes ``(omega, c, gammas)`` falls in.

    ``u`` and ``v`` enter symmetrically, so the ordering conditions are stated
    in terms of ``min``/``max`` of ``gamma1, gamma2``.
    """
    c2 = params.speed**2
    w = params.omega
    g1, g2, g3 = params.gammas
    lo, hi = min(g1, g2), max(g1, g2)
    if w > max(g1 * c2 / 4, g2 * c2 / 4, g3 * c2 / 8) and not _close(w, max(g1 * c2 / 4, g2 * c2 / 4, g3 * c2 / 8)):
        return Case.A
    if c2 == 0:
        return None
    if _close(w, g3 * c2 / 8):
        if hi < g3 / 2 and not _close(hi, g3 / 2):
            return Case.B
        if _close(hi, g3 / 2) and lo < hi and not _close(lo, hi):
            return Case.C
    if _close(w, hi * c2 / 4):
        if hi > max(lo, g3 / 2) and not _close(hi, lo) and not _close(hi, g3 / 2):
            return Case.D
        if _close(lo, hi) and g3 / 2 < lo and not _close(lo, g3 / 2):
            return Case.E
    return None


def require_case(params: Params, dim: int, case: Case | str | None = None, strict: bool = True) -> Case:
    """Validate ``params`` against a regime; raises ``ValueError`` if inadmissible.

    With ``strict=False`` the dimension restriction is not enforced (exploratory
    runs, e.g. zero-mass regimes below three dimensions).
    """
    found = classify_case(params)
    if found is None:
        raise ValueError(
            f"(omega={params.omega}, c={params.c}, gammas={tuple(params.gammas)}) satisfies none of the cases A-E"
        )
    if case is not None and Case(case) != found:
        raise ValueError(f"parameters satisfy case {found.value}, not the requested case {Case(case).value}")
    lo, hi = CASE_DIMS[found]
    if strict and not lo <= dim <= hi:
        raise ValueError(f"case {found.value} requires {lo} <= dim <= {hi}, got dim={dim}")
    return found


def mass_coefficients(params: Params) -> np.ndarray:
    """L2 coefficients of the stripped quadratic form (twice the displayed halves)."""
    g1, g2, g3 = params.gammas
    c2 = params.speed**2
    w = params.omega
    return np.array([g1 * w - g1**2 * c2 / 4, g2 * w - g2**2 * c2 / 4, 2 * g3 * w - g3**2 * c2 / 4])


def zero_mass_slots(params: Params) -> np.ndarray:
    a = mass_coefficients(params)
    scale = max(1.0, float(np.max(np.abs(a))), params.omega * float(np.max(params.gammas)))
    return np.abs(a) <= 1e-12 * scale


def cubic_weight(params: Params, grid: Grid) -> np.ndarray | None:
    """``exp(i (g1 + g2 - g3) c.x / 2)``, or ``None`` when it is identically one."""
    cvec = params.velocity(grid)
    kappa = (params.gamma1 + params.gamma2 - params.gamma3) * cvec / 2.0
    if not np.any(kappa):
        return None
    _require_commensurate(grid, kappa, "oscillating cubic weight")
    return grid.plane_wave(kappa)


def report(params: Params, field: TriField) -> FunctionalReport:
    g = field.grid
    cvec = params.velocity(g)
    nu, nv, nw = component_norms(field)
    kin, mom = kinetic_parts(field)
    P = params.gammas @ mom
    w = params.omega
    Q = 0.5 * kin.sum() + w * (params.gamma1 * nu / 2 + params.gamma2 * nv / 2 + params.gamma3 * nw) + 0.5 * float(cvec @ P)
    V = cubic(field)
    Q = float(Q)
    return FunctionalReport(S=Q - V, Q=Q, V=V, N=2 * Q - 3 * V, tilde=False)


def tilde_parts(params: Params, field: TriField) -> tuple[float, float]:
    kin, _ = kinetic_parts(field)
    Q = 0.5 * kin.sum() + 0.5 * float(mass_coefficients(params) @ component_norms(field))
    V = cubic(field, cubic_weight(params, field.grid))
    return float(Q), V


def tilde_report(params: Params, field: TriField) -> FunctionalReport:
    Q, V = tilde_parts(params, field)
    return FunctionalReport(S=Q - V, Q=Q, V=V, N=2 * Q - 3 * V, tilde=True)


def phase_map(field: TriField, params: Params, direction: str = "strip") -> TriField:
    """Strip (``exp(-i gamma_j c.x/2)``) or dress (``exp(+i ...)``) the three phases."""
    if direction not in ("strip", "dress"):
        raise ValueError(f"direction must be 'strip' or 'dress', got {direction!r}")
    sign = -1 if direction == "strip" else 1
    return field.with_data(dressing_phases(params, field.grid, sign) * field.data)


def twisted_translate(params: Params, field: TriField, y) -> TriField:
    """Translate a dressed triple by ``y`` and strip the boost phases."""
    g = field.grid
    shifted = field.with_data(translate(g, field.data, g.vector(y)))
    return phase_map(shifted, params, "strip")


def nehari_project(params: Params, field: TriField, tilde: bool = True) -> tuple[TriField, float]:
    """Radially rescale onto ``N = 0``; returns the projected triple and ``lambda0 = 2Q / 3V``."""
    rep = tilde_report(params, field) if tilde else report(params, field)
    if not rep.V > 0:
        raise ValueError(f"Nehari projection needs a positive cubic term, got V={rep.V:.3e}")
    lam = 2.0 * rep.Q / (3.0 * rep.V)
    return field.scaled(lam), lam


def action_gradient(params: Params, field: TriField, project_zero_mass: bool = True) -> TriField:
    """L2-Riesz representative of the first variation of the stripped action.

    For every direction ``g``: ``d/de S~(f + e g) = sum_j (G_j, g_j)`` with the
    real pairing ``(f, g) = Re int f conj(g)``.
    """
    g = field.grid
    a = mass_coefficients(params).reshape((3,) + (1,) * g.dim)
    u, v, w = field.u, field.v, field.w
    weight = cubic_weight(params, g)
    if weight is None:
        src = np.stack([w * np.conj(v), w * np.conj(u), u * v])
    else:
        cw = np.conj(weight)
        src = np.stack([cw * w * np.conj(v), cw * w * np.conj(u), weight * u * v])
    G = -apply_laplacian(g, field.data) + a * field.data - src
    if project_zero_mass:
        for j in np.flatnonzero(zero_mass_slots(params)):
            G[j] = G[j] - G[j].mean()
    return field.with_data(G)
