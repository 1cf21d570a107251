"""Field triples, coupling parameters, conserved quantities and symmetries."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid, norm2, spectral_energy, to_spectral, translate

RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Couplings ``gamma1..3`` plus wave parameters ``omega`` and velocity ``c``."""

    gamma1: float
    gamma2: float
    gamma3: float
    omega: float = 0.0
    c: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive real, got {val}")
        if not np.isfinite(self.omega):
            raise ValueError("omega must be finite")
        object.__setattr__(self, "c", tuple(float(x) for x in np.atleast_1d(self.c)))

    @property
    def gammas(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2, self.gamma3])

    @property
    def mass_resonant(self) -> bool:
        return abs(self.gamma1 + self.gamma2 - self.gamma3) <= RESONANCE_TOL

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.c)) if self.c else 0.0

    def velocity(self, grid: Grid) -> np.ndarray:
        """``c`` as a length-``dim`` vector (empty means zero velocity)."""
        if not self.c:
            return np.zeros(grid.dim)
        return grid.vector(self.c)

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TriField:
    """The complex triple ``(u, v, w)`` on a shared grid.

    Samples are stored stacked as ``data[0..2]`` and are read-only; transforms
    return new triples.
    """

    grid: Grid
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.shape != (3,) + self.grid.shape:
            raise ValueError(f"triple shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", _readonly(data))

    @classmethod
    def from_components(cls, grid: Grid, u, v, w) -> "TriField":
        comps = [np.broadcast_to(np.asarray(a, dtype=complex), grid.shape) for a in (u, v, w)]
        return cls(grid, np.stack(comps))

    @classmethod
    def zeros(cls, grid: Grid) -> "TriField":
        return cls(grid, np.zeros((3,) + grid.shape, dtype=complex))

    @property
    def u(self) -> np.ndarray:
        return self.data[0]

    @property
    def v(self) -> np.ndarray:
        return self.data[1]

    @property
    def w(self) -> np.ndarray:
        return self.data[2]

    def with_data(self, data: np.ndarray) -> "TriField":
        return TriField(self.grid, data)

    def scaled(self, factor) -> "TriField":
        return TriField(self.grid, self.data * factor)

    def __add__(self, other: "TriField") -> "TriField":
        self._same_grid(other)
        return TriField(self.grid, self.data + other.data)

    def __sub__(self, other: "TriField") -> "TriField":
        self._same_grid(other)
        return TriField(self.grid, self.data - other.data)

    def _same_grid(self, other: "TriField") -> None:
        if other.grid != self.grid:
            raise ValueError("triples live on different grids")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def norm(self) -> float:
        """L2 norm of the stacked triple."""
        return float(np.sqrt(norm2(self.grid, self.data)))

    def rel_distance(self, other: "TriField") -> float:
        self._same_grid(other)
        denom = other.norm()
        diff = float(np.sqrt(norm2(self.grid, self.data - other.data)))
        return diff / denom if denom > 0 else diff

    def swapped(self) -> "TriField":
        """Exchange the ``u`` and ``v`` slots."""
        return TriField(self.grid, self.data[[1, 0, 2]])


@dataclass(frozen=True)
class InvariantSet:
    M: float
    M1: float
    M2: float
    M3: float
    K: float
    E: float
    P: tuple[float, ...]

    def as_row(self) -> list[float]:
        return [self.M, self.M1, self.M2, self.M3, self.K, self.E, *self.P]


def component_norms(field: TriField) -> np.ndarray:
    """Squared L2 norms of ``u, v, w``."""
    g = field.grid
    return np.array([norm2(g, field.data[j]) for j in range(3)])


def kinetic_parts(field: TriField) -> tuple[np.ndarray, np.ndarray]:
    """Per-component ``||grad f||^2`` and momentum integrals ``(i d_j f, f)``.

    Returns ``(kin, mom)`` with shapes ``(3,)`` and ``(3, dim)``.
    """
    g = field.grid
    fh = to_spectral(g, field.data)
    kin = np.array([spectral_energy(g, fh[j], g.k2) for j in range(3)])
    ks = g.wavenumbers()
    # i d_j f has symbol -k_j, so (i d_j f, f) = -sum k_j |f_hat|^2.
    mom = np.array([[-spectral_energy(g, fh[j], kj) for kj in ks] for j in range(3)])
    return kin, mom


def cubic(field: TriField, weight: np.ndarray | None = None) -> float:
    """``Re int weight * u v conj(w)``."""
    prod = field.u * field.v * np.conj(field.w)
    if weight is not None:
        prod = prod * weight
    return float(np.real(prod.sum())) * field.grid.cell_volume


def invariants(params: Params, field: TriField) -> InvariantSet:
    g1, g2, g3 = params.gammas
    nu, nv, nw = component_norms(field)
    kin, mom = kinetic_parts(field)
    K = float(kin.sum())
    P = params.gammas @ mom
    return InvariantSet(
        M=g1 * nu + g2 * nv + 2 * g3 * nw,
        M1=g1 * nu + g3 * nw,
        M2=g2 * nv + g3 * nw,
        M3=g1 * nu - g2 * nv,
        K=K,
        E=0.5 * K - cubic(field),
        P=tuple(float(p) for p in P),
    )


def gauge_transform(field: TriField, theta: float) -> TriField:
    e = np.exp(1j * theta)
    return field.with_data(field.data * np.array([e, e, e * e]).reshape((3,) + (1,) * field.grid.dim))


def scaling_transform(field: TriField, lam: float) -> TriField:
    """``lam^2 f(lam x)`` on the rescaled torus of half-width ``L / lam``.

    The new grid has the same point count, so sample ``i`` of the result is
    exactly ``lam^2`` times sample ``i`` of the input.
    """
    if not lam > 0:
        raise ValueError(f"scaling factor must be positive, got {lam}")
    g = field.grid
    new_grid = Grid(g.dim, g.n, g.half_width / lam)
    return TriField(new_grid, lam**2 * np.asarray(field.data))


def dressing_wavenumbers(params: Params, grid: Grid) -> np.ndarray:
    """``gamma_j c / 2`` per component, shape ``(3, dim)``."""
    return np.outer(params.gammas, params.velocity(grid)) / 2.0


def _require_commensurate(grid: Grid, kappa: np.ndarray, what: str) -> None:
    if not grid.on_lattice(kappa):
        raise ValueError(
            f"{what}: wavenumbers {np.asarray(kappa).tolist()} are not on the dual lattice "
            f"pi*m/L with L={grid.half_width}; choose c commensurate with the torus"
        )


def dressing_phases(params: Params, grid: Grid, sign: int = 1) -> np.ndarray:
    """``exp(sign * i gamma_j c.x / 2)`` stacked as ``(3, *shape)``."""
    kappa = dressing_wavenumbers(params, grid)
    _require_commensurate(grid, kappa, "phase dressing")
    return np.stack([grid.plane_wave(sign * kappa[j]) for j in range(3)])


def galilean_boost(params: Params, field: TriField, c, t: float = 0.0) -> TriField:
    """Galilean transform of a solution snapshot at time ``t`` with velocity ``c``.

    ``u -> exp(i g1 c.x/2 - i g1 |c|^2 t/4) u(x - c t)`` and likewise for
    ``v, w`` with ``g2, g3``.  It maps solutions to solutions only under
    mass resonance.
    """
    g = field.grid
    cvec = g.vector(c)
    boosted_params = params.with_(c=tuple(cvec))
    phases = dressing_phases(boosted_params, g)
    shifted = translate(g, field.data, cvec * t)
    c2 = float(cvec @ cvec)
    time_phase = np.exp(-1j * params.gammas * c2 * t / 4.0).reshape((3,) + (1,) * g.dim)
    return field.with_data(phases * time_phase * shifted)


def oscillating_data(params: Params, field: TriField, c) -> TriField:
    """Dress undressed data by ``exp(i gamma_j c.x / 2)``."""
    g = field.grid
    phases = dressing_phases(params.with_(c=tuple(g.vector(c))), g)
    return field.with_data(phases * field.data)


def gradient_norm(field: TriField) -> float:
    """``sqrt(K)``; the blowup proxy."""
    kin, _ = kinetic_parts(field)
    return float(np.sqrt(kin.sum()))


def gaussian_triple(
    grid: Grid,
    amplitudes=(1.0, 1.0, 1.0),
    widths=(1.0, 1.0, 1.0),
    centers=None,
    wavenumbers=None,
) -> TriField:
    """Component-wise Gaussians ``a exp(-|x - x0|^2 / (2 s^2)) exp(i k.x)``."""
    comps = []
    for j in range(3):
        x0 = np.zeros(grid.dim) if centers is None else grid.vector(centers[j])
        r2 = sum((xc - x0[i]) ** 2 for i, xc in enumerate(grid.coords()))
        comp = amplitudes[j] * np.exp(-r2 / (2.0 * widths[j] ** 2))
        if wavenumbers is not None:
            comp = comp * grid.plane_wave(wavenumbers[j])
        comps.append(comp)
    return TriField.from_components(grid, *comps)

