"""Periodic torus discretization with FFT-based spectral operators.

The torus is ``[-L, L)^dim`` sampled at ``n`` points per axis.  Spectral
coefficients use the unnormalized forward DFT (``scipy.fft`` convention,
kernel ``exp(-i k x)``), so that ``from_spectral(to_spectral(f)) == f``.

All arrays handled here carry the spatial axes *last*; leading axes (for
instance the three components of a field triple) are left untouched by the
transforms.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft


def fft_workers() -> int:
    """Worker count for FFTs, capped by ``TRIWAVE_THREADS`` when set."""
    raw = os.environ.get("TRIWAVE_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the torus ``[-L, L)^dim``.

    Attributes:
        dim: spatial dimension, 1 to 4.
        n: points per axis (even, at least 8).
        half_width: ``L``; the box side length is ``2L``.
    """

    dim: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3, 4):
            raise ValueError(f"dim must be in 1..4, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n_per_dim must be even and >= 8, got {self.n}")
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.half_width) ** self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    @cached_property
    def x1d(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def k1d(self) -> np.ndarray:
        """Wavenumbers ``pi m / L`` in FFT order, ``m`` in ``[-n/2, n/2)``."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return np.pi * m / self.half_width

    @cached_property
    def k1d_deriv(self) -> np.ndarray:
        # Nyquist mode zeroed so ik maps real fields to real fields.
        k = self.k1d.copy()
        k[self.n // 2] = 0.0
        return k

    def coords(self) -> list[np.ndarray]:
        """Per-axis coordinate arrays broadcastable to ``shape``."""
        return [self._along(axis, self.x1d) for axis in range(self.dim)]

    @cached_property
    def mesh(self) -> np.ndarray:
        """Coordinates stacked as ``(dim, *shape)``."""
        return np.stack(np.meshgrid(*([self.x1d] * self.dim), indexing="ij"))

    def wavenumbers(self, deriv: bool = True) -> list[np.ndarray]:
        k = self.k1d_deriv if deriv else self.k1d
        return [self._along(axis, k) for axis in range(self.dim)]

    @cached_property
    def k2(self) -> np.ndarray:
        """Symbol of ``-Laplacian`` with the Nyquist mode zeroed, full shape."""
        out = np.zeros(self.shape)
        for kj in self.wavenumbers():
            out = out + kj**2
        return out

    @cached_property
    def k2_half(self) -> np.ndarray:
        """``k2`` in the real-transform layout (last axis holds ``m = 0..n/2``)."""
        out = np.zeros(self.shape[:-1] + (self.n // 2 + 1,))
        for axis in range(self.dim):
            k = self.k1d_deriv if axis < self.dim - 1 else self.k1d_deriv[: self.n // 2 + 1].copy()
            if axis == self.dim - 1:
                k[-1] = 0.0
            shape = [1] * self.dim
            shape[axis] = k.size
            out = out + k.reshape(shape) ** 2
        return out

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True off the Nyquist planes (full FFT layout)."""
        keep = np.ones(self.n, dtype=bool)
        keep[self.n // 2] = False
        out = np.ones(self.shape, dtype=bool)
        for axis in range(self.dim):
            out = out & self._along(axis, keep)
        return out

    def drop_nyquist(self, values: np.ndarray) -> np.ndarray:
        """Remove Nyquist content from fields stacked over the leading axes.

        The derivative symbol vanishes there, so those modes carry no kinetic
        energy and form spurious flat directions of the discrete action.
        """
        axes = tuple(range(-self.dim, 0))
        coeffs = scipy.fft.fftn(values, axes=axes, workers=fft_workers())
        return scipy.fft.ifftn(coeffs * self.nyquist_mask, axes=axes, workers=fft_workers())

    def _along(self, axis: int, vec: np.ndarray) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.n
        return vec.reshape(shape)

    def dot(self, vec, arrays: list[np.ndarray]) -> np.ndarray | float:
        vec = self.vector(vec)
        return sum(float(vec[j]) * arrays[j] for j in range(self.dim))

    def vector(self, vec) -> np.ndarray:
        """Coerce a velocity-like argument to a length-``dim`` float array."""
        arr = np.atleast_1d(np.asarray(vec, dtype=float))
        if arr.shape == (1,) and self.dim > 1:
            raise ValueError(f"expected a vector of length {self.dim}, got a scalar")
        if arr.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {arr.shape}")
        return arr

    def on_lattice(self, kappa, tol: float = 1e-9) -> bool:
        """True if every entry of ``kappa`` is a dual-lattice wavenumber."""
        m = np.asarray(kappa, dtype=float) * self.half_width / np.pi
        return bool(np.all(np.abs(m - np.round(m)) <= tol * np.maximum(1.0, np.abs(m))))

    def plane_wave(self, kvec) -> np.ndarray:
        """``exp(i k . x)`` sampled on the grid."""
        kvec = self.vector(kvec)
        phase = sum(kvec[j] * c for j, c in enumerate(self.coords()))
        return np.exp(1j * np.broadcast_to(phase, self.shape))

    def check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[-self.dim :] != self.shape or values.ndim < self.dim:
            raise ValueError(f"field shape {values.shape} does not match grid {self.shape}")
        return values

    def boundary_max(self, values: np.ndarray) -> float:
        """Largest modulus on the faces ``x_j = -L`` (validity diagnostic)."""
        values = self.check(values)
        out = 0.0
        for axis in self.axes:
            face = np.take(values, 0, axis=axis)
            out = max(out, float(np.max(np.abs(face))))
        return out


def make_grid(dim: int, n_per_dim: int, half_width: float) -> Grid:
    return Grid(int(dim), int(n_per_dim), float(half_width))


def to_spectral(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = grid.check(f)
    return scipy.fft.fftn(f, axes=grid.axes, workers=fft_workers())


def from_spectral(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    coeffs = grid.check(coeffs)
    return scipy.fft.ifftn(coeffs, axes=grid.axes, workers=fft_workers())


def to_spectral_real(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Half-spectrum transform of real samples (pairs with ``grid.k2_half``)."""
    return scipy.fft.rfftn(grid.check(f), axes=grid.axes, workers=fft_workers())


def from_spectral_real(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return scipy.fft.irfftn(coeffs, s=grid.shape, axes=grid.axes, workers=fft_workers())


def apply_laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    return from_spectral(grid, -grid.k2 * to_spectral(grid, f))


def apply_gradient(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Spectral gradient; returns an array with a new leading axis of length ``dim``."""
    fh = to_spectral(grid, f)
    return np.stack([from_spectral(grid, 1j * kj * fh) for kj in grid.wavenumbers()])


def divergence(grid: Grid, vec: np.ndarray) -> np.ndarray:
    out = 0
    for j, kj in enumerate(grid.wavenumbers()):
        out = out + 1j * kj * to_spectral(grid, vec[j])
    return from_spectral(grid, out)


def translate(grid: Grid, f: np.ndarray, shift) -> np.ndarray:
    """``f(x - shift)`` by spectral phase shift (exact for band-limited ``f``)."""
    shift = grid.vector(shift)
    phase = sum(kj * shift[j] for j, kj in enumerate(grid.wavenumbers(deriv=False)))
    return from_spectral(grid, np.exp(-1j * phase) * to_spectral(grid, f))


def inner(grid: Grid, f: np.ndarray, g: np.ndarray) -> float:
    """Real L2 pairing ``Re int f conj(g)`` by uniform quadrature."""
    f = grid.check(f)
    g = grid.check(g)
    if f.shape != g.shape:
        raise ValueError(f"shape mismatch {f.shape} vs {g.shape}")
    return float(np.real(np.vdot(g, f))) * grid.cell_volume


def norm2(grid: Grid, f: np.ndarray) -> float:
    """Squared L2 norm."""
    return float(np.vdot(f, f).real) * grid.cell_volume


def spectral_energy(grid: Grid, fh: np.ndarray, weight: np.ndarray | None = None) -> float:
    """Quadrature of ``weight * |f|^2`` evaluated from spectral coefficients (Parseval)."""
    power = np.abs(fh) ** 2
    if weight is not None:
        power = power * weight
    return float(power.sum()) * grid.cell_volume / grid.size
