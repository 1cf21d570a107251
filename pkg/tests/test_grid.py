import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triwave.grid import (
    apply_gradient,
    apply_laplacian,
    divergence,
    fft_workers,
    from_spectral,
    from_spectral_real,
    inner,
    make_grid,
    norm2,
    spectral_energy,
    to_spectral,
    to_spectral_real,
    translate,
)


def test_make_grid_1d_pi():
    g = make_grid(1, 8, math.pi)
    assert g.size == 8
    assert g.spacing == pytest.approx(math.pi / 4)
    m = np.sort(np.round(g.k1d * g.half_width / math.pi))
    np.testing.assert_array_equal(m, np.arange(-4, 4))
    np.testing.assert_allclose(g.x1d, -math.pi + np.arange(8) * math.pi / 4)


def test_make_grid_2d_and_4d_counts():
    g = make_grid(2, 16, 4)
    assert g.size == 256 and g.spacing == 0.5
    assert make_grid(4, 24, 6).size == 331776


@pytest.mark.parametrize("args", [(1, 7, 1.0), (1, 6, 1.0), (0, 8, 1.0), (5, 8, 1.0), (1, 8, 0.0), (1, 8, -2.0)])
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_wavenumbers_are_scaled_dft_lattice():
    g = make_grid(1, 16, 3.0)
    np.testing.assert_allclose(g.k1d, np.fft.fftfreq(16, d=1 / 16) * math.pi / 3.0)


def test_constant_field_only_zero_mode():
    g = make_grid(2, 8, 1.0)
    fh = to_spectral(g, np.full(g.shape, 2.5 + 0j))
    assert abs(fh[0, 0]) > 0
    fh[0, 0] = 0
    assert np.max(np.abs(fh)) < 1e-12


def test_plane_wave_single_peak():
    g = make_grid(2, 16, 2.0)
    k = np.array([3, -2]) * math.pi / 2.0
    fh = np.abs(to_spectral(g, g.plane_wave(k)))
    assert np.count_nonzero(fh > 1e-9 * fh.max()) == 1


@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 3))
def test_roundtrip_and_parseval(seed, dim):
    rng = np.random.default_rng(seed)
    g = make_grid(dim, 8, 1.7)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    back = from_spectral(g, to_spectral(g, f))
    assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))
    direct = norm2(g, f)
    assert spectral_energy(g, to_spectral(g, f)) == pytest.approx(direct, rel=1e-12)


def test_size_mismatch_rejected():
    g = make_grid(1, 8, 1.0)
    with pytest.raises(ValueError):
        to_spectral(g, np.zeros(10))


def test_laplacian_eigenfunction_and_constant():
    g = make_grid(2, 16, 2.0)
    k = np.array([2, 1]) * math.pi / 2.0
    f = g.plane_wave(k)
    np.testing.assert_allclose(apply_laplacian(g, f), -(k @ k) * f, atol=1e-11)
    assert np.max(np.abs(apply_laplacian(g, np.ones(g.shape)))) < 1e-12


def test_laplacian_matches_finite_difference_on_gaussian():
    g = make_grid(1, 256, 16.0)
    x = g.x1d
    f = np.exp(-(x**2))
    lap = apply_laplacian(g, f).real
    # analytic second derivative; the centered stencil approximates it to O(h^2)
    exact = (4 * x**2 - 2) * np.exp(-(x**2))
    h = g.spacing
    fd = (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h**2
    assert np.max(np.abs(lap - exact)) / np.max(np.abs(exact)) < 1e-6
    assert np.max(np.abs(lap - fd)) / np.max(np.abs(exact)) < 0.1 * h


def test_gradient_symbol():
    g = make_grid(1, 32, math.pi)
    f = np.exp(1j * 3 * g.x1d)
    np.testing.assert_allclose(apply_gradient(g, f)[0], 3j * f, atol=1e-11)


def test_laplacian_is_divergence_of_gradient(rng):
    g = make_grid(3, 8, 1.3)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    a = apply_laplacian(g, f)
    b = divergence(g, apply_gradient(g, f))
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


def test_real_transform_laplacian_agrees(rng):
    for dim in (1, 2, 3):
        g = make_grid(dim, 8, 1.1)
        f = rng.standard_normal(g.shape)
        a = apply_laplacian(g, f).real
        b = from_spectral_real(g, -g.k2_half * to_spectral_real(g, f))
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


def test_inner_properties(rng):
    g = make_grid(1, 64, math.pi)
    e1, e2 = np.exp(1j * g.x1d), np.exp(2j * g.x1d)
    assert abs(inner(g, e1, e2)) < 1e-12
    assert inner(g, e1, e1) == pytest.approx(g.volume, rel=1e-14)
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    h = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    assert inner(g, f, h) == pytest.approx(inner(g, h, f), rel=1e-13)
    assert inner(g, f, f) >= 0


def test_plane_wave_quadrature_equals_volume():
    g = make_grid(3, 8, 0.9)
    pw = g.plane_wave(np.array([1, -2, 3]) * math.pi / 0.9)
    assert inner(g, pw, pw) == pytest.approx(g.volume, rel=1e-13)


def test_lattice_translate_is_roll():
    g = make_grid(1, 32, 2.0)
    f = np.exp(-(g.x1d**2)) * (1 + 0.3j * g.x1d)
    np.testing.assert_allclose(translate(g, f, 3 * g.spacing), np.roll(f, 3), atol=1e-12)


def test_on_lattice():
    g = make_grid(1, 16, 4.0)
    assert g.on_lattice([math.pi / 4 * 3])
    assert not g.on_lattice([0.3])


def test_fft_workers_env(monkeypatch):
    monkeypatch.setenv("TRIWAVE_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("TRIWAVE_THREADS", "junk")
    assert fft_workers() == 1
    monkeypatch.delenv("TRIWAVE_THREADS")
    assert fft_workers() == 1


def test_drop_nyquist_removes_only_nyquist_planes():
    g = make_grid(2, 16, 4.0)
    x, y = g.coords()
    smooth = np.exp(1j * (np.pi / 4) * x) * np.cos(np.pi / 2 * y)
    nyq = np.cos(np.pi * 8 / 4.0 * x) * np.ones_like(y)
    out = g.drop_nyquist(np.stack([smooth + nyq, smooth]))
    assert np.max(np.abs(out[0] - smooth)) < 1e-13
    assert np.max(np.abs(out[1] - smooth)) < 1e-13
    # the derivative symbol gives the Nyquist mode zero kinetic energy
    assert np.max(np.abs(apply_gradient(g, nyq))) < 1e-12
