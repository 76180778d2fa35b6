import io
import math
import warnings

import numpy as np
import pytest

from conftest import rel_to_peak
from weinstein import (
    Field,
    Space,
    UsageError,
    WeinsteinParams,
    eigenfunction,
    forward,
    forward_direct,
    gaussian,
    integrate,
    inverse,
    laplacian_symbol_apply,
    lp_norm,
    random_band_limited,
    read_field,
    write_field,
)
from weinstein.field import field_to_csv
from weinstein.transform import BoundaryDecayWarning


def kernel_at_frequency_nodes(grid, x):
    """Psi(x, lambda) evaluated at every frequency node (test helper)."""
    from weinstein.special import normalized_bessel_j

    d = grid.params.d
    out = normalized_bessel_j(grid.params.alpha, grid.radial_freqs * x[d])
    out = grid._axis_broadcast(out.astype(complex), d)
    full = np.ones(grid.shape, dtype=complex) * out
    for ax in range(d):
        full = full * grid._axis_broadcast(np.exp(-1j * x[ax] * grid.axial_lam), ax)
    return full


# -- eigenfunction -----------------------------------------------------------

def test_eigenfunction_at_zero_frequency(rng):
    p = WeinsteinParams(0.7, 2)
    for _ in range(20):
        x = np.append(rng.uniform(-5, 5, 2), rng.uniform(0, 5))
        assert eigenfunction(p, x, np.zeros(3)) == 1.0 + 0.0j


def test_eigenfunction_symmetry(rng):
    p = WeinsteinParams(0.3, 1)
    for _ in range(100):
        x = np.append(rng.uniform(-5, 5, 1), rng.uniform(0, 5))
        lam = np.append(rng.uniform(-5, 5, 1), rng.uniform(0, 5))
        assert eigenfunction(p, x, lam) == eigenfunction(p, lam, x)


def test_eigenfunction_bounded(rng):
    p = WeinsteinParams(1.5, 1)
    for _ in range(1000):
        x = np.append(rng.uniform(-20, 20, 1), rng.uniform(0, 20))
        lam = np.append(rng.uniform(-20, 20, 1), rng.uniform(0, 20))
        assert abs(eigenfunction(p, x, lam)) <= 1.0 + 1e-15


# -- forward / inverse ---------------------------------------------------------

def test_gaussian_pair_d1(make_grid):
    g = make_grid(0.5, 1, 64, 12.0, 64, 12.0)
    s = 1.0
    F = forward(gaussian(g, s))
    ref = (2 * s) ** -(g.params.alpha + g.params.d / 2 + 1) * np.exp(
        -g.abs2_frequency() / (4 * s)
    )
    assert rel_to_peak(F.values, ref) <= 1e-7
    interior = ref >= 1e-3 * ref.max()
    assert (np.abs(F.values - ref)[interior] / ref[interior]).max() <= 1e-6


def test_linearity(make_grid, rng):
    g = make_grid(0.5, 1, 32, 10.0, 48, 10.0)
    f1 = random_band_limited(g, rng)
    f2 = random_band_limited(g, rng)
    a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
    lhs = forward(Field(g, a * f1.values + b * f2.values, Space.PHYSICAL))
    rhs = a * forward(f1).values + b * forward(f2).values
    assert rel_to_peak(lhs.values, rhs) <= 1e-12


def test_fast_path_matches_direct_quadrature_16(make_grid, rng):
    g = make_grid(0.5, 1, 16, 5.0, 16, 5.0)
    f = random_band_limited(g, rng, lam_cap=1.5)
    fast = forward(f)
    direct = forward_direct(f)
    assert rel_to_peak(fast.values, direct.values) <= 1e-8


def test_fast_path_matches_direct_quadrature_d2(make_grid, rng):
    g = make_grid(0.0, 2, 8, 4.0, 16, 4.0)
    f = random_band_limited(g, rng, lam_cap=1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryDecayWarning)
        fast = forward(f)
        direct = forward_direct(f)
    assert rel_to_peak(fast.values, direct.values) <= 1e-8


def test_round_trip_and_zero(make_grid, rng):
    g = make_grid(1.5, 1, 64, 12.0, 64, 12.0)
    f = random_band_limited(g, rng)
    back = inverse(forward(f))
    assert rel_to_peak(back.values, f.values) <= 1e-8
    z = Field(g, np.zeros(g.shape), Space.FREQUENCY)
    assert np.all(inverse(z).values == 0)


def test_gaussian_recovered_from_frequency_side(make_grid):
    g = make_grid(0.5, 1, 64, 12.0, 64, 12.0)
    f = gaussian(g, 1.0)
    assert rel_to_peak(inverse(forward(f)).values, f.values) <= 1e-8


def test_plancherel_and_parseval(make_grid, rng):
    for alpha in (0.0, 0.5, 1.5):
        for d in (1, 2):
            n = 32 if d == 2 else 64
            g = make_grid(alpha, d, n, 10.0, 48, 10.0)
            for _ in range(5):
                f = random_band_limited(g, rng)
                h = random_band_limited(g, rng)
                F, H = forward(f), forward(h)
                assert abs(lp_norm(F, 2) / lp_norm(f, 2) - 1.0) <= 1e-8
                inner_phys = g.quad(f.values * np.conj(h.values))
                inner_freq = g.quad(F.values * np.conj(H.values), frequency=True)
                scale = lp_norm(f, 2) * lp_norm(h, 2)
                assert abs(inner_phys - inner_freq) <= 1e-8 * scale


def test_sup_bound_by_l1_norm(make_grid, rng):
    g = make_grid(0.5, 1, 64, 12.0, 64, 12.0)
    for f in (gaussian(g, 1.0), random_band_limited(g, rng)):
        F = forward(f)
        assert np.abs(F.values).max() <= lp_norm(f, 1) * (1 + 1e-8)


# -- Laplacian symbol ----------------------------------------------------------

def test_laplacian_symbol_basics(make_grid):
    g = make_grid(0.5, 1, 32, 10.0, 48, 10.0)
    z = Field(g, np.zeros(g.shape), Space.FREQUENCY)
    assert np.all(laplacian_symbol_apply(z).values == 0)
    F = forward(gaussian(g, 1.0))
    out = laplacian_symbol_apply(F)
    lam2 = g.abs2_frequency()
    assert np.array_equal(out.values, F.values * (-lam2))


def test_laplacian_on_gaussian_matches_closed_form(make_grid):
    # Lap_W exp(-|x|^2/2) = exp(-|x|^2/2) (|x|^2 - (d + 2 alpha + 2))
    for alpha, d in ((0.5, 1), (0.0, 2)):
        g = make_grid(alpha, d, 64, 12.0, 64, 12.0)
        f = gaussian(g, 0.5)
        got = inverse(laplacian_symbol_apply(forward(f)))
        x2 = g.abs2_physical()
        ref = np.exp(-x2 / 2) * (x2 - (d + 2 * alpha + 2))
        assert rel_to_peak(got.values, ref) <= 1e-6


# -- space tags, warnings, serialization ---------------------------------------

def test_space_tag_enforcement(make_grid):
    g = make_grid(0.5, 1, 16, 8.0, 32, 8.0)
    f = gaussian(g, 1.0)
    F = forward(f)
    with pytest.raises(UsageError):
        forward(F)
    with pytest.raises(UsageError):
        inverse(f)
    with pytest.raises(UsageError):
        laplacian_symbol_apply(f)


def test_boundary_decay_warning(make_grid):
    g = make_grid(0.5, 1, 32, 4.0, 48, 4.0)
    wide = gaussian(g, 0.05)  # e^{-0.05*16} ~ 0.45 at the box edge
    with pytest.warns(BoundaryDecayWarning):
        forward(wide)


def test_binary_round_trip(make_grid, rng):
    g = make_grid(0.5, 1, 16, 8.0, 32, 8.0)
    f = random_band_limited(g, rng)
    buf = io.BytesIO()
    write_field(f, buf)
    buf.seek(0)
    back = read_field(buf, grid=g)
    assert back.space is Space.PHYSICAL
    assert np.array_equal(back.values, f.values)
    # grid rebuilt from header
    buf.seek(0)
    back2 = read_field(buf)
    assert np.array_equal(back2.values, f.values)
    assert back2.grid.radial_n == 32


def test_csv_export(make_grid):
    g = make_grid(0.5, 1, 8, 4.0, 16, 4.0)
    f = gaussian(g, 1.0)
    buf = io.StringIO()
    field_to_csv(f, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "x1,x_radial,re,im"
    assert len(lines) == 1 + g.node_count


def test_concurrent_transforms_are_safe(make_grid, rng):
    # plans are shared read-only; concurrent forwards on distinct fields
    # reproduce the serial results exactly
    from concurrent.futures import ThreadPoolExecutor

    g = make_grid(0.5, 1, 64, 12.0, 64, 12.0)
    fields = [random_band_limited(g, rng) for _ in range(8)]
    serial = [forward(f).values for f in fields]
    with ThreadPoolExecutor(max_workers=4) as pool:
        parallel = list(pool.map(lambda f: forward(f).values, fields))
    for a, b in zip(serial, parallel):
        assert np.array_equal(a, b)
