import math

import numpy as np
import pytest

from weinstein import (
    ConfigurationError,
    Field,
    Space,
    WeinsteinParams,
    build_grid,
    gaussian,
    integrate,
    lp_norm,
)


def gauss_exact(alpha, d, s):
    # transform of exp(-s|x|^2) at lambda=0: (2s)^-(alpha + d/2 + 1)
    return (2.0 * s) ** -(alpha + d / 2.0 + 1.0)


def test_params_derived_fields():
    p = WeinsteinParams(0.5, 1)
    assert p.sigma == 2.0
    ref = 1.0 / ((2 * math.pi) ** 0.5 * 2**0.5 * math.gamma(1.5))
    assert abs(p.measure_const - ref) <= 1e-16


def test_params_validation():
    with pytest.raises(ConfigurationError):
        WeinsteinParams(-1.0, 1)
    with pytest.raises(ConfigurationError):
        WeinsteinParams(0.5, 0)


def test_radial_node_scaling_half_order(make_grid):
    # zeros of J_{1/2} are k*pi, so node 1 sits at R/(N+1)
    g = make_grid(0.5, 1, 64, 10.0, 64, 10.0)
    assert abs(g.radial_nodes[0] - 10.0 / 65.0) <= 1e-12
    assert g.node_count == 64 * 64


def test_nodes_and_weights_wellformed(make_grid):
    for alpha in (0.0, 0.5, 1.5):
        g = make_grid(alpha, 1, 16, 8.0, 32, 8.0)
        r = g.radial_nodes
        assert np.all(np.diff(r) > 0)
        assert r[0] > 0 and r[-1] < g.radial_extent
        assert np.all(g.radial_weights > 0)
        assert np.all(g.radial_freq_weights > 0)


def test_tensor_node_count_d2(make_grid):
    g = make_grid(0.5, 2, 8, 6.0, 16, 6.0)
    assert g.shape == (8, 8, 16)
    assert g.node_count == 8 * 8 * 16


def test_integrate_zero_and_gaussian(make_grid):
    for alpha in (0.0, 0.5, 1.5):
        for d in (1, 2):
            for s in (0.5, 1.0, 2.0):
                L = 12.0 / math.sqrt(s)
                g = make_grid(alpha, d, 64, L, 64, L)
                z = Field(g, np.zeros(g.shape), Space.PHYSICAL)
                assert integrate(z) == 0
                val = integrate(gaussian(g, s))
                ref = gauss_exact(alpha, d, s)
                assert abs(val - ref) <= 1e-6 * ref


def test_integrate_weighted_gaussian_vs_dense_reference(make_grid):
    # f = x_radial^2 exp(-|x|^2), d=1: oracle by dense trapezoid quadrature
    alpha = 0.7
    g = make_grid(alpha, 1, 64, 12.0, 96, 12.0)
    vals = g._axis_broadcast(g.radial_nodes**2, 1) * np.exp(-g.abs2_physical())
    got = integrate(Field(g, vals.astype(complex), Space.PHYSICAL))

    x = np.linspace(-30.0, 30.0, 400_001)
    ax = np.trapezoid(np.exp(-(x**2)), x) / math.sqrt(2 * math.pi)
    r = np.linspace(0.0, 30.0, 400_001)
    rad = np.trapezoid(r**2 * np.exp(-(r**2)) * r ** (2 * alpha + 1), r) / (
        2**alpha * math.gamma(alpha + 1)
    )
    ref = ax * rad
    assert abs(got - ref) <= 1e-6 * abs(ref)


def test_integrate_rejects_frequency_fields(make_grid):
    from weinstein import UsageError, forward

    g = make_grid(0.5, 1, 16, 8.0, 32, 8.0)
    F = forward(gaussian(g, 1.0))
    with pytest.raises(UsageError):
        integrate(F)


def test_lp_norm_values_and_homogeneity(make_grid, rng):
    g = make_grid(0.5, 1, 64, 12.0, 64, 12.0)
    z = Field(g, np.zeros(g.shape), Space.PHYSICAL)
    assert lp_norm(z, 2) == 0.0
    f = gaussian(g, 1.0)
    ref = math.sqrt(gauss_exact(0.5, 1, 2.0))
    assert abs(lp_norm(f, 2) - ref) <= 1e-6 * ref
    c = complex(rng.normal(), rng.normal())
    assert abs(lp_norm(f * c, 2) - abs(c) * lp_norm(f, 2)) <= 1e-12
    # sup over grid nodes: the closest node to the origin is (0, r_1)
    node_max = math.exp(-g.radial_nodes[0] ** 2)
    assert abs(lp_norm(f, math.inf) - node_max) <= 1e-12
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_refinement_reduces_gaussian_error(make_grid):
    errs = []
    for N in (16, 32, 64):
        g = make_grid(0.5, 1, 64, 10.0, N, 10.0)
        val = integrate(gaussian(g, 1.0))
        errs.append(abs(val - gauss_exact(0.5, 1, 1.0)))
    # no stagnation above tolerance
    assert errs[1] <= max(errs[0], 1e-9)
    assert errs[2] <= max(errs[1], 1e-9)


def test_build_grid_validation():
    p = WeinsteinParams(0.5, 1)
    with pytest.raises(ConfigurationError):
        build_grid(p, 7, 8.0, 32, 8.0)
    with pytest.raises(ConfigurationError):
        build_grid(p, 4, 8.0, 32, 8.0)
    with pytest.raises(ConfigurationError):
        build_grid(p, 16, 8.0, 8, 8.0)
    with pytest.raises(ConfigurationError):
        build_grid(p, 16, -1.0, 32, 8.0)


def test_pure_radial_mode(make_grid):
    # axial_n = 1 collapses the axial factor; radial Gaussian integral is
    # (2s)^-(alpha+1)
    alpha, s = 0.5, 1.0
    g = make_grid(alpha, 1, 1, 1.0, 64, 10.0)
    f = Field(g, np.exp(-s * g.radial_nodes[None, :] ** 2).astype(complex), Space.PHYSICAL)
    ref = (2 * s) ** -(alpha + 1)
    assert abs(integrate(f) - ref) <= 1e-8 * ref
