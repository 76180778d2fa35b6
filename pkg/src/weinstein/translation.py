"""Generalized translation T_x and the weighted convolution it induces.

In the axial variables T_x is the ordinary shift, realized spectrally on the
periodic box.  In the radial variable it is the positivity-preserving
average

    (T_x f)(y_r) = (a/2) * int_0^pi f(sqrt(x_r^2 + y_r^2 + 2 x_r y_r cos t))
                               (sin t)^{2 alpha} dt,

with the normalization a = 2 Gamma(alpha+1) / (sqrt(pi) Gamma(alpha+1/2))
fixed by T_x 1 = 1.  The angular integral is Gauss-Gegenbauer quadrature
(substitution u = cos t, weight (1-u^2)^{alpha-1/2}); the integrand samples
f at off-grid radii, interpolated with an 8-point Lagrange rule in the
squared radius (fields are even in the radial variable, so they are smooth
functions of r^2) and clamped to zero beyond the radial extent.

Convolution has a fast transform-side path, F(f * g) = F(f) F(g), and a
direct quadrature path used as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import UsageError
from .field import Field, Space
from .grid import Grid, integrate
from .transform import forward, inverse

__all__ = ["TranslationRule", "translation_rule", "translate", "convolve", "convolve_direct"]

_INTERP_POINTS = 8


@dataclass(frozen=True)
class TranslationRule:
    """Angular quadrature for the radial translation average."""

    alpha: float
    gegenbauer_nodes: np.ndarray    # theta in (0, pi)
    gegenbauer_weights: np.ndarray  # weights for the (sin theta)^{2 alpha} measure
    a_alpha: float

    @property
    def combined_weights(self) -> np.ndarray:
        """(a_alpha/2) * weights; sums to 1."""
        return 0.5 * self.a_alpha * self.gegenbauer_weights


_rules: dict[tuple[float, int], TranslationRule] = {}


def translation_rule(alpha: float, n_nodes: int = 64) -> TranslationRule:
    key = (float(alpha), n_nodes)
    rule = _rules.get(key)
    if rule is None:
        u, wu = sp.roots_jacobi(n_nodes, alpha - 0.5, alpha - 0.5)
        a_alpha = 2.0 * sp.gamma(alpha + 1.0) / (np.sqrt(np.pi) * sp.gamma(alpha + 0.5))
        rule = TranslationRule(float(alpha), np.arccos(u)[::-1], wu[::-1], float(a_alpha))
        _rules[key] = rule
    return rule


def _interp_weights(s_nodes: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stencil start indices and Lagrange weights for interpolation at s,
    on the (sorted) squared-radius nodes."""
    n = len(s_nodes)
    m = _INTERP_POINTS
    start = np.clip(np.searchsorted(s_nodes, s) - m // 2, 0, n - m)
    idx = start[:, None] + np.arange(m)[None, :]
    sn = s_nodes[idx]                       # (pts, m)
    diff = s[:, None] - sn                  # (pts, m)
    w = np.empty_like(sn)
    for a in range(m):
        num = np.prod(np.delete(diff, a, axis=1), axis=1)
        den = np.prod(sn[:, a : a + 1] - np.delete(sn, a, axis=1), axis=1)
        w[:, a] = num / den
    return start, w


def _radial_translation_matrix(grid: Grid, x_r: float, rule: TranslationRule) -> np.ndarray:
    """Matrix M with (T_x f)(r_k) = sum_j M[k, j] f(r_j) for the radial factor."""
    r = grid.radial_nodes
    R = grid.radial_extent
    u = np.cos(rule.gegenbauer_nodes)
    w = rule.combined_weights
    n = grid.radial_n
    rho2 = r[:, None] ** 2 + x_r**2 + 2.0 * x_r * r[:, None] * u[None, :]
    rho2 = np.maximum(rho2, 0.0)
    inside = rho2 <= R * R
    start, lw = _interp_weights(r**2, rho2.ravel())
    lw = lw * inside.ravel()[:, None]
    weighted = lw.reshape(n, len(u), _INTERP_POINTS) * w[None, :, None]
    M = np.zeros((n, n))
    cols = (start[:, None] + np.arange(_INTERP_POINTS)[None, :]).reshape(n, len(u), _INTERP_POINTS)
    rows = np.broadcast_to(np.arange(n)[:, None, None], cols.shape)
    np.add.at(M, (rows.ravel(), cols.ravel()), weighted.ravel())
    return M


def translate(f: Field, x, n_theta: int = 64) -> Field:
    """Generalized translation of a physical-space field by x in R^{d+1}_+."""
    if f.space is not Space.PHYSICAL:
        raise UsageError("translate expects a physical-space field")
    g = f.grid
    d = g.params.d
    x = np.asarray(x, dtype=float)
    if x.shape != (d + 1,):
        raise UsageError(f"translation point must have {d + 1} coordinates")
    if x[d] < 0:
        raise ValueError("translation point must have a nonnegative last coordinate")

    vals = f.values
    if g.axial_n > 1 and np.any(x[:d] != 0.0):
        # periodic spectral shift by x' on the axial factor
        vals = np.fft.fftn(vals, axes=tuple(range(d)))
        for ax in range(d):
            vals = vals * g._axis_broadcast(np.exp(1j * g.axial_lam * x[ax]), ax)
        vals = np.fft.ifftn(vals, axes=tuple(range(d)))

    rule = translation_rule(g.params.alpha, n_theta)
    M = _radial_translation_matrix(g, float(x[d]), rule)
    return Field(g, vals @ M.T, Space.PHYSICAL)


def convolve(f: Field, g: Field) -> Field:
    """Weighted convolution via the transform product identity."""
    if f.space is not Space.PHYSICAL or g.space is not Space.PHYSICAL:
        raise UsageError("convolve expects physical-space fields")
    if f.grid is not g.grid:
        raise UsageError("convolve requires both fields on the same grid")
    F = forward(f)
    G = forward(g)
    return inverse(Field(f.grid, F.values * G.values, Space.FREQUENCY))


def convolve_direct(f: Field, g: Field, n_theta: int = 64) -> Field:
    """Direct quadrature of the convolution integral; O(nodes^2) oracle."""
    if f.grid is not g.grid:
        raise UsageError("convolve_direct requires both fields on the same grid")
    grid = f.grid
    d = grid.params.d
    rule = translation_rule(grid.params.alpha, n_theta)
    mats = [_radial_translation_matrix(grid, rk, rule) for rk in grid.radial_nodes]
    out = np.empty(grid.shape, dtype=complex)
    for idx in np.ndindex(*grid.shape[:d]):
        x = np.array([grid.axial_x[i] for i in idx] + [0.0])
        shifted = translate(f, x).values if d and np.any(x[:d] != 0.0) else f.values
        for k in range(grid.radial_n):
            tx = Field(grid, shifted @ mats[k].T, Space.PHYSICAL)
            out[idx + (k,)] = integrate(Field(grid, tx.values * g.values, Space.PHYSICAL))
    return Field(grid, out, Space.PHYSICAL)
