"""Tensor discretization of the half space R^d x (0, inf) and the quadrature
for the weighted measure

    d mu(x) = x_{d+1}^{2 alpha + 1} dx / ((2 pi)^{d/2} 2^alpha Gamma(alpha+1)).

The first d (axial) variables live on a uniform periodic box [-L, L)^d; the
last (radial) variable lives on the quasi-discrete Hankel grid of order
alpha: nodes at scaled Bessel zeros r_k = j_{alpha,k} R / j_{alpha,N+1}, with
weights that make the composite rule a quadrature for mu.  The induced dual
(frequency) grid uses the standard DFT frequencies on the axial factor and
lambda_k = j_{alpha,k}/R on the radial factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError, UsageError
from .special import bessel_j, bessel_zeros, gamma

__all__ = ["WeinsteinParams", "Grid", "build_grid", "integrate", "lp_norm"]


@dataclass(frozen=True)
class WeinsteinParams:
    """Parameter pair (alpha, d) with the derived exponent sigma and the
    normalizing constant of the measure."""

    alpha: float
    d: int
    sigma: float = dc_field(init=False)
    measure_const: float = dc_field(init=False)

    def __post_init__(self) -> None:
        if not (self.alpha > -0.5) or not np.isfinite(self.alpha):
            raise ConfigurationError(f"alpha must be > -1/2, got {self.alpha}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"d must be an integer >= 1, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "sigma", (self.d + 2.0 * self.alpha + 2.0) / 2.0)
        object.__setattr__(
            self,
            "measure_const",
            1.0 / ((2.0 * math.pi) ** (self.d / 2.0) * 2.0**self.alpha * gamma(self.alpha + 1.0)),
        )


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(eq=False)
class Grid:
    """Immutable tensor grid; shared read-only (hash by identity).

    All reductions over nodes use numpy's pairwise summation, so results do
    not depend on thread count.
    """

    params: WeinsteinParams
    axial_n: int
    axial_halfwidth: float
    radial_n: int
    radial_extent: float
    # axial factor
    axial_x: np.ndarray = dc_field(repr=False, default=None)
    axial_lam: np.ndarray = dc_field(repr=False, default=None)
    # radial factor
    radial_nodes: np.ndarray = dc_field(repr=False, default=None)
    radial_freqs: np.ndarray = dc_field(repr=False, default=None)
    radial_weights: np.ndarray = dc_field(repr=False, default=None)
    radial_freq_weights: np.ndarray = dc_field(repr=False, default=None)

    def __post_init__(self) -> None:
        p = self.params
        n, L, N, R = self.axial_n, self.axial_halfwidth, self.radial_n, self.radial_extent
        if L <= 0 or R <= 0:
            raise ConfigurationError("box sizes L and R must be positive")
        if n != 1 and not (_is_power_of_two(n) and n >= 8):
            raise ConfigurationError(f"axial_n must be 1 or a power of two >= 8, got {n}")
        if N < 16:
            raise ConfigurationError(f"radial_n must be >= 16, got {N}")

        if n == 1:
            # pure-radial harness mode: the axial factor is collapsed
            self.axial_x = np.zeros(1)
            self.axial_lam = np.zeros(1)
            self._dx = 1.0
            self._dlam = 1.0
            self._ax_w = 1.0
            self._ax_wf = 1.0
        else:
            self._dx = 2.0 * L / n
            self.axial_x = -L + self._dx * np.arange(n)
            self.axial_lam = 2.0 * np.pi * np.fft.fftfreq(n, d=self._dx)
            self._dlam = 2.0 * np.pi / (n * self._dx)
            self._ax_w = (self._dx / math.sqrt(2.0 * math.pi)) ** p.d
            self._ax_wf = (self._dlam / math.sqrt(2.0 * math.pi)) ** p.d

        zeros = bessel_zeros(p.alpha, N + 1)
        j = zeros[:N]
        self._S = zeros[N]
        self._V = self._S / R
        self.radial_nodes = j * R / self._S
        self.radial_freqs = j / R
        jp1 = np.abs(bessel_j(p.alpha + 1.0, j))
        self._jp1 = jp1
        ca = 2.0**p.alpha * gamma(p.alpha + 1.0)
        self.radial_weights = 2.0 * self.radial_nodes ** (2 * p.alpha) / (self._V**2 * jp1**2 * ca)
        self.radial_freq_weights = 2.0 * self.radial_freqs ** (2 * p.alpha) / (R**2 * jp1**2 * ca)
        self._cache: dict = {}

    # -- geometry ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.axial_n,) * self.params.d + (self.radial_n,)

    @property
    def node_count(self) -> int:
        return self.axial_n ** self.params.d * self.radial_n

    @property
    def bandlimit(self) -> float:
        """Smallest resolved band edge across factors (axial Nyquist vs V)."""
        if self.axial_n == 1:
            return self._V
        return min(np.pi / self._dx, self._V)

    def _axis_broadcast(self, vec: np.ndarray, axis: int) -> np.ndarray:
        sl: list = [None] * (self.params.d + 1)
        sl[axis] = slice(None)
        return vec[tuple(sl)]

    def _abs2(self, axial_vec: np.ndarray, radial_vec: np.ndarray) -> np.ndarray:
        d = self.params.d
        out = np.zeros(self.shape)
        for ax in range(d):
            out = out + self._axis_broadcast(axial_vec**2, ax)
        return out + self._axis_broadcast(radial_vec**2, d)

    def abs2_physical(self) -> np.ndarray:
        """|x|^2 on the physical tensor grid (cached)."""
        if "x2" not in self._cache:
            self._cache["x2"] = self._abs2(self.axial_x, self.radial_nodes)
        return self._cache["x2"]

    def abs2_frequency(self) -> np.ndarray:
        """|lambda|^2 on the dual tensor grid (cached)."""
        if "l2" not in self._cache:
            self._cache["l2"] = self._abs2(self.axial_lam, self.radial_freqs)
        return self._cache["l2"]

    # -- quadrature -------------------------------------------------------

    def node_weights(self, frequency: bool = False) -> np.ndarray:
        """Full mu-measure weight per node, as a broadcastable radial vector
        already multiplied by the (constant) axial cell weight."""
        if frequency:
            return self.radial_freq_weights * self._ax_wf
        return self.radial_weights * self._ax_w

    def quad(self, values: np.ndarray, frequency: bool = False) -> complex:
        w = self.node_weights(frequency)
        return complex(np.sum(values * self._axis_broadcast(w, self.params.d)))


def build_grid(
    params: WeinsteinParams,
    axial_n: int,
    axial_halfwidth: float,
    radial_n: int,
    radial_extent: float,
) -> Grid:
    """Construct the tensor grid (uniform periodic axial box x QDHT radial grid)."""
    return Grid(params, axial_n, axial_halfwidth, radial_n, radial_extent)


def integrate(f) -> complex:
    """Quadrature of a physical-space field against the measure mu."""
    from .field import Field, Space

    if not isinstance(f, Field):
        raise UsageError("integrate expects a Field")
    if f.space is not Space.PHYSICAL:
        raise UsageError("integrate is defined for physical-space fields")
    return f.grid.quad(f.values)


def lp_norm(f, p: float) -> float:
    """Weighted L^p norm of a field, p in [1, inf].

    Frequency-space fields are measured with the dual-grid quadrature (the
    measure is self-dual), which is what Plancherel-type identities compare.
    """
    from .field import Field, Space

    if not isinstance(f, Field):
        raise UsageError("lp_norm expects a Field")
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    freq = f.space is Space.FREQUENCY
    g = f.grid
    w = g._axis_broadcast(g.node_weights(frequency=freq), g.params.d)
    return float(np.sum(a**p * w) ** (1.0 / p))
