"""Exponent arithmetic for sigma-admissibility, mixed space-time norms, and
empirical Strichartz-constant estimation.

A pair (q, r) is sigma-admissible when q, r >= 2, (q, r, sigma) != (2, inf, 1)
and 1/q + sigma/r <= sigma/2, "sharp" on equality, with
sigma = (d + 2 alpha + 2)/2.

classify works with floats (equality detected to 1e-12 relative) or exact
rational inputs (fractions.Fraction), in which case sharpness is exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import UsageError
from .field import Field, Space, random_band_limited
from .grid import Grid, WeinsteinParams, lp_norm
from .propagator import evolve_sampled, plan_for
from .transform import forward, inverse

__all__ = [
    "Classification",
    "AdmissiblePair",
    "classify",
    "classify_sigma",
    "sharp_r_for_q",
    "conjugate",
    "critical_power",
    "MixedNormSpec",
    "mixed_norm",
    "mixed_norm_samples",
    "strichartz_quotient",
    "QuotientStats",
    "inhomogeneous_quotient",
]

_EQ_TOL = 1e-12


class Classification(enum.Enum):
    SHARP = "sharp"
    NONSHARP = "nonsharp"
    INADMISSIBLE = "inadmissible"


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float
    classification: Classification

    @property
    def admissible(self) -> bool:
        return self.classification is not Classification.INADMISSIBLE


def _inv(x):
    """1/x keeping exact arithmetic for Fraction/int inputs; 1/inf = 0."""
    if x == math.inf:
        return 0
    if isinstance(x, (Fraction, int)):
        return Fraction(1, 1) / x
    return 1.0 / x


def classify_sigma(sigma, q, r) -> AdmissiblePair:
    """Classify (q, r) against the sharp line 1/q + sigma/r = sigma/2."""
    if q <= 0 or r <= 0:
        return AdmissiblePair(q, r, Classification.INADMISSIBLE)
    if q < 2 or r < 2:
        return AdmissiblePair(q, r, Classification.INADMISSIBLE)
    if q == 2 and r == math.inf and sigma == 1:
        return AdmissiblePair(q, r, Classification.INADMISSIBLE)
    lhs = _inv(q) + sigma * _inv(r)
    rhs = sigma * _inv(2)
    exact = isinstance(lhs, Fraction) and isinstance(rhs, Fraction)
    if exact:
        if lhs == rhs:
            cls = Classification.SHARP
        elif lhs < rhs:
            cls = Classification.NONSHARP
        else:
            cls = Classification.INADMISSIBLE
    else:
        lhs, rhs = float(lhs), float(rhs)
        tol = _EQ_TOL * max(1.0, abs(rhs))
        if abs(lhs - rhs) <= tol:
            cls = Classification.SHARP
        elif lhs < rhs:
            cls = Classification.NONSHARP
        else:
            cls = Classification.INADMISSIBLE
    return AdmissiblePair(q, r, cls)


def classify(params: WeinsteinParams, q, r) -> AdmissiblePair:
    return classify_sigma(params.sigma, q, r)


def classify_grid(sigma: float, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Vectorized classification over broadcastable exponent arrays, with the
    same semantics as classify_sigma on floats.  Returns an integer array:
    0 = sharp, 1 = nonsharp, 2 = inadmissible."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        lhs = 1.0 / q + sigma / r
    rhs = sigma / 2.0
    tol = _EQ_TOL * max(1.0, abs(rhs))
    out = np.full(np.broadcast(q, r).shape, 2, dtype=np.int8)
    ok = (q >= 2.0) & (r >= 2.0)
    sharp = ok & (np.abs(lhs - rhs) <= tol)
    nonsharp = ok & ~sharp & (lhs < rhs)
    out[nonsharp] = 1
    out[sharp] = 0
    if sigma == 1.0:
        out[(q == 2.0) & np.isinf(r)] = 2
    return out


def sharp_r_for_q(sigma, q):
    """The r on the sharp line for given q: r = 2 sigma q / (sigma q - 2)."""
    if q == math.inf:
        return Fraction(2) if isinstance(sigma, Fraction) else 2.0
    return 2 * sigma * q / (sigma * q - 2)


def conjugate(p: float):
    """Hoelder conjugate: 1/p + 1/p' = 1; conjugate(1) = inf."""
    if p < 1:
        raise ValueError(f"conjugate requires p in [1, inf], got {p}")
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    if isinstance(p, (Fraction, int)):
        return p / (p - Fraction(1))
    return p / (p - 1.0)


def critical_power(params: WeinsteinParams) -> float:
    """Mass-critical power 4/(d + 2 alpha + 2) = 2/sigma."""
    return 4.0 / (params.d + 2.0 * params.alpha + 2.0)


@dataclass(frozen=True)
class MixedNormSpec:
    q: float
    r: float
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        if self.q < 1 or self.r < 1:
            raise ValueError("mixed norm exponents must be >= 1")
        if not self.interval[0] < self.interval[1]:
            raise ValueError("interval must satisfy a < b")


def mixed_norm_samples(times: np.ndarray, space_norms: np.ndarray, spec: MixedNormSpec) -> float:
    """Mixed norm from precomputed space norms on a uniform time grid."""
    a, b = spec.interval
    times = np.asarray(times, dtype=float)
    tol = 1e-9 * max(1.0, abs(b - a))
    if times[0] > a + tol or times[-1] < b - tol:
        raise UsageError(
            f"interval [{a}, {b}] exceeds the trajectory span [{times[0]}, {times[-1]}]"
        )
    sel = (times >= a - tol) & (times <= b + tol)
    ts, ns = times[sel], np.asarray(space_norms, dtype=float)[sel]
    if np.isinf(spec.q):
        return float(ns.max())
    return float(simpson(ns**spec.q, x=ts) ** (1.0 / spec.q))


def mixed_norm(traj, spec: MixedNormSpec) -> float:
    """Mixed space-time norm of a trajectory (object with .times and .states,
    or a (times, fields) pair), Simpson in time."""
    if hasattr(traj, "times"):
        times, states = traj.times, traj.states
    else:
        times, states = traj
    norms = np.array([lp_norm(u, spec.r) for u in states])
    return mixed_norm_samples(np.asarray(times, dtype=float), norms, spec)


@dataclass
class QuotientStats:
    pair: tuple[float, float]
    sigma: float
    ensemble_size: int
    horizon: float
    max: float
    mean: float
    max_2T: float
    members: list[float]

    def summary(self) -> dict:
        return {
            "pair": list(self.pair),
            "sigma": self.sigma,
            "ensemble_size": self.ensemble_size,
            "T": self.horizon,
            "max": self.max,
            "mean": self.mean,
            "max_2T": self.max_2T,
        }


def strichartz_quotient(
    grid: Grid,
    pair: AdmissiblePair,
    ensemble_size: int,
    horizon: float = 10.0,
    samples_per_T: int = 33,
    seed: int = 0,
    lam_cap: float | None = None,
    packet_extent: float | None = None,
    horizon_doubling: bool = True,
) -> QuotientStats:
    """Ensemble statistics of ||I(.) g||_{L^q([-T,T]; L^r)} / ||g||_2 over
    random band-limited unit-mass data.

    Each member is evaluated on [-T, T] and (unless horizon_doubling=False)
    on [-2T, 2T] with the same data, so the stability of the max under
    horizon doubling is reported alongside.  Members use deterministic
    per-index seeds derived from `seed`.
    """
    if not pair.admissible:
        raise UsageError("strichartz_quotient requires an admissible pair")
    params = grid.params
    T = horizon
    n_t = 2 * samples_per_T + 1
    t_hi = 2 * T if horizon_doubling else T
    times_all = np.linspace(-t_hi, t_hi, 2 * n_t - 1 if horizon_doubling else n_t)
    sel = slice((n_t - 1) // 2, (n_t - 1) // 2 + n_t) if horizon_doubling else slice(0, n_t)
    quotients, quotients2 = [], []
    spec_T = MixedNormSpec(pair.q, pair.r, (-T, T))
    spec_2T = MixedNormSpec(pair.q, pair.r, (-t_hi, t_hi))
    for i in range(ensemble_size):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        g = random_band_limited(grid, rng, lam_cap=lam_cap, packet_extent=packet_extent)
        g = g * (1.0 / lp_norm(g, 2))
        states = evolve_sampled(g, times_all)
        norms = np.array([lp_norm(u, pair.r) for u in states])
        if horizon_doubling:
            quotients2.append(mixed_norm_samples(times_all, norms, spec_2T))
        quotients.append(mixed_norm_samples(times_all[sel], norms[sel], spec_T))
    quotients = np.array(quotients)
    return QuotientStats(
        pair=(pair.q, pair.r),
        sigma=params.sigma,
        ensemble_size=ensemble_size,
        horizon=T,
        max=float(quotients.max()),
        mean=float(quotients.mean()),
        max_2T=float(np.max(quotients2)) if horizon_doubling else float("nan"),
        members=quotients.tolist(),
    )


def inhomogeneous_quotient(
    grid: Grid,
    pair: AdmissiblePair,
    pair1: AdmissiblePair,
    ensemble_size: int = 20,
    horizon: float = 2.0,
    n_t: int = 33,
    seed: int = 0,
    lam_cap: float | None = None,
) -> dict:
    """Empirical constant for the inhomogeneous estimate: solve the forced
    linear problem u = I(t) g + Duhamel(F) for random (g, F) and return
    statistics of

        (||u||_{L^q L^r} + sup_t ||u||_2) / (||g||_2 + ||F||_{L^{q1'} L^{r1'}}).
    """
    if not (pair.admissible and pair1.admissible):
        raise UsageError("inhomogeneous_quotient requires admissible pairs")
    T = horizon
    times = np.linspace(0.0, T, n_t)
    q1p, r1p = conjugate(pair1.q), conjugate(pair1.r)
    spec_u = MixedNormSpec(pair.q, pair.r, (0.0, T))
    spec_F = MixedNormSpec(q1p, r1p, (0.0, T))
    plan = plan_for(grid)
    out = []
    for i in range(ensemble_size):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 7, i]))
        g = random_band_limited(grid, rng, lam_cap=lam_cap)
        g = g * (1.0 / lp_norm(g, 2))
        forcing = [
            random_band_limited(grid, rng, lam_cap=lam_cap) * float(np.cos(1.7 * t) + 1.2)
            for t in times
        ]
        free = evolve_sampled(g, times)
        Fhat = np.stack([forward(F).values for F in forcing], axis=0)
        phases = np.exp(1j * np.multiply.outer(times, plan.symbol))
        integrand = Fhat * phases
        acc = cumulative_simpson(integrand.real, x=times, axis=0, initial=0.0) + 1j * (
            cumulative_simpson(integrand.imag, x=times, axis=0, initial=0.0)
        )
        states = [
            free[k] + inverse(Field(grid, np.conj(phases[k]) * acc[k], Space.FREQUENCY))
            for k in range(n_t)
        ]
        u_norm = mixed_norm((times, states), spec_u) + max(lp_norm(u, 2) for u in states)
        f_norm = mixed_norm((times, forcing), spec_F)
        out.append(u_norm / (1.0 + f_norm))
    arr = np.array(out)
    return {"max": float(arr.max()), "mean": float(arr.mean()), "members": arr.tolist()}
