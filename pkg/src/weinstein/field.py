"""Complex sample arrays on a Grid, tagged physical- or frequency-space,
plus serialization (flat binary, CSV) and reference field constructors."""

from __future__ import annotations

import enum
import io
import struct
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .grid import Grid, WeinsteinParams, build_grid

__all__ = [
    "Space",
    "Field",
    "gaussian",
    "random_band_limited",
    "write_field",
    "read_field",
    "field_to_csv",
]

_MAGIC = b"WNST"
_VERSION = 1


class Space(enum.Enum):
    PHYSICAL = 0
    FREQUENCY = 1


@dataclass(eq=False)
class Field:
    grid: Grid
    values: np.ndarray
    space: Space = Space.PHYSICAL

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise UsageError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.space)

    def _check_compatible(self, other: "Field") -> None:
        if other.grid is not self.grid or other.space is not self.space:
            raise UsageError("fields live on different grids or spaces")

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.values + other.values, self.space)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.values - other.values, self.space)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.values * c, self.space)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values, self.space)


def gaussian(grid: Grid, s: float) -> Field:
    """The reference Gaussian exp(-s |x|^2) as a physical-space field."""
    if s <= 0:
        raise ValueError("Gaussian width parameter s must be positive")
    return Field(grid, np.exp(-s * grid.abs2_physical()).astype(complex), Space.PHYSICAL)


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    lam_cap: float | None = None,
    n_packets: int = 3,
    packet_extent: float | None = None,
) -> Field:
    """Random smooth field: superposed modulated Gaussian packets, with all
    frequency content kept below `lam_cap` and spatial support well inside
    the box.

    The packet parameters depend only on (rng, L, R, lam_cap, packet_extent),
    not on the resolution, so refining the grid samples the same underlying
    function.  `packet_extent` pins the packet length scale absolutely
    (narrow packets disperse early); by default it scales with the box.
    """
    d = grid.params.d
    L, R = grid.axial_halfwidth, grid.radial_extent
    if lam_cap is None:
        lam_cap = grid.bandlimit / 3.0
    pe_ax = packet_extent if packet_extent is not None else L / 6.0
    pe_rad = packet_extent if packet_extent is not None else R / 6.0
    pe_rad = min(pe_rad, R / 5.0)
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(n_packets):
        amp = rng.normal() + 1j * rng.normal()
        packet = np.full(grid.shape, amp, dtype=complex)
        if grid.axial_n > 1:
            for ax in range(d):
                c = rng.uniform(-pe_ax, pe_ax)
                w = rng.uniform(0.6 * pe_ax, pe_ax)
                k = rng.uniform(-0.7 * lam_cap, 0.7 * lam_cap)
                prof = np.exp(-((grid.axial_x - c) / w) ** 2 + 1j * k * grid.axial_x)
                packet = packet * grid._axis_broadcast(prof, ax)
        q = rng.uniform(1.0, 4.0) / pe_rad**2
        kappa = rng.uniform(0.0, 0.8 * lam_cap)
        prof_r = np.exp(-q * grid.radial_nodes**2) * np.cos(kappa * grid.radial_nodes)
        vals += packet * grid._axis_broadcast(prof_r, d)
    return Field(grid, vals, Space.PHYSICAL)


# -- serialization ---------------------------------------------------------
#
# Flat binary layout (little endian):
#   magic "WNST" | u32 version | f8 alpha | u32 d | u8 space
#   | u32 axial_n | f8 axial_halfwidth | u32 radial_n | f8 radial_extent
#   | payload: float64 re/im interleaved, row-major, radial index fastest.

_HEADER = struct.Struct("<4sI d I B I d I d")


def write_field(f: Field, path_or_buf) -> None:
    g = f.grid
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        g.params.alpha,
        g.params.d,
        f.space.value,
        g.axial_n,
        g.axial_halfwidth,
        g.radial_n,
        g.radial_extent,
    )
    payload = np.empty(f.values.size * 2, dtype="<f8")
    flat = f.values.reshape(-1)
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(header)
        path_or_buf.write(payload.tobytes())
    else:
        with open(path_or_buf, "wb") as fh:
            fh.write(header)
            fh.write(payload.tobytes())


def read_field(path_or_buf, grid: Grid | None = None) -> Field:
    """Read a field written by write_field.  If `grid` is given it must match
    the header; otherwise the grid is rebuilt from the header."""
    if hasattr(path_or_buf, "read"):
        raw = path_or_buf.read()
    else:
        with open(path_or_buf, "rb") as fh:
            raw = fh.read()
    magic, version, alpha, d, space, n, L, N, R = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC or version != _VERSION:
        raise UsageError("not a field file (bad magic or version)")
    if grid is None:
        grid = build_grid(WeinsteinParams(alpha, d), n, L, N, R)
    else:
        gp = grid.params
        header = (alpha, d, n, L, N, R)
        ours = (gp.alpha, gp.d, grid.axial_n, grid.axial_halfwidth, grid.radial_n, grid.radial_extent)
        if ours != header:
            raise UsageError("field header does not match the supplied grid")
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    vals = (payload[0::2] + 1j * payload[1::2]).reshape(grid.shape)
    return Field(grid, vals.copy(), Space(space))


def field_to_csv(f: Field, path_or_buf) -> None:
    """CSV dump for small grids: one row per node with coordinates and re/im."""
    g = f.grid
    d = g.params.d
    ax = g.axial_x if f.space is Space.PHYSICAL else g.axial_lam
    rad = g.radial_nodes if f.space is Space.PHYSICAL else g.radial_freqs
    buf = io.StringIO()
    cols = [f"x{i+1}" for i in range(d)] + ["x_radial", "re", "im"]
    buf.write(",".join(cols) + "\n")
    for idx in np.ndindex(f.values.shape):
        coords = [repr(ax[idx[i]]) for i in range(d)] + [repr(rad[idx[-1]])]
        v = f.values[idx]
        buf.write(",".join(coords + [repr(v.real), repr(v.imag)]) + "\n")
    text = buf.getvalue()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)
