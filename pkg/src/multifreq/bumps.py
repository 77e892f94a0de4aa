"""Smooth compactly supported bump profiles and dyadic window symbols.

All bumps are built from one canonical smoothstep

    S(t) = s(t) / (s(t) + s(1-t)),   s(t) = exp(-1/t) for t > 0 else 0,

which rises from 0 at t=0 to 1 at t=1 with all derivatives vanishing at the
endpoints.  A profile is then flat 1 on [-plateau, plateau], 0 outside
[-support, support], and a rescaled smoothstep in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError
from .grid import DyadicFreqInterval, FrequencySet, Spectrum, SpectralSymbol, TorusGrid

__all__ = [
    "smoothstep",
    "plateau_profile",
    "bump_profile",
    "SmoothBump",
    "make_bump",
    "dk_tiles",
    "build_dk_symbol",
    "BUMP_SHAPES",
]

# kind -> (plateau half-width, support half-width) of the unit-scale profile
BUMP_SHAPES = {
    "phi": (0.25, 0.5),
    "psi": (0.25, 0.5),
    "A": (1.4, 1.6),
    "eta": (0.05, 0.1),
}


def smoothstep(t):
    """Canonical exp-based smoothstep, 0 for t<=0 and 1 for t>=1."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out if out.shape else float(out)


def plateau_profile(x, plateau: float, support: float):
    """Even profile equal to 1 on [-plateau, plateau], 0 outside
    (-support, support), smoothstep-interpolated in between."""
    if not 0.0 < plateau < support:
        raise ValueError("need 0 < plateau < support")
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(ax)
    out[ax <= plateau] = 1.0
    mid = (ax > plateau) & (ax < support)
    out[mid] = smoothstep((support - ax[mid]) / (support - plateau))
    return out if out.shape else float(out)


def bump_profile(kind: str, x):
    """Evaluate the unit-scale profile of the given kind at points ``x``."""
    if kind not in BUMP_SHAPES:
        raise ValueError(f"unknown bump kind {kind!r}")
    plateau, support = BUMP_SHAPES[kind]
    return plateau_profile(x, plateau, support)


@dataclass(frozen=True)
class SmoothBump:
    """A bump tabulated on the frequency lattice at a given rescaling.

    ``plateau`` and ``support`` are physical half-widths after rescaling.
    For kind ``eta`` the tabulated values are normalized so the lattice
    mean (1/period) * sum equals one exactly; ``amplitude`` records the
    resulting peak value (1.0 for the other kinds).
    """

    kind: str
    grid: TorusGrid
    scale: float
    plateau: float
    support: float
    values: np.ndarray
    amplitude: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def as_symbol(self) -> SpectralSymbol:
        return Spectrum(self.grid, self.values.astype(np.complex128))


def make_bump(kind: str, grid: TorusGrid, scale: float = 1.0) -> SmoothBump:
    """Tabulate a profile at ``scale`` on the grid's frequency lattice.

    Requires the rescaled plateau and support to each span at least 8
    lattice cells so the shape is actually resolved.
    """
    if kind not in BUMP_SHAPES:
        raise ValueError(f"unknown bump kind {kind!r}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    plateau, support = BUMP_SHAPES[kind]
    cells_plateau = 2 * plateau * scale * grid.period
    cells_support = 2 * support * scale * grid.period
    if cells_plateau < 8 or cells_support < 8:
        raise ResolutionError(
            f"bump {kind!r} at scale {scale} spans {cells_plateau:.2f} plateau cells; "
            "need at least 8"
        )
    xi = grid.frequencies()
    vals = bump_profile(kind, xi / scale)
    amplitude = 1.0
    if kind == "eta":
        mean = np.sum(vals) / grid.period
        if mean <= 0:
            raise ResolutionError("eta bump has zero lattice mass")
        vals = vals / mean
        amplitude = float(np.max(vals))
    return SmoothBump(kind, grid, scale, plateau * scale, support * scale, vals, amplitude)


def _check_scale(grid: TorusGrid, k: int) -> int:
    p = int(np.log2(grid.period))
    if k > p:
        raise ResolutionError(
            f"window width 2^-{k} is below the lattice step 1/{grid.period}"
        )
    return p


def dk_tiles(sigma: FrequencySet, k: int) -> list[DyadicFreqInterval]:
    """Dyadic tiles of width 2^-k meeting the frequency set.

    Each tile's representative is the smallest set frequency it contains.
    """
    p = _check_scale(sigma.grid, k)
    span = 2 ** (p - k)  # lattice cells per tile
    tiles: dict[int, int] = {}
    for n in sigma.indices:
        m = int(n) // span
        if m not in tiles or n < tiles[m]:
            tiles[m] = int(n)
    return [
        DyadicFreqInterval(sigma.grid, k, m, xi_rep_index=rep)
        for m, rep in sorted(tiles.items())
    ]


def _add_scaled_window(acc: np.ndarray, grid: TorusGrid, center_idx: int, k: int) -> None:
    # adds phi((xi - xi_c) * 2^k) over its lattice support, clipped to the band
    p = int(np.log2(grid.period))
    # support half-width 0.5 * 2^-k in frequency is 2^(p-k-1) lattice cells
    w = int(np.floor(2.0 ** (p - k - 1)))
    nyq = grid.samples // 2
    lo = max(center_idx - w, -nyq)
    hi = min(center_idx + w, nyq - 1)
    if lo > hi:
        return
    n = np.arange(lo, hi + 1)
    xi_rel = (n - center_idx) / grid.period
    acc[n + nyq] += bump_profile("phi", xi_rel * 2.0 ** k)


def build_dk_symbol(sigma: FrequencySet, k: int, variant: str = "tiled") -> SpectralSymbol:
    """Symbol of the scale-k window sum over a frequency set.

    variant "separated": one width-2^-k window centered at each frequency;
    requires the set to be 1-separated.  variant "tiled": one window per
    dyadic tile of width 2^-k meeting the set, centered at the tile's
    smallest set frequency.
    """
    grid = sigma.grid
    _check_scale(grid, k)
    acc = np.zeros(grid.samples, dtype=np.float64)
    if variant == "separated":
        if not sigma.separated:
            raise ValueError("separated variant requires a 1-separated frequency set")
        for n in sigma.indices:
            _add_scaled_window(acc, grid, int(n), k)
    elif variant == "tiled":
        for tile in dk_tiles(sigma, k):
            _add_scaled_window(acc, grid, tile.xi_rep_index, k)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return Spectrum(grid, acc.astype(np.complex128))
