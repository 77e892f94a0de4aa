"""Multiplier operators over scale windows and rough interval families.

Builds the projection-style operators out of the grid transforms: smooth
scale-window sums, their pointwise variation seminorm across scales, a
sharp maximal function over shrinking frequency neighborhoods, and rough
interval multipliers applied either directly or through their layer
decompositions.  Sharp cutoffs stay sharp on purpose; ringing in space
is part of the object being measured, not an artifact to smooth away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .bumps import build_dk_symbol, dk_tiles
from .errors import GridMismatchError, ResolutionError, SymbolSupportError
from .fluctuation import symbol_vr_norm, variation_norm
from .grid import (
    FrequencySet,
    Signal,
    Spectrum,
    TorusGrid,
    apply_multiplier,
    forward_transform,
    inverse_transform,
)
from .symbols import vr_layer_decompose

__all__ = [
    "ScaleRange",
    "RoughMultiplierSpec",
    "CorollaryConstants",
    "default_scale_range",
    "dk_apply",
    "vq_dk",
    "sharp_maximal",
    "rough_T",
    "rvar_M",
    "delta_k",
    "corollary_constants",
]


@dataclass(frozen=True)
class ScaleRange:
    """Inclusive range of dyadic scale exponents k (windows of width 2^-k)."""

    k_min: int
    k_max: int

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError("empty scale range")

    def scales(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1


def default_scale_range(grid: TorusGrid) -> ScaleRange:
    # every dyadic width from half a unit down to one lattice cell
    return ScaleRange(1, int(np.log2(grid.period)))


def _check_resolvable(grid: TorusGrid, k: int) -> int:
    p = int(np.log2(grid.period))
    if k > p:
        raise ResolutionError(
            f"scale 2^-{k} is below the frequency lattice step 1/{grid.period}"
        )
    return p


@dataclass(frozen=True)
class RoughMultiplierSpec:
    """Finite family of disjoint frequency intervals, each carrying either
    a bounded coefficient or a full symbol supported inside it.

    ``intervals`` are half-open lattice index pairs [lo, hi).  Exactly one
    of ``coefficients`` (complex, modulus at most 1) and ``symbols``
    (full-lattice arrays, one per interval) must be given.  For symbol
    families the construction records each member's nonhomogeneous
    r-variation norm.
    """

    grid: TorusGrid
    intervals: tuple[tuple[int, int], ...]
    coefficients: np.ndarray | None = None
    symbols: tuple[np.ndarray, ...] | None = None
    r: float = 2.0
    vr_norms: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if len(self.intervals) == 0:
            raise ValueError("spec needs at least one interval")
        if (self.coefficients is None) == (self.symbols is None):
            raise ValueError("provide exactly one of coefficients or symbols")
        if self.r < 1:
            raise ValueError("variation exponent r must be >= 1")
        half = self.grid.samples // 2
        order = sorted(range(len(self.intervals)), key=lambda i: self.intervals[i][0])
        ivs = []
        for i in order:
            lo, hi = (int(v) for v in self.intervals[i])
            if not (-half <= lo < hi <= half):
                raise ValueError("interval outside the resolvable band")
            ivs.append((lo, hi))
        for (_, b), (c, _) in zip(ivs, ivs[1:]):
            if b > c:
                raise SymbolSupportError("intervals overlap")
        object.__setattr__(self, "intervals", tuple(ivs))

        if self.coefficients is not None:
            coef = np.asarray(self.coefficients, dtype=np.complex128)[order]
            if coef.shape != (len(ivs),):
                raise ValueError("one coefficient per interval required")
            if np.max(np.abs(coef)) > 1.0 + 1e-12:
                raise ValueError("coefficients must have modulus at most 1")
            coef.setflags(write=False)
            object.__setattr__(self, "coefficients", coef)
        else:
            if len(self.symbols) != len(ivs):
                raise ValueError("one symbol per interval required")
            syms = []
            for i in order:
                arr = np.asarray(self.symbols[i], dtype=np.complex128)
                if arr.shape != (self.grid.samples,):
                    raise ValueError("symbols must live on the full lattice")
                lo, hi = ivs[len(syms)]
                nz = np.flatnonzero(arr)
                if nz.size and (nz[0] < lo + half or nz[-1] >= hi + half):
                    raise SymbolSupportError(
                        "symbol is supported outside its declared interval"
                    )
                arr = arr.copy()
                arr.setflags(write=False)
                syms.append(arr)
            object.__setattr__(self, "symbols", tuple(syms))
            norms = tuple(symbol_vr_norm(s, self.r) for s in syms)
            object.__setattr__(self, "vr_norms", norms)

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    def assembled_symbol(self) -> Spectrum:
        """Single multiplier: sum of coefficient indicators or of symbols."""
        half = self.grid.samples // 2
        acc = np.zeros(self.grid.samples, dtype=np.complex128)
        if self.coefficients is not None:
            for (lo, hi), d in zip(self.intervals, self.coefficients):
                acc[lo + half : hi + half] = d
        else:
            for s in self.symbols:
                acc += s
        return Spectrum(self.grid, acc)


def dk_apply(f: Signal, sigma: FrequencySet, k: int, variant: str = "tiled") -> Signal:
    """Apply the scale-k window sum over the frequency set to f."""
    if f.grid != sigma.grid:
        raise GridMismatchError("signal and frequency set live on different grids")
    return apply_multiplier(f, build_dk_symbol(sigma, k, variant))


def _pointwise_variation(stack: np.ndarray, q: float, mode: str) -> np.ndarray:
    # stack has shape (n_scales, n_points); exact DP over subsequence
    # predecessors, vectorized across the point axis
    n_k = stack.shape[0]
    diffs = np.abs(stack[:, None, :] - stack[None, :, :]) ** q
    best = np.zeros(stack.shape, dtype=np.float64)
    for j in range(1, n_k):
        best[j] = np.max(best[:j] + diffs[:j, j], axis=0)
    out = np.max(best, axis=0) ** (1.0 / q)
    if mode == "nonhomogeneous":
        out = np.maximum(out, np.max(np.abs(stack), axis=0))
    return out


def vq_dk(
    f: Signal,
    sigma: FrequencySet,
    q: float,
    scale_range: ScaleRange | None = None,
    mode: str = "nonhomogeneous",
    variant: str = "tiled",
) -> Signal:
    """Pointwise q-variation of the scale-window outputs across scales.

    At each grid point the finite sequence k -> (window sum at scale k
    applied to f)(x) is reduced to its q-variation; nonhomogeneous mode
    also majorizes the pointwise supremum over scales.
    """
    if q <= 2:
        raise ValueError("variation exponent q must exceed 2")
    if mode not in ("homogeneous", "nonhomogeneous"):
        raise ValueError(f"unknown mode {mode!r}")
    if f.grid != sigma.grid:
        raise GridMismatchError("signal and frequency set live on different grids")
    if scale_range is None:
        scale_range = default_scale_range(f.grid)
    for k in scale_range.scales():
        _check_resolvable(f.grid, k)
    fhat = forward_transform(f)
    stack = np.empty((len(scale_range), f.grid.samples), dtype=np.complex128)
    for row, k in enumerate(scale_range.scales()):
        sym = build_dk_symbol(sigma, k, variant)
        stack[row] = inverse_transform(Spectrum(f.grid, fhat.values * sym.values)).values
    return Signal(f.grid, _pointwise_variation(stack, q, mode).astype(np.complex128))


def sharp_maximal(
    f: Signal, sigma: FrequencySet, scale_range: ScaleRange | None = None
) -> Signal:
    """Pointwise maximum over scales of the sharp projection onto the
    closed 2^-j neighborhood of the frequency set."""
    if f.grid != sigma.grid:
        raise GridMismatchError("signal and frequency set live on different grids")
    grid = f.grid
    if scale_range is None:
        scale_range = default_scale_range(grid)
    half = grid.samples // 2
    fhat = forward_transform(f)
    out = np.zeros(grid.samples, dtype=np.float64)
    for j in scale_range.scales():
        p = _check_resolvable(grid, j)
        rad = 2 ** (p - j)
        mask = np.zeros(grid.samples, dtype=bool)
        for n in sigma.indices:
            lo = max(int(n) - rad + half, 0)
            hi = min(int(n) + rad + half + 1, grid.samples)
            mask[lo:hi] = True
        proj = inverse_transform(Spectrum(grid, fhat.values * mask)).values
        np.maximum(out, np.abs(proj), out=out)
    return Signal(grid, out.astype(np.complex128))


def rough_T(f: Signal, spec: RoughMultiplierSpec) -> Signal:
    """Sharp indicator multiplier with one bounded coefficient per interval."""
    if spec.coefficients is None:
        raise ValueError("rough_T needs a coefficient spec")
    if f.grid != spec.grid:
        raise GridMismatchError("signal and spec live on different grids")
    return apply_multiplier(f, spec.assembled_symbol())


def rvar_M(
    f: Signal, spec: RoughMultiplierSpec, path: str = "direct", tol: float = 1e-3
) -> Signal:
    """Interval-symbol multiplier, either assembled directly or rebuilt
    from the layer decomposition of each member symbol.

    The layered path drops each member's decomposition remainder, so the
    two paths agree within the layer tolerance times the signal norm.
    """
    if spec.symbols is None:
        raise ValueError("rvar_M needs a symbol spec")
    if f.grid != spec.grid:
        raise GridMismatchError("signal and spec live on different grids")
    if path == "direct":
        return apply_multiplier(f, spec.assembled_symbol())
    if path != "layered":
        raise ValueError(f"unknown path {path!r}")
    grid = spec.grid
    half = grid.samples // 2
    acc = np.zeros(grid.samples, dtype=np.complex128)
    for sym in spec.symbols:
        layered = vr_layer_decompose(Spectrum(grid, sym), spec.r, tol)
        # linearity: accumulating every layer of every member into one
        # multiplier equals applying the layers one at a time
        for layer in layered.layers:
            for piece in layer:
                acc[piece.lo + half : piece.hi + half] += piece.coeff
    return apply_multiplier(f, Spectrum(grid, acc))


def delta_k(
    f: Signal,
    sigma: FrequencySet,
    k: int,
    symbols: Sequence[np.ndarray] | None = None,
) -> Signal:
    """Scale-k tile multiplier: one symbol per dyadic tile of width 2^-k
    meeting the frequency set, summed and applied.

    With ``symbols`` omitted the tiles carry the standard smooth window,
    which makes this the tiled scale-window operator.  Supplied symbols
    must be supported inside the threefold concentric dilation of their
    tile; the smooth default already needs that much room.
    """
    if f.grid != sigma.grid:
        raise GridMismatchError("signal and frequency set live on different grids")
    grid = f.grid
    if symbols is None:
        return apply_multiplier(f, build_dk_symbol(sigma, k, "tiled"))
    tiles = dk_tiles(sigma, k)
    if len(symbols) != len(tiles):
        raise ValueError(f"expected {len(tiles)} symbols, one per occupied tile")
    half = grid.samples // 2
    acc = np.zeros(grid.samples, dtype=np.complex128)
    for tile, raw in zip(tiles, symbols):
        arr = np.asarray(raw, dtype=np.complex128)
        if arr.shape != (grid.samples,):
            raise ValueError("symbols must live on the full lattice")
        lo_i, hi_i = tile.index_range()
        span = hi_i - lo_i
        nz = np.flatnonzero(arr)
        if nz.size:
            center = 0.5 * (lo_i + hi_i) + half
            if (nz[0] < center - 1.5 * span) or (nz[-1] >= center + 1.5 * span):
                raise SymbolSupportError(
                    "tile symbol is supported outside the dilated tile"
                )
        acc += arr
    return apply_multiplier(f, Spectrum(grid, acc))


class CorollaryConstants(NamedTuple):
    vt: float
    d2: float


def corollary_constants(
    symbols_by_scale: dict[int, Sequence[np.ndarray]],
    sigma: FrequencySet,
    t: float,
) -> CorollaryConstants:
    """Two constants controlling a family of tile symbols given at several
    scales: the worst t-variation across scales of the assembled symbol
    sampled at the set frequencies, and the scale-invariant second
    difference bound sup over tiles of |tile|^2 |second derivative|.
    """
    if t <= 2:
        raise ValueError("variation exponent t must exceed 2")
    if not symbols_by_scale:
        raise ValueError("need symbols at one scale or more")
    grid = sigma.grid
    half = grid.samples // 2
    m_samp = grid.samples
    scales = sorted(symbols_by_scale)
    seq = np.zeros((len(scales), sigma.indices.size), dtype=np.complex128)
    d2_val = 0.0
    freq_step = 1.0 / grid.period
    for row, k in enumerate(scales):
        p = _check_resolvable(grid, k)
        tiles = dk_tiles(sigma, k)
        arrs = symbols_by_scale[k]
        if len(arrs) != len(tiles):
            raise ValueError(
                f"scale {k}: expected {len(tiles)} symbols, one per occupied tile"
            )
        span = 2 ** (p - k)
        if span < 3:
            raise ResolutionError(
                f"scale 2^-{k} tiles span {span} cells; second differences need 3"
            )
        assembled = np.zeros(m_samp, dtype=np.complex128)
        width = 2.0 ** (-k)
        for tile, raw in zip(tiles, arrs):
            arr = np.asarray(raw, dtype=np.complex128)
            if arr.shape != (m_samp,):
                raise ValueError("symbols must live on the full lattice")
            assembled += arr
            a = tile.index_range()[0] + half
            b = tile.index_range()[1] + half
            d2 = arr[a + 2 : b] - 2.0 * arr[a + 1 : b - 1] + arr[a : b - 2]
            if d2.size:
                cand = width**2 * float(np.max(np.abs(d2))) / freq_step**2
                d2_val = max(d2_val, cand)
        seq[row] = assembled[sigma.indices + half]
    vt = 0.0
    for col in range(seq.shape[1]):
        vt = max(vt, variation_norm(seq[:, col], t, mode="nonhomogeneous"))
    return CorollaryConstants(vt, float(d2_val))
