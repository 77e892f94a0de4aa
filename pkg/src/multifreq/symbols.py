"""Structural decompositions of frequency symbols.

Three constructions live here. ``vr_layer_decompose`` splits a bounded
variation symbol into dyadically refined step layers with controlled
piece counts and coefficient sizes. ``whitney_decompose`` partitions a
frequency interval into dyadic pieces that stay far from the boundary
relative to their own size, and ``window_system`` equips the partition
with a smooth partition of unity plus wide plateau windows. Finally
``windowed_expand`` expands a signal over modulated translates of a
scaled window and rebuilds the smoothly localized signal exactly from
the sampled coefficients.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .bumps import bump_profile, plateau_profile, smoothstep
from .errors import ConstructionError, GridMismatchError, ResolutionError
from .fluctuation import variation_norm
from .grid import (
    DyadicFreqInterval,
    Signal,
    Spectrum,
    TorusGrid,
    apply_multiplier,
    forward_transform,
    inverse_transform,
)

__all__ = [
    "LayerPiece",
    "LayeredSymbol",
    "vr_layer_decompose",
    "layered_to_csv",
    "WhitneyPiece",
    "WhitneySystem",
    "whitney_decompose",
    "whitney_to_csv",
    "WindowPiece",
    "WindowSystem",
    "window_system",
    "WindowExpansion",
    "windowed_expand",
]


# ---------------------------------------------------------------------------
# variation layers

@dataclass(frozen=True)
class LayerPiece:
    """One constant piece of a step layer, on lattice indices [lo, hi)."""

    lo: int
    hi: int
    coeff: complex

    @property
    def cells(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class LayeredSymbol:
    """Step-layer expansion of a symbol of bounded r-variation.

    ``layers[j]`` holds disjoint constant pieces; adding every piece of
    every layer and then ``remainder`` reproduces the source symbol.
    Layer j uses at most 2^(j+1) + 2 pieces, each with coefficient
    modulus at most 3 * 2^(-j/r) * source_norm, and the remainder is
    uniformly below tol * source_norm.
    """

    grid: TorusGrid
    r: float
    tol: float
    source_norm: float
    j_max: int
    layers: tuple[tuple[LayerPiece, ...], ...]
    remainder: Spectrum

    def layer_values(self, j: int) -> np.ndarray:
        """Tabulate layer j on the full frequency lattice."""
        half = self.grid.samples // 2
        out = np.zeros(self.grid.samples, dtype=np.complex128)
        for piece in self.layers[j]:
            out[piece.lo + half : piece.hi + half] += piece.coeff
        return out

    def reconstruct(self) -> Spectrum:
        """Sum of all layers plus the remainder."""
        total = self.remainder.values.copy()
        for j in range(len(self.layers)):
            total += self.layer_values(j)
        return Spectrum(self.grid, total)

    @property
    def piece_counts(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)


def _stop_positions(vals: np.ndarray, eps: float) -> np.ndarray:
    """Left-to-right stopping: restart whenever the value drifts more
    than eps from the value at the previous stop."""
    pos = 0
    stops = [0]
    n = vals.shape[0]
    while pos + 1 < n:
        over = np.abs(vals[pos + 1 :] - vals[pos]) > eps
        if not over.any():
            break
        pos = pos + 1 + int(np.argmax(over))
        stops.append(pos)
    return np.asarray(stops, dtype=np.int64)


def _step_approximant(vals: np.ndarray, stops: np.ndarray) -> np.ndarray:
    seg = np.searchsorted(stops, np.arange(vals.shape[0]), side="right") - 1
    return vals[stops[seg]]


def vr_layer_decompose(g: Spectrum, r: float, tol: float = 1e-3) -> LayeredSymbol:
    """Split a symbol into dyadic step layers by repeated stopping scans.

    Level j rescans the symbol with threshold 2^(-j/r) * v, where v is
    the symbol's nonhomogeneous r-variation; layer j is the difference
    of consecutive approximants. Scanning stops at the first level whose
    threshold is at most tol * v. A symbol whose approximant becomes
    exact early yields empty trailing layers and a zero remainder.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    grid = g.grid
    m_samp = grid.samples
    half = m_samp // 2
    vals = g.values
    v = variation_norm(vals, r, mode="nonhomogeneous")
    if v == 0.0:
        zero = Spectrum(grid, np.zeros(m_samp, dtype=np.complex128))
        layer0 = (LayerPiece(-half, half, 0j),)
        return LayeredSymbol(grid, float(r), float(tol), 0.0, 0, (layer0,), zero)

    j_max = max(0, math.ceil(-r * math.log2(tol)))
    while j_max > 0 and 2.0 ** (-(j_max - 1) / r) <= tol:
        j_max -= 1
    while 2.0 ** (-j_max / r) > tol:
        j_max += 1

    layers: list[tuple[LayerPiece, ...]] = []
    prev_stops = np.array([0], dtype=np.int64)
    prev_approx = np.zeros(m_samp, dtype=np.complex128)
    converged = False
    approx = prev_approx
    for j in range(j_max + 1):
        if converged:
            layers.append(())
            continue
        eps = 2.0 ** (-j / r) * v
        stops = _stop_positions(vals, eps)
        approx = _step_approximant(vals, stops)
        breaks = np.union1d(prev_stops, stops)
        ends = np.append(breaks[1:], m_samp)
        pieces = []
        for b, e in zip(breaks, ends):
            d = approx[b] - prev_approx[b]
            if d != 0:
                pieces.append(LayerPiece(int(b) - half, int(e) - half, complex(d)))
        layers.append(tuple(pieces))
        prev_stops = stops
        prev_approx = approx
        if np.array_equal(approx, vals):
            converged = True

    remainder = Spectrum(grid, vals - prev_approx)
    return LayeredSymbol(
        grid, float(r), float(tol), float(v), int(j_max), tuple(layers), remainder
    )


def layered_to_csv(layered: LayeredSymbol, path) -> None:
    """Write one row per piece: level, lattice bounds, coefficient."""
    lines = ["j,interval_lo,interval_hi,re_d,im_d"]
    for j, layer in enumerate(layered.layers):
        for piece in layer:
            lines.append(
                "%d,%d,%d,%.17g,%.17g"
                % (j, piece.lo, piece.hi, piece.coeff.real, piece.coeff.imag)
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Whitney partitions

@dataclass(frozen=True)
class WhitneyPiece:
    """Dyadic piece [lo, hi) in lattice indices; flagged pieces sit so
    close to the boundary that the 100-fold dilation test failed at the
    minimum allowed size."""

    lo: int
    hi: int
    flagged: bool

    @property
    def cells(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class WhitneySystem:
    """Dyadic Whitney partition of a frequency interval.

    ``overlap_count`` is the measured maximum number of 20-fold dilated
    pieces covering a single lattice cell; ``per_scale_max`` the largest
    number of pieces sharing one size.
    """

    grid: TorusGrid
    omega_lo: int
    omega_hi: int
    min_cells: int
    pieces: tuple[WhitneyPiece, ...]
    overlap_count: int
    per_scale_max: int
    scale_counts: tuple[tuple[int, int], ...]

    @property
    def omega_cells(self) -> int:
        return self.omega_hi - self.omega_lo

    def flagged_cells(self) -> int:
        return sum(p.cells for p in self.pieces if p.flagged)

    def indicator(self) -> np.ndarray:
        n = self.grid.freq_indices()
        return ((n >= self.omega_lo) & (n < self.omega_hi)).astype(np.float64)


_MIN_OMEGA_CELLS = 4096


def whitney_decompose(
    grid: TorusGrid, omega_lo: int, omega_hi: int, min_cells: int = 1
) -> WhitneySystem:
    """Partition [omega_lo, omega_hi) into dyadic pieces u with the
    100-fold concentric dilation of every unflagged piece inside the
    interval. Pieces that would have to shrink below ``min_cells`` to
    satisfy the dilation test are emitted at size ``min_cells`` and
    flagged instead.
    """
    m_samp = grid.samples
    half = m_samp // 2
    if not (-half <= omega_lo < omega_hi <= half):
        raise ValueError("interval must lie inside the resolvable band")
    if omega_hi - omega_lo < _MIN_OMEGA_CELLS:
        raise ResolutionError(
            f"interval spans {omega_hi - omega_lo} cells; need at least {_MIN_OMEGA_CELLS}"
        )
    if min_cells < 1 or (min_cells & (min_cells - 1)) != 0:
        raise ConstructionError("min_cells must be a power of two")
    if min_cells > omega_hi - omega_lo:
        raise ConstructionError("min_cells exceeds the interval size")

    a0 = omega_lo + half
    b0 = omega_hi + half
    raw: list[tuple[int, int, bool]] = []
    stack = [(0, m_samp)]
    while stack:
        a, b = stack.pop()
        if b <= a0 or a >= b0:
            continue
        n = b - a
        if a >= a0 and b <= b0:
            if 2 * a - 99 * n >= 2 * a0 and 2 * b + 99 * n <= 2 * b0:
                raw.append((a, b, False))
                continue
            if n <= min_cells:
                raw.append((a, b, True))
                continue
        mid = a + n // 2
        stack.append((mid, b))
        stack.append((a, mid))
    raw.sort()
    pieces = tuple(WhitneyPiece(a - half, b - half, fl) for a, b, fl in raw)

    cover = np.zeros(m_samp, dtype=np.int64)
    for a, b, _ in raw:
        n = b - a
        lo20 = max(a - (19 * n) // 2, 0)
        hi20 = min(b + (19 * n + 1) // 2, m_samp)
        cover[lo20:hi20] += 1
    overlap = int(cover.max())

    counts = Counter(b - a for a, b, _ in raw)
    scale_counts = tuple(sorted(counts.items()))
    per_scale = max(counts.values())
    return WhitneySystem(
        grid,
        omega_lo,
        omega_hi,
        min_cells,
        pieces,
        overlap,
        int(per_scale),
        scale_counts,
    )


def whitney_to_csv(system: WhitneySystem, path) -> None:
    """One row per piece plus the two measured partition constants."""
    lines = ["piece_lo,piece_hi,cells,flagged,overlap_count,per_scale_max"]
    for p in system.pieces:
        lines.append(
            "%d,%d,%d,%d,%d,%d"
            % (p.lo, p.hi, p.cells, int(p.flagged), system.overlap_count, system.per_scale_max)
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# window families over a Whitney partition

@dataclass(frozen=True)
class WindowPiece:
    """Partition-of-unity member and plateau window for one piece.

    ``phi_values`` lives on lattice indices [phi_lo, phi_lo + len);
    ``window_values`` likewise from ``window_lo``. The envelope is the
    4-fold concentric dilation of the piece, in lattice units.
    """

    piece: WhitneyPiece
    envelope: tuple[float, float]
    phi_lo: int
    phi_values: np.ndarray
    window_lo: int
    window_values: np.ndarray
    slope: float
    curvature: float


@dataclass(frozen=True)
class EtaScaleDiag:
    """Resolvability record for the unit-mass mollifier at one scale."""

    piece_cells: int
    mollifier_cells: float
    degenerate: bool


@dataclass(frozen=True)
class WindowSystem:
    """Whitney skeleton plus smooth windows.

    The ``phi`` family sums to the exact lattice indicator of the
    interval; each member is supported inside the envelope of its piece.
    ``curvature_max`` is the largest measured second difference of any
    member scaled by the square of its envelope length.
    """

    skeleton: WhitneySystem
    windows: tuple[WindowPiece, ...]
    slope_max: float
    curvature_max: float
    mollifier_diags: tuple[EtaScaleDiag, ...]

    @property
    def grid(self) -> TorusGrid:
        return self.skeleton.grid

    def sum_phi(self) -> np.ndarray:
        half = self.grid.samples // 2
        total = np.zeros(self.grid.samples, dtype=np.float64)
        for w in self.windows:
            lo = w.phi_lo + half
            total[lo : lo + w.phi_values.shape[0]] += w.phi_values
        return total

    def phi_symbol(self, i: int) -> Spectrum:
        half = self.grid.samples // 2
        vals = np.zeros(self.grid.samples, dtype=np.complex128)
        w = self.windows[i]
        lo = w.phi_lo + half
        vals[lo : lo + w.phi_values.shape[0]] = w.phi_values
        return Spectrum(self.grid, vals)


def window_system(skeleton: WhitneySystem) -> WindowSystem:
    """Build the smooth partition of unity and plateau windows.

    Ascending ramps of half-width 0.75 * min(neighbor sizes) sit at each
    internal breakpoint; the interval's outer edges stay sharp. Summing
    the telescoped differences reproduces the indicator bit for bit: the
    last member covering a cell absorbs the one-ulp float residue of the
    ramp cancellations, staying inside its own piece.
    """
    grid = skeleton.grid
    m_samp = grid.samples
    half = m_samp // 2
    pieces = skeleton.pieces
    n_pieces = len(pieces)
    a0 = skeleton.omega_lo + half
    b0 = skeleton.omega_hi + half

    arr_lo = [p.lo + half for p in pieces]
    arr_hi = [p.hi + half for p in pieces]
    sizes = [p.cells for p in pieces]

    # internal breakpoint i sits at arr_lo[i], between pieces i-1 and i
    widths = [0.0] * (n_pieces + 1)
    for i in range(1, n_pieces):
        widths[i] = 0.75 * min(sizes[i - 1], sizes[i])

    slice_lo = []
    slice_hi = []
    raw_phi = []
    for i in range(n_pieces):
        lo = a0 if i == 0 else int(math.floor(arr_lo[i] - widths[i]))
        hi = b0 if i == n_pieces - 1 else int(math.ceil(arr_hi[i] + widths[i + 1])) + 1
        lo = max(lo, a0)
        hi = min(hi, b0)
        cells = np.arange(lo, hi, dtype=np.float64)
        if i == 0:
            left = np.ones_like(cells)
        else:
            w = widths[i]
            left = smoothstep((cells - (arr_lo[i] - w)) / (2.0 * w))
        if i == n_pieces - 1:
            right = np.zeros_like(cells)
        else:
            w = widths[i + 1]
            right = smoothstep((cells - (arr_hi[i] - w)) / (2.0 * w))
        raw_phi.append(np.asarray(left - right, dtype=np.float64))
        slice_lo.append(lo)
        slice_hi.append(hi)

    # float compensation: re-add everything, then rewrite the last
    # contributor at each off-by-one-ulp cell so the running sum lands
    # exactly on 1 inside the interval
    for _ in range(3):
        total = np.zeros(m_samp, dtype=np.float64)
        for lo, vals in zip(slice_lo, raw_phi):
            total[lo : lo + vals.shape[0]] += vals
        bad = np.flatnonzero(total[a0:b0] != 1.0) + a0
        if bad.size == 0:
            break
        for c in bad:
            covering = [
                i
                for i in range(n_pieces)
                if slice_lo[i] <= c < slice_hi[i]
            ]
            prefix = 0.0
            for i in covering[:-1]:
                prefix = prefix + float(raw_phi[i][c - slice_lo[i]])
            last = covering[-1]
            raw_phi[last][c - slice_lo[last]] = 1.0 - prefix

    windows = []
    slope_max = 0.0
    curvature_max = 0.0
    for i in range(n_pieces):
        n = sizes[i]
        vals = raw_phi[i]
        padded = np.concatenate(([0.0], vals, [0.0]))
        d1 = padded[1:] - padded[:-1]
        d2 = padded[:-2] - 2.0 * padded[1:-1] + padded[2:]
        slope = float(np.max(np.abs(d1)) * 4.0 * n)
        curvature = float(np.max(np.abs(d2)) * 16.0 * n * n)
        slope_max = max(slope_max, slope)
        curvature_max = max(curvature_max, curvature)

        center = 0.5 * (arr_lo[i] + arr_hi[i])
        w_lo = max(int(math.ceil(center - 7.5 * n)), 0)
        w_hi = min(int(math.floor(center + 7.5 * n)) + 1, m_samp)
        w_cells = np.arange(w_lo, w_hi, dtype=np.float64)
        w_vals = plateau_profile(w_cells - center, 5.0 * n, 7.5 * n)

        envelope = (pieces[i].lo - 1.5 * n, pieces[i].hi + 1.5 * n)
        windows.append(
            WindowPiece(
                pieces[i],
                envelope,
                slice_lo[i] - half,
                vals,
                w_lo - half,
                np.asarray(w_vals, dtype=np.float64),
                slope,
                curvature,
            )
        )

    diags = []
    for n, _count in skeleton.scale_counts:
        mollifier_cells = 0.008 * n
        diags.append(EtaScaleDiag(n, mollifier_cells, mollifier_cells < 8.0))
    return WindowSystem(skeleton, tuple(windows), slope_max, curvature_max, tuple(diags))


# ---------------------------------------------------------------------------
# windowed expansion over modulated translates

@dataclass(frozen=True)
class WindowExpansion:
    """Coefficients and reconstruction of a smoothly localized signal.

    The reconstruction equals the action of the localized window symbol
    on the input, up to float roundoff, because the translate spacing is
    a quarter of the window length: every aliasing image of the analysis
    band lands where the synthesis window vanishes.
    """

    grid: TorusGrid
    omega: DyadicFreqInterval
    xi_rep_index: int
    shift_cells: int
    shift_count: int
    l_offsets: np.ndarray
    coefficients: np.ndarray
    reconstruction: Signal
    target: Signal
    rel_error: float
    mollifier_degenerate: bool
    l_trunc: int | None = None
    trunc_reconstruction: Signal | None = None
    trunc_error: float | None = None


def _synthesis_window(grid: TorusGrid, scale: float) -> tuple[np.ndarray, bool]:
    """Wide plateau window, mollified on the lattice when the mollifier
    support covers at least eight cells, else used directly."""
    freqs = grid.frequencies()
    base = bump_profile("A", freqs * scale)
    m_max = int(math.ceil(0.1 * grid.period / scale)) - 1
    if 2 * m_max + 1 < 8:
        return base, True
    m_range = np.arange(-m_max, m_max + 1)
    eta_raw = bump_profile("eta", m_range * scale / grid.period)
    total = float(np.sum(eta_raw))
    if total <= 0.0:
        return base, True
    out = np.zeros_like(base)
    for m, weight in zip(m_range, eta_raw):
        out += np.roll(base, m) * weight
    return out / total, False


def windowed_expand(
    f: Signal, omega: DyadicFreqInterval, l_trunc: int | None = None
) -> WindowExpansion:
    """Expand f against modulated translates of a window at the scale of
    the dyadic interval and rebuild the localized signal.

    Coefficients are samples of the demodulated, window-filtered signal
    at translate spacing 2^k / 4. The reconstruction pairs them with a
    wide plateau synthesis window; the quarter spacing pushes all alias
    images outside its support, so the identity is exact on the lattice.
    """
    grid = f.grid
    if grid != omega.grid:
        raise GridMismatchError("signal and interval live on different grids")
    scale = 2.0 ** omega.k
    xi_rep = omega.xi_rep_index
    if xi_rep is None:
        xi_rep = omega.index_range()[0]
    m_samp = grid.samples
    cs_exact = m_samp * scale / (4.0 * grid.period)
    cs = int(round(cs_exact))
    if cs < 1 or abs(cs - cs_exact) > 1e-9:
        raise ResolutionError(
            "translate spacing is not a whole number of sample cells at this scale"
        )
    freqs = grid.frequencies()
    analysis = bump_profile("phi", freqs * scale)
    fhat = forward_transform(f)
    shifted = np.roll(fhat.values, -int(xi_rep)) * analysis
    u = inverse_transform(Spectrum(grid, shifted)).values

    shift_count = m_samp // cs
    l_offsets = np.arange(-(shift_count // 2), shift_count - shift_count // 2)
    sample_idx = (l_offsets * cs) % m_samp
    coeffs = u[sample_idx]

    synth, degenerate = _synthesis_window(grid, scale)
    phase = np.exp(2j * np.pi * (xi_rep / grid.period) * grid.positions())

    def rebuild(kept: np.ndarray) -> Signal:
        comb = np.zeros(m_samp, dtype=np.complex128)
        comb[sample_idx] = kept
        comb_hat = forward_transform(Signal(grid, comb)).values
        conv = inverse_transform(Spectrum(grid, comb_hat * synth)).values
        return Signal(grid, cs * conv * phase)

    reconstruction = rebuild(coeffs)
    # window offsets wrap across the band edge, matching the torus
    # periodicity of the lattice transform
    half = m_samp // 2
    rel = ((grid.freq_indices() - int(xi_rep) + half) % m_samp) - half
    target_symbol = bump_profile("phi", (rel / grid.period) * scale)
    target = apply_multiplier(f, Spectrum(grid, target_symbol.astype(np.complex128)))
    denom = target.norm2()
    diff = (reconstruction - target).norm2()
    rel_error = diff / denom if denom > 0 else diff

    trunc_recon = None
    trunc_err = None
    if l_trunc is not None:
        if l_trunc < 0:
            raise ValueError("l_trunc must be nonnegative")
        kept = np.where(np.abs(l_offsets) <= l_trunc, coeffs, 0.0)
        trunc_recon = rebuild(kept)
        full_norm = reconstruction.norm2()
        tdiff = (trunc_recon - reconstruction).norm2()
        trunc_err = tdiff / full_norm if full_norm > 0 else tdiff

    return WindowExpansion(
        grid,
        omega,
        int(xi_rep),
        cs,
        shift_count,
        l_offsets,
        coeffs,
        reconstruction,
        target,
        rel_error,
        degenerate,
        l_trunc,
        trunc_recon,
        trunc_err,
    )
