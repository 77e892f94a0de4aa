"""Sampled torus, discrete Fourier pair, and frequency bookkeeping.

The spatial domain is a circle of circumference ``period`` sampled at
``samples`` equally spaced points.  The dual lattice carries frequencies
``n / period`` for integer ``n`` in ``[-samples/2, samples/2)``.  The
transform pair is normalized so that it is unitary between the measures

* space:     ``h = period / samples`` per sample,
* frequency: ``1 / period`` per lattice point,

which makes ``||spectrum||_2 == ||signal||_2`` hold exactly and keeps
multiplier operators honest isometries where they should be.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, ResolutionError

__all__ = [
    "TorusGrid",
    "Signal",
    "Spectrum",
    "SpectralSymbol",
    "FrequencySet",
    "DyadicFreqInterval",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "signal_to_csv",
    "signal_from_csv",
    "spectrum_to_csv",
    "grid_to_config",
    "grid_from_config",
]


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Sampling geometry: a period-``period`` circle with ``samples`` cells."""

    period: int = 128
    samples: int = 2 ** 15

    def __post_init__(self):
        if not _is_pow2(self.period):
            raise ValueError(f"period must be a power of two, got {self.period}")
        if not _is_pow2(self.samples):
            raise ValueError(f"samples must be a power of two, got {self.samples}")
        if self.samples < 4 * self.period:
            raise ValueError(
                f"samples must be at least 4*period ({4 * self.period}), got {self.samples}"
            )

    @property
    def h(self) -> float:
        """Spatial cell width."""
        return self.period / self.samples

    @property
    def freq_step(self) -> float:
        """Spacing of the frequency lattice."""
        return 1.0 / self.period

    @property
    def nyquist(self) -> float:
        return self.samples / (2 * self.period)

    def positions(self) -> np.ndarray:
        """Sample points x_i = i*h in [0, period)."""
        return np.arange(self.samples) * self.h

    def freq_indices(self) -> np.ndarray:
        """Integer frequency indices n in [-samples/2, samples/2)."""
        return np.arange(-(self.samples // 2), self.samples // 2)

    def frequencies(self) -> np.ndarray:
        """Physical frequencies n/period, ascending."""
        return self.freq_indices() / self.period

    def index_of_freq(self, xi: float) -> int:
        """Lattice index of a physical frequency; raises if off-lattice."""
        n = xi * self.period
        n_round = int(round(n))
        if abs(n - n_round) > 1e-9:
            raise ValueError(f"frequency {xi} is not on the lattice (step {self.freq_step})")
        if not (-self.samples // 2 <= n_round < self.samples // 2):
            raise ValueError(f"frequency {xi} outside the resolvable band")
        return n_round


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.complex128)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Signal:
    """Complex samples over a TorusGrid, one value per spatial cell."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.grid.samples,):
            raise ValueError(f"expected {self.grid.samples} samples, got shape {vals.shape}")
        object.__setattr__(self, "values", _freeze(vals))

    def norm1(self) -> float:
        return float(self.grid.h * np.sum(np.abs(self.values)))

    def norm2(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Signal":
        return Signal(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Spectrum:
    """Complex values on the frequency lattice, ascending index order."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.grid.samples,):
            raise ValueError(f"expected {self.grid.samples} lattice values, got shape {vals.shape}")
        object.__setattr__(self, "values", _freeze(vals))

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) / self.grid.period))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "Spectrum") -> "Spectrum":
        _check_same_grid(self, other)
        return Spectrum(self.grid, self.values + other.values)

    def __sub__(self, other: "Spectrum") -> "Spectrum":
        _check_same_grid(self, other)
        return Spectrum(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Spectrum":
        return Spectrum(self.grid, self.values * scalar)

    __rmul__ = __mul__


# A multiplier symbol is stored exactly like a spectrum: one complex value
# per frequency lattice point.
SpectralSymbol = Spectrum


def forward_transform(sig: Signal) -> Spectrum:
    """Spectrum values F_n = h * sum_i f(x_i) e(-n i / samples)."""
    vals = sig.grid.h * np.fft.fftshift(np.fft.fft(sig.values))
    return Spectrum(sig.grid, vals)


def inverse_transform(spec: Spectrum) -> Signal:
    """Inverse of :func:`forward_transform`; f(x_i) = (1/period) * sum_n F_n e(n i / samples)."""
    vals = np.fft.ifft(np.fft.ifftshift(spec.values)) / spec.grid.h
    return Signal(spec.grid, vals)


def apply_multiplier(sig: Signal, symbol: Spectrum) -> Signal:
    """Multiply the spectrum of ``sig`` by ``symbol`` and transform back."""
    _check_same_grid(sig, symbol)
    spec = forward_transform(sig)
    return inverse_transform(Spectrum(sig.grid, spec.values * symbol.values))


@dataclass(frozen=True)
class FrequencySet:
    """A finite set of distinct frequency-lattice points inside the open
    Nyquist band, kept sorted.  ``indices`` are integer lattice indices."""

    grid: TorusGrid
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.size == 0:
            raise ValueError("frequency set must be nonempty")
        if not np.issubdtype(idx.dtype, np.integer):
            raise ValueError("indices must be integers (lattice units)")
        idx = np.unique(idx.astype(np.int64))
        if idx.size != np.asarray(self.indices).size:
            raise ValueError("frequencies must be distinct")
        nyq_idx = self.grid.samples // 2
        if idx[0] <= -nyq_idx or idx[-1] >= nyq_idx:
            raise ValueError("frequencies must lie strictly inside the Nyquist band")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_frequencies(cls, grid: TorusGrid, freqs) -> "FrequencySet":
        """Build from physical frequencies; each must sit on the lattice."""
        idx = np.array([grid.index_of_freq(x) for x in np.atleast_1d(freqs)], dtype=np.int64)
        return cls(grid, idx)

    @property
    def n(self) -> int:
        return int(self.indices.size)

    def frequencies(self) -> np.ndarray:
        return self.indices / self.grid.period

    @property
    def min_gap(self) -> float:
        """Smallest physical gap between consecutive frequencies (inf for one point)."""
        if self.n < 2:
            return float("inf")
        return float(np.min(np.diff(self.indices)) / self.grid.period)

    @property
    def separated(self) -> bool:
        """True when the set is 1-separated."""
        return self.min_gap >= 1.0


@dataclass(frozen=True)
class DyadicFreqInterval:
    """Half-open dyadic frequency interval [m*2^-k, (m+1)*2^-k).

    ``xi_rep`` optionally pins a representative frequency (lattice units,
    as an integer index) used when the interval carries a modulation.
    """

    grid: TorusGrid
    k: int
    m: int
    xi_rep_index: int | None = field(default=None)

    def __post_init__(self):
        p = int(np.log2(self.grid.period))
        if self.k > p:
            raise ResolutionError(
                f"dyadic scale 2^-{self.k} is below the lattice step 1/{self.grid.period}"
            )
        lo_idx, hi_idx = self.index_range()
        nyq = self.grid.samples // 2
        if lo_idx < -nyq or hi_idx > nyq:
            raise ValueError("interval exceeds the resolvable band")
        if self.xi_rep_index is not None:
            if not (lo_idx <= self.xi_rep_index < hi_idx):
                raise ValueError("representative frequency outside the interval")

    @property
    def width(self) -> float:
        return 2.0 ** (-self.k)

    @property
    def lo(self) -> float:
        return self.m * self.width

    @property
    def hi(self) -> float:
        return (self.m + 1) * self.width

    def index_range(self) -> tuple[int, int]:
        """Lattice index range [lo_idx, hi_idx) covered by the interval."""
        p = int(np.log2(self.grid.period))
        span = 2 ** (p - self.k)
        return self.m * span, (self.m + 1) * span

    @property
    def xi_rep(self) -> float:
        if self.xi_rep_index is None:
            raise ValueError("no representative frequency set")
        return self.xi_rep_index / self.grid.period

    def indicator(self) -> np.ndarray:
        """Exact lattice indicator of the interval (ascending index order)."""
        lo_idx, hi_idx = self.index_range()
        n = self.grid.freq_indices()
        return ((n >= lo_idx) & (n < hi_idx)).astype(np.float64)


# ---------------------------------------------------------------------------
# serialization

def signal_to_csv(sig: Signal, path) -> None:
    with open(path, "w") as fh:
        fh.write("index,re,im\n")
        for i, v in enumerate(sig.values):
            fh.write(f"{i},{v.real:.17g},{v.imag:.17g}\n")


def signal_from_csv(grid: TorusGrid, path) -> Signal:
    vals = np.zeros(grid.samples, dtype=np.complex128)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "index,re,im":
            raise ValueError(f"unexpected header {header!r}")
        count = 0
        for line in fh:
            i_s, re_s, im_s = line.strip().split(",")
            vals[int(i_s)] = float(re_s) + 1j * float(im_s)
            count += 1
    if count != grid.samples:
        raise ValueError(f"expected {grid.samples} rows, got {count}")
    return Signal(grid, vals)


def spectrum_to_csv(spec: Spectrum, path) -> None:
    idx = spec.grid.freq_indices()
    with open(path, "w") as fh:
        fh.write("freq_index,re,im\n")
        for n, v in zip(idx, spec.values):
            fh.write(f"{n},{v.real:.17g},{v.imag:.17g}\n")


def grid_to_config(grid: TorusGrid) -> str:
    return f"period = {grid.period}\nsamples = {grid.samples}\n"


def grid_from_config(text: str) -> TorusGrid:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = int(value.strip())
    return TorusGrid(period=fields["period"], samples=fields["samples"])
