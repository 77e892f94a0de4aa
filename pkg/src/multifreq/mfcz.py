"""Height-threshold decomposition of a signal relative to a frequency set.

``f = good + sum_J b_J`` where the bad atoms ``b_J`` live on dilated
stopping intervals and are orthogonal, up to a reported residual, to every
exponential ``e(xi_j x)`` from the frequency set.  The stopping rule uses
dyadic averages against the height ``lam / sqrt(N)``; the good part on
each atom matches all N moments of the local signal with the least-norm
exponential combination on the dilated interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .grid import FrequencySet, Signal, TorusGrid

__all__ = [
    "CZInterval",
    "CZDecomposition",
    "CZReport",
    "select_intervals",
    "moment_match",
    "mfcz_decompose",
    "verify_mfcz",
    "cz_reports_to_csv",
]

GRAM_RCOND = 1e-10
TOL_ORTH = 1e-8


def _cell_exponentials(grid: TorusGrid, sigma: FrequencySet, cells: np.ndarray) -> np.ndarray:
    """Matrix E[j, i] = e(-xi_j * x_i) over the given cells."""
    x = cells * grid.h
    xi = sigma.frequencies()
    return np.exp(-2j * np.pi * np.outer(xi, x))


@dataclass(frozen=True)
class CZInterval:
    """One stopping interval with its atom.

    ``cells`` index the dyadic interval J (never wrapping), ``triple_cells``
    its concentric 3-fold dilation taken modulo the period.  ``g_values``
    and ``b_values`` are stored compactly on ``triple_cells``.
    """

    grid: TorusGrid
    start_cell: int
    n_cells: int
    cells: np.ndarray
    triple_cells: np.ndarray
    f_values: np.ndarray  # f restricted to J, on `cells`
    moments: np.ndarray
    g_values: np.ndarray  # on `triple_cells`
    b_values: np.ndarray  # on `triple_cells`
    gram_min_sv: float  # smallest singular value of the Gram, relative to largest
    max_residual: float  # worst moment residual of b, relative to (1 + ||f_J||_1)

    @property
    def measure(self) -> float:
        return self.n_cells * self.grid.h

    def f_signal(self) -> Signal:
        out = np.zeros(self.grid.samples, dtype=np.complex128)
        out[self.cells] = self.f_values
        return Signal(self.grid, out)

    def g_signal(self) -> Signal:
        out = np.zeros(self.grid.samples, dtype=np.complex128)
        out[self.triple_cells] = self.g_values
        return Signal(self.grid, out)

    def b_signal(self) -> Signal:
        out = np.zeros(self.grid.samples, dtype=np.complex128)
        out[self.triple_cells] = self.b_values
        return Signal(self.grid, out)


@dataclass(frozen=True)
class CZDecomposition:
    signal: Signal
    lam: float
    sigma: FrequencySet
    good: Signal
    atoms: tuple[CZInterval, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class CZReport:
    lam: float
    n_freq: int
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    min_gram_sv: float


def select_intervals(f: Signal, lam: float, n_freq: int) -> list[tuple[int, int]]:
    """Maximal dyadic intervals with |f|-average strictly above lam/sqrt(N).

    Returns (start_cell, n_cells) pairs, sorted by start.  The dyadic tree
    runs from the whole period down to single cells; selecting the root
    means the decomposition degenerates, which is an error.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if n_freq < 1:
        raise ValueError("n_freq must be at least 1")
    mags = np.abs(f.values)
    if not np.any(mags > 0):
        raise ValueError("signal must be nonzero")
    threshold = lam / np.sqrt(n_freq)
    m = f.grid.samples
    cum = np.concatenate([[0.0], np.cumsum(mags)])

    def avg(start, size):
        return (cum[start + size] - cum[start]) / size

    if avg(0, m) > threshold:
        raise DegenerateInputError(
            "average height exceeds lam/sqrt(N) on the whole torus; decomposition degenerate"
        )
    selected: list[tuple[int, int]] = []
    stack = [(0, m)]
    while stack:
        start, size = stack.pop()
        half = size // 2
        for s in (start, start + half):
            if avg(s, half) > threshold:
                selected.append((s, half))
            elif half > 1:
                stack.append((s, half))
    selected.sort()
    return selected


def _triple_cells(grid: TorusGrid, start: int, size: int) -> np.ndarray:
    if 3 * size * grid.h > grid.period:
        raise DegenerateInputError(
            f"dilated interval of {3 * size} cells does not fit in the torus"
        )
    return np.arange(start - size, start + 2 * size) % grid.samples


def moment_match(f_vals: np.ndarray, sigma: FrequencySet, cells: np.ndarray,
                 triple_cells: np.ndarray):
    """Least-norm exponential combination on the dilated interval whose
    moments against e(xi_j x) match those of the local signal.

    Returns (g on triple_cells, moments, relative smallest Gram singular
    value).  A rank-deficient Gram is regularized by pseudoinverse with
    relative cutoff GRAM_RCOND; the solution stays least-norm and the
    moment residual stays negligible because the moment vector lies in the
    range of the Gram by construction.
    """
    grid = sigma.grid
    h = grid.h
    e_j = _cell_exponentials(grid, sigma, cells)
    moments = h * (e_j @ f_vals)
    e_3j = _cell_exponentials(grid, sigma, triple_cells)
    gram = h * (e_3j @ e_3j.conj().T)
    sv = np.linalg.svd(gram, compute_uv=False)
    rel_min_sv = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    alpha = np.linalg.pinv(gram, rcond=GRAM_RCOND) @ moments
    g_vals = alpha @ np.conj(e_3j)
    return g_vals, moments, rel_min_sv


def _build_atom(f: Signal, sigma: FrequencySet, start: int, size: int) -> CZInterval:
    grid = f.grid
    cells = np.arange(start, start + size)
    triple = _triple_cells(grid, start, size)
    f_vals = f.values[cells]
    g_vals, moments, rel_min_sv = moment_match(f_vals, sigma, cells, triple)
    b_vals = -g_vals.copy()
    # b = f_J - g on the dilation; J sits at offsets [size, 2*size) within it
    b_vals[size:2 * size] += f_vals
    e_3j = _cell_exponentials(grid, sigma, triple)
    resid = np.abs(grid.h * (e_3j @ b_vals))
    l1 = grid.h * float(np.sum(np.abs(f_vals)))
    return CZInterval(
        grid=grid,
        start_cell=start,
        n_cells=size,
        cells=cells,
        triple_cells=triple,
        f_values=f_vals,
        moments=moments,
        g_values=g_vals,
        b_values=b_vals,
        gram_min_sv=rel_min_sv,
        max_residual=float(np.max(resid)) / (1.0 + l1),
    )


def mfcz_decompose(f: Signal, lam: float, sigma: FrequencySet) -> CZDecomposition:
    """Split f into a good part and moment-free atoms at height lam."""
    intervals = select_intervals(f, lam, sigma.n)
    atoms = tuple(_build_atom(f, sigma, s, n) for s, n in intervals)
    bad = np.zeros(f.grid.samples, dtype=np.complex128)
    for atom in atoms:
        bad[atom.triple_cells] += atom.b_values
    good = Signal(f.grid, f.values - bad)
    return CZDecomposition(signal=f, lam=lam, sigma=sigma, good=good, atoms=atoms)


def verify_mfcz(dec: CZDecomposition) -> CZReport:
    """Dimensionless constants of the decomposition contract.

    c1: max_J sqrt(N)||f 1_J||_1 / (lam |J|)        (height of selected averages)
    c2: max_J ||g_J||_2 / (|J|^(1/2) lam)           (good-atom size)
    c3: ||good||_2^2 / (sqrt(N) lam ||f||_1)        (global good part)
    c4: lam * sum |J| / (sqrt(N) ||f||_1)           (total selected measure)
    c5: max_J ||b_J||_1 / (lam |J|)                 (bad-atom mass)
    c6: max_{J,j} |moment residual| / ||f_J||_1     (orthogonality)
    """
    f = dec.signal
    lam = dec.lam
    n_freq = dec.sigma.n
    h = f.grid.h
    rt_n = np.sqrt(n_freq)
    norm1 = f.norm1()
    c1 = c2 = c5 = c6 = 0.0
    total_measure = 0.0
    min_sv = 1.0
    for atom in dec.atoms:
        meas = atom.measure
        total_measure += meas
        l1_local = h * float(np.sum(np.abs(atom.f_values)))
        c1 = max(c1, rt_n * l1_local / (lam * meas))
        g2 = np.sqrt(h * float(np.sum(np.abs(atom.g_values) ** 2)))
        c2 = max(c2, g2 / (np.sqrt(meas) * lam))
        b1 = h * float(np.sum(np.abs(atom.b_values)))
        c5 = max(c5, b1 / (lam * meas))
        e_3j = _cell_exponentials(f.grid, dec.sigma, atom.triple_cells)
        resid = float(np.max(np.abs(h * (e_3j @ atom.b_values))))
        c6 = max(c6, resid / l1_local)
        min_sv = min(min_sv, atom.gram_min_sv)
    c3 = dec.good.norm2() ** 2 / (rt_n * lam * norm1)
    c4 = lam * total_measure / (rt_n * norm1)
    return CZReport(
        lam=lam, n_freq=n_freq,
        c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6,
        min_gram_sv=min_sv,
    )


def cz_reports_to_csv(reports, path) -> None:
    """One row per decomposition: lambda, N, C1..C6, worst Gram diagnostic."""
    with open(path, "w") as fh:
        fh.write("lambda,n_freq,c1,c2,c3,c4,c5,c6,min_gram_sv\n")
        for r in reports:
            fh.write(
                f"{r.lam:.17g},{r.n_freq},{r.c1:.17g},{r.c2:.17g},{r.c3:.17g},"
                f"{r.c4:.17g},{r.c5:.17g},{r.c6:.17g},{r.min_gram_sv:.17g}\n"
            )
