"""Seeded operator-norm estimation and scaling-law fitting.

The variational composites are sublinear, so their norms are estimated
from below by maxima over structured input families rather than by power
iteration.  Every trial derives its generator from (master seed, point
size, trial index), which makes the estimates independent of execution
order: a work pool of any width reproduces the serial numbers exactly.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bumps import plateau_profile
from .grid import (
    FrequencySet,
    Signal,
    Spectrum,
    TorusGrid,
    inverse_transform,
)
from .operators import (
    RoughMultiplierSpec,
    ScaleRange,
    dk_apply,
    rough_T,
    rvar_M,
    sharp_maximal,
    vq_dk,
)

__all__ = [
    "ExperimentConfig",
    "FitResult",
    "ScalingRow",
    "ScalingReport",
    "estimate_strong_norm",
    "estimate_weak11",
    "weak_lambda_scan",
    "fit_scaling",
    "run_suite",
    "scaling_svg",
]

_STRONG_FAMILIES = ("gaussian", "signs", "atom")


def _setup_rng(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, 0]))


def _trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, 1, trial]))


def sample_separated_set(grid: TorusGrid, n: int, rng: np.random.Generator) -> FrequencySet:
    """n frequencies on unit-spaced slots, so the set is 1-separated."""
    p = grid.period
    half = grid.samples // 2
    slots = np.arange(-half + p, half - p + 1, p)
    if n > slots.size:
        raise ValueError(f"cannot place {n} separated frequencies on this grid")
    pick = rng.choice(slots.size, size=n, replace=False)
    return FrequencySet(grid, np.sort(slots[pick]))


def sample_rough_spec(
    grid: TorusGrid,
    n: int,
    rng: np.random.Generator,
    with_symbols: bool = False,
    r: float = 2.0,
) -> RoughMultiplierSpec:
    """n disjoint intervals in disjoint slots, with unimodular
    coefficients or smooth dome symbols."""
    half = grid.samples // 2
    slot = (2 * half) // n
    if slot < 8:
        raise ValueError(f"cannot place {n} disjoint intervals on this grid")
    ivs = []
    for i in range(n):
        base = -half + i * slot
        w = int(rng.integers(max(slot // 4, 4), slot // 2 + 1))
        off = int(rng.integers(0, slot - w + 1))
        ivs.append((base + off, base + off + w))
    if not with_symbols:
        phases = np.exp(2j * np.pi * rng.random(n))
        return RoughMultiplierSpec(grid, tuple(ivs), coefficients=phases)
    syms = []
    for lo, hi in ivs:
        arr = np.zeros(grid.samples, dtype=np.complex128)
        w = hi - lo
        cells = np.arange(lo, hi) - 0.5 * (lo + hi)
        arr[lo + half : hi + half] = plateau_profile(cells, 0.25 * w, 0.499 * w)
        syms.append(arr)
    return RoughMultiplierSpec(grid, tuple(ivs), symbols=tuple(syms), r=r)


@dataclass(frozen=True)
class _OpSetup:
    op: Callable[[Signal], Signal]
    zones: tuple[tuple[int, int], ...]
    reps: np.ndarray


def _build_setup(op_id: str, params: dict, seed: int) -> _OpSetup:
    grid = params["grid"]
    p = int(np.log2(grid.period))
    if op_id in ("dk_apply", "vq_dk", "sharp_maximal"):
        sigma = params.get("sigma")
        if sigma is None:
            sigma = sample_separated_set(grid, int(params["n"]), _setup_rng(seed, int(params["n"])))
        if op_id == "dk_apply":
            k = int(params.get("k", 3))
            halfw = max(2 ** (p - k - 1), 1)
            op = lambda f: dk_apply(f, sigma, k)
        elif op_id == "vq_dk":
            q = float(params.get("q", 3.0))
            sr = params.get("scale_range")
            halfw = 2 ** (p - 2)
            op = lambda f: vq_dk(f, sigma, q, scale_range=sr)
        else:
            sr = params.get("scale_range")
            halfw = 2 ** (p - 1)
            op = lambda f: sharp_maximal(f, sigma, sr)
        half = grid.samples // 2
        zones = tuple(
            (max(int(n) - halfw, -half), min(int(n) + halfw + 1, half))
            for n in sigma.indices
        )
        return _OpSetup(op, zones, sigma.indices)
    if op_id in ("rough_T", "rvar_M"):
        spec = params.get("spec")
        if spec is None:
            spec = sample_rough_spec(
                grid,
                int(params["n"]),
                _setup_rng(seed, int(params["n"])),
                with_symbols=(op_id == "rvar_M"),
                r=float(params.get("r", 2.0)),
            )
        if op_id == "rough_T":
            op = lambda f: rough_T(f, spec)
        else:
            path = params.get("path", "direct")
            op = lambda f: rvar_M(f, spec, path)
        reps = np.array([(lo + hi) // 2 for lo, hi in spec.intervals])
        return _OpSetup(op, spec.intervals, reps)
    raise ValueError(f"unknown operator id {op_id!r}")


def _gaussian_zone_input(grid: TorusGrid, zones, rng) -> Signal:
    # paint a random block of one zone; narrow blocks probe the symbol
    # pointwise, wide ones probe it in the mean
    half = grid.samples // 2
    lo, hi = zones[int(rng.integers(len(zones)))]
    zw = hi - lo
    w = min(2 ** int(rng.integers(0, int(np.log2(zw)) + 1)), zw)
    start = lo + int(rng.integers(0, zw - w + 1))
    spec = np.zeros(grid.samples, dtype=np.complex128)
    spec[start + half : start + w + half] = rng.standard_normal(w) + 1j * rng.standard_normal(w)
    return inverse_transform(Spectrum(grid, spec))


def _sign_combo_input(grid: TorusGrid, reps, rng) -> Signal:
    x = grid.positions()
    dist = np.minimum(x, grid.period - x)
    env = plateau_profile(dist, grid.period / 4.0, grid.period / 2.0 - 0.5)
    acc = np.zeros(grid.samples, dtype=np.complex128)
    signs = rng.choice(np.array([-1.0, 1.0]), size=len(reps))
    for s, n in zip(signs, reps):
        acc += s * np.exp(2j * np.pi * (int(n) / grid.period) * x)
    return Signal(grid, env * acc)


def _atom_input(grid: TorusGrid, rng) -> Signal:
    m = grid.samples
    w = int(2 ** rng.integers(0, 4))
    start = int(rng.integers(0, m - w + 1))
    vals = np.zeros(m, dtype=np.complex128)
    vals[start : start + w] = np.exp(2j * np.pi * rng.random())
    return Signal(grid, vals)


def _weak_input(grid: TorusGrid, rng) -> Signal:
    m = grid.samples
    vals = np.zeros(m, dtype=np.complex128)
    phase = np.exp(2j * np.pi * rng.random())
    if int(rng.integers(2)) == 0:
        vals[int(rng.integers(m))] = phase
    else:
        w = 2 ** int(rng.integers(1, 9))
        start = int(rng.integers(0, m - w + 1))
        vals[start : start + w // 2] = phase
        vals[start + w // 2 : start + w] = -phase
    return Signal(grid, vals)


def weak_lambda_scan(values, h: float, norm1: float, n_lambda: int = 64) -> float:
    """Largest lambda * h * #{|values| >= lambda} / norm1 over a log grid.

    The tail count is evaluated with >= at each level so the supremum of
    the piecewise-constant tail functional is attained on the grid.
    """
    a = np.abs(np.asarray(values)).ravel()
    amax = float(a.max()) if a.size else 0.0
    if amax <= 0.0 or norm1 <= 0.0:
        return 0.0
    lam = np.geomspace(amax * 1e-5, amax, n_lambda)
    srt = np.sort(a)
    counts = a.size - np.searchsorted(srt, lam, side="left")
    return float(np.max(lam * h * counts) / norm1)


def _run_trials(
    op_id: str,
    params: dict,
    trials: int,
    seed: int,
    family: str,
    workers: int,
    weak: bool,
) -> tuple[float, str]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    setup = _build_setup(op_id, params, seed)
    grid = params["grid"]
    n_key = int(params.get("n", 0))

    def one(trial: int) -> tuple[float, str]:
        rng = _trial_rng(seed, n_key, trial)
        if weak:
            f = _weak_input(grid, rng)
            label = "delta-or-atom"
        else:
            label = family if family != "all" else _STRONG_FAMILIES[trial % 3]
            if label == "gaussian":
                f = _gaussian_zone_input(grid, setup.zones, rng)
            elif label == "signs":
                f = _sign_combo_input(grid, setup.reps, rng)
            elif label == "atom":
                f = _atom_input(grid, rng)
            else:
                raise ValueError(f"unknown input family {family!r}")
        if weak:
            denom = f.norm1()
        else:
            denom = f.norm2()
        if denom == 0.0:
            return 0.0, f"{label}[{trial}]"
        out = setup.op(f)
        if weak:
            value = weak_lambda_scan(out.values, grid.h, denom)
        else:
            value = out.norm2() / denom
        return value, f"{label}[{trial}]"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(i) for i in range(trials)]
    best = max(range(trials), key=lambda i: (results[i][0], -i))
    return results[best]


def estimate_strong_norm(
    op_id: str,
    params: dict,
    trials: int = 64,
    seed: int = 0,
    family: str = "all",
    workers: int = 1,
) -> float:
    """Max over trial inputs of ||Op f||_2 / ||f||_2."""
    return _run_trials(op_id, params, trials, seed, family, workers, weak=False)[0]


def estimate_weak11(
    op_id: str,
    params: dict,
    trials: int = 64,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """Max over delta and mean-zero atom trials of the lambda-scan of
    lambda * measure{|Op f| >= lambda} / ||f||_1."""
    return _run_trials(op_id, params, trials, seed, "all", workers, weak=True)[0]


class FitResult(NamedTuple):
    alpha: float
    r2_power: float
    beta: float
    r2_log: float
    preferred: str
    degenerate: bool


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return slope, intercept, min(max(r2, 0.0), 1.0)


def _fit_points(rows) -> tuple[np.ndarray, np.ndarray]:
    pts = []
    for row in rows:
        if hasattr(row, "n"):
            pts.append((int(row.n), float(row.estimate)))
        else:
            pts.append((int(row[0]), float(row[1])))
    pts.sort()
    ns = np.array([p[0] for p in pts], dtype=np.float64)
    ests = np.array([p[1] for p in pts], dtype=np.float64)
    return ns, ests


def fit_scaling(rows) -> FitResult:
    """Least squares of log(estimate) on log(N) and on log(log(N))."""
    ns, ests = _fit_points(rows)
    if ns.size < 4:
        raise ValueError("scaling fits need at least 4 rows")
    if np.any(ests <= 0.0):
        raise ValueError("estimates must be positive to fit in log coordinates")
    if np.any(ns < 2):
        raise ValueError("point sizes must be at least 2")
    y = np.log(ests)
    if float(np.max(y) - np.min(y)) == 0.0:
        return FitResult(0.0, 0.0, 0.0, 0.0, "none", True)
    alpha, _, r2p = _ols(np.log(ns), y)
    beta, _, r2l = _ols(np.log(np.log(ns)), y)
    preferred = "power" if r2p >= r2l else "log-power"
    return FitResult(alpha, r2p, beta, r2l, preferred, False)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a scaling run depends on; hashing the fields pins the
    outputs byte for byte."""

    experiment: str
    grid_period: int = 128
    grid_samples: int = 2**15
    n_list: tuple[int, ...] = (2, 4, 8, 16, 32, 64, 128)
    q: float = 3.0
    r: float = 2.0
    t: float = 3.0
    trials: int = 64
    seed: int = 0
    family: str = "all"
    out_dir: str = "."
    fmt: str = "csv"

    def __post_init__(self):
        ns = tuple(sorted(set(int(n) for n in self.n_list)))
        if not ns:
            raise ValueError("n_list must be nonempty")
        if ns[0] < 2:
            raise ValueError("point sizes start at 2")
        object.__setattr__(self, "n_list", ns)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if ns[-1] * self.grid_period > self.grid_samples // 2:
            raise ValueError("largest N exceeds the separated-frequency budget")
        if self.fmt not in ("csv", "csv+svg"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def grid(self) -> TorusGrid:
        return TorusGrid(period=self.grid_period, samples=self.grid_samples)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    estimate: float
    trials: int
    argmax: str

    def __post_init__(self):
        if self.estimate < 0:
            raise ValueError("estimates are nonnegative by construction")


@dataclass(frozen=True)
class ScalingReport:
    experiment: str
    rows: tuple[ScalingRow, ...]
    fit: FitResult

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if ns != sorted(ns):
            raise ValueError("rows must be sorted by N")


_EXPERIMENTS = {
    "vq-l2-scaling": ("strong", "vq_dk"),
    "weak11-scaling": ("weak", "vq_dk"),
    "rough-mult-scaling": ("weak", "rough_T"),
    "rvar-mult": ("strong", "rvar_M"),
}


def run_suite(config: ExperimentConfig, workers: int = 1) -> ScalingReport:
    """Run one named experiment over the N list and write CSV, fit, SVG
    (if requested), and a manifest into the output directory."""
    if config.experiment not in _EXPERIMENTS:
        raise ValueError(f"unknown experiment id {config.experiment!r}")
    if len(config.n_list) < 4:
        raise ValueError("scaling fits need at least 4 points in n_list")
    kind, op_id = _EXPERIMENTS[config.experiment]
    grid = config.grid()
    rows = []
    for n in config.n_list:
        params = {"grid": grid, "n": n, "q": config.q, "r": config.r}
        if kind == "strong":
            est, desc = _run_trials(
                op_id, params, config.trials, config.seed, config.family, workers, weak=False
            )
        else:
            est, desc = _run_trials(
                op_id, params, config.trials, config.seed, "all", workers, weak=True
            )
        rows.append(ScalingRow(n, est, config.trials, desc))
    if any(r.estimate <= 0.0 for r in rows):
        fit = FitResult(0.0, 0.0, 0.0, 0.0, "none", True)
    else:
        fit = fit_scaling(rows)
    report = ScalingReport(config.experiment, tuple(rows), fit)
    _write_report(config, report)
    return report


def _write_report(config: ExperimentConfig, report: ScalingReport) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    base = os.path.join(config.out_dir, report.experiment)
    lines = ["experiment,n,estimate,trials,argmax"]
    for r in report.rows:
        lines.append(f"{report.experiment},{r.n},{r.estimate:.17g},{r.trials},{r.argmax}")
    with open(base + ".csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    f = report.fit
    with open(base + "_fit.csv", "w") as fh:
        fh.write("alpha,r2_power,beta,r2_log,preferred,degenerate\n")
        fh.write(
            f"{f.alpha:.17g},{f.r2_power:.17g},{f.beta:.17g},{f.r2_log:.17g},"
            f"{f.preferred},{int(f.degenerate)}\n"
        )
    write_manifest(config.out_dir, _config_pairs(config))
    if config.fmt == "csv+svg":
        scaling_svg(report, base + ".svg")


def _config_pairs(config: ExperimentConfig) -> list[tuple[str, str]]:
    pairs = [
        ("experiment", config.experiment),
        ("grid_period", str(config.grid_period)),
        ("grid_samples", str(config.grid_samples)),
        ("n_list", ",".join(str(n) for n in config.n_list)),
        ("q", f"{config.q:.17g}"),
        ("r", f"{config.r:.17g}"),
        ("t", f"{config.t:.17g}"),
        ("trials", str(config.trials)),
        ("seed", str(config.seed)),
        ("family", config.family),
        ("format", config.fmt),
        ("trial_seed_scheme", "SeedSequence([seed, n, 1, trial])"),
    ]
    return pairs


def write_manifest(out_dir: str, pairs: Sequence[tuple[str, str]]) -> None:
    """Config echo plus library versions; no timestamps, so reruns of the
    same configuration produce identical bytes."""
    try:
        from importlib.metadata import version

        pkg_version = version("multifreq")
    except Exception:
        pkg_version = "unknown"
    lines = [f"{k}={v}" for k, v in pairs]
    lines.append(f"package_version={pkg_version}")
    lines.append(f"numpy_version={np.__version__}")
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def scaling_svg(report: ScalingReport, path: str) -> None:
    """Log-log scatter of the estimates with both fitted curves."""
    pts = [(r.n, r.estimate) for r in report.rows if r.estimate > 0]
    width, height = 640, 480
    left, right, top, bottom = 70, 20, 20, 50
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if len(pts) < 2:
        parts.append(
            f'<text x="{width // 2}" y="{height // 2}" text-anchor="middle" '
            f'font-family="sans-serif">not enough positive data</text></svg>'
        )
        with open(path, "w") as fh:
            fh.write("\n".join(parts) + "\n")
        return
    xs = np.log([p[0] for p in pts])
    ys = np.log([p[1] for p in pts])
    ns_dense = np.geomspace(pts[0][0], pts[-1][0], 64)
    curves = []
    if not report.fit.degenerate:
        a1, b1, _ = _ols(np.log([p[0] for p in pts]), ys)
        curves.append(("#d62728", "power", np.log(ns_dense), a1 * np.log(ns_dense) + b1))
        a2, b2, _ = _ols(np.log(np.log([p[0] for p in pts])), ys)
        curves.append(
            ("#2ca02c", "log-power", np.log(ns_dense), a2 * np.log(np.log(ns_dense)) + b2)
        )
    ally = np.concatenate([ys] + [c[3] for c in curves]) if curves else ys
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ally.min()), float(ally.max())
    if ymax == ymin:
        ymax = ymin + 1.0
    xpad = 0.05 * (xmax - xmin)
    ypad = 0.05 * (ymax - ymin)
    xmin -= xpad
    xmax += xpad
    ymin -= ypad
    ymax += ypad

    def sx(v):
        return left + (v - xmin) / (xmax - xmin) * (width - left - right)

    def sy(v):
        return height - bottom - (v - ymin) / (ymax - ymin) * (height - top - bottom)

    parts.append(
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
        f'y2="{height - bottom}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>'
    )
    for n, est in pts:
        px = sx(np.log(n))
        parts.append(
            f'<line x1="{px:.2f}" y1="{height - bottom}" x2="{px:.2f}" '
            f'y2="{height - bottom + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{height - bottom + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{n}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        vy = ymin + frac * (ymax - ymin)
        py = sy(vy)
        parts.append(
            f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{np.exp(vy):.3g}</text>'
        )
    for color, label, cx, cy in curves:
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(cx, cy))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
    for n, est in pts:
        parts.append(
            f'<circle cx="{sx(np.log(n)):.2f}" cy="{sy(np.log(est)):.2f}" r="4" '
            f'fill="#1f77b4"/>'
        )
    f = report.fit
    legend = (
        f"power alpha={f.alpha:.3f} R2={f.r2_power:.3f}; "
        f"log-power beta={f.beta:.3f} R2={f.r2_log:.3f}; preferred {f.preferred}"
    )
    parts.append(
        f'<text x="{left + 10}" y="{top + 15}" font-family="sans-serif" '
        f'font-size="12">{report.experiment}: {legend}</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
