"""Monte-Carlo sweeps: received SNR, miss detection, and outage probability.

Determinism contract: every result is a pure function of (config, seed).
Trials are processed in fixed-size chunks whose random streams derive from
(master seed, stream id, point index, chunk index), and chunk statistics
are reduced in chunk order, so the output is bit-identical for any worker
count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ris_partition.channel import (
    CorrelationMatrix,
    RisGeometry,
    correlation_matrix,
    dbm_to_watts,
    element_positions,
    path_gain,
)
from ris_partition.signals import PsrpPattern
from ris_partition.theory import (
    InversionSettings,
    moments_sorted,
    moments_unsorted,
    outage_theoretical,
)

MODES = ("sorted", "unsorted")

# stream identifiers keep the three sweeps statistically independent
_STREAM_OUTAGE = 1
_STREAM_SNR = 2
_STREAM_PMISS = 3

_Z95 = 1.959963984540054


def geometry_for(n: int, spacing: float, carrier_frequency: float) -> RisGeometry:
    """Near-square rows x cols grid with rows * cols = n."""
    rows = int(np.sqrt(n))
    while rows > 1 and n % rows != 0:
        rows -= 1
    return RisGeometry(rows=rows, cols=n // rows, spacing=spacing,
                       carrier_frequency=carrier_frequency)


@dataclass(frozen=True)
class SweepConfig:
    """Experiment definition shared by all sweeps."""

    n: int = 64
    n_id: int | None = None  # defaults to n // 2
    spacing: float = 0.25  # element pitch in wavelengths
    carrier_frequency: float = 1.8e9
    iid_channels: bool = False  # True bypasses the spatial correlation model
    noise_dbm: float = -130.0
    d_tx_ris: float = 300.0
    d_ris_ue1: float = 100.0
    d_ris_ue2: float = 100.0
    path_loss_exponent: float = 2.2
    pt_dbm_grid: tuple[float, ...] = tuple(np.arange(-10.0, 45.1, 2.5))
    sinr_threshold: float = 0.15
    trials: int = 10_000
    seed: int = 12345
    rbar_grid: tuple[float, ...] = tuple(np.round(np.arange(0.0, 1.001, 0.05), 3))
    psrp_length: int = 32
    pattern_seed: int = 0
    pmiss_pt_dbm: float = 30.0
    pmiss_n_values: tuple[int, ...] = (64, 128, 256)
    chunk_trials: int = 20_000
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.pt_dbm_grid:
            raise ValueError("pt_dbm_grid must be non-empty")
        if self.sinr_threshold <= 0:
            raise ValueError("sinr_threshold must be positive")
        if self.psrp_length < 2:
            raise ValueError("psrp_length must be >= 2")
        n_id = self.n // 2 if self.n_id is None else self.n_id
        if not 0 <= n_id <= self.n:
            raise ValueError(f"n_id must lie in [0, {self.n}]")
        object.__setattr__(self, "n_id", n_id)

    def betas(self) -> tuple[float, float, float]:
        """(beta_v, beta_g, beta_h) linear path gains."""
        return (
            path_gain(self.d_ris_ue1, self.path_loss_exponent, self.carrier_frequency),
            path_gain(self.d_tx_ris, self.path_loss_exponent, self.carrier_frequency),
            path_gain(self.d_ris_ue2, self.path_loss_exponent, self.carrier_frequency),
        )

    def correlation_factor(self, n: int) -> np.ndarray | None:
        """Symmetric square root of the spatial correlation matrix, or None for i.i.d."""
        if self.iid_channels:
            return None
        geometry = geometry_for(n, self.spacing, self.carrier_frequency)
        corr = correlation_matrix(element_positions(geometry), geometry.wavelength)
        return corr.factor()

    def noise_watts(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    def pattern(self) -> PsrpPattern:
        return PsrpPattern.broadcast(self.psrp_length, self.n_id, self.pattern_seed)


@dataclass
class CurveResult:
    """One estimated curve with 95% confidence half-widths."""

    x_values: np.ndarray
    estimates: np.ndarray
    ci_half_widths: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values, dtype=float)
        self.estimates = np.asarray(self.estimates, dtype=float)
        self.ci_half_widths = np.asarray(self.ci_half_widths, dtype=float)
        if np.any(self.ci_half_widths < 0):
            raise ValueError("confidence half-widths must be nonnegative")


def _binomial_half_width(events: np.ndarray, trials: int) -> np.ndarray:
    p = np.asarray(events, dtype=float) / trials
    return _Z95 * np.sqrt(p * (1.0 - p) / trials)


def _chunk_sizes(trials: int, chunk_trials: int) -> list[int]:
    full, rest = divmod(trials, chunk_trials)
    return [chunk_trials] * full + ([rest] if rest else [])


def _draw_cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _draw_links(rng, k, n, betas, factor):
    """Channel draws for one chunk: v, g, h with fixed draw order."""
    bv, bg, bh = betas
    out = []
    for beta in (bv, bg, bh):
        z = _draw_cn(rng, (k, n))
        if factor is not None:
            z = z @ factor
        out.append(np.sqrt(beta) * z)
    return out


def _bf_mask(rng, gains, n_bf, mode):
    """Boolean (k, n) mask of beamforming elements for each trial."""
    k, n = gains.shape
    if mode == "sorted":
        order = np.argsort(-gains, axis=1, kind="stable")
    elif mode == "unsorted":
        order = np.argsort(rng.random((k, n)), axis=1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mask = np.zeros((k, n), dtype=bool)
    np.put_along_axis(mask, order[:, :n_bf], True, axis=1)
    return mask


def _aggregate_ab(v, g, h, bf_mask, id_sign):
    """Vectorized A (real) and B (complex) per trial after co-phasing."""
    gains = np.abs(v) * np.abs(g)
    a = np.sum(np.where(bf_mask, gains, 0.0), axis=1)
    vg = v * g
    unit = np.ones_like(vg)
    nz = gains > 0
    unit[nz] = np.conj(vg[nz]) / gains[nz]
    hg = h * g
    b = (
        id_sign * np.sum(np.where(bf_mask, 0.0, vg), axis=1)
        + np.sum(np.where(bf_mask, hg * unit, 0.0), axis=1)
        + id_sign * np.sum(np.where(bf_mask, 0.0, hg), axis=1)
    )
    return a, b


def _outage_chunk(task) -> int:
    (seed, point_idx, chunk_idx, k, mode, n, n_id, betas, factor,
     r, sigma2, pt_watts, id_sign) = task
    rng = np.random.default_rng((seed, _STREAM_OUTAGE, point_idx, chunk_idx))
    v, g, h = _draw_links(rng, k, n, betas, factor)
    mask = _bf_mask(rng, np.abs(v) * np.abs(g), n - n_id, mode)
    a, b = _aggregate_ab(v, g, h, mask, id_sign)
    sinr_ok = a**2 >= r * (np.abs(b) ** 2 + sigma2 / pt_watts)
    return int(k - np.count_nonzero(sinr_ok))


def _snr_chunk(task):
    (seed, point_idx, chunk_idx, k, mode, n, n_id, betas, factor,
     sigma2, pt_watts) = task
    rng = np.random.default_rng((seed, _STREAM_SNR, point_idx, chunk_idx))
    v, g, _h = _draw_links(rng, k, n, betas, factor)
    gains = np.abs(v) * np.abs(g)
    mask = _bf_mask(rng, gains, n - n_id, mode)
    a = np.sum(np.where(mask, gains, 0.0), axis=1)
    valid = a > 0
    snr_db = 10.0 * np.log10(pt_watts * a[valid] ** 2 / sigma2)
    return (float(np.sum(snr_db)), float(np.sum(snr_db**2)), int(valid.sum()))


def _pmiss_chunk(task):
    (seed, point_idx, chunk_idx, k, mode, n, n_id, betas, factor,
     sigma2, pt_watts, signs, rbar_grid) = task
    rng = np.random.default_rng((seed, _STREAM_PMISS, point_idx, chunk_idx))
    v, g, f = _draw_links(rng, k, n, betas, factor)
    mask = _bf_mask(rng, np.abs(v) * np.abs(g), n - n_id, mode)
    s = np.sum(np.where(mask, 0.0, f * f), axis=1)  # sum of f_i^2 over the ID set
    m = signs.size
    y = pt_watts * s[:, None] * signs[None, :] + np.sqrt(sigma2) * _draw_cn(rng, (k, m))
    t = np.abs(y @ signs)
    beta_h = betas[2]
    noise_free_mean = m * pt_watts * beta_h * np.sqrt(np.pi * n_id / 2.0)
    misses = t[:, None] < np.asarray(rbar_grid)[None, :] * noise_free_mean
    return misses.sum(axis=0).astype(np.int64)


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def run_outage_sweep(config: SweepConfig, mode: str) -> CurveResult:
    """Pr(SINR < r) per transmit-power grid point."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    n, n_id = config.n, config.n_id
    betas = config.betas()
    factor = config.correlation_factor(n)
    sigma2 = config.noise_watts()
    id_sign = float(config.pattern().signature()[0]) if n_id else 1.0
    sizes = _chunk_sizes(config.trials, config.chunk_trials)
    tasks = [
        (config.seed, pi, ci, k, mode, n, n_id, betas, factor,
         config.sinr_threshold, sigma2, dbm_to_watts(pt), id_sign)
        for pi, pt in enumerate(config.pt_dbm_grid)
        for ci, k in enumerate(sizes)
    ]
    counts = _run_tasks(_outage_chunk, tasks, config.workers)
    per_point = np.array(counts, dtype=np.int64).reshape(len(config.pt_dbm_grid), len(sizes))
    events = per_point.sum(axis=1)
    return CurveResult(
        x_values=np.array(config.pt_dbm_grid),
        estimates=events / config.trials,
        ci_half_widths=_binomial_half_width(events, config.trials),
        metadata={
            "metric": "outage", "mode": mode, "source": "montecarlo",
            "seed": config.seed, "trials": config.trials,
            "events": events.tolist(), "r": config.sinr_threshold,
        },
    )


def run_snr_sweep(config: SweepConfig, mode: str) -> CurveResult:
    """Mean received beamforming SNR (dB) per transmit-power grid point."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    n, n_id = config.n, config.n_id
    betas = config.betas()
    factor = config.correlation_factor(n)
    sigma2 = config.noise_watts()
    sizes = _chunk_sizes(config.trials, config.chunk_trials)
    tasks = [
        (config.seed, pi, ci, k, mode, n, n_id, betas, factor, sigma2, dbm_to_watts(pt))
        for pi, pt in enumerate(config.pt_dbm_grid)
        for ci, k in enumerate(sizes)
    ]
    stats = _run_tasks(_snr_chunk, tasks, config.workers)
    n_points = len(config.pt_dbm_grid)
    n_chunks = len(sizes)
    means = np.full(n_points, np.nan)
    half = np.zeros(n_points)
    counts = np.zeros(n_points, dtype=np.int64)
    for pi in range(n_points):
        total = totalsq = 0.0
        count = 0
        for ci in range(n_chunks):
            s, sq, c = stats[pi * n_chunks + ci]
            total += s
            totalsq += sq
            count += c
        counts[pi] = count
        if count:
            means[pi] = total / count
            var = max(totalsq / count - means[pi] ** 2, 0.0)
            half[pi] = _Z95 * np.sqrt(var / count)
    return CurveResult(
        x_values=np.array(config.pt_dbm_grid),
        estimates=means,
        ci_half_widths=half,
        metadata={
            "metric": "snr_db", "mode": mode, "source": "montecarlo",
            "seed": config.seed, "trials": config.trials,
            "valid_trials": counts.tolist(),
        },
    )


def run_pmiss_sweep(config: SweepConfig, mode: str, n: int | None = None) -> CurveResult:
    """Miss-detection probability over the normalized-threshold grid."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    n = config.n if n is None else n
    # keep the configured ID-set fraction when sweeping over array sizes
    n_id = int(round(n * config.n_id / config.n))
    betas = config.betas()
    factor = config.correlation_factor(n)
    sigma2 = config.noise_watts()
    pt_watts = dbm_to_watts(config.pmiss_pt_dbm)
    signs = PsrpPattern.broadcast(config.psrp_length, max(n_id, 1), config.pattern_seed).signature()
    # point index encodes (mode, n) so sorted/unsorted draws are independent
    point_idx = n * 2 + (1 if mode == "sorted" else 0)
    sizes = _chunk_sizes(config.trials, config.chunk_trials)
    tasks = [
        (config.seed, point_idx, ci, k, mode, n, n_id, betas, factor,
         sigma2, pt_watts, signs, tuple(config.rbar_grid))
        for ci, k in enumerate(sizes)
    ]
    counts = _run_tasks(_pmiss_chunk, tasks, config.workers)
    events = np.sum(np.stack(counts, axis=0), axis=0)
    return CurveResult(
        x_values=np.array(config.rbar_grid),
        estimates=events / config.trials,
        ci_half_widths=_binomial_half_width(events, config.trials),
        metadata={
            "metric": "pmiss", "mode": mode, "source": "montecarlo",
            "seed": config.seed, "trials": config.trials, "n": n,
            "pt_dbm": config.pmiss_pt_dbm, "events": events.tolist(),
        },
    )


def theory_moments(config: SweepConfig, mode: str, n: int | None = None):
    """Analytical A/B moments for the configured link budget.

    The closed forms assume i.i.d. elements; with spatial correlation
    enabled they are an approximation, which the metadata of
    run_theory_curve records.
    """
    n = config.n if n is None else n
    n_id = config.n_id
    bv, bg, bh = config.betas()
    if mode == "sorted":
        return moments_sorted(n, n_id, bv, bg, bh)
    if mode == "unsorted":
        return moments_unsorted(n, n_id, bv, bg, bh)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def run_theory_curve(
    config: SweepConfig, mode: str, settings: InversionSettings = InversionSettings()
) -> CurveResult:
    """Theoretical outage probability over the transmit-power grid."""
    moments = theory_moments(config, mode)
    sigma2 = config.noise_watts()
    r = config.sinr_threshold
    probs = np.array([
        outage_theoretical(dbm_to_watts(pt), sigma2, r, moments, settings)
        for pt in config.pt_dbm_grid
    ])
    return CurveResult(
        x_values=np.array(config.pt_dbm_grid),
        estimates=probs,
        ci_half_widths=np.zeros_like(probs),
        metadata={
            "metric": "outage", "mode": mode, "source": "theory",
            "r": r, "iid_assumed": True,
            "correlation_ignored": not config.iid_channels,
        },
    )


def reproduce(config: SweepConfig) -> dict:
    """All three sweeps in both modes plus the theoretical outage curves."""
    dataset = {}
    for mode in MODES:
        dataset[("snr", mode)] = run_snr_sweep(config, mode)
        dataset[("outage", mode)] = run_outage_sweep(config, mode)
        dataset[("outage_theory", mode)] = run_theory_curve(config, mode)
        for n in config.pmiss_n_values:
            dataset[("pmiss", mode, n)] = run_pmiss_sweep(config, mode, n=n)
    return dataset


def with_overrides(config: SweepConfig, **kwargs) -> SweepConfig:
    return replace(config, **kwargs)
