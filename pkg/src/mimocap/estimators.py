"""Monte Carlo estimation: ergodic means, outage quantiles, SNR sweeps.

Determinism contract.  Trial t of a run with seed s always draws from the
Philox stream (s, t), and sweep work is split into fixed-size chunks of
CHUNK_TRIALS trials whose boundaries do not depend on the worker count.
Per-trial values are assembled in trial order before any reduction, and
every reduction runs once in the parent process, so a sweep produces
byte-identical tables for any --workers value.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .capacity import SnrSpec, asymptotic_large_tx, low_snr_capacity
from .channels import AntennaConfig, CorrelationProfile, RngStream, correlation_roots
from .errors import EmptyDistributionError

_LN2 = math.log(2.0)
# trials per work unit; fixed so results do not depend on the pool size
CHUNK_TRIALS = 1024

ESTIMATOR_KINDS = ("ergodic", "outage", "waterfill-compare", "asymptotic")

_COLUMNS = {
    "ergodic": ("snr_db", "mean_bps_hz", "std_error", "trials"),
    "outage": ("snr_db", "mean_bps_hz", "std_error", "trials", "outage_pct", "outage_bps_hz"),
    "waterfill-compare": (
        "snr_db",
        "mean_bps_hz",
        "std_error",
        "trials",
        "csit_mean_bps_hz",
        "csit_std_error",
        "gap_bps_hz",
    ),
    "asymptotic": ("snr_db", "mean_bps_hz", "std_error", "trials", "low_snr_bps_hz"),
}


@dataclass(frozen=True)
class CapacityEstimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    std_error: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("an estimate needs at least one trial")
        if not self.std_error >= 0.0:
            raise ValueError("std_error must be >= 0, got %r" % (self.std_error,))


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted capacity samples; build through from_samples."""

    samples: np.ndarray

    @classmethod
    def from_samples(cls, values):
        arr = np.asarray(values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise EmptyDistributionError("no capacity samples to form a distribution")
        return cls(samples=np.sort(arr))

    @property
    def count(self):
        return int(self.samples.shape[0])


@dataclass(frozen=True)
class SweepConfig:
    """One CLI-level run: an SNR grid plus everything needed per point.

    profile None means a flat i.i.d. channel; a CorrelationProfile selects
    the multitap channel evaluated over n_tones subcarriers.
    """

    antenna: AntennaConfig
    snr_start_db: float
    snr_stop_db: float
    snr_step_db: float
    trials: int = 10000
    seed: int = 42
    estimator: str = "ergodic"
    profile: CorrelationProfile = None
    n_tones: int = 1
    outage_percent: float = 10.0
    workers: int = 1

    def __post_init__(self):
        if self.estimator not in ESTIMATOR_KINDS:
            raise ValueError("unknown estimator %r" % (self.estimator,))
        if self.snr_step_db <= 0.0:
            raise ValueError("snr_step_db must be > 0, got %r" % (self.snr_step_db,))
        if self.snr_stop_db < self.snr_start_db:
            raise ValueError("snr_stop_db must be >= snr_start_db")
        if self.trials < 1:
            raise ValueError("trials must be >= 1, got %d" % (self.trials,))
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_tones < 1:
            raise ValueError("n_tones must be >= 1, got %d" % (self.n_tones,))
        if not 0.0 < self.outage_percent < 100.0:
            raise ValueError(
                "outage percent must lie in (0, 100), got %r" % (self.outage_percent,)
            )
        if self.workers < 1:
            raise ValueError("workers must be >= 1, got %d" % (self.workers,))
        if self.profile is None and self.n_tones != 1:
            raise ValueError("a multitone run needs a correlation profile")
        if self.estimator == "asymptotic" and self.profile is None:
            raise ValueError("the asymptotic formulas need a correlation profile")
        if self.estimator in ("outage", "waterfill-compare") and self.profile is not None:
            raise ValueError("%s runs use the flat channel only" % (self.estimator,))


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Column names plus one tuple per SNR point."""

    columns: tuple
    rows: tuple

    def to_csv(self):
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def _format_cell(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % (value,)


def _estimate_from(values):
    n = int(values.shape[0])
    mean = float(np.mean(values))
    if n == 1:
        std_error = math.inf
    else:
        std_error = float(np.std(values, ddof=1) / math.sqrt(n))
    return CapacityEstimate(mean=mean, std_error=std_error, trials=n)


def ergodic_estimate(sampler, evaluator, trials, seed, first_stream=0):
    """Mean of evaluator(sampler(stream)) over independent trial streams.

    Trial t draws from stream (seed, first_stream + t), so any subset of
    trials can be reproduced in isolation and half-runs with shifted
    first_stream tile a full run exactly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1, got %d" % (trials,))
    values = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        stream = RngStream(seed=seed, stream_id=first_stream + t)
        values[t] = evaluator(sampler(stream))
    return _estimate_from(values)


def collect_distribution(sampler, evaluator, trials, seed, first_stream=0):
    """Sorted empirical distribution of evaluator over trial streams."""
    if trials < 1:
        raise ValueError("trials must be >= 1, got %d" % (trials,))
    values = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        stream = RngStream(seed=seed, stream_id=first_stream + t)
        values[t] = evaluator(sampler(stream))
    return EmpiricalDistribution.from_samples(values)


def outage_capacity(dist, x_percent):
    """Empirical x% outage rate: the k-th smallest sample, k = ceil(x/100 * n).

    Lower order statistic, no interpolation; the rate returned is achieved
    or exceeded in at least (100 - x)% of the realizations.
    """
    if not 0.0 < x_percent < 100.0:
        raise ValueError("outage percent must lie in (0, 100), got %r" % (x_percent,))
    if dist.count < 1:
        raise EmptyDistributionError("outage of an empty distribution")
    # multiply before dividing and shave an epsilon so representable
    # percents (10% of 100 samples) land on the intended order statistic
    k = math.ceil(x_percent * dist.count / 100.0 - 1e-9)
    k = min(max(k, 1), dist.count)
    return float(dist.samples[k - 1])


def snr_grid(start_db, stop_db, step_db):
    """Inclusive dB grid start, start+step, ... up to stop (with float slack)."""
    if step_db <= 0.0:
        raise ValueError("step must be > 0, got %r" % (step_db,))
    if stop_db < start_db:
        raise ValueError("stop must be >= start")
    n = int(math.floor((stop_db - start_db) / step_db + 1e-9)) + 1
    return [start_db + i * step_db for i in range(n)]


def _chunk_bounds(trials):
    bounds = []
    start = 0
    while start < trials:
        count = min(CHUNK_TRIALS, trials - start)
        bounds.append((start, count))
        start += count
    return bounds


def _csit_capacity_batch(h, total_power, sigma_n2):
    """Water-filled capacity per realization, vectorized over the batch.

    Uses the closed form powers_i = max(0, mu - sigma_n2/lambda_i): the
    level mu at the largest feasible active-set size already clears every
    smaller floor and sits at or below every larger one, so the clamp
    reproduces the exact active-set solution without a per-row loop.
    """
    g = h @ np.conj(np.swapaxes(h, -1, -2))
    vals = np.maximum(np.linalg.eigvalsh(g)[..., ::-1], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = sigma_n2 / vals
        prefix = np.cumsum(inv, axis=-1)
        sizes = np.arange(1, vals.shape[-1] + 1, dtype=np.float64)
        levels = (total_power + prefix) / sizes
        feasible = levels > inv
        nonzero = feasible.any(axis=-1)
        last = feasible.shape[-1] - 1 - np.argmax(feasible[..., ::-1], axis=-1)
        level = levels[np.arange(vals.shape[0]), last]
        powers = np.maximum(level[:, np.newaxis] - inv, 0.0)
        caps = np.sum(np.log1p(powers * vals / sigma_n2), axis=-1) / _LN2
    return np.where(nonzero, caps, 0.0)


def _eval_chunk(cfg, snr_db, start_trial, count):
    """Per-trial capacities for trials [start_trial, start_trial + count).

    Pure function of its arguments, safe to run in any process; trial t
    draws from stream (cfg.seed, t) regardless of chunking.
    """
    rho = SnrSpec(snr_db).rho
    n_tx = cfg.antenna.tx
    n_rx = cfg.antenna.rx
    scale = rho / n_tx
    if cfg.profile is not None:
        n_taps = cfg.profile.n_taps
        white = _kernels.sample_cgauss_batch(cfg.seed, start_trial, count, n_taps * n_rx * n_tx)
        white = white.reshape(count, n_taps, n_rx, n_tx)
        if cfg.profile.kind == "uncorrelated":
            root_p = np.sqrt(np.asarray(cfg.profile.tap_powers, dtype=np.float64))
            taps = root_p[:, np.newaxis, np.newaxis] * white
        else:
            taps = correlation_roots(cfg.profile, cfg.antenna) @ white
        return _kernels.ofdm_capacity_batch(taps, cfg.n_tones, scale)
    h = _kernels.sample_cgauss_batch(cfg.seed, start_trial, count, n_rx * n_tx)
    h = h.reshape(count, n_rx, n_tx)
    if cfg.estimator == "waterfill-compare":
        uniform = _kernels.capacity_uniform_batch(h, scale)
        csit = _csit_capacity_batch(h, total_power=rho, sigma_n2=1.0)
        return np.stack([uniform, csit])
    return _kernels.capacity_uniform_batch(h, scale)


def _reduce_point(cfg, snr_db, values):
    if cfg.estimator == "waterfill-compare":
        uniform = _estimate_from(values[0])
        csit = _estimate_from(values[1])
        return (
            snr_db,
            uniform.mean,
            uniform.std_error,
            uniform.trials,
            csit.mean,
            csit.std_error,
            csit.mean - uniform.mean,
        )
    est = _estimate_from(values)
    if cfg.estimator == "outage":
        dist = EmpiricalDistribution.from_samples(values)
        rate = outage_capacity(dist, cfg.outage_percent)
        return (snr_db, est.mean, est.std_error, est.trials, cfg.outage_percent, rate)
    return (snr_db, est.mean, est.std_error, est.trials)


def snr_sweep(cfg):
    """One table row per SNR grid point, deterministic for any worker count."""
    points = snr_grid(cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db)
    if cfg.estimator == "asymptotic":
        rows = []
        for snr_db in points:
            rho_bar = SnrSpec(snr_db).rho
            mean = asymptotic_large_tx(cfg.profile, cfg.antenna.rx, rho_bar)
            low = low_snr_capacity(cfg.profile, cfg.antenna.rx, rho_bar)
            rows.append((snr_db, mean, 0.0, 0, low))
        return SweepTable(columns=_COLUMNS["asymptotic"], rows=tuple(rows))
    chunks = _chunk_bounds(cfg.trials)
    work = [
        (cfg, snr_db, start, count)
        for snr_db in points
        for (start, count) in chunks
    ]
    if cfg.workers > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_eval_chunk, *zip(*work)))
    else:
        parts = [_eval_chunk(*item) for item in work]
    rows = []
    per_point = len(chunks)
    for i, snr_db in enumerate(points):
        values = np.concatenate(parts[i * per_point:(i + 1) * per_point], axis=-1)
        rows.append(_reduce_point(cfg, snr_db, values))
    return SweepTable(columns=_COLUMNS[cfg.estimator], rows=tuple(rows))
