"""Stochastic gated-detection simulator of the multimode twin-beam source.

Per gate, every retained Schmidt mode k contributes a photon-pair number
drawn from the thermal (geometric) distribution with mean sinh^2(B lam_k);
the two arms share the pair number exactly.  Each arm is thinned binomially
by its end-to-end transmission and hits a threshold (click/no-click)
detector, with an independent per-gate dark firing probability.  Because the
detectors resolve no photon numbers, only the per-gate pair total matters,
which allows an exact negative-binomial shortcut when all mode means are
equal.

Gates are simulated in independent batches, each owning a counter-based RNG
stream keyed by (seed, batch index), so runs are bit-exact regardless of how
many worker threads execute them.  Set TWINPDC_THREADS to parallelize.
"""
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .schmidt import SchmidtData
from .twinstats import (CountRecord, DetectionSpec, klyshko, mean_n_from_cross)

DEFAULT_BATCH_GATES = 1_000_000
SPECTRUM_TRUNCATION_WEIGHT = 1e-4
SATURATION_MEAN = 0.9


def equal_mode_spectrum(n_modes: int) -> np.ndarray:
    """Flat Schmidt spectrum of n_modes equal weights (effective K = n_modes)."""
    if n_modes < 1:
        raise ConfigError("need at least one mode")
    return np.full(n_modes, 1.0 / math.sqrt(n_modes))


@dataclass(frozen=True)
class SimConfig:
    """Simulation input: source spectrum, gain, detection and gating.

    source may be a SchmidtData or a bare array of Schmidt coefficients.
    The gate rate is laser_rep_hz / gate_divisor and must match det.gate_rate.
    """

    source: object
    gain: float
    det: DetectionSpec
    n_gates: int
    seed: int
    laser_rep_hz: float = 76.2e6
    gate_divisor: int = 64
    batch_gates: int = DEFAULT_BATCH_GATES

    def __post_init__(self):
        if self.n_gates <= 0:
            raise ConfigError("n_gates must be positive")
        if self.gate_divisor < 1:
            raise ConfigError("gate divisor must be >= 1")
        if self.batch_gates < 1:
            raise ConfigError("batch_gates must be >= 1")
        if abs(self.det.gate_rate - self.gate_rate) > 1e-6 * self.gate_rate:
            raise ConfigError(
                f"det.gate_rate {self.det.gate_rate:g} Hz inconsistent with "
                f"laser_rep_hz/gate_divisor = {self.gate_rate:g} Hz"
            )

    @property
    def gate_rate(self) -> float:
        return self.laser_rep_hz / self.gate_divisor

    @property
    def coefficients(self) -> np.ndarray:
        if isinstance(self.source, SchmidtData):
            return self.source.coefficients
        return np.asarray(self.source, dtype=float)


def mode_means(cfg: SimConfig) -> np.ndarray:
    """Per-mode thermal pair means, truncated to cover all but 1e-4 of the weight."""
    lam = np.sort(cfg.coefficients)[::-1]
    weights = lam**2
    weights = weights / weights.sum()
    keep = int(np.searchsorted(np.cumsum(weights), 1.0 - SPECTRUM_TRUNCATION_WEIGHT) + 1)
    lam = lam[:min(keep, len(lam))]
    return np.sinh(cfg.gain * lam) ** 2


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    """Counter-based stream for one gate batch; fixed by (seed, batch) alone."""
    key = np.array([seed % 2**64, batch], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_pair_totals(rng, means, size):
    """Per-gate pair totals summed over modes.

    Equal mode means allow a single negative-binomial draw (the exact
    distribution of a sum of iid geometric variables); otherwise the modes
    are sampled one by one.
    """
    if np.all(means == means[0]):
        return rng.negative_binomial(len(means), 1.0 / (1.0 + means[0]), size=size)
    total = np.zeros(size, dtype=np.int64)
    for m in means:
        # geometric on {1, 2, ...} shifted down gives the thermal distribution
        total += rng.geometric(1.0 / (1.0 + m), size=size) - 1
    return total


def _simulate_batch(seed, batch, size, means, det: DetectionSpec):
    rng = _batch_rng(seed, batch)
    totals = _draw_pair_totals(rng, means, size)
    p_quiet_s = (1.0 - det.eta1) ** totals * (1.0 - det.dark_prob1)
    p_quiet_i = (1.0 - det.eta2) ** totals * (1.0 - det.dark_prob2)
    click_s = rng.random(size) >= p_quiet_s
    click_i = rng.random(size) >= p_quiet_i
    return int(click_s.sum()), int(click_i.sum()), int((click_s & click_i).sum())


def simulate(cfg: SimConfig) -> CountRecord:
    """Run the gated simulation and accumulate a CountRecord.

    Warns when the strongest mode exceeds a per-gate mean of 0.9 pairs, where
    click saturation invalidates the low-gain estimator checks.
    """
    means = mode_means(cfg)
    if means.size and means.max() > SATURATION_MEAN:
        warnings.warn(
            f"strongest mode mean {means.max():.2f} > {SATURATION_MEAN}: "
            "click detectors saturate, low-gain estimators will be biased",
            stacklevel=2,
        )
    batches = []
    start = 0
    index = 0
    while start < cfg.n_gates:
        size = min(cfg.batch_gates, cfg.n_gates - start)
        batches.append((index, size))
        start += size
        index += 1
    workers = int(os.environ.get("TWINPDC_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda b: _simulate_batch(cfg.seed, b[0], b[1], means, cfg.det),
                batches))
    else:
        parts = [_simulate_batch(cfg.seed, b, size, means, cfg.det)
                 for b, size in batches]
    s_s = sum(p[0] for p in parts)
    s_i = sum(p[1] for p in parts)
    c = sum(p[2] for p in parts)
    return CountRecord(gates=cfg.n_gates, singles_signal=s_s, singles_idler=s_i,
                       coincidences=c, gate_rate=cfg.gate_rate)


def exact_click_probabilities(lambdas, gain, det: DetectionSpec):
    """Closed-form per-gate click probabilities (p_signal, p_idler, p_coincidence).

    For thermal pair number n_k of mean m_k shared by the arms, the no-click
    generating function gives E[x^n_k] = 1 / (1 + m_k (1 - x)) per mode, so
    the exact threshold-detector probabilities follow from products over
    modes.  Serves as an independent check on the sampling paths.
    """
    m = np.sinh(gain * np.asarray(lambdas, dtype=float)) ** 2
    quiet_s = np.prod(1.0 / (1.0 + m * det.eta1)) * (1.0 - det.dark_prob1)
    quiet_i = np.prod(1.0 / (1.0 + m * det.eta2)) * (1.0 - det.dark_prob2)
    both = det.eta1 + det.eta2 - det.eta1 * det.eta2
    quiet_both = np.prod(1.0 / (1.0 + m * both)) * (1.0 - det.dark_prob1) * (1.0 - det.dark_prob2)
    return (1.0 - quiet_s, 1.0 - quiet_i, 1.0 - quiet_s - quiet_i + quiet_both)


@dataclass(frozen=True)
class SweepPoint:
    """One pump power in an efficiency sweep.

    eta_signal_est = C / S_i and eta_idler_est = C / S_s are the raw Klyshko
    ratios; the corrected variants subtract the expected accidentals from C
    before dividing, which makes them decrease with power while the raw
    ratios creep up with the multi-photon contribution.  Both extrapolate to
    the configured transmissions at zero power.
    """

    power: float
    gain: float
    record: CountRecord
    eta_signal_est: float
    eta_idler_est: float
    sigma_signal: float
    sigma_idler: float
    corrected_signal: float
    corrected_idler: float
    mean_n_est: float
    mean_n_sigma: float


def efficiency_sweep(cfg: SimConfig, pump_powers, power_coefficient=1.0):
    """Simulate a pump-power sweep; gain scales as sqrt(coefficient * power).

    Each point runs cfg.n_gates gates on a decorrelated stream derived from
    cfg.seed and the point index.
    """
    points = []
    for idx, power in enumerate(pump_powers):
        if power <= 0:
            raise ConfigError("pump powers must be positive")
        gain = math.sqrt(power_coefficient * power)
        seed = (cfg.seed + (idx + 1) * 0x9E3779B97F4A7C15) % 2**64
        point_cfg = SimConfig(source=cfg.source, gain=gain, det=cfg.det,
                              n_gates=cfg.n_gates, seed=seed,
                              laser_rep_hz=cfg.laser_rep_hz,
                              gate_divisor=cfg.gate_divisor,
                              batch_gates=cfg.batch_gates)
        rec = simulate(point_cfg)
        kly = klyshko(rec)
        n_est = mean_n_from_cross(rec)
        acc = rec.accidentals
        points.append(SweepPoint(
            power=power, gain=gain, record=rec,
            eta_signal_est=kly.eta_signal, eta_idler_est=kly.eta_idler,
            sigma_signal=kly.sigma_signal, sigma_idler=kly.sigma_idler,
            corrected_signal=(rec.coincidences - acc) / rec.singles_idler,
            corrected_idler=(rec.coincidences - acc) / rec.singles_signal,
            mean_n_est=n_est.mean_n, mean_n_sigma=n_est.sigma,
        ))
    return points


def extrapolate_zero_power(powers, values, sigmas):
    """Weighted linear fit of values against power, evaluated at zero.

    Returns:
        (intercept, intercept standard error, slope)
    """
    x = np.asarray(powers, dtype=float)
    y = np.asarray(values, dtype=float)
    w = 1.0 / np.asarray(sigmas, dtype=float) ** 2
    sw, swx, swy = w.sum(), (w * x).sum(), (w * y).sum()
    swxx, swxy = (w * x * x).sum(), (w * x * y).sum()
    delta = sw * swxx - swx**2
    intercept = (swxx * swy - swx * swxy) / delta
    slope = (sw * swxy - swx * swy) / delta
    return intercept, math.sqrt(swxx / delta), slope
