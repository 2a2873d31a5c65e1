"""
Ensemble averages of the two-photon density over Gaussian-distributed emitter detunings.

Every sample draws from its own generator seeded by (seed, sample_index), so a sample does not
depend on which worker computed it or in which order. The reduction runs over the index-ordered
stack of densities.
"""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import median_abs_deviation

from chiral.config.const import (
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_DISORDER_SAMPLES,
    DEFAULT_LOG_LEVEL,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    RESAMPLE_LIMIT,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import InvalidParameter, ResampleLimitExceeded
from chiral.model import EmitterArray, GaussianPacket2, Grid, min_pairwise_gap
from chiral.two_photon import two_photon_out
from chiral.utils.dev_utils import measure_time

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


@dataclass(frozen=True)
class DisorderConfig:
    """
    Attributes:
        M: number of emitters.
        Sigma: standard deviation of the detuning distribution (units of κ).
        delta: carrier detuning from the distribution mean.
        sigma: relative-coordinate width of the incoming pair.
        n_samples: ensemble size.
        seed: nonnegative 64-bit seed.
        grid: relative-coordinate grid.
        constrain_mean: shift every sample so that its detunings sum to zero.
        workers: threads used to evaluate samples.
    """

    M: int
    Sigma: float
    delta: float
    sigma: float
    grid: Grid
    n_samples: int = DEFAULT_DISORDER_SAMPLES
    seed: int = DEFAULT_SEED
    constrain_mean: bool = False
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameter(f"M must be a positive integer, got {self.M}")
        if not self.Sigma >= 0 or not math.isfinite(self.Sigma):
            raise InvalidParameter(f"Sigma must be nonnegative, got {self.Sigma}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidParameter(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter(f"seed must be a nonnegative 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise InvalidParameter(f"workers must be >= 1, got {self.workers}")

    @property
    def packet(self) -> GaussianPacket2:
        return GaussianPacket2(self.delta, self.sigma)


@dataclass(frozen=True)
class EnsembleStats:
    grid: Grid
    mean_density: np.ndarray = field(repr=False)
    median_abs_dev: np.ndarray = field(repr=False)
    mean_abs_dev: np.ndarray = field(repr=False)
    # Standard error of mean_density, std/√n (zero for a single sample)
    std_error: np.ndarray = field(repr=False)
    n_samples_used: int = 0
    n_resampled: int = 0
    seed: int = DEFAULT_SEED


def _draw(config: DisorderConfig, sample_index):
    """Returns the detunings of one sample and the number of rejected draws."""
    if config.Sigma == 0:
        return EmitterArray((0.0,) * config.M, degeneracy_tol=config.degeneracy_tol), 0
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, sample_index]))
    rejected = 0
    while True:
        detunings = rng.normal(0.0, config.Sigma, config.M)
        if config.constrain_mean:
            detunings = detunings - detunings.mean()
        emitters = EmitterArray(tuple(detunings), degeneracy_tol=config.degeneracy_tol)
        if min_pairwise_gap(emitters) >= config.degeneracy_tol:
            return emitters, rejected
        rejected += 1
        logger.warning(
            "Rejected near-degenerate draw: sample_index=%d, rejected=%d", sample_index, rejected
        )
        if rejected >= RESAMPLE_LIMIT:
            raise ResampleLimitExceeded(
                f"Sample {sample_index} was rejected {rejected} times in a row; "
                f"Sigma={config.Sigma} is too small for degeneracy_tol={config.degeneracy_tol}"
            )


def sample_detunings(config: DisorderConfig, sample_index) -> EmitterArray:
    """
    Independent Normal(0, Σ) detunings for one ensemble member, a deterministic function of
    (seed, sample_index). Draws with two detunings closer than the degeneracy tolerance are redrawn.
    """
    return _draw(config, sample_index)[0]


def _sample_density(config: DisorderConfig, sample_index):
    emitters, rejected = _draw(config, sample_index)
    # The carrier is referenced to the distribution mean, not to each sample's mean
    result = two_photon_out(config.packet, emitters, config.grid, carrier_reference=0.0)
    return result.density, rejected


@measure_time
def ensemble_average(config: DisorderConfig) -> EnsembleStats:
    """
    Mean two-photon density over the ensemble with its median and mean absolute deviations.
    Σ = 0 gives the deterministic degenerate result with zero deviation bands.
    """
    logger.info(
        "Ensemble average: M=%d, Sigma=%s, delta=%s, sigma=%s, n_samples=%d, seed=%d, workers=%d",
        config.M, config.Sigma, config.delta, config.sigma, config.n_samples, config.seed,
        config.workers,
    )
    zeros = np.zeros(config.grid.n_points)
    if config.Sigma == 0:
        density, _ = _sample_density(config, 0)
        return EnsembleStats(
            config.grid, np.array(density), zeros, zeros.copy(), zeros.copy(),
            config.n_samples, 0, config.seed,
        )

    indices = range(config.n_samples)
    if config.workers == 1:
        samples = [_sample_density(config, index) for index in indices]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            samples = list(executor.map(lambda index: _sample_density(config, index), indices))

    densities = np.stack([density for density, _ in samples])
    n_resampled = sum(rejected for _, rejected in samples)
    mean_density = densities.mean(axis=0)
    if config.n_samples > 1:
        std_error = densities.std(axis=0, ddof=1) / math.sqrt(config.n_samples)
    else:
        std_error = zeros
    logger.info(
        "Ensemble done: n_samples=%d, n_resampled=%d, mean_density(0)=%.6g",
        config.n_samples, n_resampled, mean_density[config.grid.n_points // 2],
    )
    return EnsembleStats(
        config.grid,
        mean_density,
        median_abs_deviation(densities, axis=0),
        np.mean(np.abs(densities - mean_density), axis=0),
        std_error,
        config.n_samples,
        n_resampled,
        config.seed,
    )
