"""
Domain types shared by all scattering modules: the emitter array, the incoming wave packets,
coordinate grids and sampled wavefunctions.

All quantities are expressed in units of the coupling κ: frequencies as multiples of κ, lengths
as multiples of 1/κ. The emitter couplings are kept explicit so that a uniform κ different from 1
can be used, and UnitScale converts to physical units at the I/O boundary.
"""

import logging
import math

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from chiral.config.const import DEFAULT_DEGENERACY_TOL, DEFAULT_LOG_LEVEL, INFINITE
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import InvalidParameter, MixedDegeneracy, NonuniformCoupling

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


@dataclass(frozen=True)
class EmitterArray:
    """
    The M two-level emitters side-coupled to the chiral channel. Emitter positions never enter any
    observable, so they are not represented.

    Attributes:
        detunings: transition frequencies Δ_a.
        couplings: coupling constants κ_a, all 1.0 when omitted.
        degeneracy_tol: gap below which two detunings count as equal.
    """

    detunings: Tuple[float, ...] = ()
    couplings: Tuple[float, ...] = None
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL

    def __post_init__(self):
        detunings = tuple(float(value) for value in self.detunings)
        if self.couplings is None:
            couplings = (1.0,) * len(detunings)
        else:
            couplings = tuple(float(value) for value in self.couplings)
        if len(couplings) != len(detunings):
            raise InvalidParameter(
                f"Got {len(detunings)} detunings but {len(couplings)} couplings"
            )
        if not all(math.isfinite(value) for value in detunings):
            raise InvalidParameter(f"Detunings must be finite, got {detunings}")
        if not all(value > 0 and math.isfinite(value) for value in couplings):
            raise InvalidParameter(f"Couplings must be positive, got {couplings}")
        if not self.degeneracy_tol > 0:
            raise InvalidParameter(f"degeneracy_tol must be positive, got {self.degeneracy_tol}")
        object.__setattr__(self, "detunings", detunings)
        object.__setattr__(self, "couplings", couplings)

    @classmethod
    def degenerate(cls, M, detuning=0.0, coupling=1.0, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
        return cls((detuning,) * M, (coupling,) * M, degeneracy_tol)

    @property
    def M(self) -> int:
        return len(self.detunings)

    @property
    def mean_detuning(self) -> float:
        if not self.detunings:
            return 0.0
        return math.fsum(self.detunings) / self.M

    @property
    def is_uniform_coupling(self) -> bool:
        return len(set(self.couplings)) <= 1

    @property
    def kappa(self) -> float:
        """The common coupling; raises NonuniformCoupling when the κ_a differ."""
        if not self.couplings:
            return 1.0
        if not self.is_uniform_coupling:
            raise NonuniformCoupling(
                f"This formula needs a uniform coupling, got couplings={self.couplings}"
            )
        return self.couplings[0]

    def permuted(self, order):
        return EmitterArray(
            tuple(self.detunings[i] for i in order),
            tuple(self.couplings[i] for i in order),
            self.degeneracy_tol,
        )


@dataclass(frozen=True)
class GaussianPacket1:
    """Incoming single photon exp[i(Δ̄+δ)x - (x-center)²/2σ²], normalized to one."""

    delta: float = 0.0
    sigma: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.delta) or not math.isfinite(self.center):
            raise InvalidParameter("delta and center must be finite")


@dataclass(frozen=True)
class GaussianPacket2:
    """
    Incoming photon pair at total energy 2(Δ̄+δ), relative-coordinate width σ and center-of-mass
    width μ (INFINITE in the wide-pulse limit).
    """

    delta: float = 0.0
    sigma: float = 1.0
    mu: float = INFINITE

    def __post_init__(self):
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if not self.mu > 0:
            raise InvalidParameter(f"mu must be positive or INFINITE, got {self.mu}")
        if not math.isfinite(self.delta):
            raise InvalidParameter("delta must be finite")

    @property
    def is_wide_pulse(self) -> bool:
        return math.isinf(self.mu)

    @property
    def norm(self) -> float:
        """Amplitude (σ√π)^(-1/2) of the relative Gaussian."""
        return (self.sigma * math.sqrt(math.pi)) ** -0.5


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidParameter(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise InvalidParameter("Grid bounds must be finite")
        if not self.stop > self.start:
            raise InvalidParameter(f"Grid stop={self.stop} must exceed start={self.start}")
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "stop", float(self.stop))
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    @property
    def is_symmetric(self) -> bool:
        return abs(self.start + self.stop) <= 1e-12 * (self.stop - self.start)

    def scaled(self, factor):
        return Grid(self.start * factor, self.stop * factor, self.n_points)

    def __str__(self):
        return f"{self.start!r}:{self.stop!r}:{self.n_points}"


@dataclass(frozen=True)
class SampledWave:
    grid: Grid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.grid.n_points,):
            raise InvalidParameter(
                f"Expected {self.grid.n_points} amplitudes, got shape {amplitudes.shape}"
            )
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        from scipy.integrate import trapezoid

        return float(trapezoid(self.density, dx=self.grid.spacing))


@dataclass(frozen=True)
class UnitScale:
    """Converts κ-unit quantities to physical ones: frequency κ·x, length x/κ."""

    kappa: float = 1.0

    def frequency(self, value):
        return self.kappa * value

    def length(self, value):
        return value / self.kappa


def min_pairwise_gap(emitters: EmitterArray) -> float:
    """Smallest |Δ_a - Δ_b| over a < b, +inf for fewer than two emitters."""
    if emitters.M < 2:
        return math.inf
    ordered = np.sort(np.asarray(emitters.detunings))
    return float(np.min(np.diff(ordered)))


def is_degenerate(emitters: EmitterArray) -> bool:
    """
    True when every detuning lies within the tolerance of the mean, False when every gap exceeds
    it. Partially clustered arrays raise MixedDegeneracy: there is no closed form for them.
    """
    gap = min_pairwise_gap(emitters)
    if gap >= emitters.degeneracy_tol:
        return False
    spread = max(abs(value - emitters.mean_detuning) for value in emitters.detunings)
    if spread < emitters.degeneracy_tol:
        return True
    logger.warning(
        "Mixed degeneracy: min_gap=%s, spread=%s, tol=%s", gap, spread, emitters.degeneracy_tol
    )
    raise MixedDegeneracy(
        f"Detunings {emitters.detunings} are partially clustered (min gap {gap:.3g}, "
        f"tolerance {emitters.degeneracy_tol:.3g}); perturb or resample them"
    )
