"""
Single-photon scattering off the emitter array: the transmission coefficient t(k), the real-space
scattering kernel for distinct and degenerate detunings, and propagation of a Gaussian packet.

Coordinates are taken in the co-moving frame, so an unscattered packet keeps its position; the
scattered part only appears behind the incoming one (u = y - z <= 0).
"""

import logging
import math

from dataclasses import dataclass, field

import numpy as np

from chiral.config.const import (
    DEFAULT_LOG_LEVEL,
    GAUSSIAN_TAIL_CUTOFF,
    GRID_MAX_SPACING,
    GRID_SIGMA_RESOLUTION,
    SCATTERED_TAIL_BASE,
    SCATTERED_TAIL_PER_EMITTER,
    SPECTRAL_CHUNK_ROWS,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import DegenerateDetunings, GridTooCoarse
from chiral.model import (
    EmitterArray,
    GaussianPacket1,
    Grid,
    SampledWave,
    is_degenerate,
    min_pairwise_gap,
)
from chiral.specfun import laguerre_assoc1
from chiral.utils.dev_utils import measure_time

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


@dataclass(frozen=True)
class ScatterCoeffs:
    # C_a = Π_{b≠a} (Δ_a - Δ_b - iκ)/(Δ_a - Δ_b), one per emitter
    C: np.ndarray = field(repr=False)

    def __post_init__(self):
        C = np.array(self.C, dtype=complex)
        C.flags.writeable = False
        object.__setattr__(self, "C", C)


@dataclass(frozen=True)
class PropagatedWave(SampledWave):
    """Outgoing single-photon amplitudes together with the incoming packet on the same grid."""

    incoming: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        super().__post_init__()
        incoming = np.array(self.incoming, dtype=complex)
        incoming.flags.writeable = False
        object.__setattr__(self, "incoming", incoming)

    @property
    def scattered(self) -> np.ndarray:
        return self.amplitudes - self.incoming

    @property
    def scattered_density(self) -> np.ndarray:
        return np.abs(self.scattered) ** 2


@dataclass(frozen=True)
class TransmissionSpectrum:
    grid: Grid
    t: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)
    group_delay: np.ndarray = field(repr=False)


def t_single(k, emitters: EmitterArray):
    """
    Transmission coefficient t(k) = Π_a (k - Δ_a - iκ_a/2)/(k - Δ_a + iκ_a/2), unimodular for real k.
    Accepts a scalar or an array of frequencies; heterogeneous couplings are allowed.
    """
    k = np.asarray(k, dtype=float)
    t = np.ones_like(k, dtype=complex)
    for detuning, kappa in zip(emitters.detunings, emitters.couplings):
        t = t * ((k - detuning - 0.5j * kappa) / (k - detuning + 0.5j * kappa))
    if t.ndim == 0:
        return complex(t)
    return t


def group_delay(k, emitters: EmitterArray):
    """Derivative of the transmission phase, Σ_a κ_a / ((k - Δ_a)² + κ_a²/4)."""
    k = np.asarray(k, dtype=float)
    delay = np.zeros_like(k)
    for detuning, kappa in zip(emitters.detunings, emitters.couplings):
        delay = delay + kappa / ((k - detuning) ** 2 + 0.25 * kappa**2)
    if delay.ndim == 0:
        return float(delay)
    return delay


def transmission_spectrum(grid: Grid, emitters: EmitterArray) -> TransmissionSpectrum:
    k = grid.points
    t = t_single(k, emitters)
    # Each emitter adds a winding of 2π across its resonance
    phase = np.unwrap(np.angle(t))
    return TransmissionSpectrum(grid, t, phase, group_delay(k, emitters))


def scatter_coeffs(emitters: EmitterArray) -> ScatterCoeffs:
    """
    The partial-fraction coefficients C_a of the distinct-detuning kernel.

    Raises DegenerateDetunings when two detunings are closer than the tolerance, and
    NonuniformCoupling when the couplings differ.
    """
    kappa = emitters.kappa
    gap = min_pairwise_gap(emitters)
    if gap < emitters.degeneracy_tol:
        raise DegenerateDetunings(
            f"Min detuning gap {gap:.3g} is below degeneracy_tol={emitters.degeneracy_tol:.3g}"
        )
    detunings = np.asarray(emitters.detunings)
    C = np.ones(emitters.M, dtype=complex)
    for a in range(emitters.M):
        differences = detunings[a] - np.delete(detunings, a)
        C[a] = np.prod((differences - 1j * kappa) / differences)
    return ScatterCoeffs(C)


def kernel_single(u, emitters: EmitterArray, delta_offset=0.0):
    """
    Scattered part of the response to a δ-function input at retarded coordinate u = y - z.

    Zero for u > 0. For u <= 0 it is -κ Σ_a C_a e^{(iΔ_a + κ/2)u} for distinct detunings and
    -κ L^(1)_{M-1}(κ|u|) e^{(iΔ + κ/2)u} for degenerate ones. The result is multiplied by
    e^{-i delta_offset u}, i.e. expressed relative to the reference frequency delta_offset.

    :param u: scalar or numpy array.
    :return: complex value(s) with the shape of u.
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    result = np.zeros_like(u, dtype=complex)
    if emitters.M == 0:
        return complex(result[0]) if scalar else result
    kappa = emitters.kappa
    behind = u <= 0
    ub = u[behind]
    if is_degenerate(emitters):
        detuning = emitters.mean_detuning
        values = (
            -kappa
            * laguerre_assoc1(emitters.M - 1, kappa * np.abs(ub))
            * np.exp((1j * (detuning - delta_offset) + 0.5 * kappa) * ub)
        )
    else:
        C = scatter_coeffs(emitters).C
        detunings = np.asarray(emitters.detunings)
        exponents = 1j * (detunings[:, None] - delta_offset) + 0.5 * kappa
        values = -kappa * np.sum(C[:, None] * np.exp(exponents * ub[None, :]), axis=0)
    result[behind] = values
    if scalar:
        return complex(result[0])
    return result


def incoming_packet(y, packet: GaussianPacket1, emitters: EmitterArray):
    """φ_in(y) = σ^{-1/2} π^{-1/4} exp[i k0 y - (y - c)²/2σ²] with k0 = Δ̄ + δ."""
    y = np.asarray(y, dtype=float)
    k0 = emitters.mean_detuning + packet.delta
    amplitude = packet.sigma**-0.5 * math.pi**-0.25
    return amplitude * np.exp(1j * k0 * y - (y - packet.center) ** 2 / (2 * packet.sigma**2))


def check_grid_resolution(grid: Grid, sigma, emitters: EmitterArray):
    kappa = max(emitters.couplings, default=1.0)
    if grid.spacing > sigma / GRID_SIGMA_RESOLUTION or grid.spacing > GRID_MAX_SPACING / kappa:
        raise GridTooCoarse(
            f"Grid spacing {grid.spacing:.4g} exceeds min(sigma/{GRID_SIGMA_RESOLUTION}, "
            f"{GRID_MAX_SPACING}/kappa) = {min(sigma / GRID_SIGMA_RESOLUTION, GRID_MAX_SPACING / kappa):.4g}"
        )


def scattered_tail_length(emitters: EmitterArray) -> float:
    kappa = min(emitters.couplings, default=1.0)
    return (SCATTERED_TAIL_BASE + SCATTERED_TAIL_PER_EMITTER * emitters.M) / kappa


def covering_grid(packet: GaussianPacket1, emitters: EmitterArray) -> Grid:
    """
    The coarsest grid propagate_single accepts for this packet, spanning 8σ ahead of the packet
    center and 8σ plus half the scattered tail behind it.
    """
    kappa = max(emitters.couplings, default=1.0)
    spacing = min(packet.sigma / GRID_SIGMA_RESOLUTION, GRID_MAX_SPACING / kappa)
    start = packet.center - 8 * packet.sigma - 0.5 * scattered_tail_length(emitters)
    stop = packet.center + 8 * packet.sigma
    # one spare point keeps the spacing under the limit after rounding
    return Grid(start, stop, int(math.ceil((stop - start) / spacing)) + 2)


@measure_time
def propagate_single(packet: GaussianPacket1, emitters: EmitterArray, grid: Grid) -> PropagatedWave:
    """
    Outgoing single-photon wavefunction on the grid, computed in momentum space: the analytic
    Gaussian spectrum is multiplied by t(k) and transformed back with a trapezoidal rule over the
    band where the spectrum exceeds GAUSSIAN_TAIL_CUTOFF of its peak.

    The momentum step is 2π/L with L twice the extent of the grid plus the packet and its scattered
    tail, so periodic images of the result stay outside the grid.

    Raises:
        GridTooCoarse: the spacing undersamples σ or 1/κ.
    """
    check_grid_resolution(grid, packet.sigma, emitters)
    y = grid.points
    incoming = incoming_packet(y, packet, emitters)
    if emitters.M == 0:
        return PropagatedWave(grid, incoming, incoming)

    sigma, center = packet.sigma, packet.center
    tail = scattered_tail_length(emitters)
    if grid.start > center - 8 * sigma - 0.5 * tail or grid.stop < center + 8 * sigma:
        logger.warning(
            "Grid %s does not cover the packet and its scattered tail: center=%s, sigma=%s, tail=%s",
            grid, center, sigma, tail,
        )

    k0 = emitters.mean_detuning + packet.delta
    q_max = math.sqrt(-2.0 * math.log(GAUSSIAN_TAIL_CUTOFF)) / sigma
    extent = 2.0 * (max(grid.stop, center + 8 * sigma) - min(grid.start, center - 8 * sigma - tail))
    dq = 2.0 * math.pi / extent
    n_half = int(math.ceil(q_max / dq))
    q = dq * np.arange(-n_half, n_half + 1)
    spectrum = math.sqrt(2.0 * math.pi) * sigma * sigma**-0.5 * math.pi**-0.25 * np.exp(-0.5 * (sigma * q) ** 2)
    weights = (dq / (2.0 * math.pi)) * t_single(k0 + q, emitters) * spectrum
    logger.debug(
        "Spectral propagation: n_q=%d, dq=%.4g, q_max=%.4g, n_points=%d",
        q.size, dq, q_max, grid.n_points,
    )

    outgoing = np.empty(grid.n_points, dtype=complex)
    for start in range(0, grid.n_points, SPECTRAL_CHUNK_ROWS):
        rows = y[start : start + SPECTRAL_CHUNK_ROWS]
        phases = np.exp(1j * np.outer(rows - center, q))
        outgoing[start : start + SPECTRAL_CHUNK_ROWS] = phases @ weights
    outgoing *= np.exp(1j * k0 * y)
    return PropagatedWave(grid, outgoing, incoming)


def delta_response(grid: Grid, emitters: EmitterArray, delta_offset=0.0) -> SampledWave:
    """The scattering kernel sampled on a grid of retarded coordinates u = y - z."""
    return SampledWave(grid, kernel_single(grid.points, emitters, delta_offset))
