"""
Two-photon scattering in the wide-pulse limit.

The pair is described at fixed total energy E = 2(Δ̄ + δ) by its relative coordinate d = y1 - y2.
The outgoing relative wavefunction splits into a reducible part, which is the product of the two
single-photon transmissions applied in relative-momentum space, and an irreducible part obtained by
convolving the ++ component of the connected T-matrix with the incoming relative Gaussian.

The irreducible T-matrix is carried as a sum of exponentials times polynomials,
T(X) = Σ_n e^{i u_n X} Σ_j p_{n,j} X^j with X = Δy + Δz >= 0, which makes the convolution with
the Gaussian reduce to a handful of one-dimensional moments.
"""

import logging
import math

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from chiral.config.const import (
    DEFAULT_LOG_LEVEL,
    GAUSS_LEGENDRE_PANEL_WIDTH,
    GAUSSIAN_TAIL_CUTOFF,
    REMOVABLE_POLE_EXTRA_ORDER,
    REMOVABLE_POLE_RADIUS,
    SCATTERED_TAIL_PER_EMITTER,
    T_MATRIX_X_MAX,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import FiniteMuUnsupported, InvalidParameter, SingularSeries
from chiral.model import EmitterArray, GaussianPacket2, Grid, is_degenerate
from chiral.single_photon import check_grid_resolution, scatter_coeffs, t_single
from chiral.specfun import (
    TruncatedSeries,
    erfc_exp_sq,
    laguerre_assoc1,
    series_inv,
    series_pow,
)
from chiral.utils.dev_utils import measure_time
from chiral.utils.quadrature import gauss_legendre_panels, quad_fourier

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)

SINGLE_SUM = "single"
DOUBLE_SUM = "double"


@dataclass(frozen=True)
class TMatrixTerms:
    """T(X) = Σ_n e^{i u_n X} Σ_j p[n, j] X^j."""

    u: np.ndarray
    p: np.ndarray

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        value = np.zeros_like(X, dtype=complex)
        for u, coefficients in zip(self.u, self.p):
            # np.polyval wants the leading coefficient first
            value = value + np.exp(1j * u * X) * np.polyval(coefficients[::-1], X)
        return value


@dataclass(frozen=True)
class TwoPhotonResult:
    grid: Grid
    phi2: np.ndarray = field(repr=False)
    reducible: np.ndarray = field(repr=False)
    irreducible: np.ndarray = field(repr=False)
    density: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("phi2", "reducible", "irreducible"):
            values = np.array(getattr(self, name), dtype=complex)
            values.flags.writeable = False
            object.__setattr__(self, name, values)
        density = np.abs(self.phi2) ** 2
        density.flags.writeable = False
        object.__setattr__(self, "density", density)


# ========================
# Irreducible T-matrix
# ========================


def distinct_terms(E_total, emitters: EmitterArray, form=DOUBLE_SUM) -> TMatrixTerms:
    """
    Exponential terms of the ++ irreducible T-matrix for distinct detunings.

    With α_a = Δ_a - iκ/2 every term decays as e^{i(E/2 - α_a)X}. The double sum over (a, b)
    carries C_a C_b/((Δ_a - Δ_b + iκ)(E - α_a - α_b)), the diagonal giving C_a²/(iκ(E - 2α_a)).
    The single sum resolves the b-sum into the product Π_{b≠a}(E - α_a - α_b - iκ)/(E - α_a - α_b)
    and involves only first powers of C_a.
    """
    kappa = emitters.kappa
    C = scatter_coeffs(emitters).C
    detunings = np.asarray(emitters.detunings)
    alpha = detunings - 0.5j * kappa
    pair_energy = E_total - alpha[:, None] - alpha[None, :]
    if form == DOUBLE_SUM:
        gaps = detunings[:, None] - detunings[None, :] + 1j * kappa
        amplitudes = -2j * kappa**3 * C * np.sum(C[None, :] / (gaps * pair_energy), axis=1)
    elif form == SINGLE_SUM:
        ratios = (pair_energy - 1j * kappa) / pair_energy
        np.fill_diagonal(ratios, 1.0)
        amplitudes = -2.0 * kappa**2 * C / (E_total - 2 * alpha) * np.prod(ratios, axis=1)
    else:
        raise InvalidParameter(f"Unknown T-matrix form {form!r}, expected 'single' or 'double'")
    return TMatrixTerms(0.5 * E_total - alpha, amplitudes[:, None])


def irreducible_T_distinct(dy, dz, E_total, emitters: EmitterArray, form=DOUBLE_SUM):
    """
    The ++ component of the irreducible two-photon T-matrix for distinct detunings at total energy
    E_total, as a function of the relative coordinates before (dz) and after (dy) scattering.
    Vanishes unless dy >= 0 and dz >= 0.
    """
    dy = np.asarray(dy, dtype=float)
    dz = np.asarray(dz, dtype=float)
    terms = distinct_terms(E_total, emitters, form)
    value = np.where((dy >= 0) & (dz >= 0), terms(np.maximum(dy, 0) + np.maximum(dz, 0)), 0.0)
    if value.ndim == 0:
        return complex(value)
    return value


def _pole_factors(delta, M, order):
    s = TruncatedSeries.variable(order)
    A = series_pow(TruncatedSeries.variable(order, -2 * delta), M) * series_inv(
        series_pow(TruncatedSeries.variable(order, -2 * delta - 1j), M)
    )
    B = series_pow(s, M) * series_inv(series_pow(TruncatedSeries.variable(order, 1j), M))
    return A, B


def degenerate_polynomial(delta, M):
    """
    Coefficients q_j of F(δ, x) = Σ_j q_j x^j (κ = 1), the polynomial of degree M-1 entering the
    degenerate T-matrix.

    F is assembled from the Taylor coefficients of
    f(s) = (s - i)^M / (2(M-1)!) · [(s-2δ)^M/(s-2δ-i)^M - s^M/(s+i)^M] / (s - δ).
    The division by (s - δ) is done directly for |δ| >= REMOVABLE_POLE_RADIUS, and by a backward
    recurrence carried REMOVABLE_POLE_EXTRA_ORDER orders beyond M-1 closer to the removable pole.

    Raises SingularSeries at δ = 0, where the closed form applies instead.
    """
    K = M - 1
    if abs(delta) >= REMOVABLE_POLE_RADIUS or delta == 0:
        A, B = _pole_factors(delta, M, K)
        g = (A - B) * series_inv(TruncatedSeries.variable(K, -delta))
    else:
        order = K + REMOVABLE_POLE_EXTRA_ORDER
        A, B = _pole_factors(delta, M, order)
        G = (A - B).coefficients
        coefficients = np.zeros(order + 1, dtype=complex)
        # (s - δ) g = G gives g_k = G_{k+1} + δ g_{k+1}; the top coefficient is dropped
        for k in range(order - 1, -1, -1):
            coefficients[k] = G[k + 1] + delta * coefficients[k + 1]
        g = TruncatedSeries(coefficients[: K + 1])
    f = series_pow(TruncatedSeries.variable(K, -1j), M) * g / (2.0 * math.factorial(K))
    q = np.empty(M, dtype=complex)
    for l in range(M):
        q[K - l] = math.comb(K, l) * f.derivative_at_zero(l) * (-1j) ** (K - l)
    return q


def degenerate_terms(delta, M, kappa=1.0) -> TMatrixTerms:
    """T(δ; X) = 2iκ e^{(iδ - κ/2)X} F(δ/κ, κX) as a single exponential-polynomial term."""
    if M < 1:
        raise InvalidParameter(f"The degenerate T-matrix needs M >= 1, got {M}")
    try:
        q = degenerate_polynomial(delta / kappa, M)
    except SingularSeries:
        logger.debug("Degenerate T-matrix at delta=0, using the parity closed form for M=%d", M)
        q = np.array([(1 - (-1) ** M) / 2], dtype=complex)
    p = 2j * kappa * q * kappa ** np.arange(q.size)
    return TMatrixTerms(np.array([delta + 0.5j * kappa]), p[None, :])


def irreducible_T_degenerate(X, delta, M, kappa=1.0):
    """
    The ++ irreducible T-matrix for M emitters sharing one transition frequency, with δ the
    detuning of the pair's mean frequency E/2 from it and X = Δy + Δz.
    """
    X = np.asarray(X, dtype=float)
    if np.any(X < 0):
        raise InvalidParameter("X = dy + dz must be nonnegative")
    value = degenerate_terms(delta, M, kappa)(X)
    if value.ndim == 0:
        return complex(value)
    return value


def irreducible_terms(E_total, emitters: EmitterArray, form=SINGLE_SUM) -> TMatrixTerms:
    if is_degenerate(emitters):
        return degenerate_terms(0.5 * E_total - emitters.mean_detuning, emitters.M, emitters.kappa)
    return distinct_terms(E_total, emitters, form)


# ===========================
# Outgoing relative amplitude
# ===========================


def _spectral_cutoff(sigma):
    return math.sqrt(-2.0 * math.log(GAUSSIAN_TAIL_CUTOFF)) / sigma


@lru_cache(maxsize=32)
def _reducible_quadrature(sigma, grid: Grid, kappa):
    """
    Gauss-Legendre nodes in relative momentum p and the matrix (1/π) cos(p|d|) w ψ̃(p), so that the
    reducible amplitude is the matrix applied to t(E/2 + p) t(E/2 - p).
    """
    p_max = _spectral_cutoff(sigma)
    d = np.abs(grid.points)
    panel = min(GAUSS_LEGENDRE_PANEL_WIDTH * kappa, 4.0 / max(d.max(), 1.0))
    nodes, weights = gauss_legendre_panels([0.0, p_max], panel)
    norm = (sigma * math.sqrt(math.pi)) ** -0.5
    spectrum = norm * math.sqrt(2.0 * math.pi) * sigma * np.exp(-0.5 * (sigma * nodes) ** 2)
    matrix = np.cos(np.outer(d, nodes)) * (weights * spectrum / math.pi)[None, :]
    logger.debug("Reducible quadrature: sigma=%s, n_nodes=%d, panel=%.4g", sigma, nodes.size, panel)
    nodes.flags.writeable = False
    matrix.flags.writeable = False
    return nodes, matrix


def reducible_part(E_total, emitters: EmitterArray, sigma, grid: Grid):
    nodes, matrix = _reducible_quadrature(sigma, grid, max(emitters.couplings, default=1.0))
    half = 0.5 * E_total
    return matrix @ (t_single(half + nodes, emitters) * t_single(half - nodes, emitters))


@lru_cache(maxsize=4096)
def _gaussian_moment(u, m, sigma, w_max):
    """∫_0^{w_max} w^m e^{iuw} e^{-w²/2σ²} dw for Im u > 0."""
    decay = u.imag
    return quad_fourier(
        lambda w: w**m * math.exp(-decay * w - 0.5 * (w / sigma) ** 2), 0.0, w_max, u.real
    )


def irreducible_part(terms: TMatrixTerms, sigma, d, kappa=1.0):
    """
    φ_irr(d) = i ∫_0^∞ dw T(|d| + w) ψ_in(w), expanded with the binomial theorem into moments of
    the incoming relative Gaussian ψ_in(w) = (σ√π)^{-1/2} e^{-w²/2σ²}.
    """
    abs_d = np.abs(np.asarray(d, dtype=float))
    degree = terms.p.shape[1] - 1
    w_max = (T_MATRIX_X_MAX + SCATTERED_TAIL_PER_EMITTER * degree) / kappa
    norm = (sigma * math.sqrt(math.pi)) ** -0.5
    total = np.zeros_like(abs_d, dtype=complex)
    for u, coefficients in zip(terms.u, terms.p):
        if not np.any(coefficients):
            continue
        moments = [_gaussian_moment(complex(u), m, float(sigma), w_max) for m in range(degree + 1)]
        polynomial = np.zeros_like(abs_d, dtype=complex)
        for j, p_j in enumerate(coefficients):
            for m in range(j + 1):
                polynomial += p_j * math.comb(j, m) * abs_d ** (j - m) * moments[m]
        total += np.exp(1j * u * abs_d) * polynomial
    return 1j * norm * total


@measure_time
def two_photon_out(
    packet: GaussianPacket2,
    emitters: EmitterArray,
    grid: Grid,
    carrier_reference=None,
    form=SINGLE_SUM,
) -> TwoPhotonResult:
    """
    Outgoing relative two-photon wavefunction φ₂(d) for a Gaussian pair in the wide-pulse limit.

    Parameters:
        packet: the incoming pair; its detuning δ is taken from carrier_reference.
        emitters: the emitter array (uniform coupling).
        grid: relative-coordinate grid symmetric about d = 0.
        carrier_reference: frequency the detuning is measured from, the array mean by default.
        form: "single" or "double" sum for the distinct-detuning T-matrix.

    Returns:
        TwoPhotonResult with the total amplitude and its reducible and irreducible parts.

    Raises:
        FiniteMuUnsupported: finite center-of-mass width.
        GridTooCoarse: the spacing undersamples σ or 1/κ.
        MixedDegeneracy, NonuniformCoupling: propagated from the emitter checks.
    """
    if not packet.is_wide_pulse:
        raise FiniteMuUnsupported(
            f"Only the wide-pulse limit mu=inf is supported, got mu={packet.mu}"
        )
    if not grid.is_symmetric:
        raise InvalidParameter(f"The relative-coordinate grid {grid} must be symmetric about d=0")
    check_grid_resolution(grid, packet.sigma, emitters)
    d = grid.points
    incoming = even_parity_closed_form(d, packet.sigma)
    if emitters.M == 0:
        return TwoPhotonResult(grid, incoming, incoming, np.zeros_like(incoming))

    reference = emitters.mean_detuning if carrier_reference is None else carrier_reference
    E_total = 2.0 * (reference + packet.delta)
    terms = irreducible_terms(E_total, emitters, form)
    logger.debug(
        "two_photon_out: M=%d, delta=%s, sigma=%s, E=%s, n_terms=%d, degree=%d",
        emitters.M, packet.delta, packet.sigma, E_total, terms.u.size, terms.p.shape[1] - 1,
    )
    reducible = reducible_part(E_total, emitters, packet.sigma, grid)
    irreducible = irreducible_part(terms, packet.sigma, d, emitters.kappa)
    return TwoPhotonResult(grid, reducible + irreducible, reducible, irreducible)


def g2_density(result: TwoPhotonResult) -> np.ndarray:
    return np.array(result.density)


# ============
# Closed forms
# ============


def even_parity_closed_form(d, sigma):
    """The incoming relative Gaussian (σ√π)^{-1/2} e^{-d²/2σ²}, left unchanged by even M at δ=0."""
    d = np.asarray(d, dtype=float)
    norm = (sigma * math.sqrt(math.pi)) ** -0.5
    return norm * np.exp(-0.5 * (d / sigma) ** 2) + 0j


def odd_parity_closed_form(d, sigma):
    """Outgoing amplitude for any odd M at δ=0 (κ=1): the Gaussian minus an exponential cusp e^{-|d|/2}."""
    d = np.asarray(d, dtype=float)
    norm = (sigma * math.sqrt(math.pi)) ** -0.5
    cusp = math.sqrt(2.0 * math.pi) * sigma * np.exp(-0.5 * np.abs(d)) * erfc_exp_sq(
        sigma / (2.0 * math.sqrt(2.0))
    )
    return norm * (np.exp(-0.5 * (d / sigma) ** 2) - cusp) + 0j


def odd_parity_centre_ratio(sigma) -> float:
    """
    |φ₂(0)|² of the odd-M closed form over the incoming density at d=0. Below one (antibunching)
    only for σ up to about 1.22; wider pulses give a centre peak instead.
    """
    return float(abs(odd_parity_closed_form(0.0, sigma)) ** 2 / abs(even_parity_closed_form(0.0, sigma)) ** 2)


def large_delta_asymptotic(d, sigma, delta, M, printed_convention=False):
    """
    Leading large-detuning form (κ=1): the Gaussian rescaled by 1 - 2Mi/δ - 2M²/δ² plus a tail
    δ^{-2} e^{-|d|/2 + iδ|d|} L^(1)_{M-1}(|d|). printed_convention returns the complex conjugate,
    i.e. the opposite sign of the carrier phase.
    """
    d = np.asarray(d, dtype=float)
    abs_d = np.abs(d)
    norm = (sigma * math.sqrt(math.pi)) ** -0.5
    gaussian = np.exp(-0.5 * (d / sigma) ** 2) * (1 - 2j * M / delta - 2.0 * M**2 / delta**2)
    tail = delta**-2 * np.exp(-0.5 * abs_d + 1j * delta * abs_d) * laguerre_assoc1(M - 1, abs_d)
    value = norm * (gaussian + tail)
    if printed_convention:
        return np.conj(value)
    return value


def tail_amplitude(result: TwoPhotonResult, d_min) -> float:
    """Largest |φ₂(d)| over |d| >= d_min, where the incoming Gaussian no longer contributes."""
    mask = np.abs(result.grid.points) >= d_min
    if not np.any(mask):
        raise InvalidParameter(f"No grid point with |d| >= {d_min}")
    return float(np.max(np.abs(result.phi2[mask])))
