"""
Brute-force evaluators used to cross-check the closed forms: real-space convolution for one photon,
the four-coordinate irreducible T-matrix, its momentum-space form, the composition of two single
emitters, and the contour-integral representation of the outgoing one- and two-photon states.

None of these share an evaluation path with the closed-form pipeline beyond the special functions
and the kernel they are meant to integrate.
"""

import logging
import math

from dataclasses import dataclass

import numpy as np

from chiral.config.const import (
    CONTOUR_CHUNK_ROWS,
    CONTOUR_DECAY_EXPONENT,
    CONTOUR_MARGIN,
    CONTOUR_PANEL_WIDTH,
    CONTOUR_TAIL_SLOPE,
    CONTOUR_TRUNCATION_TOL,
    DEFAULT_CONTOUR_OFFSETS,
    DEFAULT_LOG_LEVEL,
    GAUSS_LEGENDRE_ORDER,
    T_MATRIX_X_MAX,
    TMFTVariant,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import ContourViolation, InvalidParameter, TruncationNotConverged
from chiral.model import EmitterArray, GaussianPacket1, Grid, SampledWave
from chiral.single_photon import incoming_packet, kernel_single, scatter_coeffs
from chiral.two_photon import irreducible_T_distinct
from chiral.utils.dev_utils import measure_time
from chiral.utils.quadrature import gauss_legendre_panels, quad_complex

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)

# Gaussian packets are integrated out to this many widths from the center
CONVOLUTION_SIGMA_SPAN = 10.0


@dataclass(frozen=True)
class ContourSpec:
    """
    Contours λ_j(x) = x + i(offset_j - s·slope·max(|x| - Λ, 0)), with Λ = max|Δ_a| + margin·κ and
    s = ±1 bending the tails into the half-plane where e^{iλu} decays. The tails are cut where the
    envelope has dropped by exp(-decay_exponent).
    """

    offsets: tuple = DEFAULT_CONTOUR_OFFSETS
    margin: float = CONTOUR_MARGIN
    slope: float = CONTOUR_TAIL_SLOPE
    decay_exponent: float = CONTOUR_DECAY_EXPONENT
    panel_width: float = CONTOUR_PANEL_WIDTH
    order: int = GAUSS_LEGENDRE_ORDER
    tolerance: float = CONTOUR_TRUNCATION_TOL

    def shifted(self, amount):
        return ContourSpec(
            tuple(offset + amount for offset in self.offsets),
            self.margin, self.slope, self.decay_exponent, self.panel_width, self.order, self.tolerance,
        )


# ==========================
# Single-photon convolution
# ==========================


@measure_time
def oracle_single_convolution(packet: GaussianPacket1, emitters: EmitterArray, grid: Grid) -> SampledWave:
    """φ_out(y) = φ_in(y) + ∫ K(y - z) φ_in(z) dz, each point by adaptive quadrature."""
    y = grid.points
    incoming = incoming_packet(y, packet, emitters)
    if emitters.M == 0:
        return SampledWave(grid, incoming)
    center, span = packet.center, CONVOLUTION_SIGMA_SPAN * packet.sigma
    outgoing = np.array(incoming)
    for i, y_i in enumerate(y):
        # K(y - z) vanishes for z < y
        lower = max(y_i, center - span)
        upper = center + span
        if lower >= upper:
            continue

        def integrand(z, y_i=y_i):
            return kernel_single(y_i - z, emitters) * incoming_packet(z, packet, emitters)

        outgoing[i] += quad_complex(integrand, lower, upper, points=[center])
    return SampledWave(grid, outgoing)


# =====================
# Momentum-space forms
# =====================


def _resonance_factors(emitters: EmitterArray):
    kappa = emitters.kappa
    C = scatter_coeffs(emitters).C
    detunings = np.asarray(emitters.detunings)
    return kappa, C, detunings, detunings - 0.5j * kappa


def oracle_TMFT(p1, p2, k1, emitters: EmitterArray, variant=TMFTVariant.AS_PRINTED):
    """
    Momentum-space irreducible T-matrix on the energy shell k2 = p1 + p2 - k1, with the energy
    delta function stripped:

    (iκ³/π) Σ_{ab} C_a C_b / ((Δ_a - Δ_b + iκ)(E - α_a - α_b)) · P_ab(p1, p2) · P_ab(k1, k2)

    where P_ab(q1, q2) = 1/(q1 - α_a) + 1/(q2 - α_a) for AS_PRINTED and
    1/(q1 - α_a) + 1/(q2 - α_b) for PAIRED.
    """
    variant = TMFTVariant(variant)
    kappa, C, detunings, alpha = _resonance_factors(emitters)
    E = p1 + p2
    k2 = E - k1
    a_poles = alpha[:, None]
    b_poles = alpha[None, :] if variant == TMFTVariant.PAIRED else alpha[:, None]
    outgoing = 1.0 / (p1 - a_poles) + 1.0 / (p2 - b_poles)
    incoming = 1.0 / (k1 - a_poles) + 1.0 / (k2 - b_poles)
    weights = (C[:, None] * C[None, :]) / (
        (detunings[:, None] - detunings[None, :] + 1j * kappa) * (E - alpha[:, None] - alpha[None, :])
    )
    return complex(1j * kappa**3 / math.pi * np.sum(weights * outgoing * incoming))


def _cosine_pair_kernel(X, p, k):
    """∫_0^X cos(p y) cos(k (X - y)) dy, with the p = ±k limits taken explicitly."""
    scale = 1e-9 * max(1.0, abs(p), abs(k))
    if abs(p + k) > scale:
        plus = (math.sin(p * X) + math.sin(k * X)) / (p + k)
    else:
        plus = X * math.cos(k * X)
    if abs(p - k) > scale:
        minus = (math.sin(p * X) - math.sin(k * X)) / (p - k)
    else:
        minus = X * math.cos(k * X)
    return 0.5 * (plus + minus)


def oracle_fourier_T(p1, p2, k1, emitters: EmitterArray):
    """
    Fourier transform (2/π) ∫∫_{dy,dz>=0} T(dy, dz) cos(p dy) cos(k dz) of the mixed-representation
    irreducible T-matrix, with p = (p1 - p2)/2 and k = (k1 - k2)/2. The double integral depends on
    dy + dz only through T and is reduced to one dimension analytically.
    """
    E = p1 + p2
    k2 = E - k1
    p = 0.5 * (p1 - p2)
    k = 0.5 * (k1 - k2)
    x_max = T_MATRIX_X_MAX / emitters.kappa

    def integrand(X):
        return irreducible_T_distinct(X, 0.0, E, emitters) * _cosine_pair_kernel(X, p, k)

    return 2.0 / math.pi * quad_complex(integrand, 0.0, x_max)


def _single_emitter_tau(q1, q2, l1, l2, detuning, kappa):
    """Momentum-space irreducible T of one emitter: (κ²/π)(E - 2α) Π 1/(q - α) over all four momenta."""
    alpha = detuning - 0.5j * kappa
    E = q1 + q2
    return (
        kappa**2 / math.pi * (E - 2 * alpha)
        / ((q1 - alpha) * (q2 - alpha) * (l1 - alpha) * (l2 - alpha))
    )


def _single_emitter_t(k, detuning, kappa):
    return (k - detuning - 0.5j * kappa) / (k - detuning + 0.5j * kappa)


def oracle_compose_M2(samples, delta1, delta2, kappa=1.0, irreducible=True):
    """
    Two-emitter two-photon T-matrix composed from two single emitters, the photons meeting emitter 1
    first:

    τ = t2(p1) t2(p2) τ1(p; k) + τ2(p; k) t1(k1) t1(k2) + (i/2) ∫ dq τ2(p; q, E-q) τ1(q, E-q; k)

    Parameters:
        samples: array of on-shell points (p1, p2, k1), shape (n, 3).
        irreducible: with False, both single-emitter T-matrices are dropped and the result is the
            reducible product t(p1) t(p2) of the composed transmission.

    Returns:
        complex array of length n.
    """
    if abs(delta1 - delta2) == 0:
        raise InvalidParameter("Composition needs two distinct detunings")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    result = np.empty(len(samples), dtype=complex)
    for n, (p1, p2, k1) in enumerate(samples):
        E = p1 + p2
        k2 = E - k1
        if not irreducible:
            result[n] = (
                _single_emitter_t(p1, delta1, kappa) * _single_emitter_t(p1, delta2, kappa)
                * _single_emitter_t(p2, delta1, kappa) * _single_emitter_t(p2, delta2, kappa)
            )
            continue
        first = (
            _single_emitter_t(p1, delta2, kappa) * _single_emitter_t(p2, delta2, kappa)
            * _single_emitter_tau(p1, p2, k1, k2, delta1, kappa)
        )
        second = (
            _single_emitter_tau(p1, p2, k1, k2, delta2, kappa)
            * _single_emitter_t(k1, delta1, kappa) * _single_emitter_t(k2, delta1, kappa)
        )

        def integrand(q):
            return _single_emitter_tau(p1, p2, q, E - q, delta2, kappa) * _single_emitter_tau(
                q, E - q, k1, k2, delta1, kappa
            )

        resonances = [delta1, delta2, E - delta1, E - delta2]
        half_width = max(abs(value) for value in resonances) + 10.0 * kappa
        cross = (
            quad_complex(integrand, -np.inf, -half_width)
            + quad_complex(integrand, -half_width, half_width, points=resonances)
            + quad_complex(integrand, half_width, np.inf)
        )
        result[n] = first + second + 0.5j * cross
    return result


# ==============================
# Four-coordinate T-matrix forms
# ==============================


def oracle_tm3(y, z, emitters: EmitterArray):
    """
    Irreducible two-photon T-matrix in coordinates for the arrangement z1 > z2 > y2 > y1:
    -2κ³ Σ_{ab} C_a C_b/(Δ_a - Δ_b + iκ) e^{iα_a u1 + iα_b u2}, u_j = y_j - z_j.
    """
    (y1, y2), (z1, z2) = y, z
    if not z1 > z2 > y2 > y1:
        raise InvalidParameter(f"Expected z1 > z2 > y2 > y1, got y={y}, z={z}")
    kappa, C, detunings, alpha = _resonance_factors(emitters)
    u1, u2 = y1 - z1, y2 - z2
    weights = (C[:, None] * C[None, :]) / (detunings[:, None] - detunings[None, :] + 1j * kappa)
    phases = np.exp(1j * alpha[:, None] * u1 + 1j * alpha[None, :] * u2)
    return complex(-2.0 * kappa**3 * np.sum(weights * phases))


def oracle_mixed_from_tm3(a, b, E_total, emitters: EmitterArray):
    """
    The mixed-representation T-matrix rebuilt from the coordinate form: with relative coordinates
    a = y2 - y1 > 0 and b = z1 - z2 > 0, integrate e^{iEW} over the center-of-mass shift W > (a+b)/2.
    """
    if a <= 0 or b <= 0:
        raise InvalidParameter("Both relative coordinates must be positive")
    X = a + b
    kappa = emitters.kappa

    def integrand(W):
        y = (-0.5 * a, 0.5 * a)
        z = (W + 0.5 * b, W - 0.5 * b)
        return np.exp(1j * E_total * W) * oracle_tm3(y, z, emitters)

    # the integrand decays as e^{-κW}
    return quad_complex(integrand, 0.5 * X, 0.5 * X + T_MATRIX_X_MAX / kappa)


# ========================
# Contour representation
# ========================


def _t_complex(lam, emitters: EmitterArray):
    t = np.ones_like(lam, dtype=complex)
    for detuning, kappa in zip(emitters.detunings, emitters.couplings):
        t = t * (lam - detuning - 0.5j * kappa) / (lam - detuning + 0.5j * kappa)
    return t


def _check_contour(N, emitters: EmitterArray, u, contour: ContourSpec):
    kappa = emitters.kappa
    offsets = contour.offsets
    if len(offsets) < N:
        raise ContourViolation(f"Need {N} contour offsets, got {offsets}")
    offsets = offsets[:N]
    if offsets[0] <= -0.5 * kappa:
        raise ContourViolation(
            f"Contour offset {offsets[0]} must lie above the emitter poles at -kappa/2"
        )
    for lower, upper in zip(offsets[:-1], offsets[1:]):
        if upper - lower <= kappa:
            raise ContourViolation(
                f"Offsets {lower} and {upper} must be separated by more than kappa={kappa}"
            )
    if contour.margin <= 0 or contour.slope <= 0:
        raise ContourViolation("The contour margin and tail slope must be positive")
    if any(value == 0 for value in u):
        raise InvalidParameter("Coordinates with y_j == z_j sit on the delta-function term")
    if N == 2 and (u[0] < 0) != (u[1] < 0):
        raise ContourViolation(f"Retarded coordinates {u} of mixed sign need different tail directions")
    return offsets


def _contour_rule(offset, u, half_width, contour: ContourSpec, tail_scale):
    """Nodes λ, and weights dλ/dx · w / 2π, of one bent contour."""
    tail = tail_scale * contour.decay_exponent / (contour.slope * abs(u))
    x, w = gauss_legendre_panels(
        [-half_width - tail, -half_width, half_width, half_width + tail],
        contour.panel_width,
        contour.order,
    )
    # tails go down for u < 0 and up for u > 0
    direction = 1.0 if u < 0 else -1.0
    excess = np.maximum(np.abs(x) - half_width, 0.0)
    lam = x + 1j * (offset - direction * contour.slope * excess)
    slope = np.where(np.abs(x) > half_width, -direction * contour.slope * np.sign(x), 0.0)
    return lam, w * (1.0 + 1j * slope) / (2.0 * math.pi)


def _contour_value(N, emitters, u, ordered, offsets, half_width, contour, tail_scale):
    factors = []
    for j in range(N):
        lam, weights = _contour_rule(offsets[j], u[j], half_width, contour, tail_scale)
        factors.append((lam, weights * np.exp(1j * lam * u[j]) * _t_complex(lam, emitters)))
    if N == 1:
        return complex(np.sum(factors[0][1]))
    (lam1, f1), (lam2, f2) = factors
    value = np.sum(f1) * np.sum(f2)
    if ordered:
        # Bethe factor (λ1 - λ2 - iκ)/(λ1 - λ2 + iκ) = 1 - 2iκ/(λ1 - λ2 + iκ)
        kappa = emitters.kappa
        correction = 0.0
        for start in range(0, lam1.size, CONTOUR_CHUNK_ROWS):
            rows = slice(start, start + CONTOUR_CHUNK_ROWS)
            denominator = lam1[rows, None] - lam2[None, :] + 1j * kappa
            correction += np.sum(f1[rows, None] * f2[None, :] / denominator)
        value -= 2j * kappa * correction
    return complex(value)


def oracle_yudson(N, emitters: EmitterArray, z, y, contour: ContourSpec = ContourSpec()):
    """
    Outgoing N-photon amplitude (N <= 2, emitters initially in the ground state) for photons
    injected at z and detected at y, as the contour integral

    ∫_Γ Π_j dλ_j/2π e^{iλ_j (y_j - z_j)} t(λ_j) · Π_{l<j} (λ_l - λ_j + iκ sgn(y_l - y_j))/(λ_l - λ_j + iκ)

    without the δ(y - z) terms. The integral is repeated with doubled tails and must agree to
    contour.tolerance.

    Raises:
        ContourViolation: offsets break the ordering rule or the coordinates need opposite tails.
        TruncationNotConverged: doubling the tails changed the value.
    """
    if N not in (1, 2):
        raise InvalidParameter(f"Only N = 1 or 2 photons are supported, got N={N}")
    z = tuple(float(value) for value in np.atleast_1d(z))
    y = tuple(float(value) for value in np.atleast_1d(y))
    if len(z) != N or len(y) != N:
        raise InvalidParameter(f"Expected {N} coordinates, got z={z}, y={y}")
    u = tuple(y_j - z_j for y_j, z_j in zip(y, z))
    offsets = _check_contour(N, emitters, u, contour)
    half_width = max((abs(value) for value in emitters.detunings), default=0.0) + contour.margin * emitters.kappa
    ordered = N == 2 and y[0] < y[1]

    value = _contour_value(N, emitters, u, ordered, offsets, half_width, contour, 1.0)
    refined = _contour_value(N, emitters, u, ordered, offsets, half_width, contour, 2.0)
    deviation = abs(refined - value)
    if deviation > contour.tolerance * max(1.0, abs(refined)):
        logger.warning("Contour truncation: N=%d, u=%s, deviation=%.3g", N, u, deviation)
        raise TruncationNotConverged(
            f"Doubling the contour tails changed the result by {deviation:.3g}"
        )
    logger.debug("oracle_yudson: N=%d, u=%s, value=%s, deviation=%.3g", N, u, refined, deviation)
    return refined
