import logging
from functools import lru_cache

import numpy as np
from scipy import integrate

from chiral.config.const import (
    DEFAULT_LOG_LEVEL,
    GAUSS_LEGENDRE_ORDER,
    QUAD_EPSABS,
    QUAD_EPSREL,
    QUAD_LIMIT,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import QuadratureNotConverged

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


def quad_real(
    func, a, b, points=None, weight=None, wvar=None,
    epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
):
    """
    Adaptive Gauss-Kronrod integral of a real function over [a, b] (either bound may be infinite).

    Raises QuadratureNotConverged when QUADPACK reports a nonzero status instead of returning a
    value with an unreliable error estimate.
    """
    if points is not None and (np.isinf(a) or np.isinf(b)):
        # QUADPACK ignores breakpoints on infinite ranges
        points = None
    if points is not None:
        points = [p for p in points if a < p < b] or None
    result = integrate.quad(
        func, a, b, points=points, weight=weight, wvar=wvar,
        epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1,
    )
    # A fourth element (the message) is only returned when ier > 0
    if len(result) > 3:
        value, error, _, message = result[:4]
        logger.warning("quad failed on [%s, %s]: error=%s, message=%s", a, b, error, message)
        raise QuadratureNotConverged(
            f"Adaptive quadrature on [{a}, {b}] did not reach epsabs={epsabs}: {message}"
        )
    return result[0]


def quad_complex(func, a, b, **kwargs):
    """Integrates the real and imaginary parts of a complex function separately."""
    real = quad_real(lambda x: func(x).real, a, b, **kwargs)
    imag = quad_real(lambda x: func(x).imag, a, b, **kwargs)
    return complex(real, imag)


@lru_cache(maxsize=None)
def _reference_rule(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre_panels(breakpoints, panel_width, order=GAUSS_LEGENDRE_ORDER):
    """
    Composite Gauss-Legendre nodes and weights over consecutive intervals given by breakpoints,
    each split into panels no wider than panel_width.

    :return: (nodes, weights) as 1-d arrays.
    """
    reference_nodes, reference_weights = _reference_rule(order)
    nodes = []
    weights = []
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        if right <= left:
            continue
        n_panels = max(1, int(np.ceil((right - left) / panel_width)))
        edges = np.linspace(left, right, n_panels + 1)
        half = 0.5 * np.diff(edges)
        middle = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((middle[:, None] + half[:, None] * reference_nodes[None, :]).ravel())
        weights.append((half[:, None] * reference_weights[None, :]).ravel())
    if not nodes:
        return np.array([]), np.array([])
    return np.concatenate(nodes), np.concatenate(weights)


def quad_fourier(func, a, b, omega, **kwargs):
    """
    ∫_a^b func(x) e^{iωx} dx for a real, smooth func on a finite interval. The oscillating factor
    goes to QUADPACK as a cos/sin weight, so large ω does not exhaust the subdivision limit.
    """
    if omega == 0:
        return complex(quad_real(func, a, b, **kwargs), 0.0)
    real = quad_real(func, a, b, weight="cos", wvar=omega, **kwargs)
    imag = quad_real(func, a, b, weight="sin", wvar=omega, **kwargs)
    return complex(real, imag)
