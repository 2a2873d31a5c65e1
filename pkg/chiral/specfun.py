"""
Special functions and truncated power-series arithmetic.

The series type keeps the coefficients c_0..c_K of Σ c_k s^k; every operation discards terms
beyond order K, so products of truncated factors stay exact up to that order. Derivatives at
s=0 are read off as f^(l)(0) = l! c_l.
"""

import logging
import math

import numpy as np
from multipledispatch import dispatch
from scipy import special
from scipy.optimize import brentq

from chiral.config.const import DEFAULT_LOG_LEVEL, ERFC_SCALED_SWITCH, SERIES_SINGULAR_EPS
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import InvalidParameter, SingularSeries

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)

NUMBER_TYPES = (int, float, complex, np.number)


# ==================
# Special functions
# ==================


def laguerre_assoc1(n, x):
    """
    Generalized Laguerre polynomial L^(1)_n(x), by the forward three-term recurrence
    (k+1) L_{k+1} = (2k+2-x) L_k - (k+1) L_{k-1}.

    :param n: polynomial degree, n >= 0.
    :param x: real scalar or numpy array.
    :return: value(s) with the shape of x.
    """
    if int(n) != n or n < 0:
        raise InvalidParameter(f"Laguerre degree must be a nonnegative integer, got {n}")
    x = np.asarray(x, dtype=float)
    previous = np.zeros_like(x)
    current = np.ones_like(x)
    for k in range(int(n)):
        previous, current = current, ((2 * k + 2 - x) * current - (k + 1) * previous) / (k + 1)
    if current.ndim == 0:
        return float(current)
    return current


def laguerre_assoc1_roots(n, points_per_unit=64):
    """
    The n simple positive roots of L^(1)_n. Scan nodes where the polynomial vanishes exactly are
    roots as they stand; the remaining sign changes on a uniform scan of [0, 4n+8] are refined
    with Brent's method.
    """
    if n == 0:
        return np.array([])
    upper = 4.0 * n + 8.0
    scan = np.linspace(0.0, upper, int(points_per_unit * upper) + 1)
    values = laguerre_assoc1(n, scan)
    on_nodes = scan[values == 0.0]
    # a node root gives a zero product on both sides, so strict changes never recount it
    brackets = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    bracketed = [brentq(lambda x: laguerre_assoc1(n, x), scan[i], scan[i + 1], xtol=1e-15) for i in brackets]
    roots = np.unique(np.concatenate([on_nodes, bracketed]))
    if len(roots) != n:
        logger.error("Found %d roots of L^(1)_%d on [0, %s]", len(roots), n, upper)
        raise InvalidParameter(f"Root scan for L^(1)_{n} found {len(roots)} roots")
    return roots


def erfc_real(x):
    return special.erfc(x)


def erfc_exp_sq(x):
    """exp(x²)·erfc(x) for real x; switches to the scaled erfcx where exp(x²) would overflow."""
    x = np.asarray(x, dtype=float)
    result = np.where(
        x <= ERFC_SCALED_SWITCH,
        np.exp(np.minimum(x, ERFC_SCALED_SWITCH) ** 2) * special.erfc(np.minimum(x, ERFC_SCALED_SWITCH)),
        special.erfcx(x),
    )
    if result.ndim == 0:
        return float(result)
    return result


# ================
# Truncated series
# ================


class TruncatedSeries:
    """
    Power series Σ_{k<=K} c_k s^k with complex coefficients, truncated at order K.
    Operands of binary operations must share the same order.
    """

    __slots__ = ("coefficients",)
    # numpy scalars defer to the reflected operators instead of broadcasting over the series
    __array_ufunc__ = None

    def __init__(self, coefficients):
        coefficients = np.array(coefficients, dtype=complex).ravel()
        if coefficients.size == 0:
            raise InvalidParameter("A truncated series needs at least one coefficient")
        self.coefficients = coefficients

    @classmethod
    def constant(cls, value, order):
        coefficients = np.zeros(order + 1, dtype=complex)
        coefficients[0] = value
        return cls(coefficients)

    @classmethod
    def variable(cls, order, shift=0.0):
        """The series of s + shift."""
        coefficients = np.zeros(order + 1, dtype=complex)
        coefficients[0] = shift
        if order >= 1:
            coefficients[1] = 1.0
        return cls(coefficients)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def derivative_at_zero(self, l):
        return math.factorial(l) * self.coefficients[l]

    def __len__(self):
        return self.coefficients.size

    def __getitem__(self, index):
        return self.coefficients[index]

    def __mul__(self, other):
        return series_mul(self, other)

    def __rmul__(self, other):
        return series_mul(other, self)

    def __add__(self, other):
        return series_add(self, other)

    def __radd__(self, other):
        return series_add(other, self)

    def __neg__(self):
        return TruncatedSeries(-self.coefficients)

    def __sub__(self, other):
        return series_add(self, -other)

    def __rsub__(self, other):
        return series_add(other, -self)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, series_inv(other))
        return TruncatedSeries(self.coefficients / other)

    def __pow__(self, m):
        return series_pow(self, m)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return np.array_equal(self.coefficients, other.coefficients)

    def __repr__(self):
        return f"<TruncatedSeries(order={self.order}, coefficients={self.coefficients.tolist()})>"


def _check_orders(a, b):
    if a.order != b.order:
        raise InvalidParameter(f"Series orders differ: {a.order} != {b.order}")


@dispatch(TruncatedSeries, TruncatedSeries)
def series_mul(a, b):
    """Cauchy product truncated at the common order."""
    _check_orders(a, b)
    return TruncatedSeries(np.convolve(a.coefficients, b.coefficients)[: a.order + 1])


@dispatch(TruncatedSeries, NUMBER_TYPES)
def series_mul(a, scalar):
    return TruncatedSeries(a.coefficients * scalar)


@dispatch(NUMBER_TYPES, TruncatedSeries)
def series_mul(scalar, a):
    return TruncatedSeries(scalar * a.coefficients)


@dispatch(TruncatedSeries, TruncatedSeries)
def series_add(a, b):
    _check_orders(a, b)
    return TruncatedSeries(a.coefficients + b.coefficients)


@dispatch(TruncatedSeries, NUMBER_TYPES)
def series_add(a, scalar):
    coefficients = a.coefficients.copy()
    coefficients[0] += scalar
    return TruncatedSeries(coefficients)


@dispatch(NUMBER_TYPES, TruncatedSeries)
def series_add(scalar, a):
    return series_add(a, scalar)


def series_inv(a: TruncatedSeries) -> TruncatedSeries:
    """
    Reciprocal series from b_0 = 1/a_0, b_n = -(1/a_0) Σ_{k=1..n} a_k b_{n-k}.

    Raises SingularSeries when a_0 vanishes relative to the largest coefficient.
    """
    c = a.coefficients
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[0]) <= SERIES_SINGULAR_EPS * scale:
        raise SingularSeries(f"Constant coefficient {c[0]!r} is zero at scale {scale!r}")
    b = np.zeros_like(c)
    b[0] = 1.0 / c[0]
    for n in range(1, c.size):
        b[n] = -np.dot(c[1 : n + 1], b[n - 1 :: -1][:n]) / c[0]
    return TruncatedSeries(b)


def series_pow(a: TruncatedSeries, m: int) -> TruncatedSeries:
    if int(m) != m or m < 0:
        raise InvalidParameter(f"Series power must be a nonnegative integer, got {m}")
    result = TruncatedSeries.constant(1.0, a.order)
    base = a
    m = int(m)
    while m:
        if m & 1:
            result = series_mul(result, base)
        m >>= 1
        if m:
            base = series_mul(base, base)
    return result
