import unittest

import numpy as np
import numpy.testing as npt
from scipy import special

from chiral.errors import InvalidParameter, SingularSeries
from chiral.specfun import (
    TruncatedSeries,
    erfc_exp_sq,
    erfc_real,
    laguerre_assoc1,
    laguerre_assoc1_roots,
    series_inv,
    series_mul,
    series_pow,
)


def random_series(rng, order):
    """Complex coefficients in the unit square, with 0.5 <= |c_0| <= 2 so the reciprocal is tame."""
    coefficients = rng.uniform(-0.5, 0.5, order + 1) + 1j * rng.uniform(-0.5, 0.5, order + 1)
    coefficients[0] = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    return TruncatedSeries(coefficients)


class TestLaguerre(unittest.TestCase):
    def test_degree_zero_is_one(self):
        npt.assert_array_equal(laguerre_assoc1(0, np.array([-3.0, 0.0, 7.5])), [1.0, 1.0, 1.0])

    def test_known_values(self):
        self.assertAlmostEqual(laguerre_assoc1(1, 2.0), 0.0, places=15)
        self.assertAlmostEqual(laguerre_assoc1(2, 0.0), 3.0, places=15)

    def test_matches_scipy(self):
        x = np.linspace(0.0, 40.0, 401)
        for n in range(12):
            expected = special.eval_genlaguerre(n, 1, x)
            npt.assert_allclose(laguerre_assoc1(n, x), expected, rtol=1e-10, atol=1e-10 * np.max(np.abs(expected)))

    def test_scalar_returns_float(self):
        self.assertIsInstance(laguerre_assoc1(3, 1.5), float)

    def test_negative_degree(self):
        with self.assertRaises(InvalidParameter):
            laguerre_assoc1(-1, 0.0)

    def test_recurrence_consistency(self):
        x = np.linspace(0.0, 50.0, 1001)
        for n in range(1, 20):
            terms = [(n + 1) * laguerre_assoc1(n + 1, x), (2 * n + 2 - x) * laguerre_assoc1(n, x),
                     (n + 1) * laguerre_assoc1(n - 1, x)]
            scale = np.maximum.reduce([np.abs(term) for term in terms])
            residual = np.abs(terms[0] - terms[1] + terms[2])
            self.assertTrue(np.all(residual <= 1e-12 * scale), f"n={n}")

    def test_roots(self):
        # the root of L^(1)_1 sits exactly on a scan node
        npt.assert_array_equal(laguerre_assoc1_roots(1), [2.0])
        npt.assert_array_equal(laguerre_assoc1_roots(1, points_per_unit=1), [2.0])
        for n in (2, 5, 9):
            expected = special.roots_genlaguerre(n, 1)[0]
            npt.assert_allclose(laguerre_assoc1_roots(n), expected, rtol=1e-10)
        self.assertEqual(laguerre_assoc1_roots(0).size, 0)


class TestErfc(unittest.TestCase):
    def test_values(self):
        self.assertEqual(erfc_real(0.0), 1.0)
        self.assertAlmostEqual(erfc_real(1.0), 0.157299207050285, places=14)
        self.assertLess(erfc_real(30.0), 1e-300)

    def test_scaled_product(self):
        self.assertAlmostEqual(erfc_exp_sq(1.0), np.e * 0.157299207050285, places=13)
        # beyond the switch exp(x²) alone would overflow
        npt.assert_allclose(erfc_exp_sq(100.0), special.erfcx(100.0), rtol=1e-14)
        npt.assert_allclose(erfc_exp_sq(np.array([0.5, 40.0])), special.erfcx([0.5, 40.0]), rtol=1e-13)


class TestTruncatedSeries(unittest.TestCase):
    def test_multiplication(self):
        self.assertEqual(TruncatedSeries([1]) * TruncatedSeries([1]), TruncatedSeries([1]))
        s = TruncatedSeries([0, 1, 0])
        self.assertEqual(s * s, TruncatedSeries([0, 0, 1]))
        self.assertEqual(TruncatedSeries([1, 1]) * TruncatedSeries([1, -1]), TruncatedSeries([1, 0]))

    def test_order_mismatch(self):
        with self.assertRaises(InvalidParameter):
            series_mul(TruncatedSeries([1, 1]), TruncatedSeries([1, 1, 1]))

    def test_scalar_operands(self):
        s = TruncatedSeries.variable(2, shift=1.0)
        self.assertEqual(2 * s, TruncatedSeries([2, 2, 0]))
        self.assertEqual(s * 2.0, TruncatedSeries([2, 2, 0]))
        self.assertEqual(np.float64(3.0) * s, TruncatedSeries([3, 3, 0]))
        self.assertEqual(1 - s, TruncatedSeries([0, -1, 0]))
        self.assertEqual(s + 1j, TruncatedSeries([1 + 1j, 1, 0]))
        self.assertEqual(s / 2, TruncatedSeries([0.5, 0.5, 0]))

    def test_inverse(self):
        self.assertEqual(series_inv(TruncatedSeries([1])), TruncatedSeries([1]))
        npt.assert_allclose(series_inv(TruncatedSeries([1, 1, 0])).coefficients, [1, -1, 1])
        with self.assertRaises(SingularSeries):
            series_inv(TruncatedSeries([0, 1]))

    def test_division_by_series(self):
        quotient = TruncatedSeries([1, 0, 0]) / TruncatedSeries([1, -1, 0])
        npt.assert_allclose(quotient.coefficients, [1, 1, 1])

    def test_power(self):
        self.assertEqual(series_pow(TruncatedSeries([3, 5, 7]), 0), TruncatedSeries([1, 0, 0]))
        self.assertEqual(TruncatedSeries([0, 1, 0, 0]) ** 3, TruncatedSeries([0, 0, 0, 1]))
        self.assertEqual(TruncatedSeries([1, 1, 0]) ** 2, TruncatedSeries([1, 2, 1]))
        with self.assertRaises(InvalidParameter):
            series_pow(TruncatedSeries([1, 1]), -1)

    def test_complex_geometric_series(self):
        # 1/(s - i) = -Σ s^k / i^(k+1)
        inverse = series_inv(TruncatedSeries.variable(6, -1j))
        expected = [-(1 / 1j) ** (k + 1) for k in range(7)]
        npt.assert_allclose(inverse.coefficients, expected, atol=1e-15)

    def test_product_is_associative_and_commutative(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c = (random_series(rng, 6) for _ in range(3))
            left = ((a * b) * c).coefficients
            right = (a * (b * c)).coefficients
            npt.assert_allclose(left, right, rtol=0, atol=1e-14 * np.max(np.abs(left)))
            npt.assert_allclose((a * b).coefficients, (b * a).coefficients, rtol=1e-15, atol=1e-15)
            npt.assert_array_equal((a + b).coefficients, (b + a).coefficients)
            npt.assert_allclose(((a + b) + c).coefficients, (a + (b + c)).coefficients, rtol=1e-15, atol=1e-15)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(11)
        identity = np.eye(1, 9, dtype=complex)[0]
        for _ in range(50):
            a = random_series(rng, 8)
            npt.assert_allclose(series_mul(a, series_inv(a)).coefficients, identity, rtol=0, atol=1e-13)

    def test_derivative_at_zero(self):
        series = TruncatedSeries([1, 2, 3, 4])
        self.assertEqual(series.derivative_at_zero(3), 24)
        self.assertEqual(len(series), 4)
        self.assertEqual(series.order, 3)


if __name__ == "__main__":
    unittest.main()
