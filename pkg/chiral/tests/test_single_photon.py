import math
import unittest

import numpy as np
import numpy.testing as npt
from scipy import special
from scipy.integrate import trapezoid

from chiral.errors import DegenerateDetunings, GridTooCoarse
from chiral.model import EmitterArray, GaussianPacket1, Grid
from chiral.single_photon import (
    check_grid_resolution,
    covering_grid,
    delta_response,
    group_delay,
    kernel_single,
    propagate_single,
    scatter_coeffs,
    t_single,
    transmission_spectrum,
)
from chiral.utils.quadrature import quad_real


def local_minima(values):
    inner = values[1:-1]
    return np.nonzero((inner < values[:-2]) & (inner <= values[2:]))[0] + 1


class TestTransmission(unittest.TestCase):
    def test_known_values(self):
        self.assertEqual(t_single(0.3, EmitterArray()), 1.0)
        self.assertAlmostEqual(t_single(0.0, EmitterArray((0.0,))), -1.0)
        npt.assert_allclose(t_single(1.0, EmitterArray((0.0, 0.0))), -0.28 - 0.96j, atol=1e-15)

    def test_unimodular(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            M = int(rng.integers(1, 13))
            emitters = EmitterArray(tuple(rng.uniform(-5, 5, M)), tuple(rng.uniform(0.2, 3.0, M)))
            k = rng.uniform(-20, 20, 50)
            npt.assert_allclose(np.abs(t_single(k, emitters)), 1.0, atol=1e-14)

    def test_group_delay_integral(self):
        emitters = EmitterArray((-1.0, 0.5, 2.0), (1.0, 0.5, 2.0))
        total = quad_real(lambda k: group_delay(k, emitters), -np.inf, np.inf)
        self.assertAlmostEqual(total, 2 * math.pi * 3, places=7)
        self.assertTrue(np.all(group_delay(np.linspace(-10, 10, 101), emitters) > 0))

    def test_spectrum_phase_follows_group_delay(self):
        grid = Grid(-10.0, 10.0, 2001)
        spectrum = transmission_spectrum(grid, EmitterArray((0.0, 0.0, 0.0)))
        winding = spectrum.phase[-1] - spectrum.phase[0]
        self.assertAlmostEqual(winding, trapezoid(spectrum.group_delay, grid.points), places=4)


class TestScatterCoeffs(unittest.TestCase):
    def test_known_values(self):
        npt.assert_allclose(scatter_coeffs(EmitterArray((0.0,))).C, [1.0])
        npt.assert_allclose(scatter_coeffs(EmitterArray((0.0, 1.0))).C, [1 + 1j, 1 - 1j], atol=1e-15)

    def test_degenerate(self):
        with self.assertRaises(DegenerateDetunings):
            scatter_coeffs(EmitterArray((0.0, 1e-9)))


class TestKernel(unittest.TestCase):
    def test_causal(self):
        for M in (1, 2, 5):
            self.assertEqual(kernel_single(0.5, EmitterArray.degenerate(M)), 0)
        self.assertEqual(kernel_single(0.5, EmitterArray((0.0, 1.0))), 0)

    def test_known_values(self):
        self.assertAlmostEqual(kernel_single(-1.0, EmitterArray((0.0,))), -math.exp(-0.5), places=15)
        self.assertLess(abs(kernel_single(-2.0, EmitterArray.degenerate(2))), 1e-15)

    def test_vectorized(self):
        u = np.linspace(-5.0, 1.0, 61)
        values = kernel_single(u, EmitterArray.degenerate(3))
        self.assertEqual(values.shape, u.shape)
        expected = -special.eval_genlaguerre(2, 1, -u) * np.exp(0.5 * u)
        npt.assert_allclose(values[u <= 0], expected[u <= 0], atol=1e-13)

    def test_degenerate_limit(self):
        u = np.linspace(-10.0, 0.0, 101)
        reference = kernel_single(u, EmitterArray.degenerate(3))
        for epsilon in (1e-5, 1e-4, 1e-3, 1e-2):
            spread = EmitterArray(tuple(epsilon * xi for xi in (0.0, 1.0, 3.0)))
            error = np.max(np.abs(kernel_single(u, spread) - reference)) / np.max(np.abs(reference))
            self.assertLessEqual(error, 10 * epsilon)

    def test_delta_response_minima_at_roots(self):
        for M, extent in ((6, 30.0), (10, 50.0)):
            with self.subTest(M=M):
                grid = Grid(-extent, 0.0, int(extent * 100) + 1)
                density = delta_response(grid, EmitterArray.degenerate(M)).density
                minima = np.sort(-grid.points[local_minima(density)])
                npt.assert_allclose(minima, special.roots_genlaguerre(M - 1, 1)[0], rtol=0, atol=grid.spacing)


class TestPropagation(unittest.TestCase):
    def test_no_emitters(self):
        grid = Grid(-20.0, 20.0, 801)
        wave = propagate_single(GaussianPacket1(0.5, 2.0), EmitterArray(), grid)
        npt.assert_array_equal(wave.amplitudes, wave.incoming)

    def test_norm_conservation(self):
        cases = [EmitterArray.degenerate(M) for M in (0, 1, 5, 12)] + [EmitterArray((-1.0, 0.4, 1.5))]
        for emitters in cases:
            for sigma in (0.5, 2.0, 20.0):
                for delta in (-10.0, 0.0, 3.0, 10.0):
                    with self.subTest(detunings=emitters.detunings, sigma=sigma, delta=delta):
                        packet = GaussianPacket1(delta, sigma)
                        wave = propagate_single(packet, emitters, covering_grid(packet, emitters))
                        self.assertLess(abs(wave.norm() - 1.0), 1e-8)

    def test_covering_grid(self):
        packet = GaussianPacket1(0.0, 0.5, center=2.0)
        grid = covering_grid(packet, EmitterArray.degenerate(3))
        self.assertEqual(grid.stop, 6.0)
        self.assertEqual(grid.start, 2.0 - 4.0 - 55.0)
        self.assertLessEqual(grid.spacing, 0.5 / 16)
        check_grid_resolution(grid, 0.5, EmitterArray.degenerate(3))

    def test_heterogeneous_couplings(self):
        grid = Grid(-90.0, 20.0, 2201)
        emitters = EmitterArray((0.0, 0.5), (0.5, 1.0))
        wave = propagate_single(GaussianPacket1(0.0, 2.0), emitters, grid)
        self.assertAlmostEqual(wave.norm(), 1.0, places=8)

    def test_fractionalized_narrow_packet(self):
        # a Gaussian of width σ moves each zero x0 of the kernel to x0 + σ²/x0 at leading order
        sigma = 0.05
        grid = Grid(-40.0, 3.0, 17201)
        wave = propagate_single(GaussianPacket1(0.0, sigma), EmitterArray.degenerate(10), grid)
        window = (grid.points >= -38.0) & (grid.points <= -3 * sigma)
        y = grid.points[window]
        minima = np.sort(-y[local_minima(wave.scattered_density[window])])
        self.assertEqual(minima.size, 9)
        roots = special.roots_genlaguerre(9, 1)[0]
        npt.assert_allclose(minima, roots + sigma**2 / roots, rtol=0, atol=grid.spacing)

    def test_grid_resolution(self):
        with self.assertRaises(GridTooCoarse):
            check_grid_resolution(Grid(-10.0, 10.0, 101), 2.0, EmitterArray((0.0,)))
        with self.assertRaises(GridTooCoarse):
            propagate_single(GaussianPacket1(0.0, 0.1), EmitterArray((0.0,)), Grid(-10.0, 10.0, 801))


if __name__ == "__main__":
    unittest.main()
