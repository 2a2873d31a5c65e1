import math
import unittest

import numpy as np
import numpy.testing as npt

from chiral.config.const import TMFTVariant
from chiral.errors import ContourViolation, InvalidParameter
from chiral.model import EmitterArray, GaussianPacket1, Grid
from chiral.oracle import (
    ContourSpec,
    oracle_TMFT,
    oracle_compose_M2,
    oracle_fourier_T,
    oracle_mixed_from_tm3,
    oracle_single_convolution,
    oracle_tm3,
    oracle_yudson,
)
from chiral.single_photon import incoming_packet, kernel_single, propagate_single, t_single
from chiral.two_photon import irreducible_T_distinct

ON_SHELL_POINTS = np.array([[0.3, -1.1, 0.8], [1.7, 0.4, -0.9], [-2.0, 1.2, 0.1]])


def relative_error(value, reference):
    return abs(value - reference) / abs(reference)


class TestSingleConvolution(unittest.TestCase):
    def test_no_emitters(self):
        grid = Grid(-10.0, 10.0, 41)
        packet = GaussianPacket1(0.5, 2.0)
        wave = oracle_single_convolution(packet, EmitterArray(), grid)
        npt.assert_array_equal(wave.amplitudes, incoming_packet(grid.points, packet, EmitterArray()))

    def test_matches_propagation(self):
        fine = Grid(-90.0, 20.0, 2201)
        # every 100th fine point
        coarse = Grid(-90.0, 20.0, 23)
        packet = GaussianPacket1(1.0, 2.0)
        emitters = EmitterArray((0.0,))
        propagated = propagate_single(packet, emitters, fine).amplitudes[::100]
        convolved = oracle_single_convolution(packet, emitters, coarse).amplitudes
        npt.assert_allclose(convolved, propagated, atol=1e-8)


class TestMomentumSpace(unittest.TestCase):
    def test_printed_variant_is_the_fourier_transform(self):
        emitters = EmitterArray((-0.6, 0.9))
        for p1, p2, k1 in ON_SHELL_POINTS:
            transformed = oracle_fourier_T(p1, p2, k1, emitters)
            printed = oracle_TMFT(p1, p2, k1, emitters, TMFTVariant.AS_PRINTED)
            paired = oracle_TMFT(p1, p2, k1, emitters, TMFTVariant.PAIRED)
            self.assertLess(relative_error(printed, transformed), 1e-6)
            self.assertGreater(relative_error(paired, transformed), 1e-3)

    def test_variant_from_string(self):
        emitters = EmitterArray((-0.6, 0.9))
        self.assertEqual(
            oracle_TMFT(0.3, -1.1, 0.8, emitters, "paired"),
            oracle_TMFT(0.3, -1.1, 0.8, emitters, TMFTVariant.PAIRED),
        )

    def test_composition_of_two_emitters(self):
        delta1, delta2 = -0.6, 0.9
        composed = oracle_compose_M2(ON_SHELL_POINTS, delta1, delta2)
        emitters = EmitterArray((delta1, delta2))
        for value, (p1, p2, k1) in zip(composed, ON_SHELL_POINTS):
            self.assertLess(relative_error(value, oracle_TMFT(p1, p2, k1, emitters)), 1e-6)

    def test_reducible_composition(self):
        emitters = EmitterArray((-0.6, 0.9))
        composed = oracle_compose_M2(ON_SHELL_POINTS, -0.6, 0.9, irreducible=False)
        expected = t_single(ON_SHELL_POINTS[:, 0], emitters) * t_single(ON_SHELL_POINTS[:, 1], emitters)
        npt.assert_allclose(composed, expected, rtol=1e-14)

    def test_composition_needs_distinct_detunings(self):
        with self.assertRaises(InvalidParameter):
            oracle_compose_M2(ON_SHELL_POINTS, 0.5, 0.5)


class TestCoordinateTMatrix(unittest.TestCase):
    def test_ordering(self):
        emitters = EmitterArray((0.0,))
        self.assertNotEqual(oracle_tm3((0.0, 1.0), (3.0, 2.0), emitters), 0)
        with self.assertRaises(InvalidParameter):
            oracle_tm3((1.0, 0.0), (3.0, 2.0), emitters)

    def test_single_emitter(self):
        # -2 C²/(iκ) e^{(u1+u2)/2} for one resonant emitter
        value = oracle_tm3((0.0, 1.0), (3.0, 2.0), EmitterArray((0.0,)))
        npt.assert_allclose(value, 2j * math.exp(-2.0), rtol=1e-14)

    def test_mixed_representation(self):
        emitters = EmitterArray((-0.4, 0.7))
        # pair energies away from 2·mean detuning = 0.3, where T vanishes
        for a, b, E in ((0.5, 1.0, 1.2), (2.0, 0.25, -1.1)):
            expected = irreducible_T_distinct(a, b, E, emitters)
            self.assertGreater(abs(expected), 1e-3)
            npt.assert_allclose(oracle_mixed_from_tm3(a, b, E, emitters), expected, rtol=1e-7, atol=1e-12)
        with self.assertRaises(InvalidParameter):
            oracle_mixed_from_tm3(0.0, 1.0, 0.3, emitters)


class TestContour(unittest.TestCase):
    def test_single_photon_kernel(self):
        for emitters in (EmitterArray((0.0,)), EmitterArray((-0.4, 0.7))):
            for z, y in ((0.5, -1.0), (1.0, -4.5)):
                npt.assert_allclose(
                    oracle_yudson(1, emitters, [z], [y]), kernel_single(y - z, emitters), atol=1e-6
                )

    def test_two_photons_one_emitter(self):
        y1, y2, z2, z1 = -3.0, -2.4, -1.5, -0.8
        value = oracle_yudson(2, EmitterArray((0.0,)), [z1, z2], [y1, y2])
        expected = -math.exp(0.5 * ((y1 - z1) + (y2 - z2)))
        self.assertLess(relative_error(value, expected), 1e-5)

    def test_two_photons_matches_coordinate_form(self):
        emitters = EmitterArray((-0.4, 0.7))
        y, z = (-2.5, -1.8), (0.2, -0.9)
        expected = kernel_single(y[0] - z[0], emitters) * kernel_single(y[1] - z[1], emitters) + 1j * oracle_tm3(
            y, z, emitters
        )
        self.assertLess(relative_error(oracle_yudson(2, emitters, z, y), expected), 1e-5)

    def test_deformed_contours_agree(self):
        emitters = EmitterArray((-0.4, 0.7))
        y, z = (-2.5, -1.8), (0.2, -0.9)
        reference = oracle_yudson(2, emitters, z, y)
        single = oracle_yudson(1, emitters, [0.5], [-1.0])
        for amount in (-0.3, 0.3):
            with self.subTest(amount=amount):
                contour = ContourSpec().shifted(amount)
                self.assertEqual(contour.offsets, (amount, 1.5 + amount))
                self.assertLess(relative_error(oracle_yudson(2, emitters, z, y, contour), reference), 1e-5)
                self.assertLess(relative_error(oracle_yudson(1, emitters, [0.5], [-1.0], contour), single), 1e-5)

    def test_contour_violations(self):
        emitters = EmitterArray((0.0,))
        with self.assertRaises(ContourViolation):
            oracle_yudson(2, emitters, [0.0, -1.0], [-2.0, -1.5], ContourSpec(offsets=(0.0, 0.5)))
        with self.assertRaises(ContourViolation):
            oracle_yudson(1, emitters, [0.0], [-1.0], ContourSpec(offsets=(-0.6,)))
        # one photon retarded, the other advanced
        with self.assertRaises(ContourViolation):
            oracle_yudson(2, emitters, [0.0, 1.0], [-1.0, 2.0])

    def test_invalid_arguments(self):
        emitters = EmitterArray((0.0,))
        with self.assertRaises(InvalidParameter):
            oracle_yudson(3, emitters, [0.0, 1.0, 2.0], [-1.0, -0.5, 0.0])
        with self.assertRaises(InvalidParameter):
            oracle_yudson(1, emitters, [0.0], [0.0])
        with self.assertRaises(InvalidParameter):
            oracle_yudson(2, emitters, [0.0], [-1.0])


if __name__ == "__main__":
    unittest.main()
