import math
import unittest

from types import SimpleNamespace
from unittest.mock import patch

import numpy as np

from chiral import acceptance
from chiral.acceptance import Criterion, criterion_groups, fit_loglog_slope, run_acceptance
from chiral.errors import GridTooCoarse, InvalidParameter


class TestHelpers(unittest.TestCase):
    def test_fit_loglog_slope(self):
        self.assertAlmostEqual(fit_loglog_slope([1, 2, 4], [1, 4, 16]), 2.0, places=12)
        self.assertAlmostEqual(fit_loglog_slope([16, 32, 64], [3.0, 0.375, 0.046875]), -3.0, places=12)
        with self.assertRaises(InvalidParameter):
            fit_loglog_slope([1, 2], [1, -1])

    def test_groups(self):
        self.assertEqual(
            criterion_groups(),
            [
                "degenerate",
                "determinism",
                "disorder",
                "laguerre",
                "large_delta",
                "oracle",
                "parity",
                "permutation",
                "unitarity",
            ],
        )


class TestRunAcceptance(unittest.TestCase):
    def test_parity_group(self):
        results = run_acceptance("parity")
        self.assertEqual([result.name for result in results], ["even_parity_unscattered", "odd_parity_closed_form"])
        for result in results:
            self.assertTrue(result.passed, result.detail)
            self.assertLessEqual(result.measured, result.tolerance)

    def test_permutation_group(self):
        (result,) = run_acceptance("permutation")
        self.assertTrue(result.passed, result.detail)
        self.assertEqual(result.as_dict()["group"], "permutation")

    def test_tolerance_override_keeps_measured_value(self):
        (default,) = run_acceptance("permutation")
        (strict,) = run_acceptance("permutation", {"emitter_order_invariance": -1.0})
        self.assertEqual(strict.measured, default.measured)
        self.assertEqual(strict.tolerance, -1.0)
        self.assertFalse(strict.passed)

    def test_laguerre_group(self):
        (result,) = run_acceptance("laguerre")
        self.assertTrue(result.passed, result.detail)
        self.assertLessEqual(result.measured, 1.0)

    def test_large_delta_group(self):
        self.assertEqual(acceptance.LARGE_DELTA_VALUES, (8.0, 16.0, 32.0, 64.0))
        results = {result.name: result for result in run_acceptance("large_delta")}
        self.assertEqual(results["large_delta_tail_scaling"].tolerance, 0.1)
        self.assertEqual(results["large_delta_residual_scaling"].tolerance, 0.2)
        self.assertAlmostEqual(results["large_delta_tail_scaling"].measured, -2.0, delta=0.1)
        self.assertAlmostEqual(results["large_delta_residual_scaling"].measured, -3.0, delta=0.2)
        for result in results.values():
            self.assertTrue(result.passed, result.detail)

    def test_robustness_requires_a_dip(self):
        (robustness,) = [item for item in acceptance.CRITERIA if item.name == "disorder_antibunching_robustness"]
        # the odd-M output peaks at d=0 for sigma=2, so there is no depth to retain
        with patch.object(acceptance, "ROBUSTNESS_SIGMA", 2.0):
            measured, passed, detail = robustness.evaluate(robustness.tolerance, 1)
        self.assertFalse(passed)
        self.assertLess(measured, 0)
        self.assertIn("no dip", detail)

    def test_standard_error_sizes(self):
        (scaling,) = [item for item in acceptance.CRITERIA if item.name == "disorder_standard_error_scaling"]
        sizes = []

        def ideal_ensemble(config):
            sizes.append(config.n_samples)
            std_error = np.full(acceptance.TWO_PHOTON_GRID.n_points, config.n_samples**-0.5)
            return SimpleNamespace(std_error=std_error)

        with patch.object(acceptance, "ensemble_average", ideal_ensemble):
            measured, passed, detail = scaling.evaluate(scaling.tolerance, 1)
        self.assertEqual(sizes, [100, 1000, 10000])
        self.assertAlmostEqual(measured, 1.0, places=12)
        self.assertTrue(passed)

    def test_unknown_names(self):
        with self.assertRaises(InvalidParameter):
            run_acceptance("nonexistent")
        with self.assertRaises(InvalidParameter):
            run_acceptance("parity", {"no_such_criterion": 1.0})

    def test_failing_criterion_is_recorded(self):
        def broken(tolerance, seed):
            raise GridTooCoarse("spacing too large")

        with patch.object(acceptance, "CRITERIA", [Criterion("broken", "unitarity", 1.0, broken)]):
            (result,) = run_acceptance()
        self.assertFalse(result.passed)
        self.assertTrue(math.isnan(result.measured))
        self.assertIn("GridTooCoarse", result.detail)


if __name__ == "__main__":
    unittest.main()
