"""
Unit tests for the special functions
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import special

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import ConvergenceError, DomainError
from specfun import (
    SERIES_SWITCH, SpecialValue, bessel_i, kummer_1f1, kummer_shifted_polynomial, ln_gamma,
    log_bessel_i, reg_lower_inc_gamma,
)


def bessel_series(nu, x, terms=60):
    """Direct summation of the defining series"""
    return math.fsum(
        (x / 2.0) ** (2 * j + nu) / (math.factorial(j) * math.gamma(j + nu + 1.0))
        for j in range(terms)
    )


class TestLnGamma(unittest.TestCase):
    """Test ln Gamma spot values and domain"""

    def test_spot_values(self):
        """Test Gamma(1) = 1, Gamma(5) = 24 and Gamma(1/2) = sqrt(pi)"""
        self.assertEqual(ln_gamma(1.0), 0.0)
        self.assertAlmostEqual(ln_gamma(5.0), math.log(24.0), delta=1e-12 * math.log(24.0))
        self.assertAlmostEqual(ln_gamma(0.5), 0.5723649429247001, delta=1e-12)

    def test_relative_accuracy_range(self):
        """Test agreement with math.lgamma on [1e-3, 1e3]"""
        for x in np.geomspace(1e-3, 1e3, 25):
            expected = math.lgamma(x)
            self.assertLessEqual(abs(ln_gamma(x) - expected), 1e-12 * max(1.0, abs(expected)))

    def test_domain_errors(self):
        """Test non-positive, infinite and NaN inputs are rejected"""
        for bad in (0.0, -1.0, math.inf, math.nan):
            with self.assertRaises(DomainError):
                ln_gamma(bad)


class TestIncompleteGamma(unittest.TestCase):
    """Test the regularized lower incomplete Gamma function"""

    def test_zero_upper_limit(self):
        self.assertEqual(reg_lower_inc_gamma(2.5, 0.0), 0.0)

    def test_exponential_case(self):
        """Test P(1, x) = 1 - exp(-x)"""
        for x in (0.1, 1.0, 3.0, 10.0):
            self.assertAlmostEqual(reg_lower_inc_gamma(1.0, x), -math.expm1(-x), places=14)

    def test_infinite_limit(self):
        self.assertEqual(reg_lower_inc_gamma(3.0, math.inf), 1.0)

    def test_monotone_in_x(self):
        """Test monotonicity on random increasing pairs"""
        rng = np.random.default_rng(7)
        s = rng.uniform(0.1, 10.0, 200)
        lo = rng.uniform(0.0, 20.0, 200)
        hi = lo + rng.uniform(0.0, 5.0, 200)
        self.assertTrue(np.all(reg_lower_inc_gamma(s, hi) >= reg_lower_inc_gamma(s, lo)))

    def test_domain_errors(self):
        for s, x in ((0.0, 1.0), (-1.0, 1.0), (1.0, -0.5), (math.nan, 1.0), (1.0, math.nan)):
            with self.assertRaises(DomainError):
                reg_lower_inc_gamma(s, x)


class TestBesselI(unittest.TestCase):
    """Test the modified Bessel function of the first kind"""

    def test_values_at_zero(self):
        """Test I_0(0) = 1 and I_nu(0) = 0 for nu > 0"""
        self.assertEqual(bessel_i(0.0, 0.0).exp(), 1.0)
        for nu in (0.25, 0.5, 1.5, 3.0):
            self.assertEqual(bessel_i(nu, 0.0).exp(), 0.0)

    def test_series_oracle(self):
        """Test (0.5, 1.0) against direct series and the closed form sqrt(2/(pi x)) sinh x"""
        value = bessel_i(0.5, 1.0).exp()
        self.assertLessEqual(abs(value - bessel_series(0.5, 1.0)), 1e-10 * value)
        closed = math.sqrt(2.0 / math.pi) * math.sinh(1.0)
        self.assertLessEqual(abs(value - closed), 1e-10 * value)

    def test_matches_series_below_switch(self):
        """Test relative error <= 1e-10 against the series on x <= 30"""
        for nu in (-0.5, 0.0, 0.5, 1.0, 2.75):
            for x in (0.01, 0.5, 2.0, 10.0, 25.0, SERIES_SWITCH):
                expected = bessel_series(nu, x, terms=120)
                self.assertLessEqual(abs(bessel_i(nu, x).exp() - expected), 1e-10 * expected,
                                     msg=f"nu={nu}, x={x}")

    def test_small_argument_asymptote(self):
        """Test I_nu(x) Gamma(nu + 1) / (x/2)^nu -> 1 as x -> 0"""
        for nu in (0.25, 0.5, 1.0, 2.0):
            for x in (1e-4, 1e-3):
                ratio = bessel_i(nu, x).exp() * math.gamma(nu + 1.0) / (x / 2.0) ** nu
                self.assertGreaterEqual(ratio, 1.0 - 1e-3)
                self.assertLessEqual(ratio, 1.0 + 1e-3)

    def test_large_argument_log_scale(self):
        """Test large arguments switch to log scale without overflow"""
        value = bessel_i(1.0, 1000.0)
        self.assertTrue(value.log_scale)
        expected = math.log(special.ive(1.0, 1000.0)) + 1000.0
        self.assertAlmostEqual(value.log(), expected, delta=1e-12 * expected)

    def test_continuity_at_switch(self):
        below = log_bessel_i(1.3, SERIES_SWITCH)
        above = log_bessel_i(1.3, SERIES_SWITCH * (1.0 + 1e-12))
        self.assertAlmostEqual(below, above, delta=1e-9)

    def test_log_scale_round_trip(self):
        """Test plain and log-scale representations agree when both are representable"""
        plain = bessel_i(2.0, 50.0, log_scale=False)
        logged = bessel_i(2.0, 50.0, log_scale=True)
        self.assertLessEqual(abs(logged.exp() - plain.exp()), 1e-12 * plain.exp())

    def test_vectorised_log(self):
        nu = np.array([0.0, 1.0, 2.0])
        x = np.array([0.0, 5.0, 40.0])
        out = log_bessel_i(nu, x)
        self.assertEqual(out.shape, (3,))
        self.assertEqual(out[0], 0.0)
        self.assertAlmostEqual(out[2], math.log(special.ive(2.0, 40.0)) + 40.0, places=10)

    def test_domain_errors(self):
        for nu, x in ((-1.0, 1.0), (-2.0, 1.0), (0.5, -1.0), (math.nan, 1.0), (0.5, math.nan), (-0.5, 0.0)):
            with self.assertRaises(DomainError):
                bessel_i(nu, x)


class TestSpecialValue(unittest.TestCase):
    """Test the SpecialValue container"""

    def test_non_finite_plain_value_rejected(self):
        with self.assertRaises(DomainError):
            SpecialValue(value=math.inf)

    def test_log_scale_value(self):
        value = SpecialValue(value=2.0, log_scale=True, sign=-1)
        self.assertAlmostEqual(value.exp(), -math.exp(2.0), places=12)
        self.assertEqual(value.log(), 2.0)
        self.assertEqual(float(SpecialValue(value=3.5)), 3.5)


class TestKummer(unittest.TestCase):
    """Test the confluent hypergeometric function"""

    GRID_PARAMS = (0.5, 1.5, 3.0)
    GRID_X = np.linspace(0.0, 20.0, 41)

    def test_zero_argument(self):
        for a, c in ((0.5, 1.5), (-3.0, 2.0), (10.0, 0.25)):
            self.assertEqual(kummer_1f1(a, c, 0.0).exp(), 1.0)

    def test_shift_by_one(self):
        """Test exp(-x) 1F1(c + 1, c, x) = 1 + x / c"""
        for c in self.GRID_PARAMS:
            for x in self.GRID_X:
                value = math.exp(-x) * kummer_1f1(c + 1.0, c, x).exp()
                expected = 1.0 + x / c
                self.assertLessEqual(abs(value - expected), 1e-10 * max(1.0, expected))

    def test_shift_by_three(self):
        """Test the closed form of exp(-x) 1F1(c + 3, c, x)"""
        for c in self.GRID_PARAMS:
            for x in self.GRID_X:
                expected = (1.0 + 3.0 * x / c + 3.0 * x ** 2 / (c * (c + 1.0))
                            + x ** 3 / (c * (c + 1.0) * (c + 2.0)))
                value = math.exp(-x) * kummer_1f1(c + 3.0, c, x).exp()
                self.assertLessEqual(abs(value - expected), 1e-10 * max(1.0, expected))
                poly = kummer_shifted_polynomial(3, c, x)
                self.assertLessEqual(abs(poly - expected), 1e-10 * max(1.0, expected))

    def test_kummer_transformation_residual(self):
        """Test 1F1(a, c, -x) = exp(-x) 1F1(c - a, c, x) on the parameter grid"""
        for a in self.GRID_PARAMS:
            for c in self.GRID_PARAMS:
                for x in self.GRID_X:
                    left = kummer_1f1(a, c, -x).exp()
                    right = math.exp(-x) * kummer_1f1(c - a, c, x).exp()
                    self.assertLessEqual(abs(left - right), 1e-10 * max(1.0, abs(left)))

    def test_negative_argument_oracles(self):
        """Test 1F1(a, a, -x) = exp(-x) and 1F1(1, 2, -x) = (1 - exp(-x)) / x"""
        for x in (0.5, 5.0, 20.0, 40.0):
            self.assertAlmostEqual(kummer_1f1(1.5, 1.5, -x).exp(), math.exp(-x), delta=1e-14)
            expected = -math.expm1(-x) / x
            self.assertLessEqual(abs(kummer_1f1(1.0, 2.0, -x).exp() - expected), 1e-12 * expected)

    def test_terminating_series(self):
        """Test 1F1(-2, 1, x) = 1 - 2x + x^2 / 2 for both signs of x"""
        for x in (-3.0, -0.5, 0.7, 4.0):
            self.assertAlmostEqual(kummer_1f1(-2.0, 1.0, x).exp(), 1.0 - 2.0 * x + 0.5 * x * x, places=12)

    def test_overflow_goes_to_log_scale(self):
        """Test 1F1(1, 1, x) = exp(x) beyond double range"""
        value = kummer_1f1(1.0, 1.0, 800.0)
        self.assertTrue(value.log_scale)
        self.assertAlmostEqual(value.log(), 800.0, delta=1e-12 * 800.0)

    def test_invalid_c(self):
        for c in (0.0, -1.0, -4.0):
            with self.assertRaises(DomainError):
                kummer_1f1(1.0, c, 1.0)

    def test_nan_rejected(self):
        with self.assertRaises(DomainError):
            kummer_1f1(math.nan, 1.0, 1.0)

    def test_non_convergence(self):
        with self.assertRaises(ConvergenceError):
            kummer_1f1(1.0, 1.0, 1e6)

    def test_shifted_polynomial_domain(self):
        with self.assertRaises(DomainError):
            kummer_shifted_polynomial(1.5, 1.0, 1.0)
        with self.assertRaises(DomainError):
            kummer_shifted_polynomial(2, -1.0, 1.0)


def run_tests():
    """Run all tests"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestLnGamma))
    suite.addTests(loader.loadTestsFromTestCase(TestIncompleteGamma))
    suite.addTests(loader.loadTestsFromTestCase(TestBesselI))
    suite.addTests(loader.loadTestsFromTestCase(TestSpecialValue))
    suite.addTests(loader.loadTestsFromTestCase(TestKummer))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
