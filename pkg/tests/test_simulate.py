"""
Unit tests for grids, random streams, ensembles and path simulation
"""

import math
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy import stats

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from bounds import EstimateWithError
from errors import BesselRedirectError, CouplingError, DomainError
from instability import ks_critical_value, ks_statistic
from model import BesselSqParams, CirParams, moment, transition_cdf
from simulate import (
    CHUNK_PATHS, PathEnsemble, RngStream, TimeGrid, bessel_sq_exact_transition, check_coupled,
    cir_exact_transition, simulate, simulate_coupled, simulate_exact, simulate_smoothed_bessel,
)

CIR = CirParams(x0=1.0, a=2.0, b=1.0, sigma=1.0)
BESQ = BesselSqParams(y0=1.0, a=2.0, sigma=1.0)


class TestTimeGrid(unittest.TestCase):
    """Test grid construction and lookup"""

    def test_uniform(self):
        grid = TimeGrid.uniform(1.0, 4)
        np.testing.assert_array_equal(grid.t, [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertTrue(grid.is_uniform)
        self.assertEqual(grid.n_steps, 4)
        self.assertEqual(len(grid), 5)
        self.assertFalse(grid.t.flags.writeable)

    def test_large_uniform_grid_stays_uniform(self):
        grid = TimeGrid.uniform(1e4, 10 ** 6)
        self.assertTrue(grid.is_uniform)
        self.assertEqual(grid.T, 1e4)

    def test_from_times_detects_uniform(self):
        self.assertTrue(TimeGrid.from_times([0.0, 0.5, 1.0, 1.5]).is_uniform)
        self.assertFalse(TimeGrid.from_times([0.0, 0.5, 2.0]).is_uniform)

    def test_invalid_grids(self):
        for times in ([0.0], [0.1, 0.5], [0.0, 0.5, 0.5], [0.0, 1.0, 0.5], [0.0, math.nan]):
            with self.assertRaises(DomainError):
                TimeGrid(times)
        with self.assertRaises(DomainError):
            TimeGrid.uniform(0.0, 10)
        with self.assertRaises(DomainError):
            TimeGrid.uniform(1.0, 2.5)

    def test_graded(self):
        grid = TimeGrid.graded(100.0, 0.01, 1.0, growth=1.01)
        self.assertEqual(grid.T, 100.0)
        self.assertAlmostEqual(grid.dt()[0], 0.01)
        self.assertLessEqual(grid.dt().max(), 1.0 + 1e-12)
        self.assertFalse(grid.is_uniform)

    def test_indices_of(self):
        grid = TimeGrid.uniform(2.0, 8)
        np.testing.assert_array_equal(grid.indices_of([0.5, 2.0]), [2, 8])
        with self.assertRaises(DomainError):
            grid.indices_of([0.3])

    def test_including(self):
        grid = TimeGrid.graded(50.0, 0.3, 2.0).including([10.0, 25.0])
        idx = grid.indices_of([10.0, 25.0, 50.0])
        self.assertEqual(grid.t[idx[0]], 10.0)
        self.assertEqual(grid.t[idx[1]], 25.0)
        self.assertTrue(np.all(np.diff(grid.t) > 0))
        with self.assertRaises(DomainError):
            grid.including([60.0])

    def test_subsample(self):
        grid = TimeGrid.uniform(1.0, 10)
        sub = grid.subsample([0, 2, 4, 6, 8, 10])
        self.assertTrue(sub.is_uniform)
        self.assertAlmostEqual(sub.uniform_step, 0.2)
        self.assertFalse(grid.subsample([0, 3, 10]).is_uniform)


class TestRngStream(unittest.TestCase):
    """Test counter-based streams"""

    def test_replay(self):
        np.testing.assert_array_equal(RngStream(5, 3).uniform(100), RngStream(5, 3).uniform(100))
        np.testing.assert_array_equal(RngStream(5, 3).normal(10), RngStream(5, 3).normal(10))

    def test_streams_differ(self):
        self.assertFalse(np.array_equal(RngStream(5, 3).uniform(10), RngStream(5, 4).uniform(10)))
        self.assertFalse(np.array_equal(RngStream(5, 3).uniform(10), RngStream(6, 3).uniform(10)))

    def test_open_interval(self):
        u = RngStream(1, 0).uniform(10000)
        self.assertTrue(np.all((u > 0.0) & (u < 1.0)))
        self.assertIsInstance(RngStream(1, 0).uniform(), float)

    def test_invalid_seed(self):
        with self.assertRaises(DomainError):
            RngStream(-1)
        with self.assertRaises(DomainError):
            RngStream(2 ** 64)


class TestExactTransition(unittest.TestCase):
    """Test the Poisson-Gamma inverse-transform sampler"""

    def _ks_check(self, p, t, sampler):
        draws = sampler(p, 1.0, t, np.random.default_rng(20240601), size=10000)
        statistic = ks_statistic(draws, lambda x: transition_cdf(p, t, x))
        self.assertLess(statistic, ks_critical_value(draws.size, level=0.001), msg=f"{p.tag()} t={t}")

    def test_cir_law(self):
        for t in (0.5, 2.0):
            self._ks_check(CIR, t, cir_exact_transition)

    def test_bessel_law(self):
        for t in (0.5, 2.0):
            self._ks_check(BESQ, t, bessel_sq_exact_transition)

    def test_stationary_law_is_preserved(self):
        law = stats.gamma(a=2.0 * CIR.a / CIR.sigma ** 2, scale=CIR.sigma ** 2 / (2.0 * CIR.b))
        start = law.rvs(size=10000, random_state=np.random.default_rng(77))
        draws = cir_exact_transition(CIR, start, 0.5, np.random.default_rng(78))
        self.assertEqual(draws.shape, start.shape)
        self.assertLess(ks_statistic(draws, law.cdf), ks_critical_value(draws.size, level=0.001))

    def test_bessel_leaves_zero_immediately(self):
        draws = bessel_sq_exact_transition(BESQ, 0.0, 0.5, RngStream(5, 2), size=100000)
        self.assertTrue(np.all(draws > 0))

    def test_shapes(self):
        rng = RngStream(1, 0)
        self.assertIsInstance(cir_exact_transition(CIR, 1.0, 0.5, rng), float)
        self.assertEqual(cir_exact_transition(CIR, 1.0, 0.5, rng, size=5).shape, (5,))
        self.assertEqual(bessel_sq_exact_transition(BESQ, np.ones(7), 0.5, rng).shape, (7,))

    def test_deterministic(self):
        first = cir_exact_transition(CIR, 1.0, 0.5, RngStream(9, 1), size=50)
        second = cir_exact_transition(CIR, 1.0, 0.5, RngStream(9, 1), size=50)
        np.testing.assert_array_equal(first, second)

    def test_errors(self):
        rng = RngStream(1, 0)
        with self.assertRaises(DomainError):
            cir_exact_transition(CIR, -1.0, 0.5, rng)
        with self.assertRaises(DomainError):
            cir_exact_transition(CIR, 1.0, 0.0, rng)
        with self.assertRaises(BesselRedirectError):
            cir_exact_transition(BESQ, 1.0, 0.5, rng)
        with self.assertRaises(DomainError):
            cir_exact_transition(CIR, 1.0, 0.5, rng=object())
        with self.assertRaises(DomainError):
            cir_exact_transition(CirParams(x0=1.0, a=0.1, b=1.0, sigma=1.0), 1.0, 0.5, rng)
        with self.assertRaises(DomainError):
            bessel_sq_exact_transition(BesselSqParams(y0=1.0, a=0.2, sigma=1.0), 1.0, 0.5, rng)


class TestSimulateExact(unittest.TestCase):
    """Test exact-transition ensembles"""

    def test_shape_and_start(self):
        grid = TimeGrid.uniform(1.0, 10)
        e = simulate_exact(CIR, grid, 20, seed=3)
        self.assertEqual(e.values.shape, (20, 11))
        np.testing.assert_array_equal(e.values[:, 0], 1.0)
        self.assertTrue(np.all(e.values >= 0))
        self.assertEqual(e.params_tag, CIR.tag())

    def test_worker_count_does_not_change_paths(self):
        grid = TimeGrid.uniform(1.0, 5)
        n = CHUNK_PATHS * 2 + 37
        one = simulate_exact(BESQ, grid, n, seed=11, workers=1)
        many = simulate_exact(BESQ, grid, n, seed=11, workers=3)
        np.testing.assert_array_equal(one.values, many.values)

    def test_path_prefix_is_stable(self):
        grid = TimeGrid.uniform(1.0, 5)
        small = simulate_exact(CIR, grid, 10, seed=4)
        large = simulate_exact(CIR, grid, 30, seed=4)
        np.testing.assert_array_equal(small.values, large.values[:10])

    def test_record_stride(self):
        grid = TimeGrid.uniform(1.0, 10)
        e = simulate_exact(CIR, grid, 5, seed=1, record_stride=3)
        np.testing.assert_allclose(e.times, [0.0, 0.3, 0.6, 0.9, 1.0])
        full = simulate_exact(CIR, grid, 5, seed=1)
        np.testing.assert_array_equal(e.values, full.values[:, [0, 3, 6, 9, 10]])

    def test_mean_matches_moment(self):
        grid = TimeGrid.from_times([0.0, 0.5, 1.0])
        for p in (CIR, BESQ):
            e = simulate_exact(p, grid, 20000, seed=8)
            for j, t in ((1, 0.5), (2, 1.0)):
                est = EstimateWithError.from_samples(e.values[:, j])
                self.assertLess(abs(est.mean - moment(p, t, 1)), 4.0 * est.stderr)

    def test_invalid_run(self):
        grid = TimeGrid.uniform(1.0, 4)
        with self.assertRaises(DomainError):
            simulate_exact(CIR, grid, 0, seed=1)
        with self.assertRaises(DomainError):
            simulate_exact(CIR, grid, 5, seed=-1)
        with self.assertRaises(DomainError):
            simulate(CIR, grid, 5, seed=1, method='milstein')
        with self.assertRaises(DomainError):
            simulate_exact(CirParams(x0=1.0, a=0.1, b=1.0, sigma=1.0), grid, 4, seed=1)


class TestCoupledEuler(unittest.TestCase):
    """Test coupled full-truncation Euler runs"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = TimeGrid.uniform(1.0, 64)

    def test_identical_models_identical_paths(self):
        e1, e2 = simulate_coupled([CIR, CIR], self.grid, 50, seed=2)
        np.testing.assert_array_equal(e1.values, e2.values)
        check_coupled(e1, e2)

    def test_dispatcher_matches_coupled(self):
        single = simulate(CIR, self.grid, 40, seed=2, method='euler')
        pair = simulate_coupled([CIR, BESQ], self.grid, 40, seed=2)
        np.testing.assert_array_equal(single.values, pair[0].values)
        self.assertEqual(single.metadata['method'], 'euler')

    def test_coarsened_grid(self):
        fine = simulate_coupled([CIR], self.grid, 10, seed=2)[0]
        coarse = simulate_coupled([CIR], self.grid, 10, seed=2, coarsen=4)[0]
        self.assertEqual(coarse.n_times, 17)
        np.testing.assert_allclose(coarse.times, fine.times[::4])

    def test_record_stride_aligns_fine_and_coarse(self):
        fine = simulate_coupled([CIR], self.grid, 10, seed=2, record_stride=8)[0]
        coarse = simulate_coupled([CIR], self.grid, 10, seed=2, record_stride=2, coarsen=4)[0]
        self.assertTrue(fine.grid.same_as(coarse.grid))

    def test_requirements(self):
        with self.assertRaises(CouplingError):
            simulate_coupled([CIR, CirParams(x0=2.0, a=2.0, b=0.5, sigma=1.0)], self.grid, 5, seed=1)
        with self.assertRaises(DomainError):
            simulate_coupled([CIR], TimeGrid.from_times([0.0, 0.1, 0.5]), 5, seed=1)
        with self.assertRaises(DomainError):
            simulate_coupled([CIR], self.grid, 5, seed=1, coarsen=3)
        with self.assertRaises(DomainError):
            simulate_coupled([CirParams(x0=1.0, a=0.2, b=1.0, sigma=1.0)], self.grid, 5, seed=1)

    def test_check_coupled_rejects_mismatch(self):
        e1 = simulate_coupled([CIR], self.grid, 5, seed=1)[0]
        e2 = simulate_coupled([CIR], self.grid, 5, seed=2)[0]
        e3 = simulate_coupled([CIR], TimeGrid.uniform(1.0, 32), 5, seed=1)[0]
        with self.assertRaises(CouplingError):
            check_coupled(e1, e2)
        with self.assertRaises(CouplingError):
            check_coupled(e1, e3)

    def test_square_root_of_bessel_tracks_smoothed_equation(self):
        """Test sqrt(Y) for sigma = 2 follows dV = (a - 1) / (2V) dt + dW on shared noise"""
        grid = TimeGrid.uniform(1.0, 2000)
        besq = BesselSqParams(y0=1.0, a=3.0, sigma=2.0)
        y = simulate_coupled([besq], grid, 400, seed=12)[0]
        v = simulate_smoothed_bessel(1e-3, 1.0, 1.0, grid, 400, seed=12)
        gap = np.mean(np.abs(np.sqrt(y.terminal) - v.terminal))
        self.assertLess(gap, 0.05)


class TestSmoothedBessel(unittest.TestCase):
    """Test the smoothed Bessel Euler scheme"""

    def test_values_may_be_negative(self):
        grid = TimeGrid.uniform(10.0, 200)
        e = simulate_smoothed_bessel(1.0, 0.0, 0.0, grid, 200, seed=1)
        self.assertFalse(e.nonnegative)
        self.assertTrue(np.any(e.values < 0))

    def test_zero_drift_is_brownian(self):
        grid = TimeGrid.uniform(1.0, 100)
        e = simulate_smoothed_bessel(1.0, 0.0, 0.0, grid, 4000, seed=5)
        est = EstimateWithError.from_samples(e.terminal ** 2)
        self.assertLess(abs(est.mean - 1.0), 4.0 * est.stderr)

    def test_smaller_eps_dominates_pathwise(self):
        """Test that a shared Brownian path orders the ensembles by eps"""
        grid = TimeGrid.uniform(1.0, 200)
        wide = simulate_smoothed_bessel(1.0, 1.0, 0.5, grid, 300, seed=12)
        narrow = simulate_smoothed_bessel(0.5, 1.0, 0.5, grid, 300, seed=12)
        self.assertTrue(np.all(narrow.values >= wide.values - 1e-12))
        self.assertTrue(np.any(narrow.terminal > wide.terminal))

    def test_invalid_parameters(self):
        grid = TimeGrid.uniform(1.0, 10)
        with self.assertRaises(DomainError):
            simulate_smoothed_bessel(0.0, 1.0, 1.0, grid, 5, seed=1)
        with self.assertRaises(DomainError):
            simulate_smoothed_bessel(1.0, -1.0, 1.0, grid, 5, seed=1)
        with self.assertRaises(DomainError):
            simulate_smoothed_bessel(1.0, 1.0, math.nan, grid, 5, seed=1)

    def test_non_monotone_step_is_logged(self):
        grid = TimeGrid.uniform(10.0, 2)
        with self.assertLogs('sqd_simulate', level='DEBUG') as logs:
            simulate_smoothed_bessel(0.01, 1.0, 1.0, grid, 2, seed=1)
        self.assertTrue(any('not monotone' in line for line in logs.output))


class TestPathEnsembleIO(unittest.TestCase):
    """Test ensemble validation and serialization"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.ensemble = simulate_exact(CIR, TimeGrid.uniform(1.0, 8), 6, seed=77)

    def tearDown(self):
        self.tmp.cleanup()

    def test_validation(self):
        grid = TimeGrid.uniform(1.0, 2)
        with self.assertRaises(DomainError):
            PathEnsemble(grid=grid, values=np.ones((2, 4)), params_tag='', seed=0)
        with self.assertRaises(DomainError):
            PathEnsemble(grid=grid, values=-np.ones((2, 3)), params_tag='', seed=0)
        PathEnsemble(grid=grid, values=-np.ones((2, 3)), params_tag='', seed=0, nonnegative=False)

    def test_csv_round_trip(self):
        path = self.ensemble.to_csv(self.root / 'e.csv')
        back = PathEnsemble.from_csv(path)
        np.testing.assert_array_equal(back.values, self.ensemble.values)
        np.testing.assert_array_equal(back.times, self.ensemble.times)
        self.assertEqual(back.seed, 77)
        self.assertEqual(back.params_tag, CIR.tag())
        header = path.read_text(encoding='utf-8').splitlines()[0]
        self.assertEqual(len(header.split(',')), 9)

    def test_binary_round_trip(self):
        path = self.ensemble.to_binary(self.root / 'e.bin')
        self.assertEqual(path.read_bytes()[:4], b'SQDE')
        back = PathEnsemble.from_binary(path)
        np.testing.assert_array_equal(back.values, self.ensemble.values)
        self.assertEqual(back.seed, 77)

    def test_bad_magic(self):
        path = self.ensemble.to_binary(self.root / 'e.bin')
        raw = bytearray(path.read_bytes())
        raw[:4] = b'XXXX'
        path.write_bytes(bytes(raw))
        with self.assertRaises(DomainError):
            PathEnsemble.from_binary(path)

    def test_same_seed_same_bytes(self):
        again = simulate_exact(CIR, TimeGrid.uniform(1.0, 8), 6, seed=77, workers=2)
        first = self.ensemble.to_csv(self.root / 'a.csv')
        second = again.to_csv(self.root / 'b.csv')
        self.assertEqual(first.read_bytes(), second.read_bytes())


def run_tests():
    """Run all tests"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestTimeGrid))
    suite.addTests(loader.loadTestsFromTestCase(TestRngStream))
    suite.addTests(loader.loadTestsFromTestCase(TestExactTransition))
    suite.addTests(loader.loadTestsFromTestCase(TestSimulateExact))
    suite.addTests(loader.loadTestsFromTestCase(TestCoupledEuler))
    suite.addTests(loader.loadTestsFromTestCase(TestSmoothedBessel))
    suite.addTests(loader.loadTestsFromTestCase(TestPathEnsembleIO))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
