# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Unit tests for the result value classes."""

import unittest

import numpy

from photodetection.exceptions.errors import ParameterValueError, UndefinedValueError
from photodetection.results import (
    MINIMUM_SIMPSON_INTERVALS, CountDistribution, EnsembleStats, WaitingHistogram, WaitingTimeCurve, simpson_grid)


class TestCountDistribution(unittest.TestCase):
    """Unit tests for the CountDistribution class."""

    def test_moments(self):
        """The mean and the factorial moments are sums over the held counts."""
        distribution = CountDistribution([0.25, 0.5, 0.25], 1.0)
        self.assertEqual(distribution.m_max, 2)
        self.assertAlmostEqual(distribution.tail, 0.0)
        self.assertAlmostEqual(distribution.mean, 1.0)
        self.assertAlmostEqual(distribution.factorial_moment(2), 0.5)
        self.assertEqual(distribution.factorial_moment(3), 0.0)

    def test_tail(self):
        """The tail defaults to the missing mass and must be consistent when given."""
        distribution = CountDistribution([0.5, 0.25], 2.0)
        self.assertAlmostEqual(distribution.tail, 0.25)
        with self.assertRaises(ParameterValueError):
            CountDistribution([0.5, 0.25], 2.0, tail=0.0)

    def test_invalid(self):
        """Negative probabilities, empty vectors and negative times are rejected."""
        with self.assertRaises(ParameterValueError):
            CountDistribution([1.2, -0.2], 1.0)
        with self.assertRaises(ParameterValueError):
            CountDistribution([], 1.0)
        with self.assertRaises(ParameterValueError):
            CountDistribution([1.0], -1.0)

    def test_read_only_and_json(self):
        """The probabilities cannot be modified and the JSON form holds all the attributes."""
        distribution = CountDistribution([0.75, 0.25], 0.5)
        with self.assertRaises(ValueError):
            distribution.probs[0] = 0.0
        self.assertEqual(distribution.json(), {"probs": [0.75, 0.25], "t": 0.5, "tail": 0.0})
        self.assertEqual(distribution, CountDistribution([0.75, 0.25], 0.5))


class TestWaitingTimeCurve(unittest.TestCase):
    """Unit tests for the waiting-time curve and its quadrature grid."""

    def test_simpson_grid(self):
        """The grid has an even number of intervals and respects the largest step."""
        grid = simpson_grid(10.0, 0.001)
        self.assertEqual((grid.size - 1) % 2, 0)
        self.assertLessEqual(grid[1] - grid[0], 0.001 + 1e-15)
        self.assertEqual(simpson_grid(1.0, numpy.inf).size, MINIMUM_SIMPSON_INTERVALS + 1)
        with self.assertRaises(ParameterValueError):
            simpson_grid(0.0, 0.1)

    def test_exponential_density(self):
        """An exponential density integrates to its mass and gives the exponential mean."""
        tau = simpson_grid(50.0, 0.01)
        curve = WaitingTimeCurve(1.0, tau, 0.5 * numpy.exp(-0.5 * tau))
        self.assertAlmostEqual(curve.normalization, 1.0 - numpy.exp(-25.0), places=9)
        self.assertAlmostEqual(curve.mean, 2.0, places=6)
        self.assertEqual(curve.window, 50.0)
        self.assertEqual(curve.json()["t"], 1.0)

    def test_zero_density(self):
        """The mean of a zero density is undefined."""
        tau = numpy.linspace(0.0, 1.0, 11)
        curve = WaitingTimeCurve(0.0, tau, numpy.zeros(11))
        with self.assertRaises(UndefinedValueError):
            _ = curve.mean
        self.assertIsNone(curve.json()["mean"])

    def test_invalid_curves(self):
        """Short, unsorted or negative curves are rejected."""
        with self.assertRaises(ParameterValueError):
            WaitingTimeCurve(0.0, [0.0, 1.0], [1.0, 1.0])
        with self.assertRaises(ParameterValueError):
            WaitingTimeCurve(0.0, [0.0, 2.0, 1.0], [1.0, 1.0, 1.0])
        with self.assertRaises(ParameterValueError):
            WaitingTimeCurve(0.0, [0.0, 1.0, 2.0], [1.0, -1.0, 1.0])


class TestEnsembleStatistics(unittest.TestCase):
    """Unit tests for the waiting histogram and the ensemble statistics."""

    def test_waiting_histogram(self):
        """Densities integrate to one and the mean gap comes from the sums."""
        histogram = WaitingHistogram([0.0, 1.0, 2.0], [3, 1], gap_sum=3.0, gap_square_sum=3.0)
        self.assertEqual(histogram.n_gaps, 4)
        self.assertAlmostEqual(float(numpy.sum(histogram.densities * numpy.diff(histogram.bin_edges))), 1.0)
        self.assertAlmostEqual(histogram.mean_gap, 0.75)
        self.assertAlmostEqual(histogram.mean_gap_se, numpy.sqrt((3.0 - 4 * 0.75 ** 2) / 3 / 4))

    def test_empty_waiting_histogram(self):
        """An empty histogram has zero densities and no mean gap."""
        histogram = WaitingHistogram([0.0, 1.0], [0], 0.0, 0.0)
        numpy.testing.assert_array_equal(histogram.densities, [0.0])
        with self.assertRaises(UndefinedValueError):
            _ = histogram.mean_gap
        with self.assertRaises(ParameterValueError):
            WaitingHistogram([0.0, 1.0], [1, 2], 0.0, 0.0)

    def test_ensemble_means_and_errors(self):
        """Means are sums over n_traj and errors are sample deviations over sqrt(n_traj)."""
        counts = numpy.array([[0, 1], [2, 3], [1, 2], [1, 2]], dtype=float)
        pairs = counts * (counts - 1.0)
        stats = EnsembleStats(
            n_traj=4, seed=7, t_grid=[1.0, 2.0],
            count_sums=counts.sum(axis=0), count_square_sums=(counts ** 2).sum(axis=0),
            pair_sums=pairs.sum(axis=0), pair_square_sums=(pairs ** 2).sum(axis=0))
        numpy.testing.assert_allclose(stats.mean_counts, counts.mean(axis=0))
        numpy.testing.assert_allclose(stats.mean_counts_se, counts.std(axis=0, ddof=1) / 2.0)
        numpy.testing.assert_allclose(stats.second_factorial, pairs.mean(axis=0))
        numpy.testing.assert_allclose(stats.second_factorial_se, pairs.std(axis=0, ddof=1) / 2.0)
        self.assertIsNone(stats.count_histogram)
        self.assertEqual(stats.json()["seed"], 7)

    def test_single_trajectory(self):
        """One trajectory has no standard error and zero trajectories are rejected."""
        stats = EnsembleStats(1, 0, [1.0], numpy.array([2.0]), numpy.array([4.0]))
        self.assertTrue(numpy.isnan(stats.mean_counts_se[0]))
        self.assertIsNone(stats.second_factorial)
        with self.assertRaises(ParameterValueError):
            EnsembleStats(0, 0, [1.0])


if __name__ == '__main__':
    unittest.main()
