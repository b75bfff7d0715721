# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Unit tests for the experiment commands and the validation suite."""

import unittest
from unittest import mock

import numpy

from photodetection import experiments
from photodetection.config import ExperimentConfig
from photodetection.exceptions.errors import UndefinedValueError

SMALL_CONFIG = ExperimentConfig(tmax=2.0, points=3, traj=2000, block_size=500)


def series_by_labels(table, **labels):
    """Returns the first series of the table with the given label values."""
    for data_series in table.series:
        if all(data_series.labels.get(name) == value for name, value in labels.items()):
            return data_series
    raise KeyError(str(labels))


class TestCommands(unittest.TestCase):
    """Unit tests for the experiment commands."""

    def test_figure1(self):
        """Both nbar values, every state kind and both models give one series each."""
        table = experiments.figure1(SMALL_CONFIG)
        self.assertEqual(table.command, "figure1")
        self.assertEqual(len(table.series), 12)
        self.assertEqual(table.config, SMALL_CONFIG.json())
        coherent = series_by_labels(table, model="sd", state="coherent", nbar=50.0)
        number = series_by_labels(table, model="sd", state="number", nbar=50)
        numpy.testing.assert_allclose(coherent.columns["mean_counts"], number.columns["mean_counts"], rtol=1e-9)
        self.assertEqual(coherent.columns["mean_counts"][0], 0.0)

    def test_figure2(self):
        """K is undefined at the origin and 2 for thermal SD states without dark counts."""
        table = experiments.figure2(SMALL_CONFIG.replace(dark=0.0, model="sd"))
        thermal = series_by_labels(table, state="thermal")
        self.assertTrue(numpy.isnan(thermal.columns["k_factor"][0]))
        numpy.testing.assert_allclose(thermal.columns["k_factor"][1:], 2.0, atol=1e-9)
        number = series_by_labels(table, state="number")
        numpy.testing.assert_allclose(number.columns["k_factor"][1:], 0.98, atol=1e-9)

    def test_figure3(self):
        """N_CAV starts at nbar and the mean waiting time is positive."""
        table = experiments.figure3(SMALL_CONFIG.replace(model="e"))
        self.assertEqual(len(table.series), 2)
        for data_series in table.series:
            self.assertAlmostEqual(data_series.columns["n_cav"][0], 100.0, places=6)
            self.assertTrue(numpy.all(data_series.columns["mean_waiting"] > 0.0))

    def test_trajectories(self):
        """The Monte Carlo columns sit next to the analytic ones and repeat for the same seed."""
        config = SMALL_CONFIG.replace(nbar=10.0)
        table = experiments.trajectories(config)
        self.assertEqual([data_series.labels["model"] for data_series in table.series], ["sd", "e"])
        for data_series in table.series:
            self.assertEqual(data_series.labels["n_traj"], 2000)
            self.assertEqual(data_series.columns["mc_mean_counts"][0], 0.0)
            errors = numpy.abs(data_series.columns["mc_mean_counts"][1:] - data_series.columns["mean_counts"][1:])
            self.assertTrue(numpy.all(errors < 5.0 * data_series.columns["mc_mean_counts_se"][1:]))
        self.assertEqual(table.render(), experiments.trajectories(config).render())

    def test_distribution(self):
        """The count distribution at tmax is normalized."""
        table = experiments.distribution(SMALL_CONFIG.replace(nbar=10.0))
        for data_series in table.series:
            self.assertEqual(data_series.labels["lambda_t"], 2.0)
            self.assertAlmostEqual(float(numpy.sum(data_series.columns["probability"])), 1.0, places=8)
            self.assertEqual(data_series.columns["m"][0], 0.0)

    def test_cavity(self):
        """Without damping both traces agree and damping changes them only slightly."""
        plain = experiments.cavity(SMALL_CONFIG.replace(nbar=10.0)).series[0]
        numpy.testing.assert_allclose(plain.columns["no_count"], plain.columns["no_count_damped"], atol=1e-15)
        damped = experiments.cavity(SMALL_CONFIG.replace(nbar=10.0, tmax=1.0, cavity=0.1)).series[0]
        self.assertEqual(damped.labels["cavity"], 0.1)
        difference = numpy.abs(damped.columns["no_count"] - damped.columns["no_count_damped"])
        self.assertTrue(numpy.all(difference < 0.05))
        self.assertGreater(difference[-1], 0.0)


class TestValidation(unittest.TestCase):
    """Unit tests for the validation suite."""

    def test_cheap_criteria(self):
        """The criteria that need no trajectories pass."""
        results = experiments.run_validation(ExperimentConfig(), [4, 5, 9, 10, 11])
        self.assertEqual([result.number for result in results], [4, 5, 9, 10, 11])
        for result in results:
            with self.subTest(criterion=result.name):
                self.assertTrue(result.passed)
                self.assertGreaterEqual(result.seconds, 0.0)

    def test_determinism_criterion(self):
        """Serial and parallel trajectory runs give identical output."""
        result = experiments.check_determinism(ExperimentConfig(traj=2000, points=5, block_size=500))
        self.assertTrue(result.passed)
        self.assertEqual(result.measured, 0)

    def test_waiting_regimes_criterion(self):
        """The E plateau holds while N_CAV > 5 and the SD mean waiting time increases strictly."""
        result = experiments.check_waiting_regimes(ExperimentConfig())
        self.assertEqual(result.number, 8)
        self.assertTrue(result.passed)
        self.assertLess(result.measured, 0.05)
        self.assertEqual(result.limit, 0.05)

    def test_failing_criterion(self):
        """A check raising a photodetection error counts as failed."""
        def raising_check(config):
            raise UndefinedValueError("no value")

        with mock.patch.dict(experiments.VALIDATION_CHECKS, {4: raising_check}):
            table, passed = experiments.validate(ExperimentConfig(), [4, 11])
        self.assertFalse(passed)
        self.assertEqual(table.command, "validate")
        first = table.series[0]
        self.assertEqual(first.labels, {"criterion": 4, "name": "raising_check"})
        self.assertTrue(numpy.isnan(first.columns["measured"][0]))
        self.assertEqual(first.columns["passed"][0], 0.0)
        self.assertEqual(table.series[1].columns["passed"][0], 1.0)

    def test_unexpected_error_in_criterion(self):
        """A check raising a plain ValueError fails alone and the other criteria still run."""
        def broken_check(config):
            raise ValueError("cannot convert float NaN to integer")

        with mock.patch.dict(experiments.VALIDATION_CHECKS, {6: broken_check}):
            results = experiments.run_validation(ExperimentConfig(), [6, 11])
        self.assertEqual([result.passed for result in results], [False, True])
        self.assertEqual(results[0].name, "broken_check")
        self.assertTrue(numpy.isnan(results[0].measured))

    def test_criterion_result(self):
        """with_runtime keeps the outcome and sets the runtime."""
        result = experiments.CriterionResult(7, "counting time scaling", 2.01, 2.3, True)
        timed = result.with_runtime(1.5)
        self.assertEqual((timed.number, timed.name, timed.measured, timed.limit, timed.passed),
                         (7, "counting time scaling", 2.01, 2.3, True))
        self.assertEqual(timed.seconds, 1.5)


if __name__ == '__main__':
    unittest.main()
