# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Unit tests for the ExperimentConfig class."""

import json
import os
import tempfile
import unittest
from unittest import mock

import numpy

from photodetection.config import CONFIG_ATTRIBUTES, ExperimentConfig
from photodetection.exceptions.errors import ConfigFileError, ConfigValueError
from photodetection.fock import StateKind
from photodetection.parameters import DetectorParams


def write_config_file(directory: str, content: str) -> str:
    """Writes the content to a config file in the directory and returns the file path."""
    file_path = os.path.join(directory, "config.json")
    with open(file_path, mode="w", encoding="utf-8") as config_file:
        config_file.write(content)
    return file_path


class TestExperimentConfig(unittest.TestCase):
    """Unit tests for the ExperimentConfig class."""

    def test_defaults(self):
        """A configuration without values holds the defaults."""
        config = ExperimentConfig()
        for name, (_, default) in CONFIG_ATTRIBUTES.items():
            self.assertEqual(getattr(config, name), default)
        self.assertEqual(config.models(), ["sd", "e"])
        self.assertEqual(config.params(), DetectorParams(rate=1.0, eta=0.6, dark=5e-3))

    def test_values(self):
        """Integer values of real attributes are stored as floats."""
        config = ExperimentConfig(model="e", nbar=10, tmax=5, points=6)
        self.assertIsInstance(config.nbar, float)
        self.assertEqual(config.models(), ["e"])
        numpy.testing.assert_allclose(config.t_grid(), [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])

    def test_invalid_values(self):
        """Unknown attributes, invalid values and inconsistent grids raise ConfigValueError."""
        invalid_values = [
            {"colour": "red"}, {"model": "pd"}, {"state": "squeezed"}, {"eta": 1.5}, {"dark": -0.1},
            {"points": 1}, {"points": 2.5}, {"traj": 0}, {"seed": -1}, {"format": "xml"}, {"epsilon": 0.0},
            {"tmin": 5.0, "tmax": 5.0}, {"state": "number", "nbar": 2.5}, {"nbar": True}, {"out": ""}
        ]
        for values in invalid_values:
            with self.subTest(values=values):
                with self.assertRaises(ConfigValueError):
                    ExperimentConfig(**values)

    def test_replace_and_json(self):
        """replace returns a changed copy and json keeps the attribute order."""
        config = ExperimentConfig()
        changed = config.replace(eta=0.9, workers=4)
        self.assertEqual(changed.eta, 0.9)
        self.assertEqual(changed.workers, 4)
        self.assertEqual(config.eta, 0.6)
        self.assertNotEqual(config, changed)
        self.assertEqual(list(config.json().keys()), list(CONFIG_ATTRIBUTES.keys()))
        self.assertEqual(ExperimentConfig(**json.loads(str(changed))), changed)

    def test_initial_state(self):
        """The initial state follows the configured kind and truncation."""
        config = ExperimentConfig(state="number", nbar=10, nmax=15)
        state = config.initial_state()
        self.assertEqual(state.n_max, 15)
        self.assertEqual(state.kind, StateKind(StateKind.NUMBER, 10))
        self.assertEqual(config.initial_state(StateKind.THERMAL, 3.0).kind, StateKind(StateKind.THERMAL, 3.0))
        with self.assertRaises(ConfigValueError):
            config.initial_state(StateKind.NUMBER, 20)
        with self.assertRaises(ConfigValueError):
            config.state_kind(StateKind.COHERENT, -1.0)


class TestConfigResolution(unittest.TestCase):
    """Unit tests for the environment, file and override layers."""

    @mock.patch.dict(os.environ, {"PHOTODETECTION_ETA": "0.8", "PHOTODETECTION_POINTS": "11",
                                  "PHOTODETECTION_MODEL": "sd"})
    def test_environment(self):
        """PHOTODETECTION_<NAME> environment variables override the defaults."""
        self.assertEqual(ExperimentConfig.from_environment(), {"eta": 0.8, "points": 11, "model": "sd"})
        config = ExperimentConfig.resolve()
        self.assertEqual(config.eta, 0.8)
        self.assertEqual(config.points, 11)
        self.assertEqual(config.model, "sd")

    @mock.patch.dict(os.environ, {"PHOTODETECTION_POINTS": "eleven"})
    def test_invalid_environment(self):
        """An environment value of the wrong type raises ConfigValueError."""
        with self.assertRaises(ConfigValueError):
            ExperimentConfig.resolve()

    @mock.patch.dict(os.environ, {"PHOTODETECTION_ETA": "0.8", "PHOTODETECTION_DARK": "0.01"})
    def test_resolution_order(self):
        """Flags override the config file, which overrides the environment."""
        with tempfile.TemporaryDirectory() as directory:
            file_path = write_config_file(directory, json.dumps({"eta": 0.7, "points": 21}))
            config = ExperimentConfig.resolve(file_path, {"eta": 0.9, "points": None, "seed": 7})
        self.assertEqual(config.eta, 0.9)
        self.assertEqual(config.points, 21)
        self.assertEqual(config.dark, 0.01)
        self.assertEqual(config.seed, 7)

    def test_invalid_files(self):
        """Missing, malformed or unknown config files raise ConfigFileError."""
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ConfigFileError):
                ExperimentConfig.from_file(os.path.join(directory, "missing.json"))
            for content in ("{not json", "[1, 2]", json.dumps({"eta": 0.5, "colour": "red"})):
                with self.subTest(content=content):
                    file_path = write_config_file(directory, content)
                    with self.assertRaises(ConfigFileError):
                        ExperimentConfig.from_file(file_path)

    def test_invalid_file_value(self):
        """An invalid value in the config file raises ConfigValueError."""
        with tempfile.TemporaryDirectory() as directory:
            file_path = write_config_file(directory, json.dumps({"eta": 2.0}))
            with self.assertRaises(ConfigValueError):
                ExperimentConfig.resolve(file_path)


if __name__ == '__main__':
    unittest.main()
