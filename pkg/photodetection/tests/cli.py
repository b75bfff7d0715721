# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Unit tests for the command line interface."""

import io
import json
import os
import pathlib
import tempfile
import unittest
from unittest import mock

from photodetection import cli, experiments
from photodetection.exceptions.errors import FockStateError
from photodetection.experiments import CriterionResult

SMALL_ARGUMENTS = ["--points", "3", "--tmax", "2"]


class TestParser(unittest.TestCase):
    """Unit tests for the argument parser."""

    def test_subcommands(self):
        """Every command has a subparser and absent flags stay None."""
        parser = cli.build_parser()
        for command in cli.COMMAND_HELP:
            arguments = parser.parse_args([command])
            self.assertEqual(arguments.command, command)
            self.assertIsNone(arguments.eta)
            self.assertIsNone(arguments.block_size)

    def test_command_specific_flags(self):
        """The raw output flags and the criteria list are parsed."""
        parser = cli.build_parser()
        arguments = parser.parse_args(["trajectories", "--raw", "raw.tsv", "--raw-count", "5"])
        self.assertEqual((arguments.raw, arguments.raw_count), ("raw.tsv", 5))
        self.assertEqual(parser.parse_args(["trajectories"]).raw_count, cli.DEFAULT_RAW_COUNT)
        self.assertEqual(parser.parse_args(["validate", "--criteria", "4,11"]).criteria, [4, 11])
        self.assertIsNone(parser.parse_args(["validate"]).criteria)

    def test_config_from_arguments(self):
        """Flags override the defaults."""
        arguments = cli.build_parser().parse_args(["figure1", "--eta", "0.9", "--block-size", "100"])
        with mock.patch.dict(os.environ, {}, clear=True):
            config = cli.config_from_arguments(arguments)
        self.assertEqual(config.eta, 0.9)
        self.assertEqual(config.block_size, 100)
        self.assertEqual(config.dark, 5e-3)


class TestMain(unittest.TestCase):
    """Unit tests for running the commands through main."""

    def setUp(self):
        self.__directory = tempfile.TemporaryDirectory()
        self.directory = pathlib.Path(self.__directory.name)
        self.__stderr = mock.patch("sys.stderr", new_callable=io.StringIO)
        self.__stderr.start()

    def tearDown(self):
        self.__stderr.stop()
        self.__directory.cleanup()

    def test_csv_output(self):
        """A command writes its CSV table to the output file and exits with 0."""
        path = self.directory / "figure2.csv"
        status = cli.main(["figure2", "--model", "sd", "--out", str(path)] + SMALL_ARGUMENTS)
        self.assertEqual(status, cli.EXIT_SUCCESS)
        lines = path.read_text(encoding="utf-8").splitlines()
        self.assertTrue(lines[0].startswith("# figure2 {"))
        self.assertEqual(lines[1], "model,state,nbar,lambda_t,k_factor")
        self.assertEqual(len(lines), 2 + 2 * 3)

    def test_json_output(self):
        """The JSON format holds the resolved configuration."""
        path = self.directory / "cavity.json"
        status = cli.main(["cavity", "--format", "json", "--cavity", "0.1", "--out", str(path)] + SMALL_ARGUMENTS)
        self.assertEqual(status, cli.EXIT_SUCCESS)
        table = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(table["command"], "cavity")
        self.assertEqual(table["config"]["cavity"], 0.1)
        self.assertEqual(table["series"][0]["labels"]["cavity"], 0.1)

    def test_stdout_output(self):
        """Without --out the table goes to stdout."""
        with mock.patch("sys.stdout", new_callable=io.StringIO) as stdout:
            status = cli.main(["distribution", "--model", "e", "--nbar", "5"] + SMALL_ARGUMENTS)
        self.assertEqual(status, cli.EXIT_SUCCESS)
        self.assertTrue(stdout.getvalue().startswith("# distribution {"))

    def test_environment(self):
        """Environment variables are used when no flag is given."""
        path = self.directory / "figure1.json"
        environment = {"PHOTODETECTION_POINTS": "2", "PHOTODETECTION_MODEL": "sd"}
        with mock.patch.dict(os.environ, environment):
            status = cli.main(["figure1", "--tmax", "1", "--format", "json", "--out", str(path)])
        self.assertEqual(status, cli.EXIT_SUCCESS)
        table = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(table["config"]["points"], 2)
        self.assertEqual({data_series["labels"]["model"] for data_series in table["series"]}, {"sd"})

    def test_raw_records(self):
        """The trajectories command also writes the raw events per model."""
        path = self.directory / "trajectories.csv"
        raw_path = self.directory / "raw.tsv"
        status = cli.main(["trajectories", "--nbar", "5", "--traj", "200", "--raw", str(raw_path),
                           "--raw-count", "3", "--out", str(path)] + SMALL_ARGUMENTS)
        self.assertEqual(status, cli.EXIT_SUCCESS)
        raw_lines = raw_path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(raw_lines[0], "# sd")
        self.assertIn("# e", raw_lines)

    def test_usage_errors(self):
        """Bad flags, missing or unknown commands and unknown criteria exit with 2."""
        for argv in ([], ["figure4"], ["figure1", "--eta", "abc"], ["figure1", "--model", "x"],
                     ["validate", "--criteria", "99"], ["validate", "--criteria", "a,b"]):
            with self.subTest(argv=argv):
                self.assertEqual(cli.main(argv), cli.EXIT_USAGE_ERROR)

    def test_configuration_errors(self):
        """Invalid values, missing config files and bad raw counts exit with 2."""
        missing = str(self.directory / "missing.json")
        out = str(self.directory / "out.csv")
        for argv in (["figure1", "--eta", "1.5"], ["figure1", "--config", missing],
                     ["trajectories", "--raw", "raw.tsv", "--raw-count", "0", "--traj", "10", "--out", out]):
            with self.subTest(argv=argv):
                self.assertEqual(cli.main(argv + SMALL_ARGUMENTS), cli.EXIT_USAGE_ERROR)

    def test_io_error(self):
        """An output file that cannot be opened exits with 2."""
        path = self.directory / "missing" / "out.csv"
        self.assertEqual(cli.main(["cavity", "--out", str(path)] + SMALL_ARGUMENTS), cli.EXIT_USAGE_ERROR)

    def test_numerical_failure(self):
        """A numerical failure during a command exits with 3."""
        def failing_command(config):
            raise FockStateError("Probabilities must be finite")

        with mock.patch.dict(experiments.COMMANDS, {"cavity": failing_command}):
            status = cli.main(["cavity", "--out", str(self.directory / "out.csv")])
        self.assertEqual(status, cli.EXIT_RUNTIME_ERROR)

    def test_broad_thermal_cavity(self):
        """The cavity command handles a broad thermal state at low efficiency."""
        path = self.directory / "cavity.csv"
        status = cli.main(["cavity", "--state", "thermal", "--nbar", "50", "--eta", "0.1", "--tmax", "5",
                           "--points", "3", "--cavity", "0.1", "--out", str(path)])
        self.assertEqual(status, cli.EXIT_SUCCESS)
        self.assertNotIn("nan", path.read_text(encoding="utf-8").splitlines()[-1])

    def test_validate(self):
        """Passing criteria exit with 0 and a failing one with 1."""
        path = self.directory / "validate.csv"
        self.assertEqual(cli.main(["validate", "--criteria", "4,11", "--out", str(path)]), cli.EXIT_SUCCESS)
        self.assertEqual(len(path.read_text(encoding="utf-8").splitlines()), 2 + 2)

        def failing_check(config):
            return CriterionResult(4, "failing", 1.0, 0.0, False)

        with mock.patch.dict(experiments.VALIDATION_CHECKS, {4: failing_check}):
            status = cli.main(["validate", "--criteria", "4", "--out", str(path)])
        self.assertEqual(status, cli.EXIT_VALIDATION_FAILURE)

        def raising_check(config):
            raise FloatingPointError("overflow")

        with mock.patch.dict(experiments.VALIDATION_CHECKS, {4: raising_check}):
            status = cli.main(["validate", "--criteria", "4,11", "--out", str(path)])
        self.assertEqual(status, cli.EXIT_VALIDATION_FAILURE)
        self.assertEqual(len(path.read_text(encoding="utf-8").splitlines()), 2 + 2)


if __name__ == '__main__':
    unittest.main()
