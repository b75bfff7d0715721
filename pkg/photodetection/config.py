# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the ExperimentConfig class that holds the resolved configuration of an experiment run.

Each attribute is resolved in the order
    built-in default < environment variable PHOTODETECTION_<NAME> < JSON config file < command line flag.
"""

from __future__ import annotations
import json
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import numpy

from photodetection.exceptions.errors import ConfigFileError, ConfigValueError, PhotodetectionError
from photodetection.fock import DiagonalFockState, StateKind, state_from_kind
from photodetection.parameters import DetectorParams
from photodetection.tools import FullLogger, load_environmental_variables

LOGGER = FullLogger(__name__)

ENVIRONMENT_PREFIX = "PHOTODETECTION_"

MODEL_BOTH = "both"
MODEL_CHOICES = ["sd", "e", MODEL_BOTH]
FORMAT_CHOICES = ["csv", "json"]

ConfigValue = Optional[Union[bool, int, float, str]]

# attribute name -> (type, default value)
CONFIG_ATTRIBUTES: Dict[str, Tuple[Type, ConfigValue]] = {
    "model": (str, MODEL_BOTH),
    "state": (str, StateKind.COHERENT),
    "nbar": (float, 50.0),
    "eta": (float, 0.6),
    "dark": (float, 5e-3),
    "cavity": (float, 0.0),
    "tmin": (float, 0.0),
    "tmax": (float, 10.0),
    "points": (int, 101),
    "nmax": (int, None),
    "mmax": (int, None),
    "traj": (int, 100000),
    "seed": (int, 12345),
    "out": (str, None),
    "format": (str, "csv"),
    "workers": (int, 1),
    "block_size": (int, 4096),
    "epsilon": (float, 1e-12)
}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and bool(numpy.isfinite(value))


def _is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ExperimentConfig:
    """Immutable experiment configuration. Time values are dimensionless lambda t."""

    def __init__(self, **values: ConfigValue):
        """Creates a configuration from the given attribute values, the missing ones taking their defaults.
           Raises ConfigValueError for unknown attributes or invalid values."""
        unknown = sorted(set(values) - set(CONFIG_ATTRIBUTES))
        if unknown:
            raise ConfigValueError("Unknown configuration attributes: {:s}".format(", ".join(unknown)))

        self.__values: Dict[str, ConfigValue] = {}
        for name, (value_type, default) in CONFIG_ATTRIBUTES.items():
            value = values.get(name, default)
            if value_type is float and _is_integer(value):
                value = float(value)  # type: ignore
            if value is not None and not getattr(self, "_check_{:s}".format(name))(value):
                raise ConfigValueError("'{:s}' is not a valid value for {:s}".format(str(value), name))
            self.__values[name] = value
        self._check_consistency()

    @property
    def model(self) -> str:
        """The model to evaluate: sd, e or both."""
        return self.__values["model"]  # type: ignore

    @property
    def state(self) -> str:
        """The initial state kind."""
        return self.__values["state"]  # type: ignore

    @property
    def nbar(self) -> float:
        """The mean photon number of the initial state."""
        return self.__values["nbar"]  # type: ignore

    @property
    def eta(self) -> float:
        """The quantum efficiency."""
        return self.__values["eta"]  # type: ignore

    @property
    def dark(self) -> float:
        """The dark count ratio d."""
        return self.__values["dark"]  # type: ignore

    @property
    def cavity(self) -> float:
        """The cavity damping ratio c."""
        return self.__values["cavity"]  # type: ignore

    @property
    def tmin(self) -> float:
        """The first point of the lambda t grid."""
        return self.__values["tmin"]  # type: ignore

    @property
    def tmax(self) -> float:
        """The last point of the lambda t grid."""
        return self.__values["tmax"]  # type: ignore

    @property
    def points(self) -> int:
        """The number of grid points."""
        return self.__values["points"]  # type: ignore

    @property
    def nmax(self) -> Optional[int]:
        """The Fock space truncation, None for the automatic choice."""
        return self.__values["nmax"]  # type: ignore

    @property
    def mmax(self) -> Optional[int]:
        """The largest count of the count distributions, None for the automatic choice."""
        return self.__values["mmax"]  # type: ignore

    @property
    def traj(self) -> int:
        """The number of Monte Carlo trajectories."""
        return self.__values["traj"]  # type: ignore

    @property
    def seed(self) -> int:
        """The master seed of the trajectory ensembles."""
        return self.__values["seed"]  # type: ignore

    @property
    def out(self) -> Optional[str]:
        """The output path, None or '-' for the standard output."""
        return self.__values["out"]  # type: ignore

    @property
    def format(self) -> str:
        """The output format, csv or json."""
        return self.__values["format"]  # type: ignore

    @property
    def workers(self) -> int:
        """The number of worker processes for the trajectory ensembles, 1 runs them serially."""
        return self.__values["workers"]  # type: ignore

    @property
    def block_size(self) -> int:
        """The number of trajectories in one ensemble block."""
        return self.__values["block_size"]  # type: ignore

    @property
    def epsilon(self) -> float:
        """The truncation tail tolerance used when nmax is not given."""
        return self.__values["epsilon"]  # type: ignore

    @classmethod
    def _check_model(cls, model: Any) -> bool:
        return model in MODEL_CHOICES

    @classmethod
    def _check_state(cls, state: Any) -> bool:
        return state in StateKind.KIND_TAGS

    @classmethod
    def _check_nbar(cls, nbar: Any) -> bool:
        return _is_number(nbar) and nbar >= 0

    @classmethod
    def _check_eta(cls, eta: Any) -> bool:
        return _is_number(eta) and 0 <= eta <= 1

    @classmethod
    def _check_dark(cls, dark: Any) -> bool:
        return _is_number(dark) and dark >= 0

    _check_cavity = _check_dark
    _check_tmin = _check_dark

    @classmethod
    def _check_tmax(cls, tmax: Any) -> bool:
        return _is_number(tmax) and tmax > 0

    @classmethod
    def _check_points(cls, points: Any) -> bool:
        return _is_integer(points) and points >= 2

    @classmethod
    def _check_nmax(cls, nmax: Any) -> bool:
        return _is_integer(nmax) and nmax >= 0

    _check_mmax = _check_nmax

    @classmethod
    def _check_traj(cls, traj: Any) -> bool:
        return _is_integer(traj) and traj >= 1

    @classmethod
    def _check_seed(cls, seed: Any) -> bool:
        return _is_integer(seed) and seed >= 0

    @classmethod
    def _check_out(cls, out: Any) -> bool:
        return isinstance(out, str) and len(out) > 0

    @classmethod
    def _check_format(cls, output_format: Any) -> bool:
        return output_format in FORMAT_CHOICES

    _check_workers = _check_traj
    _check_block_size = _check_traj

    @classmethod
    def _check_epsilon(cls, epsilon: Any) -> bool:
        return _is_number(epsilon) and 0 < epsilon < 1

    def _check_consistency(self):
        if self.tmin >= self.tmax:
            raise ConfigValueError("tmin {:s} must be below tmax {:s}".format(repr(self.tmin), repr(self.tmax)))
        if self.state == StateKind.NUMBER and float(self.nbar) != int(self.nbar):
            raise ConfigValueError("A number state needs an integer nbar, got {:s}".format(repr(self.nbar)))

    @classmethod
    def from_environment(cls) -> Dict[str, ConfigValue]:
        """Returns the attribute values set by the PHOTODETECTION_<NAME> environment variables."""
        try:
            env_values = load_environmental_variables(*(
                (ENVIRONMENT_PREFIX + name.upper(), value_type)
                for name, (value_type, _) in CONFIG_ATTRIBUTES.items()
            ))
        except ValueError as error:
            raise ConfigValueError("Invalid configuration environment variable: {:s}".format(str(error))) from error
        return {
            name: env_values[ENVIRONMENT_PREFIX + name.upper()]
            for name in CONFIG_ATTRIBUTES
            if env_values[ENVIRONMENT_PREFIX + name.upper()] is not None
        }

    @classmethod
    def from_file(cls, file_path: str) -> Dict[str, ConfigValue]:
        """Returns the attribute values of a JSON config file. Raises ConfigFileError if the file cannot be read,
           is not a JSON object or contains unknown attributes."""
        try:
            with open(file_path, mode="r", encoding="utf-8") as config_file:
                file_values = json.load(config_file)
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigFileError("Cannot read config file {:s}: {:s}".format(file_path, str(error))) from error
        if not isinstance(file_values, dict):
            raise ConfigFileError("Config file {:s} does not contain a JSON object".format(file_path))
        unknown = sorted(set(file_values) - set(CONFIG_ATTRIBUTES))
        if unknown:
            raise ConfigFileError("Unknown attributes in config file {:s}: {:s}".format(file_path, ", ".join(unknown)))
        return file_values

    @classmethod
    def resolve(cls, file_path: Optional[str] = None,
                overrides: Optional[Dict[str, ConfigValue]] = None) -> ExperimentConfig:
        """Returns the configuration composed from the defaults, the environment, the optional config file
           and the overrides. None valued overrides are ignored."""
        values = cls.from_environment()
        if file_path is not None:
            values.update(cls.from_file(file_path))
        if overrides is not None:
            values.update({name: value for name, value in overrides.items() if value is not None})
        config = cls(**values)
        LOGGER.debug("Resolved configuration: {:s}".format(str(config)))
        return config

    def replace(self, **changes: ConfigValue) -> ExperimentConfig:
        """Returns a copy of the configuration with the given attributes changed."""
        return ExperimentConfig(**{**self.__values, **changes})

    def models(self) -> List[str]:
        """Returns the model names to evaluate."""
        if self.model == MODEL_BOTH:
            return ["sd", "e"]
        return [self.model]

    def params(self) -> DetectorParams:
        """Returns the detector parameters with lambda = 1, so that times are lambda t."""
        return DetectorParams(rate=1.0, eta=self.eta, dark=self.dark, cavity=self.cavity)

    def t_grid(self) -> numpy.ndarray:
        """Returns the lambda t grid."""
        return numpy.linspace(self.tmin, self.tmax, self.points)

    def state_kind(self, tag: Optional[str] = None, nbar: Optional[float] = None) -> StateKind:
        """Returns the configured state kind, or the given one."""
        tag = self.state if tag is None else tag
        nbar = self.nbar if nbar is None else nbar
        try:
            return StateKind(tag, int(nbar) if tag == StateKind.NUMBER else nbar)
        except PhotodetectionError as error:
            raise ConfigValueError(error.message) from error

    def initial_state(self, tag: Optional[str] = None, nbar: Optional[float] = None) -> DiagonalFockState:
        """Returns the initial state of the configured or given kind with the configured truncation."""
        try:
            return state_from_kind(self.state_kind(tag, nbar), self.nmax, self.epsilon)
        except PhotodetectionError as error:
            raise ConfigValueError(error.message) from error

    def json(self) -> Dict[str, ConfigValue]:
        """Returns the resolved configuration with the attributes in a fixed order."""
        return {name: self.__values[name] for name in CONFIG_ATTRIBUTES}

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, ExperimentConfig) and self.json() == other.json()

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "ExperimentConfig({:s})".format(
            ", ".join("{:s}={:s}".format(name, repr(value)) for name, value in self.json().items()))
