# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the DetectorParams class holding the photodetector parameters."""

from __future__ import annotations
import json
from typing import Any, Dict, Optional

import numpy

from photodetection.exceptions.errors import ParameterValueError
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)


class DetectorParams:
    """Immutable photodetector parameters.
       rate is the coupling lambda (1/time), eta the quantum efficiency, dark the dark count ratio d
       (dark count rate lambda d), cavity the cavity damping ratio c (damping rate lambda c) and dead_time
       the detector dead time x."""

    # JSON attribute name -> property name
    PARAMETER_ATTRIBUTES = {
        "lambda": "rate",
        "eta": "eta",
        "d": "dark",
        "c": "cavity",
        "x": "dead_time"
    }

    def __init__(self, rate: float = 1.0, eta: float = 1.0, dark: float = 0.0, cavity: float = 0.0,
                 dead_time: float = 0.0):
        """Creates a new parameter set. Raises ParameterValueError if any parameter is invalid."""
        if not self._check_rate(rate):
            raise ParameterValueError("'{:s}' is not a valid detector rate".format(str(rate)))
        if not self._check_eta(eta):
            raise ParameterValueError("'{:s}' is not a valid quantum efficiency".format(str(eta)))
        for name, value in (("dark count ratio", dark), ("cavity damping ratio", cavity),
                            ("dead time", dead_time)):
            if not self._check_nonnegative(value):
                raise ParameterValueError("'{:s}' is not a valid {:s}".format(str(value), name))

        self.__rate = float(rate)
        self.__eta = float(eta)
        self.__dark = float(dark)
        self.__cavity = float(cavity)
        self.__dead_time = float(dead_time)

    @property
    def rate(self) -> float:
        """The photon absorption rate lambda."""
        return self.__rate

    @property
    def eta(self) -> float:
        """The quantum efficiency."""
        return self.__eta

    @property
    def dark(self) -> float:
        """The dark count ratio d."""
        return self.__dark

    @property
    def cavity(self) -> float:
        """The cavity damping ratio c."""
        return self.__cavity

    @property
    def dead_time(self) -> float:
        """The detector dead time x."""
        return self.__dead_time

    @property
    def q(self) -> float:
        """The probability 1 - eta that an absorption is not registered."""
        return 1.0 - self.__eta

    @property
    def p(self) -> float:
        """The total loss ratio 1 + c."""
        return 1.0 + self.__cavity

    @property
    def q_tilde(self) -> float:
        """The unregistered loss ratio p - eta = 1 - eta + c."""
        return self.p - self.__eta

    def replace(self, **changes: float) -> DetectorParams:
        """Returns a copy of the parameters with the given properties changed."""
        values = {name: getattr(self, name) for name in self.PARAMETER_ATTRIBUTES.values()}
        for name in changes:
            if name not in values:
                raise ParameterValueError("'{:s}' is not a detector parameter".format(name))
        values.update(changes)
        return DetectorParams(**values)

    @classmethod
    def _check_rate(cls, rate: float) -> bool:
        return isinstance(rate, (int, float)) and bool(numpy.isfinite(rate)) and rate > 0

    @classmethod
    def _check_eta(cls, eta: float) -> bool:
        return isinstance(eta, (int, float)) and 0.0 <= eta <= 1.0

    @classmethod
    def _check_nonnegative(cls, value: float) -> bool:
        return isinstance(value, (int, float)) and bool(numpy.isfinite(value)) and value >= 0

    def json(self) -> Dict[str, float]:
        """Returns the parameters as a dictionary."""
        return {
            json_name: getattr(self, property_name)
            for json_name, property_name in self.PARAMETER_ATTRIBUTES.items()
        }

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, DetectorParams) and self.json() == other.json()

    def __hash__(self) -> int:
        return hash(tuple(self.json().items()))

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "DetectorParams({:s})".format(", ".join(
            "{:s}={:s}".format(property_name, repr(getattr(self, property_name)))
            for property_name in self.PARAMETER_ATTRIBUTES.values()))

    @classmethod
    def validate_json(cls, json_params: Dict[str, Any]) -> bool:
        """Returns True if the given dictionary can be converted to DetectorParams."""
        try:
            cls._from_json_dict(json_params)
            return True
        except (ParameterValueError, TypeError) as error:
            LOGGER.warning("{:s} error '{:s}' encountered when validating detector parameters".format(
                str(type(error)), str(error)))
            return False

    @classmethod
    def from_json(cls, json_params: Dict[str, Any]) -> Optional[DetectorParams]:
        """Returns DetectorParams built from the given dictionary or None if it is not valid."""
        if cls.validate_json(json_params):
            return cls._from_json_dict(json_params)
        return None

    @classmethod
    def _from_json_dict(cls, json_params: Dict[str, Any]) -> DetectorParams:
        return DetectorParams(**{
            property_name: json_params[json_name]
            for json_name, property_name in cls.PARAMETER_ATTRIBUTES.items()
            if json_name in json_params
        })
