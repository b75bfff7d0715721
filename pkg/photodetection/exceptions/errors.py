# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the exception classes for the photodetection errors."""

from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)


class PhotodetectionError(Exception):
    """Base class for photodetection related errors. The message is logged at DEBUG level on creation,
       the code handling the error decides on the severity."""
    def __init__(self, message):
        super(PhotodetectionError, self).__init__(message)
        LOGGER.debug(message)
        self.message = message


class FockStateError(PhotodetectionError):
    """Exception class for errors related to invalid Fock state probability vectors."""


class TruncationError(FockStateError):
    """Exception class for errors related to a truncation that cannot hold the requested state."""


class StateDomainError(FockStateError, ValueError):
    """Exception class for errors related to invalid state parameters, like a negative mean photon number."""


class ParameterValueError(PhotodetectionError, ValueError):
    """Exception class for errors related to invalid detector parameters or call arguments."""


class UndefinedValueError(PhotodetectionError, ArithmeticError):
    """Exception class for quantities that are undefined at the requested point, like 0/0 at the origin."""


class ModelTypeError(PhotodetectionError, TypeError):
    """Exception class for errors related to unknown model or evaluation method names."""


class ConfigValueError(PhotodetectionError, ValueError):
    """Exception class for errors related to invalid experiment configuration values."""


class ConfigFileError(ConfigValueError):
    """Exception class for errors related to unreadable or malformed configuration files."""
