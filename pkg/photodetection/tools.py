# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Module containing the shared tools of the package: typed environment variables, the package logger and
helpers for running blocking numerical work in executors from asyncio code.

The logging setup is read once from the environment:

    PHOTODETECTION_LOG_LEVEL   integer logging level, INFO by default
    PHOTODETECTION_LOG_FILE    log file name, an empty value disables the file output
    PHOTODETECTION_LOG_FORMAT  logging format string
"""

import asyncio
import functools
import logging
import os
import sys
import traceback
from typing import Any, Callable, Dict, Optional, TextIO, Tuple, Type, Union, cast

PHOTODETECTION_LOG_LEVEL = "PHOTODETECTION_LOG_LEVEL"
PHOTODETECTION_LOG_FILE = "PHOTODETECTION_LOG_FILE"
PHOTODETECTION_LOG_FORMAT = "PHOTODETECTION_LOG_FORMAT"

EnvironmentVariableValue = Union[bool, int, float, str]
EnvironmentVariableType = Union[Type[bool], Type[int], Type[float], Type[str]]
EnvironmentVariableSetupType = Union[
    Tuple[str, EnvironmentVariableType],
    Tuple[str, EnvironmentVariableType, Optional[EnvironmentVariableValue]]
]

TRUE_STRING = "true"


class EnvironmentVariable:
    """A typed environment variable with a default value. The environment is read at the first access."""

    def __init__(self, variable_name: str, variable_type: EnvironmentVariableType,
                 default_value: Optional[EnvironmentVariableValue] = None):
        self.__variable_name = variable_name
        self.__variable_type = variable_type
        self.__default_value = None if default_value is None else variable_type(default_value)
        self.__value: Optional[EnvironmentVariableValue] = None
        self.__value_fetched = False

    @property
    def variable_name(self) -> str:
        """The name of the environment variable."""
        return self.__variable_name

    @property
    def variable_type(self) -> EnvironmentVariableType:
        """The type the environment value is converted to."""
        return self.__variable_type

    @property
    def default_value(self) -> Optional[EnvironmentVariableValue]:
        """The value used when the variable is not set."""
        return self.__default_value

    @property
    def value(self) -> Optional[EnvironmentVariableValue]:
        """The value of the variable. An empty environment value counts as unset for non-string types
           and booleans are true only for the text 'true' in any case."""
        if not self.__value_fetched:
            self.__value = self.__parse(os.environ.get(self.__variable_name, None))
            self.__value_fetched = True
        return self.__value

    def __parse(self, text: Optional[str]) -> Optional[EnvironmentVariableValue]:
        if text is None or (text == "" and self.__variable_type is not str):
            return self.__default_value
        if self.__variable_type is bool:
            return text.lower() == TRUE_STRING
        return self.__variable_type(text)

    def __str__(self) -> str:
        return "{:s}: {:s}".format(self.__variable_name, str(self.value))


def load_environmental_variables(*variable_setups: EnvironmentVariableSetupType) \
        -> Dict[str, Optional[EnvironmentVariableValue]]:
    """Returns the current values of the given environment variables by name. Each setup is a tuple of
       the variable name, its type and optionally its default value."""
    variables = [EnvironmentVariable(*setup) for setup in variable_setups]  # type: ignore
    return {variable.variable_name: variable.value for variable in variables}


DEFAULT_LOGFILE_NAME = "photodetection.log"
DEFAULT_LOG_FORMAT = "%(asctime)s --- %(levelname)8s --- %(message)s"
LOGGING_DATE_FORMAT = "%Y-%m-%dT%H:%M:%S"
LOGGING_MSEC_FORMAT = "%s.%03d"

LOGGING_SETTINGS = load_environmental_variables(
    (PHOTODETECTION_LOG_LEVEL, int, logging.INFO),
    (PHOTODETECTION_LOG_FILE, str, DEFAULT_LOGFILE_NAME),
    (PHOTODETECTION_LOG_FORMAT, str, DEFAULT_LOG_FORMAT)
)


def get_log_formatter() -> logging.Formatter:
    """Returns the formatter for both the log file and the console output."""
    log_formatter = logging.Formatter(cast(str, LOGGING_SETTINGS[PHOTODETECTION_LOG_FORMAT]))
    log_formatter.default_time_format = LOGGING_DATE_FORMAT
    log_formatter.default_msec_format = LOGGING_MSEC_FORMAT
    return log_formatter


def _has_handler(logger: logging.Logger, handler_type: type) -> bool:
    return any(type(handler) is handler_type for handler in logger.handlers)


class FullLogger:
    """Logger writing to the log file and, optionally, to a console stream. The console defaults to stderr
       since the command line tools write their data to stdout."""

    def __init__(self, logger_name: str, logger_level: Optional[int] = None, console_output: bool = True,
                 console_stream: TextIO = sys.stderr):
        self.__logger = logging.getLogger(logger_name)
        level = LOGGING_SETTINGS[PHOTODETECTION_LOG_LEVEL] if logger_level is None else logger_level
        if isinstance(level, int):
            self.__logger.setLevel(level)

        log_file_name = LOGGING_SETTINGS[PHOTODETECTION_LOG_FILE]
        if isinstance(log_file_name, str) and log_file_name and not _has_handler(self.__logger, logging.FileHandler):
            file_handler = logging.FileHandler(log_file_name, delay=True)
            file_handler.setFormatter(get_log_formatter())
            self.__logger.addHandler(file_handler)

        if console_output and not _has_handler(self.__logger, logging.StreamHandler):
            console_handler = logging.StreamHandler(console_stream)
            console_handler.setFormatter(get_log_formatter())
            self.__logger.addHandler(console_handler)

    def debug(self, message: str, *args, **kwargs):
        """Logs the message at DEBUG level."""
        self.__logger.debug(message, *args, **kwargs)

    def info(self, message: str, *args, **kwargs):
        """Logs the message at INFO level."""
        self.__logger.info(message, *args, **kwargs)

    def warning(self, message: str, *args, **kwargs):
        """Logs the message at WARNING level."""
        self.__logger.warning(message, *args, **kwargs)

    def error(self, message: str, *args, **kwargs):
        """Logs the message at ERROR level."""
        self.__logger.error(message, *args, **kwargs)

    def critical(self, message: str, *args, **kwargs):
        """Logs the message at CRITICAL level."""
        self.__logger.critical(message, *args, **kwargs)

    @property
    def level(self) -> int:
        """The logging level."""
        return self.__logger.level

    @level.setter
    def level(self, log_level: int):
        self.__logger.setLevel(log_level)

    @property
    def logger_name(self) -> str:
        """The name of the underlying logger."""
        return self.__logger.name

    @property
    def logger(self) -> logging.Logger:
        """The underlying Logger object."""
        return self.__logger


LOGGER = FullLogger(__name__)

DEFAULT_EXCEPTION_LOG_START = "Encountered unhandled exception:"


def log_exception(error: BaseException, logger_call: Callable = LOGGER.error,
                  log_start: str = DEFAULT_EXCEPTION_LOG_START) -> None:
    """Logs the type, message and traceback of the exception with the given logger call."""
    trace = "".join(traceback.format_tb(error.__traceback__)).rstrip()
    logger_call("{:s}\n    Type: {:s}\n    Message: {:s}\n    Traceback:\n{:s}".format(
        log_start, type(error).__name__, str(error), trace))


def async_wrap(synchronous_function: Callable):
    """Wraps a blocking function into a coroutine function that runs it in an executor.
       The returned coroutine function takes the optional keyword arguments event_loop and executor;
       the default executor of the running loop is used when executor is None."""
    @functools.wraps(synchronous_function)
    async def run(*args, event_loop: Optional[asyncio.AbstractEventLoop] = None, executor: Any = None,
                  **kwargs):
        if event_loop is None:
            event_loop = asyncio.get_running_loop()
        return await event_loop.run_in_executor(executor, functools.partial(synchronous_function, *args, **kwargs))
    return run


def handle_async_exception(event_loop: asyncio.AbstractEventLoop, context: Dict[str, Any]):
    """Exception handler for event loops: logs exceptions that escaped from tasks."""
    # pylint: disable=unused-argument
    exception = context.get("exception", None)
    if isinstance(exception, BaseException):
        log_exception(exception, LOGGER.warning, "Async exception:")
    else:
        LOGGER.warning("Async exception: {:s}".format(str(context.get("message", context))))
