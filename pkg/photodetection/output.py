# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the data table classes written by the experiment commands and their CSV and JSON writers.

A table is a list of series. Every series has labels, like the model and the state, and named value columns
of equal length. The CSV form is long format: one row per series point, the label columns first.
"""

from __future__ import annotations
import csv
import io
import json
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import numpy

from photodetection.exceptions.errors import ConfigValueError, ParameterValueError
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
STDOUT_PATH = "-"

LabelValue = Union[str, int, float]
ColumnValues = Union[Sequence[float], numpy.ndarray]


def _float_value(value: Any) -> float:
    return float(value) if value is not None else numpy.nan


def _csv_text(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, numpy.bool_)):
        return str(int(value))
    if isinstance(value, (int, numpy.integer)):
        return str(int(value))
    return repr(float(value))


def _json_value(value: Any) -> Any:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, numpy.bool_)):
        return bool(value)
    if isinstance(value, (int, numpy.integer)):
        return int(value)
    value = float(value)
    return value if numpy.isfinite(value) else None


class DataSeries:
    """One labelled series of equally long value columns."""

    LABELS_ATTRIBUTE = "labels"
    COLUMNS_ATTRIBUTE = "columns"

    def __init__(self, labels: Dict[str, LabelValue], columns: Dict[str, ColumnValues]):
        """Creates a new series. Raises ParameterValueError if there are no columns or their lengths differ."""
        if not columns:
            raise ParameterValueError("A data series needs at least one column")
        self.__labels = dict(labels)
        self.__columns = {
            name: numpy.array([_float_value(value) for value in values], dtype=float)
            for name, values in columns.items()
        }
        lengths = {values.size for values in self.__columns.values()}
        if len(lengths) != 1:
            raise ParameterValueError("Columns of the series {:s} have different lengths".format(str(self.__labels)))
        self.__length = lengths.pop()

    @property
    def labels(self) -> Dict[str, LabelValue]:
        """The series labels."""
        return self.__labels

    @property
    def columns(self) -> Dict[str, numpy.ndarray]:
        """The value columns by name."""
        return self.__columns

    def __len__(self) -> int:
        return self.__length

    def json(self) -> Dict[str, Any]:
        """Returns the series as a dictionary, undefined values as None."""
        return {
            self.LABELS_ATTRIBUTE: {name: _json_value(value) for name, value in self.__labels.items()},
            self.COLUMNS_ATTRIBUTE: {
                name: [_json_value(value) for value in values] for name, values in self.__columns.items()
            }
        }


class DataTable:
    """The output of one experiment command: the command name, the resolved configuration and the series."""

    def __init__(self, command: str, config: Dict[str, Any], series: Optional[List[DataSeries]] = None):
        self.__command = command
        self.__config = dict(config)
        self.__series: List[DataSeries] = list(series) if series is not None else []

    @property
    def command(self) -> str:
        """The name of the command that produced the table."""
        return self.__command

    @property
    def config(self) -> Dict[str, Any]:
        """The resolved configuration."""
        return self.__config

    @property
    def series(self) -> List[DataSeries]:
        """The data series in output order."""
        return self.__series

    def add_series(self, labels: Dict[str, LabelValue], columns: Dict[str, ColumnValues]) -> DataSeries:
        """Creates a series, appends it to the table and returns it."""
        new_series = DataSeries(labels, columns)
        self.__series.append(new_series)
        return new_series

    def label_names(self) -> List[str]:
        """Returns the label names of all series in the order of their first appearance."""
        names: List[str] = []
        for data_series in self.__series:
            names.extend(name for name in data_series.labels if name not in names)
        return names

    def column_names(self) -> List[str]:
        """Returns the column names of all series in the order of their first appearance."""
        names: List[str] = []
        for data_series in self.__series:
            names.extend(name for name in data_series.columns if name not in names)
        return names

    def json(self) -> Dict[str, Any]:
        """Returns the table as a dictionary with the keys command, config and series."""
        return {
            "command": self.__command,
            "config": self.__config,
            "series": [data_series.json() for data_series in self.__series]
        }

    def write_csv(self, stream: TextIO):
        """Writes the '#' prefixed configuration comment line, the header and one row per series point.
           Labels or columns a series does not have are written as empty label fields or nan."""
        stream.write("# {:s} {:s}\n".format(self.__command, json.dumps(self.__config)))
        label_names = self.label_names()
        column_names = self.column_names()
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(label_names + column_names)
        for data_series in self.__series:
            labels = [
                _csv_text(data_series.labels[name]) if name in data_series.labels else ""
                for name in label_names
            ]
            for index in range(len(data_series)):
                writer.writerow(labels + [
                    _csv_text(data_series.columns[name][index]) if name in data_series.columns else "nan"
                    for name in column_names
                ])

    def write_json(self, stream: TextIO):
        """Writes the table as one JSON object."""
        json.dump(self.json(), stream, indent=2, allow_nan=False)
        stream.write("\n")

    def render(self, output_format: str = FORMAT_CSV) -> str:
        """Returns the table as text in the given format."""
        buffer = io.StringIO()
        self.write(buffer, output_format)
        return buffer.getvalue()

    def write(self, stream: TextIO, output_format: str = FORMAT_CSV):
        """Writes the table to the stream in the given format."""
        if output_format == FORMAT_CSV:
            self.write_csv(stream)
        elif output_format == FORMAT_JSON:
            self.write_json(stream)
        else:
            raise ConfigValueError("'{:s}' is not a valid output format".format(str(output_format)))


def write_table(table: DataTable, path: Optional[str], output_format: str = FORMAT_CSV):
    """Writes the table to the file at path, or to stdout when path is None or '-'.
       OSError from opening or writing the file is passed on to the caller."""
    if path is None or path == STDOUT_PATH:
        table.write(sys.stdout, output_format)
        sys.stdout.flush()
        return
    with open(path, mode="w", encoding="utf-8", newline="") as output_file:
        table.write(output_file, output_format)
    LOGGER.info("Wrote {:d} series of '{:s}' to {:s}".format(len(table.series), table.command, path))
