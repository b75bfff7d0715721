# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""
Defines the result value classes shared by the analytic models and the trajectory ensembles:
count distributions, waiting-time curves, waiting-time histograms and ensemble statistics.
"""

from __future__ import annotations
import json
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy
from scipy.integrate import simpson
from scipy.special import gammaln

from photodetection.exceptions.errors import ParameterValueError, UndefinedValueError
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
MINIMUM_SIMPSON_INTERVALS = 2000

FloatArray = Union[Sequence[float], numpy.ndarray]


def _finite_vector(values: FloatArray) -> numpy.ndarray:
    array = numpy.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _float_list(values: Optional[numpy.ndarray]) -> Optional[List[Optional[float]]]:
    if values is None:
        return None
    return [float(value) if numpy.isfinite(value) else None for value in values]


class CountDistribution:
    """Probabilities P_t(m) of m registered counts in (0, t) for m = 0, ..., m_max and the residual tail."""

    PROBS_ATTRIBUTE = "probs"
    TIME_ATTRIBUTE = "t"
    TAIL_ATTRIBUTE = "tail"

    def __init__(self, probs: FloatArray, t: float, tail: Optional[float] = None):
        """Creates a new count distribution. When tail is None it is taken as 1 - sum(probs).
           Raises ParameterValueError for negative or non-finite probabilities or an inconsistent tail."""
        values = _finite_vector(probs)
        if not self._check_probs(values):
            raise ParameterValueError("Count probabilities must be a non-empty vector of non-negative values")
        if not numpy.isfinite(t) or t < 0:
            raise ParameterValueError("'{:s}' is not a valid counting time".format(str(t)))
        total = float(values.sum())
        if tail is None:
            tail = 1.0 - total
        if abs(total + tail - 1.0) > NORMALIZATION_TOLERANCE:
            raise ParameterValueError("Count probabilities sum {:s} and tail {:s} do not add up to one".format(
                repr(total), repr(tail)))

        self.__probs = values
        self.__t = float(t)
        self.__tail = float(tail)
        if self.__tail > NORMALIZATION_TOLERANCE:
            LOGGER.debug("Count distribution at t={:s} truncated at m_max={:d} with tail {:s}".format(
                repr(self.__t), self.m_max, repr(self.__tail)))

    @property
    def probs(self) -> numpy.ndarray:
        """The read-only probabilities P(m)."""
        return self.__probs

    @property
    def t(self) -> float:
        """The counting time."""
        return self.__t

    @property
    def tail(self) -> float:
        """The probability mass beyond m_max."""
        return self.__tail

    @property
    def m_max(self) -> int:
        """The largest count held by the distribution."""
        return self.__probs.size - 1

    @property
    def mean(self) -> float:
        """The mean number of counts."""
        return self.factorial_moment(1)

    def factorial_moment(self, k: int) -> float:
        """Returns sum_m P(m) m!/(m-k)!."""
        if self.m_max < k:
            return 0.0
        m = numpy.arange(k, self.m_max + 1, dtype=float)
        return float(numpy.sum(self.__probs[k:] * numpy.exp(gammaln(m + 1.0) - gammaln(m - k + 1.0))))

    @classmethod
    def _check_probs(cls, values: numpy.ndarray) -> bool:
        return (
            values.ndim == 1 and values.size > 0 and
            bool(numpy.all(numpy.isfinite(values))) and bool(numpy.all(values >= 0.0))
        )

    def json(self) -> Dict[str, Any]:
        """Returns the distribution as a dictionary."""
        return {
            self.PROBS_ATTRIBUTE: _float_list(self.__probs),
            self.TIME_ATTRIBUTE: self.__t,
            self.TAIL_ATTRIBUTE: self.__tail
        }

    def __eq__(self, other: Any) -> bool:
        return (
            isinstance(other, CountDistribution) and
            numpy.array_equal(self.__probs, other.probs) and
            self.__t == other.t and self.__tail == other.tail
        )

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "CountDistribution(t={:s}, m_max={:d}, tail={:s})".format(repr(self.__t), self.m_max, repr(self.__tail))


def simpson_grid(window: float, max_step: float) -> numpy.ndarray:
    """Returns an evenly spaced grid on [0, window] with an even number of intervals,
       at least MINIMUM_SIMPSON_INTERVALS of them and with a step not above max_step."""
    if not numpy.isfinite(window) or window <= 0:
        raise ParameterValueError("'{:s}' is not a valid averaging window".format(str(window)))
    n_intervals = MINIMUM_SIMPSON_INTERVALS
    if numpy.isfinite(max_step) and max_step > 0:
        n_intervals = max(n_intervals, int(numpy.ceil(window / max_step)))
    n_intervals += n_intervals % 2
    return numpy.linspace(0.0, window, n_intervals + 1)


class WaitingTimeCurve:
    """Non-normalized waiting-time density W_t(tau) sampled on a tau grid starting at 0,
       with its normalization and mean over the grid obtained by composite Simpson quadrature."""

    TIME_ATTRIBUTE = "t"
    TAU_ATTRIBUTE = "tau"
    DENSITY_ATTRIBUTE = "density"
    NORMALIZATION_ATTRIBUTE = "normalization"
    MEAN_ATTRIBUTE = "mean"

    def __init__(self, t: float, tau: FloatArray, density: FloatArray):
        """Creates a new waiting-time curve. Raises ParameterValueError if the grid or the density is invalid."""
        tau_values = _finite_vector(tau)
        density_values = _finite_vector(density)
        if tau_values.ndim != 1 or tau_values.size < 3 or tau_values.size != density_values.size:
            raise ParameterValueError("Waiting-time grid and density must be vectors of equal length >= 3")
        if not bool(numpy.all(numpy.diff(tau_values) > 0)):
            raise ParameterValueError("Waiting-time grid must be strictly increasing")
        if not bool(numpy.all(numpy.isfinite(density_values))) or bool(numpy.any(density_values < 0)):
            raise ParameterValueError("Waiting-time density must be finite and non-negative")

        self.__t = float(t)
        self.__tau = tau_values
        self.__density = density_values
        self.__normalization = float(simpson(density_values, x=tau_values))
        self.__first_moment = float(simpson(tau_values * density_values, x=tau_values))

    @property
    def t(self) -> float:
        """The time of the first click."""
        return self.__t

    @property
    def tau(self) -> numpy.ndarray:
        """The waiting-time grid."""
        return self.__tau

    @property
    def density(self) -> numpy.ndarray:
        """The non-normalized density on the grid."""
        return self.__density

    @property
    def window(self) -> float:
        """The averaging window, the last grid point."""
        return float(self.__tau[-1])

    @property
    def normalization(self) -> float:
        """The integral of the density over the window."""
        return self.__normalization

    @property
    def mean(self) -> float:
        """The mean waiting time over the window. Raises UndefinedValueError if the normalization is zero."""
        if self.__normalization <= 0.0:
            raise UndefinedValueError("Mean waiting time at t={:s} is undefined: zero normalization".format(
                repr(self.__t)))
        return self.__first_moment / self.__normalization

    def json(self) -> Dict[str, Any]:
        """Returns the curve as a dictionary."""
        try:
            mean_value: Optional[float] = self.mean
        except UndefinedValueError:
            mean_value = None
        return {
            self.TIME_ATTRIBUTE: self.__t,
            self.TAU_ATTRIBUTE: _float_list(self.__tau),
            self.DENSITY_ATTRIBUTE: _float_list(self.__density),
            self.NORMALIZATION_ATTRIBUTE: self.__normalization,
            self.MEAN_ATTRIBUTE: mean_value
        }

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "WaitingTimeCurve(t={:s}, window={:s}, normalization={:s})".format(
            repr(self.__t), repr(self.window), repr(self.__normalization))


class WaitingHistogram:
    """Empirical distribution of gaps between consecutive registered clicks, kept gaps only."""

    def __init__(self, bin_edges: FloatArray, gap_counts: Sequence[int], gap_sum: float, gap_square_sum: float):
        """Creates a histogram from the kept gap counts per bin and the sums of gaps and squared gaps."""
        self.__bin_edges = _finite_vector(bin_edges)
        self.__gap_counts = numpy.array(gap_counts, dtype=numpy.int64)
        if self.__bin_edges.size != self.__gap_counts.size + 1:
            raise ParameterValueError("Waiting histogram needs one more bin edge than bins")
        self.__gap_sum = float(gap_sum)
        self.__gap_square_sum = float(gap_square_sum)

    @property
    def bin_edges(self) -> numpy.ndarray:
        """The bin edges on [0, window]."""
        return self.__bin_edges

    @property
    def n_gaps(self) -> int:
        """The number of kept gaps."""
        return int(self.__gap_counts.sum())

    @property
    def densities(self) -> numpy.ndarray:
        """The normalized histogram density, sum(densities * widths) = 1 for a non-empty histogram."""
        if self.n_gaps == 0:
            return numpy.zeros(self.__gap_counts.size)
        return self.__gap_counts / (self.n_gaps * numpy.diff(self.__bin_edges))

    @property
    def errors(self) -> numpy.ndarray:
        """The binomial standard errors of the densities."""
        if self.n_gaps == 0:
            return numpy.zeros(self.__gap_counts.size)
        fractions = self.__gap_counts / self.n_gaps
        return numpy.sqrt(fractions * (1.0 - fractions) / self.n_gaps) / numpy.diff(self.__bin_edges)

    @property
    def mean_gap(self) -> float:
        """The mean kept gap. Raises UndefinedValueError when no gap was kept."""
        if self.n_gaps == 0:
            raise UndefinedValueError("Mean gap is undefined: no gaps inside the window")
        return self.__gap_sum / self.n_gaps

    @property
    def mean_gap_se(self) -> float:
        """The standard error of the mean kept gap."""
        n_gaps = self.n_gaps
        if n_gaps < 2:
            raise UndefinedValueError("Standard error of the mean gap needs at least two gaps")
        variance = (self.__gap_square_sum - n_gaps * self.mean_gap ** 2) / (n_gaps - 1)
        return float(numpy.sqrt(max(variance, 0.0) / n_gaps))

    def json(self) -> Dict[str, Any]:
        """Returns the histogram as a dictionary."""
        return {
            "bin_edges": _float_list(self.__bin_edges),
            "densities": _float_list(self.densities),
            "errors": _float_list(self.errors),
            "n_gaps": self.n_gaps
        }


class EnsembleStats:
    """Monte Carlo estimates from a trajectory ensemble.
       Standard errors are sample standard deviations divided by sqrt(n_traj)."""

    def __init__(self, n_traj: int, seed: int, t_grid: FloatArray,
                 count_sums: Optional[numpy.ndarray] = None, count_square_sums: Optional[numpy.ndarray] = None,
                 pair_sums: Optional[numpy.ndarray] = None, pair_square_sums: Optional[numpy.ndarray] = None,
                 count_histogram: Optional[List[numpy.ndarray]] = None,
                 waiting_histogram: Optional[WaitingHistogram] = None):
        """Creates the statistics from the reduced sums over trajectories of the registered count m,
           m^2, m(m-1) and (m(m-1))^2 at each grid time."""
        if n_traj < 1:
            raise ParameterValueError("Ensemble needs at least one trajectory, got {:s}".format(str(n_traj)))
        self.__n_traj = int(n_traj)
        self.__seed = int(seed)
        self.__t_grid = _finite_vector(t_grid)
        self.__count_sums = count_sums
        self.__count_square_sums = count_square_sums
        self.__pair_sums = pair_sums
        self.__pair_square_sums = pair_square_sums
        self.__count_histogram = count_histogram
        self.__waiting_histogram = waiting_histogram

    @property
    def n_traj(self) -> int:
        """The number of trajectories."""
        return self.__n_traj

    @property
    def seed(self) -> int:
        """The master seed."""
        return self.__seed

    @property
    def t_grid(self) -> numpy.ndarray:
        """The grid times."""
        return self.__t_grid

    def _mean_and_error(self, sums: Optional[numpy.ndarray],
                        square_sums: Optional[numpy.ndarray]) -> Optional[numpy.ndarray]:
        if sums is None or square_sums is None:
            return None
        n_traj = self.__n_traj
        means = sums / n_traj
        if n_traj < 2:
            return numpy.stack([means, numpy.full(means.size, numpy.nan)])
        variances = numpy.maximum(square_sums - n_traj * means ** 2, 0.0) / (n_traj - 1)
        return numpy.stack([means, numpy.sqrt(variances / n_traj)])

    @property
    def mean_counts(self) -> Optional[numpy.ndarray]:
        """The mean registered count at each grid time."""
        estimate = self._mean_and_error(self.__count_sums, self.__count_square_sums)
        return None if estimate is None else estimate[0]

    @property
    def mean_counts_se(self) -> Optional[numpy.ndarray]:
        """The standard errors of mean_counts."""
        estimate = self._mean_and_error(self.__count_sums, self.__count_square_sums)
        return None if estimate is None else estimate[1]

    @property
    def second_factorial(self) -> Optional[numpy.ndarray]:
        """The mean of m(m-1) at each grid time."""
        estimate = self._mean_and_error(self.__pair_sums, self.__pair_square_sums)
        return None if estimate is None else estimate[0]

    @property
    def second_factorial_se(self) -> Optional[numpy.ndarray]:
        """The standard errors of second_factorial."""
        estimate = self._mean_and_error(self.__pair_sums, self.__pair_square_sums)
        return None if estimate is None else estimate[1]

    @property
    def count_histogram(self) -> Optional[List[numpy.ndarray]]:
        """The empirical count probabilities at each grid time."""
        if self.__count_histogram is None:
            return None
        return [counts / self.__n_traj for counts in self.__count_histogram]

    @property
    def waiting_histogram(self) -> Optional[WaitingHistogram]:
        """The waiting-time histogram, if the ensemble collected gaps."""
        return self.__waiting_histogram

    def json(self) -> Dict[str, Any]:
        """Returns the statistics as a dictionary."""
        histogram = self.count_histogram
        return {
            "n_traj": self.__n_traj,
            "seed": self.__seed,
            "t_grid": _float_list(self.__t_grid),
            "mean_counts": _float_list(self.mean_counts),
            "mean_counts_se": _float_list(self.mean_counts_se),
            "second_factorial": _float_list(self.second_factorial),
            "second_factorial_se": _float_list(self.second_factorial_se),
            "count_histogram": None if histogram is None else [_float_list(values) for values in histogram],
            "waiting_histogram": None if self.__waiting_histogram is None else self.__waiting_histogram.json()
        }

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, EnsembleStats) and self.json() == other.json()

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "EnsembleStats(n_traj={:d}, seed={:d})".format(self.__n_traj, self.__seed)
