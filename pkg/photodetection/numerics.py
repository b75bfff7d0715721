# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the numerical helpers shared by the SD and E model modules:
argument checks, evaluation path selection, dark count convolution and the counting time solver."""

from typing import Callable, Optional, Union

import numpy
from scipy.optimize import brentq
from scipy.stats import poisson

from photodetection.exceptions.errors import ModelTypeError, ParameterValueError
from photodetection.fock import DiagonalFockState, StateKind
from photodetection.parameters import DetectorParams
from photodetection.results import CountDistribution
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

METHOD_AUTO = "auto"
METHOD_GENERIC = "generic"
METHOD_CLOSED = "closed"
EVALUATION_METHODS = [METHOD_AUTO, METHOD_GENERIC, METHOD_CLOSED]

COUNT_MASS_TOLERANCE = 1e-9
DARK_TAIL_FACTOR = 10.0
DEFAULT_WINDOW_FACTOR = 10.0
GRID_STEP_FACTOR = 0.01
DEFAULT_COUNTING_FRACTION = 0.95
MAX_BRACKET_DOUBLINGS = 200


def check_time(t: Union[float, numpy.ndarray], name: str = "t"):
    """Raises ParameterValueError unless every given time is finite and non-negative."""
    values = numpy.asarray(t, dtype=float)
    if not bool(numpy.all(numpy.isfinite(values))) or bool(numpy.any(values < 0.0)):
        raise ParameterValueError("{:s} must be finite and non-negative, got {:s}".format(name, str(t)))


def check_order(k: int, minimum: int = 0, name: str = "k"):
    """Raises ParameterValueError unless k is an integer not below minimum."""
    if isinstance(k, bool) or not isinstance(k, (int, numpy.integer)) or k < minimum:
        raise ParameterValueError("{:s} must be an integer >= {:d}, got {:s}".format(name, minimum, str(k)))


def resolve_method(state: DiagonalFockState, method: str) -> str:
    """Returns the evaluation path to use for the given state: generic Fock sums or the per-state closed forms.
       auto takes the closed forms for thermal and number states and the generic sums otherwise."""
    if method not in EVALUATION_METHODS:
        raise ModelTypeError("'{:s}' is not a valid evaluation method".format(str(method)))
    kind = state.kind
    if method == METHOD_CLOSED:
        if kind is None:
            raise ModelTypeError("Closed forms need a state built from a known state kind")
        return METHOD_CLOSED
    if method == METHOD_AUTO and kind is not None and kind.tag in (StateKind.THERMAL, StateKind.NUMBER):
        return METHOD_CLOSED
    return METHOD_GENERIC


def dark_count_pmf(params: DetectorParams, t: float, size: int) -> numpy.ndarray:
    """Returns the Poisson probabilities of k = 0, ..., size - 1 dark counts in (0, t)."""
    mean = params.dark * params.rate * t
    pmf = numpy.zeros(size)
    if mean == 0.0:
        pmf[0] = 1.0
        return pmf
    return poisson.pmf(numpy.arange(size), mean)


def count_cap(state: DiagonalFockState, params: DetectorParams, t: float) -> int:
    """Returns the largest count evaluated by default: real counts cannot exceed n_max and the
       dark counts are bounded by ten times their mean."""
    return state.n_max + int(numpy.ceil(DARK_TAIL_FACTOR * params.dark * params.rate * t))


def build_count_distribution(probs: numpy.ndarray, t: float, m_max: Optional[int]) -> CountDistribution:
    """Returns the count distribution from the probabilities evaluated up to the cap.
       For m_max None the distribution is cut at the smallest m holding all but COUNT_MASS_TOLERANCE of the mass."""
    probs = numpy.clip(probs, 0.0, None)
    if m_max is None:
        cumulative = numpy.cumsum(probs)
        above = numpy.nonzero(cumulative > 1.0 - COUNT_MASS_TOLERANCE)[0]
        m_max = int(above[0]) if above.size > 0 else probs.size - 1
    kept = probs[:m_max + 1]
    distribution = CountDistribution(kept, t, 1.0 - float(kept.sum()))
    if distribution.tail > COUNT_MASS_TOLERANCE:
        LOGGER.warning("Count distribution at t={:s} leaves a tail of {:s} beyond m_max={:d}".format(
            repr(t), repr(distribution.tail), distribution.m_max))
    return distribution


def default_window(params: DetectorParams) -> float:
    """Returns the default averaging window 10/(eta lambda)."""
    if params.eta == 0.0:
        raise ParameterValueError("The default averaging window needs eta > 0, give the window explicitly")
    return DEFAULT_WINDOW_FACTOR / (params.eta * params.rate)


def max_grid_step(params: DetectorParams) -> float:
    """Returns the largest quadrature step 0.01/(eta lambda), infinite for eta = 0."""
    if params.eta == 0.0:
        return numpy.inf
    return GRID_STEP_FACTOR / (params.eta * params.rate)


def solve_counting_time(mean_function: Callable[[float], float], target: float, rate: float) -> float:
    """Returns the time where the non-decreasing mean_function reaches target, found with brentq
       after doubling the upper bracket from 1/rate."""
    if target <= 0.0:
        return 0.0
    upper = 1.0 / rate
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if mean_function(upper) >= target:
            break
        upper *= 2.0
    else:
        raise ParameterValueError("Mean counts never reach {:s}".format(repr(target)))
    return float(brentq(lambda time: mean_function(time) - target, 0.0, upper, xtol=1e-12, rtol=1e-12))
