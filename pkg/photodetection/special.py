# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the special functions needed by the closed-form state functionals:
modified Bessel functions of the first kind and the upper and lower incomplete Gamma functions,
all for integer order and all evaluated in the log domain.

Every function broadcasts over its arguments like a numpy ufunc and returns a float for scalar input.
"""

from typing import Union

import numpy
from scipy.special import gammaln, logsumexp, xlogy

from photodetection.exceptions.errors import ParameterValueError
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

ArrayLike = Union[int, float, numpy.ndarray]

# extra series terms beyond the peak of the summand, in units of the peak width
SERIES_WIDTH_FACTOR = 12.0
SERIES_EXTRA_TERMS = 60


def _as_output(values: numpy.ndarray) -> Union[float, numpy.ndarray]:
    if values.ndim == 0:
        return float(values)
    return values


def _check_order(order: numpy.ndarray, minimum: int, name: str):
    if numpy.any(order < minimum) or numpy.any(numpy.floor(order) != order):
        raise ParameterValueError("{:s} must be an integer >= {:d}, got {:s}".format(name, minimum, str(order)))


def _check_argument(argument: numpy.ndarray):
    if numpy.any(argument < 0) or not numpy.all(numpy.isfinite(argument)):
        raise ParameterValueError("Argument must be finite and non-negative, got {:s}".format(str(argument)))


def log_bessel_i(n: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns log I_n(x) from the power series sum_m (x/2)^(2m+n) / (m! (m+n)!).
       I_0(0) = 1 gives 0 and I_n(0) = 0 for n >= 1 gives -inf."""
    order, argument = numpy.broadcast_arrays(numpy.asarray(n, dtype=float), numpy.asarray(x, dtype=float))
    _check_order(order, 0, "Bessel order")
    _check_argument(argument)

    half = argument / 2.0
    largest = float(half.max()) if half.size > 0 else 0.0
    n_terms = int(largest + SERIES_WIDTH_FACTOR * numpy.sqrt(largest + 1.0)) + SERIES_EXTRA_TERMS
    m = numpy.arange(n_terms, dtype=float)

    terms = (
        xlogy(2.0 * m + order[..., None], half[..., None])
        - gammaln(m + 1.0)
        - gammaln(m + order[..., None] + 1.0)
    )
    with numpy.errstate(divide="ignore"):
        return _as_output(numpy.asarray(logsumexp(terms, axis=-1)))


def bessel_i(n: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns the modified Bessel function of the first kind I_n(x) for integer n >= 0."""
    return _as_output(numpy.exp(numpy.asarray(log_bessel_i(n, x))))


def log_upper_gamma(a: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns log Gamma(a, x) for integer a >= 1 using Gamma(a, x) = (a-1)! e^-x sum_{k<a} x^k/k!."""
    order, argument = numpy.broadcast_arrays(numpy.asarray(a, dtype=float), numpy.asarray(x, dtype=float))
    _check_order(order, 1, "Gamma order")
    _check_argument(argument)

    k = numpy.arange(int(order.max()) if order.size > 0 else 1, dtype=float)
    terms = xlogy(k, argument[..., None]) - gammaln(k + 1.0)
    terms = numpy.where(k < order[..., None], terms, -numpy.inf)
    return _as_output(gammaln(order) - argument + logsumexp(terms, axis=-1))


def upper_gamma(a: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns the upper incomplete Gamma function Gamma(a, x) for integer a >= 1."""
    return _as_output(numpy.exp(numpy.asarray(log_upper_gamma(a, x))))


def _log_lower_gamma_series(order: numpy.ndarray, argument: numpy.ndarray) -> numpy.ndarray:
    # gamma(a, x) = x^a e^-x Gamma(a) sum_k x^k / Gamma(a + k + 1), all terms positive
    largest = float(argument.max())
    n_terms = int(SERIES_WIDTH_FACTOR * numpy.sqrt(largest + 1.0)) + SERIES_EXTRA_TERMS
    k = numpy.arange(n_terms, dtype=float)
    terms = xlogy(k, argument[:, None]) - gammaln(order[:, None] + k + 1.0)
    with numpy.errstate(divide="ignore", invalid="ignore"):
        return -argument + xlogy(order, argument) + gammaln(order) + logsumexp(terms, axis=1)


def log_lower_gamma(a: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns log gamma(a, x) for integer a >= 1.
       Below x < a the series form is used; above, (a-1)! - Gamma(a, x) where Gamma(a, x)/(a-1)! is
       at most about one half so that the subtraction is safe."""
    order, argument = numpy.broadcast_arrays(numpy.asarray(a, dtype=float), numpy.asarray(x, dtype=float))
    _check_order(order, 1, "Gamma order")
    _check_argument(argument)

    flat_order = order.ravel()
    flat_argument = argument.ravel()
    result = numpy.empty(flat_order.shape, dtype=float)

    use_series = flat_argument < flat_order
    if numpy.any(use_series):
        result[use_series] = _log_lower_gamma_series(flat_order[use_series], flat_argument[use_series])
    use_complement = ~use_series
    if numpy.any(use_complement):
        complement_order = flat_order[use_complement]
        log_factorial = gammaln(complement_order)
        log_upper = numpy.asarray(log_upper_gamma(complement_order, flat_argument[use_complement]))
        result[use_complement] = log_factorial + numpy.log1p(-numpy.exp(log_upper - log_factorial))

    return _as_output(result.reshape(order.shape))


def lower_gamma(a: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns the lower incomplete Gamma function gamma(a, x) for integer a >= 1."""
    return _as_output(numpy.exp(numpy.asarray(log_lower_gamma(a, x))))


def log_regularized_lower_gamma(a: ArrayLike, x: ArrayLike) -> Union[float, numpy.ndarray]:
    """Returns log P(a, x) = log(gamma(a, x) / (a-1)!)."""
    return _as_output(
        numpy.asarray(log_lower_gamma(a, x)) - gammaln(numpy.asarray(a, dtype=float)))
