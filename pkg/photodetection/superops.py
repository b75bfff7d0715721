# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the diagonal-basis action of the elementary superoperators and their compositions.

Every elementary superoperator is a power series in one of the lowering actions
    A:   (A s)[n] = (n + 1) s[n + 1]        (a rho a^dagger)
    Eps: (Eps s)[n] = s[n + 1]              (E_- rho E_+)
or the diagonal damping U(lt): (U s)[n] = exp(-lt n) s[n]. On the truncated space both lowering actions
are nilpotent, so the series end exactly at the truncation edge. The sums are carried out in the log domain;
the log_* functions work directly on log-probability arrays so that the model modules can chain them.
"""

from __future__ import annotations
import json
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy
from scipy.special import gammaln, logsumexp, xlogy

from photodetection.exceptions.errors import ModelTypeError, ParameterValueError
from photodetection.fock import DiagonalFockState
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

# rows of the shift-series kernel evaluated at once, bounds the temporary memory to BLOCK_ROWS * (n_max + 1)
BLOCK_ROWS = 256


def _check_nonnegative(value: float, name: str):
    if not numpy.isfinite(value) or value < 0:
        raise ParameterValueError("{:s} must be finite and non-negative, got {:s}".format(name, str(value)))


def _check_probability(value: float, name: str):
    if not 0.0 <= value <= 1.0:
        raise ParameterValueError("{:s} must be in [0, 1], got {:s}".format(name, str(value)))


def log_shift_series(log_values: numpy.ndarray, log_coefficients: numpy.ndarray,
                     binomial: bool = False) -> numpy.ndarray:
    """Returns log out where out[n] = sum_l c_l [C(n + l, n)] s[n + l], the binomial factor
       included only when binomial is True. The coefficients c_l beyond the given array are zero."""
    size = log_values.size
    coefficients = numpy.full(size, -numpy.inf)
    n_coefficients = min(size, len(log_coefficients))
    coefficients[:n_coefficients] = log_coefficients[:n_coefficients]

    result = numpy.full(size, -numpy.inf)
    with numpy.errstate(divide="ignore", invalid="ignore"):
        for start in range(0, size, BLOCK_ROWS):
            rows = numpy.arange(start, min(start + BLOCK_ROWS, size))
            lags = numpy.arange(size - start)
            index = rows[:, None] + lags[None, :]
            valid = index < size
            safe_index = numpy.where(valid, index, 0)
            terms = log_values[safe_index] + coefficients[None, :size - start]
            if binomial:
                terms = terms + (
                    gammaln(safe_index + 1.0) - gammaln(rows[:, None] + 1.0) - gammaln(lags[None, :] + 1.0))
            terms = numpy.where(valid, terms, -numpy.inf)
            result[rows] = logsumexp(terms, axis=1)
    return result


def log_power_coefficients(y: float, size: int, factorial: bool = True) -> numpy.ndarray:
    """Returns log(y^l / l!) for l = 0, ..., size - 1, or log(y^l) when factorial is False. 0^0 = 1."""
    lags = numpy.arange(size, dtype=float)
    coefficients = xlogy(lags, y)
    if factorial:
        coefficients = coefficients - gammaln(lags + 1.0)
    return coefficients


def log_apply_A(log_values: numpy.ndarray) -> numpy.ndarray:
    """Log-domain version of apply_A."""
    result = numpy.full(log_values.size, -numpy.inf)
    result[:-1] = log_values[1:] + numpy.log(numpy.arange(1, log_values.size))
    return result


def log_apply_eps(log_values: numpy.ndarray) -> numpy.ndarray:
    """Log-domain version of apply_eps."""
    result = numpy.full(log_values.size, -numpy.inf)
    result[:-1] = log_values[1:]
    return result


def log_apply_U(log_values: numpy.ndarray, lt: float) -> numpy.ndarray:
    """Log-domain version of apply_U."""
    _check_nonnegative(lt, "lt")
    return log_values - lt * numpy.arange(log_values.size)


def log_apply_exp_A(log_values: numpy.ndarray, y: float) -> numpy.ndarray:
    """Log-domain version of apply_exp_A."""
    _check_nonnegative(y, "y")
    return log_shift_series(log_values, log_power_coefficients(y, log_values.size, factorial=False), binomial=True)


def log_apply_A_series(log_values: numpy.ndarray, log_coefficients: numpy.ndarray) -> numpy.ndarray:
    """Log-domain version of apply_A_series."""
    lags = numpy.arange(len(log_coefficients), dtype=float)
    return log_shift_series(log_values, numpy.asarray(log_coefficients) + gammaln(lags + 1.0), binomial=True)


def log_apply_exp_eps(log_values: numpy.ndarray, y: float) -> numpy.ndarray:
    """Log-domain version of apply_exp_eps."""
    _check_nonnegative(y, "y")
    return log_shift_series(log_values, log_power_coefficients(y, log_values.size))


def log_apply_resolvent_eps(log_values: numpy.ndarray, q: float) -> numpy.ndarray:
    """Log-domain version of apply_resolvent_eps."""
    _check_probability(q, "q")
    return log_shift_series(log_values, log_power_coefficients(q, log_values.size, factorial=False))


def log_apply_R(log_values: numpy.ndarray, lt: float, q: float) -> numpy.ndarray:
    """Log-domain version of apply_R."""
    _check_nonnegative(lt, "lt")
    _check_probability(q, "q")
    return log_apply_exp_eps(log_values, lt * q) - lt


def _from_log(log_values: numpy.ndarray) -> DiagonalFockState:
    return DiagonalFockState(numpy.exp(log_values), normalized=False)


def apply_A(s: DiagonalFockState) -> DiagonalFockState:
    """Returns A s with (A s)[n] = (n + 1) s[n + 1] and a zero at n_max."""
    probs = numpy.zeros(s.probs.size)
    probs[:-1] = numpy.arange(1, s.probs.size) * s.probs[1:]
    return DiagonalFockState(probs, normalized=False)


def apply_eps(s: DiagonalFockState) -> DiagonalFockState:
    """Returns Eps s with (Eps s)[n] = s[n + 1] and a zero at n_max."""
    probs = numpy.zeros(s.probs.size)
    probs[:-1] = s.probs[1:]
    return DiagonalFockState(probs, normalized=False)


def apply_U(s: DiagonalFockState, lt: float) -> DiagonalFockState:
    """Returns U(lt) s with (U s)[n] = exp(-lt n) s[n]."""
    _check_nonnegative(lt, "lt")
    return DiagonalFockState(numpy.exp(-lt * s.photon_numbers) * s.probs, normalized=False)


def apply_exp_A(s: DiagonalFockState, y: float) -> DiagonalFockState:
    """Returns exp(y A) s with out[n] = sum_l C(n + l, n) y^l s[n + l]."""
    return _from_log(log_apply_exp_A(s.log_probs, y))


def apply_A_series(s: DiagonalFockState, log_coefficients: Sequence[float]) -> DiagonalFockState:
    """Returns f(A) s for the power series f(A) = sum_l c_l A^l given log c_l,
       that is out[n] = sum_l c_l (n + l)!/n! s[n + l]."""
    return _from_log(log_apply_A_series(s.log_probs, numpy.asarray(log_coefficients, dtype=float)))


def apply_exp_eps(s: DiagonalFockState, y: float) -> DiagonalFockState:
    """Returns exp(y Eps) s with out[n] = sum_l y^l/l! s[n + l]."""
    return _from_log(log_apply_exp_eps(s.log_probs, y))


def apply_resolvent_eps(s: DiagonalFockState, q: float) -> DiagonalFockState:
    """Returns (1 - q Eps)^-1 s with out[n] = sum_l q^l s[n + l], a finite series on the truncated space."""
    return _from_log(log_apply_resolvent_eps(s.log_probs, q))


def apply_R(s: DiagonalFockState, lt: float, q: float) -> DiagonalFockState:
    """Returns R(lt, q) s = exp(-lt (1 - q Eps)) s."""
    return _from_log(log_apply_R(s.log_probs, lt, q))


def scale(s: DiagonalFockState, factor: float) -> DiagonalFockState:
    """Returns factor * s."""
    _check_nonnegative(factor, "factor")
    return DiagonalFockState(factor * s.probs, normalized=False)


SuperopFactor = Tuple[str, Tuple[Tuple[str, float], ...]]


class DiagonalSuperop:
    """A named elementary superoperator with its parameters, or a composition of them.
       Calling the object on a DiagonalFockState applies it; compositions act right to left,
       so (first @ second)(s) == first(second(s)). The factors are chained on log weights and only the
       final result is exponentiated."""

    NAME_ATTRIBUTE = "name"
    PARAMETERS_ATTRIBUTE = "parameters"

    # name -> (log-domain kernel, parameter names, is a power series in Eps)
    __actions: Dict[str, Tuple[Callable[..., numpy.ndarray], Tuple[str, ...], bool]] = {}

    PARAMETER_CHECKS: Dict[str, Callable[[float, str], None]] = {
        "lt": _check_nonnegative,
        "y": _check_nonnegative,
        "q": _check_probability
    }

    def __init__(self, name: str, **parameters: float):
        """Creates an elementary superoperator. Raises ModelTypeError for unregistered names and
           ParameterValueError for missing or invalid parameters."""
        if not self._check_name(name):
            raise ModelTypeError("'{:s}' is not a registered superoperator".format(str(name)))
        self._check_parameters(name, parameters)
        parameter_names = self.__actions[name][1]
        self.__factors: Tuple[SuperopFactor, ...] = (
            (name, tuple((parameter, float(parameters[parameter])) for parameter in parameter_names)),
        )

    @classmethod
    def register_action(cls, name: str, log_kernel: Callable[..., numpy.ndarray],
                        parameter_names: Tuple[str, ...] = (), eps_function: bool = False):
        """Registers a new elementary action under the given name. The kernel maps log weights to
           log weights and takes the parameters positionally after them."""
        cls.__actions[name] = (log_kernel, parameter_names, eps_function)

    @classmethod
    def get_registered_names(cls) -> List[str]:
        """Returns the names of the registered elementary actions."""
        return list(cls.__actions.keys())

    @classmethod
    def _check_name(cls, name: str) -> bool:
        return name in cls.__actions

    @classmethod
    def _check_parameters(cls, name: str, parameters: Dict[str, float]):
        parameter_names = cls.__actions[name][1]
        if set(parameters.keys()) != set(parameter_names):
            raise ParameterValueError("Superoperator {:s} requires the parameters {:s}, got {:s}".format(
                name, str(list(parameter_names)), str(list(parameters.keys()))))
        for parameter_name, value in parameters.items():
            cls.PARAMETER_CHECKS[parameter_name](value, parameter_name)

    @property
    def factors(self) -> Tuple[SuperopFactor, ...]:
        """The elementary factors in application order reversed, the leftmost factor acts last."""
        return self.__factors

    @property
    def is_eps_function(self) -> bool:
        """True if every factor is a power series in Eps. Such superoperators commute pairwise."""
        return all(self.__actions[name][2] for name, _ in self.__factors)

    @classmethod
    def compose(cls, *superops: DiagonalSuperop) -> DiagonalSuperop:
        """Returns the composition of the given superoperators, the first one acting last."""
        if not superops:
            raise ParameterValueError("At least one superoperator is needed for a composition")
        composition = cls.__new__(cls)
        composition.__factors = tuple(factor for superop in superops for factor in superop.factors)
        return composition

    def __matmul__(self, other: DiagonalSuperop) -> DiagonalSuperop:
        return DiagonalSuperop.compose(self, other)

    def log_apply(self, log_values: numpy.ndarray) -> numpy.ndarray:
        """Applies the superoperator to log weights and returns the resulting log weights."""
        result = numpy.asarray(log_values, dtype=float)
        for name, parameters in reversed(self.__factors):
            log_kernel = self.__actions[name][0]
            result = log_kernel(result, *(value for _, value in parameters))
        return result

    def __call__(self, state: DiagonalFockState) -> DiagonalFockState:
        return _from_log(self.log_apply(state.log_probs))

    def json(self) -> List[Dict[str, Any]]:
        """Returns the factors as a list of dictionaries."""
        return [
            {self.NAME_ATTRIBUTE: name, self.PARAMETERS_ATTRIBUTE: dict(parameters)}
            for name, parameters in self.__factors
        ]

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, DiagonalSuperop) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.__factors)

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return " @ ".join(
            "{:s}({:s})".format(name, ", ".join("{:s}={:s}".format(key, repr(value)) for key, value in parameters))
            for name, parameters in self.__factors)


DiagonalSuperop.register_action("A", log_apply_A)
DiagonalSuperop.register_action("Eps", log_apply_eps, eps_function=True)
DiagonalSuperop.register_action("U", log_apply_U, ("lt",))
DiagonalSuperop.register_action("ExpA", log_apply_exp_A, ("y",))
DiagonalSuperop.register_action("ExpEps", log_apply_exp_eps, ("y",), eps_function=True)
DiagonalSuperop.register_action("ResolventEps", log_apply_resolvent_eps, ("q",), eps_function=True)
DiagonalSuperop.register_action("R", log_apply_R, ("lt", "q"), eps_function=True)
