# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the diagonal Fock-space state class and the constructors for the
coherent, number and thermal states with controlled truncation."""

from __future__ import annotations
import json
from typing import Any, Dict, Optional, Sequence, Union

import numpy
from scipy.special import gammaln, logsumexp, xlogy
from scipy.stats import poisson

from photodetection.exceptions.errors import FockStateError, StateDomainError, TruncationError
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

DEFAULT_EPSILON = 1e-12
NORMALIZATION_TOLERANCE = 1e-12


class StateKind:
    """The family of an initial field state together with its mean photon number."""
    COHERENT = "coherent"
    NUMBER = "number"
    THERMAL = "thermal"
    KIND_TAGS = [COHERENT, NUMBER, THERMAL]

    TAG_ATTRIBUTE = "tag"
    NBAR_ATTRIBUTE = "nbar"

    def __init__(self, tag: str, nbar: Union[int, float]):
        """Creates a new state kind. Raises StateDomainError for unknown tags, negative nbar
           or a non-integer nbar for a number state."""
        if not self._check_tag(tag):
            raise StateDomainError("'{:s}' is not a valid state kind".format(str(tag)))
        if not self._check_nbar(tag, nbar):
            raise StateDomainError("'{:s}' is not a valid mean photon number for a {:s} state".format(
                str(nbar), tag))
        self.__tag = tag
        self.__nbar = int(nbar) if tag == self.NUMBER else float(nbar)

    @property
    def tag(self) -> str:
        """The state family: coherent, number or thermal."""
        return self.__tag

    @property
    def nbar(self) -> Union[int, float]:
        """The mean photon number."""
        return self.__nbar

    @property
    def alpha(self) -> float:
        """The geometric ratio nbar / (nbar + 1) of a thermal state."""
        return self.__nbar / (self.__nbar + 1.0)

    @classmethod
    def _check_tag(cls, tag: str) -> bool:
        return tag in cls.KIND_TAGS

    @classmethod
    def _check_nbar(cls, tag: str, nbar: Union[int, float]) -> bool:
        if isinstance(nbar, bool) or not isinstance(nbar, (int, float, numpy.integer, numpy.floating)):
            return False
        if not numpy.isfinite(nbar) or nbar < 0:
            return False
        return tag != cls.NUMBER or float(nbar).is_integer()

    def json(self) -> Dict[str, Any]:
        """Returns the state kind as a dictionary."""
        return {self.TAG_ATTRIBUTE: self.tag, self.NBAR_ATTRIBUTE: self.nbar}

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, StateKind) and self.tag == other.tag and self.nbar == other.nbar

    def __hash__(self) -> int:
        return hash((self.tag, self.nbar))

    def __str__(self) -> str:
        return "{:s}({:s})".format(self.tag, str(self.nbar))

    def __repr__(self) -> str:
        return "StateKind({:s}, {:s})".format(repr(self.tag), repr(self.nbar))

    @classmethod
    def from_json(cls, json_kind: Dict[str, Any]) -> Optional[StateKind]:
        """Returns a StateKind built from the given dictionary or None if the dictionary is invalid."""
        try:
            return StateKind(json_kind[cls.TAG_ATTRIBUTE], json_kind[cls.NBAR_ATTRIBUTE])
        except (KeyError, TypeError, StateDomainError) as error:
            LOGGER.warning("{:s} error '{:s}' encountered when reading a state kind".format(
                str(type(error)), str(error)))
            return None


class DiagonalFockState:
    """Immutable diagonal density operator on the truncated Fock space {0, ..., n_max}.
       Unnormalized states are allowed; they appear as the output of non trace preserving superoperators."""

    PROBS_ATTRIBUTE = "probs"
    NORMALIZED_ATTRIBUTE = "normalized"
    KIND_ATTRIBUTE = "kind"
    TAIL_ATTRIBUTE = "tail"

    def __init__(self, probs: Union[Sequence[float], numpy.ndarray], normalized: bool = False,
                 kind: Optional[StateKind] = None, tail: float = 0.0):
        """Creates a new state from the occupation probabilities probs[n], n = 0, ..., n_max.
           Raises FockStateError if the probabilities are not valid or if a state flagged as normalized
           does not have unit trace."""
        values = numpy.array(probs, dtype=float)
        if not self._check_probs(values):
            raise FockStateError("Fock state probabilities must be a non-empty vector of finite non-negative values")
        if normalized and abs(float(values.sum()) - 1.0) > NORMALIZATION_TOLERANCE:
            raise FockStateError("Normalized Fock state has trace {:s}".format(repr(float(values.sum()))))
        if not self._check_tail(tail):
            raise FockStateError("'{:s}' is not a valid truncation tail mass".format(str(tail)))

        values.setflags(write=False)
        self.__probs = values
        self.__normalized = bool(normalized)
        self.__kind = kind
        self.__tail = float(tail)
        with numpy.errstate(divide="ignore"):
            self.__log_probs = numpy.log(values)
        self.__log_probs.setflags(write=False)

    @property
    def probs(self) -> numpy.ndarray:
        """The read-only occupation probabilities."""
        return self.__probs

    @property
    def log_probs(self) -> numpy.ndarray:
        """The logarithms of the occupation probabilities, -inf for empty levels."""
        return self.__log_probs

    @property
    def n_max(self) -> int:
        """The largest photon number held by the truncated state."""
        return self.__probs.size - 1

    @property
    def normalized(self) -> bool:
        """True if the state has unit trace."""
        return self.__normalized

    @property
    def kind(self) -> Optional[StateKind]:
        """The state family the probabilities were built from, None for derived states."""
        return self.__kind

    @property
    def tail(self) -> float:
        """The untruncated probability mass beyond n_max discarded by the truncation."""
        return self.__tail

    @property
    def trace(self) -> float:
        """The sum of the occupation probabilities."""
        return float(self.__probs.sum())

    @property
    def mean(self) -> float:
        """The mean photon number."""
        return factorial_moment(self, 1)

    @property
    def photon_numbers(self) -> numpy.ndarray:
        """The photon number index 0, ..., n_max."""
        return numpy.arange(self.__probs.size)

    @classmethod
    def _check_probs(cls, values: numpy.ndarray) -> bool:
        return (
            values.ndim == 1 and
            values.size > 0 and
            bool(numpy.all(numpy.isfinite(values))) and
            bool(numpy.all(values >= 0.0))
        )

    @classmethod
    def _check_tail(cls, tail: float) -> bool:
        return isinstance(tail, (int, float)) and 0.0 <= tail <= 1.0

    def json(self) -> Dict[str, Any]:
        """Returns the state as a dictionary."""
        return {
            self.PROBS_ATTRIBUTE: [float(value) for value in self.__probs],
            self.NORMALIZED_ATTRIBUTE: self.__normalized,
            self.KIND_ATTRIBUTE: None if self.__kind is None else self.__kind.json(),
            self.TAIL_ATTRIBUTE: self.__tail
        }

    def __eq__(self, other: Any) -> bool:
        return (
            isinstance(other, DiagonalFockState) and
            numpy.array_equal(self.__probs, other.probs) and
            self.__normalized == other.normalized and
            self.__kind == other.kind
        )

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "DiagonalFockState(n_max={:d}, kind={:s}, trace={:s})".format(
            self.n_max, str(self.__kind), repr(self.trace))


def _normalized_from_log_weights(log_weights: numpy.ndarray, kind: StateKind, tail: float) -> DiagonalFockState:
    probs = numpy.exp(log_weights - logsumexp(log_weights))
    # the last rounding error is absorbed into the largest entry
    probs[numpy.argmax(probs)] += 1.0 - probs.sum()
    return DiagonalFockState(probs, normalized=True, kind=kind, tail=tail)


def _check_n_max(n_max: int):
    if isinstance(n_max, bool) or not isinstance(n_max, (int, numpy.integer)) or n_max < 0:
        raise TruncationError("'{:s}' is not a valid truncation n_max".format(str(n_max)))


def coherent_state(nbar: float, n_max: int) -> DiagonalFockState:
    """Returns the Poisson photon number distribution of a coherent state, renormalized over 0, ..., n_max."""
    kind = StateKind(StateKind.COHERENT, nbar)
    _check_n_max(n_max)
    n = numpy.arange(n_max + 1, dtype=float)
    log_weights = xlogy(n, kind.nbar) - kind.nbar - gammaln(n + 1.0)
    tail = float(poisson.sf(n_max, kind.nbar)) if kind.nbar > 0 else 0.0
    return _normalized_from_log_weights(log_weights, kind, tail)


def number_state(n: int, n_max: int) -> DiagonalFockState:
    """Returns the Fock state |n><n| on the truncation 0, ..., n_max."""
    kind = StateKind(StateKind.NUMBER, n)
    _check_n_max(n_max)
    if kind.nbar > n_max:
        raise TruncationError("Number state {:d} does not fit the truncation n_max={:d}".format(
            int(kind.nbar), int(n_max)))
    probs = numpy.zeros(n_max + 1)
    probs[int(kind.nbar)] = 1.0
    return DiagonalFockState(probs, normalized=True, kind=kind, tail=0.0)


def thermal_state(nbar: float, n_max: int) -> DiagonalFockState:
    """Returns the geometric photon number distribution of a thermal state, renormalized over 0, ..., n_max."""
    kind = StateKind(StateKind.THERMAL, nbar)
    _check_n_max(n_max)
    n = numpy.arange(n_max + 1, dtype=float)
    log_weights = xlogy(n, kind.alpha)
    tail = float(kind.alpha ** (n_max + 1))
    return _normalized_from_log_weights(log_weights, kind, tail)


def factorial_moment(state: DiagonalFockState, k: int) -> float:
    """Returns the factorial moment sum_n rho_n n!/(n-k)!, the terms with n < k being zero."""
    if k < 0:
        raise FockStateError("Factorial moment order must be non-negative, got {:s}".format(str(k)))
    if state.n_max < k:
        return 0.0
    n = numpy.arange(k, state.n_max + 1, dtype=float)
    log_terms = state.log_probs[k:] + gammaln(n + 1.0) - gammaln(n - k + 1.0)
    with numpy.errstate(divide="ignore"):
        return float(numpy.exp(logsumexp(log_terms)))


def _coherent_truncation(nbar: float, epsilon: float) -> int:
    if nbar == 0:
        return 0
    # isf is nan for tolerances near the double resolution, the search itself runs on logsf
    guess = poisson.isf(epsilon, nbar)
    if not numpy.isfinite(guess):
        guess = nbar + numpy.sqrt(-2.0 * nbar * numpy.log(epsilon))
    log_epsilon = numpy.log(epsilon)
    n_max = max(int(guess) - 2, 0)
    while poisson.logsf(n_max, nbar) >= log_epsilon:
        n_max += 1
    while n_max > 0 and poisson.logsf(n_max - 1, nbar) < log_epsilon:
        n_max -= 1
    return n_max


def _thermal_truncation(alpha: float, epsilon: float) -> int:
    if alpha == 0:
        return 0
    # the tail beyond n_max is alpha^(n_max + 1)
    n_max = max(int(numpy.floor(numpy.log(epsilon) / numpy.log(alpha))) - 1, 0)
    while (n_max + 1) * numpy.log(alpha) >= numpy.log(epsilon):
        n_max += 1
    while n_max > 0 and n_max * numpy.log(alpha) < numpy.log(epsilon):
        n_max -= 1
    return n_max


def truncation_for_tail(kind: StateKind, epsilon: float = DEFAULT_EPSILON) -> int:
    """Returns the smallest n_max for which the untruncated probability mass beyond n_max is below epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise TruncationError("Tail tolerance must be in (0, 1), got {:s}".format(str(epsilon)))

    if kind.tag == StateKind.NUMBER:
        n_max = int(kind.nbar)
    elif kind.tag == StateKind.COHERENT:
        n_max = _coherent_truncation(float(kind.nbar), epsilon)
    else:
        n_max = _thermal_truncation(kind.alpha, epsilon)

    LOGGER.debug("Truncation for {:s} at tail {:s}: n_max={:d}".format(str(kind), repr(epsilon), n_max))
    return n_max


def state_from_kind(kind: StateKind, n_max: Optional[int] = None,
                    epsilon: float = DEFAULT_EPSILON) -> DiagonalFockState:
    """Returns the state of the given kind. When n_max is None, it is chosen by truncation_for_tail."""
    if n_max is None:
        n_max = truncation_for_tail(kind, epsilon)
    if kind.tag == StateKind.COHERENT:
        return coherent_state(float(kind.nbar), n_max)
    if kind.tag == StateKind.NUMBER:
        return number_state(int(kind.nbar), n_max)
    return thermal_state(float(kind.nbar), n_max)


def vacuum_state(n_max: int = 0) -> DiagonalFockState:
    """Returns the vacuum state, which is the number state with zero photons."""
    return number_state(0, n_max)
