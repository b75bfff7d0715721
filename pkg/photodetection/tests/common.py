# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Common values and helpers for the photodetection unit tests."""

from typing import List

import numpy

from photodetection.fock import DiagonalFockState, StateKind, state_from_kind
from photodetection.parameters import DetectorParams

# detector parameters used for the figures
FIGURE_ETA = 0.6
FIGURE_DARK = 5e-3

FIGURE_PARAMS = DetectorParams(rate=1.0, eta=FIGURE_ETA, dark=FIGURE_DARK)
IDEAL_PARAMS = DetectorParams(rate=1.0, eta=1.0, dark=0.0)
NO_DARK_PARAMS = DetectorParams(rate=1.0, eta=FIGURE_ETA, dark=0.0)

# tail tolerance of the states used in the closed form comparisons
FINE_EPSILON = 1e-16

TEST_SEED = 20201


def coherent_kind(nbar: float) -> StateKind:
    """Returns the coherent state kind with the given mean photon number."""
    return StateKind(StateKind.COHERENT, nbar)


def number_kind(n: int) -> StateKind:
    """Returns the number state kind with n photons."""
    return StateKind(StateKind.NUMBER, n)


def thermal_kind(nbar: float) -> StateKind:
    """Returns the thermal state kind with the given mean photon number."""
    return StateKind(StateKind.THERMAL, nbar)


def all_kinds(nbar: int) -> List[StateKind]:
    """Returns the coherent, number and thermal kinds with the same mean photon number."""
    return [coherent_kind(float(nbar)), number_kind(int(nbar)), thermal_kind(float(nbar))]


def all_states(nbar: int, epsilon: float = 1e-12) -> List[DiagonalFockState]:
    """Returns the coherent, number and thermal states with the same mean photon number."""
    return [state_from_kind(kind, epsilon=epsilon) for kind in all_kinds(nbar)]


def random_state(generator: numpy.random.Generator, n_max: int = 20) -> DiagonalFockState:
    """Returns a random normalized state without a kind."""
    return DiagonalFockState(generator.dirichlet(numpy.ones(n_max + 1)))


def relative_difference(first, second) -> float:
    """Returns the largest elementwise relative difference of second from first."""
    first = numpy.asarray(first, dtype=float)
    second = numpy.asarray(second, dtype=float)
    return float(numpy.max(numpy.abs(first - second) / numpy.maximum(numpy.abs(first), 1e-300)))
