# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""
This module contains the stochastic trajectory oracle. The diagonal dynamics of both photodetection models is a
classical Markov jump process: photons are absorbed at rate lambda n (SD) or lambda [n >= 1] (E), an absorption
is registered with probability eta and dark counts arrive at rate lambda d.

The ensemble estimators draw trajectories in fixed-size blocks. Every block owns a counter-based Philox stream
derived from the master seed and the block index, so the reduced statistics do not depend on how the blocks
are scheduled.
"""

from __future__ import annotations
import asyncio
import csv
import json
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy

from photodetection.exceptions.errors import ModelTypeError, ParameterValueError
from photodetection.fock import DiagonalFockState
from photodetection.numerics import check_time
from photodetection.parameters import DetectorParams
from photodetection.results import CountDistribution, EnsembleStats, WaitingHistogram
from photodetection.tools import FullLogger, async_wrap

LOGGER = FullLogger(__name__)

MODEL_SD = "sd"
MODEL_E = "e"
MODELS = [MODEL_SD, MODEL_E]

DEFAULT_BLOCK_SIZE = 4096
DEFAULT_WAITING_BINS = 50
# click time tolerance in units of 1/lambda
DEFAULT_TOLERANCE_FACTOR = 0.05

SeedType = Union[int, numpy.random.SeedSequence]


class EventKind:
    """The kinds of trajectory events."""
    DETECTED = "DetectedAbsorption"
    UNDETECTED = "UndetectedAbsorption"
    DARK = "DarkCount"
    EVENT_KINDS = [DETECTED, UNDETECTED, DARK]
    REGISTERED_KINDS = [DETECTED, DARK]
    ABSORPTION_KINDS = [DETECTED, UNDETECTED]


Event = Tuple[float, str]


class TrajectoryRecord:
    """One stochastic realization: the initial photon number and the time ordered events up to the horizon."""

    INITIAL_N_ATTRIBUTE = "initial_n"
    EVENTS_ATTRIBUTE = "events"
    HORIZON_ATTRIBUTE = "horizon"

    def __init__(self, initial_n: int, events: Sequence[Event], horizon: float):
        """Creates a new record. Raises ParameterValueError if the events are not strictly increasing within
           the horizon, have an unknown kind, or absorb more photons than initial_n."""
        check_time(horizon, "horizon")
        if not self._check_events(initial_n, events, horizon):
            raise ParameterValueError("Invalid trajectory events for initial_n={:s} and horizon={:s}".format(
                str(initial_n), str(horizon)))
        self.__initial_n = int(initial_n)
        self.__events = tuple((float(time), kind) for time, kind in events)
        self.__horizon = float(horizon)

    @property
    def initial_n(self) -> int:
        """The initial photon number."""
        return self.__initial_n

    @property
    def events(self) -> Tuple[Event, ...]:
        """The (time, kind) events in increasing time order."""
        return self.__events

    @property
    def horizon(self) -> float:
        """The end of the observation interval."""
        return self.__horizon

    @property
    def click_times(self) -> List[float]:
        """The registered click times, detected absorptions and dark counts."""
        return [time for time, kind in self.__events if kind in EventKind.REGISTERED_KINDS]

    def registered_count(self, t: float) -> int:
        """Returns the number of registered clicks in (0, t]."""
        return sum(1 for time in self.click_times if time <= t)

    @classmethod
    def _check_events(cls, initial_n: int, events: Sequence[Event], horizon: float) -> bool:
        if initial_n < 0:
            return False
        times = [time for time, _ in events]
        if any(not 0.0 <= time <= horizon for time in times):
            return False
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            return False
        if any(kind not in EventKind.EVENT_KINDS for _, kind in events):
            return False
        return sum(1 for _, kind in events if kind in EventKind.ABSORPTION_KINDS) <= initial_n

    def json(self) -> Dict[str, Any]:
        """Returns the record as a dictionary."""
        return {
            self.INITIAL_N_ATTRIBUTE: self.__initial_n,
            self.EVENTS_ATTRIBUTE: [[time, kind] for time, kind in self.__events],
            self.HORIZON_ATTRIBUTE: self.__horizon
        }

    def __eq__(self, other: Any) -> bool:
        return (
            isinstance(other, TrajectoryRecord) and
            self.__initial_n == other.initial_n and
            self.__events == other.events and
            self.__horizon == other.horizon
        )

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "TrajectoryRecord(initial_n={:d}, events={:d}, horizon={:s})".format(
            self.__initial_n, len(self.__events), repr(self.__horizon))


def check_model(model: str):
    """Raises ModelTypeError for an unknown model name."""
    if model not in MODELS:
        raise ModelTypeError("'{:s}' is not a valid photodetection model".format(str(model)))


def make_generator(seed: SeedType, block_index: Optional[int] = None) -> numpy.random.Generator:
    """Returns a Philox generator for the given seed, or for the block stream (seed, block_index)."""
    if isinstance(seed, numpy.random.SeedSequence):
        sequence = seed
    elif block_index is None:
        sequence = numpy.random.SeedSequence(seed)
    else:
        sequence = numpy.random.SeedSequence(seed, spawn_key=(block_index,))
    return numpy.random.Generator(numpy.random.Philox(sequence))


def _photon_distribution(state: DiagonalFockState) -> numpy.ndarray:
    trace = state.trace
    if trace <= 0.0:
        raise ParameterValueError("Cannot sample photon numbers from a state with zero trace")
    return state.probs / trace


def _absorption_rate(model: str, params: DetectorParams, n: int) -> float:
    if model == MODEL_SD:
        return params.rate * n
    return params.rate if n >= 1 else 0.0


def sample_trajectory(state: DiagonalFockState, params: DetectorParams, model: str, horizon: float,
                      seed: SeedType) -> TrajectoryRecord:
    """Draws the initial photon number from the state and runs the Gillespie loop up to the horizon."""
    check_model(model)
    check_time(horizon, "horizon")
    generator = make_generator(seed)
    initial_n = int(generator.choice(state.n_max + 1, p=_photon_distribution(state)))

    n = initial_n
    time = 0.0
    events: List[Event] = []
    dark_rate = params.rate * params.dark
    while True:
        absorption_rate = _absorption_rate(model, params, n)
        total_rate = absorption_rate + dark_rate
        if total_rate <= 0.0:
            break
        time += generator.exponential(1.0 / total_rate)
        if time > horizon:
            break
        channel = generator.random() * total_rate
        if channel < absorption_rate * params.eta:
            events.append((time, EventKind.DETECTED))
            n -= 1
        elif channel < absorption_rate:
            events.append((time, EventKind.UNDETECTED))
            n -= 1
        else:
            events.append((time, EventKind.DARK))

    return TrajectoryRecord(initial_n, events, horizon)


def sample_records(state: DiagonalFockState, params: DetectorParams, model: str, horizon: float,
                   n_records: int, seed: int) -> List[TrajectoryRecord]:
    """Returns n_records trajectories, each with its own stream spawned from the master seed."""
    sequences = numpy.random.SeedSequence(seed).spawn(n_records)
    return [sample_trajectory(state, params, model, horizon, sequence) for sequence in sequences]


def write_raw_records(records: Iterable[TrajectoryRecord], stream: TextIO):
    """Writes one tab separated line (trajectory_id, time, kind) per event."""
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    for trajectory_id, record in enumerate(records):
        for time, kind in record.events:
            writer.writerow([trajectory_id, repr(time), kind])


def _sample_click_times(state: DiagonalFockState, params: DetectorParams, model: str, horizon: float,
                        block_trajectories: int, seed: int, block_index: int) -> numpy.ndarray:
    """Returns the registered click times of a block as a (trajectories, clicks) matrix padded with inf."""
    generator = make_generator(seed, block_index)
    initial_n = generator.choice(state.n_max + 1, size=block_trajectories, p=_photon_distribution(state))
    n_photons = max(int(initial_n.max()), 1)

    waiting = generator.exponential(1.0 / params.rate, size=(block_trajectories, n_photons))
    if model == MODEL_SD:
        absorptions = waiting
    else:
        absorptions = numpy.cumsum(waiting, axis=1)
    detected = generator.random((block_trajectories, n_photons)) < params.eta
    present = numpy.arange(n_photons)[None, :] < initial_n[:, None]
    absorptions = numpy.where(present & detected & (absorptions <= horizon), absorptions, numpy.inf)

    n_dark = generator.poisson(params.rate * params.dark * horizon, size=block_trajectories)
    dark_width = max(int(n_dark.max()), 1)
    dark = generator.uniform(0.0, horizon, size=(block_trajectories, dark_width))
    dark = numpy.where(numpy.arange(dark_width)[None, :] < n_dark[:, None], dark, numpy.inf)

    return numpy.sort(numpy.concatenate([absorptions, dark], axis=1), axis=1)


def _count_block(state: DiagonalFockState, params: DetectorParams, model: str, t_grid: numpy.ndarray,
                 block_trajectories: int, seed: int, block_index: int) -> Dict[str, Any]:
    """Returns the integer sums of m, m^2, m(m-1), (m(m-1))^2 per grid time and the count histograms of a block."""
    clicks = _sample_click_times(state, params, model, float(t_grid.max()), block_trajectories, seed, block_index)
    counts = (clicks[:, :, None] <= t_grid[None, None, :]).sum(axis=1).astype(numpy.int64)
    pairs = counts * (counts - 1)
    return {
        "count_sums": counts.sum(axis=0),
        "count_square_sums": (counts ** 2).sum(axis=0),
        "pair_sums": pairs.sum(axis=0),
        "pair_square_sums": (pairs ** 2).sum(axis=0),
        "histograms": [numpy.bincount(counts[:, index]) for index in range(t_grid.size)]
    }


def _waiting_block(state: DiagonalFockState, params: DetectorParams, model: str, t_click: float, window: float,
                   tolerance: float, bin_edges: numpy.ndarray, block_trajectories: int, seed: int,
                   block_index: int) -> Dict[str, Any]:
    """Returns the binned gaps of a block following every click in [t_click, t_click + tolerance).
       Gaps longer than the window do not contribute."""
    horizon = t_click + tolerance + window
    clicks = _sample_click_times(state, params, model, horizon, block_trajectories, seed, block_index)
    gaps = numpy.diff(clicks, axis=1)
    starts = clicks[:, :-1]
    with numpy.errstate(invalid="ignore"):
        kept = (starts >= t_click) & (starts < t_click + tolerance) & (gaps <= window)
    kept_gaps = gaps[kept]
    return {
        "gap_counts": numpy.histogram(kept_gaps, bins=bin_edges)[0],
        "gap_sum": float(kept_gaps.sum()),
        "gap_square_sum": float((kept_gaps ** 2).sum())
    }


def _blocks(n_traj: int, block_size: int) -> List[Tuple[int, int]]:
    """Returns the (block index, trajectories) pairs covering n_traj trajectories."""
    if n_traj < 1:
        raise ParameterValueError("n_traj must be at least 1, got {:s}".format(str(n_traj)))
    if block_size < 1:
        raise ParameterValueError("block_size must be at least 1, got {:s}".format(str(block_size)))
    return [
        (index, min(block_size, n_traj - start))
        for index, start in enumerate(range(0, n_traj, block_size))
    ]


def _pad_sum(arrays: Iterable[numpy.ndarray]) -> numpy.ndarray:
    arrays = list(arrays)
    total = numpy.zeros(max(array.size for array in arrays), dtype=numpy.int64)
    for array in arrays:
        total[:array.size] += array
    return total


def _reduce_counts(blocks: List[Dict[str, Any]], n_traj: int, seed: int, t_grid: numpy.ndarray) -> EnsembleStats:
    """Sums the block results in block order."""
    sums = {
        name: numpy.sum([block[name] for block in blocks], axis=0).astype(float)
        for name in ("count_sums", "count_square_sums", "pair_sums", "pair_square_sums")
    }
    histograms = [_pad_sum(block["histograms"][index] for block in blocks) for index in range(t_grid.size)]
    return EnsembleStats(n_traj, seed, t_grid, count_histogram=histograms, **sums)


def _reduce_waiting(blocks: List[Dict[str, Any]], n_traj: int, seed: int, t_click: float,
                    bin_edges: numpy.ndarray) -> EnsembleStats:
    histogram = WaitingHistogram(
        bin_edges,
        numpy.sum([block["gap_counts"] for block in blocks], axis=0),
        sum(block["gap_sum"] for block in blocks),
        sum(block["gap_square_sum"] for block in blocks))
    return EnsembleStats(n_traj, seed, [t_click], waiting_histogram=histogram)


def _prepare_grid(t_grid: Sequence[float]) -> numpy.ndarray:
    grid = numpy.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterValueError("The time grid must be a non-empty vector")
    check_time(grid, "t_grid")
    return grid


def _prepare_waiting(params: DetectorParams, window: float, tolerance: Optional[float],
                     n_bins: int) -> Tuple[float, numpy.ndarray]:
    if not window > 0.0:
        raise ParameterValueError("The averaging window must be positive, got {:s}".format(str(window)))
    if tolerance is None:
        tolerance = DEFAULT_TOLERANCE_FACTOR / params.rate
    return tolerance, numpy.linspace(0.0, window, n_bins + 1)


def estimate_count_moments(state: DiagonalFockState, params: DetectorParams, model: str,
                           t_grid: Sequence[float], n_traj: int, seed: int,
                           block_size: int = DEFAULT_BLOCK_SIZE) -> EnsembleStats:
    """Returns the Monte Carlo mean count and second factorial moment at each grid time.
       Every trajectory is observed at all grid times."""
    check_model(model)
    grid = _prepare_grid(t_grid)
    LOGGER.info("Sampling {:d} {:s} trajectories for count moments, seed {:d}".format(n_traj, model, seed))
    blocks = [
        _count_block(state, params, model, grid, size, seed, index)
        for index, size in _blocks(n_traj, block_size)
    ]
    return _reduce_counts(blocks, n_traj, seed, grid)


async def estimate_count_moments_async(state: DiagonalFockState, params: DetectorParams, model: str,
                                       t_grid: Sequence[float], n_traj: int, seed: int,
                                       block_size: int = DEFAULT_BLOCK_SIZE, executor: Any = None) -> EnsembleStats:
    """Asynchronous version of estimate_count_moments running the blocks through the given executor."""
    check_model(model)
    grid = _prepare_grid(t_grid)
    LOGGER.info("Sampling {:d} {:s} trajectories for count moments, seed {:d}".format(n_traj, model, seed))
    run_block = async_wrap(_count_block)
    blocks = await asyncio.gather(*(
        run_block(state, params, model, grid, size, seed, index, executor=executor)
        for index, size in _blocks(n_traj, block_size)
    ))
    return _reduce_counts(list(blocks), n_traj, seed, grid)


def estimate_waiting(state: DiagonalFockState, params: DetectorParams, model: str, t_click: float,
                     window: float, n_traj: int, seed: int, tolerance: Optional[float] = None,
                     n_bins: int = DEFAULT_WAITING_BINS, block_size: int = DEFAULT_BLOCK_SIZE) -> EnsembleStats:
    """Returns the histogram of gaps between a registered click in [t_click, t_click + tolerance) and the next one.
       The default tolerance is 0.05/lambda."""
    check_model(model)
    check_time(t_click, "t_click")
    tolerance, bin_edges = _prepare_waiting(params, window, tolerance, n_bins)
    LOGGER.info("Sampling {:d} {:s} trajectories for waiting times at t={:s}".format(n_traj, model, repr(t_click)))
    blocks = [
        _waiting_block(state, params, model, t_click, window, tolerance, bin_edges, size, seed, index)
        for index, size in _blocks(n_traj, block_size)
    ]
    return _reduce_waiting(blocks, n_traj, seed, t_click, bin_edges)


async def estimate_waiting_async(state: DiagonalFockState, params: DetectorParams, model: str, t_click: float,
                                 window: float, n_traj: int, seed: int, tolerance: Optional[float] = None,
                                 n_bins: int = DEFAULT_WAITING_BINS, block_size: int = DEFAULT_BLOCK_SIZE,
                                 executor: Any = None) -> EnsembleStats:
    """Asynchronous version of estimate_waiting."""
    check_model(model)
    check_time(t_click, "t_click")
    tolerance, bin_edges = _prepare_waiting(params, window, tolerance, n_bins)
    run_block = async_wrap(_waiting_block)
    blocks = await asyncio.gather(*(
        run_block(state, params, model, t_click, window, tolerance, bin_edges, size, seed, index, executor=executor)
        for index, size in _blocks(n_traj, block_size)
    ))
    return _reduce_waiting(list(blocks), n_traj, seed, t_click, bin_edges)


def estimate_count_distribution(state: DiagonalFockState, params: DetectorParams, model: str, t: float,
                                n_traj: int, seed: int, block_size: int = DEFAULT_BLOCK_SIZE) -> CountDistribution:
    """Returns the empirical count distribution at time t."""
    stats = estimate_count_moments(state, params, model, [t], n_traj, seed, block_size)
    histogram = stats.count_histogram[0]  # type: ignore
    return CountDistribution(histogram, t, 1.0 - float(histogram.sum()))
