# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the experiment commands. Each command takes a resolved ExperimentConfig and
returns a DataTable. Times are dimensionless lambda t, the detector rate is fixed to 1."""

import asyncio
import concurrent.futures
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy

from photodetection import e_model, sd_model
from photodetection.config import ExperimentConfig
from photodetection.exceptions.errors import UndefinedValueError
from photodetection.fock import DiagonalFockState, StateKind, state_from_kind, vacuum_state
from photodetection.numerics import METHOD_CLOSED, METHOD_GENERIC, count_cap
from photodetection.output import DataTable
from photodetection.parameters import DetectorParams
from photodetection.results import EnsembleStats
from photodetection.superops import (
    DiagonalSuperop, apply_A, apply_exp_A, apply_U, scale)
from photodetection.trajectories import estimate_count_moments, estimate_count_moments_async
from photodetection.tools import FullLogger, handle_async_exception, log_exception

LOGGER = FullLogger(__name__)

MODEL_MODULES = {
    sd_model.MODEL_NAME: sd_model,
    e_model.MODEL_NAME: e_model
}

FIGURE1_NBARS = (50, 100)
FIGURE2_NBAR = 50
FIGURE2_STATES = (StateKind.NUMBER, StateKind.THERMAL)
FIGURE3_NBAR = 100
FIGURE3_STATES = (StateKind.NUMBER, StateKind.THERMAL)

# tail tolerance of the states used by the closed form checks
VALIDATION_EPSILON = 1e-16


def _undefined_as_nan(function: Callable[[], float]) -> float:
    try:
        return function()
    except UndefinedValueError:
        return numpy.nan


def _labels(model: str, kind: StateKind) -> Dict[str, Any]:
    return {"model": model, "state": kind.tag, "nbar": kind.nbar}


def figure1(config: ExperimentConfig) -> DataTable:
    """Mean count against lambda t for every state kind and both nbar values of the figure."""
    params = config.params()
    grid = config.t_grid()
    table = DataTable("figure1", config.json())
    for nbar in FIGURE1_NBARS:
        for tag in StateKind.KIND_TAGS:
            state = config.initial_state(tag, nbar)
            for model in config.models():
                module = MODEL_MODULES[model]
                table.add_series(_labels(model, config.state_kind(tag, nbar)), {
                    "lambda_t": grid,
                    "mean_counts": [module.mean_counts(state, params, t) for t in grid]
                })
    return table


def figure2(config: ExperimentConfig) -> DataTable:
    """Normalized second factorial moment K against lambda t for the number and thermal states.
       K is undefined, nan, where the mean count vanishes."""
    params = config.params()
    grid = config.t_grid()
    table = DataTable("figure2", config.json())
    for tag in FIGURE2_STATES:
        state = config.initial_state(tag, FIGURE2_NBAR)
        for model in config.models():
            module = MODEL_MODULES[model]
            table.add_series(_labels(model, config.state_kind(tag, FIGURE2_NBAR)), {
                "lambda_t": grid,
                "k_factor": [_undefined_as_nan(lambda: module.k_factor(state, params, t)) for t in grid]
            })
    return table


def figure3(config: ExperimentConfig) -> DataTable:
    """Mean waiting time over the window 10/(eta lambda) and the mean cavity photon number at the first click
       against lambda t for the number and thermal states."""
    params = config.params()
    grid = config.t_grid()
    table = DataTable("figure3", config.json())
    for tag in FIGURE3_STATES:
        state = config.initial_state(tag, FIGURE3_NBAR)
        for model in config.models():
            module = MODEL_MODULES[model]
            table.add_series(_labels(model, config.state_kind(tag, FIGURE3_NBAR)), {
                "lambda_t": grid,
                "n_cav": [module.n_cav(state, params, t) for t in grid],
                "mean_waiting": [_undefined_as_nan(lambda: module.mean_waiting(state, params, t)) for t in grid]
            })
    return table


def _ensemble_count_moments(config: ExperimentConfig, state: DiagonalFockState, params: DetectorParams,
                            model: str, grid: Sequence[float], n_traj: int, workers: int) -> EnsembleStats:
    """Runs the count moment ensemble serially for one worker and through a process pool otherwise."""
    if workers <= 1:
        return estimate_count_moments(state, params, model, grid, n_traj, config.seed, config.block_size)

    async def run() -> EnsembleStats:
        asyncio.get_running_loop().set_exception_handler(handle_async_exception)
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            return await estimate_count_moments_async(
                state, params, model, grid, n_traj, config.seed, config.block_size, executor=executor)

    return asyncio.run(run())


def trajectories(config: ExperimentConfig) -> DataTable:
    """Monte Carlo mean count and second factorial moment with standard errors next to the analytic values."""
    params = config.params()
    grid = config.t_grid()
    state = config.initial_state()
    table = DataTable("trajectories", config.json())
    for model in config.models():
        module = MODEL_MODULES[model]
        stats = _ensemble_count_moments(config, state, params, model, grid, config.traj, config.workers)
        table.add_series({**_labels(model, config.state_kind()), "n_traj": config.traj}, {
            "lambda_t": grid,
            "mean_counts": [module.mean_counts(state, params, t) for t in grid],
            "mc_mean_counts": stats.mean_counts,  # type: ignore
            "mc_mean_counts_se": stats.mean_counts_se,  # type: ignore
            "second_factorial": [module.second_factorial_moment(state, params, t) for t in grid],
            "mc_second_factorial": stats.second_factorial,  # type: ignore
            "mc_second_factorial_se": stats.second_factorial_se  # type: ignore
        })
    return table


def distribution(config: ExperimentConfig) -> DataTable:
    """Count distribution P(m) at lambda t = tmax."""
    params = config.params()
    state = config.initial_state()
    table = DataTable("distribution", config.json())
    for model in config.models():
        counts = MODEL_MODULES[model].count_distribution(state, params, config.tmax, config.mmax)
        table.add_series({**_labels(model, config.state_kind()), "lambda_t": config.tmax}, {
            "m": numpy.arange(counts.m_max + 1),
            "probability": counts.probs
        })
    return table


def cavity(config: ExperimentConfig) -> DataTable:
    """SD zero-count probability against lambda t without and with the configured cavity damping."""
    params = config.params()
    grid = config.t_grid()
    state = config.initial_state()
    table = DataTable("cavity", config.json())
    table.add_series({**_labels(sd_model.MODEL_NAME, config.state_kind()), "cavity": config.cavity}, {
        "lambda_t": grid,
        "no_count": [sd_model.no_count(state, params, t).trace for t in grid],
        "no_count_damped": [sd_model.no_count_damped(state, params, t).trace for t in grid]
    })
    return table


class CriterionResult:
    """The outcome of one validation criterion: the measured value against its limit."""

    def __init__(self, number: int, name: str, measured: float, limit: float, passed: bool, seconds: float = 0.0):
        self.__number = number
        self.__name = name
        self.__measured = float(measured)
        self.__limit = float(limit)
        self.__passed = bool(passed)
        self.__seconds = float(seconds)

    @property
    def number(self) -> int:
        """The criterion number."""
        return self.__number

    @property
    def name(self) -> str:
        """The short criterion name."""
        return self.__name

    @property
    def measured(self) -> float:
        """The measured value, nan if the check failed with an error."""
        return self.__measured

    @property
    def limit(self) -> float:
        """The limit the measured value is compared to."""
        return self.__limit

    @property
    def passed(self) -> bool:
        """True if the criterion holds."""
        return self.__passed

    @property
    def seconds(self) -> float:
        """The runtime of the check."""
        return self.__seconds

    def with_runtime(self, seconds: float) -> "CriterionResult":
        """Returns a copy with the given runtime."""
        return CriterionResult(self.__number, self.__name, self.__measured, self.__limit, self.__passed, seconds)

    def __repr__(self) -> str:
        return "CriterionResult({:d}, {:s}, measured={:s}, limit={:s}, passed={:s})".format(
            self.__number, self.__name, repr(self.__measured), repr(self.__limit), str(self.__passed))


def _params(eta: float = 0.6, dark: float = 5e-3, cavity_ratio: float = 0.0) -> DetectorParams:
    return DetectorParams(rate=1.0, eta=eta, dark=dark, cavity=cavity_ratio)


def _states(nbar: float, epsilon: float) -> List[DiagonalFockState]:
    return [
        state_from_kind(StateKind(tag, int(nbar) if tag == StateKind.NUMBER else nbar), epsilon=epsilon)
        for tag in StateKind.KIND_TAGS
    ]


NORMALIZATION_TIMES = {sd_model.MODEL_NAME: (0.1, 1.0, 5.0), e_model.MODEL_NAME: (1.0, 50.0, 200.0)}


def check_normalization(config: ExperimentConfig) -> CriterionResult:
    """The count distributions sum to one."""
    params = _params(config.eta, config.dark)
    worst = 0.0
    for state in _states(50, config.epsilon):
        for model, times in NORMALIZATION_TIMES.items():
            module = MODEL_MODULES[model]
            for t in times:
                counts = module.count_distribution(state, params, t, count_cap(state, params, t))
                worst = max(worst, abs(float(counts.probs.sum()) - 1.0))
    return CriterionResult(1, "normalization", worst, 1e-9, worst < 1e-9)


def check_moment_consistency(config: ExperimentConfig) -> CriterionResult:
    """The first two factorial moments of the count distributions equal the closed form moments."""
    params = _params(config.eta, config.dark)
    worst = 0.0
    for state in _states(50, config.epsilon):
        for model, times in NORMALIZATION_TIMES.items():
            module = MODEL_MODULES[model]
            for t in times:
                counts = module.count_distribution(state, params, t, count_cap(state, params, t))
                for measured, expected in ((counts.mean, module.mean_counts(state, params, t)),
                                           (counts.factorial_moment(2),
                                            module.second_factorial_moment(state, params, t))):
                    worst = max(worst, abs(measured - expected) / abs(expected))
    return CriterionResult(2, "moment consistency", worst, 1e-8, worst < 1e-8)


MONTE_CARLO_GRIDS = {
    sd_model.MODEL_NAME: numpy.linspace(0.5, 5.0, 10),
    e_model.MODEL_NAME: numpy.linspace(10.0, 100.0, 10)
}
MONTE_CARLO_SIGMAS = 3.0


def check_monte_carlo(config: ExperimentConfig) -> CriterionResult:
    """The trajectory mean counts lie within three standard errors of the analytic mean counts."""
    params = _params(config.eta, config.dark)
    worst = 0.0
    for state in _states(50, config.epsilon):
        for model, grid in MONTE_CARLO_GRIDS.items():
            module = MODEL_MODULES[model]
            stats = _ensemble_count_moments(config, state, params, model, grid, config.traj, config.workers)
            analytic = numpy.array([module.mean_counts(state, params, t) for t in grid])
            deviations = numpy.abs(stats.mean_counts - analytic) / stats.mean_counts_se  # type: ignore
            worst = max(worst, float(numpy.max(deviations)))
    return CriterionResult(3, "monte carlo equivalence", worst, MONTE_CARLO_SIGMAS, worst <= MONTE_CARLO_SIGMAS)


def check_sd_k_constants(config: ExperimentConfig) -> CriterionResult:
    """SD K is 2 for thermal, 1 - 1/nbar for number and 1 for coherent states without dark counts."""
    params = _params(config.eta, 0.0)
    expected = {StateKind.COHERENT: 1.0, StateKind.NUMBER: 1.0 - 1.0 / 50.0, StateKind.THERMAL: 2.0}
    worst = 0.0
    for state in _states(50, VALIDATION_EPSILON):
        target = expected[state.kind.tag]  # type: ignore
        for t in numpy.linspace(0.01, 5.0, 25):
            worst = max(worst, abs(sd_model.k_factor(state, params, t) - target))
    return CriterionResult(4, "sd k constants", worst, 1e-9, worst < 1e-9)


def check_e_origin_limit(config: ExperimentConfig) -> CriterionResult:
    """E K at lambda t = 1e-6 approaches (1 - rho_0 - rho_1) / (1 - rho_0)^2, exactly 1 for number states."""
    params = _params(config.eta, 0.0)
    worst = 0.0
    exact = True
    for state in _states(50, config.epsilon):
        value = e_model.k_factor(state, params, 1e-6)
        worst = max(worst, abs(value - e_model.k_limit_origin(state)))
        if state.kind.tag == StateKind.NUMBER:  # type: ignore
            exact = exact and abs(value - 1.0) < 1e-12
    return CriterionResult(5, "e origin limit", worst, 1e-6, worst < 1e-6 and exact)


def _relative_error(first: Any, second: Any) -> float:
    first = numpy.asarray(first, dtype=float)
    second = numpy.asarray(second, dtype=float)
    scale_values = numpy.maximum(numpy.abs(second), 1e-300)
    return float(numpy.max(numpy.abs(first - second) / scale_values))


DUAL_PATH_NBARS = (10, 50, 100)
DUAL_PATH_TIMES = (0.1, 1.0, 5.0)
DUAL_PATH_QS = (0.4, 1.0)
DUAL_PATH_BETAS = (0.0, 1.5)


def check_dual_path(config: ExperimentConfig) -> CriterionResult:
    """The closed forms of Xi_k, Omega, Psi_k and the SD waiting functionals agree with the generic Fock sums."""
    params = _params(config.eta, config.dark)
    taus = numpy.linspace(0.0, 5.0, 11)
    worst = 0.0
    for nbar in DUAL_PATH_NBARS:
        for state in _states(nbar, VALIDATION_EPSILON):
            for t in DUAL_PATH_TIMES:
                for k in (1, 2):
                    worst = max(worst, _relative_error(
                        e_model.xi_k(state, params, t, k, METHOD_CLOSED),
                        e_model.xi_k(state, params, t, k, METHOD_GENERIC)))
                worst = max(worst, _relative_error(
                    e_model.omega(state, params, t, METHOD_CLOSED), e_model.omega(state, params, t, METHOD_GENERIC)))
                worst = max(worst, _relative_error(
                    sd_model.waiting_density(state, params, t, taus, METHOD_CLOSED),
                    sd_model.waiting_density(state, params, t, taus, METHOD_GENERIC)))
            for q in DUAL_PATH_QS:
                for beta in DUAL_PATH_BETAS:
                    for k in range(3):
                        worst = max(worst, _relative_error(
                            e_model.psi_k(state, q, beta, k, method=METHOD_CLOSED),
                            e_model.psi_k(state, q, beta, k, method=METHOD_GENERIC)))
    return CriterionResult(6, "closed forms against fock sums", worst, 1e-10, worst < 1e-10)


def check_counting_time_scaling(config: ExperimentConfig) -> CriterionResult:
    """The E counting time grows in proportion to nbar while the SD counting time does not depend on it.
       The measured value is the E ratio of the worst state."""
    params = _params(config.eta, config.dark)
    passed = True
    worst_ratio = 2.0
    for tag in StateKind.KIND_TAGS:
        states = [config.initial_state(tag, nbar) for nbar in (50, 100)]
        e_ratio = (e_model.effective_counting_time(states[1], params) /
                   e_model.effective_counting_time(states[0], params))
        sd_ratio = (sd_model.effective_counting_time(states[1], params) /
                    sd_model.effective_counting_time(states[0], params))
        passed = passed and 1.7 <= e_ratio <= 2.3 and 0.95 <= sd_ratio <= 1.05
        if abs(e_ratio - 2.0) > abs(worst_ratio - 2.0):
            worst_ratio = e_ratio
        LOGGER.debug("Counting time ratios for {:s}: E {:s}, SD {:s}".format(tag, repr(e_ratio), repr(sd_ratio)))
    return CriterionResult(7, "counting time scaling", worst_ratio, 2.3, passed)


def check_waiting_regimes(config: ExperimentConfig) -> CriterionResult:
    """The E mean waiting time stays on its plateau while N_CAV > 5 and rises without decreasing through the
       region N_CAV < 0.3 to above three times the plateau in the dark count tail, the SD mean waiting time
       increases strictly, and the dark count limit is 1/(d lambda).
       The measured value is the largest relative deviation from the E plateau while N_CAV > 5."""
    params = _params(config.eta, config.dark)
    state = config.initial_state(StateKind.NUMBER, FIGURE3_NBAR)

    e_grid = numpy.linspace(0.0, 300.0, 61)
    e_waiting = numpy.array([e_model.mean_waiting(state, params, t) for t in e_grid])
    e_n_cav = numpy.array([e_model.n_cav(state, params, t) for t in e_grid])
    plateau = e_waiting[0]
    flat = e_n_cav > 5.0
    deviation = float(numpy.max(numpy.abs(e_waiting[flat] / plateau - 1.0)))
    # the window caps the mean gap, the ratio to the plateau is close to one where N_CAV crosses 0.3
    tail = e_waiting[e_n_cav < 0.3]
    rising = tail.size > 1 and bool(numpy.all(numpy.diff(tail) >= -1e-6 * tail[1:]))
    passed = deviation < 0.05 and rising and bool(tail[-1] > 3.0 * plateau)
    if tail.size > 0:
        LOGGER.debug("E mean waiting time over the plateau for N_CAV < 0.3: from {:s} to {:s}".format(
            repr(tail[0] / plateau), repr(tail[-1] / plateau)))

    sd_grid = numpy.linspace(0.0, 10.0, 41)
    for tag in FIGURE3_STATES:
        sd_state = config.initial_state(tag, FIGURE3_NBAR)
        sd_waiting = numpy.array([sd_model.mean_waiting(sd_state, params, t) for t in sd_grid])
        passed = passed and bool(numpy.all(numpy.diff(sd_waiting) > 0.0))

    dark_window = 100.0 / (params.dark * params.rate)
    for module in MODEL_MODULES.values():
        dark_mean = module.mean_waiting(vacuum_state(), params, 1.0, dark_window)
        passed = passed and abs(dark_mean * params.dark * params.rate - 1.0) < 0.02
    return CriterionResult(8, "waiting time regimes", deviation, 0.05, passed)


def check_dead_time_divergence(config: ExperimentConfig) -> CriterionResult:
    """The dead-time probe grows without bound with the truncation for a thermal state.
       The measured value is the ratio of the last and the first probe values."""
    params = _params(config.eta, config.dark).replace(dead_time=0.01)
    probe = sd_model.dead_time_divergence_probe(state_from_kind(StateKind(StateKind.THERMAL, 10.0)), params, 1.0)
    ratio = probe[-1] / probe[0]
    increasing = bool(numpy.all(numpy.diff(probe) > 0.0))
    return CriterionResult(9, "dead time divergence", ratio, 2.0, increasing and ratio > 2.0)


def check_cavity_damping(config: ExperimentConfig) -> CriterionResult:
    """Cavity damping with c = 0 reproduces the plain no-count evolution, and c = 0.1 changes the
       zero-count probability by less than 0.05 up to lambda t = 1."""
    state = state_from_kind(StateKind(StateKind.COHERENT, 10.0))
    params = _params(config.eta, config.dark)
    damped_params = params.replace(cavity=0.1)
    exact = True
    worst = 0.0
    for t in numpy.linspace(0.0, 1.0, 11):
        plain = sd_model.no_count(state, params, t)
        exact = exact and bool(numpy.all(numpy.abs(sd_model.no_count_damped(state, params, t).probs -
                                                   plain.probs) <= 1e-15))
        worst = max(worst, abs(sd_model.no_count_damped(state, damped_params, t).trace - plain.trace))
    return CriterionResult(10, "cavity damping", worst, 0.05, exact and worst < 0.05)


SUPEROP_SAMPLES = 100
SUPEROP_N_MAX = 30


def _scaled_difference(first: DiagonalFockState, second: DiagonalFockState) -> float:
    return float(numpy.max(numpy.abs(first.probs - second.probs)) / max(1.0, float(numpy.max(second.probs))))


def check_superop_identities(config: ExperimentConfig) -> CriterionResult:
    """The commutation relations of A and U and the commutation of the Eps functions hold on random states."""
    generator = numpy.random.Generator(numpy.random.Philox(config.seed))
    worst = 0.0
    for _ in range(SUPEROP_SAMPLES):
        state = DiagonalFockState(generator.dirichlet(numpy.ones(SUPEROP_N_MAX + 1)))
        lt = float(generator.uniform(0.0, 5.0))
        y = float(generator.uniform(0.0, 2.0))
        q = float(generator.uniform(0.0, 1.0))
        worst = max(
            worst,
            _scaled_difference(apply_A(apply_U(state, lt)),
                               scale(apply_U(apply_A(state), lt), float(numpy.exp(-lt)))),
            _scaled_difference(apply_exp_A(apply_U(state, lt), y),
                               apply_U(apply_exp_A(state, y * float(numpy.exp(-lt))), lt)))
        eps_functions = [
            DiagonalSuperop("Eps"), DiagonalSuperop("ExpEps", y=y),
            DiagonalSuperop("ResolventEps", q=q), DiagonalSuperop("R", lt=lt, q=q)
        ]
        for index, first in enumerate(eps_functions):
            for second in eps_functions[index + 1:]:
                worst = max(worst, _scaled_difference((first @ second)(state), (second @ first)(state)))
    return CriterionResult(11, "superoperator identities", worst, 1e-12, worst < 1e-12)


DETERMINISM_TRAJECTORIES = 20000
DETERMINISM_WORKERS = 2


def check_determinism(config: ExperimentConfig) -> CriterionResult:
    """Two trajectory runs with the same seed give byte-identical output, serially and in parallel.
       The measured value is the number of differing outputs."""
    determinism_config = config.replace(
        traj=min(config.traj, DETERMINISM_TRAJECTORIES), points=min(config.points, 11), workers=1)
    reference = trajectories(determinism_config).render(config.format)
    parallel = trajectories(determinism_config.replace(workers=DETERMINISM_WORKERS))
    outputs = [
        trajectories(determinism_config).render(config.format),
        DataTable(parallel.command, determinism_config.json(), parallel.series).render(config.format)
    ]
    differing = sum(1 for output in outputs if output != reference)
    return CriterionResult(12, "determinism", differing, 0.0, differing == 0)


VALIDATION_CHECKS: Dict[int, Callable[[ExperimentConfig], CriterionResult]] = {
    1: check_normalization,
    2: check_moment_consistency,
    3: check_monte_carlo,
    4: check_sd_k_constants,
    5: check_e_origin_limit,
    6: check_dual_path,
    7: check_counting_time_scaling,
    8: check_waiting_regimes,
    9: check_dead_time_divergence,
    10: check_cavity_damping,
    11: check_superop_identities,
    12: check_determinism
}


def run_validation(config: ExperimentConfig, criteria: Optional[Sequence[int]] = None) -> List[CriterionResult]:
    """Runs the given validation criteria, all of them by default. A check raising any exception counts as
       failed and the remaining criteria still run."""
    numbers = sorted(VALIDATION_CHECKS) if criteria is None else list(criteria)
    results = []
    for number in numbers:
        check = VALIDATION_CHECKS[number]
        start = time.perf_counter()
        try:
            result = check(config)
        except Exception as error:  # pylint: disable=broad-except
            log_exception(error, LOGGER.error, "Validation criterion {:d} raised an error:".format(number))
            result = CriterionResult(number, check.__name__, numpy.nan, numpy.nan, False)
        result = result.with_runtime(time.perf_counter() - start)
        LOGGER.info("Criterion {:d} {:s}: {:s} (measured {:s}, limit {:s}, {:.1f} s)".format(
            result.number, result.name, "pass" if result.passed else "FAIL",
            repr(result.measured), repr(result.limit), result.seconds))
        results.append(result)
    return results


def validation_table(config: ExperimentConfig, results: Sequence[CriterionResult]) -> DataTable:
    """Returns the validation report as a table with one single row series per criterion."""
    table = DataTable("validate", config.json())
    for result in results:
        table.add_series({"criterion": result.number, "name": result.name}, {
            "measured": [result.measured],
            "limit": [result.limit],
            "passed": [1.0 if result.passed else 0.0],
            "seconds": [result.seconds]
        })
    return table


def validate(config: ExperimentConfig, criteria: Optional[Sequence[int]] = None) -> Tuple[DataTable, bool]:
    """Runs the validation suite and returns the report table and whether every criterion passed."""
    results = run_validation(config, criteria)
    return validation_table(config, results), all(result.passed for result in results)


COMMANDS: Dict[str, Callable[[ExperimentConfig], DataTable]] = {
    "figure1": figure1,
    "figure2": figure2,
    "figure3": figure3,
    "trajectories": trajectories,
    "distribution": distribution,
    "cavity": cavity
}
