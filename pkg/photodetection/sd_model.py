# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the analytic quantities of the SD photodetection model, where the quantum jump
superoperator is J rho = lambda (eta a rho a^dagger + d rho):
no-count and unconditioned evolution, count distributions, factorial moments, waiting-time densities,
the mean cavity photon number, the cavity damped no-count evolution and the dead-time divergence probe."""

from typing import List, Optional, Sequence, Union

import numpy
from scipy.special import gammaln, logsumexp, xlogy

from photodetection.exceptions.errors import ModelTypeError, UndefinedValueError
from photodetection.fock import DiagonalFockState, StateKind, factorial_moment, state_from_kind
from photodetection.numerics import (
    METHOD_AUTO, METHOD_CLOSED, build_count_distribution, check_order, check_time, count_cap, dark_count_pmf,
    default_window, max_grid_step, resolve_method, solve_counting_time, DEFAULT_COUNTING_FRACTION)
from photodetection.parameters import DetectorParams
from photodetection.results import CountDistribution, WaitingTimeCurve, simpson_grid
from photodetection.superops import (
    DiagonalSuperop, apply_A, log_apply_A_series, log_apply_exp_A, log_apply_U, scale)
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

MODEL_NAME = "sd"
UNDEFINED_MEAN_LIMIT = 1e-12
DEFAULT_PROBE_SCHEDULE = (40, 80, 160)

TimeValues = Union[float, numpy.ndarray]


def phi_t(params: DetectorParams, t: float) -> float:
    """Returns phi_t = 1 - exp(-lambda t)."""
    check_time(t)
    return float(-numpy.expm1(-params.rate * t))


def _jump(s: DiagonalFockState, params: DetectorParams) -> DiagonalFockState:
    """Returns J s = lambda (eta A s + d s)."""
    return DiagonalFockState(params.rate * (params.eta * apply_A(s).probs + params.dark * s.probs))


def no_count_superop(params: DetectorParams, t: float) -> DiagonalSuperop:
    """Returns U(lambda t) exp(q phi_t A), the no-count evolution without the dark count survival factor."""
    return DiagonalSuperop("U", lt=params.rate * t) @ DiagonalSuperop("ExpA", y=params.q * phi_t(params, t))


def no_count(state: DiagonalFockState, params: DetectorParams, t: float) -> DiagonalFockState:
    """Returns S_t rho = exp(-d lambda t) U_t(exp(q phi_t A) rho). The trace is the probability of
       registering no counts in (0, t)."""
    check_time(t)
    if t == 0.0:
        return DiagonalFockState(state.probs)
    return scale(no_count_superop(params, t)(state), float(numpy.exp(-params.dark * params.rate * t)))


def ute(state: DiagonalFockState, params: DetectorParams, t: float) -> DiagonalFockState:
    """Returns the unconditioned evolution T_t rho = U_t(exp(phi_t A) rho). It preserves the trace."""
    check_time(t)
    if t == 0.0:
        return DiagonalFockState(state.probs)
    superop = DiagonalSuperop("U", lt=params.rate * t) @ DiagonalSuperop("ExpA", y=phi_t(params, t))
    return superop(state)


def _log_phi(log_probs: numpy.ndarray, k: Union[int, numpy.ndarray],
             log_base: Union[float, numpy.ndarray]) -> numpy.ndarray:
    """Returns log sum_{n >= k} rho_n n!/(n-k)! base^(n-k), broadcasting k and log_base
       against each other over the leading axes."""
    n = numpy.arange(log_probs.size)
    lags = n - numpy.asarray(k)[..., None]
    valid = lags >= 0
    safe_lags = numpy.where(valid, lags, 0)
    with numpy.errstate(invalid="ignore"):
        powers = numpy.where(safe_lags == 0, 0.0, safe_lags * numpy.asarray(log_base)[..., None])
        terms = log_probs + gammaln(n + 1.0) - gammaln(safe_lags + 1.0) + powers
    return logsumexp(numpy.where(valid, terms, -numpy.inf), axis=-1)


def phi_k(state: DiagonalFockState, params: DetectorParams, b: float, x: float, k: int) -> float:
    """Returns Phi_k(b, x) = sum_{n >= k} rho_n n!/(n-k)! (x + exp(-lambda b))^(n-k)."""
    check_order(k)
    check_time(b, "b")
    base = x + float(numpy.exp(-params.rate * b))
    check_time(base, "x + exp(-lambda b)")
    with numpy.errstate(divide="ignore"):
        return float(numpy.exp(_log_phi(state.log_probs, k, numpy.log(base))))


def count_distribution(state: DiagonalFockState, params: DetectorParams, t: float,
                       m_max: Optional[int] = None) -> CountDistribution:
    """Returns P_t(m) = Tr[S_t (d lambda t + eta phi_t A)^m / m! rho].
       The binomial expansion of the power splits the counts into real counts j with probability
       (eta phi_t)^j / j! Phi_j(t, q phi_t) and a Poisson number of dark counts."""
    check_time(t)
    if m_max is not None:
        check_order(m_max, name="m_max")
    size = max(count_cap(state, params, t), 0 if m_max is None else m_max) + 1

    detected = params.eta * phi_t(params, t)
    real_counts = numpy.arange(min(state.n_max, size - 1) + 1)
    with numpy.errstate(divide="ignore"):
        log_real = (
            xlogy(real_counts, detected) - gammaln(real_counts + 1.0) +
            _log_phi(state.log_probs, real_counts, numpy.log1p(-detected))
        )
    real = numpy.zeros(size)
    real[:real_counts.size] = numpy.exp(log_real)
    probs = numpy.convolve(real, dark_count_pmf(params, t, size))[:size]

    LOGGER.debug("SD count distribution at t={:s} evaluated up to m={:d}".format(repr(t), size - 1))
    return build_count_distribution(probs, t, m_max)


def mean_counts(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns the mean count d lambda t + eta nbar phi_t."""
    return params.dark * params.rate * t + params.eta * factorial_moment(state, 1) * phi_t(params, t)


def second_factorial_moment(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns (d lambda t)^2 + 2 eta nbar d lambda t phi_t + (eta phi_t)^2 n(n-1)."""
    dark_mean = params.dark * params.rate * t
    detected = params.eta * phi_t(params, t)
    return (
        dark_mean ** 2 + 2.0 * detected * factorial_moment(state, 1) * dark_mean +
        detected ** 2 * factorial_moment(state, 2)
    )


def k_factor(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns the normalized second factorial moment K_t. Raises UndefinedValueError where the mean vanishes."""
    mean = mean_counts(state, params, t)
    if mean < UNDEFINED_MEAN_LIMIT:
        raise UndefinedValueError("K_t is undefined at t={:s}: mean count {:s}".format(repr(t), repr(mean)))
    return second_factorial_moment(state, params, t) / mean ** 2


def _closed_phi_w(kind: StateKind, k: int, base: numpy.ndarray) -> numpy.ndarray:
    if kind.tag == StateKind.THERMAL:
        alpha = kind.alpha
        return numpy.exp(gammaln(k + 1.0)) * (1.0 - alpha) * alpha ** k / (1.0 - alpha * base) ** (k + 1)
    if kind.tag == StateKind.NUMBER:
        n = int(kind.nbar)
        if k > n:
            return numpy.zeros(base.shape)
        return numpy.exp(gammaln(n + 1.0) - gammaln(n - k + 1.0)) * numpy.power(base, n - k)
    nbar = float(kind.nbar)
    return nbar ** k * numpy.exp(-nbar * (1.0 - base))


def waiting_density(state: DiagonalFockState, params: DetectorParams, t: float, tau: TimeValues,
                    method: str = METHOD_AUTO) -> TimeValues:
    """Returns the non-normalized waiting-time density
       exp(-d lambda tau) [eta^2 exp(-lambda (2t + tau)) Phi_2 + eta d exp(-lambda t) (1 + exp(-lambda tau)) Phi_1
       + d^2 Phi_0] where Phi_k = Phi_k(t + tau, x) at x + exp(-lambda (t + tau)) = 1 - eta phi_tau exp(-lambda t).
       tau can be a scalar or an array."""
    check_time(t)
    check_time(tau, "tau")
    path = resolve_method(state, method)
    taus = numpy.atleast_1d(numpy.asarray(tau, dtype=float))
    rate, eta, dark = params.rate, params.eta, params.dark

    base = 1.0 - eta * -numpy.expm1(-rate * taus) * numpy.exp(-rate * t)
    if path == METHOD_CLOSED:
        phis = [_closed_phi_w(state.kind, k, base) for k in range(3)]  # type: ignore
    else:
        with numpy.errstate(divide="ignore"):
            log_base = numpy.log(base)
        phis = [numpy.exp(_log_phi(state.log_probs, k, log_base)) for k in range(3)]

    density = numpy.exp(-dark * rate * taus) * (
        eta ** 2 * numpy.exp(-rate * (2.0 * t + taus)) * phis[2] +
        eta * dark * numpy.exp(-rate * t) * (1.0 + numpy.exp(-rate * taus)) * phis[1] +
        dark ** 2 * phis[0]
    )
    if numpy.ndim(tau) == 0:
        return float(density[0])
    return density


def waiting_density_superop(state: DiagonalFockState, params: DetectorParams, t: float, tau: float) -> float:
    """Returns Tr[J S_tau J T_t rho] / lambda^2 composed from the superoperators directly."""
    check_time(tau, "tau")
    first_click = _jump(ute(state, params, t), params)
    second_click = _jump(no_count(first_click, params, tau), params)
    return second_click.trace / params.rate ** 2


def waiting_curve(state: DiagonalFockState, params: DetectorParams, t: float, window: Optional[float] = None,
                  method: str = METHOD_AUTO) -> WaitingTimeCurve:
    """Returns the waiting-time density on a Simpson grid over [0, window], default window 10/(eta lambda)."""
    if window is None:
        window = default_window(params)
    grid = simpson_grid(window, max_grid_step(params))
    return WaitingTimeCurve(t, grid, waiting_density(state, params, t, grid, method))


def mean_waiting(state: DiagonalFockState, params: DetectorParams, t: float, window: Optional[float] = None,
                 method: str = METHOD_AUTO) -> float:
    """Returns the mean waiting time over the window. Raises UndefinedValueError for a zero normalization."""
    return waiting_curve(state, params, t, window, method).mean


def n_cav(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns the mean cavity photon number nbar exp(-lambda t)."""
    check_time(t)
    return factorial_moment(state, 1) * float(numpy.exp(-params.rate * t))


def no_count_damped(state: DiagonalFockState, params: DetectorParams, t: float) -> DiagonalFockState:
    """Returns the no-count evolution with cavity damping,
       exp(-d lambda t) U_{p lambda t}(exp(q~ phi~_t A) rho) with phi~_t = (1 - exp(-p lambda t)) / p."""
    check_time(t)
    if t == 0.0:
        return DiagonalFockState(state.probs)
    p = params.p
    damped_phi = float(-numpy.expm1(-p * params.rate * t)) / p
    superop = DiagonalSuperop("U", lt=p * params.rate * t) @ DiagonalSuperop("ExpA", y=params.q_tilde * damped_phi)
    return scale(superop(state), float(numpy.exp(-params.dark * params.rate * t)))


def _log_dead_time_coefficients(params: DetectorParams, t: float, x: float, size: int) -> numpy.ndarray:
    """Returns log c_l of the dead-time series sum_l c_l A^l, c_0 excluded."""
    rate, eta, p = params.rate, params.eta, params.p
    lags = numpy.arange(size, dtype=float)
    window_phi = float(-numpy.expm1(-rate * x))
    with numpy.errstate(divide="ignore"):
        coefficients = (
            params.dark * rate * x + numpy.log(eta / p) + xlogy(lags - 1.0, eta * window_phi) +
            numpy.log(-numpy.expm1(-p * rate * t * lags)) - gammaln(lags + 1.0)
        )
    coefficients[0] = -numpy.inf
    return coefficients


def _dead_time_first_moment(state: DiagonalFockState, params: DetectorParams, t: float, x: float) -> float:
    """Returns Tr[S_t X exp(X) rho] for X = d lambda t + sum_{l >= 1} c_l A^l."""
    log_coefficients = _log_dead_time_coefficients(params, t, x, state.n_max + 1)
    dark_mean = params.dark * params.rate * t

    log_term = state.log_probs
    log_exp_series = state.log_probs
    for order in range(1, state.n_max + 1):
        log_term = log_apply_A_series(log_term, log_coefficients) - numpy.log(order)
        if not numpy.any(numpy.isfinite(log_term)):
            break
        log_exp_series = numpy.logaddexp(log_exp_series, log_term)

    with numpy.errstate(divide="ignore"):
        log_moment = dark_mean + numpy.logaddexp(
            numpy.log(dark_mean) + log_exp_series, log_apply_A_series(log_exp_series, log_coefficients))

    p = params.p
    damped_phi = float(-numpy.expm1(-p * params.rate * t)) / p
    log_moment = log_apply_U(log_apply_exp_A(log_moment, params.q_tilde * damped_phi), p * params.rate * t)
    return float(numpy.exp(logsumexp(log_moment) - dark_mean))


def dead_time_divergence_probe(state: DiagonalFockState, params: DetectorParams, t: float,
                               x: Optional[float] = None,
                               n_max_schedule: Sequence[int] = DEFAULT_PROBE_SCHEDULE) -> List[float]:
    """Returns the first count moment of the dead-time corrected count distribution evaluated on each
       truncation of the schedule. The state is rebuilt from its kind at every n_max.
       For x = 0 every entry equals mean_counts; for x > 0 the sequence does not settle for states whose
       photon number weights decay only geometrically."""
    check_time(t)
    if x is None:
        x = params.dead_time
    check_time(x, "x")
    if state.kind is None:
        raise ModelTypeError("The dead-time probe needs a state built from a known state kind")

    moments = []
    for n_max in n_max_schedule:
        check_order(n_max, name="n_max")
        moments.append(_dead_time_first_moment(state_from_kind(state.kind, n_max), params, t, x))
        LOGGER.debug("Dead-time probe for {:s}: n_max={:d}, moment={:s}".format(
            str(state.kind), n_max, repr(moments[-1])))
    return moments


def effective_counting_time(state: DiagonalFockState, params: DetectorParams,
                            fraction: float = DEFAULT_COUNTING_FRACTION) -> float:
    """Returns the time t_E where the mean count without dark counts reaches fraction * eta * nbar."""
    ideal_params = params.replace(dark=0.0)
    target = fraction * params.eta * factorial_moment(state, 1)
    return solve_counting_time(lambda time: mean_counts(state, ideal_params, time), target, params.rate)
