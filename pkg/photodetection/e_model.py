# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""This module contains the analytic quantities of the E photodetection model, where the quantum jump
superoperator is J rho = lambda (eta E_- rho E_+ + d rho) built from the exponential phase operators.

In the diagonal basis E_- rho E_+ is the plain shift Eps, the no-jump evolution is R_t(q) = exp(-lambda t (1 - q Eps))
and every term sandwiched between vacuum projectors only touches the vacuum weight. Those terms are kept as
scalar corrections of index 0. The functionals Xi_k, Omega and Psi_k can be evaluated either as generic Fock
sums or with the closed forms of the coherent (modified Bessel), number (incomplete Gamma) and thermal states.
"""

from __future__ import annotations
import json
from typing import Any, Dict, Optional, Union

import numpy
from scipy.special import gammainc, gammaincc, gammaln, logsumexp, xlogy
from scipy.stats import binom, poisson

from photodetection.exceptions.errors import ParameterValueError, UndefinedValueError
from photodetection.fock import DiagonalFockState, StateKind, factorial_moment, truncation_for_tail
from photodetection.numerics import (
    METHOD_AUTO, METHOD_CLOSED, build_count_distribution, check_order, check_time, count_cap, dark_count_pmf,
    default_window, max_grid_step, resolve_method, solve_counting_time, DEFAULT_COUNTING_FRACTION)
from photodetection.parameters import DetectorParams
from photodetection.results import CountDistribution, WaitingTimeCurve, simpson_grid
from photodetection.special import log_bessel_i, log_regularized_lower_gamma, log_upper_gamma
from photodetection.superops import (
    DiagonalSuperop, apply_eps, log_apply_exp_eps, log_apply_R, log_apply_resolvent_eps, log_shift_series, scale)
from photodetection.tools import FullLogger

LOGGER = FullLogger(__name__)

MODEL_NAME = "e"
UNDEFINED_MEAN_LIMIT = 1e-12
# tail mass ignored by the coherent Bessel series
CLOSED_FORM_EPSILON = 1e-16

TimeValues = Union[float, numpy.ndarray]


def _check_q(q: float):
    if not 0.0 <= q <= 1.0:
        raise ParameterValueError("q must be in [0, 1], got {:s}".format(str(q)))


def _log_vacuum_correction(state: DiagonalFockState, lt: float, q: float) -> float:
    """Returns log sum_N rho_N q^N P(N + 1, lt), the index 0 term [(1 - R_t)/(1 - q Eps) rho]_0."""
    if lt == 0.0:
        return -numpy.inf
    n = state.photon_numbers.astype(float)
    with numpy.errstate(divide="ignore"):
        return float(logsumexp(
            state.log_probs + xlogy(n, q) + numpy.asarray(log_regularized_lower_gamma(n + 1.0, lt))))


def _no_jump_with_vacuum(state: DiagonalFockState, lt: float, q: float) -> DiagonalFockState:
    """Returns R_t(q) rho + Lambda_0 (1 - R_t(q)) / (1 - q Eps) Lambda_0 rho."""
    evolved = DiagonalSuperop("R", lt=lt, q=q)(state).probs.copy()
    evolved[0] += float(numpy.exp(_log_vacuum_correction(state, lt, q)))
    return DiagonalFockState(evolved)


def no_count(state: DiagonalFockState, params: DetectorParams, t: float) -> DiagonalFockState:
    """Returns S_t rho = exp(-d lambda t) [R_t rho + Lambda_0 (1 - R_t)/(1 - q Eps) Lambda_0 rho].
       The trace is the probability of registering no counts in (0, t)."""
    check_time(t)
    if t == 0.0:
        return DiagonalFockState(state.probs)
    lt = params.rate * t
    return scale(_no_jump_with_vacuum(state, lt, params.q), float(numpy.exp(-params.dark * lt)))


def ute(state: DiagonalFockState, params: DetectorParams, t: float) -> DiagonalFockState:
    """Returns the unconditioned evolution R0_t rho + Lambda_0 (1 - R0_t)/(1 - Eps) Lambda_0 rho,
       where R0_t = R_t(q = 1). It preserves the trace."""
    check_time(t)
    if t == 0.0:
        return DiagonalFockState(state.probs)
    return _no_jump_with_vacuum(state, params.rate * t, 1.0)


def count_distribution(state: DiagonalFockState, params: DetectorParams, t: float,
                       m_max: Optional[int] = None) -> CountDistribution:
    """Returns P_t(m) = Tr[N_t(m) rho] as the sum of three terms:
       the counts registered while photons remain, the dark counts after the field reached the vacuum
       without any count and the counts of a history whose last photon was absorbed at some x in (0, t).
       The x-integral of the last term is carried out with lower incomplete Gamma functions."""
    check_time(t)
    if m_max is not None:
        check_order(m_max, name="m_max")
    size = max(count_cap(state, params, t), 0 if m_max is None else m_max) + 1
    lt = params.rate * t
    eta, q = params.eta, params.q
    n_max = state.n_max
    dark = dark_count_pmf(params, t, size)

    # real counts while photons remain: (eta lambda t)^j / j! sum_i (1 - q^i) (R_t rho)_{i+j}
    i = numpy.arange(n_max + 1, dtype=float)
    with numpy.errstate(divide="ignore"):
        log_weights = numpy.log1p(-numpy.power(q, i))
        log_remaining = log_shift_series(log_apply_R(state.log_probs, lt, q), log_weights)
        log_real = xlogy(i, eta * lt) - gammaln(i + 1.0) + log_remaining
    real = numpy.zeros(size)
    n_real = min(n_max + 1, size)
    real[:n_real] = numpy.exp(log_real[:n_real])
    probs = numpy.convolve(real, dark)[:size]

    log_resolvent = log_apply_resolvent_eps(state.log_probs, q)
    probs += dark * float(numpy.exp(log_resolvent[0]))

    if n_max > 0 and eta > 0.0 and lt > 0.0:
        # C_j = sum_{s >= j} Binom(j; s, eta) P(s + 1, lt) [rho / (1 - q Eps)]_{s+1}
        s = numpy.arange(n_max, dtype=float)
        log_absorbed = numpy.asarray(log_regularized_lower_gamma(s + 1.0, lt)) + log_resolvent[1:]
        with numpy.errstate(divide="ignore"):
            log_terms = binom.logpmf(s[:, None], s[None, :], eta) + log_absorbed[None, :]
        last_photon = numpy.zeros(size)
        n_last = min(n_max, size)
        last_photon[:n_last] = numpy.exp(logsumexp(log_terms, axis=1))[:n_last]
        probs[1:] += eta * numpy.convolve(last_photon, dark)[:size - 1]

    LOGGER.debug("E count distribution at t={:s} evaluated up to m={:d}".format(repr(t), size - 1))
    return build_count_distribution(probs, t, m_max)


def _log_coherent_bessel(j: numpy.ndarray, nbar: float, y: numpy.ndarray) -> numpy.ndarray:
    """Returns log sum_l y^l/l! nbar^(j+l)/(j+l)! = log (nbar/y)^(j/2) I_j(2 sqrt(nbar y)), nbar^j/j! at y = 0."""
    j, y = numpy.broadcast_arrays(numpy.asarray(j, dtype=float), numpy.asarray(y, dtype=float))
    with numpy.errstate(divide="ignore", invalid="ignore"):
        limit = xlogy(j, nbar) - gammaln(j + 1.0)
        positive = nbar * y > 0.0
        safe_y = numpy.where(positive, y, 1.0)
        series = (
            numpy.asarray(log_bessel_i(j, 2.0 * numpy.sqrt(nbar * safe_y))) +
            0.5 * j * (numpy.log(nbar) - numpy.log(safe_y))
        ) if nbar > 0.0 else limit
    return numpy.where(positive, series, limit)


def _coherent_orders(kind: StateKind, k: int) -> numpy.ndarray:
    return numpy.arange(truncation_for_tail(kind, CLOSED_FORM_EPSILON) + k + 2, dtype=float)


def _log_xi_generic(state: DiagonalFockState, lt: float, k: int) -> float:
    log_evolved = log_apply_R(state.log_probs, lt, 1.0)
    if k > state.n_max:
        return -numpy.inf
    j = numpy.arange(k, state.n_max + 1, dtype=float)
    return float(logsumexp(numpy.log(j - k + 1.0) + log_evolved[k:]))


def _log_xi_closed(kind: StateKind, lt: float, k: int) -> float:
    if kind.tag == StateKind.THERMAL:
        alpha = kind.alpha
        return float(xlogy(k - 1.0, alpha) - lt * (1.0 - alpha) + numpy.log(kind.nbar))
    if kind.tag == StateKind.NUMBER:
        rest = int(kind.nbar) - k
        if rest < 0:
            return -numpy.inf
        with numpy.errstate(divide="ignore"):
            log_first = float(log_upper_gamma(rest + 2, lt))
            log_second = float(numpy.log(lt) + log_upper_gamma(rest + 1, lt))
            return log_first + float(numpy.log1p(-numpy.exp(log_second - log_first))) - gammaln(rest + 1.0)
    j = _coherent_orders(kind, k)[k:]
    nbar = float(kind.nbar)
    return float(logsumexp(numpy.log(j - k + 1.0) + _log_coherent_bessel(j, nbar, lt)) - lt - nbar)


def _log_omega_generic(state: DiagonalFockState, lt: float) -> float:
    log_evolved = log_apply_R(state.log_probs, lt, 1.0)
    if state.n_max < 2:
        return -numpy.inf
    j = numpy.arange(2, state.n_max + 1, dtype=float)
    return float(logsumexp(numpy.log(j) + numpy.log(j - 1.0) + log_evolved[2:]))


def _log_omega_closed(kind: StateKind, lt: float) -> float:
    if kind.tag == StateKind.THERMAL:
        return float(-lt * (1.0 - kind.alpha) + numpy.log(2.0) + 2.0 * numpy.log(kind.nbar))
    if kind.tag == StateKind.NUMBER:
        n = int(kind.nbar)
        with numpy.errstate(divide="ignore"):
            log_terms = numpy.array([
                float(log_upper_gamma(n + 1, lt)),
                float(numpy.log(2.0 * lt) + log_upper_gamma(n, lt)),
                float(2.0 * numpy.log(lt) + log_upper_gamma(n - 1, lt))
            ])
        largest = log_terms.max()
        value = numpy.exp(log_terms[0] - largest) - numpy.exp(log_terms[1] - largest) + \
            numpy.exp(log_terms[2] - largest)
        if value <= 0.0:
            return -numpy.inf
        return float(largest + numpy.log(value) - gammaln(n - 1.0))
    j = _coherent_orders(kind, 0)[2:]
    nbar = float(kind.nbar)
    return float(logsumexp(numpy.log(j) + numpy.log(j - 1.0) + _log_coherent_bessel(j, nbar, lt)) - lt - nbar)


def _log_psi_generic(state: DiagonalFockState, q: float, y: float, k: int) -> float:
    if k > state.n_max:
        return -numpy.inf
    return float(log_apply_resolvent_eps(log_apply_exp_eps(state.log_probs, y), q)[k])


def _log_psi_closed(kind: StateKind, q: float, y: TimeValues, k: int) -> numpy.ndarray:
    """Returns log Psi_k(q, y / lambda) from the closed forms, vectorized over y = lambda beta."""
    y = numpy.asarray(y, dtype=float)
    if kind.tag == StateKind.THERMAL:
        alpha = kind.alpha
        return numpy.log1p(-alpha) + xlogy(k, alpha) + y * alpha - numpy.log1p(-q * alpha)
    if kind.tag == StateKind.NUMBER:
        rest = int(kind.nbar) - k
        if rest < 0:
            return numpy.full(y.shape, -numpy.inf)
        if q == 0.0:
            return xlogy(rest, y) - gammaln(rest + 1.0)
        return (
            rest * numpy.log(q) + y / q + numpy.asarray(log_upper_gamma(rest + 1, y / q)) - gammaln(rest + 1.0))
    nbar = float(kind.nbar)
    n = _coherent_orders(kind, k)[:-k] if k > 0 else _coherent_orders(kind, k)
    with numpy.errstate(divide="ignore"):
        terms = xlogy(n, q) + _log_coherent_bessel(n + k, nbar, y[..., None])
    return logsumexp(terms, axis=-1) - nbar


def _nbar_or_undefined(state: DiagonalFockState) -> float:
    nbar = factorial_moment(state, 1)
    if nbar <= 0.0:
        raise UndefinedValueError("Xi_k is undefined for a state without photons")
    return nbar


def xi_k(state: DiagonalFockState, params: DetectorParams, t: float, k: int, method: str = METHOD_AUTO) -> float:
    """Returns Xi_k = (1/nbar) sum_n (n + 1) (R0_t rho)_{n+k}. Raises UndefinedValueError for nbar = 0."""
    check_time(t)
    check_order(k, 1)
    nbar = _nbar_or_undefined(state)
    lt = params.rate * t
    if resolve_method(state, method) == METHOD_CLOSED:
        return float(numpy.exp(_log_xi_closed(state.kind, lt, k) - numpy.log(nbar)))  # type: ignore
    return float(numpy.exp(_log_xi_generic(state, lt, k) - numpy.log(nbar)))


def omega(state: DiagonalFockState, params: DetectorParams, t: float, method: str = METHOD_AUTO) -> float:
    """Returns Omega = sum_n n(n-1) (R0_t rho)_n / n(n-1). Raises UndefinedValueError if n(n-1) = 0."""
    check_time(t)
    pairs = factorial_moment(state, 2)
    if pairs <= 0.0:
        raise UndefinedValueError("Omega is undefined for a state with a vanishing second factorial moment")
    lt = params.rate * t
    if resolve_method(state, method) == METHOD_CLOSED:
        return float(numpy.exp(_log_omega_closed(state.kind, lt) - numpy.log(pairs)))  # type: ignore
    return float(numpy.exp(_log_omega_generic(state, lt) - numpy.log(pairs)))


def psi_k(state: DiagonalFockState, q: float, beta: float, k: int, rate: float = 1.0,
          method: str = METHOD_AUTO) -> float:
    """Returns Psi_k(q, beta) = sum_{n, l} q^n (lambda beta)^l / l! rho_{n+l+k}."""
    _check_q(q)
    check_time(beta, "beta")
    check_order(k)
    y = rate * beta
    if resolve_method(state, method) == METHOD_CLOSED:
        return float(numpy.exp(_log_psi_closed(state.kind, q, y, k)))  # type: ignore
    return float(numpy.exp(_log_psi_generic(state, q, y, k)))


def absorbed_moments(state: DiagonalFockState, lt: float) -> Dict[str, float]:
    """Returns the first two factorial moments of the number of absorbed photons min(K, N),
       where K is Poisson(lt) distributed. They equal nbar (1 - Xi_1) and n(n-1) (1 - Omega) - 2 nbar lt Xi_2."""
    if lt == 0.0:
        return {"mean": 0.0, "pairs": 0.0}
    n = state.photon_numbers.astype(float)
    survival = poisson.sf(n - 1.0, lt)
    absorbed_mean = lt * poisson.cdf(n - 2.0, lt) + n * survival
    absorbed_pairs = lt ** 2 * poisson.cdf(n - 3.0, lt) + n * (n - 1.0) * survival
    return {
        "mean": float(numpy.dot(state.probs, absorbed_mean)),
        "pairs": float(numpy.dot(state.probs, absorbed_pairs))
    }


class EModelFunctionals:
    """The functionals Xi_1, Xi_2, Omega and the absorbed-photon moments of a state at time t,
       evaluated once at construction. Psi_k is evaluated on demand."""

    def __init__(self, state: DiagonalFockState, params: DetectorParams, t: float, method: str = METHOD_AUTO):
        check_time(t)
        self.__state = state
        self.__params = params
        self.__t = float(t)
        self.__method = resolve_method(state, method)
        self.__nbar = factorial_moment(state, 1)

        self.__xi: Dict[int, float] = {}
        if self.__nbar > 0.0:
            self.__xi = {k: xi_k(state, params, t, k, self.__method) for k in (1, 2)}
        self.__omega: Optional[float] = None
        if factorial_moment(state, 2) > 0.0:
            self.__omega = omega(state, params, t, self.__method)
        self.__absorbed = absorbed_moments(state, params.rate * t)

    @property
    def t(self) -> float:
        """The evaluation time."""
        return self.__t

    @property
    def method(self) -> str:
        """The resolved evaluation path, generic or closed."""
        return self.__method

    @property
    def nbar(self) -> float:
        """The mean photon number of the initial state."""
        return self.__nbar

    @property
    def omega(self) -> float:
        """Omega at time t."""
        if self.__omega is None:
            raise UndefinedValueError("Omega is undefined for a state with a vanishing second factorial moment")
        return self.__omega

    @property
    def absorbed_mean(self) -> float:
        """The mean number of absorbed photons, nbar (1 - Xi_1)."""
        return self.__absorbed["mean"]

    @property
    def absorbed_pairs(self) -> float:
        """The second factorial moment of the absorbed photons, n(n-1)(1 - Omega) - 2 nbar lambda t Xi_2."""
        return self.__absorbed["pairs"]

    def xi(self, k: int) -> float:
        """Returns Xi_k at time t."""
        if k in self.__xi:
            return self.__xi[k]
        return xi_k(self.__state, self.__params, self.__t, k, self.__method)

    def psi(self, q: float, beta: float, k: int) -> float:
        """Returns Psi_k(q, beta) of the state."""
        return psi_k(self.__state, q, beta, k, self.__params.rate, self.__method)

    def json(self) -> Dict[str, Any]:
        """Returns the evaluated functionals as a dictionary."""
        return {
            "t": self.__t,
            "method": self.__method,
            "xi": {str(k): value for k, value in self.__xi.items()},
            "omega": self.__omega,
            "absorbed_mean": self.absorbed_mean,
            "absorbed_pairs": self.absorbed_pairs
        }

    def __str__(self) -> str:
        return json.dumps(self.json())

    def __repr__(self) -> str:
        return "EModelFunctionals(t={:s}, method={:s})".format(repr(self.__t), self.__method)


def mean_counts(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns the mean count d lambda t + eta nbar (1 - Xi_1)."""
    check_time(t)
    lt = params.rate * t
    return params.dark * lt + params.eta * absorbed_moments(state, lt)["mean"]


def second_factorial_moment(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns (d lambda t)^2 + 2 eta nbar d lambda t (1 - Xi_1) + eta^2 [n(n-1)(1 - Omega) - 2 nbar lambda t Xi_2]."""
    check_time(t)
    lt = params.rate * t
    dark_mean = params.dark * lt
    absorbed = absorbed_moments(state, lt)
    return dark_mean ** 2 + 2.0 * params.eta * dark_mean * absorbed["mean"] + params.eta ** 2 * absorbed["pairs"]


def k_factor(state: DiagonalFockState, params: DetectorParams, t: float) -> float:
    """Returns the normalized second factorial moment K_t. Raises UndefinedValueError where the mean vanishes."""
    mean = mean_counts(state, params, t)
    if mean < UNDEFINED_MEAN_LIMIT:
        raise UndefinedValueError("K_t is undefined at t={:s}: mean count {:s}".format(repr(t), repr(mean)))
    return second_factorial_moment(state, params, t) / mean ** 2


def k_limit_origin(state: DiagonalFockState) -> float:
    """Returns the small time limit of K_t, (1 - rho_0 - rho_1) / (1 - rho_0)^2."""
    rho_0 = float(state.probs[0])
    rho_1 = float(state.probs[1]) if state.n_max >= 1 else 0.0
    if rho_0 >= 1.0:
        raise UndefinedValueError("The limit of K_t at the origin is undefined for the vacuum")
    return (1.0 - rho_0 - rho_1) / (1.0 - rho_0) ** 2


def waiting_density(state: DiagonalFockState, params: DetectorParams, t: float, tau: TimeValues,
                    method: str = METHOD_AUTO) -> TimeValues:
    """Returns the non-normalized waiting-time density
       exp(-d lambda tau) { (lambda d)^2 [1 - Tr R0_t rho] + Tr[J R_tau J R0_t rho]
       + lambda d Tr[Lambda_0 (1 - R_tau)/(1 - q Eps) Lambda_0 J R0_t rho] }.
       tau can be a scalar or an array."""
    check_time(t)
    check_time(tau, "tau")
    path = resolve_method(state, method)
    taus = numpy.atleast_1d(numpy.asarray(tau, dtype=float))
    rate, eta, dark, q = params.rate, params.eta, params.dark, params.q
    lt = rate * t
    ltau = rate * taus
    y = lt + q * ltau

    if path == METHOD_CLOSED:
        kind: StateKind = state.kind  # type: ignore
        survivals = [numpy.exp(_log_psi_closed(kind, 1.0, y, k) - y) for k in range(3)]
        vacuum = float(-numpy.expm1(float(_log_psi_closed(kind, 1.0, lt, 0)) - lt))
        if kind.tag == StateKind.THERMAL:
            alpha = kind.alpha
            rests = [
                (1.0 - alpha) * alpha ** k * numpy.exp(-lt * (1.0 - alpha)) *
                -numpy.expm1(-ltau * (1.0 - q * alpha)) / (1.0 - q * alpha)
                for k in range(2)
            ]
        else:
            rests = [
                numpy.exp(float(_log_psi_closed(kind, q, lt, k)) - lt) -
                numpy.exp(_log_psi_closed(kind, q, y, k) - lt - ltau)
                for k in range(2)
            ]
    else:
        n = state.photon_numbers.astype(float)
        survivals = [
            gammaincc(numpy.maximum(n[k:] - k + 1.0, 1.0), y[:, None]) @ state.probs[k:] for k in range(3)]
        vacuum = float(numpy.dot(state.probs, gammainc(n + 1.0, lt)))
        evolved = numpy.exp(log_apply_R(state.log_probs, lt, 1.0))
        absorbed = numpy.power(q, n)[None, :] * gammainc(n + 1.0, ltau[:, None])
        rests = [absorbed[:, :n.size - k] @ evolved[k:] for k in range(2)]

    density = numpy.exp(-dark * ltau) * (
        (rate * dark) ** 2 * vacuum +
        rate ** 2 * numpy.exp(-ltau * (1.0 - q)) * (
            eta ** 2 * survivals[2] + 2.0 * eta * dark * survivals[1] + dark ** 2 * survivals[0]) +
        rate ** 2 * dark * (eta * rests[1] + dark * rests[0])
    )
    density = numpy.clip(density, 0.0, None)
    if numpy.ndim(tau) == 0:
        return float(density[0])
    return density


def _jump(s: DiagonalFockState, params: DetectorParams) -> DiagonalFockState:
    """Returns J s = lambda (eta Eps s + d s)."""
    return DiagonalFockState(params.rate * (params.eta * apply_eps(s).probs + params.dark * s.probs))


def waiting_density_superop(state: DiagonalFockState, params: DetectorParams, t: float, tau: float) -> float:
    """Returns the waiting-time density composed from the superoperators directly,
       exp(-d lambda tau) (lambda d)^2 [1 - Tr R0_t rho] + Tr[J S_tau J R0_t rho]."""
    check_time(t)
    check_time(tau, "tau")
    lt = params.rate * t
    no_jump = DiagonalSuperop("R", lt=lt, q=1.0)(state)
    second_click = _jump(no_count(_jump(no_jump, params), params, tau), params)
    vacuum = (params.rate * params.dark) ** 2 * (1.0 - no_jump.trace)
    return float(numpy.exp(-params.dark * params.rate * tau)) * vacuum + second_click.trace


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


def n_cav(state: DiagonalFockState, params: DetectorParams, t: float, method: str = METHOD_AUTO) -> float:
    """Returns the mean cavity photon number at the first click, nbar Xi_1(t)."""
    check_time(t)
    nbar = factorial_moment(state, 1)
    if nbar <= 0.0:
        return 0.0
    return nbar * xi_k(state, params, t, 1, method)


def effective_counting_time(state: DiagonalFockState, params: DetectorParams,
                            fraction: float = DEFAULT_COUNTING_FRACTION) -> float:
    """Returns the time t_E where the mean count without dark counts reaches fraction * eta * nbar."""
    ideal_params = params.replace(dark=0.0)
    target = fraction * params.eta * factorial_moment(state, 1)
    return solve_counting_time(lambda time: mean_counts(state, ideal_params, time), target, params.rate)
