# -*- coding: utf-8 -*-
# This source code is licensed under the MIT license.

"""Unit tests for the diagonal superoperator module."""

import json
import unittest

import numpy
from scipy.special import gammaln

from photodetection.exceptions.errors import ModelTypeError, ParameterValueError
from photodetection.fock import DiagonalFockState, number_state, state_from_kind, vacuum_state
from photodetection.superops import (
    DiagonalSuperop, apply_A, apply_A_series, apply_eps, apply_exp_A, apply_exp_eps, apply_R,
    apply_resolvent_eps, apply_U, log_shift_series, scale)
from photodetection.tests.common import TEST_SEED, coherent_kind, random_state, thermal_kind

IDENTITY_TOLERANCE = 1e-12


def scaled_difference(first: DiagonalFockState, second: DiagonalFockState) -> float:
    """Returns the largest absolute difference relative to the largest entry, at least one."""
    return float(numpy.max(numpy.abs(first.probs - second.probs)) / max(1.0, float(numpy.max(second.probs))))


class TestElementaryActions(unittest.TestCase):
    """Unit tests for the elementary superoperator actions."""

    def test_apply_A(self):
        """A lowers the photon number with the weight n + 1."""
        numpy.testing.assert_array_equal(apply_A(number_state(1, 2)).probs, [1.0, 0.0, 0.0])
        numpy.testing.assert_array_equal(apply_A(vacuum_state(2)).probs, [0.0, 0.0, 0.0])
        coherent = state_from_kind(coherent_kind(7.0))
        self.assertAlmostEqual(apply_A(coherent).trace, 7.0, places=10)

    def test_apply_eps(self):
        """Eps shifts the weights down by one."""
        numpy.testing.assert_array_equal(apply_eps(number_state(5, 6)).probs, [0, 0, 0, 0, 1, 0, 0])
        numpy.testing.assert_array_equal(apply_eps(vacuum_state()).probs, [0.0])
        thermal = state_from_kind(thermal_kind(3.0))
        alpha = thermal_kind(3.0).alpha
        numpy.testing.assert_allclose(apply_eps(thermal).probs[:-1], alpha * thermal.probs[:-1], rtol=1e-12)

    def test_apply_U(self):
        """U damps level n by exp(-lt n)."""
        state = number_state(1, 1)
        self.assertAlmostEqual(apply_U(state, numpy.log(2.0)).probs[1], 0.5)
        numpy.testing.assert_array_equal(apply_U(state, 0.0).probs, state.probs)
        with self.assertRaises(ParameterValueError):
            apply_U(state, -1.0)

    def test_apply_exp_A(self):
        """exp(y A) adds binomially weighted higher levels."""
        numpy.testing.assert_allclose(apply_exp_A(number_state(1, 1), 1.0).probs, [1.0, 1.0])
        numpy.testing.assert_allclose(apply_exp_A(number_state(2, 2), 0.5).probs, [0.25, 1.0, 1.0])
        state = state_from_kind(coherent_kind(4.0))
        numpy.testing.assert_allclose(apply_exp_A(state, 0.0).probs, state.probs, rtol=1e-14)

    def test_exp_A_trace_identity(self):
        """Tr[exp(phi A) U(lt) s] = 1 for the unconditioned SD evolution."""
        state = state_from_kind(coherent_kind(10.0))
        for lt in (0.1, 1.0, 4.0):
            phi = -numpy.expm1(-lt)
            self.assertAlmostEqual(apply_U(apply_exp_A(state, phi), lt).trace, 1.0, places=12)

    def test_apply_A_series(self):
        """The general A series reproduces exp(y A) for c_l = y^l / l!."""
        state = state_from_kind(coherent_kind(6.0))
        lags = numpy.arange(state.n_max + 1, dtype=float)
        coefficients = lags * numpy.log(0.3) - gammaln(lags + 1.0)
        numpy.testing.assert_allclose(apply_A_series(state, coefficients).probs,
                                      apply_exp_A(state, 0.3).probs, rtol=1e-12)

    def test_apply_exp_eps(self):
        """exp(y Eps) collects y^l / l! of the higher levels."""
        numpy.testing.assert_allclose(apply_exp_eps(number_state(2, 2), 1.0).probs, [0.5, 1.0, 1.0])
        thermal = state_from_kind(thermal_kind(2.0), epsilon=1e-16)
        alpha = thermal_kind(2.0).alpha
        expected = numpy.exp(0.7 * alpha) * thermal.probs
        numpy.testing.assert_allclose(apply_exp_eps(thermal, 0.7).probs[:20], expected[:20], rtol=1e-12)

    def test_apply_resolvent_eps(self):
        """(1 - q Eps)^-1 collects powers of q."""
        numpy.testing.assert_allclose(
            apply_resolvent_eps(number_state(3, 3), 0.4).probs, [0.064, 0.16, 0.4, 1.0], rtol=1e-14)
        state = state_from_kind(coherent_kind(3.0))
        numpy.testing.assert_allclose(apply_resolvent_eps(state, 0.0).probs, state.probs, rtol=1e-14)
        thermal = state_from_kind(thermal_kind(2.0), epsilon=1e-16)
        alpha = thermal_kind(2.0).alpha
        numpy.testing.assert_allclose(
            apply_resolvent_eps(thermal, 0.5).probs[:20], thermal.probs[:20] / (1.0 - 0.5 * alpha), rtol=1e-12)
        with self.assertRaises(ParameterValueError):
            apply_resolvent_eps(state, 1.5)

    def test_apply_R(self):
        """R(lt, q) is exp(-lt) exp(lt q Eps)."""
        state = state_from_kind(coherent_kind(5.0))
        numpy.testing.assert_allclose(apply_R(state, 0.0, 0.3).probs, state.probs, rtol=1e-14)
        numpy.testing.assert_allclose(apply_R(state, 2.0, 0.0).probs, numpy.exp(-2.0) * state.probs, rtol=1e-14)
        thermal = state_from_kind(thermal_kind(2.0), epsilon=1e-16)
        alpha = thermal_kind(2.0).alpha
        numpy.testing.assert_allclose(
            apply_R(thermal, 1.5, 0.6).probs[:20], numpy.exp(-1.5 * (1.0 - 0.6 * alpha)) * thermal.probs[:20],
            rtol=1e-12)

    def test_scale(self):
        """scale multiplies every weight and rejects negative factors."""
        self.assertAlmostEqual(scale(number_state(1, 1), 0.25).trace, 0.25)
        with self.assertRaises(ParameterValueError):
            scale(number_state(1, 1), -1.0)

    def test_log_shift_series_blocks(self):
        """The blocked log-domain kernel matches a direct sum for sizes beyond one block."""
        generator = numpy.random.Generator(numpy.random.Philox(TEST_SEED))
        values = generator.random(300)
        coefficients = generator.random(300)
        expected = numpy.array([numpy.dot(coefficients[:300 - n], values[n:]) for n in range(300)])
        result = numpy.exp(log_shift_series(numpy.log(values), numpy.log(coefficients)))
        numpy.testing.assert_allclose(result, expected, rtol=1e-12)


class TestIdentities(unittest.TestCase):
    """Commutation identities on random states."""

    def test_commutation_relations(self):
        """A U = exp(-lt) U A and exp(y A) U = U exp(y exp(-lt) A)."""
        generator = numpy.random.Generator(numpy.random.Philox(TEST_SEED))
        for _ in range(100):
            state = random_state(generator)
            lt = float(generator.uniform(0.0, 5.0))
            y = float(generator.uniform(0.0, 2.0))
            self.assertLess(scaled_difference(
                apply_A(apply_U(state, lt)), scale(apply_U(apply_A(state), lt), float(numpy.exp(-lt)))),
                IDENTITY_TOLERANCE)
            self.assertLess(scaled_difference(
                apply_exp_A(apply_U(state, lt), y), apply_U(apply_exp_A(state, y * float(numpy.exp(-lt))), lt)),
                IDENTITY_TOLERANCE)

    def test_eps_functions_commute(self):
        """All power series in Eps commute pairwise."""
        generator = numpy.random.Generator(numpy.random.Philox(TEST_SEED + 1))
        for _ in range(100):
            state = random_state(generator)
            superops = [
                DiagonalSuperop("Eps"),
                DiagonalSuperop("ExpEps", y=float(generator.uniform(0.0, 2.0))),
                DiagonalSuperop("ResolventEps", q=float(generator.uniform(0.0, 1.0))),
                DiagonalSuperop("R", lt=float(generator.uniform(0.0, 5.0)), q=float(generator.uniform(0.0, 1.0)))
            ]
            for index, first in enumerate(superops):
                self.assertTrue(first.is_eps_function)
                for second in superops[index + 1:]:
                    self.assertLess(scaled_difference((first @ second)(state), (second @ first)(state)),
                                    IDENTITY_TOLERANCE)

    def test_resolvent_inverts_one_minus_q_eps(self):
        """(1 - q Eps)^-1 (1 - q Eps) is the identity on the truncated space."""
        generator = numpy.random.Generator(numpy.random.Philox(TEST_SEED + 2))
        state = random_state(generator)
        q = 0.7
        forward = apply_resolvent_eps(state, q)
        recovered = forward.probs - q * apply_eps(forward).probs
        numpy.testing.assert_allclose(recovered, state.probs, rtol=1e-10, atol=1e-15)


class TestDiagonalSuperop(unittest.TestCase):
    """Unit tests for the DiagonalSuperop class."""

    def test_composition_order(self):
        """(first @ second)(s) applies second before first."""
        state = state_from_kind(coherent_kind(3.0))
        composition = DiagonalSuperop("U", lt=0.5) @ DiagonalSuperop("A")
        numpy.testing.assert_allclose(composition(state).probs, apply_U(apply_A(state), 0.5).probs, rtol=1e-14)
        self.assertEqual(DiagonalSuperop.compose(DiagonalSuperop("U", lt=0.5), DiagonalSuperop("A")), composition)
        self.assertFalse(composition.is_eps_function)

    def test_log_domain_chaining(self):
        """Compositions whose intermediate weights overflow still give the finite final weights."""
        state = state_from_kind(thermal_kind(50.0))
        y, lt = 0.9, 5.0
        composition = DiagonalSuperop("U", lt=lt) @ DiagonalSuperop("ExpA", y=y)
        log_weights = composition.log_apply(state.log_probs)
        self.assertGreater(float(numpy.max(DiagonalSuperop("ExpA", y=y).log_apply(state.log_probs))), 710.0)
        self.assertTrue(numpy.all(numpy.isfinite(composition(state).probs)))
        numpy.testing.assert_allclose(composition(state).probs, numpy.exp(log_weights), rtol=1e-14)
        # U(lt) exp(y A) = exp(y exp(lt) A) U(lt)
        swapped = DiagonalSuperop("ExpA", y=y * float(numpy.exp(lt))) @ DiagonalSuperop("U", lt=lt)
        self.assertLess(scaled_difference(composition(state), swapped(state)), 1e-10)

    def test_registry(self):
        """Every elementary action is registered."""
        self.assertEqual(
            sorted(DiagonalSuperop.get_registered_names()),
            sorted(["A", "Eps", "U", "ExpA", "ExpEps", "ResolventEps", "R"]))

    def test_invalid_superops(self):
        """Unknown names and wrong or invalid parameters are rejected."""
        with self.assertRaises(ModelTypeError):
            DiagonalSuperop("B")
        with self.assertRaises(ParameterValueError):
            DiagonalSuperop("U")
        with self.assertRaises(ParameterValueError):
            DiagonalSuperop("R", lt=1.0, q=2.0)
        with self.assertRaises(ParameterValueError):
            DiagonalSuperop("ExpA", y=-0.5)
        with self.assertRaises(ParameterValueError):
            DiagonalSuperop.compose()

    def test_json(self):
        """The factors serialize in composition order."""
        composition = DiagonalSuperop("R", lt=1.0, q=0.5) @ DiagonalSuperop("Eps")
        self.assertEqual(json.loads(str(composition)), [
            {"name": "R", "parameters": {"lt": 1.0, "q": 0.5}},
            {"name": "Eps", "parameters": {}}
        ])
        self.assertEqual(repr(composition), "R(lt=1.0, q=0.5) @ Eps()")


if __name__ == '__main__':
    unittest.main()
