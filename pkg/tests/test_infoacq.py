#!/usr/bin/env python3

"""Pruebas de la adquisición flexible de información."""

from __future__ import annotations

import json
import math
import unittest
from unittest import mock

import numpy as np
from hypothesis import given, settings
from scipy import integrate

from kyle import (DiscreteDist, ModelParams, NormalLaw, build_posterior,
                  comparative_statics_sweep, discrete_signal_value, double_exponential_grid,
                  normal_grid, optimal_value, optimize_discrete_signal, posterior_mean_law,
                  solve_model, solve_normal_prior, two_state_density, value_convergence,
                  value_under_signal, KyleConfigError, KyleDomainError)
from kyle.infoacq import DEFAULT_MS, dual_objective, split_signal_state
from .strategies import PriorStrats
from .utils import normal_objective

SYMMETRIC = DiscreteDist([-2.0, 2.0], [0.5, 0.5])
ASYMMETRIC = DiscreteDist([-2.0, 2.0], [0.3, 0.7])


def two_state(prior: DiscreteDist = ASYMMETRIC, lam: float = 2.0, sigma_Z: float = 1.0):
    params = ModelParams(lam, sigma_Z, 1.0, prior)
    mu = solve_model(params)
    return params, mu, build_posterior(params, mu)


class TestModelParams(unittest.TestCase):
    """Pruebas de :class:`ModelParams`."""

    def test_sigma_G(self):
        params = ModelParams(1.0, 2.0, 4.0, SYMMETRIC)
        self.assertEqual(params.sigma_G, 4.0)
        self.assertEqual(params.noise_law.std, 4.0)

    def test_invalid(self):
        for lam, sigma, T in ((0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, math.inf)):
            with self.assertRaises(KyleConfigError):
                ModelParams(lam, sigma, T, SYMMETRIC)

    def test_invalid_message(self):
        with self.assertRaises(KyleConfigError) as ctx:
            ModelParams(-1.0, 1.0, 1.0, SYMMETRIC)
        self.assertIn('model.lambda', str(ctx.exception))

    def test_with_axis(self):
        params = ModelParams(1.0, 1.0, 1.0, SYMMETRIC)
        self.assertEqual(params.with_axis('lambda', 3.0).lam, 3.0)
        self.assertEqual(params.with_axis('sigma_Z', 0.5).sigma_Z, 0.5)
        with self.assertRaises(KyleConfigError):
            params.with_axis('T', 2.0)

    def test_normal_prior_needs_grid(self):
        with self.assertRaises(KyleConfigError):
            solve_model(ModelParams(1.0, 1.0, 1.0, NormalLaw(0.0, 1.0)))


class TestNormalPrior(unittest.TestCase):
    """Pruebas de la solución cerrada con pago normal."""

    def test_first_order_condition(self):
        for lam in (0.5, 1.0, 2.0, 4.0, 8.0):
            sol = solve_normal_prior(1.0, ModelParams(lam, 1.0, 1.0, NormalLaw(0.0, 1.0)))
            self.assertLess(abs(sol.foc_residual), 1e-12)
            self.assertTrue(0.0 < sol.xi_star < 1.0)

    def test_golden_ratio(self):
        """Con costos unitarios :math:`\\sqrt\\xi` es el inverso de la razón áurea."""
        sol = solve_normal_prior(1.0, ModelParams(1.0, 1.0, 1.0, NormalLaw(0.0, 1.0)))
        self.assertAlmostEqual(math.sqrt(sol.xi_star), (math.sqrt(5) - 1) / 2, delta=1e-14)

    def test_decreasing_in_cost(self):
        xs = [solve_normal_prior(1.0, ModelParams(lam, 1.0, 1.0, NormalLaw(0.0, 1.0))).xi_star
              for lam in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
        self.assertTrue(all(a > b for a, b in zip(xs, xs[1:])))

    def test_free_information(self):
        sol = solve_normal_prior(1.0, ModelParams(1e-8, 1.0, 1.0, NormalLaw(0.0, 1.0)))
        self.assertGreater(sol.xi_star, 1.0 - 1e-7)

    def test_grid_scan(self):
        """El óptimo domina a una búsqueda exhaustiva en (0, 1)."""
        sigma_v, lam = 1.5, 2.0
        sol = solve_normal_prior(sigma_v, ModelParams(lam, 1.0, 1.0, NormalLaw(0.0, sigma_v)))
        xi = np.linspace(1e-6, 1.0 - 1e-6, 100001)
        best = float(np.max(normal_objective(xi, sigma_v, 1.0, lam)))
        self.assertGreaterEqual(sol.value, best - 1e-12)
        self.assertAlmostEqual(sol.value, best, delta=1e-8)

    def test_invalid_std(self):
        with self.assertRaises(KyleConfigError):
            solve_normal_prior(0.0, ModelParams(1.0, 1.0, 1.0, NormalLaw(0.0, 1.0)))

    def test_grid_chain(self):
        """Sinkhorn sobre la malla recupera la varianza :math:`\\xi\\sigma_v^2`."""
        params = ModelParams(1.0, 1.0, 1.0, normal_grid(0.0, 1.0))
        report = optimal_value(params, solve_model(params))
        closed = solve_normal_prior(1.0, params)
        self.assertAlmostEqual(report.variance, closed.xi_star, delta=1e-3)
        self.assertAlmostEqual(report.value, closed.value, delta=1e-3)
        self.assertAlmostEqual(report.gelbrich_residual, 0.0, delta=1e-4)


class TestPosteriorKernel(unittest.TestCase):
    """Pruebas de :class:`PosteriorKernel`."""

    def test_symmetric_center(self):
        _, _, kernel = two_state(SYMMETRIC)
        np.testing.assert_allclose(kernel.posterior(0.0), [0.5, 0.5], atol=1e-12)
        z = np.linspace(-3.0, 3.0, 13)
        np.testing.assert_allclose(kernel.conditional_mean(z), -kernel.conditional_mean(-z),
                                   atol=1e-12)

    def test_posterior_shape(self):
        _, _, kernel = two_state()
        P = kernel.posterior(np.linspace(-2.0, 2.0, 5))
        self.assertEqual(P.shape, (5, 2))
        np.testing.assert_allclose(P.sum(axis=-1), 1.0, atol=1e-14)

    def test_extreme_signals(self):
        _, _, kernel = two_state()
        self.assertAlmostEqual(kernel.conditional_mean(50.0), 2.0, delta=1e-10)
        self.assertAlmostEqual(kernel.conditional_mean(-50.0), -2.0, delta=1e-10)

    def test_costly_information(self):
        _, _, kernel = two_state(lam=1e3)
        np.testing.assert_allclose(kernel.posterior(1.0), ASYMMETRIC.probs, atol=1e-2)

    def test_mean_derivative(self):
        _, _, kernel = two_state()
        z, h = np.linspace(-3.0, 3.0, 25), 1e-5
        fd = (kernel.conditional_mean(z + h) - kernel.conditional_mean(z - h)) / (2 * h)
        np.testing.assert_allclose(kernel.conditional_mean_derivative(z), fd, rtol=1e-6)

    def test_inverse_mean(self):
        _, _, kernel = two_state()
        z = np.linspace(-3.0, 3.0, 31)
        np.testing.assert_allclose(kernel.inverse_mean(kernel.conditional_mean(z)), z, atol=1e-8)
        self.assertIsInstance(kernel.inverse_mean(0.5), float)

    def test_dimension_mismatch(self):
        params, mu, _ = two_state()
        other = ModelParams(2.0, 1.0, 1.0, DiscreteDist([-1.0, 0.0, 1.0], [0.2, 0.3, 0.5]))
        with self.assertRaises(KyleConfigError):
            build_posterior(other, mu)


class TestPosteriorMeanLaw(unittest.TestCase):
    """Pruebas de la ley de :math:`m(\\tilde z)`."""

    def test_against_closed_form(self):
        for prior in (SYMMETRIC, ASYMMETRIC):
            params, mu, kernel = two_state(prior)
            law = posterior_mean_law(kernel)
            idx = np.linspace(200, law.size - 200, 100).astype(int)
            v = law.nodes[idx]
            expected = two_state_density(v, params, *mu.mu)
            np.testing.assert_allclose(law.density[idx], expected, rtol=1e-6)

    def test_mean_is_prior_mean(self):
        """La media posterior es martingala: su ley tiene la media del prior."""
        for prior in (SYMMETRIC, ASYMMETRIC):
            _, _, kernel = two_state(prior)
            self.assertAlmostEqual(posterior_mean_law(kernel).mean(), prior.mean(), delta=1e-8)

    def test_moments_match_report(self):
        params, mu, kernel = two_state()
        law = posterior_mean_law(kernel)
        report = optimal_value(params, mu)
        self.assertAlmostEqual(law.variance(), report.variance, delta=1e-8)
        self.assertAlmostEqual(law.masses.sum(), 1.0, delta=1e-12)

    def test_symmetric(self):
        _, _, kernel = two_state(SYMMETRIC)
        law = posterior_mean_law(kernel)
        self.assertAlmostEqual(law.mean(), 0.0, delta=1e-8)
        np.testing.assert_allclose(law.nodes, -law.nodes[::-1], atol=1e-10)

    def test_closed_form_normalized(self):
        params, mu, _ = two_state()
        total, _ = integrate.quad(two_state_density, -2.0, 2.0, args=(params, *mu.mu),
                                  epsabs=1e-12, limit=200)
        self.assertAlmostEqual(total, 1.0, delta=1e-8)

    def test_closed_form_support(self):
        params, mu, _ = two_state()
        np.testing.assert_array_equal(two_state_density(np.array([-3.0, -2.0, 2.0, 3.0]),
                                                        params, *mu.mu), 0.0)

    def test_degenerate(self):
        _, _, kernel = two_state(DiscreteDist([-2.0, 2.0], [1.0, 0.0]))
        self.assertTrue(kernel.is_degenerate)
        with self.assertRaises(KyleDomainError):
            posterior_mean_law(kernel)


class TestOptimalValue(unittest.TestCase):
    """Pruebas de :func:`optimal_value` y su descomposición."""

    def test_decomposition(self):
        params, mu, _ = two_state()
        report = optimal_value(params, mu)
        self.assertAlmostEqual(report.value, report.value_decomposed, delta=1e-6)
        self.assertAlmostEqual(report.mean, ASYMMETRIC.mean(), delta=1e-10)
        self.assertLess(report.variance, ASYMMETRIC.variance())
        self.assertGreaterEqual(report.gelbrich_residual, -1e-9)
        self.assertGreater(report.mutual_information, 0.0)
        self.assertLess(report.mutual_information, ASYMMETRIC.entropy())

    def test_expensive_information(self):
        params, mu, _ = two_state(lam=1e4)
        value = optimal_value(params, mu).value
        self.assertGreater(value, 0.0)
        self.assertLess(value, 1e-3)

    def test_degenerate_prior(self):
        params, mu, _ = two_state(DiscreteDist([-2.0, 2.0], [0.0, 1.0]))
        report = optimal_value(params, mu)
        self.assertEqual(report.value, 0.0)
        self.assertEqual(report.mean, 2.0)

    def test_signal_invariance(self):
        """El valor no depende de la ley marginal de la señal."""
        params, mu, _ = two_state()
        value = optimal_value(params, mu).value
        for signal in ('normal', 'uniform', 'logistic'):
            self.assertAlmostEqual(value_under_signal(params, mu, signal), value, delta=1e-7)

    def test_unknown_signal(self):
        params, mu, _ = two_state()
        with self.assertRaises(KyleConfigError):
            value_under_signal(params, mu, 'cauchy')

    def test_report_json(self):
        params, mu, _ = two_state()
        report = optimal_value(params, mu)
        data = json.loads(report.json())
        self.assertEqual(data['value'], report.value)
        self.assertIn('leakage_w2sq', data)

    @settings(max_examples=10, deadline=None)
    @given(PriorStrats.two_state(), PriorStrats.lambdas())
    def test_value_bounds(self, prior: DiscreteDist, lam: float):
        """El valor es positivo y no supera la mitad del potencial más el ruido."""
        params, mu, _ = two_state(prior, lam)
        report = optimal_value(params, mu)
        self.assertGreater(report.value, 0.0)
        self.assertLessEqual(report.expected_profit,
                             0.5 * (report.variance + params.sigma_G ** 2) + 1e-12)

    def test_multiplier_shift(self):
        """Sumar una constante a μ no cambia el equilibrio."""
        params, mu, _ = two_state()
        report = optimal_value(params, mu)
        shifted = optimal_value(params, mu.shifted(3.7))
        for name in ('value', 'expected_profit', 'info_cost', 'mutual_information',
                     'variance', 'leakage_w2sq'):
            self.assertAlmostEqual(getattr(shifted, name), getattr(report, name), delta=1e-10)

    def test_information_falls_with_cost(self):
        info = [optimal_value(params, mu).mutual_information
                for params, mu, _ in (two_state(lam=lam) for lam in (0.5, 1.0, 2.0, 4.0, 8.0))]
        self.assertTrue(all(a > b for a, b in zip(info, info[1:])))


class TestDiscreteSignals(unittest.TestCase):
    """Pruebas de señales con :math:`M` estados."""

    params = ModelParams(2.0, 1.0, 1.0, SYMMETRIC)

    def test_single_state_is_worthless(self):
        self.assertAlmostEqual(discrete_signal_value(SYMMETRIC, [1.0], self.params).value, 0.0,
                               delta=1e-10)

    def test_two_states_below_continuous(self):
        continuous = optimal_value(self.params, solve_model(self.params)).value
        value = discrete_signal_value(SYMMETRIC, [0.5, 0.5], self.params).value
        self.assertGreater(value, 0.0)
        self.assertLess(value, continuous)

    def test_split_improves(self):
        q = np.array([0.5, 0.5])
        base = discrete_signal_value(SYMMETRIC, q, self.params).value
        for m in (0, 1):
            split = split_signal_state(q, m)
            self.assertAlmostEqual(split.sum(), 1.0)
            self.assertGreaterEqual(discrete_signal_value(SYMMETRIC, split, self.params).value,
                                    base - 1e-12)

    def test_split_alpha(self):
        with self.assertRaises(KyleDomainError):
            split_signal_state([0.5, 0.5], 0, alpha=1.0)

    def test_dual_objective(self):
        """El objetivo dual se minimiza en los multiplicadores de Sinkhorn."""
        q = [0.3, 0.7]
        result = discrete_signal_value(ASYMMETRIC, q, self.params)
        mu = np.asarray(result.mu.mu)
        self.assertAlmostEqual(dual_objective(ASYMMETRIC, q, mu, self.params), result.value,
                               delta=1e-12)
        self.assertAlmostEqual(dual_objective(ASYMMETRIC, q, mu + 1.0, self.params),
                               result.value, delta=1e-12)
        self.assertGreater(dual_objective(ASYMMETRIC, q, mu + [0.1, -0.1], self.params),
                           result.value)

    def test_invalid_q(self):
        with self.assertRaises(KyleDomainError):
            discrete_signal_value(SYMMETRIC, [0.6, 0.6], self.params)

    def test_optimize_symmetric(self):
        opt = optimize_discrete_signal(SYMMETRIC, 2, self.params, restarts=2)
        np.testing.assert_allclose(opt.q_star, [0.5, 0.5], atol=1e-4)
        self.assertEqual(len(opt.restart_values), 2)
        self.assertGreaterEqual(opt.dispersion, 0.0)

    def test_optimize_invalid_M(self):
        with self.assertRaises(KyleConfigError):
            optimize_discrete_signal(SYMMETRIC, 0, self.params)

    def test_convergence_monotone(self):
        table = value_convergence(SYMMETRIC, (1, 2, 3), self.params, restarts=2)
        self.assertTrue(table.monotone)
        self.assertEqual([r.M for r in table.rows], [1, 2, 3])
        values = [r.value for r in table.rows]
        self.assertTrue(all(a <= b + 1e-12 for a, b in zip(values, values[1:])))
        self.assertLess(values[-1], table.continuous_value)

    def test_convergence_to_continuous(self):
        """:math:`V^M` crece con M y se acerca al valor de la señal continua."""
        table = value_convergence(SYMMETRIC, DEFAULT_MS, self.params)
        self.assertEqual([r.M for r in table.rows], list(DEFAULT_MS))
        self.assertTrue(table.monotone)
        values = [r.value for r in table.rows]
        self.assertTrue(all(a <= b + 1e-12 for a, b in zip(values, values[1:])))
        self.assertLessEqual(values[-1], table.continuous_value + 1e-9)
        self.assertLess(table.continuous_value - values[-1], 1e-3)


class TestSweep(unittest.TestCase):
    """Pruebas de :func:`comparative_statics_sweep`."""

    params = ModelParams(1.0, 1.0, 1.0, SYMMETRIC)

    def test_symmetric_skewness(self):
        table = comparative_statics_sweep(SYMMETRIC, 'lambda', (1.0, 2.0, 4.0), self.params)
        self.assertFalse(table.partial)
        for row in table.rows:
            self.assertAlmostEqual(row.report.skewness, 0.0, delta=1e-8)
        values = [row.report.value for row in table.rows]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_noise_scale(self):
        """La ley de la media posterior sólo depende de :math:`\\lambda/\\sigma_Z`."""
        a = comparative_statics_sweep(ASYMMETRIC, 'lambda', (1.0,), self.params).rows[0].report
        doubled = ModelParams(1.0, 2.0, 1.0, ASYMMETRIC)
        b = comparative_statics_sweep(ASYMMETRIC, 'lambda', (2.0,), doubled).rows[0].report
        self.assertAlmostEqual(a.variance, b.variance, delta=1e-8)
        self.assertAlmostEqual(a.kurtosis, b.kurtosis, delta=1e-6)
        self.assertAlmostEqual(b.value, 2.0 * a.value, delta=1e-8)

    def test_partial_failure(self):
        """Un punto que no converge queda registrado sin detener el barrido."""
        table = comparative_statics_sweep(ASYMMETRIC, 'lambda', (1e-310, 2.0), self.params)
        self.assertTrue(table.partial)
        self.assertEqual(len(table.failed), 1)
        self.assertIsNotNone(table.rows[0].error)
        self.assertIsNotNone(table.rows[1].report)

    def test_invalid_axis(self):
        with self.assertRaises(KyleConfigError):
            comparative_statics_sweep(SYMMETRIC, 'T', (1.0,), self.params)
        with self.assertRaises(KyleConfigError):
            comparative_statics_sweep(SYMMETRIC, 'lambda', (), self.params)
        with self.assertRaises(KyleConfigError):
            comparative_statics_sweep(SYMMETRIC, 'lambda', (-1.0,), self.params)

    def test_kurtosis_normal_limit(self):
        """Con información cara :math:`m(\\tilde z)` es casi lineal en :math:`\\tilde z`."""
        table = comparative_statics_sweep(SYMMETRIC, 'lambda', (8.0, 32.0, 128.0), self.params)
        gaps = [abs(row.report.kurtosis - 3.0) for row in table.rows]
        self.assertTrue(all(a > b for a, b in zip(gaps, gaps[1:])))
        self.assertLess(gaps[-1], 1e-2)

    def test_double_exponential_kurtosis(self):
        """La curtosis pasa de la del prior (6) a la normal (3) al encarecer la información."""
        payoff = double_exponential_grid(1.0, n_nodes=801)
        table = comparative_statics_sweep(payoff, 'lambda', (0.1, 1.0, 20.0), self.params)
        self.assertFalse(table.partial)
        kurt = [row.report.kurtosis for row in table.rows]
        self.assertGreater(kurt[0], 5.0)
        self.assertTrue(all(a > b for a, b in zip(kurt, kurt[1:])))
        self.assertLess(abs(kurt[-1] - 3.0), 0.5)

    def test_asymmetric_skewness_vanishes(self):
        table = comparative_statics_sweep(ASYMMETRIC, 'lambda', (2.0, 16.0, 512.0), self.params)
        skew = [abs(row.report.skewness) for row in table.rows]
        self.assertTrue(all(a > b for a, b in zip(skew, skew[1:])))
        self.assertLess(skew[-1], 2e-2)

    def test_sufficient_statistic(self):
        """Con prior simétrico sólo importa :math:`\\lambda/(\\sigma_Z\\sqrt T)`."""
        base = comparative_statics_sweep(SYMMETRIC, 'lambda', (1.0, 2.0), self.params)
        scaled = comparative_statics_sweep(SYMMETRIC, 'lambda', (2.0, 4.0),
                                           ModelParams(1.0, 1.0, 4.0, SYMMETRIC))
        for a, b in zip(base.rows, scaled.rows):
            ra, rb = a.report, b.report
            for name in ('mean', 'variance', 'skewness', 'kurtosis', 'mutual_information'):
                self.assertAlmostEqual(getattr(ra, name), getattr(rb, name), delta=1e-9)
            for name in ('value', 'expected_profit', 'info_cost'):
                self.assertAlmostEqual(getattr(rb, name) / 2.0, getattr(ra, name), delta=1e-9)

    def test_numeric_failure_recorded(self):
        """Un error numérico de numpy en un punto tampoco detiene el barrido."""
        calls = []

        def flaky(params, mu, rule=None):
            calls.append(params.lam)
            if len(calls) == 1:
                raise np.linalg.LinAlgError("matriz singular")
            return optimal_value(params, mu, rule)

        with mock.patch('kyle.infoacq.optimal_value', side_effect=flaky):
            table = comparative_statics_sweep(ASYMMETRIC, 'lambda', (1.0, 2.0), self.params)
        self.assertEqual(calls, [1.0, 2.0])
        self.assertEqual(len(table.failed), 1)
        self.assertIn('LinAlgError', table.rows[0].error)
        self.assertIsNotNone(table.rows[1].report)


if __name__ == '__main__':
    unittest.main()
