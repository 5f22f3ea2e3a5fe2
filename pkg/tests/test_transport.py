#!/usr/bin/env python3

"""Pruebas de transporte óptimo unidimensional."""

from __future__ import annotations

import math
import unittest

import numpy as np
from hypothesis import given, settings
from scipy import integrate, optimize, stats

from kyle import (DiscreteDist, ModelParams, NormalLaw, QuantileFn, build_posterior,
                  cross_profit_integral, gelbrich_lower_bound, mallows_center_check,
                  partial_quantile_integral, posterior_mean_law, pricing_map, solve_model,
                  two_state_density, w2_squared, KyleDomainError)
from kyle.transport import QuantileKind, unit_rule
from .strategies import LawStrats, PriorStrats
from .utils import riemann_w2

STD = NormalLaw(0.0, 1.0)
TWO_POINT_W2 = 5.0 - 4.0 * math.sqrt(2.0 / math.pi)


def two_state_law(probs=(0.3, 0.7), lam: float = 2.0):
    params = ModelParams(lam, 1.0, 1.0, DiscreteDist([-2.0, 2.0], list(probs)))
    mu = solve_model(params)
    return params, mu, build_posterior(params, mu).posterior_mean_quantile()


class TestQuantileFn(unittest.TestCase):
    """Pruebas de las representaciones de la función cuantil."""

    def test_step_values(self):
        F = QuantileFn.step([2.0, -2.0], [0.5, 0.5])
        self.assertIs(F.kind, QuantileKind.STEP)
        self.assertEqual(F(0.25), -2.0)
        self.assertEqual(F(0.75), 2.0)
        self.assertEqual(F.breakpoints, (0.5,))
        self.assertAlmostEqual(F.mean(), 0.0)

    def test_step_drops_empty_states(self):
        F = QuantileFn.step([-1.0, 0.0, 1.0], [0.5, 0.0, 0.5])
        self.assertEqual(F.breakpoints, (0.5,))

    def test_step_standard_score(self):
        F = QuantileFn.step([-1.0, 1.0], [0.3, 0.7])
        self.assertEqual(F.at_standard_score(-5.0), -1.0)
        self.assertEqual(F.at_standard_score(5.0), 1.0)
        with self.assertRaises(KyleDomainError):
            F.standard_score(0.0)

    def test_normal_moments(self):
        F = QuantileFn.normal(NormalLaw(1.0, 2.0))
        self.assertAlmostEqual(F.mean(), 1.0)
        self.assertAlmostEqual(F.variance(), 4.0, delta=1e-7)

    def test_shifted(self):
        F = QuantileFn.normal(STD).shifted(3.0)
        self.assertAlmostEqual(F(0.5), 3.0)
        self.assertAlmostEqual(F.standard_score(3.0), 0.0)

    def test_unit_rule(self):
        u, w = unit_rule((0.3,))
        self.assertAlmostEqual(w.sum(), 1.0, delta=1e-14)
        self.assertTrue(np.all((u > 0) & (u < 1)))
        self.assertAlmostEqual(float(np.dot(w, u ** 3)), 0.25, delta=1e-12)


class TestW2(unittest.TestCase):
    """Pruebas de :func:`w2_squared`."""

    def test_identical(self):
        G = QuantileFn.normal(STD)
        self.assertAlmostEqual(w2_squared(G, G), 0.0, delta=1e-14)

    @given(LawStrats.normal_laws(), LawStrats.normal_laws(centered=True))
    def test_normal_closed_form(self, F: NormalLaw, G: NormalLaw):
        expected = F.mean ** 2 + (F.std - G.std) ** 2
        value = w2_squared(QuantileFn.normal(F), QuantileFn.normal(G))
        self.assertAlmostEqual(value, expected, delta=1e-8 * max(1.0, expected))

    def test_two_point(self):
        F = QuantileFn.step([-2.0, 2.0], [0.5, 0.5])
        G = QuantileFn.normal(STD)
        value = w2_squared(F, G)
        self.assertAlmostEqual(value, TWO_POINT_W2, delta=5e-8)
        self.assertAlmostEqual(value, riemann_w2(F, G), delta=1e-5)


class TestCrossProfit(unittest.TestCase):
    """Pruebas de :func:`cross_profit_integral`."""

    @given(LawStrats.normal_laws(centered=True))
    def test_variance(self, law: NormalLaw):
        G = QuantileFn.normal(law)
        self.assertAlmostEqual(cross_profit_integral(G, G), law.variance,
                               delta=1e-8 * max(1.0, law.variance))

    def test_constant(self):
        F = QuantileFn.step([1.7], [1.0])
        self.assertAlmostEqual(cross_profit_integral(F, QuantileFn.normal(STD)), 0.0,
                               delta=1e-12)

    def test_discrete_signal(self):
        """Comparar con la suma por estados de la señal."""
        F = QuantileFn.step([-2.0, 2.0], [0.5, 0.5])
        q = (0.5, 0.5)
        I = (partial_quantile_integral(0.0, 0.5, STD) / q[0],
             partial_quantile_integral(0.5, 1.0, STD) / q[1])
        expected = -2.0 * I[0] * q[0] + 2.0 * I[1] * q[1]
        self.assertAlmostEqual(cross_profit_integral(F, QuantileFn.normal(STD)), expected,
                               delta=1e-9)
        self.assertAlmostEqual(expected, 4 / math.sqrt(2 * math.pi), delta=1e-14)


class TestBounds(unittest.TestCase):
    """Pruebas de la cota de Gelbrich y la descomposición de Mallows."""

    def test_gelbrich_matching(self):
        self.assertEqual(gelbrich_lower_bound(0.0, 1.0, STD), 0.0)

    @given(LawStrats.normal_laws(), LawStrats.normal_laws(centered=True))
    def test_gelbrich_normal_equality(self, F: NormalLaw, G: NormalLaw):
        bound = gelbrich_lower_bound(F.mean, F.std, G)
        value = w2_squared(QuantileFn.normal(F), QuantileFn.normal(G))
        self.assertAlmostEqual(bound, value, delta=1e-8 * max(1.0, value))

    def test_gelbrich_two_point(self):
        F = QuantileFn.step([-2.0, 2.0], [0.5, 0.5])
        bound = gelbrich_lower_bound(0.0, 2.0, STD)
        self.assertEqual(bound, 1.0)
        self.assertLessEqual(bound, w2_squared(F, QuantileFn.normal(STD)))

    @settings(max_examples=50)
    @given(PriorStrats.discrete(max_atoms=5), LawStrats.normal_laws(centered=True))
    def test_gelbrich_corpus(self, prior: DiscreteDist, G: NormalLaw):
        F = QuantileFn.from_discrete(prior)
        bound = gelbrich_lower_bound(prior.mean(), math.sqrt(prior.variance()), G)
        self.assertLessEqual(bound, w2_squared(F, QuantileFn.normal(G)) + 1e-9)

    def test_mallows_centered(self):
        F = QuantileFn.step([-1.0, 1.0], [0.5, 0.5])
        lhs, rhs = mallows_center_check(F, 0.0, STD)
        self.assertAlmostEqual(lhs, rhs, delta=1e-12)

    def test_mallows_shifted_normal(self):
        G = NormalLaw(0.0, 1.5)
        lhs, rhs = mallows_center_check(QuantileFn.normal(NormalLaw(1.0, 1.5)), 1.0, G)
        self.assertAlmostEqual(lhs, 1.0, delta=1e-10)
        self.assertAlmostEqual(rhs, 1.0, delta=1e-10)

    def test_mallows_posterior_mean_law(self):
        params, _, F = two_state_law()
        lhs, rhs = mallows_center_check(F, F.mean(), params.noise_law)
        self.assertLess(abs(lhs - rhs), 1e-8)

    def test_mallows_requires_centered(self):
        with self.assertRaises(KyleDomainError):
            mallows_center_check(QuantileFn.normal(STD), 0.0, NormalLaw(1.0, 1.0))


class TestPricingMap(unittest.TestCase):
    """Pruebas de :func:`pricing_map`."""

    def test_identity(self):
        G = NormalLaw(0.0, 2.0)
        y = np.linspace(-12.0, 12.0, 241)
        np.testing.assert_allclose(pricing_map(QuantileFn.normal(G), G)(y), y, atol=1e-10)

    def test_affine(self):
        F, G = NormalLaw(0.5, 3.0), NormalLaw(0.0, 2.0)
        y = np.linspace(-6.0, 6.0, 61)
        np.testing.assert_allclose(pricing_map(QuantileFn.normal(F), G)(y),
                                   0.5 + 1.5 * y, atol=1e-12)

    def test_logit_median(self):
        """En y = 0 el mapa da la mediana de la ley de la media posterior."""
        params, mu, F = two_state_law()
        mu1, mu2 = mu.mu

        def cdf(x):
            return integrate.quad(two_state_density, -2.0, x, args=(params, mu1, mu2),
                                  epsabs=1e-13, limit=200)[0]

        median = optimize.brentq(lambda x: cdf(x) - 0.5, -2.0 + 1e-12, 2.0 - 1e-12, xtol=1e-13)
        self.assertAlmostEqual(pricing_map(F, params.noise_law)(0.0), median, delta=1e-7)

    def test_monotone(self):
        params, _, F = two_state_law()
        y = np.linspace(-5.0, 5.0, 201)
        self.assertTrue(np.all(np.diff(pricing_map(F, params.noise_law)(y)) > 0))

    def test_pushes_noise_onto_law(self):
        """Las imágenes de :math:`y \\sim G` siguen la ley de la media posterior."""
        params, mu, F = two_state_law()
        law = posterior_mean_law(build_posterior(params, mu))
        G = params.noise_law
        y = np.random.default_rng(11).normal(G.mean, G.std, 100_000)
        prices = pricing_map(F, G)(y)
        result = stats.kstest(prices, lambda v: np.interp(v, law.nodes, law.cdf, 0.0, 1.0))
        self.assertLess(result.statistic, 0.01)


if __name__ == '__main__':
    unittest.main()
