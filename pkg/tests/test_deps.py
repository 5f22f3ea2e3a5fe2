#!/usr/bin/env python3

import unittest

import numpy as np
from scipy.special import logsumexp, ndtr, ndtri, roots_hermitenorm


class TestScipy(unittest.TestCase):
    """Probar las funciones especiales de scipy en las que se apoya el paquete."""

    def test_ndtri_inverts_ndtr(self):
        """Probar que ``ndtri`` invierte a ``ndtr`` en las colas."""
        for u in (1e-12, 1e-3, 0.5, 0.999):
            self.assertAlmostEqual(ndtr(ndtri(u)) / u, 1.0, delta=1e-12)

    def test_logsumexp_overflow(self):
        """Probar que ``logsumexp`` no se desborda con exponentes grandes."""
        self.assertAlmostEqual(logsumexp([1000.0, 1000.0]), 1000.0 + np.log(2.0))

    def test_hermite_weights(self):
        """Probar que los pesos de Gauss–Hermite integran la densidad normal."""
        x, w = roots_hermitenorm(64)
        self.assertAlmostEqual(w.sum() / np.sqrt(2 * np.pi), 1.0, delta=1e-13)
        self.assertAlmostEqual(np.dot(w, x ** 2) / np.sqrt(2 * np.pi), 1.0, delta=1e-12)


class TestNumpy(unittest.TestCase):
    """Probar los generadores aleatorios de numpy."""

    def test_philox_streams(self):
        """Probar que cada trayectoria tiene un flujo reproducible e independiente."""
        def draw(index):
            seq = np.random.SeedSequence(42, spawn_key=(index,))
            return np.random.Generator(np.random.Philox(seq)).standard_normal(4)

        np.testing.assert_array_equal(draw(3), draw(3))
        self.assertFalse(np.array_equal(draw(3), draw(4)))


if __name__ == '__main__':
    unittest.main()
