#!/usr/bin/env python3

"""Oráculos independientes para las pruebas."""

from __future__ import annotations

import math
import numpy as np
from kyle import NormalLaw


def series_normal_cdf(x: float, terms: int = 50) -> float:
    """:math:`\\Phi(x) = 1/2 + \\phi(x) \\sum_k x^{2k+1}/(2k+1)!!`."""
    term = x
    total = x
    for k in range(1, terms):
        term *= x * x / (2 * k + 1)
        total += term
    return 0.5 + math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * total


def midpoint_unit(n: int = 10 ** 6) -> np.ndarray:
    """Puntos medios de una malla uniforme en (0, 1)."""
    return (np.arange(n) + 0.5) / n


def riemann_w2(F, G, n: int = 10 ** 6) -> float:
    """:math:`\\int (F^{-1} - G^{-1})^2` por sumas de Riemann de punto medio."""
    u = midpoint_unit(n)
    d = np.asarray(F(u)) - np.asarray(G(u))
    return float(np.mean(d * d))


def riemann_quantile_integral(a: float, b: float, law: NormalLaw, n: int = 10 ** 6) -> float:
    from scipy.special import ndtri
    u = a + (b - a) * midpoint_unit(n)
    return float((b - a) * np.mean(law.mean + law.std * ndtri(u)))


def ipf_multipliers(atoms, probs, I, q, lam: float, iterations: int = 20000) -> np.ndarray:
    """Ajuste proporcional iterativo del plan conjunto :math:`\\pi_{nm}`.

    Regresa :math:`\\lambda\\log r_n` centrado bajo el prior, donde ``r`` es el
    escalamiento por renglón.
    """
    atoms, probs = np.asarray(atoms, float), np.asarray(probs, float)
    I, q = np.asarray(I, float), np.asarray(q, float)
    K = np.exp(np.outer(atoms, I) / lam)
    r = np.ones(atoms.size)
    c = np.ones(I.size)
    for _ in range(iterations):
        c = q / (K.T @ r)
        r = probs / (K @ c)
    mu = lam * np.log(r)
    return mu - np.dot(probs, mu)


def monte_carlo_marginal(atoms, mu, lam: float, std: float, n: int = 10 ** 5,
                         seed: int = 12345) -> tuple:
    """Estimación Monte Carlo de :math:`E_z[p(v_n|\\tilde z)]` y su error estándar."""
    rng = np.random.default_rng(seed)
    z = std * rng.standard_normal(n)
    E = (np.outer(z, atoms) + np.asarray(mu)) / lam
    E -= E.max(axis=1, keepdims=True)
    P = np.exp(E)
    P /= P.sum(axis=1, keepdims=True)
    return P.mean(axis=0), P.std(axis=0, ddof=1) / math.sqrt(n)


def normal_objective(xi: np.ndarray, sigma_v: float, sigma_G: float, lam: float) -> np.ndarray:
    """Valor de la señal normal con precisión relativa :math:`\\xi`."""
    return sigma_v * sigma_G * np.sqrt(xi) + 0.5 * lam * np.log1p(-xi)
