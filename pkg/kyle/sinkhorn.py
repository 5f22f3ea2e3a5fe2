"""
Multiplicadores de Lagrange de la restricción de plausibilidad bayesiana.

El posterior óptimo tiene la forma logit
:math:`p(v|z) \\propto e^{(v z + \\mu(v))/\\lambda}` y los multiplicadores
:math:`\\mu` se obtienen con el algoritmo de Sinkhorn: se alternan las
normalizaciones en la señal y en el pago hasta que el posterior promedia de
vuelta al prior. Toda la aritmética del núcleo se hace en el dominio
logarítmico.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from .dist import (PRUNE_MASS, DiscreteDist, GridDist, NormalLaw, QuadratureRule,
                   gauss_hermite_rule)
from .exceptions import KyleConfigError, KyleConvergenceError, KyleDomainError

__all__ = ["MultiplierSolution", "KernelSpec", "DiscreteSignal", "MonotonicityCheck",
           "Normalization", "solve_discrete_continuous", "solve_discrete_discrete",
           "solve_continuous_continuous", "multiplier_monotonicity_check",
           "bayes_residual"]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000

# Iteraciones consecutivas sin mejora antes de amortiguar
_PATIENCE = 20
_DAMPING = 0.5


def _check_lambda(lam: float):
    if not (np.isfinite(lam) and lam > 0):
        raise KyleConfigError("model.lambda: debe ser positiva y finita")


class Normalization(str, Enum):
    MEAN_ZERO = 'mean-zero'
    NONE = 'none'


@dataclass(frozen=True, eq=False)
class MultiplierSolution:
    """Multiplicadores :math:`\\mu` por átomo (o por nodo de la malla de pagos).

    Los átomos descartados por tener masa despreciable llevan :math:`-\\infty`.
    """
    mu: np.ndarray
    residual: float
    iterations: int
    normalization: Normalization = Normalization.MEAN_ZERO
    pruned: tuple = ()
    trace: tuple = field(default=(), repr=False)
    damped: bool = False

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        mu.setflags(write=False)
        object.__setattr__(self, 'mu', mu)

    def shifted(self, c: float) -> 'MultiplierSolution':
        """Mismos multiplicadores desplazados por una constante."""
        return MultiplierSolution(mu=self.mu + c, residual=self.residual,
                                  iterations=self.iterations,
                                  normalization=Normalization.NONE,
                                  pruned=self.pruned, trace=self.trace, damped=self.damped)


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """Señal con :math:`M` estados: valores :math:`I_m` y probabilidades :math:`q_m`."""
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        probs = np.array(self.probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
            raise KyleConfigError("signal: valores y probabilidades incompatibles")
        if not np.all(np.isfinite(values)):
            raise KyleConfigError("signal.values: deben ser finitos")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise KyleConfigError("signal.probs: debe ser un vector de probabilidad")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'probs', probs)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Especificación del núcleo :math:`k(v, z) = e^{v z/\\lambda}`."""
    payoff: Union[DiscreteDist, GridDist]
    signal_law: Union[NormalLaw, DiscreteSignal]
    lam: float

    def __post_init__(self):
        _check_lambda(self.lam)


@dataclass(frozen=True)
class MonotonicityCheck:
    """Resultado de :func:`multiplier_monotonicity_check`.

    ``before`` y ``after`` son pares :math:`(p_n, \\mu_n - \\mu_j)`.
    """
    atom: int
    reference: int
    before: tuple
    after: tuple

    @property
    def increased(self) -> bool:
        return self.after[1] > self.before[1]


def _sinkhorn(log_kernel: np.ndarray, p: np.ndarray, log_w: np.ndarray, tol: float,
              max_iter: int, a0: np.ndarray, scale: Optional[np.ndarray] = None) -> tuple:
    """Iteración de Sinkhorn en el dominio logarítmico.

    ``a`` es :math:`\\log \\xi_n`. En cada vuelta se calcula
    :math:`S_n = \\log\\int k_n \\zeta`, que sirve tanto para el residuo
    bayesiano del ``a`` vigente como para la siguiente actualización.
    """
    log_p = np.log(p)
    a = np.array(a0, dtype=float)
    trace = []
    best = np.inf
    stalled = 0
    damped = False

    for it in range(max_iter + 1):
        log_zeta = log_w - logsumexp(a[:, None] + log_kernel, axis=0)
        S = logsumexp(log_kernel + log_zeta[None, :], axis=1)
        gap = np.abs(np.exp(a + S) - p)
        if scale is not None:
            gap = gap / scale
        residual = float(gap.max())
        trace.append(residual)

        if not np.isfinite(residual):
            raise KyleConvergenceError("Sinkhorn produjo un residuo no finito",
                                       residual=residual, iterations=it)
        if residual < tol:
            return a, residual, it, tuple(trace), damped
        if it == max_iter:
            break

        if residual < best:
            best, stalled = residual, 0
        else:
            stalled += 1
        if stalled >= _PATIENCE and not damped:
            logger.info("Sinkhorn oscila (residuo %.3e); se activa amortiguamiento %.1f",
                        residual, _DAMPING)
            damped = True

        a_new = log_p - S
        a = _DAMPING * a + (1 - _DAMPING) * a_new if damped else a_new
        if it % 1000 == 0:
            logger.debug("Sinkhorn iteración %d, residuo %.3e", it, residual)

    raise KyleConvergenceError(
        f"Sinkhorn no convergió en {max_iter} iteraciones (residuo {trace[-1]:.3e})",
        residual=trace[-1], iterations=max_iter)


def _initial(init, lam: float, p: np.ndarray, keep: np.ndarray,
             offset: Optional[np.ndarray] = None) -> np.ndarray:
    if isinstance(init, str):
        if init == 'ones':
            return np.zeros(p.size)
        if init == 'prior':
            return np.log(p)
        raise KyleConfigError(f"solver.init: inicialización desconocida '{init}'")
    a = np.asarray(init, dtype=float)[keep] / lam
    if offset is not None:
        a = a + offset
    if not np.all(np.isfinite(a)):
        return np.zeros(p.size)
    return a


def _prune(probs: np.ndarray) -> tuple:
    keep = probs >= PRUNE_MASS
    pruned = tuple(int(i) for i in np.flatnonzero(~keep))
    if pruned:
        logger.info("Se descartan %d átomos con masa menor a %.0e", len(pruned), PRUNE_MASS)
    return keep, pruned


def _gauge(mu: np.ndarray, p: np.ndarray) -> np.ndarray:
    return mu - np.dot(p, mu)


def _expand(values: np.ndarray, keep: np.ndarray) -> np.ndarray:
    out = np.full(keep.size, -np.inf)
    out[keep] = values
    return out


def _solve_discrete(atoms: np.ndarray, probs: np.ndarray, z: np.ndarray, w: np.ndarray,
                    lam: float, tol: float, max_iter: int, init) -> MultiplierSolution:
    keep, pruned = _prune(probs)
    v, p = atoms[keep], probs[keep] / probs[keep].sum()
    if v.size == 1:
        return MultiplierSolution(mu=_expand(np.zeros(1), keep), residual=0.0,
                                  iterations=0, pruned=pruned)

    log_kernel = np.outer(v, z) / lam
    a0 = _initial(init, lam, p, keep)
    a, residual, iterations, trace, damped = _sinkhorn(log_kernel, p, np.log(w), tol,
                                                       max_iter, a0)
    mu = _gauge(lam * a, p)
    logger.debug("Sinkhorn convergió en %d iteraciones (residuo %.3e)", iterations, residual)
    return MultiplierSolution(mu=_expand(mu, keep), residual=residual, iterations=iterations,
                              pruned=pruned, trace=trace, damped=damped)


def solve_discrete_continuous(spec: KernelSpec, rule: Optional[QuadratureRule] = None,
                              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                              init='ones') -> MultiplierSolution:
    """Pago discreto y señal normal :math:`\\tilde z \\sim N(0, \\sigma_Z^2 T)`.

    :param spec: Núcleo con prior discreto y ley normal de la señal.
    :param rule: Cuadratura en :math:`z`; por defecto Gauss–Hermite de 256 nodos.
    :param init: ``'ones'`` (:math:`\\xi^0 = 1`), ``'prior'`` o un vector de
        multiplicadores para arranque en caliente.
    :raises KyleConvergenceError: Si no se alcanza ``tol`` en ``max_iter`` vueltas.
    """
    if not isinstance(spec.payoff, DiscreteDist) or not isinstance(spec.signal_law, NormalLaw):
        raise KyleConfigError("solve_discrete_continuous: se requiere pago discreto y señal normal")
    rule = rule or gauss_hermite_rule()
    law = spec.signal_law
    z = law.mean + law.std * rule.nodes
    return _solve_discrete(spec.payoff.atoms, spec.payoff.probs, z, rule.weights,
                           spec.lam, tol, max_iter, init)


def solve_discrete_discrete(payoff: DiscreteDist, I_values, q, lam: float,
                            tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                            init='ones') -> MultiplierSolution:
    """Pago discreto y señal con :math:`M` estados de valores :math:`I_m`.

    Los estados con :math:`q_m = 0` se descartan y las probabilidades se
    renormalizan.
    """
    _check_lambda(lam)
    signal = DiscreteSignal(I_values, q)
    live = signal.probs > PRUNE_MASS
    w = signal.probs[live] / signal.probs[live].sum()
    return _solve_discrete(payoff.atoms, payoff.probs, signal.values[live], w,
                           lam, tol, max_iter, init)


def solve_continuous_continuous(payoff: GridDist, signal_law: NormalLaw, lam: float,
                                rule: Optional[QuadratureRule] = None, tol: float = DEFAULT_TOL,
                                max_iter: int = DEFAULT_MAX_ITER,
                                init='ones') -> MultiplierSolution:
    """Pago continuo en malla y señal normal.

    La malla de pagos se trata como átomos con masas trapezoidales
    :math:`\\omega_i p(v_i)`; el residuo se mide en unidades de densidad.
    """
    _check_lambda(lam)
    rule = rule or gauss_hermite_rule()
    omega = payoff.quadrature_weights
    masses = payoff.masses
    keep, pruned = _prune(masses)
    v, p = payoff.nodes[keep], masses[keep]
    p = p / p.sum()
    log_omega = np.log(omega[keep])

    z = signal_law.mean + signal_law.std * rule.nodes
    log_kernel = np.outer(v, z) / lam
    a0 = _initial(init, lam, p, keep, offset=log_omega)
    a, residual, iterations, trace, damped = _sinkhorn(log_kernel, p, np.log(rule.weights),
                                                       tol, max_iter, a0, scale=omega[keep])
    mu = _gauge(lam * (a - log_omega), p)
    logger.debug("Sinkhorn continuo convergió en %d iteraciones (residuo %.3e)",
                 iterations, residual)
    return MultiplierSolution(mu=_expand(mu, keep), residual=residual, iterations=iterations,
                              pruned=pruned, trace=trace, damped=damped)


def solve_spec(spec: KernelSpec, rule: Optional[QuadratureRule] = None,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               init='ones') -> MultiplierSolution:
    """Despacha al resolvedor adecuado según el tipo de pago y de señal."""
    if isinstance(spec.signal_law, DiscreteSignal):
        return solve_discrete_discrete(spec.payoff, spec.signal_law.values,
                                       spec.signal_law.probs, spec.lam, tol, max_iter, init)
    if isinstance(spec.payoff, GridDist):
        return solve_continuous_continuous(spec.payoff, spec.signal_law, spec.lam, rule,
                                           tol, max_iter, init)
    return solve_discrete_continuous(spec, rule, tol, max_iter, init)


def bayes_residual(payoff: Union[DiscreteDist, GridDist], mu, signal_law: NormalLaw,
                   lam: float, rule: QuadratureRule) -> float:
    """Violación máxima de :math:`E_z[p(v|\\tilde z)] = p(v)` con la regla dada.

    Para pagos continuos el residuo está en unidades de densidad.
    """
    mu = np.asarray(getattr(mu, 'mu', mu), dtype=float)
    if isinstance(payoff, GridDist):
        omega, masses = payoff.quadrature_weights, payoff.masses
        log_base = mu / lam + np.log(omega)
    else:
        omega, masses = np.ones(payoff.size), payoff.probs
        log_base = mu / lam
    z = signal_law.mean + signal_law.std * rule.nodes
    E = np.outer(payoff.atoms if isinstance(payoff, DiscreteDist) else payoff.nodes, z) / lam
    E = E + log_base[:, None]
    log_post = E - logsumexp(E, axis=0)[None, :]
    marg = np.exp(logsumexp(log_post + np.log(rule.weights)[None, :], axis=1))
    return float(np.max(np.abs(marg - masses) / omega))


def multiplier_monotonicity_check(spec: KernelSpec, delta: float, n: int = -1, j: int = 0,
                                  rule: Optional[QuadratureRule] = None,
                                  tol: float = DEFAULT_TOL,
                                  max_iter: int = DEFAULT_MAX_ITER) -> MonotonicityCheck:
    """Traslada masa ``delta`` del átomo ``j`` al átomo ``n`` y compara
    :math:`\\mu_n - \\mu_j` antes y después.

    :raises KyleDomainError: Si alguna probabilidad sale de (0, 1).
    """
    payoff = spec.payoff
    if not isinstance(payoff, DiscreteDist):
        raise KyleConfigError("multiplier_monotonicity_check: se requiere un pago discreto")
    n, j = n % payoff.size, j % payoff.size
    if n == j:
        raise KyleDomainError("multiplier_monotonicity_check: n y j deben ser distintos")

    probs = payoff.probs.copy()
    probs[n] += delta
    probs[j] -= delta
    if not (0 < probs[n] < 1 and 0 < probs[j] < 1):
        raise KyleDomainError("multiplier_monotonicity_check: delta saca una probabilidad de (0, 1)")
    probs = probs / probs.sum()

    shifted = KernelSpec(DiscreteDist(payoff.atoms, probs), spec.signal_law, spec.lam)
    before = solve_spec(spec, rule, tol, max_iter)
    after = solve_spec(shifted, rule, tol, max_iter)
    return MonotonicityCheck(
        atom=n, reference=j,
        before=(float(payoff.probs[n]), float(before.mu[n] - before.mu[j])),
        after=(float(probs[n]), float(after.mu[n] - after.mu[j])))
