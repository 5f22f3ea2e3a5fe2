"""
Adquisición flexible de información del inversionista informado.

Contiene la solución cerrada para un prior normal, el núcleo posterior logit
con su media condicional, la ley de la media posterior, el valor del
inversionista con su descomposición en potencial de ganancia, costo de
filtración (Wasserstein-2) y costo de información, y el optimizador de
señales discretas de :math:`M` estados.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize, special, stats
from scipy.special import logsumexp

from .dist import (DiscreteDist, GridDist, NormalLaw, QuadratureRule, gauss_hermite_rule,
                   normal_grid, normal_pdf, quantile_antiderivative, trapezoid_rule)
from .exceptions import KyleConfigError, KyleConvergenceError, KyleDomainError, KyleNumericError
from .sinkhorn import (DEFAULT_MAX_ITER, DEFAULT_TOL, KernelSpec, MultiplierSolution,
                       bayes_residual, solve_continuous_continuous, solve_discrete_continuous,
                       solve_discrete_discrete)
from .transport import QuantileFn, cross_profit_integral, w2_squared

__all__ = ["ModelParams", "PosteriorKernel", "EquilibriumReport", "NormalPriorSolution",
           "DiscreteSignalValue", "OptimizedSignal", "SweepRow", "SweepTable",
           "ConvergenceRow", "ConvergenceTable", "solve_normal_prior", "gaussian_multipliers",
           "solve_model", "build_posterior", "posterior_mean_law", "two_state_density",
           "optimal_value", "value_under_signal", "mutual_information",
           "discrete_signal_value", "discrete_signal_report", "dual_objective",
           "split_signal_state", "optimize_discrete_signal", "value_convergence",
           "comparative_statics_sweep"]

logger = logging.getLogger(__name__)

Prior = Union[DiscreteDist, GridDist, NormalLaw]

# Límite de elementos por bloque al evaluar el núcleo
_CHUNK = 1 << 21
_BISECTION_WIDTH = 1e-13
_DEGENERATE_MASS = 1.0 - 1e-14

SIGNALS = {
    'normal': stats.norm(),
    'uniform': stats.uniform(),
    'logistic': stats.logistic(),
}

DEFAULT_MS = (1, 2, 3, 4, 6, 8, 16, 32, 64)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Primitivas económicas del modelo.

    :param lam: Costo marginal de la información :math:`\\lambda`.
    :param sigma_Z: Volatilidad del flujo de ruido.
    :param T: Horizonte de negociación.
    :param prior: Ley del pago :math:`\\tilde v`.
    """
    lam: float
    sigma_Z: float
    T: float
    prior: Prior

    def __post_init__(self):
        for name, value in (('model.lambda', self.lam), ('model.sigma_Z', self.sigma_Z),
                            ('model.T', self.T)):
            if not (np.isfinite(value) and value > 0):
                raise KyleConfigError(f"{name}: debe ser positivo y finito")
        if not isinstance(self.prior, (DiscreteDist, GridDist, NormalLaw)):
            raise KyleConfigError("prior: tipo de ley no soportado")
        object.__setattr__(self, 'lam', float(self.lam))
        object.__setattr__(self, 'sigma_Z', float(self.sigma_Z))
        object.__setattr__(self, 'T', float(self.T))

    @property
    def sigma_G(self) -> float:
        """Desviación estándar :math:`\\sigma_Z\\sqrt{T}` de :math:`G`."""
        return self.sigma_Z * np.sqrt(self.T)

    @property
    def noise_law(self) -> NormalLaw:
        return NormalLaw(0.0, self.sigma_G)

    def with_axis(self, axis: str, value: float) -> 'ModelParams':
        if axis == 'lambda':
            return replace(self, lam=value)
        if axis == 'sigma_Z':
            return replace(self, sigma_Z=value)
        raise KyleConfigError(f"sweep.axis: eje desconocido '{axis}'")


class NormalPriorSolution(NamedTuple):
    xi_star: float
    precision: float
    value: float
    foc_residual: float


def solve_normal_prior(sigma_v: float, params: ModelParams) -> NormalPriorSolution:
    """Señal óptima para un pago normal con desviación ``sigma_v``.

    Resuelve :math:`\\xi^{-1/2} = \\frac{\\lambda}{\\sigma_v\\sigma_Z\\sqrt T}\\frac{1}{1-\\xi}`
    por bisección acotada (Brent) en (0, 1).
    """
    if not (np.isfinite(sigma_v) and sigma_v > 0):
        raise KyleConfigError("prior.std: debe ser positiva")
    ratio = params.lam / (sigma_v * params.sigma_G)
    xi = optimize.brentq(lambda x: 1.0 - x - ratio * np.sqrt(x), 0.0, 1.0,
                         xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    precision = xi / ((1.0 - xi) * sigma_v ** 2)
    value = sigma_v * params.sigma_G * np.sqrt(xi) + 0.5 * params.lam * np.log1p(-xi)
    foc = xi ** -0.5 - ratio / (1.0 - xi)
    return NormalPriorSolution(float(xi), float(precision), float(value), float(foc))


def gaussian_multipliers(grid: GridDist, sigma_v: float, params: ModelParams,
                         mean_v: float = 0.0,
                         rule: Optional[QuadratureRule] = None) -> MultiplierSolution:
    """Multiplicadores cerrados para un prior normal discretizado en ``grid``.

    El posterior señal más ruido es logit con
    :math:`\\mu(v) = -\\lambda (v - E\\tilde v)^2 / (2\\sigma_v^2(1-\\xi^*))`.
    """
    xi = solve_normal_prior(sigma_v, params).xi_star
    mu = -params.lam * (grid.nodes - mean_v) ** 2 / (2.0 * sigma_v ** 2 * (1.0 - xi))
    mu = mu - np.dot(grid.masses, mu)
    residual = bayes_residual(grid, mu, params.noise_law, params.lam,
                              rule or gauss_hermite_rule())
    return MultiplierSolution(mu=mu, residual=residual, iterations=0)


def _payoff_of(params: ModelParams) -> Union[DiscreteDist, GridDist]:
    prior = params.prior
    if isinstance(prior, NormalLaw):
        return normal_grid(prior.mean, prior.std)
    return prior


def solve_model(params: ModelParams, rule: Optional[QuadratureRule] = None,
                tol: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
                init='ones') -> MultiplierSolution:
    """Resuelve los multiplicadores para la señal continua óptima.

    Los priors normales deben discretizarse antes con :func:`normal_grid`.
    """
    prior = params.prior
    if isinstance(prior, DiscreteDist):
        return solve_discrete_continuous(KernelSpec(prior, params.noise_law, params.lam),
                                         rule, tol or DEFAULT_TOL, max_iter, init)
    if isinstance(prior, GridDist):
        return solve_continuous_continuous(prior, params.noise_law, params.lam, rule,
                                           tol or DEFAULT_TOL, max_iter, init)
    raise KyleConfigError("prior: discretice el prior normal con normal_grid")


class PosteriorKernel():
    """
    Ley condicional logit
    :math:`p(v|z) = e^{(vz + \\mu(v))/\\lambda} / \\sum_{v'} e^{(v'z + \\mu(v'))/\\lambda}`
    y media condicional :math:`m(z) = E[\\tilde v | z]`.

    Para pagos en malla, las probabilidades son masas trapezoidales por nodo.
    """

    def __init__(self, params: ModelParams, mu: MultiplierSolution):
        prior = params.prior
        if isinstance(prior, DiscreteDist):
            atoms, log_weight, masses = prior.atoms, np.zeros(prior.size), prior.probs
        elif isinstance(prior, GridDist):
            omega = prior.quadrature_weights
            atoms, log_weight, masses = prior.nodes, np.log(omega), prior.masses
        else:
            raise KyleConfigError("prior: el núcleo requiere un prior discreto o en malla")

        values = np.asarray(mu.mu, dtype=float)
        if values.shape != atoms.shape:
            raise KyleConfigError("mu: la dimensión de los multiplicadores no coincide con el prior")

        self._params = params
        self._mu = mu
        self._atoms = atoms
        self._log_weight = log_weight
        self._masses = masses
        self._live = np.isfinite(values) & (masses > 0)
        self._log_base = np.where(self._live, values / params.lam + log_weight, -np.inf)

    @property
    def params(self) -> ModelParams:
        return self._params

    @property
    def mu(self) -> MultiplierSolution:
        return self._mu

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms

    @property
    def prior_masses(self) -> np.ndarray:
        return self._masses

    @property
    def log_weight(self) -> np.ndarray:
        return self._log_weight

    @property
    def is_degenerate(self) -> bool:
        """Sólo un átomo tiene masa, no hay información que adquirir."""
        return int(self._live.sum()) <= 1 or float(self._masses.max()) > _DEGENERATE_MASS

    def _exponent(self, z: np.ndarray) -> np.ndarray:
        return z[..., None] * self._atoms / self._params.lam + self._log_base

    def log_posterior(self, z) -> np.ndarray:
        """Logaritmo de :math:`p(\\cdot|z)`; la última dimensión recorre los átomos."""
        E = self._exponent(np.asarray(z, dtype=float))
        return E - logsumexp(E, axis=-1, keepdims=True)

    def posterior(self, z) -> np.ndarray:
        return np.exp(self.log_posterior(z))

    def _reduce(self, z, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Aplica ``fn`` al posterior por bloques para acotar la memoria."""
        z = np.asarray(z, dtype=float)
        flat = z.ravel()
        step = max(1, _CHUNK // self._atoms.size)
        out = np.concatenate([fn(self.posterior(flat[i:i + step]))
                              for i in range(0, flat.size, step)]) if flat.size else flat
        return out.reshape(z.shape)

    def conditional_mean(self, z):
        """:math:`m(z) = \\sum_n v_n p(v_n|z)`."""
        out = self._reduce(z, lambda P: P @ self._atoms)
        return float(out) if np.ndim(z) == 0 else out

    def conditional_variance(self, z):
        atoms = self._atoms

        def _var(P):
            m = P @ atoms
            return np.maximum(P @ (atoms * atoms) - m * m, 0.0)

        out = self._reduce(z, _var)
        return float(out) if np.ndim(z) == 0 else out

    def conditional_mean_derivative(self, z):
        """:math:`m'(z) = \\mathrm{Var}(\\tilde v|z)/\\lambda`."""
        out = np.asarray(self.conditional_variance(z)) / self._params.lam
        return float(out) if np.ndim(z) == 0 else out

    def posterior_entropy(self, z) -> np.ndarray:
        """Entropía de :math:`p(\\cdot|z)` (diferencial para pagos en malla)."""
        lw = self._log_weight
        return self._reduce(z, lambda P: -special.xlogy(P, P).sum(axis=-1) + P @ lw)

    def inverse_mean(self, v, bracket: Optional[float] = None):
        """Inversa de :math:`m` por bisección vectorizada en :math:`z`.

        Los valores fuera del rango numérico de :math:`m` se asignan al
        extremo del intervalo de búsqueda.
        """
        arr = np.asarray(v, dtype=float)
        target = arr.ravel()
        B = bracket or 40.0 * max(self._params.sigma_G, 1.0)
        lo = np.full(target.shape, -B)
        hi = np.full(target.shape, B)
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.conditional_mean(mid)) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if target.size == 0 or np.max(hi - lo) <= _BISECTION_WIDTH:
                break
            if np.all((mid == lo) | (mid == hi)):
                break
        out = (0.5 * (lo + hi)).reshape(arr.shape)
        return float(out) if np.ndim(v) == 0 else out

    def mean_density(self, v):
        """Densidad de :math:`m(\\tilde z)` en ``v`` por cambio de variable."""
        z = np.asarray(self.inverse_mean(v))
        dens = self._params.noise_law.pdf(z) / np.asarray(self.conditional_mean_derivative(z))
        return float(dens) if np.ndim(v) == 0 else dens

    def posterior_mean_quantile(self) -> QuantileFn:
        """Función cuantil exacta :math:`m \\circ G^{-1}` de la ley de la media posterior."""
        return QuantileFn.composed(self.conditional_mean, self.inverse_mean,
                                   self._params.noise_law)

    def __repr__(self) -> str:
        return f"<PosteriorKernel [N={self._atoms.size}, lambda={self._params.lam:g}]>"


def build_posterior(params: ModelParams, mu: MultiplierSolution) -> PosteriorKernel:
    """Construye el núcleo posterior logit a partir de los multiplicadores."""
    return PosteriorKernel(params, mu)


def posterior_mean_law(kernel: PosteriorKernel, rule: Optional[QuadratureRule] = None) -> GridDist:
    """Ley de :math:`m(\\tilde z)` como :class:`GridDist`.

    La malla es la imagen por :math:`m` de los nodos de ``rule`` (por defecto
    una malla uniforme fina en :math:`[-8.5\\sigma, 8.5\\sigma]`), y la densidad
    es :math:`\\phi_z(z)/m'(z)`. Las masas por nodo son los pesos de ``rule``
    en :math:`z`, de modo que los momentos heredan la precisión de la
    cuadratura gaussiana y no la de los trapecios sobre la malla irregular en
    :math:`v`. Los nodos donde :math:`m'` se anula numéricamente se cuentan
    como truncamiento del soporte y su masa pasa al nodo vecino.
    """
    if kernel.is_degenerate:
        raise KyleDomainError("posterior_mean_law: la ley de la media posterior es degenerada")
    rule = rule or trapezoid_rule(20001, 8.5)
    law = kernel.params.noise_law
    order = np.argsort(rule.nodes)
    z = law.std * rule.nodes[order]
    weights = rule.weights[order]
    v = np.asarray(kernel.conditional_mean(z))
    slope = np.asarray(kernel.conditional_mean_derivative(z))

    v = np.maximum.accumulate(v)
    keep = (slope > 1e-300) & np.concatenate([[True], np.diff(v) > 0])
    keep &= np.concatenate([np.diff(v) > 0, [True]]) | ~np.concatenate([[False], keep[:-1]])
    idx = np.flatnonzero(keep)
    if idx.size < 2:
        raise KyleDomainError("posterior_mean_law: la media condicional es numéricamente constante")

    z_lo, z_hi = z[idx[0]], z[idx[-1]]
    truncated = float(law.cdf(z_lo) + 1.0 - law.cdf(z_hi))
    if idx.size < z.size:
        logger.warning("posterior_mean_law: %d nodos descartados por saturación de m(z)",
                       z.size - idx.size)
    owner = np.minimum(np.searchsorted(idx, np.arange(z.size)), idx.size - 1)
    masses = np.bincount(owner, weights=weights, minlength=idx.size)
    density = law.pdf(z[idx]) / slope[idx]
    return GridDist.from_density(v[idx], density, truncated_mass=truncated,
                                 weights=masses / masses.sum())


def two_state_density(v, params: ModelParams, mu1: float, mu2: float):
    """Densidad cerrada de la media posterior con dos estados.

    .. math::

        f_s(v) = \\frac{\\lambda}{\\sigma_Z\\sqrt T (v_2 - v)(v - v_1)}
        \\phi\\Big(\\frac{\\lambda}{\\sigma_Z\\sqrt T (v_1 - v_2)}
        \\log\\frac{v_2 - v}{v - v_1} - \\frac{\\mu_1 - \\mu_2}{\\sigma_Z \\sqrt T (v_1 - v_2)}\\Big)

    Regresa 0 fuera de :math:`(v_1, v_2)`.
    """
    prior = params.prior
    if not isinstance(prior, DiscreteDist) or prior.size != 2:
        raise KyleConfigError("two_state_density: se requiere un prior discreto de dos estados")
    v1, v2 = prior.atoms
    s, lam = params.sigma_G, params.lam
    arr = np.asarray(v, dtype=float)
    inside = (arr > v1) & (arr < v2)
    x = np.where(inside, arr, 0.5 * (v1 + v2))
    arg = (lam / (s * (v1 - v2)) * np.log((v2 - x) / (x - v1))
           - (mu1 - mu2) / (s * (v1 - v2)))
    dens = lam / (s * (v2 - x) * (x - v1)) * normal_pdf(arg)
    out = np.where(inside, dens, 0.0)
    return float(out) if np.ndim(v) == 0 else out


@dataclass(frozen=True)
class EquilibriumReport:
    """Descomposición del valor del inversionista y momentos de la ley de
    la media posterior."""
    value: float
    value_decomposed: float
    expected_profit: float
    info_cost: float
    mutual_information: float
    profit_potential: float
    leakage_w2sq: float
    w2sq: float
    gelbrich_residual: float
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    residual: float

    def as_dict(self) -> dict:
        return asdict(self)

    def json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _moments(values: np.ndarray, weights: np.ndarray) -> tuple:
    mean = float(np.dot(weights, values))
    c = values - mean
    var = float(np.dot(weights, c * c))
    if var <= 1e-300:
        return mean, max(var, 0.0), float('nan'), float('nan')
    skew = float(np.dot(weights, c ** 3)) / var ** 1.5
    kurt = float(np.dot(weights, c ** 4)) / var ** 2
    return mean, var, skew, kurt


def _prior_terms(kernel: PosteriorKernel) -> tuple:
    """:math:`\\lambda\\sum p\\log p - \\sum \\mu p` sobre los átomos vivos y la
    entropía del prior."""
    live = kernel._live
    masses = kernel.prior_masses[live]
    density = masses / np.exp(kernel.log_weight[live])
    mu = np.asarray(kernel.mu.mu)[live]
    lam = kernel.params.lam
    return (lam * float(np.dot(masses, np.log(density))) - float(np.dot(masses, mu)),
            -float(np.dot(masses, np.log(density))))


def mutual_information(kernel: PosteriorKernel, rule: Optional[QuadratureRule] = None) -> float:
    """:math:`I(\\tilde s, \\tilde v) = H(\\tilde v) - E_z H(\\tilde v|z)`."""
    rule = rule or gauss_hermite_rule()
    prior_entropy = _prior_terms(kernel)[1]
    z = kernel.params.sigma_G * rule.nodes
    return max(prior_entropy - float(np.dot(rule.weights, kernel.posterior_entropy(z))), 0.0)


def _trivial_report(params: ModelParams, kernel: PosteriorKernel, mean: float) -> EquilibriumReport:
    sG2 = params.sigma_G ** 2
    return EquilibriumReport(value=0.0, value_decomposed=0.0, expected_profit=0.0,
                             info_cost=0.0, mutual_information=0.0, profit_potential=0.0,
                             leakage_w2sq=sG2, w2sq=mean ** 2 + sG2, gelbrich_residual=0.0,
                             mean=mean, variance=0.0, skewness=float('nan'),
                             kurtosis=float('nan'), residual=kernel.mu.residual)


def optimal_value(params: ModelParams, mu: MultiplierSolution,
                  rule: Optional[QuadratureRule] = None) -> EquilibriumReport:
    """Valor óptimo y su descomposición para la señal continua óptima.

    El valor se calcula en forma cerrada,
    :math:`\\lambda E[\\log\\sum_n e^{(v_n\\tilde z+\\mu_n)/\\lambda}]
    + \\lambda\\sum_n p_n\\log p_n - \\sum_n\\mu_n p_n`, y también como
    ganancia esperada menos costo de información.
    """
    rule = rule or gauss_hermite_rule()
    kernel = build_posterior(params, mu)
    if kernel.is_degenerate:
        mean = float(kernel.atoms[int(np.argmax(kernel.prior_masses))])
        return _trivial_report(params, kernel, mean)

    sG = params.sigma_G
    z = sG * rule.nodes
    lse = logsumexp(kernel._exponent(z), axis=-1)
    if not np.all(np.isfinite(lse)):
        bad = int(np.flatnonzero(~np.isfinite(lse))[0])
        raise KyleNumericError(f"optimal_value: término no finito en el nodo {bad}", index=bad)
    value = params.lam * float(np.dot(rule.weights, lse)) + _prior_terms(kernel)[0]

    m = np.asarray(kernel.conditional_mean(z))
    mean, var, skew, kurt = _moments(m, rule.weights)

    F = kernel.posterior_mean_quantile()
    Gq = QuantileFn.normal(params.noise_law)
    leakage = w2_squared(F.shifted(-mean), Gq)
    expected_profit = 0.5 * (var + sG ** 2 - leakage)
    mi = mutual_information(kernel, rule)
    info_cost = params.lam * mi

    return EquilibriumReport(
        value=value,
        value_decomposed=expected_profit - info_cost,
        expected_profit=expected_profit,
        info_cost=info_cost,
        mutual_information=mi,
        profit_potential=var,
        leakage_w2sq=leakage,
        w2sq=w2_squared(F, Gq),
        gelbrich_residual=leakage - (np.sqrt(var) - sG) ** 2,
        mean=mean, variance=var, skewness=skew, kurtosis=kurt,
        residual=mu.residual)


def _signal_score(dist, s: float) -> float:
    """Valor estándar :math:`\\Phi^{-1}(Q(s))` evaluado por la cola más precisa."""
    u = dist.cdf(s)
    if u <= 0.5:
        return float(special.ndtri(u))
    return -float(special.ndtri(dist.sf(s)))


def value_under_signal(params: ModelParams, mu: MultiplierSolution,
                       signal: str = 'normal') -> float:
    """Valor óptimo usando una señal continua arbitraria :math:`\\tilde s`.

    La señal se lleva a la escala de :math:`\\tilde z` con
    :math:`z = G^{-1}(Q(s))` y la esperanza se integra con
    :func:`scipy.integrate.quad` sobre el soporte de :math:`\\tilde s`.

    :param signal: ``'normal'``, ``'uniform'`` o ``'logistic'``.
    """
    try:
        dist = SIGNALS[signal]
    except KeyError:
        raise KyleConfigError(f"signal: señal desconocida '{signal}'") from None
    kernel = build_posterior(params, mu)
    sG = params.sigma_G

    def integrand(s: float) -> float:
        pdf = float(dist.pdf(s))
        if pdf == 0.0:
            return 0.0
        x = _signal_score(dist, s)
        if not np.isfinite(x):
            return 0.0
        return float(logsumexp(kernel._exponent(np.asarray(sG * x)))) * pdf

    lo, hi = dist.support()
    total = 0.0
    # Partir en la mediana mejora la extrapolación de quad en las colas
    median = float(dist.median())
    for a, b in ((lo, median), (median, hi)):
        piece, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=500)
        total += piece
    return params.lam * total + _prior_terms(kernel)[0]


class DiscreteSignalValue(NamedTuple):
    value: float
    I: np.ndarray
    mu: MultiplierSolution
    q: np.ndarray


def _signal_cells(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0 or np.any(q < 0) or not np.isfinite(q).all():
        raise KyleDomainError("q: debe ser un vector de probabilidad")
    if abs(q.sum() - 1.0) > 1e-9:
        raise KyleDomainError("q: las probabilidades deben sumar 1")
    q = q[q > 1e-14]
    return q / q.sum()


def _signal_values(q: np.ndarray, law: NormalLaw) -> np.ndarray:
    """:math:`I_m = \\frac{1}{q_m}\\int_{Q_{m-1}}^{Q_m} G^{-1}(u)\\,du`."""
    cuts = np.concatenate([[0.0], np.cumsum(q)])
    cuts[-1] = 1.0
    return np.diff(np.asarray(quantile_antiderivative(cuts, law))) / q


def _discrete_objective(payoff: DiscreteDist, I: np.ndarray, q: np.ndarray, mu: np.ndarray,
                        lam: float) -> float:
    live = payoff.probs > 0
    E = (np.outer(I, payoff.atoms[live]) + mu[live]) / lam
    p = payoff.probs[live]
    return (lam * float(np.dot(q, logsumexp(E, axis=1)))
            + lam * float(np.dot(p, np.log(p))) - float(np.dot(p, mu[live])))


def discrete_signal_value(payoff: DiscreteDist, q, params: ModelParams,
                          tol: float = 1e-12, max_iter: int = DEFAULT_MAX_ITER,
                          init='ones') -> DiscreteSignalValue:
    """Valor de la señal discreta con probabilidades ``q``.

    Los estados con masa cero se descartan antes de resolver Sinkhorn.
    """
    q = _signal_cells(q)
    I = _signal_values(q, params.noise_law)
    mu = solve_discrete_discrete(payoff, I, q, params.lam, tol, max_iter, init)
    value = _discrete_objective(payoff, I, q, np.asarray(mu.mu), params.lam)
    return DiscreteSignalValue(value, I, mu, q)


def dual_objective(payoff: DiscreteDist, q, mu, params: ModelParams) -> float:
    """Objetivo con :math:`\\mu` fijo para la señal ``q``.

    Su mínimo en :math:`\\mu` es el valor de la señal.
    """
    q = _signal_cells(q)
    I = _signal_values(q, params.noise_law)
    return _discrete_objective(payoff, I, q, np.asarray(getattr(mu, 'mu', mu), dtype=float),
                               params.lam)


def split_signal_state(q, m: int, alpha: float = 0.5) -> np.ndarray:
    """Divide el estado ``m`` en dos estados contiguos con fracciones
    ``alpha`` y ``1 - alpha`` de su masa."""
    q = np.asarray(q, dtype=float)
    if not 0 < alpha < 1:
        raise KyleDomainError("split_signal_state: alpha debe estar en (0, 1)")
    return np.concatenate([q[:m], [alpha * q[m], (1 - alpha) * q[m]], q[m + 1:]])


def discrete_signal_report(payoff: DiscreteDist, q, params: ModelParams,
                           tol: float = 1e-12) -> EquilibriumReport:
    """:class:`EquilibriumReport` para una señal discreta dada."""
    result = discrete_signal_value(payoff, q, params, tol)
    mu = np.asarray(result.mu.mu)
    live = payoff.probs > 0
    atoms, p = payoff.atoms[live], payoff.probs[live]
    E = (np.outer(result.I, atoms) + mu[live]) / params.lam
    post = np.exp(E - logsumexp(E, axis=1, keepdims=True))
    means = post @ atoms

    mean, var, skew, kurt = _moments(means, result.q)
    F = QuantileFn.step(means, result.q)
    Gq = QuantileFn.normal(params.noise_law)
    leakage = w2_squared(F.shifted(-mean), Gq)
    sG = params.sigma_G
    expected_profit = 0.5 * (var + sG ** 2 - leakage)
    mi = max(-float(np.dot(p, np.log(p)))
             + float(np.dot(result.q, special.xlogy(post, post).sum(axis=1))), 0.0)

    return EquilibriumReport(
        value=result.value,
        value_decomposed=expected_profit - params.lam * mi,
        expected_profit=expected_profit,
        info_cost=params.lam * mi,
        mutual_information=mi,
        profit_potential=var,
        leakage_w2sq=leakage,
        w2sq=w2_squared(F, Gq),
        gelbrich_residual=leakage - (np.sqrt(var) - sG) ** 2,
        mean=mean, variance=var, skewness=skew, kurtosis=kurt,
        residual=result.mu.residual)


class OptimizedSignal(NamedTuple):
    q_star: np.ndarray
    value: float
    restart_values: tuple

    @property
    def dispersion(self) -> float:
        """Diferencia entre el mejor y el peor reinicio exitoso."""
        finite = [v for v in self.restart_values if np.isfinite(v)]
        return max(finite) - min(finite) if finite else float('nan')


def _softmax_q(theta: np.ndarray) -> np.ndarray:
    return special.softmax(np.concatenate([theta, [0.0]]))


def optimize_discrete_signal(payoff: DiscreteDist, M: int, params: ModelParams,
                             restarts: int = 8, seed: int = 0, initial=None,
                             tol: float = 1e-12) -> OptimizedSignal:
    """Maximiza el valor de la señal discreta sobre el símplex de dimensión ``M``.

    Se usa Nelder–Mead sobre la parametrización softmax. El primer arranque
    es ``initial`` (o la señal uniforme) y los demás son perturbaciones
    gaussianas de él.

    :raises KyleConvergenceError: Si Sinkhorn falla en todos los arranques.
    """
    if M < 1:
        raise KyleConfigError("discrete.M: debe ser al menos 1")
    if M == 1:
        value = discrete_signal_value(payoff, [1.0], params, tol).value
        return OptimizedSignal(np.ones(1), value, (value,))

    q0 = np.full(M, 1.0 / M) if initial is None else np.asarray(initial, dtype=float)
    if q0.size != M:
        raise KyleConfigError("discrete.initial: longitud distinta de M")
    q0 = np.maximum(q0, 1e-12)
    theta0 = np.log(q0[:-1] / q0[-1])

    warm = {'mu': 'ones'}

    def objective(theta: np.ndarray) -> float:
        try:
            result = discrete_signal_value(payoff, _softmax_q(theta), params, tol,
                                           init=warm['mu'])
        except KyleConvergenceError:
            return np.inf
        warm['mu'] = np.asarray(result.mu.mu)
        return -result.value

    rng = np.random.default_rng(seed)
    starts = [theta0] + [theta0 + rng.normal(0.0, 0.5, theta0.size)
                         for _ in range(max(restarts, 1) - 1)]
    options = {'xatol': 1e-9, 'fatol': 1e-13, 'maxiter': 200 * M, 'maxfev': 400 * M,
               'adaptive': M > 5}

    best_theta, best_value, values = None, -np.inf, []
    for k, start in enumerate(starts):
        res = optimize.minimize(objective, start, method='Nelder-Mead', options=options)
        value = -float(res.fun)
        values.append(value)
        logger.debug("Nelder-Mead M=%d arranque %d: valor %.10f (%s)", M, k, value, res.message)
        if value > best_value:
            best_theta, best_value = res.x, value

    if not np.isfinite(best_value):
        raise KyleConvergenceError(f"optimize_discrete_signal: todos los arranques fallaron (M={M})")
    return OptimizedSignal(_softmax_q(best_theta), best_value, tuple(values))


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    q: tuple
    value: float
    variance: float
    leakage_w2sq: float
    info_cost: float
    dispersion: float
    monotone: bool


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    continuous_value: float

    @property
    def monotone(self) -> bool:
        return all(r.monotone for r in self.rows)


def _refine(q: np.ndarray, M: int) -> np.ndarray:
    """Divide el estado de mayor masa hasta tener ``M`` estados."""
    q = np.asarray(q, dtype=float)
    while q.size < M:
        q = split_signal_state(q, int(np.argmax(q)))
    return q


def value_convergence(payoff: DiscreteDist, Ms: Sequence[int], params: ModelParams,
                      restarts: int = 8, seed: int = 0,
                      rule: Optional[QuadratureRule] = None) -> ConvergenceTable:
    """Valores óptimos :math:`V^M` de señales discretas frente al valor continuo.

    Cada :math:`M` arranca de la subdivisión del óptimo anterior, de modo que
    el punto inicial nunca es peor que :math:`V^{M'}` con :math:`M' < M`.
    Para :math:`M > 8` sólo se usa el arranque subdividido.
    """
    continuous = optimal_value(params, solve_model(params, rule), rule).value
    rows, prev_q, prev_value = [], None, -np.inf
    for M in sorted(set(int(m) for m in Ms)):
        initial = None if prev_q is None else _refine(prev_q, M)
        opt = optimize_discrete_signal(payoff, M, params, restarts if M <= 8 else 1, seed,
                                       initial)
        report = discrete_signal_report(payoff, opt.q_star, params)
        monotone = opt.value >= prev_value - 1e-12
        if not monotone:
            logger.warning("V^M decrece en M=%d: %.12f < %.12f", M, opt.value, prev_value)
        rows.append(ConvergenceRow(M=M, q=tuple(float(x) for x in opt.q_star), value=opt.value,
                                   variance=report.variance, leakage_w2sq=report.leakage_w2sq,
                                   info_cost=report.info_cost, dispersion=opt.dispersion,
                                   monotone=monotone))
        logger.info("M=%d: V=%.10f (continuo %.10f)", M, opt.value, continuous)
        prev_q, prev_value = opt.q_star, max(prev_value, opt.value)
    return ConvergenceTable(rows=tuple(rows), continuous_value=continuous)


@dataclass(frozen=True, eq=False)
class SweepRow:
    x: float
    report: Optional[EquilibriumReport]
    kernel: Optional[PosteriorKernel] = None
    error: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SweepTable:
    axis: str
    rows: tuple

    @property
    def failed(self) -> tuple:
        return tuple(r for r in self.rows if r.report is None)

    @property
    def partial(self) -> bool:
        return bool(self.failed)


def comparative_statics_sweep(payoff: Prior, axis: str, grid: Sequence[float],
                              params: ModelParams, rule: Optional[QuadratureRule] = None,
                              tol: Optional[float] = None,
                              max_iter: int = DEFAULT_MAX_ITER) -> SweepTable:
    """Estática comparativa a lo largo de ``lambda`` o ``sigma_Z``.

    Las fallas en un punto, propias o numéricas de numpy y scipy, se
    registran y el barrido continúa.
    """
    if axis not in ('lambda', 'sigma_Z'):
        raise KyleConfigError(f"sweep.axis: eje desconocido '{axis}'")
    grid = [float(x) for x in grid]
    if not grid:
        raise KyleConfigError("sweep.grid: la malla no puede estar vacía")
    if not all(np.isfinite(x) and x > 0 for x in grid):
        raise KyleConfigError("sweep.grid: los valores deben ser positivos")

    base = replace(params, prior=payoff)
    base = replace(base, prior=_payoff_of(base))
    rows = []
    for x in grid:
        point = base.with_axis(axis, x)
        try:
            mu = solve_model(point, rule, tol, max_iter)
            report = optimal_value(point, mu, rule)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            logger.warning("Barrido %s=%g falló: %s", axis, x, e)
            rows.append(SweepRow(x=x, report=None, error=f"{type(e).__name__}: {e}"))
            continue
        logger.info("Barrido %s=%g: valor %.8f", axis, x, report.value)
        rows.append(SweepRow(x=x, report=report, kernel=build_posterior(point, mu)))
    return SweepTable(axis=axis, rows=tuple(rows))
