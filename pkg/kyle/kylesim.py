"""
Verificación Monte Carlo del equilibrio de Kyle.

El inversionista informado sigue el puente browniano
:math:`\\theta_t = (\\tilde\\zeta - Y_t)/(T - t)` hacia el objetivo
:math:`\\tilde\\zeta = G^{-1}(F_s(m(\\tilde z)))` y el creador de mercado fija
:math:`P_t = H(t, Y_t)`, con :math:`H(T, \\cdot) = F_s^{-1} \\circ G`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .dist import QuadratureRule, gauss_hermite_rule
from .exceptions import KyleConfigError, KyleDomainError, KyleSimulationError
from .infoacq import ModelParams, PosteriorKernel
from .transport import QuantileFn, QuantileKind, cross_profit_integral

__all__ = ["SimConfig", "SimResult", "PathSnapshots", "KSReport", "PriceSurface",
           "price_function", "simulate_equilibrium", "simulate_paths",
           "inconspicuousness_test", "analytic_expected_profit"]

logger = logging.getLogger(__name__)

# Rechazo máximo de trayectorias no finitas
MAX_REJECTED = 1e-3

_CHUNK = 1000
_SCORE_RANGE = 10.0


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Parámetros de la simulación.

    :param t_epsilon: La integral de ganancias se trunca en :math:`T - \\varepsilon`.
    :param posterior_mean_law: Función cuantil :math:`F_s` de :math:`m(\\tilde z)`.
    """
    n_paths: int
    n_steps: int
    t_epsilon: float
    seed: int
    params: ModelParams
    posterior_mean_law: QuantileFn

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise KyleConfigError("simulation.n_paths: debe ser al menos 1")
        if int(self.n_steps) < 100:
            raise KyleConfigError("simulation.n_steps: debe ser al menos 100")
        if not 0 < self.t_epsilon < self.params.T / 10:
            raise KyleConfigError("simulation.t_epsilon: debe estar en (0, T/10)")
        if int(self.seed) < 0 or int(self.seed) >= 2 ** 64:
            raise KyleConfigError("seed: debe ser un entero de 64 bits sin signo")
        object.__setattr__(self, 'n_paths', int(self.n_paths))
        object.__setattr__(self, 'n_steps', int(self.n_steps))
        object.__setattr__(self, 'seed', int(self.seed))

    @property
    def dt(self) -> float:
        return (self.params.T - self.t_epsilon) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class SimResult:
    """Resumen de la simulación.

    La ganancia se integra hasta :math:`T - \\varepsilon`. La cola omitida se
    estima con :math:`E[(m - P)(\\tilde\\zeta - Y)]` en :math:`T - \\varepsilon` y
    se acota por Cauchy–Schwarz en ``tail_bound``.
    """
    mean_profit: float
    profit_std_error: float
    tail_estimate: float
    tail_bound: float
    ks_stat_Y_T: float
    terminal_price_gap: float
    terminal_flow_gap: float
    n_paths: int
    n_rejected: int

    @property
    def profit_with_tail(self) -> float:
        """Ganancia simulada más la cola estimada en :math:`[T - \\varepsilon, T]`."""
        return self.mean_profit + self.tail_estimate

    def as_dict(self) -> dict:
        return {**asdict(self), 'profit_with_tail': self.profit_with_tail}

    def json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


@dataclass(frozen=True, eq=False)
class PathSnapshots:
    """Valores de :math:`Y_t` y :math:`P_t` por trayectoria en ``times``."""
    times: np.ndarray
    Y: np.ndarray
    P: np.ndarray

    def increment_stats(self) -> tuple:
        """Media y error estándar de los incrementos de precio entre instantes."""
        dP = np.diff(self.P, axis=1)
        n = dP.shape[0]
        means = dP.mean(axis=0)
        errors = dP.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(means.shape, np.inf)
        return means, errors


@dataclass(frozen=True)
class KSReport:
    times: tuple
    stats: tuple
    pvalues: tuple
    critical: float = field(default=float('nan'))

    @property
    def ks_stat(self) -> float:
        return max(self.stats)

    @property
    def passed(self) -> bool:
        return all(s < self.critical for s in self.stats)


def price_function(t, y, F: QuantileFn, params: ModelParams,
                   rule: Optional[QuadratureRule] = None):
    """Regla de precios :math:`H(t, y) = E[F^{-1}(G(Z_T)) | Z_t = y]`.

    Se integra por Gauss–Hermite en la escala estándar:
    :math:`\\int F^{-1}(\\Phi((y + \\sigma_Z\\sqrt{T-t}\\,x)/(\\sigma_Z\\sqrt T)))\\phi(x)\\,dx`.
    En :math:`t = T` regresa el mapa de precios terminal.
    """
    T = params.T
    if not 0 <= t <= T:
        raise KyleDomainError("price_function: t debe estar en [0, T]")
    arr = np.asarray(y, dtype=float)
    sG = params.sigma_G
    if t == T:
        out = F.at_standard_score(arr / sG)
    else:
        rule = rule or gauss_hermite_rule()
        s = params.sigma_Z * np.sqrt(T - t)
        x = (arr[..., None] + s * rule.nodes) / sG
        out = np.asarray(F.at_standard_score(x)) @ rule.weights
    return float(out) if np.ndim(y) == 0 else out


class PriceSurface():
    """
    Caché bicúbica de :math:`H` en la malla :math:`(\\sqrt{T-t}, y)`.

    :math:`H` es función par y suave de :math:`\\sqrt{T-t}`, de modo que la
    interpolación no pierde precisión cerca de :math:`T`.
    """

    def __init__(self, F: QuantileFn, params: ModelParams, n_root: int = 129,
                 n_flow: int = 1201, width: float = 9.0,
                 rule: Optional[QuadratureRule] = None):
        rule = rule or gauss_hermite_rule(128)
        sG = params.sigma_G
        scores = np.linspace(-_SCORE_RANGE, _SCORE_RANGE, 8001)
        terminal = CubicSpline(scores, np.asarray(F.at_standard_score(scores)))

        self._root = np.linspace(0.0, np.sqrt(params.T), n_root)
        self._flow = np.linspace(-width * sG, width * sG, n_flow)
        self._T = params.T

        values = np.empty((n_root, n_flow))
        for i, r in enumerate(self._root):
            x = (self._flow[:, None] + params.sigma_Z * r * rule.nodes) / sG
            values[i] = terminal(np.clip(x, -_SCORE_RANGE, _SCORE_RANGE)) @ rule.weights
        self._spline = RectBivariateSpline(self._root, self._flow, values, kx=3, ky=3)
        logger.debug("Superficie de precios %dx%d construida", n_root, n_flow)

    def __call__(self, t: float, y) -> np.ndarray:
        arr = np.clip(np.asarray(y, dtype=float), self._flow[0], self._flow[-1])
        root = np.full(arr.shape, np.sqrt(max(self._T - t, 0.0)))
        out = self._spline.ev(root, arr)
        return float(out) if np.ndim(y) == 0 else out


def analytic_expected_profit(F: QuantileFn, params: ModelParams) -> float:
    """Ganancia esperada :math:`\\int_0^1 F_s^{-1}(u) G^{-1}(u)\\,du`."""
    return cross_profit_integral(F, QuantileFn.normal(params.noise_law))


def _stream(seed: int, index: int) -> np.random.Generator:
    """Flujo aleatorio independiente para la trayectoria ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _targets(F: QuantileFn, m: np.ndarray, z: np.ndarray, params: ModelParams) -> np.ndarray:
    """:math:`\\tilde\\zeta = G^{-1}(F_s(m(\\tilde z)))`."""
    if F.kind is QuantileKind.COMPOSED:
        # m es estrictamente creciente: G^{-1} F_s m es la identidad
        return z
    return params.sigma_G * np.asarray(F.standard_score(m))


class _Paths:
    """Acumuladores del recorrido completo de las trayectorias."""

    def __init__(self, cfg: SimConfig, snap_steps: np.ndarray):
        n = cfg.n_paths
        self.profit = np.empty(n)
        self.flow_end = np.empty(n)
        self.price_end = np.empty(n)
        self.mean = np.empty(n)
        self.target = np.empty(n)
        self.snap_Y = np.empty((n, snap_steps.size))
        self.snap_P = np.empty((n, snap_steps.size))

    def valid(self) -> np.ndarray:
        return (np.isfinite(self.profit) & np.isfinite(self.flow_end)
                & np.isfinite(self.price_end) & np.isfinite(self.snap_Y).all(axis=1)
                & np.isfinite(self.snap_P).all(axis=1))


def _run(cfg: SimConfig, kernel: PosteriorKernel, snap_times: Sequence[float]) -> tuple:
    F = cfg.posterior_mean_law
    if F.kind is QuantileKind.STEP:
        raise KyleDomainError("simulate: la ley de la media posterior debe ser continua")
    params = cfg.params
    if kernel.params.lam != params.lam:
        raise KyleConfigError("simulate: el núcleo y la configuración no coinciden")

    times = cfg.times
    dt = cfg.dt
    snap_steps = np.unique(np.clip(np.rint(np.asarray(snap_times, dtype=float) / dt)
                                   .astype(int), 0, cfg.n_steps))
    surface = PriceSurface(F, params)
    paths = _Paths(cfg, snap_steps)
    scale = params.sigma_Z * np.sqrt(dt)

    for lo in range(0, cfg.n_paths, _CHUNK):
        hi = min(lo + _CHUNK, cfg.n_paths)
        draws = np.stack([_stream(cfg.seed, i).standard_normal(cfg.n_steps + 1)
                          for i in range(lo, hi)])
        z = params.sigma_G * draws[:, 0]
        dZ = scale * draws[:, 1:]
        m = np.asarray(kernel.conditional_mean(z))
        zeta = _targets(F, m, z, params)

        Y = np.zeros(hi - lo)
        profit = np.zeros(hi - lo)
        snap = 0
        for k in range(cfg.n_steps + 1):
            P = surface(times[k], Y)
            if snap < snap_steps.size and snap_steps[snap] == k:
                paths.snap_Y[lo:hi, snap] = Y
                paths.snap_P[lo:hi, snap] = P
                snap += 1
            if k == cfg.n_steps:
                break
            theta = (zeta - Y) / (params.T - times[k])
            profit += (m - P) * theta * dt
            Y = Y + theta * dt + dZ[:, k]

        paths.profit[lo:hi] = profit
        paths.flow_end[lo:hi] = Y
        paths.price_end[lo:hi] = P
        paths.mean[lo:hi] = m
        paths.target[lo:hi] = zeta
        logger.debug("Trayectorias %d-%d simuladas", lo, hi)

    valid = paths.valid()
    rejected = int(cfg.n_paths - valid.sum())
    if rejected > MAX_REJECTED * cfg.n_paths:
        raise KyleSimulationError(f"simulate: {rejected} de {cfg.n_paths} trayectorias rechazadas",
                                  rejected=rejected, total=cfg.n_paths)
    if rejected:
        logger.warning("simulate: %d trayectorias no finitas descartadas", rejected)
    return paths, valid, times[snap_steps]


def _ks(sample: np.ndarray, std: float) -> tuple:
    res = stats.kstest(sample / std, 'norm')
    return float(res.statistic), float(res.pvalue)


def simulate_equilibrium(cfg: SimConfig, kernel: PosteriorKernel) -> SimResult:
    """Simula el equilibrio y resume la ganancia, la ley del flujo terminal y
    la convergencia del precio.

    :raises KyleSimulationError: Si más del 0.1% de las trayectorias no son finitas.
    """
    params = cfg.params
    paths, valid, _ = _run(cfg, kernel, ())
    profit = paths.profit[valid]
    n = profit.size
    std_error = float(profit.std(ddof=1) / np.sqrt(n)) if n > 1 else float('nan')
    t_end = params.T - cfg.t_epsilon
    ks, _ = _ks(paths.flow_end[valid], params.sigma_Z * np.sqrt(t_end))
    residual = paths.mean[valid] - paths.price_end[valid]
    remaining = paths.target[valid] - paths.flow_end[valid]
    # E[(m - P_t)(zeta - Y_t)] es O(T - t): el integrando de la cola es casi constante
    tail = float((residual * remaining).mean())
    bound = float(np.sqrt((residual ** 2).mean() * (remaining ** 2).mean()))
    result = SimResult(
        mean_profit=float(profit.mean()),
        profit_std_error=std_error,
        tail_estimate=tail,
        tail_bound=bound,
        ks_stat_Y_T=ks,
        terminal_price_gap=float(np.abs(residual).mean()),
        terminal_flow_gap=float(np.abs(remaining).mean()),
        n_paths=cfg.n_paths,
        n_rejected=int(cfg.n_paths - n))
    logger.info("Ganancia simulada %.6f ± %.6f (cola %.2e, cota %.2e)", result.mean_profit,
                result.profit_std_error, result.tail_estimate, result.tail_bound)
    return result


def simulate_paths(cfg: SimConfig, kernel: PosteriorKernel,
                   times: Sequence[float]) -> PathSnapshots:
    """Instantáneas de :math:`Y_t` y :math:`P_t` en la malla más cercana a ``times``."""
    paths, valid, snap = _run(cfg, kernel, times)
    return PathSnapshots(times=snap, Y=paths.snap_Y[valid], P=paths.snap_P[valid])


def inconspicuousness_test(cfg: SimConfig, kernel: PosteriorKernel) -> KSReport:
    """Compara las marginales de :math:`Y_t` con :math:`N(0, \\sigma_Z^2 t)` en
    :math:`t = T/4, T/2, 3T/4`.

    El valor crítico es el cuantil 99% de la distribución de Kolmogorov para
    el número de trayectorias válidas.
    """
    T = cfg.params.T
    snaps = simulate_paths(cfg, kernel, (T / 4, T / 2, 3 * T / 4))
    ks, pv = [], []
    for j, t in enumerate(snaps.times):
        s, p = _ks(snaps.Y[:, j], cfg.params.sigma_Z * np.sqrt(t))
        ks.append(s)
        pv.append(p)
        logger.info("KS(t=%.4f) = %.5f (p = %.3f)", t, s, p)
    critical = float(stats.kstwo.ppf(0.99, snaps.Y.shape[0]))
    return KSReport(times=tuple(float(t) for t in snaps.times), stats=tuple(ks),
                    pvalues=tuple(pv), critical=critical)
