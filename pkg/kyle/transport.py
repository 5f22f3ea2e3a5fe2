"""
Transporte óptimo unidimensional con costo cuadrático: distancia de
Wasserstein-2 entre funciones cuantil, cota de Gelbrich, descomposición de
Mallows y el mapa monótono que define la regla de precios.
"""

from __future__ import annotations

import logging
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special

from .dist import DiscreteDist, GridDist, NormalLaw, normal_quantile
from .exceptions import KyleConfigError, KyleDomainError, KyleNumericError

__all__ = ["QuantileFn", "QuantileKind", "w2_squared", "cross_profit_integral",
           "gelbrich_lower_bound", "mallows_center_check", "pricing_map"]

logger = logging.getLogger(__name__)

# Los cuantiles continuos se evalúan en [U_CLAMP, 1 - U_CLAMP]
U_CLAMP = 1e-10

_GL_ORDER = 64


class QuantileKind(str, Enum):
    NORMAL = 'normal'
    STEP = 'step'
    GRID = 'grid'
    COMPOSED = 'composed'


class QuantileFn():
    """
    Función cuantil :math:`F^{-1}` de una ley unidimensional.

    Existen cuatro representaciones:

    - ``normal``: forma cerrada :math:`\\mu + \\sigma\\Phi^{-1}(u)`.
    - ``step``: función escalonada con saltos en las probabilidades acumuladas.
    - ``grid``: inversión lineal por tramos de la cdf de una :class:`GridDist`.
    - ``composed``: :math:`m \\circ G^{-1}` para una transformación ``m``
      estrictamente creciente de una ley normal :math:`G`.

    Construya las instancias con los métodos de clase.
    """

    def __init__(self, kind: QuantileKind, offset: float = 0.0, **parts):
        self._kind = QuantileKind(kind)
        self._offset = float(offset)
        self._parts = parts

    @classmethod
    def normal(cls, law: NormalLaw) -> 'QuantileFn':
        return cls(QuantileKind.NORMAL, law=law)

    @classmethod
    def step(cls, values, probs) -> 'QuantileFn':
        """Función escalonada que toma ``values[m]`` en :math:`(Q_{m-1}, Q_m]`.

        Los estados con masa cero se descartan.
        """
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1:
            raise KyleConfigError("QuantileFn.step: valores y probabilidades incompatibles")
        keep = probs > 0
        values, probs = values[keep], probs[keep] / probs[keep].sum()
        order = np.argsort(values, kind='stable')
        values, probs = values[order], probs[order]
        cuts = np.cumsum(probs)
        cuts[-1] = 1.0
        # Umbrales en unidades estándar para evaluar F^{-1}(Phi(x)) sin perder precisión
        interior = cuts[:-1]
        thresholds = np.asarray(normal_quantile(interior)) if interior.size else interior
        return cls(QuantileKind.STEP, values=values, probs=probs, cuts=cuts,
                   thresholds=thresholds)

    @classmethod
    def from_discrete(cls, dist: DiscreteDist) -> 'QuantileFn':
        return cls.step(dist.atoms, dist.probs)

    @classmethod
    def from_grid(cls, grid: GridDist) -> 'QuantileFn':
        """Inversión monótona de la cdf; los tramos planos se colapsan
        conservando su primer nodo."""
        cdf, first = np.unique(grid.cdf, return_index=True)
        nodes = grid.nodes[first]
        return cls(QuantileKind.GRID, cdf=cdf, nodes=nodes)

    @classmethod
    def composed(cls, forward: Callable[[np.ndarray], np.ndarray],
                 inverse: Callable[[np.ndarray], np.ndarray], law: NormalLaw) -> 'QuantileFn':
        """Cuantil de :math:`m(X)` con :math:`X \\sim` ``law`` y ``m`` creciente."""
        return cls(QuantileKind.COMPOSED, forward=forward, inverse=inverse, law=law)

    @property
    def kind(self) -> QuantileKind:
        return self._kind

    @property
    def offset(self) -> float:
        return self._offset

    @property
    def breakpoints(self) -> tuple:
        """Puntos de salto en (0, 1)."""
        if self._kind is QuantileKind.STEP:
            return tuple(float(c) for c in self._parts['cuts'][:-1])
        return ()

    def shifted(self, c: float) -> 'QuantileFn':
        """Regresa la función cuantil trasladada :math:`F^{-1} + c`."""
        return QuantileFn(self._kind, offset=self._offset + c, **self._parts)

    def _raw(self, u: np.ndarray) -> np.ndarray:
        p = self._parts
        if self._kind is QuantileKind.STEP:
            idx = np.searchsorted(p['cuts'], u, side='left')
            return p['values'][np.minimum(idx, p['values'].size - 1)]
        u = np.clip(u, U_CLAMP, 1.0 - U_CLAMP)
        if self._kind is QuantileKind.NORMAL:
            return p['law'].mean + p['law'].std * np.asarray(normal_quantile(u))
        if self._kind is QuantileKind.GRID:
            return np.interp(u, p['cdf'], p['nodes'])
        law = p['law']
        return np.asarray(p['forward'](law.mean + law.std * np.asarray(normal_quantile(u))))

    def __call__(self, u):
        arr = np.asarray(u, dtype=float)
        out = self._raw(arr) + self._offset
        if not np.all(np.isfinite(out)):
            bad = int(np.flatnonzero(~np.isfinite(np.atleast_1d(out)))[0])
            raise KyleNumericError(f"Cuantil no finito en el punto {bad}", index=bad)
        return float(out) if np.ndim(u) == 0 else out

    def at_standard_score(self, x):
        """Evalúa :math:`F^{-1}(\\Phi(x))` sin pasar por :math:`\\Phi` cuando
        la representación lo permite."""
        arr = np.asarray(x, dtype=float)
        p = self._parts
        if self._kind is QuantileKind.NORMAL:
            out = p['law'].mean + p['law'].std * arr
        elif self._kind is QuantileKind.STEP:
            idx = np.searchsorted(p['thresholds'], arr, side='left')
            out = p['values'][idx]
        elif self._kind is QuantileKind.COMPOSED:
            out = np.asarray(p['forward'](p['law'].mean + p['law'].std * arr))
        else:
            out = self._raw(special.ndtr(arr))
        out = out + self._offset
        return float(out) if np.ndim(x) == 0 else out

    def standard_score(self, v):
        """Inversa de :meth:`at_standard_score`: :math:`\\Phi^{-1}(F(v))`.

        :raises KyleDomainError: Para leyes escalonadas, que no son continuas.
        """
        arr = np.asarray(v, dtype=float) - self._offset
        p = self._parts
        if self._kind is QuantileKind.NORMAL:
            out = (arr - p['law'].mean) / p['law'].std
        elif self._kind is QuantileKind.COMPOSED:
            out = (np.asarray(p['inverse'](arr)) - p['law'].mean) / p['law'].std
        elif self._kind is QuantileKind.GRID:
            u = np.clip(np.interp(arr, p['nodes'], p['cdf']), U_CLAMP, 1.0 - U_CLAMP)
            out = np.asarray(normal_quantile(u))
        else:
            raise KyleDomainError("standard_score: la ley escalonada no es continua")
        return float(out) if np.ndim(v) == 0 else out

    def mean(self) -> float:
        if self._kind is QuantileKind.NORMAL:
            return self._parts['law'].mean + self._offset
        if self._kind is QuantileKind.STEP:
            return float(np.dot(self._parts['probs'], self._parts['values'])) + self._offset
        u, w = unit_rule(self.breakpoints)
        return float(np.dot(w, self(u)))

    def second_moment(self) -> float:
        u, w = unit_rule(self.breakpoints)
        return float(np.dot(w, self(u) ** 2))

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def __repr__(self) -> str:
        return f"<QuantileFn [{self._kind.value}]>"


@lru_cache(maxsize=64)
def _unit_rule_cached(breaks: tuple) -> tuple:
    decades = 10.0 ** np.arange(-10, 0)
    edges = np.concatenate([decades, np.linspace(0.1, 0.9, 33), 1.0 - decades,
                            np.clip(np.asarray(breaks, dtype=float), U_CLAMP, 1.0 - U_CLAMP)])
    edges = np.unique(edges)
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-15])]

    x, wx = np.polynomial.legendre.leggauss(_GL_ORDER)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    u = (half[:, None] * x[None, :] + 0.5 * (a + b)[:, None]).ravel()
    w = (half[:, None] * wx[None, :]).ravel()

    # Los extremos [0, U_CLAMP] y [1 - U_CLAMP, 1] se evalúan en el punto fijado
    u = np.concatenate([[edges[0]], u, [edges[-1]]])
    w = np.concatenate([[edges[0]], w, [1.0 - edges[-1]]])
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def unit_rule(breaks: tuple = ()) -> tuple:
    """Regla compuesta de Gauss–Legendre sobre (0, 1).

    Paneles graduados hacia los extremos más los saltos ``breaks``, con
    64 nodos por panel.
    """
    return _unit_rule_cached(tuple(sorted(set(round(float(b), 15) for b in breaks))))


def w2_squared(F: QuantileFn, G: QuantileFn) -> float:
    """Distancia de Wasserstein-2 al cuadrado :math:`\\int_0^1 (F^{-1} - G^{-1})^2 du`."""
    u, w = unit_rule(F.breakpoints + G.breakpoints)
    d = F(u) - G(u)
    return max(float(np.dot(w, d * d)), 0.0)


def cross_profit_integral(F: QuantileFn, G: QuantileFn) -> float:
    """Integral cruzada :math:`\\int_0^1 F^{-1}(u) G^{-1}(u)\\,du`."""
    u, w = unit_rule(F.breakpoints + G.breakpoints)
    return float(np.dot(w, F(u) * G(u)))


def gelbrich_lower_bound(mean_F: float, std_F: float, G: NormalLaw) -> float:
    """Cota inferior de Gelbrich para :math:`W_2^2(F, G)` con :math:`G` normal."""
    return (G.mean - mean_F) ** 2 + (G.std - std_F) ** 2


def mallows_center_check(F: QuantileFn, mean_F: float, G: NormalLaw) -> tuple:
    """Ambos lados de :math:`W_2^2(F,G) = E[F]^2 + W_2^2(F^c, G)`.

    :return: Tupla ``(lhs, rhs)``.
    :raises KyleDomainError: Si :math:`G` no está centrada.
    """
    if G.mean != 0.0:
        raise KyleDomainError("mallows_center_check: la ley G debe tener media cero")
    Gq = QuantileFn.normal(G)
    lhs = w2_squared(F, Gq)
    rhs = mean_F ** 2 + w2_squared(F.shifted(-mean_F), Gq)
    return lhs, rhs


def pricing_map(F: QuantileFn, G: NormalLaw) -> Callable:
    """Mapa de transporte monótono :math:`y \\mapsto F^{-1}(G(y))`."""

    def _map(y):
        arr = np.asarray(y, dtype=float)
        out = F.at_standard_score((arr - G.mean) / G.std)
        return float(out) if np.ndim(y) == 0 else out

    return _map
