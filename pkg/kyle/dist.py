"""
Distribuciones unidimensionales, funciones especiales de la normal estándar
y reglas de cuadratura usadas por el resto de KyleSuite.
"""

# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy import special
from scipy.integrate import cumulative_trapezoid

from .exceptions import KyleConfigError, KyleDomainError, KyleNumericError

__all__ = ["DiscreteDist", "GridDist", "NormalLaw", "QuadratureRule", "RuleKind",
           "normal_cdf", "normal_pdf", "normal_quantile", "gaussian_expectation",
           "partial_quantile_integral", "gauss_hermite_rule", "trapezoid_rule",
           "trapezoid_weights", "gregory_weights", "double_exponential_grid", "normal_grid"]

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Masa mínima por debajo de la cual un átomo se considera ausente
PRUNE_MASS = 1e-14


def _scalar_or_array(x_in, result: np.ndarray) -> ArrayLike:
    """Regresa un ``float`` si la entrada era escalar."""
    if np.ndim(x_in) == 0:
        return float(result)
    return result


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise KyleConfigError(f"{name}: se esperaba un vector unidimensional")
    arr.setflags(write=False)
    return arr


def normal_pdf(x: ArrayLike) -> ArrayLike:
    """Densidad de la normal estándar."""
    arr = np.asarray(x, dtype=float)
    return _scalar_or_array(x, np.exp(-0.5 * arr * arr) / _SQRT_2PI)


def normal_cdf(x: ArrayLike) -> ArrayLike:
    """Función de distribución de la normal estándar.

    Usa :func:`scipy.special.ndtr`, que conserva precisión relativa en la cola
    izquierda y es exacta a doble precisión en la derecha.

    >>> normal_cdf(0.0)
    0.5
    """
    arr = np.asarray(x, dtype=float)
    return _scalar_or_array(x, special.ndtr(arr))


def normal_quantile(u: ArrayLike) -> ArrayLike:
    """Función cuantil de la normal estándar.

    Aproximación racional (:func:`scipy.special.ndtri`) refinada con dos pasos
    de Newton sobre :func:`normal_cdf`. El refinamiento se hace siempre en la
    cola izquierda, donde ``ndtr`` tiene precisión relativa completa.

    :param u: Probabilidad o arreglo de probabilidades en (0, 1).
    :raises KyleDomainError: Si algún valor está fuera de (0, 1).
    """
    arr = np.asarray(u, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise KyleDomainError("normal_quantile: u debe estar en el intervalo abierto (0, 1)")

    # 1 - u es exacto para u en [0.5, 1)
    lower = np.minimum(arr, 1.0 - arr)
    x = special.ndtri(lower)
    for _ in range(2):
        pdf = np.exp(-0.5 * x * x) / _SQRT_2PI
        step = np.where(pdf > 0.0, (special.ndtr(x) - lower) / np.where(pdf > 0.0, pdf, 1.0), 0.0)
        x = x - step

    x = np.where(arr > 0.5, -x, x)
    return _scalar_or_array(u, x)


@dataclass(frozen=True)
class NormalLaw:
    """Ley normal :math:`N(\\mu, \\sigma^2)`.

    Representa tanto la ley terminal del flujo de órdenes de ruido
    :math:`G = N(0, \\sigma_Z^2 T)` como la ley de la señal normalizada.
    """
    mean: float
    std: float

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise KyleConfigError("NormalLaw.mean: debe ser finita")
        if not (np.isfinite(self.std) and self.std > 0):
            raise KyleConfigError("NormalLaw.std: debe ser positiva y finita")
        object.__setattr__(self, 'mean', float(self.mean))
        object.__setattr__(self, 'std', float(self.std))

    @property
    def variance(self) -> float:
        return self.std ** 2

    def pdf(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        return _scalar_or_array(x, normal_pdf((arr - self.mean) / self.std) / self.std)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        return _scalar_or_array(x, special.ndtr((arr - self.mean) / self.std))

    def quantile(self, u: ArrayLike) -> ArrayLike:
        q = np.asarray(normal_quantile(u))
        return _scalar_or_array(u, self.mean + self.std * q)


class RuleKind(str, Enum):
    GAUSS_HERMITE = 'gauss-hermite-transformed'
    TRAPEZOID = 'trapezoid-truncated'


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Regla de cuadratura para esperanzas respecto a la normal estándar.

    Los nodos están en unidades estándar; :func:`gaussian_expectation` los
    traslada a la ley deseada.
    """
    nodes: np.ndarray
    weights: np.ndarray
    kind: RuleKind

    def __post_init__(self):
        nodes = _frozen(self.nodes, "QuadratureRule.nodes")
        weights = _frozen(self.weights, "QuadratureRule.weights")
        if nodes.shape != weights.shape:
            raise KyleConfigError("QuadratureRule: nodos y pesos de distinto tamaño")
        if not np.all(weights > 0):
            raise KyleConfigError("QuadratureRule.weights: los pesos deben ser positivos")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise KyleConfigError("QuadratureRule.weights: los pesos deben sumar 1")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'kind', RuleKind(self.kind))

    def __len__(self) -> int:
        return self.nodes.size

    def __repr__(self) -> str:
        return f"<QuadratureRule [{self.kind.value}, {len(self)}]>"


def gauss_hermite_rule(n: int = 256) -> QuadratureRule:
    """Regla de Gauss–Hermite (polinomios probabilistas) normalizada.

    Los nodos y pesos se simetrizan para que integrandos impares den cero
    exactamente. Se descartan nodos cuyo peso es nulo en doble precisión.

    :param n: Número de nodos.
    """
    if n < 1:
        raise KyleConfigError("quad: el número de nodos debe ser positivo")
    x, w = special.roots_hermitenorm(n)
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    keep = w > 0
    w = w[keep] / w[keep].sum()
    return QuadratureRule(nodes=x[keep], weights=w, kind=RuleKind.GAUSS_HERMITE)


def trapezoid_rule(n: int = 4001, width: float = 8.0) -> QuadratureRule:
    """Regla trapezoidal truncada en :math:`[-width, width]` (unidades estándar)."""
    if n < 3:
        raise KyleConfigError("quad: la regla trapezoidal requiere al menos 3 nodos")
    x = np.linspace(-width, width, n)
    w = trapezoid_weights(x) * normal_pdf(x)
    keep = w > 0
    return QuadratureRule(nodes=x[keep], weights=w[keep] / w[keep].sum(),
                          kind=RuleKind.TRAPEZOID)


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Pesos de la regla trapezoidal compuesta sobre una malla arbitraria."""
    h = np.diff(np.asarray(nodes, dtype=float))
    w = np.zeros(h.size + 1)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def gregory_weights(nodes: np.ndarray) -> np.ndarray:
    """Pesos de Gregory de cuarto orden sobre una malla uniforme.

    Corrigen los cuatro nodos de cada extremo de la regla trapezoidal; el
    error es :math:`O(h^4)` para integrandos suaves en el intervalo.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size < 8:
        raise KyleConfigError("gregory_weights: se requieren al menos 8 nodos")
    h = np.diff(nodes)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise KyleConfigError("gregory_weights: la malla debe ser uniforme")
    w = np.full(nodes.size, h[0])
    ends = h[0] * np.array([17.0, 59.0, 43.0, 49.0]) / 48.0
    w[:4] = ends
    w[-4:] = ends[::-1]
    return w


def gaussian_expectation(f: Callable[[np.ndarray], np.ndarray], law: NormalLaw,
                         rule: QuadratureRule) -> float:
    """Aproxima :math:`E[f(X)]` con :math:`X` distribuida según ``law``.

    ``f`` recibe el arreglo completo de nodos trasladados.

    :raises KyleNumericError: Si ``f`` no es finita en algún nodo.
    """
    values = np.asarray(f(law.mean + law.std * rule.nodes), dtype=float)
    if values.ndim == 0:
        values = np.full(rule.nodes.shape, float(values))
    bad = np.flatnonzero(~np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1))
    if bad.size:
        raise KyleNumericError(f"Valor no finito en el nodo {bad[0]} de la cuadratura",
                               index=int(bad[0]))
    return float(np.tensordot(rule.weights, values, axes=(0, 0)))


def _phi_at_quantile(u: np.ndarray) -> np.ndarray:
    """:math:`\\phi(\\Phi^{-1}(u))`, con límite 0 en los extremos."""
    u = np.asarray(u, dtype=float)
    inner = (u > 0.0) & (u < 1.0)
    out = np.zeros_like(u)
    if np.any(inner):
        out[inner] = normal_pdf(np.asarray(normal_quantile(u[inner])))
    return out


def quantile_antiderivative(u: ArrayLike, law: NormalLaw) -> ArrayLike:
    """:math:`\\int_0^u G^{-1}(w)\\,dw` para la ley normal ``law``."""
    arr = np.asarray(u, dtype=float)
    return _scalar_or_array(u, law.mean * arr - law.std * _phi_at_quantile(arr))


def partial_quantile_integral(a: float, b: float, law: NormalLaw) -> float:
    """Calcula :math:`\\int_a^b G^{-1}(u)\\,du` en forma cerrada.

    :raises KyleDomainError: Si no se cumple :math:`0 \\le a \\le b \\le 1`.
    """
    if not (0.0 <= a <= b <= 1.0):
        raise KyleDomainError("partial_quantile_integral: se requiere 0 <= a <= b <= 1")
    phi_a, phi_b = _phi_at_quantile(np.array([a, b]))
    return float(law.std * (phi_a - phi_b) + law.mean * (b - a))


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Ley discreta sobre átomos estrictamente crecientes."""
    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = _frozen(self.atoms, "prior.atoms")
        probs = _frozen(self.probs, "prior.probs")
        if atoms.size != probs.size:
            raise KyleConfigError("prior: átomos y probabilidades de distinto tamaño")
        if atoms.size < 2:
            raise KyleConfigError("prior.atoms: se requieren al menos dos átomos")
        if not np.all(np.isfinite(atoms)) or not np.all(np.diff(atoms) > 0):
            raise KyleConfigError("prior.atoms: deben ser finitos y estrictamente crecientes")
        if not np.all(probs >= 0):
            raise KyleConfigError("prior.probs: las probabilidades deben ser no negativas")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise KyleConfigError("prior.probs: las probabilidades deben sumar 1")
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'probs', probs)

    @property
    def size(self) -> int:
        return self.atoms.size

    @property
    def support(self) -> np.ndarray:
        """Máscara de los átomos con masa no despreciable."""
        return self.probs >= PRUNE_MASS

    def moment(self, k: int, central: bool = False) -> float:
        c = self.mean() if central else 0.0
        return float(np.dot(self.probs, (self.atoms - c) ** k))

    def mean(self) -> float:
        return float(np.dot(self.probs, self.atoms))

    def variance(self) -> float:
        return self.moment(2, central=True)

    def entropy(self) -> float:
        return float(-special.xlogy(self.probs, self.probs).sum())

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.atoms, -self.atoms[::-1], atol=tol) and
                    np.allclose(self.probs, self.probs[::-1], atol=tol))

    def __repr__(self) -> str:
        return f"<DiscreteDist [N={self.size}]>"


@dataclass(frozen=True, eq=False)
class GridDist:
    """Ley continua representada por su densidad y su cdf en una malla.

    Use :meth:`from_density` para construirla; la cdf se obtiene integrando
    la densidad por trapecios. Si se dan ``weights``, los momentos usan esas
    masas por nodo en lugar de las trapezoidales.
    """
    nodes: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    truncated_mass: float = 0.0
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        nodes = _frozen(self.nodes, "GridDist.nodes")
        density = _frozen(self.density, "GridDist.density")
        cdf = _frozen(self.cdf, "GridDist.cdf")
        if not (nodes.size == density.size == cdf.size) or nodes.size < 2:
            raise KyleConfigError("GridDist: malla, densidad y cdf de tamaños incompatibles")
        if not np.all(np.diff(nodes) > 0):
            raise KyleConfigError("GridDist.nodes: la malla debe ser estrictamente creciente")
        if not np.all(density >= 0) or not np.all(np.isfinite(density)):
            raise KyleConfigError("GridDist.density: la densidad debe ser finita y no negativa")
        cells = 0.5 * (density[1:] + density[:-1]) * np.diff(nodes)
        if abs(cells.sum() - 1.0) > 1e-8:
            raise KyleConfigError("GridDist.density: la densidad no integra 1")
        if np.any(cdf < -1e-12) or np.any(cdf > 1 + 1e-12):
            raise KyleConfigError("GridDist.cdf: valores fuera de [0, 1]")
        if np.max(np.abs(np.diff(cdf) - cells)) > 1e-10:
            raise KyleConfigError("GridDist.cdf: inconsistente con la densidad")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'density', density)
        object.__setattr__(self, 'cdf', cdf)
        if self.weights is not None:
            weights = _frozen(self.weights, "GridDist.weights")
            if weights.size != nodes.size or np.any(weights < 0):
                raise KyleConfigError("GridDist.weights: masas incompatibles con la malla")
            if abs(weights.sum() - 1.0) > 1e-8:
                raise KyleConfigError("GridDist.weights: las masas deben sumar 1")
            object.__setattr__(self, 'weights', weights)

    @classmethod
    def from_density(cls, nodes, density, normalize: bool = True,
                     truncated_mass: float = 0.0, weights=None) -> 'GridDist':
        """Construye la ley a partir de valores de densidad en la malla.

        :param normalize: Reescalar la densidad para que su integral
            trapezoidal sea exactamente 1.
        :param weights: Masas por nodo para los momentos, p. ej. las de una
            cuadratura en otra variable.
        """
        nodes = np.asarray(nodes, dtype=float)
        density = np.asarray(density, dtype=float)
        total = float(np.dot(trapezoid_weights(nodes), density))
        if normalize:
            if not (total > 0 and np.isfinite(total)):
                raise KyleNumericError("GridDist: la densidad no es integrable en la malla")
            density = density / total
        cdf = cumulative_trapezoid(density, nodes, initial=0.0)
        return cls(nodes=nodes, density=density, cdf=cdf, truncated_mass=truncated_mass,
                   weights=weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def trapezoid_weights(self) -> np.ndarray:
        return trapezoid_weights(self.nodes)

    @property
    def quadrature_weights(self) -> np.ndarray:
        """Pesos :math:`\\omega_i` en :math:`v` con masas :math:`\\omega_i \\rho(v_i)`."""
        if self.weights is None:
            return self.trapezoid_weights
        positive = self.density > 0
        return np.where(positive, self.weights / np.where(positive, self.density, 1.0),
                        self.trapezoid_weights)

    @property
    def masses(self) -> np.ndarray:
        """Masa asociada a cada nodo (suma 1); trapezoidal salvo que haya ``weights``."""
        if self.weights is not None:
            return self.weights
        return self.trapezoid_weights * self.density

    def pdf(self, v: ArrayLike) -> ArrayLike:
        arr = np.asarray(v, dtype=float)
        return _scalar_or_array(v, np.interp(arr, self.nodes, self.density, left=0.0, right=0.0))

    def moment(self, k: int, central: bool = False) -> float:
        c = self.mean() if central else 0.0
        return float(np.dot(self.masses, (self.nodes - c) ** k))

    def mean(self) -> float:
        return float(np.dot(self.masses, self.nodes))

    def variance(self) -> float:
        return self.moment(2, central=True)

    def entropy(self) -> float:
        """Entropía diferencial con los pesos de la malla."""
        return float(-np.dot(self.quadrature_weights, special.xlogy(self.density, self.density)))

    def __repr__(self) -> str:
        return f"<GridDist [{self.size} nodos en ({self.nodes[0]:.4g}, {self.nodes[-1]:.4g})]>"


def double_exponential_grid(scale: float = 1.0, n_nodes: int = 2001,
                            tail: float = 1e-8) -> GridDist:
    """Prior doble exponencial :math:`\\rho(v) = e^{-|v|/b}/(2b)` en una malla
    que cubre los cuantiles ``tail`` y ``1 - tail``.

    La malla tiene un número impar de nodos para que el pico en 0 sea nodo;
    las masas usan pesos de Gregory en cada mitad, donde la densidad es suave.
    """
    if not scale > 0:
        raise KyleConfigError("prior.scale: debe ser positiva")
    if n_nodes < 15 or n_nodes % 2 == 0:
        raise KyleConfigError("prior.nodes: se requiere un número impar de nodos, al menos 15")
    half = -scale * np.log(2.0 * tail)
    mid = n_nodes // 2
    nodes = np.linspace(-half, half, n_nodes)
    nodes[mid] = 0.0
    density = np.exp(-np.abs(nodes) / scale) / (2.0 * scale)
    omega = np.zeros(n_nodes)
    omega[:mid + 1] += gregory_weights(nodes[:mid + 1])
    omega[mid:] += gregory_weights(nodes[mid:])
    masses = omega * density
    return GridDist.from_density(nodes, density, weights=masses / masses.sum())


def normal_grid(mean: float = 0.0, std: float = 1.0, n_nodes: int = 2001,
                tail: float = 1e-8) -> GridDist:
    """Prior normal discretizado en una malla que cubre sus cuantiles ``tail``."""
    law = NormalLaw(mean, std)
    half = -std * float(normal_quantile(tail))
    nodes = np.linspace(mean - half, mean + half, n_nodes)
    return GridDist.from_density(nodes, law.pdf(nodes))
