"""
Clases de excepciones de KyleSuite
"""

from __future__ import annotations

from typing import Optional


# Clase base
class KyleValueError(ValueError):
    """Indica que un cálculo de KyleSuite no pudo completarse."""


class KyleDomainError(KyleValueError):
    """Un argumento se encuentra fuera del dominio matemático de la operación."""


class KyleConfigError(KyleValueError):
    """Los parámetros o la configuración del experimento no son válidos.

    El mensaje nombra el campo con su ruta, por ejemplo ``model.lambda``.
    """


class KyleNumericError(KyleValueError):
    """Una cuadratura o función cuantil produjo valores no finitos."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class KyleConvergenceError(KyleValueError):
    """El algoritmo de Sinkhorn no convergió en el número de iteraciones permitido."""

    def __init__(self, message: str, residual: float = float('nan'), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class KyleSimulationError(KyleValueError):
    """Demasiadas trayectorias de la simulación fueron rechazadas."""

    def __init__(self, message: str, rejected: int = 0, total: int = 0):
        super().__init__(message)
        self.rejected = rejected
        self.total = total
