#!/usr/bin/env python3

from __future__ import annotations

import numpy as np
from kyle import DiscreteDist, NormalLaw
from hypothesis.strategies import composite, floats, integers, lists, sampled_from


class LawStrats:
    """Contiene estrategias de :class:`hypothesis` para generar leyes normales."""

    @classmethod
    @composite
    def normal_laws(draw, cls, min_std: float = 0.1, max_std: float = 5.0,
                    centered: bool = False) -> NormalLaw:
        """Genera una ley normal con media acotada."""
        mean = 0.0 if centered else draw(floats(-3.0, 3.0))
        std = draw(floats(min_std, max_std))
        return NormalLaw(mean, std)

    @classmethod
    @composite
    def probabilities(draw, cls, low: float = 1e-6) -> float:
        """Genera una probabilidad en el intervalo abierto (0, 1)."""
        return draw(floats(low, 1.0 - low))


class PriorStrats:
    """Contiene estrategias de :class:`hypothesis` para generar priors discretos."""

    @classmethod
    @composite
    def discrete(draw, cls, min_atoms: int = 2, max_atoms: int = 4) -> DiscreteDist:
        """Genera un prior discreto con átomos separados y masas no despreciables."""
        n = draw(integers(min_atoms, max_atoms))
        gaps = draw(lists(floats(0.5, 2.0), min_size=n - 1, max_size=n - 1))
        start = draw(floats(-2.0, 0.0))
        atoms = start + np.concatenate([[0.0], np.cumsum(gaps)])
        weights = np.asarray(draw(lists(floats(0.1, 1.0), min_size=n, max_size=n)))
        return DiscreteDist(atoms, weights / weights.sum())

    @classmethod
    @composite
    def two_state(draw, cls, symmetric: bool = False) -> DiscreteDist:
        """Genera un prior de dos estados :math:`\\{-2, 2\\}`."""
        p = 0.5 if symmetric else draw(floats(0.1, 0.9))
        return DiscreteDist([-2.0, 2.0], [p, 1.0 - p])

    @classmethod
    @composite
    def lambdas(draw, cls) -> float:
        """Genera un costo de información en una malla moderada."""
        return draw(sampled_from((0.5, 1.0, 2.0, 4.0, 8.0)))
