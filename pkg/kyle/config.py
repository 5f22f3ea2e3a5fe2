"""
Lectura y validación de archivos de experimento en JSON.

El esquema está documentado en ``docs/config.rst``. Todo error de validación
se reporta como :class:`KyleConfigError` con la ruta del campo, por ejemplo
``model.lambda: debe ser positivo``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np

from .dist import DiscreteDist, GridDist, NormalLaw, double_exponential_grid, normal_grid
from .exceptions import KyleConfigError
from .infoacq import DEFAULT_MS, ModelParams

__all__ = ["Experiment", "PriorSpec", "SolverSpec", "SweepSpec", "DiscreteSpec",
           "SimulationSpec", "ExperimentConfig", "load_config", "parse_config"]

logger = logging.getLogger(__name__)


class Experiment(str, Enum):
    NORMAL_PRIOR = 'normal-prior'
    TWO_STATE = 'two-state'
    CONTINUOUS_PAYOFF = 'continuous-payoff'
    DISCRETE_M_SWEEP = 'discrete-M-sweep'
    SIMULATE = 'simulate'
    SWEEP = 'sweep'


_TOP_LEVEL = {'experiment', 'prior', 'model', 'sweep', 'solver', 'discrete', 'simulation',
              'output', 'seed'}


def _section(data: Mapping, key: str) -> Mapping:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise KyleConfigError(f"{key}: debe ser un objeto")
    unknown = set(value) - set(_FIELDS.get(key, value))
    if unknown:
        raise KyleConfigError(f"{key}.{sorted(unknown)[0]}: campo desconocido")
    return value


def _number(section: Mapping, path: str, key: str, default=None, positive: bool = True) -> float:
    value = section.get(key, default)
    if value is None:
        raise KyleConfigError(f"{path}.{key}: campo requerido")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise KyleConfigError(f"{path}.{key}: debe ser numérico")
    if not np.isfinite(value) or (positive and value <= 0):
        raise KyleConfigError(f"{path}.{key}: debe ser positivo y finito")
    return float(value)


def _integer(section: Mapping, path: str, key: str, default=None, minimum: int = 1) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise KyleConfigError(f"{path}.{key}: debe ser entero")
    if value < minimum:
        raise KyleConfigError(f"{path}.{key}: debe ser al menos {minimum}")
    return value


def _vector(section: Mapping, path: str, key: str) -> tuple:
    value = section.get(key)
    if not isinstance(value, list) or not value:
        raise KyleConfigError(f"{path}.{key}: debe ser una lista no vacía")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise KyleConfigError(f"{path}.{key}: todos los elementos deben ser numéricos")
    return tuple(float(x) for x in value)


_FIELDS = {
    'prior': ('kind', 'atoms', 'probs', 'mean', 'std', 'nodes', 'scale'),
    'model': ('lambda', 'sigma_Z', 'T'),
    'solver': ('tol', 'max_iter', 'quad'),
    'sweep': ('axis', 'grid'),
    'discrete': ('M', 'restarts'),
    'simulation': ('n_paths', 'n_steps', 't_epsilon'),
}


@dataclass(frozen=True)
class PriorSpec:
    """Ley del pago: ``discrete``, ``normal`` o ``double-exponential``."""
    kind: str
    atoms: tuple = ()
    probs: tuple = ()
    mean: float = 0.0
    std: float = 1.0
    nodes: int = 2001
    scale: float = 1.0

    @classmethod
    def parse(cls, data: Mapping) -> 'PriorSpec':
        kind = data.get('kind')
        if kind == 'discrete':
            atoms = _vector(data, 'prior', 'atoms')
            probs = _vector(data, 'prior', 'probs')
            spec = cls(kind, atoms=atoms, probs=probs)
            spec.build()
            return spec
        if kind == 'normal':
            return cls(kind, mean=_number(data, 'prior', 'mean', 0.0, positive=False),
                       std=_number(data, 'prior', 'std', 1.0),
                       nodes=_integer(data, 'prior', 'nodes', 2001, minimum=3))
        if kind == 'double-exponential':
            spec = cls(kind, scale=_number(data, 'prior', 'scale', 1.0),
                       nodes=_integer(data, 'prior', 'nodes', 2001, minimum=15))
            spec.build()
            return spec
        raise KyleConfigError(f"prior.kind: tipo desconocido '{kind}'")

    def build(self) -> Union[DiscreteDist, GridDist]:
        """Ley discreta o en malla lista para los solucionadores."""
        if self.kind == 'discrete':
            try:
                return DiscreteDist(self.atoms, self.probs)
            except KyleConfigError as e:
                raise KyleConfigError(f"prior: {e}") from e
        if self.kind == 'normal':
            return normal_grid(self.mean, self.std, self.nodes)
        return double_exponential_grid(self.scale, self.nodes)

    @property
    def law(self) -> Optional[NormalLaw]:
        return NormalLaw(self.mean, self.std) if self.kind == 'normal' else None


@dataclass(frozen=True)
class SolverSpec:
    tol: float = 1e-10
    max_iter: int = 100_000
    quad: int = 256


@dataclass(frozen=True)
class SweepSpec:
    axis: str = 'lambda'
    grid: tuple = ()


@dataclass(frozen=True)
class DiscreteSpec:
    M: tuple = DEFAULT_MS
    restarts: int = 8


@dataclass(frozen=True)
class SimulationSpec:
    n_paths: int = 100_000
    n_steps: int = 10_000
    t_epsilon: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuración validada de un experimento."""
    experiment: Experiment
    prior: PriorSpec
    lam: float = 1.0
    sigma_Z: float = 1.0
    T: float = 1.0
    solver: SolverSpec = field(default_factory=SolverSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    discrete: DiscreteSpec = field(default_factory=DiscreteSpec)
    simulation: SimulationSpec = field(default_factory=SimulationSpec)
    output: str = 'out'
    seed: int = 0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.lam, self.sigma_Z, self.T, self.prior.build())

    def override(self, seed: Optional[int] = None, tol: Optional[float] = None,
                 quad: Optional[int] = None, out: Optional[str] = None) -> 'ExperimentConfig':
        """Aplica las opciones de la línea de comandos sobre el archivo."""
        cfg = self
        if seed is not None:
            if seed < 0 or seed >= 2 ** 64:
                raise KyleConfigError("seed: debe ser un entero de 64 bits sin signo")
            cfg = replace(cfg, seed=seed)
        if tol is not None:
            if not (np.isfinite(tol) and tol > 0):
                raise KyleConfigError("solver.tol: debe ser positivo y finito")
            cfg = replace(cfg, solver=replace(cfg.solver, tol=tol))
        if quad is not None:
            if quad < 2:
                raise KyleConfigError("solver.quad: debe ser al menos 2")
            cfg = replace(cfg, solver=replace(cfg.solver, quad=quad))
        if out is not None:
            cfg = replace(cfg, output=out)
        return cfg

    def as_dict(self) -> dict:
        """Eco JSON-serializable de la configuración."""
        data = asdict(self)
        data['experiment'] = self.experiment.value
        data['model'] = {'lambda': data.pop('lam'), 'sigma_Z': data.pop('sigma_Z'),
                         'T': data.pop('T')}
        return data


def parse_config(data: Mapping[str, Any]) -> ExperimentConfig:
    """Valida un objeto de configuración.

    :raises KyleConfigError: Con la ruta del primer campo inválido.
    """
    if not isinstance(data, Mapping):
        raise KyleConfigError("config: el archivo debe contener un objeto JSON")
    unknown = set(data) - _TOP_LEVEL
    if unknown:
        raise KyleConfigError(f"{sorted(unknown)[0]}: campo desconocido")

    tag = data.get('experiment')
    try:
        experiment = Experiment(tag)
    except ValueError:
        raise KyleConfigError(f"experiment: experimento desconocido '{tag}'") from None

    prior = PriorSpec.parse(_section(data, 'prior'))

    model = _section(data, 'model')
    lam = _number(model, 'model', 'lambda', 1.0)
    sigma_Z = _number(model, 'model', 'sigma_Z', 1.0)
    T = _number(model, 'model', 'T', 1.0)

    solver = _section(data, 'solver')
    solver_spec = SolverSpec(tol=_number(solver, 'solver', 'tol', 1e-10),
                             max_iter=_integer(solver, 'solver', 'max_iter', 100_000),
                             quad=_integer(solver, 'solver', 'quad', 256, minimum=2))

    sweep = _section(data, 'sweep')
    axis = sweep.get('axis', 'lambda')
    if axis not in ('lambda', 'sigma_Z'):
        raise KyleConfigError(f"sweep.axis: eje desconocido '{axis}'")
    grid = _vector(sweep, 'sweep', 'grid') if 'grid' in sweep or experiment is Experiment.SWEEP else ()
    if any(not (np.isfinite(x) and x > 0) for x in grid):
        raise KyleConfigError("sweep.grid: los valores deben ser positivos")

    discrete = _section(data, 'discrete')
    Ms = discrete.get('M', list(DEFAULT_MS))
    if (not isinstance(Ms, list) or not Ms
            or not all(isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in Ms)):
        raise KyleConfigError("discrete.M: debe ser una lista de enteros positivos")
    discrete_spec = DiscreteSpec(M=tuple(Ms),
                                 restarts=_integer(discrete, 'discrete', 'restarts', 8))

    sim = _section(data, 'simulation')
    sim_spec = SimulationSpec(n_paths=_integer(sim, 'simulation', 'n_paths', 100_000),
                              n_steps=_integer(sim, 'simulation', 'n_steps', 10_000, minimum=100),
                              t_epsilon=_number(sim, 'simulation', 't_epsilon', 1e-3 * T))
    if sim_spec.t_epsilon >= T / 10:
        raise KyleConfigError("simulation.t_epsilon: debe ser menor que T/10")

    output = data.get('output', 'out')
    if not isinstance(output, str) or not output:
        raise KyleConfigError("output: debe ser una ruta")
    seed = data.get('seed', 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise KyleConfigError("seed: debe ser un entero de 64 bits sin signo")

    if experiment in (Experiment.TWO_STATE, Experiment.DISCRETE_M_SWEEP) and prior.kind != 'discrete':
        raise KyleConfigError(f"prior.kind: '{experiment.value}' requiere un prior discreto")
    if experiment is Experiment.TWO_STATE and len(prior.atoms) != 2:
        raise KyleConfigError("prior.atoms: 'two-state' requiere dos átomos")
    if experiment is Experiment.NORMAL_PRIOR and prior.kind != 'normal':
        raise KyleConfigError("prior.kind: 'normal-prior' requiere un prior normal")
    if experiment is Experiment.CONTINUOUS_PAYOFF and prior.kind == 'discrete':
        raise KyleConfigError("prior.kind: 'continuous-payoff' requiere un prior continuo")

    return ExperimentConfig(experiment=experiment, prior=prior, lam=lam, sigma_Z=sigma_Z, T=T,
                            solver=solver_spec, sweep=SweepSpec(axis, grid),
                            discrete=discrete_spec, simulation=sim_spec, output=output,
                            seed=seed)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Lee y valida un archivo de experimento."""
    try:
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
    except OSError as e:
        raise KyleConfigError(f"config: no se puede leer '{path}': {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise KyleConfigError(f"config: JSON inválido en la línea {e.lineno}: {e.msg}") from e
    logger.debug("Configuración leída de %s", path)
    return parse_config(data)
