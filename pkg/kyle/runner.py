"""
Orquestación de experimentos a partir de una :class:`ExperimentConfig`.
"""

from __future__ import annotations

import logging
import time
from enum import IntEnum
from pathlib import Path
from typing import List, NamedTuple

from .config import Experiment, ExperimentConfig
from .dist import gauss_hermite_rule
from .exceptions import KyleConfigError, KyleValueError
from .infoacq import (build_posterior, comparative_statics_sweep, optimal_value,
                      solve_model, solve_normal_prior, value_convergence)
from .kylesim import SimConfig, analytic_expected_profit, simulate_equilibrium
from .output import ensure_dir, write_csv, write_json, write_manifest

__all__ = ["ExitStatus", "RunResult", "run_config", "run_sinkhorn", "run_simulation"]

logger = logging.getLogger(__name__)


class ExitStatus(IntEnum):
    OK = 0
    CONFIG_ERROR = 2
    SOLVER_FAILURE = 3
    PARTIAL = 4


class RunResult(NamedTuple):
    status: ExitStatus
    artifacts: List[Path]
    residuals: dict


_REPORT_COLUMNS = ('value', 'value_decomposed', 'expected_profit', 'info_cost',
                   'mutual_information', 'profit_potential', 'leakage_w2sq', 'w2sq',
                   'gelbrich_residual', 'mean', 'variance', 'skewness', 'kurtosis', 'residual')


def _rule(cfg: ExperimentConfig):
    return gauss_hermite_rule(cfg.solver.quad)


def _solve(cfg: ExperimentConfig):
    params = cfg.params
    mu = solve_model(params, _rule(cfg), cfg.solver.tol, cfg.solver.max_iter)
    return params, mu


def _report(cfg: ExperimentConfig, out: Path) -> RunResult:
    params, mu = _solve(cfg)
    report = optimal_value(params, mu, _rule(cfg))
    data = {'report': report.as_dict(), 'iterations': mu.iterations}
    if cfg.experiment is Experiment.NORMAL_PRIOR:
        closed = solve_normal_prior(cfg.prior.std, params)
        data['normal_prior'] = closed._asdict()
        data['normal_prior']['variance_target'] = closed.xi_star * cfg.prior.std ** 2
    path = write_json(out / 'report.json', data)
    return RunResult(ExitStatus.OK, [path], {'sinkhorn': mu.residual})


def _convergence(cfg: ExperimentConfig, out: Path) -> RunResult:
    params = cfg.params
    table = value_convergence(params.prior, cfg.discrete.M, params, cfg.discrete.restarts,
                              cfg.seed, _rule(cfg))
    rows = [(r.M, r.value, r.variance, r.leakage_w2sq, r.info_cost, r.dispersion, r.monotone,
             ' '.join(repr(q) for q in r.q)) for r in table.rows]
    path = write_csv(out / 'convergence.csv',
                     ('M', 'value', 'variance', 'w2sq_centered', 'info_cost', 'dispersion',
                      'monotone', 'q'),
                     rows, {**cfg.as_dict(), 'continuous_value': table.continuous_value})
    return RunResult(ExitStatus.OK, [path], {'continuous_value': table.continuous_value})


def _sweep(cfg: ExperimentConfig, out: Path) -> RunResult:
    params = cfg.params
    if not cfg.sweep.grid:
        raise KyleConfigError("sweep.grid: la malla no puede estar vacía")
    table = comparative_statics_sweep(params.prior, cfg.sweep.axis, cfg.sweep.grid, params,
                                      _rule(cfg), cfg.solver.tol, cfg.solver.max_iter)
    nan = float('nan')
    rows = []
    for r in table.rows:
        values = (tuple(getattr(r.report, c) for c in _REPORT_COLUMNS) if r.report
                  else (nan,) * len(_REPORT_COLUMNS))
        rows.append((r.x,) + values + (r.error or '',))
    path = write_csv(out / 'sweep.csv', (cfg.sweep.axis,) + _REPORT_COLUMNS + ('error',),
                     rows, cfg.as_dict())
    residuals = {f"{cfg.sweep.axis}={r.x:g}": r.report.residual
                 for r in table.rows if r.report is not None}
    status = ExitStatus.PARTIAL if table.partial else ExitStatus.OK
    if table.partial:
        logger.warning("Barrido parcial: %d de %d puntos fallaron", len(table.failed),
                       len(table.rows))
    return RunResult(status, [path], residuals)


def run_simulation(cfg: ExperimentConfig, out: Path) -> RunResult:
    """Simula el equilibrio y escribe ``simulation.json``."""
    params, mu = _solve(cfg)
    kernel = build_posterior(params, mu)
    F = kernel.posterior_mean_quantile()
    sim_cfg = SimConfig(cfg.simulation.n_paths, cfg.simulation.n_steps,
                        cfg.simulation.t_epsilon, cfg.seed, params, F)
    result = simulate_equilibrium(sim_cfg, kernel)
    analytic = analytic_expected_profit(F, params)
    data = {'result': result.as_dict(), 'analytic_expected_profit': analytic,
            'z_score': ((result.profit_with_tail - analytic) / result.profit_std_error
                        if result.profit_std_error > 0 else None)}
    path = write_json(out / 'simulation.json', data)
    return RunResult(ExitStatus.OK, [path], {'sinkhorn': mu.residual})


def run_sinkhorn(cfg: ExperimentConfig, out: Path) -> RunResult:
    """Sólo resuelve los multiplicadores y escribe su traza de residuos."""
    params, mu = _solve(cfg)
    prior = params.prior
    atoms = prior.atoms if hasattr(prior, 'atoms') else prior.nodes
    echo = cfg.as_dict()
    trace = write_csv(out / 'residual_trace.csv', ('iteration', 'residual'),
                      enumerate(mu.trace), echo)
    multipliers = write_csv(out / 'multipliers.csv', ('v', 'mu'), zip(atoms, mu.mu), echo)
    return RunResult(ExitStatus.OK, [trace, multipliers],
                     {'sinkhorn': mu.residual, 'iterations': mu.iterations})


_DISPATCH = {
    Experiment.NORMAL_PRIOR: _report,
    Experiment.TWO_STATE: _report,
    Experiment.CONTINUOUS_PAYOFF: _report,
    Experiment.DISCRETE_M_SWEEP: _convergence,
    Experiment.SWEEP: _sweep,
    Experiment.SIMULATE: run_simulation,
}


def run_config(cfg: ExperimentConfig, action=None) -> RunResult:
    """Ejecuta el experimento y escribe sus archivos junto con ``manifest.json``.

    Los errores de validación regresan el estado 2 y las fallas del
    solucionador el estado 3; ambos quedan registrados en el manifiesto.
    """
    out = ensure_dir(cfg.output)
    action = action or _DISPATCH[cfg.experiment]
    start = time.perf_counter()
    extra = {}
    try:
        result = action(cfg, out)
    except KyleConfigError as e:
        logger.error("Configuración inválida: %s", e)
        result = RunResult(ExitStatus.CONFIG_ERROR, [], {})
        extra['error'] = str(e)
    except KyleValueError as e:
        logger.error("Falla del solucionador: %s", e)
        result = RunResult(ExitStatus.SOLVER_FAILURE, [], {})
        extra['error'] = str(e)
        extra['diagnostics'] = {k: getattr(e, k) for k in ('residual', 'iterations', 'index',
                                                             'rejected', 'total')
                                if hasattr(e, k)}
    wall = time.perf_counter() - start

    manifest = write_manifest(out, cfg.as_dict(), result.residuals, wall, result.artifacts,
                              int(result.status), extra)
    logger.info("Experimento %s terminado con estado %d en %.2f s", cfg.experiment.value,
                result.status, wall)
    return result._replace(artifacts=result.artifacts + [manifest])
