"""
Datos y gráficas de las figuras de referencia.

Los parámetros de cada figura están fijos y no se leen de la configuración.
Cada panel produce un CSV y un SVG dentro del directorio de la figura.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from .dist import DiscreteDist, double_exponential_grid, gauss_hermite_rule
from .exceptions import KyleConfigError
from .infoacq import (DEFAULT_MS, ModelParams, build_posterior, optimal_value,
                      posterior_mean_law, solve_model, two_state_density, value_convergence)
from .output import Panel, ensure_dir, plot_panel, write_csv

__all__ = ["FIGURES", "FigureSpec", "run_figure", "figure_panels"]

logger = logging.getLogger(__name__)

LAMBDA_GRID = (1.0, 2.0, 4.0, 8.0)
SIGMA_GRID = (0.25, 0.5, 1.0, 2.0)
CONT_LAMBDA_GRID = (0.05, 0.25, 1.0, 5.0, 20.0)
CONT_SIGMA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)

TWO_STATE_ATOMS = (-2.0, 2.0)
SYMMETRIC = (0.5, 0.5)
ASYMMETRIC = (0.3, 0.7)

# Malla más gruesa para el pago continuo; lambda = 0.05 vuelve lenta a Sinkhorn
CONT_NODES = 1001


@dataclass(frozen=True)
class FigureSpec:
    directory: str
    build: Callable[[], tuple]
    params: dict


def _label(axis: str, x: float) -> str:
    return f"{axis}={x:g}"


def _two_state_panels(probs: tuple, axis: str, grid: tuple) -> tuple:
    """Densidad de la media posterior, posterior de :math:`v_2`, distancias y momentos."""
    payoff = DiscreteDist(TWO_STATE_ATOMS, probs)
    base = ModelParams(1.0, 1.0, 1.0, payoff)
    v = np.linspace(*TWO_STATE_ATOMS, 403)[1:-1]
    z = np.linspace(-4.0, 4.0, 401)
    rule = gauss_hermite_rule()

    densities, posteriors, distances, moments = [], [], [], []
    for x in grid:
        params = base.with_axis(axis, x)
        mu = solve_model(params, rule)
        report = optimal_value(params, mu, rule)
        kernel = build_posterior(params, mu)
        densities.append(two_state_density(v, params, mu.mu[0], mu.mu[1]))
        posteriors.append(kernel.posterior(z)[:, 1])
        distances.append((x, report.leakage_w2sq, report.gelbrich_residual))
        moments.append((x, report.skewness, report.kurtosis))
        logger.info("%s=%g: varianza %.6f, curtosis %.6f", axis, x, report.variance,
                    report.kurtosis)

    labels = tuple(_label(axis, x) for x in grid)
    return (
        Panel('panelA', ('v',) + labels, tuple(zip(v, *densities)),
              title='Densidad de E[v|s]', ylabel='densidad'),
        Panel('panelB', ('z',) + labels, tuple(zip(z, *posteriors)),
              title='Posterior p(v2|z)', ylabel='probabilidad'),
        Panel('panelC', (axis, 'w2sq_centered', 'gelbrich_residual'), tuple(distances),
              title='Distancia W2 a la ley del ruido'),
        Panel('panelD', (axis, 'skewness', 'kurtosis'), tuple(moments),
              title='Asimetría y curtosis'),
    )


def _convergence_panels(probs: tuple) -> tuple:
    payoff = DiscreteDist(TWO_STATE_ATOMS, probs)
    params = ModelParams(2.0, 1.0, 1.0, payoff)
    table = value_convergence(payoff, DEFAULT_MS, params)
    rows = table.rows
    return (
        Panel('panelA', ('M', 'value', 'continuous_value'),
              tuple((r.M, r.value, table.continuous_value) for r in rows),
              title='Valor óptimo'),
        Panel('panelB', ('M', 'variance'), tuple((r.M, r.variance) for r in rows),
              title='Varianza de E[v|s]'),
        Panel('panelC', ('M', 'w2sq_centered'), tuple((r.M, r.leakage_w2sq) for r in rows),
              title='W2 centrada'),
        Panel('panelD', ('M', 'info_cost'), tuple((r.M, r.info_cost) for r in rows),
              title='Costo de información'),
        Panel('table', ('M', 'value', 'variance', 'w2sq_centered', 'info_cost', 'dispersion',
                        'monotone'),
              tuple((r.M, r.value, r.variance, r.leakage_w2sq, r.info_cost, r.dispersion,
                     r.monotone) for r in rows)),
    )


def _continuous_panels(axis: str, grid: tuple) -> tuple:
    payoff = double_exponential_grid(1.0, CONT_NODES)
    base = ModelParams(1.0, 1.0, 1.0, payoff)
    v = np.linspace(-6.0, 6.0, 601)
    rule = gauss_hermite_rule()

    densities, moments = [], []
    for x in grid:
        params = base.with_axis(axis, x)
        mu = solve_model(params, rule)
        report = optimal_value(params, mu, rule)
        law = posterior_mean_law(build_posterior(params, mu))
        densities.append(np.asarray(law.pdf(v)))
        moments.append((x, report.kurtosis))
        logger.info("%s=%g: curtosis %.6f", axis, x, report.kurtosis)

    labels = tuple(_label(axis, x) for x in grid)
    return (
        Panel('panelA', ('v',) + labels, tuple(zip(v, *densities)),
              title='Densidad de E[v|z]', ylabel='densidad'),
        Panel('panelB', (axis, 'kurtosis'), tuple(moments), title='Curtosis'),
    )


def _two_state_params(probs, axis, grid, fixed) -> dict:
    return {'atoms': list(TWO_STATE_ATOMS), 'probs': list(probs), axis: list(grid),
            'T': 1.0, **fixed}


FIGURES: Dict[str, FigureSpec] = {
    'fig1': FigureSpec('sym_pri_lam', lambda: _two_state_panels(SYMMETRIC, 'lambda', LAMBDA_GRID),
                       _two_state_params(SYMMETRIC, 'lambda', LAMBDA_GRID, {'sigma_Z': 1.0})),
    'fig2': FigureSpec('sym_pri_sig', lambda: _two_state_panels(SYMMETRIC, 'sigma_Z', SIGMA_GRID),
                       _two_state_params(SYMMETRIC, 'sigma_Z', SIGMA_GRID, {'lambda': 1.0})),
    'fig3': FigureSpec('sym_conv', lambda: _convergence_panels(SYMMETRIC),
                       {'atoms': list(TWO_STATE_ATOMS), 'probs': list(SYMMETRIC), 'lambda': 2.0,
                        'sigma_Z': 1.0, 'T': 1.0, 'M': list(DEFAULT_MS)}),
    'fig4': FigureSpec('cont_payoff_lam', lambda: _continuous_panels('lambda', CONT_LAMBDA_GRID),
                       {'prior': 'double-exponential', 'scale': 1.0, 'nodes': CONT_NODES,
                        'lambda': list(CONT_LAMBDA_GRID), 'sigma_Z': 1.0, 'T': 1.0}),
    'fig5': FigureSpec('cont_payoff_sig', lambda: _continuous_panels('sigma_Z', CONT_SIGMA_GRID),
                       {'prior': 'double-exponential', 'scale': 1.0, 'nodes': CONT_NODES,
                        'sigma_Z': list(CONT_SIGMA_GRID), 'lambda': 1.0, 'T': 1.0}),
    'figB1': FigureSpec('asy_pri_lam', lambda: _two_state_panels(ASYMMETRIC, 'lambda', LAMBDA_GRID),
                        _two_state_params(ASYMMETRIC, 'lambda', LAMBDA_GRID, {'sigma_Z': 1.0})),
    'figB2': FigureSpec('asy_pri_sig', lambda: _two_state_panels(ASYMMETRIC, 'sigma_Z', SIGMA_GRID),
                        _two_state_params(ASYMMETRIC, 'sigma_Z', SIGMA_GRID, {'lambda': 1.0})),
    'figB3': FigureSpec('asy_conv', lambda: _convergence_panels(ASYMMETRIC),
                        {'atoms': list(TWO_STATE_ATOMS), 'probs': list(ASYMMETRIC),
                         'lambda': 2.0, 'sigma_Z': 1.0, 'T': 1.0, 'M': list(DEFAULT_MS)}),
}


def figure_panels(name: str) -> tuple:
    """Tablas de los paneles de la figura ``name`` sin escribir archivos."""
    try:
        spec = FIGURES[name]
    except KeyError:
        raise KyleConfigError(f"figure: figura desconocida '{name}'") from None
    return spec.build()


def run_figure(name: str, out_dir) -> List[Path]:
    """Escribe un CSV y un SVG por panel en ``out_dir/<directorio de la figura>``.

    :raises KyleConfigError: Si la figura no existe o el directorio no se
        puede escribir.
    """
    if name not in FIGURES:
        raise KyleConfigError(f"figure: figura desconocida '{name}'")
    spec = FIGURES[name]
    target = ensure_dir(Path(out_dir) / spec.directory)
    params = {'figure': name, **spec.params}

    written = []
    for panel in spec.build():
        written.append(write_csv(target / f"{panel.name}.csv", panel.columns, panel.rows, params))
        if panel.name.startswith('panel'):
            written.append(plot_panel(target / f"{panel.name}.svg", panel))
    logger.info("Figura %s: %d archivos en %s", name, len(written), target)
    return written
