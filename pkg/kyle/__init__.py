#!/usr/bin/env python3

"""
Kyle Suite
~~~~~~~~~~

Kyle Suite resuelve la adquisición flexible de información del inversionista
informado en el modelo de Kyle: multiplicadores por Sinkhorn, ley de la
media posterior, descomposición del valor por transporte óptimo y
verificación Monte Carlo del equilibrio.

Uso básico:
    >>> from kyle import DiscreteDist, ModelParams, solve_model, optimal_value
    >>> prior = DiscreteDist([-2.0, 2.0], [0.5, 0.5])
    >>> params = ModelParams(lam=2.0, sigma_Z=1.0, T=1.0, prior=prior)
    >>> mu = solve_model(params)
    >>> report = optimal_value(params, mu)
    >>> abs(report.skewness) < 1e-8
    True

:copyright: (c) 2024, KyleSuite developers.
:license: GPL v2.0, ver LICENSE para más detalles.
"""

# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

from .__about__ import __title__, __summary__, __uri__, __version__
from .__about__ import __author__, __email__, __license__
from .__about__ import __copyright__
from .dist import (DiscreteDist, GridDist, NormalLaw, QuadratureRule, gaussian_expectation,
                   gauss_hermite_rule, trapezoid_rule, double_exponential_grid, normal_grid,
                   gregory_weights, normal_quantile, partial_quantile_integral)
from .transport import (QuantileFn, w2_squared, cross_profit_integral, gelbrich_lower_bound,
                        mallows_center_check, pricing_map)
from .sinkhorn import (KernelSpec, DiscreteSignal, MultiplierSolution, solve_discrete_continuous,
                       solve_discrete_discrete, solve_continuous_continuous, bayes_residual,
                       multiplier_monotonicity_check)
from .infoacq import (ModelParams, PosteriorKernel, EquilibriumReport, solve_normal_prior,
                      gaussian_multipliers, solve_model, build_posterior, posterior_mean_law,
                      two_state_density, optimal_value, value_under_signal, mutual_information,
                      discrete_signal_value, optimize_discrete_signal, value_convergence,
                      comparative_statics_sweep)
from .kylesim import (SimConfig, SimResult, price_function, simulate_equilibrium,
                      simulate_paths, inconspicuousness_test, analytic_expected_profit)
from .config import ExperimentConfig, load_config, parse_config
from .exceptions import (KyleValueError, KyleDomainError, KyleConfigError, KyleNumericError,
                         KyleConvergenceError, KyleSimulationError)

__all__ = ['__title__', '__summary__', '__uri__', '__version__',
           '__author__', '__email__', '__license__', '__copyright__',
           'DiscreteDist', 'GridDist', 'NormalLaw', 'QuadratureRule', 'gaussian_expectation',
           'gauss_hermite_rule', 'trapezoid_rule', 'double_exponential_grid', 'normal_grid',
           'gregory_weights', 'normal_quantile', 'partial_quantile_integral',
           'QuantileFn', 'w2_squared', 'cross_profit_integral', 'gelbrich_lower_bound',
           'mallows_center_check', 'pricing_map',
           'KernelSpec', 'DiscreteSignal', 'MultiplierSolution', 'solve_discrete_continuous',
           'solve_discrete_discrete', 'solve_continuous_continuous', 'bayes_residual',
           'multiplier_monotonicity_check',
           'ModelParams', 'PosteriorKernel', 'EquilibriumReport', 'solve_normal_prior',
           'gaussian_multipliers', 'solve_model', 'build_posterior', 'posterior_mean_law',
           'two_state_density', 'optimal_value', 'value_under_signal', 'mutual_information',
           'discrete_signal_value', 'optimize_discrete_signal', 'value_convergence',
           'comparative_statics_sweep',
           'SimConfig', 'SimResult', 'price_function', 'simulate_equilibrium', 'simulate_paths',
           'inconspicuousness_test', 'analytic_expected_profit',
           'ExperimentConfig', 'load_config', 'parse_config',
           'KyleValueError', 'KyleDomainError', 'KyleConfigError', 'KyleNumericError',
           'KyleConvergenceError', 'KyleSimulationError']
