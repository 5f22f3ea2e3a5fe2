#!/usr/bin/env python3

import argparse
import logging
import sys
import time

from .config import load_config
from .exceptions import KyleConfigError, KyleValueError
from .figures import FIGURES, run_figure
from .output import ensure_dir, write_manifest
from .runner import ExitStatus, run_config, run_simulation, run_sinkhorn

LEVELS = {'critical': logging.CRITICAL,
          'error': logging.ERROR,
          'warning': logging.WARNING,
          'info': logging.INFO,
          'debug': logging.DEBUG}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        'kyle',
        description='Adquisición flexible de información en el modelo de Kyle.')
    parser.add_argument('-l', '--log', default='warning', choices=LEVELS,
                        help='nivel de registro')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='directorio de salida')
    common.add_argument('--seed', type=int, help='semilla de 64 bits')
    common.add_argument('--tol', type=float, help='tolerancia de Sinkhorn')
    common.add_argument('--quad', type=int, help='nodos de Gauss–Hermite')

    sub = parser.add_subparsers(dest='command', required=True)
    fig = sub.add_parser('figure', parents=[common], help='reproducir una figura')
    fig.add_argument('name', choices=sorted(FIGURES), help='nombre de la figura')
    for name, text in (('run', 'ejecutar un experimento'),
                       ('sinkhorn', 'resolver sólo los multiplicadores'),
                       ('simulate', 'simular el equilibrio')):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument('config', help='archivo JSON del experimento')
    return parser


def _figure(args) -> int:
    out = ensure_dir(args.out or 'out')
    start = time.perf_counter()
    try:
        written = run_figure(args.name, out)
    except KyleConfigError as e:
        print(e, file=sys.stderr)
        return ExitStatus.CONFIG_ERROR
    except KyleValueError as e:
        print(e, file=sys.stderr)
        write_manifest(out, {'figure': args.name}, {}, time.perf_counter() - start, [],
                       ExitStatus.SOLVER_FAILURE, {'error': str(e)})
        return ExitStatus.SOLVER_FAILURE
    write_manifest(out, {'figure': args.name, **FIGURES[args.name].params}, {},
                   time.perf_counter() - start, written)
    for path in written:
        print(path)
    return ExitStatus.OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=LEVELS[args.log])

    if args.command == 'figure':
        return int(_figure(args))

    try:
        cfg = load_config(args.config).override(args.seed, args.tol, args.quad, args.out)
    except KyleConfigError as e:
        print(e, file=sys.stderr)
        return int(ExitStatus.CONFIG_ERROR)

    action = {'run': None, 'sinkhorn': run_sinkhorn, 'simulate': run_simulation}[args.command]
    result = run_config(cfg, action)
    for path in result.artifacts:
        print(path)
    return int(result.status)


if __name__ == '__main__':
    exit(main())
