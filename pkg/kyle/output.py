"""
Escritura de resultados: tablas CSV, documentos JSON, gráficas SVG y el
manifiesto de cada corrida.
"""

from __future__ import annotations

import csv
import json
import logging
import platform
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import matplotlib
import numpy as np
import scipy

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from .__about__ import __version__  # noqa: E402
from .exceptions import KyleConfigError  # noqa: E402

__all__ = ["Panel", "write_csv", "write_json", "plot_panel", "write_manifest", "ensure_dir"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Panel:
    """Tabla de un panel: la primera columna es el eje horizontal."""
    name: str
    columns: tuple
    rows: tuple
    title: str = ''
    xlabel: str = ''
    ylabel: str = ''


def ensure_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise KyleConfigError(f"output: no se puede crear '{path}': {e.strerror}") from e
    return path


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _params_line(params: Mapping) -> str:
    return '# ' + json.dumps(params, sort_keys=True, default=_jsonable)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], params: Mapping) -> Path:
    """Escribe una línea de comentario con los parámetros, el encabezado y las filas.

    Los números usan punto decimal y ``repr`` para que las tablas sean
    reproducibles celda por celda.
    """
    path = Path(path)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as fh:
            fh.write(_params_line(params) + '\n')
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(x) for x in row])
    except OSError as e:
        raise KyleConfigError(f"output: no se puede escribir '{path}': {e.strerror}") from e
    logger.debug("Escrito %s", path)
    return path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    if hasattr(x, 'value'):
        return x.value
    raise TypeError(f"No serializable: {type(x).__name__}")


def write_json(path, data: Mapping) -> Path:
    path = Path(path)
    try:
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(data, fh, sort_keys=True, indent=2, default=_jsonable)
            fh.write('\n')
    except OSError as e:
        raise KyleConfigError(f"output: no se puede escribir '{path}': {e.strerror}") from e
    return path


def plot_panel(path, panel: Panel) -> Path:
    """Gráfica SVG de las columnas del panel contra la primera columna."""
    data = np.asarray(panel.rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        for j, label in enumerate(panel.columns[1:], start=1):
            ax.plot(data[:, 0], data[:, j], label=label)
        ax.set_title(panel.title)
        ax.set_xlabel(panel.xlabel or panel.columns[0])
        ax.set_ylabel(panel.ylabel)
        if len(panel.columns) > 2:
            ax.legend()
        fig.tight_layout()
        # Sal y metadatos fijos para que el SVG no dependa de la corrida
        with plt.rc_context({'svg.hashsalt': 'kyle'}):
            fig.savefig(path, format='svg', metadata={'Date': None})
    finally:
        plt.close(fig)
    return Path(path)


def _relative(path, root) -> str:
    try:
        return Path(path).relative_to(root).as_posix()
    except ValueError:
        return Path(path).as_posix()


def write_manifest(out_dir, config: Mapping, residuals: Mapping, wall_time: float,
                   artifacts: Sequence[Path], status: int = 0,
                   extra: Optional[Mapping] = None) -> Path:
    """Manifiesto de la corrida: eco de la configuración, versiones, residuos
    del solucionador y tiempo de reloj."""
    manifest = {
        'config': config,
        'versions': {
            'kyle': __version__,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'matplotlib': matplotlib.__version__,
            'python': platform.python_version(),
        },
        'residuals': dict(residuals),
        'wall_time': wall_time,
        'status': status,
        'artifacts': sorted(_relative(a, out_dir) for a in artifacts),
    }
    if extra:
        manifest.update(extra)
    return write_json(Path(out_dir) / 'manifest.json', manifest)
