"""CSV, JSON and plot-script writers.

Floats are written with ``repr`` so every value round-trips exactly, and
nothing time- or host-dependent is recorded, so repeated runs of one
config produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import grid as G
from .model import DiagnosticsSample, StateU, momentum

# column order of the diagnostics table; any further sample fields follow
DIAGNOSTIC_COLUMNS = ["t", "mu0", "mu1sq", "H1", "H2_printed", "H2_k1scaled",
                      "min_ux", "min_m", "max_m", "min_Gamma"]


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def diagnostic_columns() -> list[str]:
    extra = [c for c in DiagnosticsSample.field_names() if c not in DIAGNOSTIC_COLUMNS]
    return DIAGNOSTIC_COLUMNS + extra


def write_diagnostics(path: Path, samples: list[DiagnosticsSample]) -> Path:
    cols = diagnostic_columns()
    return write_csv(path, cols, ([getattr(s, c) for c in cols] for s in samples))


def write_snapshots(path: Path, snapshots: list[StateU]) -> Path:
    def rows():
        for s in snapshots:
            x = G.PeriodicGrid(s.u.size).nodes
            ux = G.deriv(s.u, 1)
            m = momentum(s.u)
            for j in range(s.u.size):
                yield s.t, x[j], s.u[j], ux[j], m[j]
    return write_csv(path, ["t", "x", "u", "ux", "m"], rows())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; keep them readable as strings
        return v if math.isfinite(v) else repr(v)
    return obj


def write_json(path: Path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


PLOT_TEMPLATE = '''"""Plot every column of {csv_name} against its first column.

Needs matplotlib; writes one PNG per column next to this script.
"""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
src = here / "{csv_name}"
with src.open() as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], rows[1:]
cols = list(zip(*[[float(v) for v in r] for r in data])) if data else [[] for _ in header]
for name, col in zip(header[1:], cols[1:]):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(cols[0], col, lw=1.2)
    ax.set_xlabel(header[0])
    ax.set_ylabel(name)
    fig.tight_layout()
    fig.savefig(here / f"{{src.stem}}_{{name}}.png", dpi=120)
    plt.close(fig)
sys.stdout.write(f"wrote {{len(header) - 1}} figures to {{here}}\\n")
'''


def write_plot_script(path: Path, csv_name: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(PLOT_TEMPLATE.format(csv_name=csv_name))
    return path
