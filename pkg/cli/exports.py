# cli/exports.py
"""
Plot data behind ``manage.py export``.

Every export is a CSV with a fixed header; COLUMNS documents the schema
and is copied into the run manifest as an ordered list.

* curve:   x, H_n(x), H_n'(x) on a uniform grid
* orbit:   step, x, y, branch, expansion, determinant of Y_N
* density: histogram of z_t over the depth-N_t cylinders, weighted by mu+
"""
from __future__ import annotations

import csv
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from anosov2d.diffeo import AnosovMap
from density.martingale import DensityStage
from homeo1d.construction import get_construction
from numerics.backends import Backend
from schedule.engine import Schedule
from symbolic.shift import enumerate_words, word_count


logger = logging.getLogger(__name__)

COLUMNS = {
    "curve": {
        "x": "grid point k / points",
        "H": "H_n(x)",
        "dH": "H_n'(x)",
    },
    "orbit": {
        "step": "iterate index, 0 for the seed",
        "x": "first coordinate in [0, 1)",
        "y": "second coordinate",
        "branch": "left or right half of the f~ partition; empty for the seed",
        "expansion": "|dY_N/dx| at the previous point",
        "determinant": "det DY_N at the previous point",
    },
    "density": {
        "low": "left edge of the z_t bin",
        "high": "right edge of the z_t bin",
        "mass": "mu+ mass of the cylinders whose z_t falls in the bin",
    },
}

WORD_LIMIT = 1 << 16


def column_schema(what: str) -> list[dict]:
    """COLUMNS[what] as a list in header order; manifests are written with sorted keys."""
    return [{"name": name, "meaning": meaning} for name, meaning in COLUMNS[what].items()]


def write_csv(path: Path, header, rows) -> Path:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def curve_rows(schedule: Schedule, n: int, points: int, backend: Backend | None = None) -> list[tuple]:
    construction = get_construction(schedule, backend)
    if not 0 <= n <= construction.depth:
        raise ValueError(f"stage {n} outside 0..{construction.depth}")
    rows = []
    for k in range(points):
        x = Fraction(k, points)
        value, slope = construction.eval_H(n, construction.lift(x))
        rows.append((float(x), float(value), float(slope)))
    return rows


def orbit_rows(schedule: Schedule, N: int, x: float, y: float, steps: int) -> list[tuple]:
    images = AnosovMap(schedule, N).orbit(x, y, steps)
    rows = [(0, float(x), float(y), "", "", "")]
    for step, image in enumerate(images, start=1):
        rows.append((step, *image.point, image.branch, image.expansion, image.determinant))
    return rows


def density_rows(schedule: Schedule, t: int, bins: int, backend: Backend | None = None) -> list[tuple]:
    stage = DensityStage(schedule, t) if backend is None else DensityStage(schedule, t, backend)
    if word_count(stage.depth) > WORD_LIMIT:
        raise ValueError(f"z_{t} lives on {word_count(stage.depth)} cylinders, above {WORD_LIMIT}")
    words = enumerate_words(stage.depth)
    values = np.array([float(stage.cylinder_value(word)) for word in words])
    masses = np.array([float(stage.reference_mass(word)) for word in words])
    low, high = float(values.min()), float(values.max())
    if low == high:
        low, high = low - 0.5, high + 0.5
    histogram, edges = np.histogram(values, bins=bins, range=(low, high), weights=masses)
    return [(float(a), float(b), float(m)) for a, b, m in zip(edges, edges[1:], histogram)]


def export(what: str, schedule: Schedule, directory: Path, params: dict, backend: Backend | None = None) -> Path:
    """Write ``<what>.csv`` into ``directory``; ``params`` carries stage, points, seed point and bins."""
    stage = params.get("stage")
    if what == "curve":
        rows = curve_rows(schedule, schedule.N(schedule.T) if stage is None else int(stage), int(params.get("points") or 2000), backend)
    elif what == "orbit":
        rows = orbit_rows(
            schedule, schedule.depth if stage is None else int(stage),
            float(params.get("x", 0.3)), float(params.get("y", 0.1)), int(params.get("steps") or 100),
        )
    elif what == "density":
        rows = density_rows(schedule, int(params.get("block") or min(2, schedule.T)), int(params.get("bins") or 40), backend)
    else:
        raise ValueError(f"unknown export {what!r}")
    path = write_csv(directory / f"{what}.csv", tuple(COLUMNS[what]), rows)
    logger.info("export_written what=%s rows=%s path=%s", what, len(rows), path)
    return path
