# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""CSV and JSON artifacts written by the command line tools."""

from __future__ import annotations

import csv
import json
import logging
import pathlib
from typing import Any, Dict, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .bie import DensityPair
from .convergence import ConvergenceRow
from .fields import FarFieldPair, FieldSample

logger = logging.getLogger(__name__)

DENSITIES_HEADER = ("t", "x", "y", "re_phi", "im_phi", "re_psi", "im_psi")
FARFIELD_HEADER = ("theta", "re_ffminus", "im_ffminus", "re_ffplus", "im_ffplus")
FIELD_GRID_HEADER = (
    "x",
    "y",
    "mask",
    "re_u",
    "im_u",
    "re_lap_u",
    "im_lap_u",
    "re_u_plus",
    "im_u_plus",
    "re_u_minus",
    "im_u_minus",
)
CONVERGENCE_HEADER = (
    "eta",
    "n",
    "error_minus",
    "error_plus",
    "error",
    "residual",
    "condition",
)


def _write_rows(
    path: str | pathlib.Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> pathlib.Path:
    path = pathlib.Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug("Wrote %s", path)
    return path


def write_densities(path: str | pathlib.Path, densities: DensityPair) -> pathlib.Path:
    g = densities.grid
    return _write_rows(
        path,
        DENSITIES_HEADER,
        (
            (repr(float(t)), repr(float(p[0])), repr(float(p[1])))
            + (repr(phi.real), repr(phi.imag), repr(psi.real), repr(psi.imag))
            for t, p, phi, psi in zip(
                g.nodes, g.points, densities.phi.tolist(), densities.psi.tolist()
            )
        ),
    )


def write_farfield(path: str | pathlib.Path, ffp: FarFieldPair) -> pathlib.Path:
    return _write_rows(
        path,
        FARFIELD_HEADER,
        (
            (repr(float(theta)), repr(m.real), repr(m.imag), repr(p.real), repr(p.imag))
            for theta, m, p in zip(
                ffp.angles, ffp.ff_minus.tolist(), ffp.ff_plus.tolist()
            )
        ),
    )


def write_field_grid(
    path: str | pathlib.Path, samples: Iterable[FieldSample]
) -> pathlib.Path:
    def row(sample: FieldSample):
        values = (sample.u, sample.lap_u, sample.u_plus, sample.u_minus)
        return (
            repr(sample.point[0]),
            repr(sample.point[1]),
            sample.mask,
            *(repr(part) for v in values for part in (v.real, v.imag)),
        )

    return _write_rows(path, FIELD_GRID_HEADER, (row(s) for s in samples))


def write_matrix(
    path: str | pathlib.Path, matrix: NDArray[np.complex128]
) -> pathlib.Path:
    """One CSV row per matrix row, real and imaginary parts interleaved."""
    size = matrix.shape[1]
    header = [f"{part}_{j}" for j in range(size) for part in ("re", "im")]
    interleaved = np.empty((matrix.shape[0], 2 * size))
    interleaved[:, 0::2] = matrix.real
    interleaved[:, 1::2] = matrix.imag
    return _write_rows(
        path, header, ([repr(v) for v in row] for row in interleaved.tolist())
    )


def write_convergence(
    path: str | pathlib.Path, rows: Iterable[ConvergenceRow]
) -> pathlib.Path:
    return _write_rows(
        path,
        CONVERGENCE_HEADER,
        (
            (
                row.eta,
                row.n,
                repr(row.error_minus),
                repr(row.error_plus),
                repr(row.error),
                repr(row.residual),
                repr(row.condition),
            )
            for row in rows
        ),
    )


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__} to JSON")


def write_json(path: str | pathlib.Path, data: Dict[str, Any]) -> pathlib.Path:
    path = pathlib.Path(path)
    with path.open("w") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    logger.debug("Wrote %s", path)
    return path
