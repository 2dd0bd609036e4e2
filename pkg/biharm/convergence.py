# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Far-field convergence studies over grid sizes and coupling parameters."""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import attrs
import numpy as np

from .bie import SolverConfig, assemble, rhs_from_incident, solve
from .fields import FarFieldPair, farfield
from .geometry import BoundaryCurve
from .incident import IncidentField
from .oracle import MAX_SIZE_PARAMETER, DiskProblem, disk_farfield, disk_solve
from .progressbar import ProgressBarInit, no_progressbar

logger = logging.getLogger(__name__)


@attrs.frozen
class ConvergenceRow:
    eta: float
    n: int
    error_minus: float
    error_plus: float
    residual: float
    condition: float

    @property
    def error(self) -> float:
        return max(self.error_minus, self.error_plus)


def _relative_error(values: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.max(np.abs(reference)))
    difference = float(np.max(np.abs(values - reference)))
    return difference / scale if scale > 0 else difference


def oracle_reference(
    curve: BoundaryCurve, incident: IncidentField, angles: np.ndarray
) -> Optional[FarFieldPair]:
    """The exact far field when the obstacle is a disk centred at the origin
    and the incident field a plane wave, else ``None``."""
    if curve.kind != "circle" or not incident.kind.is_planewave:
        return None
    if incident.k * curve.params["radius"] >= MAX_SIZE_PARAMETER:
        return None
    centre = curve.position(np.array([0.0, math.pi])).mean(axis=0)
    if np.linalg.norm(centre) > 1e-12:
        return None
    assert incident.direction is not None
    problem = DiskProblem(
        radius=curve.params["radius"],
        k=incident.k,
        angle=math.atan2(incident.direction[1], incident.direction[0]),
        kind=incident.kind,
        amplitude=incident.amplitude,
    )
    return disk_farfield(disk_solve(problem), angles)


def run_convergence(
    curve: BoundaryCurve,
    incident: IncidentField,
    n_list: Sequence[int],
    etas: Sequence[float] = (1.0,),
    n_directions: int = 64,
    workers: int = 1,
    progressbar: Optional[ProgressBarInit] = None,
) -> List[ConvergenceRow]:
    """Errors of the far fields for every ``(eta, n)`` pair.

    The reference is the disk oracle when available, else the solution at
    the largest ``n`` for the same ``eta``."""
    progressbar = progressbar or no_progressbar
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list:
        raise ValueError("at least one grid size is needed")
    angles = 2 * np.pi * np.arange(n_directions) / n_directions
    exact = oracle_reference(curve, incident, angles)
    if exact is not None:
        logger.info("Measuring errors against the disk series")
    cases = [(float(eta), n) for eta in etas for n in n_list]
    results: Dict[Tuple[float, int], Tuple[FarFieldPair, float, float]] = {}
    with progressbar(cases, label="Convergence study") as bar:
        for eta, n in bar:
            cfg = SolverConfig(k=incident.k, eta=eta, n=n, workers=workers)
            mat = assemble(curve, cfg)
            densities = solve(mat, rhs_from_incident(incident, mat.grid, cfg.k))
            results[eta, n] = (
                farfield(densities, angles),
                densities.residual,
                densities.condition,
            )
    rows = []
    for eta, n in cases:
        ffp, residual, condition = results[eta, n]
        reference = exact if exact is not None else results[eta, n_list[-1]][0]
        rows.append(
            ConvergenceRow(
                eta=eta,
                n=n,
                error_minus=_relative_error(ffp.ff_minus, reference.ff_minus),
                error_plus=_relative_error(ffp.ff_plus, reference.ff_plus),
                residual=residual,
                condition=condition,
            )
        )
    return rows


def format_table(rows: Sequence[ConvergenceRow]) -> str:
    from tabulate import tabulate

    return tabulate(
        [
            (
                row.eta,
                row.n,
                row.error_minus,
                row.error_plus,
                row.residual,
                row.condition,
            )
            for row in rows
        ],
        headers=("eta", "n", "error u-∞", "error u+∞", "residual", "condition"),
        floatfmt=("g", "g", ".3e", ".3e", ".1e", ".2e"),
    )
