# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import numpy as np
import pytest
import yaml

from ..bie import SolverConfig, assemble, rhs_from_incident, solve
from ..geometry import make_circle, make_kite
from ..incident import IncidentField, IncidentKind
from ..oracle import DiskProblem, disk_solve

DISK_CONFIG = {
    "geometry": {"kind": "circle", "radius": 1.0},
    "solver": {"k": 1.0, "eta": 1.0, "n": 64},
    "incident": {"kind": "planewave-k", "direction": 0.0},
    "output": {"farfield_directions": 360},
}

KITE_CONFIG = {
    "geometry": {"kind": "kite"},
    "solver": {"k": 1.0, "eta": 1.0, "n": 64},
    "incident": {"kind": "planewave-k", "direction": [1.0, 0.0]},
    "output": {"farfield_directions": 64},
}


@pytest.fixture(scope="session")
def unit_circle():
    return make_circle(1.0)


@pytest.fixture(scope="session")
def kite():
    return make_kite()


@pytest.fixture(scope="session")
def plane_wave():
    return IncidentField(IncidentKind.PLANEWAVE_K, 1.0, direction=0.0)


@pytest.fixture(scope="session")
def disk_coefficients():
    return disk_solve(DiskProblem(radius=1.0, k=1.0, angle=0.0))


@pytest.fixture(scope="session")
def disk_matrix(unit_circle):
    return assemble(unit_circle, SolverConfig(k=1.0, eta=1.0, n=64))


@pytest.fixture(scope="session")
def disk_densities(disk_matrix, plane_wave):
    return solve(disk_matrix, rhs_from_incident(plane_wave, disk_matrix.grid, 1.0))


@pytest.fixture(scope="session")
def kite_matrix(kite):
    return assemble(kite, SolverConfig(k=1.0, eta=1.0, n=64))


@pytest.fixture(scope="session")
def kite_densities(kite_matrix):
    incident = IncidentField(
        IncidentKind.PLANEWAVE_K, 1.0, direction=(np.cos(0.3), np.sin(0.3))
    )
    return solve(kite_matrix, rhs_from_incident(incident, kite_matrix.grid, 1.0))


@pytest.fixture
def write_config(tmp_path):
    def write(config, name="config.yml"):
        path = tmp_path / name
        path.write_text(yaml.dump(config) if not isinstance(config, str) else config)
        return path

    return write
