# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import numpy as np
import pytest

from ..bie import SolverConfig, assemble, rhs_from_incident, solve
from ..fields import boundary_traces, farfield
from ..incident import IncidentField, IncidentKind
from ..verify import (
    CheckEntry,
    CheckReport,
    EntryKind,
    check_energy,
    check_flux,
    check_radiation,
    check_reciprocity_farfield,
    check_reciprocity_pointsource,
    check_representation,
    check_representation_oracle,
    check_symmetry,
    farfield_energy,
    inputs_digest,
    summarize,
)

POINTS = [(3.0, 1.0), (-2.5, 2.0), (0.0, -3.0), (3.5, -1.5), (-3.0, -1.0)]


@pytest.fixture(scope="module")
def fine_kite_matrix(kite):
    return assemble(kite, SolverConfig(k=1.0, eta=1.0, n=96))


def assert_passed(report):
    assert report.passed, summarize([report])


def test_entry_semantics():
    assert CheckEntry("same", 1.0 + 1j, 1.0 + 1j + 1e-9, 1e-8).passed
    assert not CheckEntry("apart", 1.0, 1.1, 1e-8).passed
    tiny = CheckEntry("tiny", 1e-14, -1e-14, 1e-8)
    assert tiny.rel_residual == pytest.approx(2e-14)
    assert tiny.passed
    assert CheckEntry("bound", 0.5, 1.0, 0.0, EntryKind.BOUND).passed
    assert not CheckEntry("bound", 1.5, 1.0, 0.0, EntryKind.BOUND).passed
    assert CheckEntry("decrease", 0.5, 1.0, 0.0, EntryKind.DECREASE).passed
    assert not CheckEntry("decrease", 1.0, 1.0, 0.0, EntryKind.DECREASE).passed
    assert CheckEntry("bound", 1.0, 1.0, 0.0, EntryKind.BOUND).passed


def test_report_serialisation():
    report = CheckReport(
        "energy",
        inputs_digest({"k": 1.0, "values": np.array([1 + 2j])}),
        [CheckEntry("a", 2.0, 2.0, 1e-6), CheckEntry("b", 1.0, 3.0, 1e-6)],
    )
    data = report.to_dict()
    assert data["check_id"] == "energy"
    assert data["passed"] is False
    assert [entry["passed"] for entry in data["entries"]] == [True, False]
    assert data["entries"][1]["right"] == [3.0, 0.0]
    assert len(data["inputs_digest"]) == 64
    assert report.max_rel_residual == pytest.approx(2 / 3)


def test_inputs_digest_is_stable():
    first = inputs_digest({"b": [1.0, 2.0], "a": np.array([0.5])})
    second = inputs_digest({"a": [0.5], "b": (1.0, 2.0)})
    assert first == second
    assert first != inputs_digest({"a": [0.5], "b": (1.0, 2.5)})


def test_representation_on_disk(disk_densities):
    assert_passed(check_representation(disk_densities, POINTS))


def test_representation_on_kite(kite_densities):
    report = check_representation(kite_densities, POINTS)
    assert_passed(report)
    assert [entry.label for entry in report.entries][0] == "u(3, 1)"


def test_representation_on_series(disk_coefficients):
    assert_passed(check_representation_oracle(disk_coefficients, POINTS))


def test_energy_on_kite(kite_densities):
    angles = 2 * np.pi * np.arange(360) / 360
    norm = farfield_energy(farfield(kite_densities, angles).ff_minus)
    report = check_energy(
        boundary_traces(kite_densities), 1.0, farfield_norm=norm, tolerance=1e-6
    )
    assert_passed(report)
    assert len(report.entries) == 3


def test_energy_without_farfield(kite_densities):
    report = check_energy(boundary_traces(kite_densities), 1.0, tolerance=1e-6)
    assert [entry.kind for entry in report.entries] == [
        EntryKind.IDENTITY,
        EntryKind.BOUND,
    ]


@pytest.mark.parametrize("radius", [2.5, 6.0])
def test_flux_is_conserved(kite_densities, radius):
    assert_passed(check_flux(kite_densities, radius))


def test_radiation_of_series(disk_coefficients):
    report = check_radiation(disk_coefficients)
    assert_passed(report)
    assert all(entry.kind is EntryKind.DECREASE for entry in report.entries)
    assert all(entry.left.real < entry.right.real for entry in report.entries)


def test_radiation_condition_on_kite(kite_densities):
    assert_passed(check_radiation(kite_densities, radii=(20.0, 40.0, 80.0)))


def test_reciprocity_pointsource(kite, fine_kite_matrix):
    report = check_reciprocity_pointsource(
        kite, fine_kite_matrix.config, (3.0, 1.0), 0.4, mat=fine_kite_matrix
    )
    assert_passed(report)
    assert len(report.entries) == 4


def test_reciprocity_farfield(kite, fine_kite_matrix):
    report = check_reciprocity_farfield(
        kite, fine_kite_matrix.config, 0.4, 2.1, mat=fine_kite_matrix
    )
    assert_passed(report)
    assert report.max_rel_residual < 1e-5


def test_symmetry(kite, fine_kite_matrix):
    report = check_symmetry(
        kite, fine_kite_matrix.config, (-2.5, 2.0), (3.0, 1.0), mat=fine_kite_matrix
    )
    assert_passed(report)


def test_reciprocity_detects_wrong_pairing(kite, fine_kite_matrix):
    # left values paired with the right values of other entries
    report = check_reciprocity_farfield(
        kite, fine_kite_matrix.config, 0.4, 0.4 + np.pi / 3, mat=fine_kite_matrix
    )
    shifted = CheckReport(
        report.check_id,
        report.inputs_digest,
        [
            CheckEntry(entry.label, entry.left, other.right, entry.tolerance)
            for entry, other in zip(report.entries, report.entries[1:])
        ],
    )
    assert not shifted.passed


def test_summarize_lists_every_entry(kite_densities):
    reports = [
        check_representation(kite_densities, POINTS[:2]),
        check_radiation(kite_densities),
    ]
    table = summarize(reports)
    assert "representation" in table
    assert "radiation" in table
    assert table.count("ok") == 2 + 4


@pytest.fixture(scope="module")
def finer_kite_matrix(kite):
    return assemble(kite, SolverConfig(k=1.0, eta=1.0, n=192))


def reciprocity_reports(kite, mat):
    return [
        check_reciprocity_pointsource(kite, mat.config, (3.0, 1.0), 0.4, mat=mat),
        check_reciprocity_farfield(kite, mat.config, 0.4, 2.1, mat=mat),
        check_symmetry(kite, mat.config, (-2.5, 2.0), (3.0, 1.0), mat=mat),
    ]


def test_reciprocity_residuals_shrink_with_refinement(
    kite, fine_kite_matrix, finer_kite_matrix
):
    coarse = reciprocity_reports(kite, fine_kite_matrix)
    fine = reciprocity_reports(kite, finer_kite_matrix)
    for before, after in zip(coarse, fine):
        assert_passed(before)
        assert_passed(after)
        assert after.max_rel_residual <= max(before.max_rel_residual / 10, 1e-11)


def kite_solution(kite, n):
    mat = assemble(kite, SolverConfig(k=1.0, eta=1.0, n=n))
    incident = IncidentField(IncidentKind.PLANEWAVE_K, 1.0, direction=0.3)
    return solve(mat, rhs_from_incident(incident, mat.grid, 1.0))


@pytest.mark.parametrize(
    "run_check",
    [
        pytest.param(
            lambda densities: check_representation(densities, POINTS),
            id="representation",
        ),
        pytest.param(
            lambda densities: check_energy(boundary_traces(densities), 1.0),
            id="energy",
        ),
        pytest.param(lambda densities: check_flux(densities, 2.5), id="flux"),
    ],
)
def test_residuals_drop_tenfold_when_grid_doubles(kite, run_check):
    coarse = run_check(kite_solution(kite, 16)).max_rel_residual
    fine = run_check(kite_solution(kite, 32)).max_rel_residual
    assert coarse > 0
    assert fine <= max(coarse / 10, 1e-11)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_representation_on_fine_kite_at_random_points(kite, seed):
    rng = np.random.default_rng(seed)
    radius = rng.uniform(2.5, 5.0, size=5)
    angle = rng.uniform(0.0, 2 * np.pi, size=5)
    points = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    report = check_representation(kite_solution(kite, 128), points)
    assert_passed(report)
    assert report.max_rel_residual < 1e-6
