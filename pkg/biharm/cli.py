# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

from __future__ import annotations

import logging
import os
import pathlib
import sys
import time
from typing import TYPE_CHECKING, Callable, Iterable, List, Tuple, cast

import click

from .specfun import FUNCTION_IDS
from .verify import CHECK_IDS

if TYPE_CHECKING:
    from .bie import DensityPair, SystemMatrix
    from .config import RunConfig
    from .progressbar import ProgressBar, V
    from .verify import CheckReport

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}

EXIT_CHECK_FAILED = 1
EXIT_REPORT_UNWRITABLE = 3

VERIFY_FLUX_RADIUS_FACTOR = 1.5


class ClickLoggingHandler(logging.Handler):
    """Handler displaying logs using click.secho(), passing the style extra
    attribute."""

    def emit(self, record):
        if hasattr(record, "style"):
            click.secho(self.format(record), err=True, **record.style)
        else:
            click.echo(self.format(record), err=True)


def progressbar(
    iterable: Iterable[V] | None = None,
    label: str | None = None,
    show_eta: bool = True,
    show_pos: bool = True,
    item_show_func: Callable[[V | None], str | None] | None = None,
) -> ProgressBar[V]:
    bar = click.progressbar(
        iterable=iterable,
        label=label,
        show_eta=show_eta,
        show_pos=show_pos,
        item_show_func=item_show_func,
        file=sys.stderr,
    )
    return cast("ProgressBar[V]", bar)


def _log_level(value: str) -> int:
    if value.isdigit():
        return int(value)
    level = logging.getLevelName(value.upper())
    if not isinstance(level, int):
        raise click.ClickException(f"BIHARM_LOG: unknown log level “{value}”")
    return level


@click.group(name="biharm", context_settings=CONTEXT_SETTINGS)
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Threads used to assemble the boundary operators",
)
@click.pass_context
def biharm_cli_group(ctx, workers):
    """Scattering of flexural waves by clamped obstacles.

    The verbosity is set through the environment variable ``BIHARM_LOG``
    (a level name such as ``INFO``, default ``WARNING``).

    Expected config format:

        \b
        geometry:
          kind: kite            # circle, ellipse, kite or fourier
        \b
        solver:
          k: 1.0
          eta: 1.0
          n: 64
        \b
        incident:
          kind: planewave-k     # or planewave-ik, pointsource-k, pointsource-ik
          direction: 0.0        # angle in radians or [dx, dy]
        \b
        output:
          directory: results
          farfield_directions: 360
          field_grid: {xmin: -4, xmax: 4, ymin: -4, ymax: 4, nx: 81, ny: 81}
    """
    package_logger = logging.getLogger("biharm")
    # Avoid configuring the logger twice
    if package_logger.propagate:
        package_logger.propagate = False
        package_logger.addHandler(ClickLoggingHandler())
    package_logger.setLevel(_log_level(os.environ.get("BIHARM_LOG", "WARNING")))

    ctx.ensure_object(dict)
    ctx.obj["workers"] = workers
    return ctx


def load_run_config(ctx: click.Context, path: str) -> "RunConfig":
    from .config import ConfigError, load_config

    try:
        return load_config(path, workers=ctx.obj["workers"])
    except ConfigError as e:
        raise click.ClickException(f"Invalid configuration: {e}")


def solve_run(
    ctx: click.Context, conf: "RunConfig"
) -> Tuple["SystemMatrix", "DensityPair"]:
    from . import bie
    from .incident import IncidentFieldError

    curve = conf.geometry.to_curve()
    try:
        mat = bie.assemble(curve, conf.solver, progressbar=progressbar)
        rhs = bie.rhs_from_incident(conf.incident, mat.grid, conf.solver.k)
        return mat, bie.solve(mat, rhs)
    except (IncidentFieldError, bie.OperatorError) as e:
        click.secho(f"Invalid incident field: {e}", err=True, fg="red")
        ctx.exit(1)
    except bie.SingularSystemError as e:
        click.secho(str(e), err=True, fg="red", bold=True)
        click.secho(
            "Try another value of solver.eta or a finer grid.", err=True, fg="yellow"
        )
        ctx.exit(1)
    except bie.SolverAccuracyError as e:
        click.secho(str(e), err=True, fg="red", bold=True)
        ctx.exit(1)
    raise AssertionError("unreachable")


def _angles(count: int):
    import numpy as np

    return 2 * np.pi * np.arange(count) / count


@biharm_cli_group.command()
@click.option(
    "--config",
    "-C",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Run configuration, or the metadata.json of a previous run",
)
@click.option(
    "--output-dir",
    "-o",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory receiving the results (overrides output.directory)",
)
@click.option(
    "--dump-matrix",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Also write the system matrix as CSV, real and imaginary parts interleaved",
)
@click.pass_context
def solve(ctx, config_path, output_dir, dump_matrix):
    """Solve the scattering problem described by a configuration file.

    Writes ``densities.csv``, ``farfield.csv``, ``field_grid.csv`` (when
    ``output.field_grid`` is set) and ``metadata.json``."""
    from .bie import format_duration
    from .fields import farfield, field_grid
    from .outputs import (
        write_densities,
        write_farfield,
        write_field_grid,
        write_json,
        write_matrix,
    )

    conf = load_run_config(ctx, config_path)
    directory = pathlib.Path(output_dir or conf.output.directory)
    directory.mkdir(parents=True, exist_ok=True)

    started = time.monotonic()
    mat, densities = solve_run(ctx, conf)
    ffp = farfield(densities, _angles(conf.output.farfield_directions))

    files: List[pathlib.Path] = [
        write_densities(directory / "densities.csv", densities),
        write_farfield(directory / "farfield.csv", ffp),
    ]
    if conf.output.field_grid is not None:
        samples = field_grid(
            densities,
            mat.curve,
            conf.output.field_grid,
            progressbar=progressbar,
        )
        files.append(write_field_grid(directory / "field_grid.csv", samples))
    if dump_matrix:
        files.append(write_matrix(dump_matrix, mat.matrix))
    files.append(
        write_json(
            directory / "metadata.json",
            {
                "config": conf.to_dict(),
                "results": {
                    "unknowns": mat.matrix.shape[0],
                    "residual": densities.residual,
                    "condition": densities.condition,
                },
            },
        )
    )
    click.secho(
        f"Solved in {format_duration(time.monotonic() - started)} "
        f"(residual {densities.residual:.1e}, condition {densities.condition:.2e})",
        fg="green",
    )
    for path in files:
        click.echo(f"- {path}")


@biharm_cli_group.command()
@click.option(
    "--config",
    "-C",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Run configuration",
)
@click.option(
    "--angle",
    "-a",
    "angles",
    type=float,
    multiple=True,
    help="Observation angle in radians (default: output.farfield_directions "
    "equispaced angles)",
)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write the patterns as CSV instead of displaying them",
)
@click.pass_context
def farfield(ctx, config_path, angles, output):
    """Display the far-field patterns of the scattered field."""
    import numpy as np
    from tabulate import tabulate

    from .fields import farfield as farfield_pattern
    from .outputs import write_farfield

    conf = load_run_config(ctx, config_path)
    _, densities = solve_run(ctx, conf)
    directions = (
        np.asarray(angles) if angles else _angles(conf.output.farfield_directions)
    )
    ffp = farfield_pattern(densities, directions)
    if output:
        write_farfield(output, ffp)
        click.echo(f"Far-field patterns written to {output}")
        return
    click.echo(
        tabulate(
            [
                (f"{theta:.6f}", f"{m:.10e}", f"{p:.10e}")
                for theta, m, p in zip(ffp.angles, ffp.ff_minus, ffp.ff_plus)
            ],
            headers=("theta", "u-∞", "u+∞"),
            disable_numparse=True,
        )
    )


@biharm_cli_group.command()
@click.option(
    "--config",
    "-C",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Run configuration with a circle geometry and a plane wave",
)
@click.option(
    "--output-dir",
    "-o",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory receiving the results (overrides output.directory)",
)
@click.option(
    "--dimension",
    "-d",
    type=click.Choice(["2", "3"]),
    default="2",
    show_default=True,
    help="Disk, or ball hit by a plane wave along the z axis",
)
@click.pass_context
def oracle(ctx, config_path, output_dir, dimension):
    """Exact series solution for a disk or a ball.

    Writes ``oracle_farfield.csv``, ``oracle_field_grid.csv`` (2D only, when
    ``output.field_grid`` is set) and ``oracle_metadata.json``, with the same
    columns as the files written by ``solve``."""
    import math

    import numpy as np

    from .fields import EVALUATED, INTERIOR, FieldSample
    from .oracle import (
        DiskProblem,
        OracleError,
        disk_eval,
        disk_farfield,
        disk_solve,
        sphere_farfield,
        sphere_solve,
    )
    from .outputs import write_farfield, write_field_grid, write_json

    conf = load_run_config(ctx, config_path)
    if conf.geometry.kind != "circle":
        raise click.ClickException("The oracle needs geometry.kind: circle")
    if not conf.incident.kind.is_planewave:
        raise click.ClickException("The oracle needs a plane-wave incident field")
    assert conf.geometry.radius is not None
    incident = conf.incident
    directory = pathlib.Path(output_dir or conf.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    count = conf.output.farfield_directions

    try:
        if dimension == "3":
            coeffs = sphere_solve(
                conf.geometry.radius, incident.k, incident.kind, incident.amplitude
            )
            ffp = sphere_farfield(coeffs, np.linspace(0, np.pi, count))
        else:
            assert incident.direction is not None
            coeffs = disk_solve(
                DiskProblem(
                    radius=conf.geometry.radius,
                    k=incident.k,
                    angle=math.atan2(incident.direction[1], incident.direction[0]),
                    kind=incident.kind,
                    amplitude=incident.amplitude,
                )
            )
            ffp = disk_farfield(coeffs, _angles(count))
    except OracleError as e:
        click.secho(str(e), err=True, fg="red")
        ctx.exit(1)

    files = [write_farfield(directory / "oracle_farfield.csv", ffp)]
    spec = conf.output.field_grid
    if spec is not None and dimension == "3":
        click.secho(
            "output.field_grid is ignored for the ball", err=True, fg="yellow"
        )
    elif spec is not None:
        points = spec.points()
        r = np.hypot(points[:, 0], points[:, 1])
        outside = r > coeffs.radius
        k2 = coeffs.k**2
        u = np.full(len(points), complex(np.nan, np.nan))
        lap_u = u.copy()
        u[outside], lap_u[outside], _, _ = disk_eval(
            coeffs, r[outside], np.arctan2(points[outside, 1], points[outside, 0])
        )
        samples = [
            FieldSample(
                point=(float(p[0]), float(p[1])),
                u_plus=complex(lv + k2 * uv),
                u_minus=complex(lv - k2 * uv),
                u=complex(uv),
                lap_u=complex(lv),
                mask=EVALUATED if inside_ok else INTERIOR,
            )
            for p, uv, lv, inside_ok in zip(points, u, lap_u, outside)
        ]
        files.append(write_field_grid(directory / "oracle_field_grid.csv", samples))
    files.append(
        write_json(
            directory / "oracle_metadata.json",
            {
                "config": conf.to_dict(),
                "oracle": {**coeffs.to_dict(), "dimension": int(dimension)},
            },
        )
    )
    click.secho(f"Series truncated at order {coeffs.truncation}", fg="green")
    for path in files:
        click.echo(f"- {path}")


def run_check(
    check_id: str,
    conf: "RunConfig",
    mat: "SystemMatrix",
    densities: "DensityPair",
) -> "CheckReport":
    import numpy as np

    from . import verify
    from .fields import boundary_traces, farfield

    spec = conf.verify
    curve = mat.curve
    if check_id == "representation":
        return verify.check_representation(
            densities, spec.points, tolerance=spec.tolerance_single
        )
    if check_id == "energy":
        ffp = farfield(densities, _angles(conf.output.farfield_directions))
        return verify.check_energy(
            boundary_traces(densities),
            densities.k,
            farfield_norm=verify.farfield_energy(ffp.ff_minus),
            tolerance=spec.tolerance_single,
        )
    if check_id == "flux":
        extent = float(np.max(np.linalg.norm(mat.grid.points, axis=-1)))
        return verify.check_flux(
            densities,
            VERIFY_FLUX_RADIUS_FACTOR * extent,
            tolerance=spec.tolerance_single,
        )
    if check_id == "radiation":
        return verify.check_radiation(densities, spec.radii)
    if check_id == "reciprocity-pointsource":
        return verify.check_reciprocity_pointsource(
            curve,
            conf.solver,
            spec.source,
            spec.directions[0],
            tolerance=spec.tolerance_multi,
            mat=mat,
            progressbar=progressbar,
        )
    if check_id == "reciprocity-farfield":
        return verify.check_reciprocity_farfield(
            curve,
            conf.solver,
            spec.directions[0],
            spec.directions[1],
            tolerance=spec.tolerance_multi,
            mat=mat,
            progressbar=progressbar,
        )
    if check_id == "symmetry":
        receiver = next((p for p in spec.points if p != spec.source), None)
        if receiver is None:
            raise click.ClickException(
                "verify.points needs a point other than verify.source"
            )
        return verify.check_symmetry(
            curve,
            conf.solver,
            receiver,
            spec.source,
            tolerance=spec.tolerance_multi,
            mat=mat,
            progressbar=progressbar,
        )
    raise click.ClickException(f"Unknown check “{check_id}”")


@biharm_cli_group.command()
@click.argument("check_id", type=click.Choice(CHECK_IDS + ("all",)))
@click.option(
    "--config",
    "-C",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Run configuration (the verify section sets points and tolerances)",
)
@click.option(
    "--json",
    "json_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Write the full report as JSON",
)
@click.pass_context
def verify(ctx, check_id, config_path, json_path):
    """Check an identity the scattered fields must satisfy.

    CHECK_ID is one of the check names, or ``all``. The exit code is 0 when
    every entry passes, 1 when one fails and 3 when the JSON report cannot be
    written."""
    from .outputs import write_json
    from .verify import summarize

    conf = load_run_config(ctx, config_path)
    mat, densities = solve_run(ctx, conf)
    selected = CHECK_IDS if check_id == "all" else (check_id,)
    reports = [run_check(name, conf, mat, densities) for name in selected]
    passed = all(report.passed for report in reports)

    click.echo(summarize(reports))
    if json_path:
        try:
            write_json(
                json_path,
                {
                    "passed": passed,
                    "config": conf.to_dict(),
                    "reports": [report.to_dict() for report in reports],
                },
            )
        except OSError as e:
            click.secho(
                f"Unable to write the report to {json_path}: {e.strerror}",
                err=True,
                fg="red",
            )
            ctx.exit(EXIT_REPORT_UNWRITABLE)
    if passed:
        click.secho("All checks passed.", fg="green")
    else:
        failed = sorted({report.check_id for report in reports if not report.passed})
        click.secho(f"Failed: {', '.join(failed)}", err=True, fg="red", bold=True)
        ctx.exit(EXIT_CHECK_FAILED)


@biharm_cli_group.command()
@click.option(
    "--config",
    "-C",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Run configuration",
)
@click.option(
    "--n",
    "n_list",
    type=click.IntRange(min=8),
    multiple=True,
    default=(8, 16, 32, 64),
    show_default=True,
    help="Half the number of quadrature nodes; repeat for each grid",
)
@click.option(
    "--eta",
    "etas",
    type=float,
    multiple=True,
    help="Coupling parameter; repeat for a sweep (default: solver.eta)",
)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Also write the table as CSV",
)
@click.pass_context
def convergence(ctx, config_path, n_list, etas, output):
    """Far-field errors over a sequence of grids.

    Errors are measured against the exact series for a disk hit by a plane
    wave, and against the finest grid otherwise."""
    from .convergence import format_table, run_convergence
    from .outputs import write_convergence

    conf = load_run_config(ctx, config_path)
    if 0 in etas:
        raise click.BadParameter("must be non-zero", param_hint="--eta")
    rows = run_convergence(
        conf.geometry.to_curve(),
        conf.incident,
        n_list,
        etas=etas or (conf.solver.eta,),
        n_directions=conf.output.farfield_directions,
        workers=ctx.obj["workers"],
        progressbar=progressbar,
    )
    click.echo(format_table(rows))
    if output:
        write_convergence(output, rows)
        click.echo(f"Table written to {output}")


@biharm_cli_group.command()
@click.argument("function_id", type=click.Choice(FUNCTION_IDS))
@click.argument("order", type=int)
@click.argument("x", type=float)
@click.pass_context
def specfun(ctx, function_id, order, x):
    """Print a cylindrical or spherical special function and its derivative.

    FUNCTION_ID is J, Y, H1, I, K (cylindrical) or h1, k (spherical). Complex
    values are printed as ``a+bj``."""
    import numpy as np

    from .specfun import (
        SpecialFunctionDomainError,
        SpecialFunctionRangeError,
        deriv,
        evaluate,
    )

    try:
        value = complex(evaluate(function_id, order, x))
        derivative = complex(deriv(function_id, order, x))
    except (SpecialFunctionDomainError, SpecialFunctionRangeError) as e:
        click.secho(str(e), err=True, fg="red")
        ctx.exit(1)

    def fmt(v: float) -> str:
        return np.format_float_positional(
            v, precision=15, unique=False, fractional=False, trim="-"
        )

    def fmt_complex(v: complex) -> str:
        if not v.imag:
            return fmt(v.real)
        sign = "-" if v.imag < 0 else "+"
        return f"{fmt(v.real)}{sign}{fmt(abs(v.imag))}j"

    click.echo(f"{fmt_complex(value)} {fmt_complex(derivative)}")
