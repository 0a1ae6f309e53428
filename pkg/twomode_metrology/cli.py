# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2026 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""This module contains the `twomode` command-line interface."""

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import click
import numpy as np

from twomode_metrology import __version__
from twomode_metrology.exceptions import MetrologyError
from twomode_metrology.fisher import cfi as compute_cfi
from twomode_metrology.fisher import optimal_direction, qcr_bound
from twomode_metrology.fisher import qfi as compute_qfi
from twomode_metrology.fockspace import (
    State,
    has_number_coherences,
    make_named_state,
    moments,
    project_number_sectors,
    sector_weights,
)
from twomode_metrology.helpers import (
    RunManifest,
    dump_csv,
    dump_json,
    set_log_level,
    utc_now,
    write_output,
)
from twomode_metrology.measurement import format_label, load_povm, outcome_distribution
from twomode_metrology.models import LOG_LEVELS, NumericsParams, set_params
from twomode_metrology.simulate import load_experiment, run_trials, variance_decomposition
from twomode_metrology.spinops import (
    Direction,
    U2AxisParams,
    U2EulerParams,
    euler_to_axis,
    mzlike_decomposition,
)
from twomode_metrology.witness import (
    chi_squared,
    crossover_curve,
    entanglement_depth,
    sensitivity_bounds,
)


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_USAGE = 64
EXIT_DATA = 65

SIMULATE_HEADER = (
    "theta_true",
    "m",
    "trials",
    "mean",
    "bias",
    "b",
    "variance",
    "between",
    "within",
    "bound_SN",
    "bound_HL",
    "bound_QCR",
)
PROB_HEADER = ("outcome", "probability")
CROSSOVER_HEADER = ("m", "inverse_m_mean", "qcr_ceiling", "heisenberg")


class DirectionType(click.ParamType):
    """A rotation axis: x, y, z or three comma-separated components."""

    name = "direction"

    def convert(self, value: Any, param: Any, ctx: Any) -> Direction:
        """Parse the axis."""
        if isinstance(value, Direction):
            return value
        try:
            return Direction.parse(value)
        except MetrologyError as e:
            self.fail(str(e), param, ctx)


def _load_json(path: Path) -> Any:
    with open(path, "r", encoding="utf-8") as stream:
        return json.load(stream)


def _load_state(path: Path) -> State:
    return make_named_state(_load_json(path))


def _direction_report(direction: Direction) -> Tuple[float, float, float]:
    return (direction.alpha, direction.beta, direction.gamma)


def _transform_from_json(spec: Mapping[str, Any]) -> U2AxisParams:
    """Read the transformation written by `convert`."""
    try:
        return U2AxisParams(
            float(spec.get("phi0", 0.0)),
            float(spec["theta"]),
            Direction.parse(spec["axis"]),
            bool(spec.get("axis_defined", True)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise click.BadParameter(f"invalid transformation: {e}", param_hint="--transform")


def _emit(ctx: click.Context, text: str, out: Optional[Path], seed: Optional[int] = None) -> None:
    """Print an artifact, or write it next to its manifest."""
    if out is None:
        click.echo(text.rstrip("\n"))
        return
    manifest = RunManifest(
        subcommand=ctx.info_name,
        config={"options": ctx.params, "numerics": ctx.obj["numerics"]},
        started_at=ctx.obj["started_at"],
        finished_at=utc_now(),
        seed=seed,
    )
    write_output(out, text, manifest)


out_option = click.option(
    "--out",
    type=click.Path(dir_okay=False, writable=True, path_type=Path),
    default=None,
    help="Write the result to a file, with a manifest sidecar.",
)
state_option = click.option(
    "--state",
    "state_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Named-state JSON description.",
)
povm_option = click.option(
    "--povm",
    "povm_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="POVM JSON description.",
)


@click.group(name="twomode")
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Logging level of the package loggers.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="YAML file overriding the numerical defaults.",
)
@click.version_option(__version__, prog_name="twomode")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], config_path: Optional[Path]) -> None:
    """Phase-sensitivity bounds for two-mode interferometers."""
    params = NumericsParams.from_yaml(config_path)
    set_params(params)
    set_log_level(log_level or params.log_level)
    ctx.obj = {"started_at": utc_now(), "numerics": params.as_dict()}


@cli.command(name="qfi")
@state_option
@click.option("--direction", type=DirectionType(), default=None, help="Rotation axis; optimized when omitted.")
@out_option
@click.pass_context
def qfi_command(
    ctx: click.Context, state_path: Path, direction: Optional[Direction], out: Optional[Path]
) -> None:
    """Quantum Fisher information of a state for rotations about an axis."""
    state = _load_state(state_path)
    if direction is None:
        best = optimal_direction(state)
        direction, value = best.direction, best.value
    else:
        value = compute_qfi(state, direction)
    number = moments(state)
    report = {
        "value": value,
        "kind": "QFI",
        "flags": [],
        "direction": _direction_report(direction),
        "mean_n": number.mean_n,
        "mean_n2": number.mean_n2,
        "number_coherences": has_number_coherences(state),
    }
    _emit(ctx, dump_json(report), out)


@cli.command(name="cfi")
@state_option
@povm_option
@click.option("--direction", type=DirectionType(), required=True, help="Rotation axis.")
@click.option("--theta", type=float, required=True, help="Phase at which F is evaluated.")
@click.option("--phi0", type=float, default=0.0, show_default=True, help="Common phase.")
@click.option("--step", type=float, default=None, help="Finite-difference step.")
@out_option
@click.pass_context
def cfi_command(  # pylint: disable=too-many-arguments
    ctx: click.Context,
    state_path: Path,
    povm_path: Path,
    direction: Direction,
    theta: float,
    phi0: float,
    step: Optional[float],
    out: Optional[Path],
) -> None:
    """Classical Fisher information of a measurement."""
    state = _load_state(state_path)
    povm = load_povm(_load_json(povm_path), state.cutoff)
    result = compute_cfi(state, direction, povm, theta, phi0, step)
    report = {
        "value": result.value,
        "kind": "CFI",
        "flags": result.flags,
        "qfi": compute_qfi(state, direction),
        "theta": theta,
        "phi0": phi0,
        "direction": _direction_report(direction),
        "singular_outcomes": [format_label(label) for label in result.singular_outcomes],
    }
    _emit(ctx, dump_json(report), out)


@cli.command(name="prob")
@state_option
@povm_option
@click.option("--direction", type=DirectionType(), default=None, help="Rotation axis.")
@click.option("--theta", type=float, default=None, help="Rotation angle.")
@click.option("--phi0", type=float, default=0.0, show_default=True, help="Common phase.")
@click.option(
    "--transform",
    "transform_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Transformation JSON written by `convert`.",
)
@out_option
@click.pass_context
def prob_command(  # pylint: disable=too-many-arguments
    ctx: click.Context,
    state_path: Path,
    povm_path: Path,
    direction: Optional[Direction],
    theta: Optional[float],
    phi0: float,
    transform_path: Optional[Path],
    out: Optional[Path],
) -> None:
    """Outcome probabilities after the transformation, as CSV."""
    if transform_path is not None:
        if direction is not None or theta is not None:
            raise click.UsageError("--transform excludes --direction and --theta")
        transform = _transform_from_json(_load_json(transform_path))
    else:
        if direction is None or theta is None:
            raise click.UsageError("give --direction and --theta, or --transform")
        transform = U2AxisParams(phi0, theta, direction)
    state = _load_state(state_path)
    povm = load_povm(_load_json(povm_path), state.cutoff)
    distribution = outcome_distribution(state, transform, povm)
    rows = [(format_label(label), p) for label, p in distribution.entries.items()]
    _emit(ctx, dump_csv(PROB_HEADER, rows), out)


@cli.command(name="bound")
@click.option("--mean-n", type=float, default=None, help="<N> of the probe.")
@click.option("--mean-n2", type=float, default=None, help="<N^2> of the probe.")
@click.option(
    "--state",
    "state_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Take the moments (and the QFI) from a state.",
)
@click.option("--direction", type=DirectionType(), default=None, help="Rotation axis for the QFI.")
@click.option("--m", "m", type=click.FloatRange(min=1.0), required=True, help="Repetitions.")
@out_option
@click.pass_context
def bound_command(  # pylint: disable=too-many-arguments
    ctx: click.Context,
    mean_n: Optional[float],
    mean_n2: Optional[float],
    state_path: Optional[Path],
    direction: Optional[Direction],
    m: float,
    out: Optional[Path],
) -> None:
    """Shot-noise, Heisenberg and QCR limits for m repetitions."""
    fq = None
    if state_path is not None:
        if mean_n is not None or mean_n2 is not None:
            raise click.UsageError("--state excludes --mean-n and --mean-n2")
        state = _load_state(state_path)
        mean_n, mean_n2 = moments(state)[:2]
        if direction is None:
            fq = optimal_direction(state).value
        else:
            fq = compute_qfi(state, direction)
    elif mean_n is None or mean_n2 is None:
        raise click.UsageError("give --mean-n and --mean-n2, or --state")
    bounds = sensitivity_bounds(mean_n, mean_n2, m)
    report: Dict[str, Any] = {"value": bounds.heisenberg, "kind": "HL", "flags": []}
    report.update(vars(bounds))
    if fq is not None:
        report["qfi"] = fq
        report["qcr"] = qcr_bound(fq, m).delta_theta if fq > 0.0 else float("inf")
    _emit(ctx, dump_json(report), out)


@cli.command(name="witness")
@state_option
@click.option("--direction", type=DirectionType(), default=None, help="Rotation axis; optimized when omitted.")
@click.option("--fq", type=float, default=None, help="QFI value to certify; computed when omitted.")
@out_option
@click.pass_context
def witness_command(
    ctx: click.Context,
    state_path: Path,
    direction: Optional[Direction],
    fq: Optional[float],
    out: Optional[Path],
) -> None:
    """Entanglement witness chi^2 and the certified entanglement depth."""
    state = _load_state(state_path)
    witness = chi_squared(state, direction)
    if fq is None:
        blocks = project_number_sectors(state)
        fq = optimal_direction(blocks).value if direction is None else compute_qfi(blocks, direction)
    depth = entanglement_depth(fq, sector_weights(state))
    report = {
        "value": witness,
        "kind": "chi2",
        "flags": [] if witness < 1.0 else ["not_certified"],
        "chi_squared": witness,
        "entangled": witness < 1.0,
        "fq": fq,
        "depth": depth.depth,
        "bound_curve": depth.bound_curve,
    }
    _emit(ctx, dump_json(report), out)


@cli.command(name="simulate")
@click.option(
    "--experiment",
    "experiment_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Experiment JSON description.",
)
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True, help="Random seed.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker threads.")
@out_option
@click.pass_context
def simulate_command(
    ctx: click.Context,
    experiment_path: Path,
    seed: int,
    workers: Optional[int],
    out: Optional[Path],
) -> None:
    """Monte Carlo phase estimation; prints one CSV row of statistics."""
    config = load_experiment(_load_json(experiment_path), seed)
    stats = run_trials(config, workers)
    between = within = None
    if stats.per_sector is not None:
        between, within = variance_decomposition(stats)
    number = moments(config.state)
    bounds = sensitivity_bounds(number.mean_n, number.mean_n2, config.m)
    fq = compute_qfi(config.state, config.direction)
    qcr = qcr_bound(fq, config.m).delta_theta if fq > 0.0 else float("inf")
    row = (
        stats.theta,
        stats.m,
        stats.trials,
        stats.mean_estimate,
        stats.bias,
        stats.bias_derivative,
        stats.variance,
        between,
        within,
        bounds.shot_noise,
        bounds.heisenberg,
        qcr,
    )
    _emit(ctx, dump_csv(SIMULATE_HEADER, [row]), out, seed=seed)


def _parse_m_range(value: str) -> Tuple[float, float]:
    try:
        low, high = (float(part) for part in value.split(":"))
    except ValueError as e:
        raise click.BadParameter(f"expected LOW:HIGH, got {value!r}", param_hint="--m-range") from e
    if not 1.0 <= low < high:
        raise click.BadParameter("need 1 <= LOW < HIGH", param_hint="--m-range")
    return low, high


@cli.command(name="crossover")
@click.option(
    "--state",
    "state_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Take the moments from a state.",
)
@click.option("--mean-n", type=float, default=None, help="<N> of the probe.")
@click.option("--mean-n2", type=float, default=None, help="<N^2> of the probe.")
@click.option("--m-range", default="1:1000", show_default=True, help="LOW:HIGH range of m.")
@click.option("--points", type=click.IntRange(min=2), default=200, show_default=True, help="Log-spaced points.")
@out_option
@click.pass_context
def crossover_command(  # pylint: disable=too-many-arguments
    ctx: click.Context,
    state_path: Optional[Path],
    mean_n: Optional[float],
    mean_n2: Optional[float],
    m_range: str,
    points: int,
    out: Optional[Path],
) -> None:
    """Both Heisenberg branches over a range of m; the kink sits at m_cl."""
    if state_path is not None:
        mean_n, mean_n2 = moments(_load_state(state_path))[:2]
    elif mean_n is None or mean_n2 is None:
        raise click.UsageError("give --state, or --mean-n and --mean-n2")
    low, high = _parse_m_range(m_range)
    m_values = np.geomspace(low, high, points)
    m_cl = mean_n2 / mean_n**2
    if low < m_cl < high:
        m_values = np.union1d(m_values, [m_cl])
    curve = crossover_curve(mean_n, mean_n2, m_values)
    _emit(ctx, dump_csv(CROSSOVER_HEADER, curve), out)


@cli.command(name="convert")
@click.option("--psi", type=float, required=True, help="Euler angle psi.")
@click.option("--vartheta", type=float, required=True, help="Euler angle vartheta.")
@click.option("--phi", type=float, required=True, help="Euler angle phi.")
@click.option("--phi0", type=float, default=0.0, show_default=True, help="Common phase.")
@click.option("--strict", is_flag=True, help="Fail when the rotation axis is undefined.")
@out_option
@click.pass_context
def convert_command(  # pylint: disable=too-many-arguments
    ctx: click.Context,
    psi: float,
    vartheta: float,
    phi: float,
    phi0: float,
    strict: bool,
    out: Optional[Path],
) -> None:
    """Euler angles to axis-angle form and the Mach-Zehnder-like decomposition."""
    euler = U2EulerParams(phi0, psi, vartheta, phi)
    axis = euler_to_axis(euler, strict=strict)
    decomposition = mzlike_decomposition(axis)
    report = {
        "phi0": axis.phi0,
        "theta": axis.theta,
        "axis": _direction_report(axis.axis),
        "axis_defined": axis.axis_defined,
        "transmittance": euler.transmittance,
        "reflectance": euler.reflectance,
        "mz": {
            "theta1": decomposition.theta1,
            "theta2": decomposition.theta2,
            "chi": decomposition.chi,
            "s_axis": _direction_report(decomposition.s_axis),
        },
    }
    _emit(ctx, dump_json(report), out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and map failures to exit codes."""
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="twomode",
            standalone_mode=False,
        )
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        click.echo(f"Error: malformed JSON: {e}", err=True)
        return EXIT_DATA
    except MetrologyError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_VALIDATION
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
