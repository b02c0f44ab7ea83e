"""Command-line harness: ``python -m asianpath <command> ...``.

Exit codes: 0 success, 2 usage error, 3 domain error.
"""

import argparse
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from pydantic import ValidationError
from pydantic.json_schema import models_json_schema

from asianpath import config
from asianpath.errors import ConfigurationError, DegenerateCorrelationError, DomainError, ParameterError
from asianpath.models import (
    AssetDynamics,
    ControlDynamics,
    McConfig,
    McOutput,
    OptionKind,
    OptionSpec,
    PriceOutput,
    RunManifest,
)
from asianpath.services import experiments, montecarlo, pricers
from asianpath.services.csv_generator import CSVGenerator, HistogramCSVGenerator, SweepCSVGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3

CONTROL_FLAGS = ("nu", "xi", "s0y", "barrier")
# argparse destinations that describe how to run, not what to compute
_NOT_ECHOED = {"command", "func", "out", "log_level"}

_COMMAND_PARSERS: dict[str, argparse.ArgumentParser] = {}


def _asset_parser(with_rate: bool = True) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("asset dynamics")
    group.add_argument("--mu", type=float, required=True, help="drift, per year")
    group.add_argument("--sigma", type=float, required=True, help="volatility, per sqrt-year")
    group.add_argument("--s0", type=float, required=True, help="spot of the priced asset")
    group.add_argument("--T", dest="T", type=float, required=True, help="horizon, years")
    if with_rate:
        group.add_argument("--r", dest="r", type=float, required=True, help="discount rate, per year")
    return parser


def _control_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("control process")
    group.add_argument("--nu", type=float)
    group.add_argument("--xi", type=float)
    group.add_argument("--s0y", type=float)
    group.add_argument("--barrier", type=float, help="up-and-out level B on the control process")
    group.add_argument("--rho", type=float, default=0.0)
    return parser


def _option_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--kind", type=OptionKind, choices=list(OptionKind), required=True,
                        metavar="{" + ",".join(k.value for k in OptionKind) + "}")
    parser.add_argument("--strike", type=float)
    return parser


def _mc_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("simulation")
    group.add_argument("--paths", type=int, default=100_000)
    group.add_argument("--steps", type=int, default=100)
    group.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    group.add_argument("--chunks", type=int, default=1)
    group.add_argument("--antithetic", action="store_true")
    group.add_argument("--averaging", choices=["grid", "trapezoid"], default="grid")
    return parser


def _out_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--out", type=Path, help="CSV path; the manifest goes to PATH.manifest.json")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asianpath",
        description="Closed-form and Monte Carlo prices of geometric Asian options, with barrier variants.",
    )
    parser.add_argument("--log-level", dest="log_level", help="level of the asianpath loggers (e.g. DEBUG)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, parents, help_text):
        command = sub.add_parser(name, parents=parents, help=help_text)
        command.set_defaults(func=func)
        _COMMAND_PARSERS[name] = command
        return command

    add("price", cmd_price, [_option_parser(), _asset_parser(), _control_parser()], "closed-form price as JSON")
    add("mc", cmd_mc, [_option_parser(), _asset_parser(), _control_parser(), _mc_parser()],
        "Monte Carlo price as JSON")

    sweep = add("sweep", cmd_sweep, [_option_parser(), _asset_parser(), _control_parser(), _mc_parser(), _out_parser()],
                "closed form against Monte Carlo along one parameter (CSV)")
    sweep.add_argument("--param", required=True, choices=experiments.SWEEPABLE)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--points", type=int, required=True)
    sweep.add_argument("--rho-list", dest="rho_list", type=float, nargs="+")

    histogram = add("histogram", cmd_histogram, [_asset_parser(with_rate=False), _control_parser(), _mc_parser(),
                                                 _out_parser()],
                    "simulated against approximate average over surviving paths (CSV)")
    histogram.add_argument("--bins", type=int, default=40)

    grid = add("propagator-grid", cmd_propagator_grid,
               [_asset_parser(with_rate=False), _control_parser(), _out_parser()],
               "density on a grid of two coordinates (CSV)")
    grid.add_argument("--axes", nargs=2, choices=experiments.AXES, default=["x", "xbar"])
    grid.add_argument("--range1", nargs=3, type=float, required=True, metavar=("LO", "HI", "N"))
    grid.add_argument("--range2", nargs=3, type=float, required=True, metavar=("LO", "HI", "N"))
    grid.add_argument("--fixed", type=float, help="value of the coordinate not on the grid")
    grid.add_argument("--y-barrier", dest="y_barrier", type=float, help="barrier as y_B; sets B = s0y e^{y_B}")

    rerun = add("rerun", cmd_rerun, [_out_parser()], "re-execute a saved run manifest")
    rerun.add_argument("manifest", type=Path)

    add("schema", cmd_schema, [], "print the JSON schema of price and mc output")
    return parser


def _inputs(args: argparse.Namespace) -> dict:
    inputs = {}
    for key, value in vars(args).items():
        if key in _NOT_ECHOED or value is None:
            continue
        inputs[key] = value.value if isinstance(value, OptionKind) else value
    return inputs


def _manifest(args: argparse.Namespace, seed: Optional[int] = None) -> RunManifest:
    return RunManifest(
        command=args.command,
        parameters=_inputs(args),
        seed=seed,
        tool_version=config.TOOL_VERSION,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def _asset(args) -> AssetDynamics:
    return AssetDynamics(mu=args.mu, sigma=args.sigma, s0=args.s0, T=args.T)


def _control(args, required: bool) -> Optional[ControlDynamics]:
    given = {name: getattr(args, name, None) for name in CONTROL_FLAGS}
    if getattr(args, "y_barrier", None) is not None:
        if given["barrier"] is not None:
            raise ParameterError("give either --barrier or --y-barrier, not both")
        if given["s0y"] is not None:
            given["barrier"] = given["s0y"] * math.exp(args.y_barrier)
    if not required and all(v is None for v in given.values()):
        return None
    missing = [f"--{name}" for name, value in given.items() if value is None]
    if missing:
        raise ParameterError(f"control process needs {', '.join(missing)}")
    return ControlDynamics(**given, rho=getattr(args, "rho", 0.0))


def _spec(args) -> OptionSpec:
    if args.kind.needs_strike and args.strike is None:
        raise ParameterError(f"--kind {args.kind.value} needs --strike")
    return OptionSpec(kind=args.kind, strike=args.strike, rate=getattr(args, "r", 0.0))


def _mc_config(args) -> McConfig:
    return McConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed, n_chunks=args.chunks,
                    antithetic=args.antithetic, averaging=args.averaging)


def _emit_json(model) -> None:
    sys.stdout.write(model.model_dump_json(indent=2) + "\n")


def _emit_csv(args, text: str, manifest: RunManifest) -> None:
    manifest_json = manifest.model_dump_json(indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        sys.stderr.write(manifest_json)
        return
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8", newline="\n")
    Path(f"{args.out}.manifest.json").write_text(manifest_json, encoding="utf-8")
    logger.info("wrote %s", args.out)


def cmd_price(args) -> int:
    spec = _spec(args)
    result = pricers.price(_asset(args), _control(args, required=spec.kind.is_barrier), spec)
    _emit_json(PriceOutput(kind=spec.kind, inputs=_inputs(args), value=result.value, breakdown=result.breakdown,
                           flags=result.flags, manifest=_manifest(args)))
    return EXIT_OK


def cmd_mc(args) -> int:
    spec = _spec(args)
    cfg = _mc_config(args)
    estimate = montecarlo.mc_price(_asset(args), _control(args, required=spec.kind.is_barrier), spec, cfg)
    std_error = estimate.std_error
    if estimate.n_effective < 2:
        logger.warning("standard error undefined with %d independent sample(s); reported as null",
                       estimate.n_effective)
        std_error = None
    _emit_json(McOutput(kind=spec.kind, inputs=_inputs(args), value=estimate.value, std_error=std_error,
                        n_effective=estimate.n_effective, n_paths=estimate.n_paths,
                        knockout_fraction=estimate.knockout_fraction, manifest=_manifest(args, cfg.seed)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec(args)
    cfg = _mc_config(args)
    control = _control(args, required=spec.kind.is_barrier or bool(args.rho_list))
    rows = experiments.run_sweep(_asset(args), control, spec, cfg, args.param, args.start, args.stop,
                                 args.points, args.rho_list)
    _emit_csv(args, SweepCSVGenerator.generate(rows), _manifest(args, cfg.seed))
    return EXIT_OK


def cmd_histogram(args) -> int:
    if args.bins < montecarlo.MIN_HISTOGRAM_BINS:
        raise ParameterError(f"--bins must be at least {montecarlo.MIN_HISTOGRAM_BINS}")
    cfg = _mc_config(args)
    rows, distance = experiments.run_histogram(_asset(args), _control(args, required=True), cfg, args.bins)
    _emit_csv(args, HistogramCSVGenerator.generate(rows), _manifest(args, cfg.seed))
    return EXIT_OK


def cmd_propagator_grid(args) -> int:
    columns, rows = experiments.propagator_grid(_asset(args), _control(args, required=False), args.axes,
                                                tuple(args.range1), tuple(args.range2), args.fixed)
    _emit_csv(args, CSVGenerator.generate(rows, columns), _manifest(args))
    return EXIT_OK


def _argv_from_manifest(manifest: RunManifest) -> list[str]:
    command = _COMMAND_PARSERS.get(manifest.command)
    if command is None or manifest.command == "rerun":
        raise ParameterError(f"manifest names an unknown command {manifest.command!r}")
    flags = {action.dest: action for action in command._actions if action.option_strings}
    argv = [manifest.command]
    for dest, value in manifest.parameters.items():
        action = flags.get(dest)
        if action is None:
            raise ParameterError(f"manifest parameter {dest!r} is not a flag of {manifest.command}")
        flag = action.option_strings[0]
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, *map(str, value)]
        else:
            argv += [flag, str(value)]
    return argv


def cmd_rerun(args) -> int:
    manifest = RunManifest.model_validate_json(args.manifest.read_text(encoding="utf-8"))
    if manifest.tool_version != config.TOOL_VERSION:
        logger.warning("manifest written by version %s, running %s", manifest.tool_version, config.TOOL_VERSION)
    argv = _argv_from_manifest(manifest)
    if args.out is not None:
        argv += ["--out", str(args.out)]
    logger.info("rerunning: %s", " ".join(argv))
    return main(argv)


def cmd_schema(args) -> int:
    _, schema = models_json_schema(
        [(PriceOutput, "serialization"), (McOutput, "serialization")], title="asianpath output"
    )
    sys.stdout.write(json.dumps(schema, indent=2) + "\n")
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (None, 0) else EXIT_USAGE
    config.configure_logging(args.log_level)

    try:
        return args.func(args)
    except (ValidationError, ParameterError, ConfigurationError) as e:
        print(f"asianpath {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, DegenerateCorrelationError, OverflowError) as e:
        print(f"asianpath {args.command}: domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"asianpath {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
