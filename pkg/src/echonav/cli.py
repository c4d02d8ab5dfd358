"""Command-line entry point: ``echonav {noise,characterize,explore,corridor,calibrate}``.

Exit codes: 0 success, 2 configuration error, 3 simulation assertion failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .envfile import SceneError
from .experiments import (
    CalibrationError,
    ConfigError,
    ExperimentSpec,
    KINDS,
    load_config_file,
    parse_assignment,
    parse_seeds,
    run,
)
from .sim import SimulationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3

HELP = {
    "noise": "receive-only motor-noise study over slow/fast filter windows",
    "characterize": "distance sweep against a single wall (profiles + detection rates)",
    "explore": "seeded random-exploration flights, ultrasound vs laser ToF",
    "corridor": "open-loop lateral fly-by logging both sensors",
    "calibrate": "fit the echo amplitude constant to the reference wall peak",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key=value spec file")
    common.add_argument("--env", metavar="PATH", help="scene file, or the name of a bundled scene")
    common.add_argument("--seeds", metavar="LIST", help="e.g. 0-9 or 1,4,7")
    common.add_argument("--out", metavar="DIR", help="output directory (default: results/<kind>)")
    common.add_argument(
        "--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
        help="override a dotted setting such as oa.threshold=6000 (repeatable)",
    )
    common.add_argument("--sensor", choices=("us", "tof", "both"), help="sensor kind(s) to fly")
    common.add_argument("--calibration", metavar="PATH", help="calibration file from 'calibrate'")
    common.add_argument("--no-plots", action="store_true", help="write CSV only")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="echonav", description="Ultrasonic nano-drone obstacle-avoidance experiments.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sub.add_parser(kind, parents=[common], help=HELP[kind])
    return parser


def spec_from_args(args) -> ExperimentSpec:
    file_values = load_config_file(args.config) if args.config else {}
    file_kind = file_values.pop("kind", args.kind)
    if file_kind != args.kind:
        raise ConfigError(f"config file is for {file_kind!r}, not {args.kind!r}")
    env = args.env or file_values.pop("env", None)
    seeds = args.seeds or file_values.pop("seeds", "0")
    out = args.out or file_values.pop("out", f"results/{args.kind}")
    sensor = args.sensor or file_values.pop("sensor", "both")
    calibration = args.calibration or file_values.pop("calibration", None)
    for leftover in ("env", "seeds", "out", "sensor", "calibration"):
        file_values.pop(leftover, None)
    overrides = dict(file_values)
    for item in args.overrides:
        key, value = parse_assignment(item)
        overrides[key] = value
    return ExperimentSpec(
        kind=args.kind,
        env_path=env,
        seeds=parse_seeds(seeds),
        overrides=overrides,
        output_dir=out,
        sensor=sensor,
        plots=not args.no_plots,
        calibration=calibration,
    )


def _report(spec: ExperimentSpec, result):
    kind = spec.kind
    if kind == "noise":
        print(f"{'Ks':>3} {'Kf':>3} {'std [AU]':>10} {'mean [AU]':>10} {'ratio':>7}")
        for r in result:
            print(f"{r.k_slow:>3} {r.k_fast:>3} {r.std:10.1f} {r.mean:10.1f} {r.std_ratio:7.3f}")
    elif kind == "characterize":
        print(f"wall angle {result.angle_deg:.1f} deg, {result.material_label}")
        for d in result.distances:
            print(f"  d={d:4.2f} m  expected {result.expected[d]:.3f} m  detect rate {result.detection_rate(d):.2f}")
    elif kind == "explore":
        if len(result.tables) == 2:
            print(f"distance ratio us/tof: {result.ratio():.1f}x")
    elif kind == "corridor":
        for name, s in result.by_region().items():
            print(
                f"  {name:>9}: us present {s['us_present']:.2f}  tof present {s['tof_present']:.2f}"
                f"  us peak {s['us_peak']:.0f} AU"
            )
    elif kind == "calibrate":
        print(f"a0 = {result.a0!r}  ({result.peak:.0f} AU at {result.distance} m, {result.iterations} iterations)")
    if spec.output_dir is not None:
        print(f"outputs in {spec.output_dir}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        spec = spec_from_args(args)
        result = run(spec)
    except (ConfigError, SceneError) as exc:
        print(f"echonav: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"echonav: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, CalibrationError) as exc:
        print(f"echonav: simulation failure: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    _report(spec, result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
