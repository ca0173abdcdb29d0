"""Command-line experiment harness.

    crshadow <subcommand> [--config FILE] [--set KEY=VALUE ...] [--out DIR]
             [--replications N] [--master-seed S] [--workers W]

Every run writes its CSV tables plus ``manifest.txt`` into ``--out``. The
manifest is itself a valid config file, so ``--config DIR/manifest.txt``
reproduces the run byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, ConsistencyError, ConvergenceError, DomainError
from .experiments import PRESETS, Outcome, effective_config
from .scenario import format_config, load_config

SCHEMA_VERSION = 1

EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

SUBCOMMANDS = {
    "cdf": "cdf-compare",
    "moments": "moments",
    "skewness": "skewness-report",
    "calibrate": "calibrate",
    "pez": "pez-sweep",
    "rem": "rem-cdf",
    "access-compare": "access-compare",
}

HELP = {
    "cdf": "closed-form vs Monte Carlo single-interferer CDF and KS distances",
    "moments": "exact moments, skewness and two-moment lognormal fit",
    "skewness": "third-moment mismatch of the lognormal fit over a grid",
    "calibrate": "calibrated transmit constants and their Monte Carlo reliability",
    "pez": "exclusion-zone radius versus target SINR",
    "rem": "admitted-CR counts for the two REM schemes",
    "access-compare": "percentage of CRs admitted by REM and PEZ schemes",
}


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema-version: {SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_manifest(path: Path, preset: str, config: dict, outputs) -> None:
    header = [
        f"# crshadow {__version__}",
        f"# preset: {preset}",
        f"# outputs: {', '.join(outputs)}",
        f"# master_seed: {config['master_seed']}",
    ]
    path.write_text("\n".join(header) + "\n" + format_config(config))


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crshadow", description="Cognitive-radio interference experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, help="flat key = value scenario file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        p.add_argument("--replications", type=int, help="replications (samples for cdf)")
        p.add_argument("--master-seed", type=int, help="master seed for all random streams")
        p.add_argument("--workers", type=int, default=1, help="worker processes; results do not depend on it")
        if name == "pez":
            p.add_argument("--figure", choices=("sigma", "ratio"), default="sigma",
                           help="sweep shadowing spread or the R/Rc ratio")
    return parser


def resolve(args) -> tuple[str, dict]:
    preset_name = SUBCOMMANDS[args.command]
    if args.command == "pez" and args.figure == "ratio":
        preset_name = "pez-ratio"
    overrides = dict(load_config(args.config)) if args.config else {}
    overrides.update(_parse_set(args.set))
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.master_seed is not None:
        overrides["master_seed"] = args.master_seed
    return preset_name, effective_config(PRESETS[preset_name], overrides)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        preset_name, config = resolve(args)
    except OSError as exc:
        print(f"crshadow: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError) as exc:
        print(f"crshadow: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    preset = PRESETS[preset_name]
    try:
        outcome: Outcome = preset.runner(config, max(1, args.workers))
    except (ConfigError, DomainError) as exc:
        print(f"crshadow: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"crshadow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        args.out.mkdir(parents=True, exist_ok=True)
        for name, table in outcome.tables.items():
            write_csv(args.out / name, table.header, table.rows)
        write_manifest(args.out / "manifest.txt", preset_name, config, list(outcome.tables))
    except OSError as exc:
        print(f"crshadow: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    for line in outcome.summary:
        print(line)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
