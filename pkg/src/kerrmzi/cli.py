"""Command-line scenario runner.

    kerrmzi run CONFIG [--out DIR] [--workers N]
    kerrmzi validate CONFIG
    kerrmzi preset NAME
    kerrmzi list-presets

Exit codes: 0 success, 2 configuration parse error, 3 domain error,
4 truncation failure.  ``KERRMZI_WORKERS`` sets the default worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import TruncationError
from .scenario import (
    ConfigError,
    DomainError,
    Scenario,
    evaluate_row,
    memory_estimate,
    parse_scenario,
    resolved_settings,
)

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_TRUNCATION = 0, 2, 3, 4
WORKERS_ENV = "KERRMZI_WORKERS"


def preset_names() -> list[str]:
    files = resources.files("kerrmzi").joinpath("presets").iterdir()
    return sorted(f.name[:-4] for f in files if f.name.endswith(".ini"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise KeyError(name)
    return resources.files("kerrmzi").joinpath("presets", f"{name}.ini").read_text(encoding="utf-8")


def load_config(path: str) -> Scenario:
    """Parse a scenario file; a bare preset name is accepted as well."""
    p = Path(path)
    if p.is_file():
        try:
            text = p.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
    elif path in preset_names():
        text = preset_text(path)
    else:
        raise ConfigError("config", f"no such file or preset: {path}")
    return parse_scenario(text)


def version_stamp() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return __version__
    if out.returncode != 0 or not out.stdout.strip():
        return __version__
    return f"{__version__}+g{out.stdout.strip()}"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(WORKERS_ENV, f"cannot parse {env!r} as an integer") from None
        if n < 1:
            raise DomainError(WORKERS_ENV, "must be at least 1")
        return n
    return os.cpu_count() or 1


def format_value(v: float) -> str:
    return repr(float(v))


def compute_rows(sc: Scenario, workers: int) -> list[list[float]]:
    indices = range(sc.points)
    if workers <= 1 or sc.points < 2:
        return [evaluate_row(sc, i) for i in indices]
    chunk = max(1, sc.points // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so rows follow the sweep index
        return list(pool.map(evaluate_row, [sc] * sc.points, indices, chunksize=chunk))


def write_outputs(sc: Scenario, rows: list[list[float]], out_dir: Path,
                  cutoffs: dict[str, int]) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = sc.columns()
    csv_path = out_dir / f"{sc.name}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    extrema = {}
    for j, col in enumerate(columns[1:], start=1):
        vals = [r[j] for r in rows]
        finite = [v for v in vals if v == v and abs(v) != float("inf")]
        extrema[col] = {"min": min(finite) if finite else None, "max": max(finite) if finite else None}
    summary = {
        "scenario": sc.name,
        "description": sc.description,
        "version": version_stamp(),
        "settings": resolved_settings(sc),
        "n_max": cutoffs,
        "columns": columns,
        "rows": len(rows),
        "csv": csv_path.name,
        "extrema": extrema,
    }
    json_path = out_dir / f"{sc.name}.json"
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return csv_path, json_path


def cmd_run(args) -> int:
    sc = load_config(args.config)
    cutoffs = sc.resolved_cutoffs()
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise DomainError("workers", "must be at least 1")
    rows = compute_rows(sc, min(workers, sc.points))
    csv_path, json_path = write_outputs(sc, rows, Path(args.out), cutoffs)
    print(f"wrote {csv_path} ({len(rows)} rows) and {json_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = load_config(args.config)
    cutoffs = sc.resolved_cutoffs()
    print(f"scenario {sc.name}: sweep {sc.sweep} over {sc.points} points, "
          f"{len(sc.series())} series, {len(sc.columns())} columns")
    for label, n_max in cutoffs.items():
        mib = memory_estimate(n_max) / 2 ** 20
        print(f"  {label}: N_max = {n_max}, sectors = {n_max + 1}, memory ~ {mib:.2f} MiB per state")
    return EXIT_OK


def cmd_preset(args) -> int:
    try:
        sys.stdout.write(preset_text(args.name))
    except KeyError:
        raise ConfigError("preset", f"unknown preset {args.name!r}; choose from {preset_names()}") from None
    return EXIT_OK


def cmd_list(args) -> int:
    for name in preset_names():
        sc = parse_scenario(preset_text(name))
        print(f"{name:8s} {sc.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrmzi", description="Kerr-nonlinear MZI scenario runner")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write CSV + JSON")
    p.add_argument("config", help="scenario file or preset name")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or CPU count)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a scenario without computing")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("preset", help="print a bundled scenario")
    p.add_argument("name")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("list-presets", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except TruncationError as exc:
        print(f"error: truncation: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION


if __name__ == "__main__":
    sys.exit(main())
