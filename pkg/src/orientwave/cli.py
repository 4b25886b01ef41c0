"""Command line entry point: ``orientwave <scenario> --config <path>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SCENARIOS, parse_config
from .errors import IoError, OrientwaveError, ParseError, ValidationError
from .scenarios import run_many, write_report

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_BAD_INPUT = 2


def _epsilons(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(e) for e in text.split(",") if e.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("at least one epsilon is required")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orientwave", description="Run a director-wave verification scenario.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", required=True, type=Path, help="JSON scenario configuration")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: config output.dir)")
    p.add_argument("--resolution", type=int, default=None, help="override the grid resolution")
    p.add_argument("--epsilon", type=_epsilons, default=None, help="comma-separated epsilon values")
    return p


def _override_resolution(cfg, n: int):
    if n < 3:
        raise ValidationError("--resolution must be at least 3")
    changes = {"grid": cfg.grid.__class__(cfg.grid.x_min, cfg.grid.x_max, n)}
    if cfg.resolutions:
        # keep the number of levels, halving downward from the requested finest grid
        count = len(cfg.resolutions)
        levels = tuple(max(16, n // 2 ** (count - 1 - i)) for i in range(count))
        if len(set(levels)) != count:
            raise ValidationError(f"--resolution {n} is too coarse for {count} refinement levels")
        changes["resolutions"] = levels
    return cfg.replace(**changes)


def load(args) -> object:
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {args.config}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"config {args.config} is not UTF-8: {exc}") from exc
    cfg = parse_config(text)
    if cfg.scenario != args.scenario:
        raise ValidationError(f"config is for scenario {cfg.scenario!r}, command asked for {args.scenario!r}")
    if args.resolution is not None:
        cfg = _override_resolution(cfg, args.resolution)
    if args.epsilon is not None:
        if any(not 0.0 < e <= 0.5 for e in args.epsilon):
            raise ValidationError("--epsilon values must lie in (0, 0.5]")
        cfg = cfg.replace(epsilon=args.epsilon)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args)
        (report,) = run_many([cfg])
        out = args.out if args.out is not None else Path(cfg.output_dir)
        write_report(out, report, cfg.series)
    except (ParseError, ValidationError, IoError) as exc:
        print(f"orientwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OrientwaveError as exc:
        print(f"orientwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED_CHECKS
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
    print(f"{report.scenario}: {'all checks passed' if report.passed else 'some checks failed'}")
    return EXIT_OK if report.passed else EXIT_FAILED_CHECKS


if __name__ == "__main__":
    sys.exit(main())
