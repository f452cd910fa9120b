"""Command-line driver: ``windsoup <experiment> --config <path> [--seed N] [--replicas N] [--out DIR]``.

Writes ``<out>/<experiment>.csv`` (raw per-replica observables, one fixed
header per experiment) and ``<out>/<experiment>.json`` (checks and run
metadata). Exit status: 0 when every gated check passes, 1 on a failed check
or a numerical failure, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
import typing

import numpy as np

from .errors import DomainError, NumericalError, PointOnPathError, PrecisionError
from .experiments import (EXPERIMENT_NAMES, EXPERIMENTS, FIELD_TYPES, ConfigError, ExperimentConfig,
                          replica_rows, summarize, with_overrides)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_PI_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*?)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def _parse_float(text: str) -> float:
    """Floats, optionally as multiples of pi: ``pi``, ``1.5*pi``, ``pi/2``."""
    m = _PI_RE.match(text)
    if m:
        coef = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
        val = coef * math.pi
        return val / float(m.group(2)) if m.group(2) else val
    return float(text)


def _parse_int(text: str) -> int:
    f = float(text) if any(c in text for c in ".eE") else None
    if f is not None:
        if not f.is_integer():
            raise ValueError(text)
        return int(f)
    return int(text, 0)


def _coerce(key: str, text: str):
    kind = FIELD_TYPES[key]
    optional = "None" in kind
    if optional and text.lower() in ("auto", "none", "default"):
        return None
    try:
        if kind.startswith("float"):
            return _parse_float(text)
        if kind.startswith("int"):
            return _parse_int(text)
        return text
    except ValueError:
        base = kind.split("|")[0].strip()
        raise ConfigError(key, f"expected {base}, got {text!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Line-oriented ``key = value`` text; ``#`` starts a comment. Missing keys take defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno} is not of the form key = value")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "given twice")
        values[key] = _coerce(key, val)
    return ExperimentConfig(**values)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(v) for v in r])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="windsoup", description="Loop-soup winding field experiments.")
    p.add_argument("experiment", choices=EXPERIMENT_NAMES)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="64-bit master seed (overrides the config)")
    p.add_argument("--replicas", type=int, help="number of replicas (overrides the config)")
    p.add_argument("--out", help="output directory (overrides output_path)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    return p


def load_config(args) -> ExperimentConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    cfg = parse_config(text)
    if cfg.experiment is not None and cfg.experiment != args.experiment:
        raise ConfigError("experiment", f"config names {cfg.experiment!r} but {args.experiment!r} was requested")
    # CLI flags share the config key names, so validation errors name the flag
    return with_overrides(cfg, experiment=args.experiment, seed=args.seed, replicas=args.replicas,
                          output_path=args.out)


def main(argv: typing.Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        cfg = load_config(args)
    except (ConfigError, DomainError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"windsoup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = cfg.output_path
    os.makedirs(out, exist_ok=True)
    stem = os.path.join(out, cfg.experiment)
    numerical = (NumericalError, PrecisionError, PointOnPathError, FloatingPointError, OverflowError)
    try:
        rows = replica_rows(cfg, args.workers)
        write_csv(stem + ".csv", EXPERIMENTS[cfg.experiment][0], rows)
        result = summarize(cfg, rows)
    except DomainError as exc:
        print(f"windsoup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except numerical as exc:
        print(f"windsoup: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    with open(stem + ".json", "w", encoding="utf-8") as fh:
        json.dump(result.summary(cfg), fh, indent=2, sort_keys=False)
        fh.write("\n")
    for c in result.checks:
        flag = "PASS" if c.passed else "FAIL"
        gate = "" if c.gated else " (not gated)"
        print(f"{flag} {c.name}: estimate={c.estimate:.6g} reference={c.reference_value:.6g} "
              f"[{c.reference_provenance}]{gate}")
    return EXIT_OK if result.all_pass else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
