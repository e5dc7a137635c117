"""``waldo`` command line: split a graph, pick k candidate pairs, report R@k/P@k."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import typing
from pathlib import Path

from .experiment import (
    GROUPINGS,
    METHODS,
    PROXIMITIES,
    SPLITS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
)
from .graph import EdgeListError
from .embeddings import EmbeddingFormatError


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split(sep, 1))
            out[key.replace("-", "_")] = value
    return out


def _coerce(name: str, value: str):
    hints = typing.get_type_hints(ExperimentConfig)
    if name not in hints:
        raise ConfigError(f"unknown config key {name!r}")
    hint = hints[name]
    args = [a for a in typing.get_args(hint) if a is not type(None)]
    target = args[0] if args else hint
    if target is bool:
        low = value.lower()
        if low not in ("1", "0", "true", "false", "yes", "no"):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return low in ("1", "true", "yes")
    try:
        if target is int:
            return int(float(value)) if "e" in value.lower() else int(value)
        if target is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {value!r}") from None
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="waldo",
        description="Select k candidate links with a class roadmap and score them on held-out edges.",
    )
    p.add_argument("--config", help="flat key=value file; CLI flags override it")
    p.add_argument("--graph", help="edge list (u v, or u v t for temporal splits)")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--k", type=int)
    p.add_argument("--grouping", choices=GROUPINGS)
    p.add_argument("--bins", type=int)
    p.add_argument("--sg-clusters", type=int)
    p.add_argument("--cg-clusters", type=int)
    p.add_argument("--proximity", choices=PROXIMITIES)
    p.add_argument("--emb-file")
    p.add_argument("--struct-emb-file")
    p.add_argument("--tau", type=int)
    p.add_argument("--zeta", type=float)
    p.add_argument("--split", choices=SPLITS)
    p.add_argument("--fraction", type=float)
    p.add_argument("--seeds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--bipartite", action="store_true", default=None)
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    values: dict = {}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            values[key] = _coerce(key, raw)
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key, value in vars(args).items():
        if key in names and value is not None:
            values[key] = value
    if "graph" not in values:
        raise ConfigError("--graph is required")
    return ExperimentConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        report = run_experiment(cfg)
    except (ConfigError, EdgeListError, EmbeddingFormatError, FileNotFoundError) as exc:
        print(f"waldo: error: {exc}", file=sys.stderr)
        return 2
    s = report["summary"]
    fmt = lambda x: "n/a" if x is None else f"{x:.4f}"
    print(
        f"{cfg.method} k={cfg.k} seeds={cfg.seeds}: "
        f"R@k={fmt(s['recall_mean'])} +/- {fmt(s['recall_std'])}  "
        f"P@k={fmt(s['precision_mean'])} +/- {fmt(s['precision_std'])}  "
        f"runtime={s['runtime_mean']:.2f}s"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
