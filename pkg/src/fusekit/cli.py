"""Command-line interface: train | fuse | evaluate | bench.

Configuration comes from defaults, then an optional JSON file
(--config), then generic dotted-name overrides (--entropy.alpha 1.5,
--split.train_fraction=0.8, --classifiers.0.epochs 100), then the named
convenience flags. Exit codes: 0 success, 1 usage or configuration
error, 2 data or parse error, 3 numeric or degenerate error.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys

from fusekit.errors import (
    DataFormatError,
    FusekitError,
    InvalidConfigError,
)
from fusekit.pipeline import (
    DEFAULT_CONFIG,
    _deep_merge,
    cmd_bench,
    cmd_evaluate,
    cmd_fuse,
    cmd_train,
)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as InvalidConfigError so
    main() can map them to exit code 1."""

    def error(self, message):
        raise InvalidConfigError(message)


def _add_common(sub):
    sub.add_argument("--config", metavar="PATH", help="JSON configuration file")
    sub.add_argument("--seed", type=int, help="master seed (non-negative)")
    sub.add_argument("--out", metavar="DIR", help="output directory")
    sub.add_argument(
        "--backend",
        choices=["pure", "compiled"],
        help="force a kernel backend (default: compiled when available)",
    )
    sub.add_argument("--alpha", type=float, help="entropy order (default 2)")
    sub.add_argument("--tau", type=float, help="probability threshold (default 0.1)")
    sub.add_argument(
        "--column-mode",
        choices=["literal", "normalized"],
        help="treat filtered columns as-is (literal) or renormalized",
    )
    sub.add_argument(
        "--fallback-uniform",
        action="store_true",
        default=None,
        help="fall back to uniform weights when total entropy is zero",
    )
    sub.add_argument(
        "--renormalize",
        action="store_true",
        default=None,
        help="rescale score rows whose sums drift beyond tolerance",
    )
    sub.add_argument(
        "--method",
        action="append",
        metavar="NAME",
        help="fusion method: sum, weighted, entropy, or "
        "entropy-subset:<name,name>; repeatable",
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="fusekit",
        description="Decision fusion for classifier score matrices using "
        "entropy-derived relative weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_train = sub.add_parser(
        "train",
        help="train the configured classifiers and write test-split scores",
    )
    _add_common(p_train)

    p_fuse = sub.add_parser(
        "fuse", help="fuse score CSVs (from a run directory or explicit files)"
    )
    _add_common(p_fuse)
    p_fuse.add_argument("--run", metavar="DIR", help="run directory from 'train'")
    p_fuse.add_argument("scores", nargs="*", help="score CSV files (>= 2)")

    p_eval = sub.add_parser(
        "evaluate", help="score fused and individual predictions against labels"
    )
    _add_common(p_eval)
    p_eval.add_argument("--run", metavar="DIR", help="run directory to evaluate")
    p_eval.add_argument(
        "--reference",
        choices=["UCI-HAR", "WISDM"],
        help="print published full-scale results alongside",
    )
    p_eval.add_argument("scores", nargs="*", help="score CSV files to evaluate")

    p_bench = sub.add_parser(
        "bench", help="time entropy-weighted fusion across sizes and backends"
    )
    _add_common(p_bench)
    p_bench.add_argument("--d", help="comma-separated row counts")
    p_bench.add_argument("--c", help="comma-separated class counts")
    p_bench.add_argument("--j", help="comma-separated classifier counts")
    p_bench.add_argument("--repeats", type=int, default=3, help="timings per cell")
    return parser


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(config: dict, dotted: str, value: str):
    """Set a config field by dotted path; numeric segments index lists."""
    keys = dotted.split(".")
    node = config
    for i, key in enumerate(keys[:-1]):
        if isinstance(node, list):
            try:
                node = node[int(key)]
            except (ValueError, IndexError):
                raise InvalidConfigError(
                    f"--{dotted}: {key!r} does not index the list at "
                    f"{'.'.join(keys[:i])!r}"
                ) from None
        elif isinstance(node, dict):
            node = node.setdefault(key, {})
        else:
            raise InvalidConfigError(
                f"--{dotted}: {'.'.join(keys[:i + 1])!r} is not a container"
            )
    leaf = keys[-1]
    parsed = _parse_value(value)
    if isinstance(node, list):
        try:
            node[int(leaf)] = parsed
        except (ValueError, IndexError):
            raise InvalidConfigError(f"--{dotted}: bad list index {leaf!r}") from None
    elif isinstance(node, dict):
        node[leaf] = parsed
    else:
        raise InvalidConfigError(f"--{dotted}: cannot assign into a scalar")


def parse_overrides(rest):
    """Interpret leftover '--a.b value' / '--a.b=value' args as overrides."""
    overrides = []
    i = 0
    while i < len(rest):
        arg = rest[i]
        if not arg.startswith("--") or arg == "--":
            raise InvalidConfigError(f"unexpected argument {arg!r}")
        body = arg[2:]
        if "=" in body:
            key, value = body.split("=", 1)
            i += 1
        else:
            key = body
            if i + 1 >= len(rest) or rest[i + 1].startswith("--"):
                raise InvalidConfigError(f"--{key} requires a value")
            value = rest[i + 1]
            i += 2
        if not key:
            raise InvalidConfigError(f"unexpected argument {arg!r}")
        overrides.append((key, value))
    return overrides


def _load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
    except FileNotFoundError:
        raise InvalidConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        raise InvalidConfigError(f"{path}: config must be a JSON object")
    return loaded


def _csv_ints(text, flag):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidConfigError(f"--{flag} wants comma-separated integers") from None


def build_config(args, rest) -> dict:
    # Overrides are applied over the merged defaults so dotted paths
    # with list indices (--classifiers.0.epochs) land in the real list.
    config = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        config = _deep_merge(config, _load_config_file(args.config))
    for dotted, value in parse_overrides(rest):
        apply_override(config, dotted, value)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out is not None:
        config["out"] = args.out
    if args.backend is not None:
        config["backend"] = args.backend
    entropy = config.setdefault("entropy", {})
    if args.alpha is not None:
        entropy["alpha"] = args.alpha
    if args.tau is not None:
        entropy["tau"] = args.tau
    if args.column_mode is not None:
        entropy["column_mode"] = args.column_mode
    if args.fallback_uniform is not None:
        entropy["fallback_uniform"] = args.fallback_uniform
    if args.renormalize is not None:
        config["renormalize"] = args.renormalize
    if args.method:
        config["methods"] = list(args.method)
    if getattr(args, "reference", None) is not None:
        config["reference"] = args.reference
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, rest = parser.parse_known_args(argv)
        config = build_config(args, rest)
        if args.command == "train":
            cmd_train(config)
        elif args.command == "fuse":
            cmd_fuse(config, run_dir=args.run, scores_paths=args.scores or None)
        elif args.command == "evaluate":
            cmd_evaluate(config, run_dir=args.run, scores_paths=args.scores or None)
        elif args.command == "bench":
            cmd_bench(
                config,
                d_values=_csv_ints(args.d, "d") if args.d else None,
                c_values=_csv_ints(args.c, "c") if args.c else None,
                j_values=_csv_ints(args.j, "j") if args.j else None,
                repeats=args.repeats,
            )
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except InvalidConfigError as exc:
        print(f"fusekit: usage error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"fusekit: data error: {exc}", file=sys.stderr)
        return 2
    except FusekitError as exc:
        print(f"fusekit: numeric error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
