"""Command-line entry point.

Configuration precedence: model defaults < BIPOLARON_<COMMAND>_<KEY> environment variables
(a .env file is loaded) < --config file section < explicit flags.
"""
import argparse
import os
import sys
import time
import typing
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

from src.core.constants import DEFAULT_SEED
from src.core.debug_logger import print_debug, set_verbosity, warn
from src.core.exceptions import BipolaronError, ConfigError
from src.io import parse_value, read_section, write_manifest

load_dotenv()

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from e


TYPES = {"float": float, "int": lambda t: int(t, 0), "str": str, "floats": _floats}


def build_parser():
    from src.cli.routes import ROUTES

    parser = UsageParser(prog="bipolaron", description="Strong-coupling polaron and bipolaron toolkit")
    common = UsageParser(add_help=False)
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--format", choices=("json", "tsv", "both"), default="both")
    common.add_argument("--seed", type=lambda t: int(t, 0), default=None, help="64-bit seed for every random choice")
    common.add_argument("--jobs", type=int, default=1, help="worker cap for parallel levels")
    common.add_argument("--config", default=None, help="key=value file with [command] sections")
    common.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)
    for route in ROUTES.values():
        p = sub.add_parser(route.name, help=route.help, parents=[common])
        for name, dest, kind, help_ in route.flags:
            if kind == "true":
                p.add_argument(name, dest=dest, action="store_const", const=True, default=None, help=help_)
            elif kind == "false":
                p.add_argument(name, dest=dest, action="store_const", const=False, default=None, help=help_)
            else:
                p.add_argument(name, dest=dest, type=TYPES[kind], default=None, help=help_)
    return parser


def _is_tuple(annotation):
    return typing.get_origin(annotation) is tuple


def _coerce(model_cls, key, value):
    field = model_cls.model_fields[key]
    if _is_tuple(field.annotation) and value is not None and not isinstance(value, tuple):
        return (value,)
    return value


def _layer(model_cls, raw, values, nested):
    """Place raw key/value pairs onto the model's fields (or a nested optimizer model)."""
    for key, value in raw.items():
        if key in model_cls.model_fields and key not in nested:
            values[key] = _coerce(model_cls, key, value)
            continue
        for name, nested_cls in nested.items():
            if name in model_cls.model_fields and key in nested_cls.model_fields:
                values.setdefault(name, {})[key] = _coerce(nested_cls, key, value)
                break


def resolve_config(command, model_cls, args, flag_values):
    from src.cli.routes import NESTED

    values = {}
    fields = set(model_cls.model_fields)
    for name, nested_cls in NESTED.items():
        if name in fields:
            fields |= set(nested_cls.model_fields)
    prefix = f"BIPOLARON_{command.upper()}_"
    env = {k[len(prefix):].lower(): parse_value(v) for k, v in os.environ.items() if k.startswith(prefix)}
    env = {next((f for f in fields if f.lower() == k), k): v for k, v in env.items()}
    _layer(model_cls, env, values, NESTED)
    if args.config:
        file_values = {k: parse_value(v) for k, v in read_section(args.config, command).items()}
        _layer(model_cls, file_values, values, NESTED)
    _layer(model_cls, flag_values, values, NESTED)
    if args.seed is not None:
        _layer(model_cls, {"seed": args.seed}, values, NESTED)
    try:
        return model_cls.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"invalid {command} configuration: {e}") from e


def _seed_of(configs):
    for c in configs:
        seed = getattr(c, "seed", None) or getattr(getattr(c, "optimizer", None), "seed", None)
        if seed is not None:
            return seed
    return DEFAULT_SEED


def main(argv=None):
    """Run one subcommand; returns 0 on success, 1 on usage errors, 2 on numerical failures."""
    from src.cli.routes import ROUTES

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    set_verbosity(args.verbose)
    route = ROUTES[args.command]
    flag_values = {dest: getattr(args, dest) for _, dest, _, _ in route.flags if getattr(args, dest) is not None}
    out = Path(args.out)
    start = time.perf_counter()
    configs = []
    try:
        configs = [resolve_config(args.command, m, args, flag_values) for m in route.models]
        config = configs[0] if len(configs) == 1 else tuple(configs)
        paths, summary, tolerances = route.handler(config, out, args.format, jobs=args.jobs)
        code = EXIT_OK
    except ConfigError as e:
        warn(str(e))
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (BipolaronError, ArithmeticError, ValueError) as e:
        warn(f"{args.command} failed: {e}")
        print(f"numerical failure: {e}", file=sys.stderr)
        paths, summary, tolerances, code = [], None, {}, EXIT_NUMERICAL

    merged = {}
    for c in configs:
        merged.update(c.model_dump())
    from src.cli.models import RunManifest
    manifest = RunManifest(command=args.command, config=merged, seed=_seed_of(configs),
                           inputs=[args.config] if args.config else [], outputs=[str(p) for p in paths],
                           wall_time=time.perf_counter() - start, tolerances=tolerances, exit_code=code)
    write_manifest(manifest, out)
    if summary:
        print(summary)
    print_debug(f"{args.command} finished with exit code {code} in {manifest.wall_time:.1f}s")
    return code
