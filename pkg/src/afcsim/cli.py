"""Command line: ``afcsim <scenario> [--config FILE] [--field value ...]``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure (including
any failed trial), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, kernels
from .config import FLOAT_FIELDS, INT_FIELDS, FIELD_DOCS, Scenario, from_mapping, load_config
from .errors import AfcSimError, ConfigError, OutputError
from .runner import emit_csv, run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_overrides(p: argparse.ArgumentParser) -> None:
    for name, doc in FIELD_DOCS.items():
        if name == "scenario":
            continue
        kind = float if name in FLOAT_FIELDS else int if name in INT_FIELDS else _bool if name == "barrier" else str
        flags = ["--" + name.replace("_", "-")] + (["-o", "--output"] if name == "output_path" else [])
        p.add_argument(*flags, dest=name, type=kind, default=None, help=doc)


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors, not argparse's default exit status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afcsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, parser_class=_Parser)
    for sc in Scenario:
        p = sub.add_parser(sc.value, help=f"run the {sc.value} scenario")
        p.add_argument("--config", help="TOML config file; flags override its values")
        p.add_argument("--workers", type=int, default=1, help="worker threads (output does not depend on it)")
        p.add_argument("--backend", choices=sorted(kernels.BACKENDS), default=None, help="kernel backend")
        _add_overrides(p)
    return parser


def _summary_text(report) -> str:
    if report.plan:
        return json.dumps({k: v for k, v in report.plan.items() if k != "schedule"}, indent=2)
    lines = [f"{len(report.records)} trials, {len(report.failures)} failed"]
    for col, agg in report.aggregates.items():
        if agg["n"]:
            lines.append(f"{col}: mean {agg['mean']:.6g}  variance {agg['variance']:.6g}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k in FIELD_DOCS and v is not None}
    try:
        if args.config:
            base = load_config(args.config)
            if base.scenario.value != args.scenario:
                raise ConfigError(
                    f"config is for scenario {base.scenario.value!r}, not {args.scenario!r}", "scenario"
                )
            config = base.replace(**overrides)
        else:
            config = from_mapping({**overrides, "scenario": args.scenario})
        if config.scenario.stochastic and config.seed is None:
            raise ConfigError("--seed (or seed in the config) is required for stochastic scenarios", "seed")
        report = run(config, workers=args.workers, backend=args.backend)
        if config.output_path:
            emit_csv(report, config.output_path)
    except ConfigError as exc:
        field = f" [{exc.field}]" if getattr(exc, "field", None) else ""
        print(f"config error{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AfcSimError, ArithmeticError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(_summary_text(report))
    if report.failures:
        print(f"{len(report.failures)} trial(s) failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
