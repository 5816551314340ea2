"""Command-line entry point: ``swarmform run | sweep | validate``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dynamics import NumericalDivergence
from .scenario import ConfigError, ScenarioConfig, run, write_metrics, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


def _seed_span(text: str) -> range:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed span {text!r}; expected A..B") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad seed span {text!r}")
    return range(lo, hi + 1)


def _ranges(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("ranges must be positive numbers")
    return vals


class _Parser(argparse.ArgumentParser):
    # argparse's own usage-error code (2) is reserved for numerical divergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swarmform", description="Spring-damper swarm formation simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int, help="override max_steps")
    p.add_argument("--out-dir")

    p = sub.add_parser("sweep", help="run a seed x sensing-range grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", type=_seed_span, required=True, metavar="A..B")
    p.add_argument("--range", dest="ranges", type=_ranges, required=True, metavar="R1,R2,...")
    p.add_argument("--steps", type=int)
    p.add_argument("--out-dir")

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("--config", required=True)
    return parser


def _load(args) -> ScenarioConfig:
    config = ScenarioConfig.load(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "steps", None) is not None:
        overrides["max_steps"] = args.steps
    return config.replace(**overrides).validate()


def _fmt_range(r: float) -> str:
    return f"{r:g}"


def cmd_run(args) -> int:
    config = _load(args)
    result = run(config)
    for path in write_outputs(result, args.out_dir):
        print(path)
    s = result.summary
    print(f"converged={s['converged']} steps={s['steps']} phase={s['final_phase']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _load(args)
    out_dir = Path(args.out_dir or base.output.dir or ".")
    rows = ["seed,range,component_count,converged,steps"]
    for seed in args.seeds:
        for r in args.ranges:
            result = run(base.replace(seed=seed, sensing_range=r))
            write_metrics(result, out_dir / f"metrics_seed{seed}_range{_fmt_range(r)}.json")
            s = result.summary
            rows.append(f"{seed},{_fmt_range(r)},{s['final_component_count']},{str(s['converged']).lower()},{s['steps']}")
    agg = out_dir / "sweep.csv"
    try:
        agg.parent.mkdir(parents=True, exist_ok=True)
        agg.write_text("\n".join(rows) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {agg}: {exc.strerror or exc}") from exc
    print(agg)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = ScenarioConfig.load(args.config)
    problems = config.problems()
    if problems:
        for msg in problems:
            print(f"invalid: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps({"valid": True, "behavior": config.behavior, "n_agents": config.n_agents}))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalDivergence as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
