"""
Command line for the simulator.

    python -m backend.harness.cli equiv-check --seed 7
    python -m backend.harness.cli scatter --ni-list 16,64,256 --trials 1000 --out results/scatter.csv
    python -m backend.harness.cli optimize --config configs/optimize_rayleigh.json
    python -m backend.harness.cli validate-config --config configs/optimize_rayleigh.json

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from backend.api.config import Settings, settings
from backend.core.errors import ConfigError, RISNetError
from backend.harness.scenario import parse_ni_list
from backend.harness.sweep import run_equivalence_check, run_sweep
from backend.models import ArchitectureFamily, ScenarioConfig

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def seed_arg(text: str) -> int:
    """argparse type for master seeds: a non-negative integer."""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {value}")
    return value


def parse_architectures(text: str) -> List[Dict[str, Any]]:
    """'single,group-4,fully,tree,forest-4' -> architecture entries."""
    entries = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        name, _, size = token.partition("-")
        try:
            family = ArchitectureFamily(name)
        except ValueError:
            raise ConfigError([f"unknown architecture {token!r}"])
        entry: Dict[str, Any] = {"family": family.value}
        if size:
            if not size.isdigit():
                raise ConfigError([f"group size in {token!r} must be an integer"])
            entry["group_size"] = int(size)
        entries.append(entry)
    return entries


def _validation_messages(error: ValidationError) -> List[str]:
    messages = []
    for err in error.errors():
        loc = ".".join(str(part) for part in err["loc"])
        messages.append(f"{loc}: {err['msg']}" if loc else err["msg"])
    return messages


def read_config_file(path: str) -> Dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError([f"config file not found: {path}"], path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError([f"invalid JSON at line {e.lineno}: {e.msg}"], path)
    except OSError as e:
        raise ConfigError([f"cannot read config: {e.strerror or e}"], path)
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a JSON object"], path)
    return data


def build_config(args: argparse.Namespace, experiment: Optional[str] = None) -> ScenarioConfig:
    """File values, then RISNET_MASTER_SEED, then command-line flags."""
    data: Dict[str, Any] = read_config_file(args.config) if args.config else {}
    if experiment:
        data["experiment"] = experiment

    env_seed = Settings().master_seed
    if env_seed is not None:
        data["master_seed"] = env_seed
    if getattr(args, "seed", None) is not None:
        data["master_seed"] = args.seed
    if getattr(args, "out", None):
        data["output"] = args.out
    if getattr(args, "trials", None) is not None:
        data["trials"] = args.trials
    if getattr(args, "ni_list", None):
        try:
            data["n_i_list"] = parse_ni_list(args.ni_list)
        except ValueError:
            raise ConfigError([f"--ni-list must be comma-separated integers, got {args.ni_list!r}"])
    if getattr(args, "arch", None):
        data["architectures"] = parse_architectures(args.arch)
    if getattr(args, "coupling", None):
        data["coupling"] = args.coupling == "on"
    if getattr(args, "format", None):
        data["format"] = args.format
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_validation_messages(e), args.config)


def cmd_equiv_check(args: argparse.Namespace) -> int:
    env_seed = Settings().master_seed
    seed = args.seed if args.seed is not None else env_seed if env_seed is not None else settings.default_seed
    if seed < 0:
        raise ConfigError([f"master seed must be non-negative, got {seed}"])
    report = run_equivalence_check(seed, args.fixtures)
    status = "✅" if report.passed else "❌"
    print(f"{status} max three-way deviation over {report.fixtures} fixtures: {report.max_deviation:.3e}")
    return EXIT_OK if report.passed else EXIT_RUNTIME


def _print_scatter(result) -> None:
    print(f"{'ni':>6} {'mean_pr_db':>12} {'mean_prp_db':>12} {'delta_emp':>10} {'delta_closed':>12}")
    for row in result.scatter:
        closed = f"{row.delta_closed:>12.4f}" if row.delta_closed is not None else f"{'-':>12}"
        print(f"{row.ni:>6} {row.mean_pr_db:>12.4f} {row.mean_prp_db:>12.4f} {row.delta_emp:>10.4f} {closed}")


def _print_summary(result) -> None:
    for row in result.summary:
        print(f"   N_I={row.n_i:<4} {row.architecture:<10} {row.mean_power_db:9.3f} dB "
              f"({row.trials} trials, {row.nonconverged} not converged)")


def cmd_scatter(args: argparse.Namespace) -> int:
    cfg = build_config(args, "scatter")
    print(f"📡 Structural-scattering sweep, N_I={cfg.n_i_list}, {cfg.trials} trials")
    result = run_sweep(cfg)
    _print_scatter(result)
    for path in result.outputs:
        print(f"💾 Wrote {path}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    cfg = build_config(args, "optimize")
    labels = ", ".join(entry.label for entry in cfg.architectures)
    print(f"🚀 Optimization sweep, N_I={cfg.n_i_list}, [{labels}], coupling={'on' if cfg.coupling else 'off'}")
    result = run_sweep(cfg, verbose=args.verbose)
    _print_summary(result)
    for path in result.outputs:
        print(f"💾 Wrote {path}")
    fraction = result.nonconverged_fraction
    if fraction > cfg.max_nonconverged_fraction:
        print(f"❌ {fraction:.1%} of runs did not converge (limit {cfg.max_nonconverged_fraction:.1%})")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    print(f"✅ {args.config or 'defaults'}: valid {cfg.experiment} recipe (master seed {cfg.master_seed})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risnet", description="RIS multiport-network channel simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    equiv = sub.add_parser("equiv-check", help="Z/Y/S equivalence on random passive networks")
    equiv.add_argument("--seed", type=seed_arg, default=None)
    equiv.add_argument("--fixtures", type=int, default=100)
    equiv.set_defaults(handler=cmd_equiv_check)

    for name, handler, help_text in (
        ("scatter", cmd_scatter, "structural-scattering Monte Carlo sweep"),
        ("optimize", cmd_optimize, "received-power optimization sweep"),
        ("validate-config", cmd_validate_config, "validate a JSON recipe without running it"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=seed_arg, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--ni-list", dest="ni_list", type=str, default=None)
        p.add_argument("--arch", type=str, default=None, help="e.g. single,group-4,fully,tree,forest-4")
        p.add_argument("--coupling", choices=["on", "off"], default=None)
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(handler=handler)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except (RISNetError, OSError, ValueError) as e:
        print(f"❌ Run failed: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
