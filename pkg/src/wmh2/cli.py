"""``wmh2 verify|simulate|analyze|scan --config FILE [--seed N] [--out DIR]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .spectral.grid import ContractError

EXIT_PASS, EXIT_BREACH, EXIT_CONFIG = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="wmh2", description=__doc__)
    p.add_argument("command", choices=("verify", "simulate", "analyze", "scan"))
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (default: the config's out key)")
    p.add_argument("--run", default=None, help="run directory for analyze (default: OUT/simulate)")
    return p


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.out is not None:
        kw["out"] = args.out
    return cfg.replace(**kw).validate() if kw else cfg


def execute(command: str, cfg: RunConfig, run_dir=None, echo=print):
    from . import harness as H

    root = Path(cfg.out)
    out = root / command
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text())
    if command == "verify":
        checks = H.run_verify(cfg)
    elif command == "simulate":
        _, checks = H.run_simulation(cfg, out)
    elif command == "analyze":
        checks = H.run_analysis(cfg, Path(run_dir) if run_dir else root / "simulate", out)
    else:
        checks = H.run_scan(cfg, out)
    (out / "report.txt").write_text("".join(c.line() + "\n" for c in checks))
    for c in checks:
        echo(c.line())
    entry = H.manifest_entry(command, cfg, checks)
    H.append_manifest(root, entry)
    return checks, entry


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except (ConfigError, ContractError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _, entry = execute(args.command, cfg, args.run)
    except (ContractError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_PASS if entry["pass"] else EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())
