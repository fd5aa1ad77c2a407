"""Command line: ``hybridyn run|demo|validate``.

Exit codes: 0 success, 1 configuration error, 2 numerical invariant breach.
The output root defaults to ``$HYBRIDYN_OUTPUT`` (else ``./hybridyn-output``).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SCENARIOS, ConfigError, apply_overrides, config_from_mapping, parse_config
from .scenarios import EXIT_CONFIG, EXIT_OK, run_scenario


def _report(result) -> int:
    s = result.summary
    for a in s["assertions"]:
        mark = "PASS" if a["passed"] else "FAIL"
        print(f"{mark}  [{a['criterion']}] {a['name']}: {a['value']:.6g} {a['op']} {a['threshold']:.6g}")
    if s["error"]:
        print(f"ERROR  {s['error']}")
    print(f"{'passed' if s['passed'] else 'FAILED'}; artifacts in {result.directory}")
    return result.status


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hybridyn", description="Hybrid quantum-classical scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario described by a config file")
    run.add_argument("config")
    run.add_argument("--output", help="output root (overrides $HYBRIDYN_OUTPUT)")
    demo = sub.add_parser("demo", help="run a bundled scenario with default settings")
    demo.add_argument("scenario", choices=SCENARIOS)
    demo.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    demo.add_argument("--output", help="output root (overrides $HYBRIDYN_OUTPUT)")
    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    args = ap.parse_args(argv)

    try:
        if args.command == "demo":
            cfg = config_from_mapping(apply_overrides({"scenario": args.scenario}, args.override))
        else:
            cfg = _load(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok: {cfg.scenario} (L={cfg.L:g}, N={cfg.N}, dt={cfg.dt:g}, t_final={cfg.t_final:g})")
        return EXIT_OK
    return _report(run_scenario(cfg, args.output))


if __name__ == "__main__":
    sys.exit(main())
