"""``daqc`` command line: compile, run, sweep and verify."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PRESETS, RunConfig, load_config
from .errors import CompileError, ConfigError, DAQCError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_COMPILE = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="daqc", description="Digital-analog schedule compiler and benchmark runner.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("compile", "compile the configured target into a schedule"),
                        ("run", "run the configured experiment"),
                        ("sweep", "run the configured experiment over its sweep list")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help=f"TOML/JSON file or preset name ({', '.join(PRESETS)})")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--out", default=None, help="output directory (default from config)")
        s.add_argument("--runs", type=int, default=None)
        s.add_argument("--no-noise", action="store_true")
        s.add_argument("--allow-fallback", action="store_true")
        if name != "compile":
            s.add_argument("--plot", action="store_true", help="also render an SVG line chart (needs matplotlib)")
    v = sub.add_parser("verify", help="run the golden-value suite")
    v.add_argument("--config", default=None, help="accepted for symmetry; not used")
    v.add_argument("--perturb", default=None, help=argparse.SUPPRESS)
    return p


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.apply_overrides(seed=args.seed, runs=args.runs, no_noise=args.no_noise,
                               allow_fallback=args.allow_fallback, out=args.out)


def cmd_compile(args) -> int:
    from .bench import atomic_write, compile_for, write_resolved
    from .executor import schedule_time_report

    cfg = _load(args)
    target, resource = cfg.build_target(), cfg.build_resource()
    try:
        sched = compile_for(cfg, target, resource, cfg.n_T[0])
    except CompileError as exc:
        print(f"daqc: compile failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        if cfg.n_qubits == 4 and cfg.topology == "ATA":
            print("daqc: N=4 all-to-all is the singular corner case of the sign matrix; "
                  "pass --allow-fallback to add single-site flips", file=sys.stderr)
        return EXIT_COMPILE
    out = Path(cfg.out_dir)
    atomic_write(out / "schedule.json", sched.to_json(indent=2, sort_keys=True) + "\n")
    atomic_write(out / "report.json", json.dumps(schedule_time_report(sched), indent=2, sort_keys=True) + "\n")
    write_resolved(cfg, out)
    print(f"wrote {out / 'schedule.json'} ({sched.n_analog} analog blocks, analog time {sched.analog_time:.6g})")
    return EXIT_OK


def cmd_run(args) -> int:
    from .bench import run_experiment

    cfg = _load(args)
    out = Path(cfg.out_dir)
    rows = run_experiment(cfg, out)
    failed = sum(1 for r in rows if str(r.get("status", "ok")) != "ok")
    print(f"wrote {len(rows)} rows to {out}" + (f" ({failed} failed)" if failed else ""))
    if getattr(args, "plot", False) or cfg.plot:
        from .plot import plot_results

        path = plot_results(cfg, out)
        if path:
            print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import modules_covered, run_checks

    try:
        checks = run_checks(args.perturb)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed; modules covered: "
          f"{', '.join(sorted(modules_covered(checks)))}")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "run": cmd_run, "sweep": cmd_run, "verify": cmd_verify}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"daqc: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompileError as exc:
        print(f"daqc: compile failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except DAQCError as exc:
        print(f"daqc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
