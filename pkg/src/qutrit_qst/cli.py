"""Command-line entry point: ``qutrit-qst <subcommand> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import sweep
from .checks import run_checks
from .config import ConfigError, RunConfig, parse_config
from .dynamics import IntegratorError
from .hilbert import DomainError
from .protocol import run_transfer

log = logging.getLogger("qutrit_qst")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameter overrides")
    common.add_argument("--dt", type=float, help="RK4 step in ns (overrides config)")
    common.add_argument("--reset-clock", action="store_true", default=None,
                        help="restart the rotating-frame clock at the start of stage 2")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="qutrit-qst",
        description="Simulate qutrit-to-qutrit state transfer through two resonators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transfer", parents=[common], help="run one transfer and print F")
    p.add_argument("--ideal", action="store_true",
                   help="no detuning, crosstalk or dissipation")

    p = sub.add_parser("sweep-g", parents=[common], help="fidelity vs g and g12/g (CSV)")
    p.add_argument("--out", help="CSV path (default: config 'out' or sweep_g.csv)")
    p.add_argument("--g-mhz", type=_floats, help="g/2pi values in MHz")
    p.add_argument("--ratios", type=_floats, help="g12/g values")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep-delta-c", parents=[common], help="fidelity vs delta and c (CSV)")
    p.add_argument("--out", help="CSV path (default: config 'out' or sweep_delta_c.csv)")
    p.add_argument("--delta-mhz", type=_floats, help="delta/2pi values in MHz")
    p.add_argument("--c-values", type=_floats, help="c = g_fg/g_eg values")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("convergence", parents=[common], help="dt-refinement ladder")
    p.add_argument("--levels", type=int, default=2, help="number of refinements")

    sub.add_parser("check", parents=[common], help="run the built-in oracle checks")
    return parser


def load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.dt is not None:
        overrides["dt_ns"] = args.dt
    if args.reset_clock:
        overrides["reset_clock"] = True
    if getattr(args, "out", None):
        overrides["out"] = args.out
    return cfg.replace(**overrides) if overrides else cfg


def _transfer(cfg: RunConfig, args) -> int:
    res = run_transfer(cfg.params(), cfg.input_state(), cfg.integrator(),
                       ideal=args.ideal, reset_clock=cfg.reset_clock)
    print(f"t1 = {res.t1:.4f} ns")
    print(f"t2 = {res.t2:.4f} ns")
    print(f"t_total = {res.t_total:.4f} ns")
    print(f"F = {res.fidelity:.6f}")
    print(f"steps = {res.steps}, max trace drift = {res.max_trace_drift:.2e}, "
          f"min eigenvalue = {res.min_eigenvalue:.2e}")
    return EXIT_OK


def _sweep_g(cfg: RunConfig, args) -> int:
    base = cfg.params()
    g_mhz = args.g_mhz or sweep.DEFAULT_G_GRID_MHZ
    ratios = args.ratios if args.ratios is not None else sweep.DEFAULT_G12_RATIOS
    table = sweep.sweep_coupling(sweep.grid_mhz(g_mhz), ratios, base, cfg.input_state(),
                                 cfg.integrator(), workers=args.workers)
    out = cfg.out or "sweep_g.csv"
    sweep.write_csv(table, out)
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_OK


def _sweep_delta_c(cfg: RunConfig, args) -> int:
    base = cfg.params()
    deltas = args.delta_mhz or sweep.DEFAULT_DELTA_GRID_MHZ
    cs = args.c_values or sweep.DEFAULT_C_GRID
    table = sweep.sweep_detuning_asymmetry(sweep.grid_mhz(deltas), cs, base,
                                           cfg.input_state(), cfg.integrator(),
                                           workers=args.workers)
    out = cfg.out or "sweep_delta_c.csv"
    sweep.write_csv(table, out)
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_OK


def _convergence(cfg: RunConfig, args) -> int:
    p, s, base = cfg.params(), cfg.input_state(), cfg.integrator()
    prev = run_transfer(p, s, base, reset_clock=cfg.reset_clock).fidelity
    print(f"dt = {base.dt:.6g} ns  F = {prev:.10f}")
    ok = True
    for level in range(1, args.levels + 1):
        icfg = base.refined(level)
        f = run_transfer(p, s, icfg, reset_clock=cfg.reset_clock).fidelity
        change = abs(f - prev)
        ok &= change < base.convergence_tol
        print(f"dt = {icfg.dt:.6g} ns  F = {f:.10f}  |dF| = {change:.3e}")
        prev = f
    print("converged" if ok else f"NOT converged at tolerance {base.convergence_tol:g}")
    return EXIT_OK if ok else EXIT_FAIL


def _check(cfg: RunConfig, args) -> int:
    results = run_checks(cfg.params(), cfg.integrator())
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


COMMANDS = {
    "transfer": _transfer,
    "sweep-g": _sweep_g,
    "sweep-delta-c": _sweep_delta_c,
    "convergence": _convergence,
    "check": _check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"qutrit-qst: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, args)
    except (DomainError, IntegratorError, sweep.SweepError, OSError) as exc:
        print(f"qutrit-qst: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
