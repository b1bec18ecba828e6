"""Command line front end.

Subcommands: ``examples``, ``solve``, ``simulate``, ``compare``.
Exit codes: 0 converged, 2 not converged, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from diter.catalog import EXAMPLE_NAMES, builtin_examples
from diter.config import ExperimentConfig, load_config
from diter.errors import DiterError, NotConverged
from diter.experiments import compare_rows, load_system, p_form, pid_speedup, sim_config, solve_trace
from diter.sim import Simulation

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value experiment file")
    p.add_argument("--example", help=f"built-in system ({', '.join(EXAMPLE_NAMES)})")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--tol", type=float, help="stopping tolerance on the total residual")
    p.add_argument("--seed", type=int, help="seed for random latencies")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diter", description="Fluid-diffusion linear solver and asynchronous worker simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("examples", help="list the built-in systems")
    for name, help_ in (
        ("solve", "sequential solve with a per-step error trace"),
        ("simulate", "asynchronous multi-worker simulation"),
        ("compare", "method and worker-count comparison curves"),
    ):
        _common(sub.add_parser(name, help=help_))
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.example:
        cfg.example, cfg.matrix, cfg.vector = args.example, None, None
    if args.out:
        cfg.out = args.out
    if args.tol is not None:
        cfg.tol = cfg.sim_tol = args.tol
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _write_csv(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def rows_to_csv(header, rows) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{x:.15g}" for x in np.asarray(v)) + "]"


def cmd_examples(args) -> int:
    for name, (a, p) in builtin_examples().items():
        print(f"{name}:")
        for row in a.matrix.to_dense():
            print("  " + " ".join(f"{x:4g}" for x in row))
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _load(args)
    system = load_system(cfg)
    method = "d-iteration" if cfg.method == "sequential" else cfg.method
    h, rows, converged = solve_trace(system, method, cfg.strategy, cfg.tol, cfg.max_steps)
    text = rows_to_csv(
        ("updates", "method", "error", "r_total", "bound"),
        [(r.updates, r.method, r.error, r.r_total, r.bound) for r in rows],
    )
    _write_csv(cfg.out, text)
    out = sys.stdout if cfg.out else sys.stderr
    print(f"H = {_fmt_vec(h)}", file=out)
    print(f"residual = {rows[-1].r_total:.3e} after {rows[-1].updates} updates", file=out)
    if not converged:
        print("not converged", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    system = p_form(load_system(cfg))
    sim = Simulation(sim_config(cfg, system.n, system.rhs), system)
    result = sim.run()
    _write_csv(cfg.out, result.trace.to_csv())
    out = sys.stdout if cfg.out else sys.stderr
    print(result.summary(), file=out)
    print(f"H = {_fmt_vec(result.H)}", file=out)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_compare(args) -> int:
    cfg = _load(args)
    names = (cfg.example,) if cfg.example else cfg.compare_examples
    rows = compare_rows(names, cfg.compare_methods, cfg.target)
    _write_csv(cfg.out, rows_to_csv(("example", "series", "axis", "x", "error"), rows))
    out = sys.stdout if cfg.out else sys.stderr
    if {"1pid", "2pid"} <= set(cfg.compare_methods):
        for name in names:
            s = pid_speedup(p_form(load_system(ExperimentConfig(example=name))), cfg.target)
            print(f"{name}: 1 PID {s.one:g}, 2 PIDs {s.two:g}, speedup {s.ratio:.3f}", file=out)
    return EXIT_OK


COMMANDS = {"examples": cmd_examples, "solve": cmd_solve, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NotConverged as exc:
        print(f"diter: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (DiterError, OSError, ValueError) as exc:
        print(f"diter: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
