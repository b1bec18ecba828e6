"""Glue between configurations, solvers and the simulator.

Used by the command line, the scripts in ``scripts/`` and the acceptance
tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from diter import baselines
from diter.catalog import EXAMPLE_NAMES, example
from diter.config import ExperimentConfig
from diter.engine import error_upper_bound, init_state, diffuse, make_strategy
from diter.errors import DimensionError, NotConverged, UnknownMethod
from diter.mmio import read_matrix, read_vector
from diter.sim import LatencyModel, SimConfig, ThresholdPolicy, run_simulation
from diter.sparse import LinearSystem, Partition, contraction_margin, jacobi_split

SOLVE_METHODS = ("d-iteration", "jacobi", "gauss-seidel")
COMPARE_METHODS = ("jacobi", "gauss-seidel", "d-iteration", "d-iteration-greedy", "1pid", "2pid")


def load_system(cfg: ExperimentConfig) -> LinearSystem:
    cfg.check_input()
    if cfg.example is not None:
        return example(cfg.example)
    m = read_matrix(cfg.matrix)
    b = read_vector(cfg.vector)
    if b.size != m.n:
        raise DimensionError(f"vector has {b.size} entries, matrix is {m.n}x{m.n}")
    return LinearSystem(m, b, form=cfg.form)


def p_form(system: LinearSystem) -> LinearSystem:
    return jacobi_split(system) if system.form == "A" else system


def _resolve_update(target: str, form: str, rhs) -> LinearSystem:
    if target in EXAMPLE_NAMES:
        new = example(target)
        return new if rhs is None else LinearSystem(new.matrix, rhs, form=new.form)
    path = Path(target)
    if not path.exists():
        raise FileNotFoundError(f"matrix update target {target!r} is neither an example nor a file")
    m = read_matrix(path)
    return LinearSystem(m, np.ones(m.n) if rhs is None else rhs, form=form)


def sim_config(cfg: ExperimentConfig, n: int, rhs=None) -> SimConfig:
    if cfg.partition:
        part = Partition(cfg.partition)
    else:
        part = Partition.contiguous(n, cfg.workers)
    updates = [(t, _resolve_update(target, cfg.form, rhs)) for t, target in cfg.updates]
    return SimConfig(
        variant=cfg.variant,
        partition=part,
        strategy=cfg.sim_strategy,
        threshold=ThresholdPolicy(cfg.t0, cfg.alpha) if cfg.threshold else None,
        share_every=cfg.share_every,
        receive_trigger=cfg.receive_trigger,
        latency=LatencyModel(*cfg.latency),
        seed=cfg.seed,
        slot=cfg.slot,
        updates=tuple(updates),
        tol=cfg.sim_tol,
        max_time=cfg.max_time,
        eliminate_diagonal=cfg.eliminate_diagonal,
    )


@dataclass
class SolveRow:
    updates: int
    method: str
    error: float
    r_total: float
    bound: float | None


def solve_trace(
    system: LinearSystem, method: str, strategy: str = "cyclic", tol: float = 1e-12, max_steps: int = 10**6
) -> tuple[np.ndarray, list[SolveRow], bool]:
    """Run one method to tolerance, recording error and residual as it goes.

    Rows are per diffusion for the D-iteration and per sweep for Jacobi and
    Gauss-Seidel. Returns ``(H, rows, converged)``.
    """
    if method not in SOLVE_METHODS:
        raise UnknownMethod(f"unknown method {method!r}; choose from {', '.join(SOLVE_METHODS)}")
    system = p_form(system)
    p, b = system.matrix, np.asarray(system.rhs)
    x = baselines.direct_solve(system)
    eps = contraction_margin(p)

    def row(updates, h, r):
        return SolveRow(updates, method, float(np.abs(h - x).sum()), r, error_upper_bound(r, eps))

    if method == "d-iteration":
        state = init_state(p, b)
        strat = make_strategy(strategy, range(1, p.n + 1))
        r = float(np.abs(state.F).sum())
        rows = [row(0, state.H, r)]
        while r > tol and state.step < max_steps:
            diffuse(state, p, strat.next(state, p))
            r = float(np.abs(state.F).sum())
            rows.append(row(state.step, state.H, r))
        return state.H, rows, r <= tol

    sweep = baselines.jacobi_sweep if method == "jacobi" else baselines.gauss_seidel_sweep
    h = np.zeros(p.n)
    r = float(np.abs(p.matvec(h) + b - h).sum())
    rows = [row(0, h, r)]
    updates = 0
    while r > tol and updates + p.n <= max_steps:
        h = sweep(h, p, b)
        updates += p.n
        r = float(np.abs(p.matvec(h) + b - h).sum())
        rows.append(row(updates, h, r))
    return h, rows, r <= tol


def pid_run(system: LinearSystem, k: int, latency: float = 0.0, tol: float = 1e-13, **kw):
    """V1 simulation with the two-cycle sharing schedule on ``k`` contiguous blocks."""
    part = Partition.contiguous(system.n, k)
    cfg = SimConfig.two_cycle_schedule(part, latency=LatencyModel(latency), tol=tol, **kw)
    return run_simulation(cfg, system)


@dataclass(frozen=True)
class Speedup:
    one: float
    two: float

    @property
    def ratio(self) -> float:
        return self.one / self.two


def pid_speedup(system: LinearSystem, target: float = 1e-8, latency: float = 0.0) -> Speedup:
    """Virtual time to reach ``target`` L1 error with one worker over two."""
    t1 = pid_run(system, 1, latency).trace.first_time_below(target)
    t2 = pid_run(system, 2, latency).trace.first_time_below(target)
    if t1 is None or t2 is None:
        raise NotConverged(0, float("nan"))
    return Speedup(t1, t2)


def compare_rows(names, methods, target: float = 1e-8, max_sweeps: int = 1000) -> list[tuple]:
    """Rows ``(example, series, axis, x, error)`` for the requested comparisons.

    Sequential methods are sampled every ``n`` scalar updates (``axis =
    updates``); the 1-PID and 2-PID simulations report the error after each
    unit of virtual time (``axis = virtual_time``).
    """
    unknown = [m for m in methods if m not in COMPARE_METHODS]
    if unknown:
        raise UnknownMethod(f"unknown method(s) {unknown}; choose from {', '.join(COMPARE_METHODS)}")
    rows = []
    for name in names:
        system = p_form(example(name))
        x = baselines.direct_solve(system)
        for method in methods:
            if method in ("1pid", "2pid"):
                res = pid_run(system, 1 if method == "1pid" else 2)
                per_time = {}
                for tr in res.trace:
                    per_time[tr.time] = tr.global_error
                for t, err in per_time.items():
                    rows.append((name, method, "virtual_time", t, err))
                continue
            trace = _sweeps_to_target(method, system, x, target, max_sweeps)
            rows.extend((name, method, "updates", pt.updates, pt.error) for pt in trace)
    return rows


def _sweeps_to_target(method, system, x, target, max_sweeps):
    fn = {
        "jacobi": baselines.jacobi_trace,
        "gauss-seidel": baselines.gauss_seidel_trace,
        "d-iteration": lambda s, ref, k: baselines.d_iteration_trace(s, ref, k, "cyclic"),
        "d-iteration-greedy": lambda s, ref, k: baselines.d_iteration_trace(s, ref, k, "greedy"),
    }[method]
    sweeps = 8
    while True:
        trace = fn(system, x, sweeps)
        hit = next((k for k, pt in enumerate(trace) if pt.error <= target), None)
        if hit is not None:
            return trace[: hit + 1]
        if sweeps >= max_sweeps:
            return trace
        sweeps = min(2 * sweeps, max_sweeps)


__all__ = [
    "COMPARE_METHODS",
    "SOLVE_METHODS",
    "Speedup",
    "compare_rows",
    "load_system",
    "p_form",
    "pid_run",
    "pid_speedup",
    "sim_config",
    "solve_trace",
]
