"""Deterministic discrete-event simulation of asynchronous D-iteration.

Virtual time advances one unit per node update and all workers update in
parallel: worker ``k``'s ``n``-th update completes at time ``n``. Messages
arrive ``latency`` units after they are sent; each ordered pair of workers
is a FIFO channel. Events are processed in ``(time, worker id, sequence)``
order, so a run is a pure function of its configuration and seed.

The global monitor is omniscient instrumentation: it assembles ``H`` from
the owners, counts fluid still in transit, and decides when to stop. It is
not part of the protocol the workers run.
"""

from __future__ import annotations

import csv
import heapq
import io
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from diter.baselines import direct_solve
from diter.engine import eliminate_diagonal
from diter.errors import DimensionError, NotConverged
from diter.sim.messages import FluidPacket, MatrixUpdate, Message, Payload
from diter.sim.workers import SequentialWorker, ThresholdPolicy, V1Worker, V2Worker, changed_nodes
from diter.sparse import LinearSystem, Partition, SparseMatrix, contraction_margin, jacobi_split

VARIANTS = ("v1", "v2", "sequential")
CSV_HEADER = ("time", "pid", "event", "r_k", "r_total", "bound", "global_error", "in_flight_mass", "msgs_in_flight")


@dataclass(frozen=True)
class LatencyModel:
    """Fixed latency ``low``, or uniform on ``[low, high]`` when ``high`` is set."""

    low: float = 0.0
    high: float | None = None

    def __post_init__(self):
        if self.low < 0 or (self.high is not None and self.high < self.low):
            raise ValueError(f"invalid latency range [{self.low}, {self.high}]")

    def sample(self, rng: random.Random) -> float:
        if self.high is None or self.high == self.low:
            return self.low
        return rng.uniform(self.low, self.high)


@dataclass(frozen=True)
class SimConfig:
    variant: str = "v1"
    partition: Partition | None = None
    strategy: str = "cyclic"
    threshold: ThresholdPolicy | None = field(default_factory=ThresholdPolicy)
    share_every: int | None = 1
    receive_trigger: bool = True
    latency: LatencyModel = field(default_factory=LatencyModel)
    seed: int = 0
    slot: int = 1
    updates: tuple[tuple[float, LinearSystem], ...] = ()
    tol: float = 1e-12
    max_time: float = 1e6
    eliminate_diagonal: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.slot < 1:
            raise ValueError("slot must hold at least one update")
        if self.share_every is not None and self.share_every < 1:
            raise ValueError("share_every must be a positive number of cycles")
        if self.variant == "v2" and self.updates:
            raise ValueError("matrix updates are not supported for v2 runs")
        if self.variant == "sequential" and self.partition is not None and self.partition.k != 1:
            raise ValueError("the sequential variant runs on a single worker")
        if self.eliminate_diagonal and self.updates:
            raise ValueError("diagonal elimination cannot be combined with matrix updates")

    @classmethod
    def two_cycle_schedule(cls, partition: Partition | None = None, **kw) -> SimConfig:
        """Cyclic order, no threshold, share after exactly two local cycles."""
        kw.setdefault("threshold", None)
        kw.setdefault("share_every", 2)
        return cls(variant="v1", partition=partition, **kw)


@dataclass(frozen=True)
class TraceRow:
    time: float
    pid: int
    event: str
    r_k: float
    r_total: float
    bound: float | None
    global_error: float
    in_flight_mass: float
    msgs_in_flight: int


class SimTrace(list):
    """List of :class:`TraceRow` with CSV export."""

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self:
            writer.writerow(
                [
                    _num(row.time),
                    row.pid,
                    row.event,
                    repr(row.r_k),
                    repr(row.r_total),
                    "" if row.bound is None else repr(row.bound),
                    repr(row.global_error),
                    repr(row.in_flight_mass),
                    row.msgs_in_flight,
                ]
            )
        return buf.getvalue()

    def first_time_below(self, error: float) -> float | None:
        for row in self:
            if row.global_error <= error:
                return row.time
        return None


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass
class SimResult:
    trace: SimTrace
    H: np.ndarray
    converged: bool
    time: float
    messages_sent: Counter
    updates: dict[int, int]
    reference: np.ndarray
    workers: list

    @property
    def final_error(self) -> float:
        return float(np.abs(self.H - self.reference).sum())

    def summary(self) -> str:
        lines = [
            f"converged: {self.converged}",
            f"virtual time: {_num(self.time)}",
            f"final L1 error: {self.final_error:.3e}",
            "messages sent: "
            + (", ".join(f"{k}={v}" for k, v in sorted(self.messages_sent.items())) or "none"),
            "updates per pid: " + ", ".join(f"{k}={v}" for k, v in sorted(self.updates.items())),
        ]
        return "\n".join(lines)


class _Monitored:
    """Per-system quantities the monitor needs: P, B, reference X, margin."""

    def __init__(self, p: SparseMatrix, b: np.ndarray, reference: np.ndarray):
        self.p = p
        self.b = b
        self.csr = p.to_scipy()
        self.reference = reference
        self.margin = contraction_margin(p)


STEP, DELIVER, SWITCH = 0, 1, 2


class Simulation:
    def __init__(self, config: SimConfig, system: LinearSystem):
        if system.form == "A":
            system = jacobi_split(system)
        self.config = config
        n = system.n
        part = config.partition or Partition.single(n)
        if part.n != n:
            raise DimensionError(f"partition covers {part.n} nodes, system has {n}")
        self.partition = part
        self.rng = random.Random(config.seed)
        reference = direct_solve(system)

        scale = None
        p_run, b_run = system.matrix, np.asarray(system.rhs)
        p_mon = p_run
        if config.eliminate_diagonal:
            p_run, b_run, elim = eliminate_diagonal(p_run, b_run)
            if elim.scale:
                scale = elim.as_array(n)
                p_mon = elim.effective_matrix(p_run)
        run_system = LinearSystem(p_run, b_run)
        self.scale = scale
        self.monitored = _Monitored(p_mon, b_run, reference)
        if config.variant == "v1" and scale is not None:
            # full-H workers take the rescaled weights directly
            run_system = LinearSystem(p_mon, b_run)

        ids = list(range(1, part.k + 1))
        if config.variant == "sequential":
            self.workers = [SequentialWorker(run_system, config.strategy, scale)]
        elif config.variant == "v1":
            self.workers = [
                V1Worker(
                    w,
                    part.members(w),
                    ids,
                    run_system,
                    config.strategy,
                    config.threshold,
                    config.share_every,
                    config.receive_trigger,
                )
                for w in ids
            ]
        else:
            owner = part.owner_array()
            self.workers = [
                V2Worker(
                    w,
                    part.members(w),
                    owner,
                    run_system,
                    config.strategy,
                    config.threshold,
                    scale,
                    config.share_every,
                )
                for w in ids
            ]

        self.time = 0.0
        self._queue: list = []
        self._seq = 0
        self._channel_last: dict[tuple[int, int], float] = {}
        self._inbox: dict[int, list[Message]] = {w.wid: [] for w in self.workers}
        self._pending_switches = 0
        self.in_flight: dict[tuple[int, int], FluidPacket] = {}
        self.messages_in_flight = 0
        self.messages_sent: Counter = Counter()
        self.trace = SimTrace()

        for w in self.workers:
            self._push(1.0, w.wid, STEP, None)
        current = system
        for t, new in sorted(config.updates, key=lambda u: u[0]):
            new = jacobi_split(new) if new.form == "A" else new
            if new.n != n:
                raise DimensionError(f"matrix update has size {new.n}, system has {n}")
            rows, cols = changed_nodes(current.matrix, new.matrix)
            rows |= set(np.flatnonzero(np.asarray(new.rhs) != np.asarray(current.rhs)) + 1)
            self._push(float(t), 0, SWITCH, new)
            self._pending_switches += 1
            concerned = sorted({part.owner_of(i) for i in rows | cols})
            for w in concerned:
                mine = tuple(sorted(i for i in rows if part.owner_of(i) == w))
                self._push(float(t), w, DELIVER, Message(0, w, float(t), float(t), MatrixUpdate(new, mine)))
            current = new

    # -- event queue -------------------------------------------------------

    def _push(self, t: float, wid: int, kind: int, payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (t, wid, self._seq, kind, payload))

    def _send(self, sender: int, outgoing: list[tuple[int, Payload]]) -> None:
        for dest, payload in outgoing:
            lat = self.config.latency.sample(self.rng)
            key = (sender, dest)
            at = max(self.time + lat, self._channel_last.get(key, 0.0))
            self._channel_last[key] = at
            msg = Message(sender, dest, self.time, at, payload)
            if isinstance(payload, FluidPacket):
                self.in_flight[payload.packet_id] = payload
            self.messages_in_flight += 1
            self.messages_sent[msg.kind] += 1
            self._push(at, dest, DELIVER, msg)

    def _handle(self, worker, msg: Message) -> None:
        if isinstance(msg.payload, FluidPacket):
            del self.in_flight[msg.payload.packet_id]
        if msg.sender != 0:
            self.messages_in_flight -= 1
        self._send(worker.wid, worker.receive(msg.sender, msg.payload))

    def _worker(self, wid: int):
        return self.workers[wid - 1]

    # -- monitor -----------------------------------------------------------

    def assembled_h(self) -> np.ndarray:
        h = np.zeros(self.partition.n)
        for w in self.workers:
            idx = np.array(w.nodes) - 1
            h[idx] = w.state.H if w.variant == "v2" else w.state.H[idx]
        return h

    def assembled_fluid(self) -> np.ndarray:
        """Local fluid plus outbox and in-flight fluid, scaled as on arrival.

        Only meaningful for the fluid-carrying variants.
        """
        n = self.partition.n
        f = np.zeros(n)
        transit = np.zeros(n)
        for w in self.workers:
            if w.variant == "sequential":
                f += w.state.F
                continue
            f[np.array(w.nodes) - 1] = w.state.F
            for _, node, amount in w.outbox_entries():
                transit[node - 1] += amount
        for packet in self.in_flight.values():
            for node, amount in packet.entries:
                transit[node - 1] += amount
        if self.scale is not None:
            transit *= self.scale
        return f + transit

    def in_flight_mass(self) -> float:
        """Absolute fluid held in outboxes or in undelivered packets."""
        total = sum(p.abs_mass for p in self.in_flight.values())
        for w in self.workers:
            if w.variant == "v2":
                total += sum(abs(a) for _, _, a in w.outbox_entries())
        return float(total)

    def worker_residuals(self, h: np.ndarray | None = None) -> np.ndarray:
        if self.config.variant != "v1":
            return np.array([w.local_residual() for w in self.workers])
        m = self.monitored
        h = self.assembled_h() if h is None else h
        fl = np.abs(m.csr @ h + m.b - h)
        return np.bincount(self.partition.owner_array() - 1, weights=fl, minlength=len(self.workers))

    def monitor(self) -> tuple[np.ndarray, float, float | None, float, float]:
        """``(r_k, r_total, bound, global_error, in_flight_mass)``."""
        h = self.assembled_h()
        r_k = self.worker_residuals(h)
        flight = self.in_flight_mass()
        r_total = float(r_k.sum()) + flight
        m = self.monitored
        bound = None if m.margin is None else r_total / m.margin
        error = float(np.abs(h - m.reference).sum())
        return r_k, r_total, bound, error, flight

    def conservation_defect(self) -> float:
        """``|| H + F_total - B - P H ||_1`` over the whole system (fluid variants)."""
        if self.config.variant == "v1":
            raise ValueError("full-H workers carry no fluid")
        m = self.monitored
        h = self.assembled_h()
        return float(np.abs(h + self.assembled_fluid() - m.b - m.csr @ h).sum())

    def _record(self, pid: int, event: str) -> float:
        r_k, r_total, bound, error, flight = self.monitor()
        self.trace.append(
            TraceRow(
                self.time,
                pid,
                event,
                float(r_k[pid - 1]) if pid else r_total,
                r_total,
                bound,
                error,
                flight,
                self.messages_in_flight,
            )
        )
        return r_total

    # -- main loop ---------------------------------------------------------

    def run(self, observer: Callable[[Simulation], None] | None = None) -> SimResult:
        cfg = self.config
        r_total = self._record(0, "init")
        converged = r_total <= cfg.tol and not self._pending_switches
        while self._queue and not converged:
            t, wid, _, kind, payload = self._queue[0]
            if t > cfg.max_time:
                break
            heapq.heappop(self._queue)
            self.time = t
            if kind == SWITCH:
                p, b = payload.matrix, np.asarray(payload.rhs)
                self.monitored = _Monitored(p, b, direct_solve(payload))
                self._pending_switches -= 1
                event = "switch"
            elif kind == STEP:
                w = self._worker(wid)
                if w.updates % cfg.slot == 0:
                    for msg in self._inbox[wid]:
                        self._handle(w, msg)
                    self._inbox[wid].clear()
                w.local_step()
                self._send(wid, w.after_step())
                self._push(t + 1.0, wid, STEP, None)
                event = "step"
            else:
                w = self._worker(wid)
                if w.updates % cfg.slot == 0:
                    self._handle(w, payload)
                else:
                    self._inbox[wid].append(payload)
                event = "recv:" + payload.kind
            r_total = self._record(wid, event)
            if observer is not None:
                observer(self)
            converged = r_total <= cfg.tol and not self._pending_switches
        if converged:
            self._drain(observer)
        h = self.assembled_h()
        return SimResult(
            trace=self.trace,
            H=h,
            converged=converged,
            time=self.time,
            messages_sent=self.messages_sent,
            updates={w.wid: w.updates for w in self.workers},
            reference=self.monitored.reference,
            workers=self.workers,
        )

    def _drain(self, observer) -> None:
        """Deliver every outstanding message without further local updates."""
        for wid, box in self._inbox.items():
            if box:
                w = self._worker(wid)
                for msg in box:
                    self._handle(w, msg)
                box.clear()
                self._record(wid, "recv:drain")
        while self._queue:
            t, wid, _, kind, payload = heapq.heappop(self._queue)
            if kind != DELIVER:
                continue
            self.time = max(self.time, t)
            self._handle(self._worker(wid), payload)
            self._record(wid, "recv:" + payload.kind)
            if observer is not None:
                observer(self)


def run_simulation(config: SimConfig, system: LinearSystem, observer=None) -> SimResult:
    """Run to tolerance; raises :class:`NotConverged` carrying the partial result."""
    result = Simulation(config, system).run(observer)
    if not result.converged:
        last = result.trace[-1].r_total if result.trace else float("nan")
        raise NotConverged(result.time, last, payload=result)
    return result
