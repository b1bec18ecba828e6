"""Simulated workers (PIDs).

Each worker owns a set of nodes and only ever writes state for those nodes.
Workers never talk to each other directly: every method that wants to
communicate returns a list of ``(destination, payload)`` pairs for the
simulator to deliver.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from diter.engine import DiterState, HOnlyState, diffuse, make_strategy, update_h_line
from diter.errors import DimensionError, OwnershipViolation
from diter.sim.messages import Ack, FluidPacket, HUpdate, MatrixUpdate, Payload
from diter.sparse import LinearSystem, SparseMatrix

Outgoing = list[tuple[int, Payload]]


@dataclass(frozen=True)
class ThresholdPolicy:
    """Share when the local residual drops below ``T``, then ``T <- T / alpha``.

    ``t0=None`` starts from the L1 norm of the right-hand side.
    """

    t0: float | None = None
    alpha: float = 2.0

    def __post_init__(self):
        if self.alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if self.t0 is not None and self.t0 <= 0:
            raise ValueError("initial threshold must be positive")

    def initial(self, b: np.ndarray) -> float:
        return float(np.abs(b).sum()) if self.t0 is None else self.t0


class V1Worker:
    """Full-``H`` worker: local line updates, shares owned entries of ``H``.

    The worker keeps a complete copy of ``H``; entries of other workers are
    whatever was last received. After a matrix update the local source is
    rebuilt from the new initial fluid ``B'`` and the stored origin ``H0'``
    (see :meth:`apply_matrix_update`).
    """

    variant = "v1"

    def __init__(
        self,
        wid: int,
        nodes,
        peers,
        system: LinearSystem,
        strategy: str = "cyclic",
        threshold: ThresholdPolicy | None = None,
        share_every: int | None = 1,
        receive_trigger: bool = True,
    ):
        self.wid = wid
        self.nodes = sorted(nodes)
        self.owned = frozenset(self.nodes)
        self._idx = np.array(self.nodes, dtype=np.int64) - 1
        self.peers = [w for w in peers if w != wid]
        self.P = system.matrix
        self.rhs = np.array(system.rhs)
        self.state = HOnlyState(H=self.rhs.copy(), B=self.rhs.copy())
        self.strategy = make_strategy(strategy, self.nodes)
        self.alpha = threshold.alpha if threshold else None
        self.T = threshold.initial(self.rhs) if threshold else None
        self.thresholds = [] if self.T is None else [self.T]
        self.share_every = share_every
        self.receive_trigger = receive_trigger
        self.dirty: set[int] = set()
        self.updates = 0
        self._since_share = 0
        # set by apply_matrix_update
        self.fluid_source: np.ndarray | None = None
        self.origin: np.ndarray | None = None

    @property
    def H(self) -> np.ndarray:
        return self.state.H

    def fluid(self, i: int) -> float:
        cols, vals = self.P.row_arrays(i - 1)
        s = self.state
        return float(vals @ s.H[cols] + s.B[i - 1] - s.H[i - 1])

    def local_residual(self) -> float:
        return float(sum(abs(self.fluid(i)) for i in self.nodes))

    def local_step(self) -> int:
        i = self.strategy.next(self.state, self.P)
        old = self.state.H[i - 1]
        update_h_line(self.state, self.P, i)
        if self.state.H[i - 1] != old:
            self.dirty.add(i)
        self.updates += 1
        self._since_share += 1
        return i

    def _broadcast(self) -> Outgoing:
        self._since_share = 0
        if not self.dirty:
            return []
        payload = HUpdate(tuple((i, float(self.state.H[i - 1])) for i in sorted(self.dirty)))
        self.dirty.clear()
        return [(peer, payload) for peer in self.peers]

    def after_step(self) -> Outgoing:
        if self.T is not None and self.local_residual() < self.T:
            out = self._broadcast()
            self.T /= self.alpha
            self.thresholds.append(self.T)
            return out
        if self.share_every and self._since_share >= self.share_every * len(self.nodes):
            return self._broadcast()
        return []

    def receive(self, sender: int, payload: Payload) -> Outgoing:
        if isinstance(payload, MatrixUpdate):
            self.apply_matrix_update(payload.system)
            return []
        if not isinstance(payload, HUpdate):
            raise TypeError(f"V1 worker cannot handle {type(payload).__name__}")
        for i, _ in payload.entries:
            if i in self.owned:
                raise OwnershipViolation(self.wid, i)
        for i, value in payload.entries:
            self.state.H[i - 1] = value
        if self.receive_trigger and self.dirty:
            return self._broadcast()
        return []

    def apply_matrix_update(self, new: LinearSystem) -> None:
        """Continue from the current ``H`` under a new matrix.

        For owned ``i``: ``F_i = L_i(P) H + B_i - H_i`` and the new initial
        fluid is ``B'_i = F_i + L_i(P' - P) H``. The current ``H`` becomes the
        origin ``H0'``. Line updates from origin ``H0'`` with initial fluid
        ``B'`` read ``H_i <- L_i(P') H + (B'_i + H0'_i - L_i(P') H0')``, so the
        bracket is stored as the new local source.
        """
        p_new = new.matrix
        if p_new.n != self.P.n:
            raise DimensionError(f"matrix update changes size {self.P.n} -> {p_new.n}")
        h = self.state.H.copy()
        b_prime = np.zeros_like(h)
        source = self.state.B.copy()
        for i in self.nodes:
            i0 = i - 1
            f = self.fluid(i)
            cols_new, vals_new = p_new.row_arrays(i0)
            cols_old, vals_old = self.P.row_arrays(i0)
            delta = vals_new @ h[cols_new] - vals_old @ h[cols_old]
            b_prime[i0] = f + delta + (new.rhs[i0] - self.rhs[i0])
            source[i0] = b_prime[i0] + h[i0] - vals_new @ h[cols_new]
        self.fluid_source = b_prime
        self.origin = h
        self.P = p_new
        self.rhs = np.array(new.rhs)
        self.state.B = source


class V2Worker:
    """Partial-view worker exchanging fluid packets.

    Stores ``B``, ``H`` and ``F`` only for owned nodes. Fluid produced for
    remote nodes accumulates in ``outbox`` (per destination worker, per node)
    and is sent as one packet per destination; each sent packet stays in
    ``unacked`` until acknowledged.
    """

    variant = "v2"

    def __init__(
        self,
        wid: int,
        nodes,
        owner: np.ndarray,
        system: LinearSystem,
        strategy: str = "cyclic",
        threshold: ThresholdPolicy | None = None,
        scale: np.ndarray | None = None,
        share_every: int | None = 1,
    ):
        self.wid = wid
        self.nodes = sorted(nodes)
        self.owned = frozenset(self.nodes)
        self._idx = np.array(self.nodes, dtype=np.int64) - 1
        self._local = {int(i0): k for k, i0 in enumerate(self._idx)}
        self.owner = owner
        self.P = system.matrix
        b_local = np.array(system.rhs)[self._idx]
        self.state = DiterState(H=np.zeros(len(self.nodes)), F=b_local.copy(), B=b_local)
        self.scale = scale
        self.strategy = make_strategy(strategy, range(1, len(self.nodes) + 1))
        self.alpha = threshold.alpha if threshold else None
        self.T = threshold.initial(np.asarray(system.rhs)) if threshold else None
        self.thresholds = [] if self.T is None else [self.T]
        self.share_every = share_every
        self._since_flush = 0
        self.outbox: dict[int, dict[int, float]] = defaultdict(dict)
        self.unacked: dict[tuple[int, int], FluidPacket] = {}
        self.updates = 0
        self._packet_seq = 0
        # raw amounts, so totals can be formed with a correctly rounded sum
        self.sent_amounts: list[float] = []
        self.received_amounts: list[float] = []
        self.acked_mass = 0.0

    @property
    def sent_mass(self) -> float:
        return math.fsum(self.sent_amounts)

    @property
    def received_mass(self) -> float:
        return math.fsum(self.received_amounts)

    def _arrival(self, r0: int) -> float:
        return 1.0 if self.scale is None else float(self.scale[r0])

    def local_residual(self) -> float:
        return float(np.abs(self.state.F).sum())

    def local_step(self) -> int:
        pos = self.strategy.next(self.state, None) - 1
        i0 = int(self._idx[pos])
        s = self.state
        f = s.F[pos]
        s.H[pos] += f
        s.F[pos] = 0.0
        if f != 0.0:
            rows, vals = self.P.col_arrays(i0)
            for r0, v in zip(rows.tolist(), vals.tolist()):
                amount = v * f
                dest = int(self.owner[r0])
                if dest == self.wid:
                    s.F[self._local[r0]] += self._arrival(r0) * amount
                else:
                    box = self.outbox[dest]
                    box[r0 + 1] = box.get(r0 + 1, 0.0) + amount
        s.step += 1
        self.updates += 1
        self._since_flush += 1
        return i0 + 1

    def outbox_entries(self):
        for dest in sorted(self.outbox):
            for node, amount in sorted(self.outbox[dest].items()):
                yield dest, node, amount

    def after_step(self) -> Outgoing:
        if not self.outbox:
            return []
        r = self.local_residual()
        triggered = self.T is not None and r < self.T
        periodic = bool(self.share_every) and self._since_flush >= self.share_every * len(self.nodes)
        # r == 0: nothing left to diffuse locally, so holding fluid back only stalls peers
        if not (self.T is None or triggered or periodic or r == 0.0):
            return []
        self._since_flush = 0
        out = []
        for dest in sorted(self.outbox):
            self._packet_seq += 1
            packet = FluidPacket((self.wid, self._packet_seq), tuple(sorted(self.outbox[dest].items())))
            self.unacked[packet.packet_id] = packet
            self.sent_amounts.extend(a for _, a in packet.entries)
            out.append((dest, packet))
        self.outbox.clear()
        if triggered:
            self.T /= self.alpha
            self.thresholds.append(self.T)
        return out

    def receive(self, sender: int, payload: Payload) -> Outgoing:
        if isinstance(payload, Ack):
            packet = self.unacked.pop(payload.packet_id)
            self.acked_mass += packet.mass
            return []
        if isinstance(payload, MatrixUpdate):
            raise NotImplementedError("matrix updates are only supported for v1 and sequential runs")
        if not isinstance(payload, FluidPacket):
            raise TypeError(f"V2 worker cannot handle {type(payload).__name__}")
        for node, _ in payload.entries:
            if node not in self.owned:
                raise OwnershipViolation(self.wid, node)
        for node, amount in payload.entries:
            self.state.F[self._local[node - 1]] += self._arrival(node - 1) * amount
        self.received_amounts.extend(a for _, a in payload.entries)
        return [(sender, Ack(payload.packet_id))]


class SequentialWorker:
    """Single worker running plain fluid diffusion over every node."""

    variant = "sequential"

    def __init__(self, system: LinearSystem, strategy: str = "cyclic", scale: np.ndarray | None = None):
        self.wid = 1
        self.P = system.matrix
        self.rhs = np.array(system.rhs)
        self.nodes = list(range(1, self.P.n + 1))
        self.owned = frozenset(self.nodes)
        self.state = DiterState(H=np.zeros(self.P.n), F=self.rhs.copy(), B=self.rhs.copy())
        self.strategy = make_strategy(strategy, self.nodes)
        self.scale = scale
        self.thresholds: list[float] = []
        self.updates = 0

    def local_residual(self) -> float:
        return float(np.abs(self.state.F).sum())

    def local_step(self) -> int:
        i = self.strategy.next(self.state, self.P)
        diffuse(self.state, self.P, i, self.scale)
        self.updates += 1
        return i

    def after_step(self) -> Outgoing:
        return []

    def receive(self, sender: int, payload: Payload) -> Outgoing:
        if not isinstance(payload, MatrixUpdate):
            raise TypeError(f"sequential worker cannot handle {type(payload).__name__}")
        self.apply_matrix_update(payload.system)
        return []

    def apply_matrix_update(self, new: LinearSystem) -> None:
        """``F <- F + (P' - P) H``; ``H`` carries over unchanged."""
        p_new = new.matrix
        if p_new.n != self.P.n:
            raise DimensionError(f"matrix update changes size {self.P.n} -> {p_new.n}")
        s = self.state
        s.F = s.F + (p_new - self.P).matvec(s.H) + (np.asarray(new.rhs) - self.rhs)
        self.P = p_new
        self.rhs = np.array(new.rhs)


def changed_nodes(old: SparseMatrix, new: SparseMatrix) -> tuple[set[int], set[int]]:
    """Rows and columns (1-based) where two matrices differ."""
    diff = new - old
    rows = {i for i, _, _ in diff.entries()}
    cols = {j for _, j, _ in diff.entries()}
    return rows, cols
