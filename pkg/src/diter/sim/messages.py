"""Message envelopes exchanged between simulated workers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from diter.sparse import LinearSystem


@dataclass(frozen=True)
class HUpdate:
    """Fresh values of ``H`` for nodes owned by the sender."""

    entries: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class FluidPacket:
    """Aggregated fluid for nodes owned by the receiver. Amounts are unscaled."""

    packet_id: tuple[int, int]
    entries: tuple[tuple[int, float], ...]

    @property
    def mass(self) -> float:
        return math.fsum(a for _, a in self.entries)

    @property
    def abs_mass(self) -> float:
        return math.fsum(abs(a) for _, a in self.entries)


@dataclass(frozen=True)
class Ack:
    packet_id: tuple[int, int]


@dataclass(frozen=True)
class MatrixUpdate:
    """Switch to a new P-form system.

    ``nodes`` lists the receiver's owned nodes whose rows changed.
    """

    system: LinearSystem
    nodes: tuple[int, ...]


Payload = Union[HUpdate, FluidPacket, Ack, MatrixUpdate]


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    sent_at: float
    deliver_at: float
    payload: Payload

    @property
    def kind(self) -> str:
        return type(self.payload).__name__
