"""Asynchronous distributed D-iteration on simulated workers."""

from diter.sim.messages import Ack, FluidPacket, HUpdate, MatrixUpdate, Message
from diter.sim.simulator import (
    CSV_HEADER,
    LatencyModel,
    SimConfig,
    SimResult,
    SimTrace,
    Simulation,
    TraceRow,
    run_simulation,
)
from diter.sim.workers import SequentialWorker, ThresholdPolicy, V1Worker, V2Worker

__all__ = [
    "Ack",
    "CSV_HEADER",
    "FluidPacket",
    "HUpdate",
    "LatencyModel",
    "MatrixUpdate",
    "Message",
    "SequentialWorker",
    "SimConfig",
    "SimResult",
    "SimTrace",
    "Simulation",
    "ThresholdPolicy",
    "TraceRow",
    "V1Worker",
    "V2Worker",
    "run_simulation",
]
