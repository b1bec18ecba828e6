"""Switch from A to A' mid-run and follow the error to the new solution."""

import argparse
from pathlib import Path

from diter.catalog import example
from diter.sim import LatencyModel, SimConfig, run_simulation
from diter.sparse import Partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--at", type=float, default=5.0, help="virtual time of the switch")
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--latency", type=float, default=0.0)
    ap.add_argument("--out", default="results/update.csv")
    args = ap.parse_args()

    cfg = SimConfig(
        partition=Partition.contiguous(4, args.workers),
        latency=LatencyModel(args.latency),
        updates=((args.at, example("Aprime")),),
    )
    res = run_simulation(cfg, example("A"))
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(res.trace.to_csv())

    switch = next(r for r in res.trace if r.event == "switch")
    print(f"error just after the switch at t={switch.time:g}: {switch.global_error:.3e}")
    print(res.summary())
    print(f"trace written to {path}")


if __name__ == "__main__":
    main()
