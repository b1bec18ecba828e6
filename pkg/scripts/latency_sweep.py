"""Virtual time and message counts to reach a target error as latency grows."""

import argparse

from diter.catalog import EXAMPLE_NAMES, example
from diter.sim import LatencyModel, SimConfig, run_simulation
from diter.sparse import Partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--examples", nargs="+", default=["A1", "A2", "A3"], choices=EXAMPLE_NAMES)
    ap.add_argument("--latencies", nargs="+", type=float, default=[0, 1, 2, 5, 10])
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--target", type=float, default=1e-8)
    args = ap.parse_args()

    print("example,variant,latency,time_to_target,messages,final_error")
    for name in args.examples:
        for variant in ("v1", "v2"):
            for lat in args.latencies:
                cfg = SimConfig(variant=variant, partition=Partition.contiguous(4, args.workers),
                                latency=LatencyModel(lat))
                res = run_simulation(cfg, example(name))
                t = res.trace.first_time_below(args.target)
                print(f"{name},{variant},{lat:g},{t:g},{sum(res.messages_sent.values())},{res.final_error:.2e}")


if __name__ == "__main__":
    main()
