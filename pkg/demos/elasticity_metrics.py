"""Reading the elasticity metrics off a simulation run.

Every interval the simulator snapshots, per user, how many resources the
queue demanded and how many the policy supplied. Four numbers summarize the
match (intervals whose demand exceeds the whole system are excluded first):

  accuracy_under  average shortfall, normalized by system capacity
  accuracy_over   average surplus, normalized the same way
  time_under      fraction of intervals with any shortfall
  time_over       fraction of intervals with any surplus

A starving policy scores high on the *under* pair; a wasteful one on the
*over* pair. The demo prints both pairs for a tight and a generous budget,
plus a sparkline of demand vs supply so the numbers have a picture.

Run:  python3 demos/elasticity_metrics.py [--seed S]
"""

import argparse

from wfasim import engine
from wfasim.metrics import elasticity, utilization
from wfasim.model import ResourceType, SystemConfig, UserConfig
from wfasim.policies import PfaPolicy
from wfasim.workload import WL1, generate_workload

BARS = " .:-=+*#%@"


def spark(series, lo=0, hi=None):
    hi = hi or max(series + [1])
    out = []
    for v in series:
        idx = min(len(BARS) - 1, int((v - lo) / max(hi - lo, 1) * (len(BARS) - 1)))
        out.append(BARS[idx])
    return "".join(out)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    system = SystemConfig(
        types=(ResourceType("small", 1), ResourceType("large", 5)),
        capacity={"small": 16, "large": 16},
        interval_s=60,
    )
    base = generate_workload(40, users=["u1"], rule=WL1, seed=args.seed)
    workload = engine.poisson_arrivals(base, 0.25, 32, args.seed)
    capacity = system.total_capacity()

    for budget in (20, 60):
        result = engine.run(
            list(workload), system, [UserConfig("u1", budget)], PfaPolicy(),
            seed=args.seed,
        )
        demand, supply = result.demand_supply("u1")
        report = elasticity(demand, supply, capacity)
        rows = [s for s in result.snapshots if s.user == "u1"]
        util = utilization(rows, capacity)

        print(f"budget {budget} units/interval over {len(demand)} intervals")
        print(f"  demand  {spark(demand, hi=capacity)}")
        print(f"  supply  {spark(supply, hi=capacity)}")
        print(
            f"  under: accuracy {report.accuracy_under:.4f}, "
            f"time share {report.time_under:.2f}   "
            f"over: accuracy {report.accuracy_over:.4f}, "
            f"time share {report.time_over:.2f}"
        )
        print(
            f"  busy/allocated {util.busy_of_allocated:.2f}, "
            f"busy/capacity {util.busy_of_capacity:.2f}, "
            f"allocated/capacity {util.allocated_of_capacity:.2f}\n"
        )

    print("The tighter budget starves the queue (higher under-provisioning);")
    print("the generous one idles machines instead (higher over-provisioning).")


if __name__ == "__main__":
    main()
