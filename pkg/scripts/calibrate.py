"""Scan generator knobs and report the metrics the experiment bands depend on.

Usage: python scripts/calibrate.py [seeds] [timeout]
"""

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from rislink import harness
from rislink.scenario import ScenarioConfig

SEEDS = int(sys.argv[1]) if len(sys.argv) > 1 else 12
TIMEOUT = float(sys.argv[2]) if len(sys.argv) > 2 else 60.0

PYLON = ((19.8, 20.0), (20.2, 20.0))
BASE = dict(bs_positions=PYLON, robot_step=2.0, bs_clearance=3.0,
            ris_fov_half_angle=math.radians(90.0), obstacle_size=(1.0, 1.8),
            wall_clearance=2.0)

VARIANTS = {
    "pylon42sc": dict(BASE, n_obstacles=42),
    "pylon46sc": dict(BASE, n_obstacles=46),
    "pylon50sc": dict(BASE, n_obstacles=50),
}


def one(args):
    cfg, seed = args
    t0 = time.perf_counter()
    tr = harness.run_trial(cfg, seed, ("ilp", "heuristic", "no-ris"), timeout=TIMEOUT)
    return seed, time.perf_counter() - t0, tr


def one_u3(args):
    cfg, seed = args
    tr = harness.run_trial(replace(cfg, u_override=3), seed, ("ilp",), timeout=TIMEOUT)
    return tr.methods["ilp"]


def main():
    for name, overrides in VARIANTS.items():
        for n_robots in (8, 14):
            cfg = replace(ScenarioConfig(u_override=2, n_robots=n_robots), **overrides)
            jobs = [(cfg, seed) for seed in range(SEEDS)]
            with ProcessPoolExecutor(max_workers=2) as pool:
                results = list(pool.map(one, jobs))
            line = [f"{name} R={n_robots}:"]
            for m in ("ilp", "heuristic", "no-ris"):
                mrs = [tr.methods[m] for (_, _, tr) in results]
                feas = 100.0 * sum(x.feasible for x in mrs) / len(mrs)
                outs = np.array([x.outage_pct for x in mrs if x.feasible])
                tmo = sum(x.timed_out for x in mrs)
                mean = outs.mean() if outs.size else float("nan")
                line.append(f"{m}: feas {feas:.0f}% out {mean:.1f}% tmo {tmo}")
            if n_robots == 14:
                with ProcessPoolExecutor(max_workers=2) as pool:
                    u3 = list(pool.map(one_u3, jobs))
                feas3 = 100.0 * sum(x.feasible for x in u3) / len(u3)
                line.append(f"ilpU3: feas {feas3:.0f}% tmo {sum(x.timed_out for x in u3)}")
            wall = max(w for (_, w, _) in results)
            line.append(f"slowest {wall:.1f}s")
            print(" | ".join(line), flush=True)


if __name__ == "__main__":
    main()
