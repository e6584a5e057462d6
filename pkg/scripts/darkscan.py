"""Fast generator scan: blackout-instance rate and blocked-duty, no solving.

A blackout instance (some robot uncovered for K_r straight slots) is exactly
an infeasible instance, so this bounds ILP feasibility from above at any U.
"""

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from rislink.scenario import ScenarioConfig, generate, precompute

SEEDS = int(sys.argv[1]) if len(sys.argv) > 1 else 100

PAIR = ((18.0, 20.0), (22.0, 20.0))
BASE = dict(bs_positions=PAIR, robot_step=2.2, bs_clearance=3.0,
            ris_fov_half_angle=math.radians(90.0), u_override=2, n_robots=14)

VARIANTS = {
    "56x0.8-1.4": dict(BASE, n_obstacles=56, obstacle_size=(0.8, 1.4)),
    "64x0.8-1.4": dict(BASE, n_obstacles=64, obstacle_size=(0.8, 1.4)),
    "72x0.8-1.4": dict(BASE, n_obstacles=72, obstacle_size=(0.8, 1.4)),
    "80x0.8-1.3": dict(BASE, n_obstacles=80, obstacle_size=(0.8, 1.3)),
    "64x1-1.5": dict(BASE, n_obstacles=64, obstacle_size=(1.0, 1.5)),
    "72x1-1.4": dict(BASE, n_obstacles=72, obstacle_size=(1.0, 1.4)),
}


def probe(args):
    cfg, seed = args
    s = generate(cfg, seed)
    t = precompute(s)
    n_r, n_n = cfg.n_robots, cfg.n_slots
    cov_any = np.zeros((n_r, n_n), bool)
    cov_bs = np.zeros((n_r, n_n), bool)
    for n in range(n_n):
        for (b, r) in t.coverage.bs_robot[n]:
            cov_any[r, n] = True
            cov_bs[r, n] = True
        for (i, r) in t.coverage.ris_robot[n]:
            cov_any[r, n] = True
    dark = False
    bare_fail = False
    for r in range(n_r):
        run = run_b = 0
        for n in range(n_n):
            run = run + 1 if not cov_any[r, n] else 0
            run_b = run_b + 1 if not cov_bs[r, n] else 0
            if run >= s.k_out[r]:
                dark = True
            if run_b >= s.k_out[r]:
                bare_fail = True
    return dark, bare_fail, 100.0 * (1 - cov_bs.mean())


def main():
    for name, overrides in VARIANTS.items():
        cfg = replace(ScenarioConfig(), **overrides)
        with ProcessPoolExecutor(max_workers=2) as pool:
            res = list(pool.map(probe, [(cfg, s) for s in range(SEEDS)]))
        dark = 100.0 * sum(r[0] for r in res) / SEEDS
        bare_ok = 100.0 * sum(not r[1] for r in res) / SEEDS
        duty = float(np.mean([r[2] for r in res]))
        print(f"{name}: dark {dark:.0f}% | bs-blocked duty {duty:.1f}% | "
              f"no-ris coverage-feasible {bare_ok:.0f}%", flush=True)


if __name__ == "__main__":
    main()
