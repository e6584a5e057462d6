"""Focused R=14 scan: ILP feasibility at U=2/U=3, baseline outage, blackout count."""

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from rislink import harness
from rislink.scenario import ScenarioConfig, generate, precompute

SEEDS = int(sys.argv[1]) if len(sys.argv) > 1 else 30
TIMEOUT = float(sys.argv[2]) if len(sys.argv) > 2 else 120.0

PAIR = ((18.0, 20.0), (22.0, 20.0))
BASE = dict(bs_positions=PAIR, robot_step=2.0, bs_clearance=3.0,
            ris_fov_half_angle=math.radians(90.0), obstacle_size=(1.0, 1.8),
            u_override=2, n_robots=14)

VARIANTS = {
    "60x1-1.6,s2.2": dict(BASE, n_obstacles=60, obstacle_size=(1.0, 1.6), robot_step=2.2),
    "58x1-1.7,s2": dict(BASE, n_obstacles=58, obstacle_size=(1.0, 1.7)),
    "64x1-1.5,s2.2": dict(BASE, n_obstacles=64, obstacle_size=(1.0, 1.5), robot_step=2.2),
}


def blackout(cfg, seed) -> bool:
    s = generate(cfg, seed)
    t = precompute(s)
    cov = np.zeros((cfg.n_robots, cfg.n_slots), bool)
    for n in range(cfg.n_slots):
        for (b, r) in t.coverage.bs_robot[n]:
            cov[r, n] = True
        for (i, r) in t.coverage.ris_robot[n]:
            cov[r, n] = True
    for r in range(cfg.n_robots):
        run = 0
        for n in range(cfg.n_slots):
            run = run + 1 if not cov[r, n] else 0
            if run >= s.k_out[r]:
                return True
    return False


def one(args):
    cfg, seed = args
    out = {"dark": blackout(cfg, seed)}
    tr = harness.run_trial(cfg, seed, ("ilp", "no-ris", "heuristic"), timeout=TIMEOUT)
    out["u2"] = tr.methods["ilp"]
    out["bare"] = tr.methods["no-ris"]
    out["heur"] = tr.methods["heuristic"]
    tr3 = harness.run_trial(replace(cfg, u_override=3), seed, ("ilp",), timeout=TIMEOUT)
    out["u3"] = tr3.methods["ilp"]
    return out


def main():
    for name, overrides in VARIANTS.items():
        cfg = replace(ScenarioConfig(), **overrides)
        with ProcessPoolExecutor(max_workers=2) as pool:
            res = list(pool.map(one, [(cfg, s) for s in range(SEEDS)]))
        f2 = 100 * sum(r["u2"].feasible for r in res) / SEEDS
        f3 = 100 * sum(r["u3"].feasible for r in res) / SEEDS
        dark = sum(r["dark"] for r in res)
        tmo = sum(r["u2"].timed_out for r in res) + sum(r["u3"].timed_out for r in res)
        bare = [r["bare"].outage_pct for r in res if r["bare"].feasible]
        bare_feas = 100 * sum(r["bare"].feasible for r in res) / SEEDS
        heur_feas = 100 * sum(r["heur"].feasible for r in res) / SEEDS
        print(f"{name}: ilpU2 {f2:.0f}% ilpU3 {f3:.0f}% dark {dark}/{SEEDS} tmo {tmo} | "
              f"heur feas {heur_feas:.0f}% | "
              f"no-ris feas {bare_feas:.0f}% out {np.mean(bare) if bare else float('nan'):.1f}%",
              flush=True)


if __name__ == "__main__":
    main()
