"""Reach-rate learning curves of two-phase DT-DPG against single-phase DDPG.

Writes one row per (algorithm, seed, episode) with the trailing 20-episode
reach rate and MQI, ready for plotting.

    python scripts/dtdpg_vs_ddpg.py --seeds 0 1 2 3 4 --out runs/curves.csv
"""

import argparse
import csv

import numpy as np

from indoor_noma.env import build_maps
from indoor_noma.learner import AgentConfig, train_ddpg_baseline, train_dtdpg
from indoor_noma.scenario import load_scenario

WINDOW = 20


def trailing(x, window=WINDOW):
    c = np.cumsum(np.insert(np.asarray(x, dtype=float), 0, 0.0))
    n = np.minimum(np.arange(1, len(x) + 1), window)
    return (c[1:] - c[np.arange(1, len(x) + 1) - n]) / n


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenario", default="desk")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--out", default="runs/curves.csv")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    maps = build_maps(sc)
    cfg = AgentConfig.from_overrides(sc.learner)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algo", "seed", "episode", "phase", "reach_rate", "mqi"])
        for seed in args.seeds:
            for algo, fn in (("dtdpg", train_dtdpg), ("ddpg", train_ddpg_baseline)):
                res = fn(sc, cfg, seed, maps=maps)
                reach = trailing(res.column("reached"))
                mqi = trailing(res.column("mqi"))
                for m, r, q in zip(res.metrics, reach, mqi):
                    w.writerow([algo, seed, m["episode"], m["phase"], f"{r:.3f}", f"{q:.2f}"])
                print(f"seed {seed} {algo:5s} final reach {reach[-1]:.2f}, final MQI {mqi[-1]:.1f}", flush=True)


if __name__ == "__main__":
    main()
