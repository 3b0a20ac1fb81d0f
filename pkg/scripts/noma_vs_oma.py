"""Train DT-DPG under NOMA and under OMA on paired seeds and compare greedy MQI.

    python scripts/noma_vs_oma.py --scenario desk --seeds 0 1 2 --out runs/noma_vs_oma.csv
"""

import argparse
import csv

import numpy as np

from indoor_noma.env import build_maps
from indoor_noma.learner import AgentConfig, evaluate, train_dtdpg
from indoor_noma.scenario import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenario", default="desk")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--eval-episodes", type=int, default=20)
    ap.add_argument("--out", default="runs/noma_vs_oma.csv")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    maps = build_maps(sc)
    cfg = AgentConfig.from_overrides(sc.learner)
    rows = []
    for seed in args.seeds:
        for mode in ("noma", "oma"):
            res = train_dtdpg(sc, cfg, seed, ma_mode=mode, maps=maps)
            ev = evaluate(res.agent, sc, args.eval_episodes, "sampled", seed=seed, ma_mode=mode, maps=maps)
            row = {"seed": seed, "ma_mode": mode,
                   "mean_mqi": float(np.mean([e.mqi for e in ev])),
                   "reach_rate": float(np.mean([e.reached for e in ev])),
                   "mean_outage_slots": float(np.mean([e.outage_slots for e in ev]))}
            rows.append(row)
            print(f"seed {seed} {mode:4s} MQI {row['mean_mqi']:8.2f} reach {row['reach_rate']:.2f} "
                  f"outage {row['mean_outage_slots']:.1f}", flush=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for mode in ("noma", "oma"):
        print(f"{mode}: mean MQI {np.mean([r['mean_mqi'] for r in rows if r['ma_mode'] == mode]):.2f}")


if __name__ == "__main__":
    main()
