"""Train on the radio map and on sampled Rayleigh fading, then evaluate both
agents under sampled fading.

    python scripts/map_vs_fading.py --seeds 0 1 2
"""

import argparse

import numpy as np

from indoor_noma.env import build_maps
from indoor_noma.learner import AgentConfig, evaluate, train_dtdpg
from indoor_noma.scenario import load_scenario


def plateau(reached, level=0.9, window=20):
    for e in range(window, len(reached) + 1):
        if np.mean(reached[e - window:e]) >= level:
            return e
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenario", default="desk")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    maps = build_maps(sc)
    cfg = AgentConfig.from_overrides(sc.learner)
    scores = {"radio_map": [], "sampled": []}
    for seed in args.seeds:
        for source in scores:
            res = train_dtdpg(sc, cfg, seed, channel_source=source, maps=maps)
            ev = evaluate(res.agent, sc, 20, "sampled", seed=1000 + seed, maps=maps)
            mqi = float(np.mean([e.mqi for e in ev]))
            scores[source].append(mqi)
            print(f"seed {seed} trained on {source:9s}: eval MQI {mqi:8.2f}, "
                  f"phase-1 reach plateau at episode {plateau(res.column('reached', 1))}", flush=True)
    for source, v in scores.items():
        print(f"{source:9s} mean eval MQI {np.mean(v):.2f}")


if __name__ == "__main__":
    main()
