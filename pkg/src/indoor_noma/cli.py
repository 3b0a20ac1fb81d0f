"""Command-line front end.

Subcommands::

    indoor-noma build-map --scenario paper-room --out maps/
    indoor-noma train     --scenario desk --algo dtdpg --seed 3 --out runs/desk-s3
    indoor-noma eval      --checkpoint runs/desk-s3/checkpoint.npz --scenario desk --fading sampled
    indoor-noma compare   --scenario desk --seeds 0,1,2 --out runs/compare

Every command writes ``manifest.json`` next to its outputs recording the
scenario digest, command line and seed.  Exit codes: 0 success, 2 invalid
input, 3 runtime failure.  Outputs default to ``$INDOOR_NOMA_OUT/<command>-<scenario>-s<seed>``
(``$INDOOR_NOMA_OUT`` defaults to ``./runs``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .env import build_maps
from .learner import AgentConfig, evaluate, load_checkpoint, save_checkpoint, train_ddpg_baseline, train_dtdpg
from .learner.training import final_window, write_metrics_csv, write_trace_csv
from .radiomap import MapFormatError, build_sinr_map, export_map, occlusion_counts
from .scenario import Scenario, ScenarioError, load_scenario, resolve_path

log = logging.getLogger("indoor_noma")

OUT_ENV = "INDOOR_NOMA_OUT"
DEFAULT_SEED = 0
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class InvalidInput(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    scenario: str
    seed: int
    out_dir: Path
    options: dict = field(default_factory=dict)

    def manifest(self, sc: Scenario, outputs: list[str]) -> dict:
        return {
            "command": self.command,
            "argv": sys.argv[1:],
            "scenario": str(resolve_path(self.scenario)),
            "scenario_name": sc.name,
            "scenario_sha256": sc.source_digest,
            "seed": self.seed,
            "options": self.options,
            "outputs": outputs,
            "version": __version__,
        }

    def write_manifest(self, sc: Scenario, outputs: list[str]) -> None:
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(self.manifest(sc, outputs), indent=2, sort_keys=True) + "\n")


def _out_dir(args, command: str) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        root = Path(os.environ.get(OUT_ENV, "runs"))
        out = root / f"{command}-{Path(str(args.scenario)).stem}-s{args.seed}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(name) -> Scenario:
    try:
        return load_scenario(name)
    except ScenarioError as exc:
        raise InvalidInput(str(exc)) from None


def _split_episodes(total: int | None, cfg: AgentConfig) -> AgentConfig:
    """``--episodes`` is the total budget; DT-DPG keeps the configured phase ratio."""
    if total is None:
        return cfg
    if total < 2:
        raise InvalidInput(f"--episodes must be at least 2, got {total}")
    base = cfg.phase1_episodes + cfg.phase2_episodes
    p1 = int(round(total * cfg.phase1_episodes / base)) if base else total // 2
    p1 = min(max(p1, 1), total - 1)
    return AgentConfig.from_overrides({**asdict(cfg), "phase1_episodes": p1, "phase2_episodes": total - p1})


def _agent_config(sc: Scenario, episodes: int | None) -> AgentConfig:
    try:
        cfg = AgentConfig.from_overrides(sc.learner)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"learner section: {exc}") from None
    return _split_episodes(episodes, cfg)


# -- build-map ---------------------------------------------------------------

def cmd_build_map(args) -> int:
    sc = _load(args.scenario)
    run = RunConfig("build-map", args.scenario, args.seed, _out_dir(args, "build-map"))
    maps = build_maps(sc)
    outputs = []
    for ap in sc.aps:
        name = f"power_{ap.id}.csv"
        export_map(maps[ap.id], run.out_dir / name)
        outputs.append(name)
    sinr = build_sinr_map(maps[sc.serving_ap.id], [maps[ap.id] for ap in sc.interferers], sc.noise_dbm)
    export_map(sinr, run.out_dir / "sinr.csv")
    outputs.append("sinr.csv")
    run.write_manifest(sc, outputs)

    los = occlusion_counts(sc.layout, sc.serving_ap, sc.ir_antenna_height) == 0
    g = sc.grid
    print(f"scenario {sc.name}: {g.n_x}x{g.n_y} cells, {len(sc.aps)} APs -> {run.out_dir}")
    print(f"LoS cell fraction (serving AP): {los.mean():.4f}")
    print(f"SINR min {sinr.values.min():.2f} dB, max {sinr.values.max():.2f} dB")
    return EXIT_OK


# -- train -------------------------------------------------------------------

def _train(sc: Scenario, cfg: AgentConfig, algo: str, seed: int, ma_mode: str, fading: str):
    source = "sampled" if fading == "sampled" else "radio_map"
    fn = train_dtdpg if algo == "dtdpg" else train_ddpg_baseline
    return fn(sc, cfg, seed, channel_source=source, ma_mode=ma_mode)


def _summary(res, algo: str) -> dict:
    out = {"algo": algo, "episodes": len(res.metrics)}
    phases = (1, 2) if algo == "dtdpg" else (1,)
    for ph in phases:
        mqi = final_window(res.column("mqi", ph))
        reach = final_window(res.column("reached", ph))
        out[f"phase{ph}_final20_median_mqi"] = float(np.median(mqi))
        out[f"phase{ph}_final20_reach_rate"] = float(reach.mean())
    last = phases[-1]
    out["final20_median_mqi"] = out[f"phase{last}_final20_median_mqi"]
    out["final20_reach_rate"] = out[f"phase{last}_final20_reach_rate"]
    return out


def cmd_train(args) -> int:
    sc = _load(args.scenario)
    ma_mode = args.ma_mode or sc.ma_mode
    cfg = _agent_config(sc, args.episodes)
    run = RunConfig("train", args.scenario, args.seed, _out_dir(args, "train"),
                    {"algo": args.algo, "ma_mode": ma_mode, "fading": args.fading, "episodes": args.episodes})
    print(f"training {args.algo} on {sc.name} ({ma_mode}, {args.fading} fading), seed {args.seed}")
    res = _train(sc, cfg, args.algo, args.seed, ma_mode, args.fading)
    save_checkpoint(res.agent, run.out_dir / "checkpoint.npz")
    write_metrics_csv(res.metrics, run.out_dir / "metrics.csv")
    summary = _summary(res, args.algo)
    (run.out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    run.write_manifest(sc, ["checkpoint.npz", "metrics.csv", "summary.json"])
    print(f"final-20 median MQI {summary['final20_median_mqi']:.2f}, "
          f"reach rate {summary['final20_reach_rate']:.2f} -> {run.out_dir}")
    return EXIT_OK


# -- eval --------------------------------------------------------------------

def cmd_eval(args) -> int:
    sc = _load(args.scenario)
    try:
        agent = load_checkpoint(args.checkpoint)
    except (OSError, KeyError, ValueError) as exc:
        raise InvalidInput(f"cannot load checkpoint {args.checkpoint}: {exc}") from None
    episodes = args.episodes or 20
    ma_mode = args.ma_mode or sc.ma_mode
    run = RunConfig("eval", args.scenario, args.seed, _out_dir(args, "eval"),
                    {"checkpoint": str(args.checkpoint), "episodes": episodes, "fading": args.fading,
                     "ma_mode": ma_mode})
    try:
        results = evaluate(agent, sc, episodes, args.fading, args.seed, ma_mode=ma_mode, record=True)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    write_trace_csv(results, sc.num_irs, run.out_dir / "trace.csv")
    with open(run.out_dir / "episodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "mqi", "reached", "steps"])
        for k, r in enumerate(results):
            w.writerow([k, f"{r.mqi:.6f}", int(r.reached), r.steps])
    run.write_manifest(sc, ["trace.csv", "episodes.csv"])
    mqis = np.array([r.mqi for r in results])
    print(f"{episodes} greedy episodes, {args.fading} fading: mean MQI {mqis.mean():.2f}, "
          f"reach rate {np.mean([r.reached for r in results]):.2f}")
    return EXIT_OK


# -- compare -----------------------------------------------------------------

ARMS = (("dtdpg", "noma"), ("dtdpg", "oma"), ("ddpg", "noma"), ("ddpg", "oma"))
COMPARE_COLUMNS = ("algo", "ma_mode", "seed", "mean_mqi", "reach_rate", "noma_minus_oma_mqi")


def _compare_job(job):
    scenario, cfg, algo, ma_mode, seed = job
    sc = load_scenario(scenario)
    res = _train(sc, cfg, algo, seed, ma_mode, "expected")
    last = 2 if algo == "dtdpg" else 1
    return (float(final_window(res.column("mqi", last)).mean()),
            float(final_window(res.column("reached", last)).mean()))


def compare_rows(results: dict, seeds) -> list[dict]:
    """``results[(algo, ma_mode, seed)] = (mean_mqi, reach_rate)`` -> table rows with the NOMA-OMA delta."""
    rows = []
    for algo, ma_mode in ARMS:
        for seed in seeds:
            mqi, reach = results[(algo, ma_mode, seed)]
            delta = results[(algo, "noma", seed)][0] - results[(algo, "oma", seed)][0]
            rows.append({"algo": algo, "ma_mode": ma_mode, "seed": seed, "mean_mqi": mqi,
                         "reach_rate": reach, "noma_minus_oma_mqi": delta})
    return rows


def cmd_compare(args) -> int:
    sc = _load(args.scenario)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError:
        raise InvalidInput(f"--seeds must be a comma-separated list of integers, got {args.seeds!r}") from None
    if not seeds:
        raise InvalidInput("--seeds is empty")
    args.seed = seeds[0]
    run = RunConfig("compare", args.scenario, seeds[0], _out_dir(args, "compare"),
                    {"seeds": seeds, "episodes": args.episodes, "workers": args.workers})
    jobs = []
    for algo, ma_mode in ARMS:
        cfg = _agent_config(sc, args.episodes)
        jobs += [(str(args.scenario), cfg, algo, ma_mode, s) for s in seeds]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            outcomes = list(pool.map(_compare_job, jobs))
    else:
        outcomes = [_compare_job(j) for j in jobs]
    results = {(j[2], j[3], j[4]): o for j, o in zip(jobs, outcomes)}
    rows = compare_rows(results, seeds)
    with open(run.out_dir / "compare.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({**r, "mean_mqi": f"{r['mean_mqi']:.6f}", "reach_rate": f"{r['reach_rate']:.6f}",
                        "noma_minus_oma_mqi": f"{r['noma_minus_oma_mqi']:.6f}"})
    run.write_manifest(sc, ["compare.csv"])
    for algo, ma_mode in ARMS:
        arm = [r for r in rows if r["algo"] == algo and r["ma_mode"] == ma_mode]
        print(f"{algo:6s} {ma_mode:5s} mean MQI {np.mean([r['mean_mqi'] for r in arm]):9.2f}  "
              f"reach {np.mean([r['reach_rate'] for r in arm]):.2f}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="indoor-noma", description="Radio-map NOMA robot navigation experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario_default="paper-room"):
        sp.add_argument("--scenario", default=scenario_default,
                        help="bundled name (desk, paper-room) or path to a scenario YAML")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", help=f"output directory (default under ${OUT_ENV})")

    sp = sub.add_parser("build-map", help="power map per AP plus the SINR map, as CSV")
    common(sp)
    sp.set_defaults(func=cmd_build_map)

    sp = sub.add_parser("train", help="train an agent, write checkpoint and metrics")
    common(sp, "desk")
    sp.add_argument("--algo", choices=("dtdpg", "ddpg"), default="dtdpg")
    sp.add_argument("--ma-mode", choices=("noma", "oma"))
    sp.add_argument("--fading", choices=("expected", "sampled"), default="expected",
                    help="train on the radio map (expected) or on per-slot Rayleigh draws (sampled)")
    sp.add_argument("--episodes", type=int, help="total training episodes (default: scenario learner config)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="greedy rollouts of a checkpoint")
    common(sp, "desk")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--episodes", type=int, default=20)
    sp.add_argument("--fading", choices=("expected", "sampled"), default="sampled")
    sp.add_argument("--ma-mode", choices=("noma", "oma"))
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("compare", help="{dtdpg, ddpg} x {noma, oma} over paired seeds")
    common(sp, "desk")
    sp.add_argument("--seeds", default="0,1,2")
    sp.add_argument("--episodes", type=int, help="total training episodes per run")
    sp.add_argument("--workers", type=int, default=1, help="parallel training processes")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "seed", None) is not None and args.command != "compare":
        print(f"seed {args.seed}")
    try:
        return args.func(args)
    except (InvalidInput, MapFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime-failure exit code
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
