"""Command line front end.

Subcommands:
  run       drive a policy over a scenario suite and write benchmark reports
  ablate    paired-configuration probes (conditioning, argmax_vs_weighted,
            brake_threshold, stop_buffer)
  datagen   record expert drives, filter by perfect score, write a dataset
  ukf-eval  raw vs filtered localization error over seeds

All commands are deterministic functions of their flags plus the seed list;
re-running with the same arguments reproduces every output file byte for
byte. CSV columns follow the fixed report order so downstream tooling can
rely on positions.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import datagen as dg
from . import fixtures
from .controllers import controller_preset
from .episode import AgentSpec, make_agent, run_episode, run_suite, score_log
from .localization import regenerate_gnss, run_filter
from .metrics import REPORT_COLUMNS, aggregate, per_km_rate, per_seed_rates
from .world import load_scenario

BRAKE_SWEEP = (0.50, 0.40, 0.33, 0.25)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_lines(path, lines):
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


EPISODE_COLS = ("route", "seed", "eval", "RC", "IS", "DS", "km",
                "Ped", "Veh", "Stat", "Red", "Stop", "Dev", "TO", "Block",
                "completed")

_KIND_BY_COL = {
    "Ped": "collision_pedestrian", "Veh": "collision_vehicle",
    "Stat": "collision_static", "Red": "red_light", "Stop": "stop_sign",
    "Dev": "route_deviation", "TO": "timeout", "Block": "blocked",
}


def episode_rows(results):
    rows = []
    for r in results:
        row = {"route": r.route, "seed": r.seed, "eval": r.eval_index,
               "RC": r.rc, "IS": r.is_, "DS": r.ds, "km": r.km,
               "completed": int(r.completed)}
        for col, kind in _KIND_BY_COL.items():
            row[col] = r.count(kind)
        rows.append(row)
    return rows


def write_report(results, out_dir, prefix="report"):
    """episodes.csv + aggregate csv/json for one batch of results."""
    os.makedirs(out_dir, exist_ok=True)
    rows = episode_rows(results)
    lines = [",".join(EPISODE_COLS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in EPISODE_COLS))
    _write_lines(os.path.join(out_dir, f"{prefix}_episodes.csv"), lines)

    agg = aggregate(results)
    head = list(REPORT_COLUMNS) + ["episodes", "total_km"]
    vals = [agg[c] for c in REPORT_COLUMNS] + [agg["episodes"],
                                               agg["total_km"]]
    _write_lines(os.path.join(out_dir, f"{prefix}_aggregate.csv"),
                 [",".join(head), ",".join(_fmt(v) for v in vals)])

    payload = {"aggregate": agg, "episodes": rows}
    with open(os.path.join(out_dir, f"{prefix}.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return agg


def _parse_seeds(args):
    if args.seeds:
        return [int(s) for s in args.seeds.split(",") if s != ""]
    return [int(os.environ.get("DRIVEBENCH_SEED", "0"))]


def _controller_config(args):
    cfg = controller_preset(args.preset)
    if args.brake_threshold is not None:
        cfg.brake_threshold = args.brake_threshold
    if args.argmax:
        cfg.argmax = True
    if args.stop_buffer:
        cfg.stop_buffer = True
    return cfg


def _load_scenarios(args):
    if args.scenario:
        return [load_scenario(p) for p in args.scenario]
    return fixtures.suite(args.suite)


def _agent_spec(args, cfg):
    kwargs = {}
    if args.policy == "uncertain" and args.no_see_signs:
        kwargs["see_signs"] = False
    return AgentSpec(policy=args.policy, policy_kwargs=kwargs,
                     controller=args.controller, controller_cfg=cfg)


def cmd_run(args):
    try:
        scenarios = _load_scenarios(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seeds = _parse_seeds(args)
    spec = _agent_spec(args, _controller_config(args))
    try:
        results = run_suite(scenarios, spec, seeds, evals=args.evals,
                            jobs=args.jobs)
    except Exception as exc:
        print(f"episode failed: {exc}", file=sys.stderr)
        return 1
    agg = write_report(results, args.out)
    print(f"{len(results)} episodes -> {args.out}")
    print("  " + "  ".join(f"{c}={agg[c]:.2f}" for c in REPORT_COLUMNS[:3]))
    return 0


# ---------------------------------------------------------------------------
# ablation probes


def ablate_conditioning(seeds, evals=1, jobs=1):
    scs = fixtures.disturbance_suite()
    out = {}
    for label, policy in (("tp", "shortcut"), ("nc", "nc")):
        spec = AgentSpec(policy=policy, controller="waypoint")
        results = run_suite(scs, spec, seeds, evals=evals, jobs=jobs)
        out[label] = {"results": results,
                      "aggregate": aggregate(results),
                      "dev_per_km": per_km_rate(results, "route_deviation")}
    return out


def ablate_argmax_vs_weighted(seeds, evals=1, jobs=1):
    scs = fixtures.uncertainty_suite()
    out = {}
    for label, argmax in (("argmax", True), ("weighted", False)):
        cfg = controller_preset("validation")
        cfg.argmax = argmax
        spec = AgentSpec(policy="uncertain", controller="path_speed",
                         controller_cfg=cfg)
        results = run_suite(scs, spec, seeds, evals=evals, jobs=jobs)
        out[label] = {"results": results,
                      "aggregate": aggregate(results),
                      "veh_per_km": per_km_rate(results, "collision_vehicle"),
                      "veh_by_seed": per_seed_rates(results,
                                                    "collision_vehicle")}
    return out


def ablate_brake_threshold(seeds, evals=1, jobs=1, thresholds=BRAKE_SWEEP):
    scs = fixtures.uncertainty_suite()
    out = {}
    for thr in thresholds:
        cfg = controller_preset("validation")
        cfg.brake_threshold = thr
        spec = AgentSpec(policy="uncertain", controller="path_speed",
                         controller_cfg=cfg)
        results = run_suite(scs, spec, seeds, evals=evals, jobs=jobs)
        out[f"{thr:.2f}"] = {
            "results": results,
            "aggregate": aggregate(results),
            "veh_per_km": per_km_rate(results, "collision_vehicle")}
    return out


def ablate_stop_buffer(seeds, evals=1, jobs=1):
    scs = fixtures.occlusion_suite()
    out = {}
    for label, buffered in (("off", False), ("on", True)):
        cfg = controller_preset("validation")
        cfg.stop_buffer = buffered
        spec = AgentSpec(policy="uncertain",
                         policy_kwargs={"see_signs": False},
                         controller="path_speed", controller_cfg=cfg)
        results = run_suite(scs, spec, seeds, evals=evals, jobs=jobs)
        out[label] = {"results": results,
                      "aggregate": aggregate(results),
                      "stop_per_km": per_km_rate(results, "stop_sign")}
    return out


ABLATIONS = {
    "conditioning": ablate_conditioning,
    "argmax_vs_weighted": ablate_argmax_vs_weighted,
    "brake_threshold": ablate_brake_threshold,
    "stop_buffer": ablate_stop_buffer,
}


def cmd_ablate(args):
    seeds = _parse_seeds(args)
    table = ABLATIONS[args.which](seeds, evals=args.evals, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)

    head = ["variant"] + list(REPORT_COLUMNS)
    lines = [",".join(head)]
    payload = {}
    for label, entry in table.items():
        agg = entry["aggregate"]
        lines.append(",".join([label] + [_fmt(agg[c])
                                         for c in REPORT_COLUMNS]))
        payload[label] = {k: v for k, v in entry.items() if k != "results"}
        payload[label]["aggregate"] = agg
    base = os.path.join(args.out, f"ablate_{args.which}")
    _write_lines(base + ".csv", lines)
    with open(base + ".json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for line in lines:
        print(line)
    return 0


def cmd_datagen(args):
    scenarios = _load_scenarios(args)
    seeds = _parse_seeds(args)
    os.makedirs(args.out, exist_ok=True)
    spec = AgentSpec(policy="expert", controller="native")
    scorecards = []
    frames = []
    rng = np.random.default_rng(np.random.SeedSequence([seeds[0], 77]))
    for sc in scenarios:
        agent = make_agent(spec)
        log = run_episode(sc, agent, seeds[0], keep_infos=True)
        result = score_log(log, sc)
        scorecards.append(result)
        if not (result.completed and result.is_ == 1.0):
            continue
        recs = dg.record_episode(log, sc.route, name=sc.name)
        for rec in recs:
            frames.append(rec)
            frames.append(dg.augment_frame(rec, rng))
    if args.shards > 1:
        for k in range(args.shards):
            part = dg.shard_subsample(frames, args.shards, k)
            dg.write_dataset(part, os.path.join(args.out,
                                                f"dataset_{k:02d}.jsonl"))
    else:
        dg.write_dataset(frames, os.path.join(args.out, "dataset.jsonl"))
    write_report(scorecards, args.out, prefix="datagen")
    kept = {f.episode for f in frames}
    print(f"kept {len(kept)}/{len(scenarios)} routes, "
          f"{len(frames)} frames -> {args.out}")
    return 0


def cmd_ukf_eval(args):
    records = fixtures.ukf_fixture_records(duration=args.duration)
    rows = []
    for seed in range(args.ukf_seeds):
        regen = regenerate_gnss(records, args.sigma, seed)
        run = run_filter(regen)
        rows.append((seed, run.mean_raw, run.mean_filtered))
    raw = float(np.mean([r[1] for r in rows]))
    filt = float(np.mean([r[2] for r in rows]))
    os.makedirs(args.out, exist_ok=True)
    lines = ["seed,raw_mean_m,filtered_mean_m"]
    for seed, r, f in rows:
        lines.append(f"{seed},{_fmt(r)},{_fmt(f)}")
    lines.append(f"mean,{_fmt(raw)},{_fmt(filt)}")
    _write_lines(os.path.join(args.out, "ukf_eval.csv"), lines)
    with open(os.path.join(args.out, "ukf_eval.json"), "w") as fh:
        json.dump({"sigma": args.sigma, "raw_mean": raw,
                   "filtered_mean": filt,
                   "rows": [{"seed": s, "raw": r, "filtered": f}
                            for s, r, f in rows]},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"raw {raw:.3f} m -> filtered {filt:.3f} m over "
          f"{args.ukf_seeds} seeds")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="drivebench")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", action="append",
                        help="scenario JSON file (repeatable)")
        sp.add_argument("--suite", default="benchmark",
                        choices=sorted(fixtures.SUITES))
        sp.add_argument("--seeds", default="",
                        help="comma separated (default: $DRIVEBENCH_SEED or 0)")
        sp.add_argument("--evals", type=int, default=1)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--out", default="out")

    run_p = sub.add_parser("run", help="run a benchmark")
    common(run_p)
    run_p.add_argument("--policy", default="expert",
                       choices=["expert", "shortcut", "nc", "uncertain"])
    run_p.add_argument("--controller", default="auto",
                       choices=["auto", "native", "waypoint", "path_speed"])
    run_p.add_argument("--preset", default="validation",
                       choices=["validation", "dense"])
    run_p.add_argument("--brake-threshold", type=float, default=None)
    run_p.add_argument("--argmax", action="store_true")
    run_p.add_argument("--stop-buffer", action="store_true")
    run_p.add_argument("--no-see-signs", action="store_true")
    run_p.set_defaults(func=cmd_run)

    ab_p = sub.add_parser("ablate", help="paired configuration probes")
    ab_p.add_argument("which", choices=sorted(ABLATIONS))
    common(ab_p)
    ab_p.set_defaults(func=cmd_ablate)

    dg_p = sub.add_parser("datagen", help="record an expert dataset")
    common(dg_p)
    dg_p.add_argument("--shards", type=int, default=1)
    dg_p.set_defaults(func=cmd_datagen)

    uk_p = sub.add_parser("ukf-eval", help="localization error study")
    uk_p.add_argument("--ukf-seeds", type=int, default=20)
    uk_p.add_argument("--sigma", type=float, default=0.5585)
    uk_p.add_argument("--duration", type=float, default=60.0)
    uk_p.add_argument("--out", default="out")
    uk_p.set_defaults(func=cmd_ukf_eval)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
