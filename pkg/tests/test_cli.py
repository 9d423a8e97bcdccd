"""Argument surface, report writing, and end-to-end command runs."""
import json
import os

import pytest

from drivebench.cli import (ABLATIONS, BRAKE_SWEEP, EPISODE_COLS, _fmt,
                            _parse_seeds, build_parser, episode_rows, main,
                            write_report)
from drivebench.datagen import read_dataset
from drivebench.fixtures import benchmark_suite
from drivebench.metrics import EpisodeResult, InfractionEvent
from drivebench.world import save_scenario


def _bm01(tmp_path):
    sc = benchmark_suite()[0]
    path = tmp_path / "bm01.json"
    save_scenario(sc, path)
    return str(path)


def _ep(seed=0, ds=100.0, events=()):
    return EpisodeResult(route="r", seed=seed, eval_index=0, rc=ds, is_=1.0,
                         ds=ds, km=0.14, events=list(events), completed=True)


def test_parser_defaults():
    args = build_parser().parse_args(["run"])
    assert (args.suite, args.policy, args.controller) == \
        ("benchmark", "expert", "auto")
    assert (args.preset, args.evals, args.jobs, args.out) == \
        ("validation", 1, 1, "out")
    assert args.brake_threshold is None
    assert not args.argmax and not args.stop_buffer
    uk = build_parser().parse_args(["ukf-eval"])
    assert (uk.ukf_seeds, uk.sigma, uk.duration) == (20, 0.5585, 60.0)


def test_parse_seeds_env_fallback(monkeypatch):
    args = build_parser().parse_args(["run", "--seeds", "3,5,8"])
    assert _parse_seeds(args) == [3, 5, 8]
    args = build_parser().parse_args(["run", "--seeds", "4,"])
    assert _parse_seeds(args) == [4]
    args = build_parser().parse_args(["run"])
    monkeypatch.setenv("DRIVEBENCH_SEED", "7")
    assert _parse_seeds(args) == [7]
    monkeypatch.delenv("DRIVEBENCH_SEED")
    assert _parse_seeds(args) == [0]


def test_ablation_registry_and_sweep():
    assert set(ABLATIONS) == {"conditioning", "argmax_vs_weighted",
                              "brake_threshold", "stop_buffer"}
    assert BRAKE_SWEEP == (0.50, 0.40, 0.33, 0.25)


def test_fmt_uses_shortest_float_repr():
    assert _fmt(0.1) == "0.1"
    assert _fmt(1.0 / 3.0) == repr(1.0 / 3.0)
    assert _fmt(5) == "5"
    assert _fmt("x") == "x"


def test_episode_rows_count_events():
    events = [InfractionEvent("collision_pedestrian", 1.0),
              InfractionEvent("collision_pedestrian", 2.0),
              InfractionEvent("red_light", 3.0)]
    row = episode_rows([_ep(events=events)])[0]
    assert (row["Ped"], row["Red"], row["Veh"]) == (2, 1, 0)
    assert row["completed"] == 1
    assert list(row) != []  # all report columns present
    for col in EPISODE_COLS:
        assert col in row


def test_write_report_files(tmp_path):
    agg = write_report([_ep(0), _ep(1, ds=90.0)], str(tmp_path))
    csv = (tmp_path / "report_episodes.csv").read_text().splitlines()
    assert csv[0] == ",".join(EPISODE_COLS)
    assert len(csv) == 3
    agg_csv = (tmp_path / "report_aggregate.csv").read_text().splitlines()
    assert agg_csv[0].startswith("DS,RC,IS,")
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["aggregate"]["DS"] == agg["DS"] == pytest.approx(95.0)
    assert len(payload["episodes"]) == 2


def test_run_missing_scenario_exits_2(tmp_path, capsys):
    rc = main(["run", "--scenario", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_run_single_route_byte_identical(tmp_path):
    sc = _bm01(tmp_path)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", "--scenario", sc, "--seeds", "0",
                     "--out", str(out)]) == 0
        outs.append(out)
    for fname in ("report_episodes.csv", "report_aggregate.csv",
                  "report.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
    # the lone benchmark route scores clean
    payload = json.loads((outs[0] / "report.json").read_text())
    assert payload["aggregate"]["DS"] == 100.0


def test_datagen_cli_shards(tmp_path):
    sc = _bm01(tmp_path)
    out = tmp_path / "data"
    assert main(["datagen", "--scenario", sc, "--seeds", "0",
                 "--shards", "2", "--out", str(out)]) == 0
    parts = [read_dataset(out / f"dataset_{k:02d}.jsonl") for k in range(2)]
    assert len(parts[0]) + len(parts[1]) > 0
    assert abs(len(parts[0]) - len(parts[1])) <= 1
    # clean and augmented twins interleave, so shards split them apart
    assert all(f.aug is None for f in parts[0])
    assert all(f.aug is not None for f in parts[1])
    assert (out / "datagen_episodes.csv").exists()


def test_ukf_eval_cli(tmp_path):
    out = tmp_path / "ukf"
    assert main(["ukf-eval", "--ukf-seeds", "2", "--duration", "5",
                 "--out", str(out)]) == 0
    csv = (out / "ukf_eval.csv").read_text().splitlines()
    assert csv[0] == "seed,raw_mean_m,filtered_mean_m"
    assert len(csv) == 4                     # two seeds + the mean row
    payload = json.loads((out / "ukf_eval.json").read_text())
    assert payload["sigma"] == 0.5585
    assert len(payload["rows"]) == 2
