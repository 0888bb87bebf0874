import json
import os
import subprocess

import pytest

BIN = os.environ.get("VCD_BIN")

pytestmark = pytest.mark.skipif(BIN is None, reason="VCD_BIN not set")

TINY = {
    "total_env_steps": 60,
    "eval_every": 25,
    "eval_episodes": 2,
    "batch_size": 8,
    "warmup_steps": 30,
    "replay_capacity": 64,
    "aug_pad": 1,
    "target_sync_interval": 10,
    "network": {
        "encoder_widths": [6],
        "z_dim": 4,
        "dynamics_widths": [5],
        "projector_widths": [4],
        "proj_dim": 3,
        "predictor_widths": [3],
        "q_head_widths": [4],
    },
    "env": {"grid_size": 5, "render_margin": 2, "max_episode_steps": 10},
}


def run(*args, **kw):
    return subprocess.run([BIN, *args], capture_output=True, text=True, **kw)


def test_help_exits_zero():
    assert run("--help").returncode == 0


def test_no_subcommand_is_usage_error():
    assert run().returncode == 2


def test_missing_config_names_path(tmp_path):
    r = run("train", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o"))
    assert r.returncode == 2
    assert "nope.json" in r.stderr


def test_train_artifacts_and_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        r = run("train", "--config", str(cfg), "--seed", "5", "--out", str(out))
        assert r.returncode == 0, r.stderr
        meta = json.loads(r.stdout)
        assert meta["seed"] == 5 and meta["evaluated"]
        for artifact in ("config.json", "run.jsonl", "checkpoint.json", "run_meta.json"):
            assert (out / artifact).exists()
        outs.append((out / "run.jsonl").read_bytes())
    assert outs[0] == outs[1]

    # a second run into the same directory must refuse without --force
    r = run("train", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "a"))
    assert r.returncode == 2
    r = run("train", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "a"), "--force")
    assert r.returncode == 0


def test_metrics_iqm_example(tmp_path):
    scores = tmp_path / "scores.csv"
    scores.write_text("config,seed,score\nq,0,0.0\nq,1,1.0\nq,2,2.0\nq,3,3.0\n")
    r = run("metrics", "--scores", str(scores), "--resamples", "200")
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert report["aggregates"]["iqm"]["value"] == pytest.approx(1.5)


def test_metrics_malformed_csv(tmp_path):
    scores = tmp_path / "scores.csv"
    scores.write_text("config,seed,score\nq,0,zero\n")
    r = run("metrics", "--scores", str(scores))
    assert r.returncode == 2
    assert "line 2" in r.stderr


def test_ablate_rejects_bad_axis(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY))
    r = run(
        "ablate", "--axis", "flux", "--values", "1,2", "--seeds", "0",
        "--config", str(cfg), "--out", str(tmp_path / "ab"),
    )
    assert r.returncode == 2
    assert not (tmp_path / "ab" / "scores.csv").exists()


def test_ablate_structure_and_resume(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY))
    out = tmp_path / "ab"
    args = (
        "ablate", "--axis", "lambda", "--values", "0,0.5", "--seeds", "1,2",
        "--config", str(cfg), "--out", str(out),
    )
    r = run(*args)
    assert r.returncode == 0, r.stderr
    csv_text = (out / "scores.csv").read_text()
    rows = [line.split(",") for line in csv_text.strip().splitlines()[1:]]
    assert [(c, s) for c, s, _ in rows] == [
        ("lambda=0.0", "1"), ("lambda=0.0", "2"), ("lambda=0.5", "1"), ("lambda=0.5", "2"),
    ]
    # all four runs complete, so a rerun only resumes
    r2 = run(*args)
    assert r2.returncode == 0
    assert r2.stderr.count("resume:") == 4
    assert (out / "scores.csv").read_text() == csv_text


def test_bad_log_level(tmp_path):
    r = run("--help", env={**os.environ, "VCD_LOG_LEVEL": "loud"})
    assert r.returncode == 2
    assert "VCD_LOG_LEVEL" in r.stderr
