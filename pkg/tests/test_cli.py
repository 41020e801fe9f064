import json
from pathlib import Path

import pytest

from cli import build_parser, main, resolve_config
from conftest import write_frame_corpus
from dto import CorpusDTO
from modules.evaluation import PredictionRecord
from repositories.manifest_repository import load_manifest
from repositories.report_repository import ReportRepository


def run(*argv) -> int:
    return main([str(arg) for arg in argv])


@pytest.fixture
def workdir(tmp_path: Path) -> Path:
    return tmp_path / "work"


@pytest.fixture
def manifest(corpus: CorpusDTO, workdir: Path) -> Path:
    path = workdir / "manifest.jsonl"
    assert run("preprocess", "--input", corpus.root, "--manifest", path, "--split", "80,15,5") == 0
    return path


@pytest.fixture
def checkpoint(manifest: Path, workdir: Path) -> Path:
    code = run(
        "train",
        "--manifest", manifest,
        "--model", "meso4",
        "--epochs", "1,2",
        "--batch-size", "8",
        "--frames", "3",
        "--augment-rate", "0",
        "--output", workdir / "runs",
    )
    assert code == 0
    return workdir / "runs" / "meso4_epoch002.ckpt"


def test_preprocess_prints_stats(corpus: CorpusDTO, workdir: Path, capsys):
    path = workdir / "manifest.jsonl"
    assert run("preprocess", "--input", corpus.root, "--manifest", path, "--split", "80,15,5") == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["total"] == corpus.n_clips
    assert stats["by_split"]["test"] == 2
    assert len(load_manifest(path)) == corpus.n_clips


def test_train_writes_sweep_and_epoch_log(checkpoint: Path, workdir: Path):
    runs = workdir / "runs"
    assert checkpoint.is_file()
    assert (runs / "meso4_epoch001.ckpt").is_file()
    records = ReportRepository(runs).read_epochs("meso4_epochs.jsonl")
    assert [r.epoch for r in records] == [1, 2]
    assert records[-1].val_acc is not None


def test_predict_benchmark_report(manifest: Path, checkpoint: Path, workdir: Path, capsys):
    dump = workdir / "preds" / "meso4.jsonl"
    code = run("predict", "--manifest", manifest, "--checkpoint", checkpoint, "--frames", "3", "--output", dump)
    assert code == 0
    records = ReportRepository(dump.parent).read_predictions(dump.name)
    assert len(records) == 2
    assert {r.true_label.value for r in records} == {"real", "fake"}
    frames = ReportRepository(dump.parent).read_frame_scores("meso4.frames.jsonl")
    assert len(frames) == 6

    bench = workdir / "bench"
    assert run("benchmark", "--dump", f"meso4={dump}", "--output", bench) == 0
    out = capsys.readouterr().out
    assert "meso4" in out
    assert (bench / "comparison.json").is_file()
    assert (bench / "meso4" / "report.json").is_file()

    report = workdir / "report"
    assert run("report", "--dump", dump, "--baseline", dump, "--output", report) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "metric\tvalue"
    deltas = json.loads((report / "deltas.json").read_text())
    assert all(delta["delta"] == 0 for delta in deltas["deltas"].values())


def test_benchmark_scores_checkpoints(manifest: Path, checkpoint: Path, workdir: Path):
    bench = workdir / "bench"
    code = run("benchmark", "--manifest", manifest, "--checkpoint", checkpoint, "--output", bench)
    assert code == 0
    assert (bench / "meso4" / "predictions.jsonl").is_file()
    assert (bench / "comparison.txt").read_text().splitlines()[2].startswith("meso4")


def test_frame_sweep_changes_frame_dumps(checkpoint: Path, tmp_path: Path):
    clips = write_frame_corpus(tmp_path / "long", n_real=2, n_fake=2, frames_per_clip=40)
    long_manifest = tmp_path / "long.jsonl"
    assert run("preprocess", "--input", clips.root, "--manifest", long_manifest) == 0

    chosen = {}
    for frames in (10, 15, 24):
        dump = tmp_path / "sweep" / f"k{frames}.jsonl"
        code = run(
            "predict", "--manifest", long_manifest, "--checkpoint", checkpoint, "--frames", frames, "--output", dump
        )
        assert code == 0
        records = ReportRepository(dump.parent).read_frame_scores(f"k{frames}.frames.jsonl")
        assert len(records) == clips.n_clips * frames
        per_clip: dict[str, list[str]] = {}
        for record in records:
            per_clip.setdefault(record.sample_id, []).append(record.frame)
        assert all(len(listed) == frames and listed == sorted(listed) for listed in per_clip.values())
        chosen[frames] = tuple(per_clip[records[0].sample_id])

    assert len(set(chosen.values())) == 3


def test_train_starts_from_external_weights(manifest: Path, checkpoint: Path, workdir: Path):
    code = run(
        "train",
        "--manifest", manifest,
        "--model", "meso4",
        "--epochs", "1",
        "--batch-size", "8",
        "--frames", "1",
        "--augment-rate", "0",
        "--weights", checkpoint,
        "--output", workdir / "warm",
    )
    assert code == 0
    assert (workdir / "warm" / "meso4_epoch001.ckpt").is_file()


def test_weights_with_wrong_prefix_exit_with_error(manifest: Path, checkpoint: Path, workdir: Path, capsys):
    code = run(
        "train",
        "--manifest", manifest,
        "--model", "meso4",
        "--weights", checkpoint,
        "--weights-prefix", "backbone.",
        "--output", workdir / "warm",
    )
    assert code == 1
    assert "no layer named 'backbone." in capsys.readouterr().err


def test_relative_paths_are_written_where_requested(corpus: CorpusDTO, tmp_path: Path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run("preprocess", "--input", corpus.root.name, "--manifest", "data/manifest.jsonl") == 0
    assert Path("data/manifest.jsonl").is_file()
    assert len(load_manifest(Path("data/manifest.jsonl"))) == corpus.n_clips

    records = [
        PredictionRecord(sample_id="a", score=0.9, true_label="fake", method="wav2lip", latency_seconds=0.1),
        PredictionRecord(sample_id="b", score=0.2, true_label="real", method="original", latency_seconds=0.1),
    ]
    ReportRepository(Path("preds")).write_predictions("m.jsonl", records)
    assert run("report", "--dump", "preds/m.jsonl", "--output", "out/report") == 0
    assert run("benchmark", "--dump", "m=preds/m.jsonl", "--output", "out/bench") == 0

    assert (tmp_path / "out" / "report" / "report.json").is_file()
    assert (tmp_path / "out" / "bench" / "comparison.txt").is_file()
    assert (tmp_path / "out" / "bench" / "m" / "report.json").is_file()
    assert not (tmp_path / "out" / "bench" / "out").exists()


def test_missing_manifest_exits_with_error(tmp_path: Path, capsys):
    code = run("train", "--manifest", tmp_path / "missing.jsonl", "--model", "meso4")
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_required_option_exits_with_error(manifest: Path, capsys):
    assert run("train", "--manifest", manifest) == 1
    assert "--model" in capsys.readouterr().err


def test_unknown_detector_exits_with_error(manifest: Path, workdir: Path, capsys):
    code = run("train", "--manifest", manifest, "--model", "nope", "--output", workdir / "runs")
    assert code == 1
    assert "unknown detector 'nope'" in capsys.readouterr().err


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as error:
        main([])
    assert error.value.code == 2
    with pytest.raises(SystemExit) as error:
        main(["predict", "--agg", "median"])
    assert error.value.code == 2


def test_option_precedence(tmp_path: Path, monkeypatch):
    config = tmp_path / "run.conf"
    config.write_text("frames = 7\nseed = 6\n# comment\nthreshold = 0.4\n")
    monkeypatch.setenv("DFBENCH_SEED", "5")
    parser = build_parser()

    assert resolve_config(parser.parse_args(["predict"])).seed == 5

    from_file = resolve_config(parser.parse_args(["predict", "--config", str(config)]))
    assert (from_file.frames, from_file.seed, from_file.threshold) == (7, 6, 0.4)

    flags = resolve_config(parser.parse_args(["predict", "--config", str(config), "--frames", "3"]))
    assert flags.frames == 3


def test_comma_lists_in_config_file(tmp_path: Path):
    config = tmp_path / "run.conf"
    config.write_text("models = genconvit_ae, meso4\nepochs = 4,5\n")
    cfg = resolve_config(build_parser().parse_args(["train", "--config", str(config)]))
    assert cfg.models == ["genconvit_ae", "meso4"]
    assert cfg.epochs == [4, 5]


def test_bad_config_file_exits_with_error(tmp_path: Path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("not a pair\n")
    assert run("report", "--config", config, "--dump", tmp_path / "x.jsonl") == 1
    assert "expected 'key = value'" in capsys.readouterr().err


def test_unknown_config_key_exits_with_error(tmp_path: Path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("frames = 7\nframe_count = 9\n")
    assert run("report", "--config", config, "--dump", tmp_path / "x.jsonl") == 1
    err = capsys.readouterr().err
    assert err.startswith("error: frame_count:")
    assert "Extra inputs are not permitted" in err
