"""
Command line: preprocess -> train -> predict -> benchmark / report, plus serve.

Option precedence: flags > --config file > DFBENCH_* environment > defaults.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config import RuntimeSettings, ServeSettings, load_config_file, settings
from modules.dataset import AugmentationConfig, ManifestEntry, SplitEnum, SplitSpec
from modules.evaluation import AggregationEnum, PredictionRecord
from modules.networks import ScalePresetEnum
from modules.runs import RunConfig
from modules.training import TrainConfig
from networks import Detector
from repositories.checkpoint_repository import CheckpointRepository
from repositories.report_repository import METRICS_FILE, COMPARISON_TEXT_FILE, ReportRepository
from services.benchmark_service import BenchmarkService
from services.dataset_service import DatasetService, FrameDataset
from services.prediction_service import PredictionService
from services.training_service import EPOCH_LOG_SUFFIX, build_detector, finetune, restore_detector
from shared.exceptions import DFBenchError, EmptyInputError

__log__ = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
PREDICTIONS_FILE = "predictions.jsonl"
FRAME_SCORES_SUFFIX = ".frames.jsonl"


class UsageError(DFBenchError):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value file")
    common.add_argument("--seed", type=int)
    common.add_argument("--log-level", dest="log_level")
    common.add_argument("--device")
    common.add_argument("--workers", dest="num_workers", type=int)
    common.add_argument("--output", type=Path)
    common.add_argument("--preset", choices=[p.value for p in ScalePresetEnum])

    parser = argparse.ArgumentParser(prog="dfbench", description="Deepfake detection benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preprocess", parents=[common], help="scan frames, split, write manifest")
    pre.add_argument("--input", dest="input_dir", type=Path)
    pre.add_argument("--manifest", type=Path)
    pre.add_argument("--split", help="train,val,test percentages, e.g. 80,15,5")
    pre.add_argument("--anonymize", action="store_const", const=True)

    train = sub.add_parser("train", parents=[common], help="fine-tune detectors")
    train.add_argument("--manifest", type=Path)
    train.add_argument("--model", dest="models", action="append")
    train.add_argument("--epochs", help="checkpoint epochs, e.g. 4,5,8,10")
    train.add_argument("--lr", dest="learning_rate", type=float)
    train.add_argument("--batch-size", dest="batch_size", type=int)
    train.add_argument("--frames", type=int)
    train.add_argument("--augment-rate", dest="augment_rate", type=float)
    train.add_argument("--resume", type=Path)
    train.add_argument("--weights", type=Path, help="pretrained weights keyed by layer name")
    train.add_argument("--weights-prefix", dest="weights_prefix", help="prepended to every weight key")

    predict = sub.add_parser("predict", parents=[common], help="score the test split")
    predict.add_argument("--manifest", type=Path)
    predict.add_argument("--checkpoint", dest="checkpoints", action="append", type=Path)
    predict.add_argument("--frames", type=int)
    predict.add_argument("--agg", choices=[a.value for a in AggregationEnum])
    predict.add_argument("--threshold", type=float)

    bench = sub.add_parser("benchmark", parents=[common], help="compare detectors")
    bench.add_argument("--manifest", type=Path)
    bench.add_argument("--checkpoint", dest="checkpoints", action="append", type=Path)
    bench.add_argument("--dump", dest="dumps", action="append", help="[MODEL=]PATH")
    bench.add_argument("--frames", type=int)
    bench.add_argument("--agg", choices=[a.value for a in AggregationEnum])
    bench.add_argument("--threshold", type=float)

    report = sub.add_parser("report", parents=[common], help="metrics of one prediction dump")
    report.add_argument("--dump", dest="dumps", action="append", help="[MODEL=]PATH")
    report.add_argument("--baseline", type=Path)
    report.add_argument("--threshold", type=float)

    serve = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--checkpoint-dir", dest="checkpoint_dir", type=Path)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    runtime = RuntimeSettings()
    values: dict = {
        "seed": runtime.seed,
        "log_level": runtime.log_level,
        "device": runtime.device,
        "num_workers": runtime.num_workers,
    }
    if args.command == "serve":
        serve = ServeSettings()
        values.update(host=serve.host, port=serve.port, preset=serve.preset, checkpoint_dir=serve.checkpoint_dir)
    if args.config is not None:
        values.update(load_config_file(args.config))
    values.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    return RunConfig.model_validate(values)


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _dump_source(spec: str) -> tuple[str, Path]:
    model, sep, path = spec.partition("=")
    if sep:
        return model, Path(path)
    return Path(spec).stem, Path(spec)


def _test_entries(entries: list[ManifestEntry]) -> list[ManifestEntry]:
    if all(entry.split == SplitEnum.UNASSIGNED for entry in entries):
        return entries
    selected = [entry for entry in entries if entry.split == SplitEnum.TEST]
    if not selected:
        raise EmptyInputError("the manifest has no test entries")
    return selected


def cmd_preprocess(cfg: RunConfig) -> int:
    input_dir = _require(cfg.input_dir, "--input")
    manifest = _require(cfg.manifest, "--manifest")
    split = SplitSpec.from_percentages(cfg.split, seed=cfg.seed) if cfg.split else None
    service = DatasetService(manifest)
    _, stats = service.preprocess(input_dir, split=split, anonymize=cfg.anonymize)
    print(stats.model_dump_json(indent=2))
    return 0


def _load_weights(model: Detector, path: Path, prefix: str) -> None:
    weights = CheckpointRepository(path.parent).load_weight_file(path.name)
    try:
        loaded = model.load_external_weights(weights, prefix)
    except KeyError as exc:
        raise UsageError(f"{path}: {exc.args[0]}") from exc
    __log__.info("loaded %d tensors from %s", len(loaded), path)


def cmd_train(cfg: RunConfig) -> int:
    manifest = _require(cfg.manifest, "--manifest")
    if not cfg.models:
        raise UsageError("--model is required")
    service = DatasetService(manifest)
    header, entries = service.load()
    root = service.frame_root(header)
    train_entries = [e for e in entries if e.split == SplitEnum.TRAIN]
    val_entries = [e for e in entries if e.split == SplitEnum.VAL]
    if not train_entries:
        raise EmptyInputError(f"{manifest} has no train entries")
    augmentation = (
        AugmentationConfig(rate=cfg.augment_rate, seed=cfg.seed) if cfg.augment_rate > 0 else None
    )
    for name in cfg.models:
        train_cfg = TrainConfig.for_model(
            name,
            preset=cfg.preset,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            augmentation=augmentation,
            frames_per_video=cfg.frames,
            seed=cfg.seed,
            checkpoint_in=cfg.resume,
            checkpoint_out=cfg.output,
            device=cfg.device,
            num_workers=cfg.num_workers,
        )
        model = build_detector(name, cfg.preset, cfg.seed, train_cfg.loss)
        if cfg.weights is not None:
            _load_weights(model, cfg.weights, cfg.weights_prefix)
        common = {"root": root, "input_size": model.input_size, "frames_per_video": cfg.frames, "seed": cfg.seed}
        train_set = FrameDataset(train_entries, augmentation=augmentation, **common)
        val_set = FrameDataset(val_entries, **common) if val_entries else None
        finetune(train_cfg, train_set, val_set, model=model, log_path=cfg.output / f"{name}{EPOCH_LOG_SUFFIX}")
        print(f"{name}: checkpoints for epochs {train_cfg.epochs} in {cfg.output}")
    return 0


def _predict(cfg: RunConfig, checkpoint: Path, entries, root) -> tuple[str, list[PredictionRecord], list]:
    ckpt = CheckpointRepository(checkpoint.parent).load(checkpoint.name)
    service = PredictionService(
        restore_detector(ckpt),
        frames_per_video=cfg.frames,
        seed=cfg.seed,
        aggregation=cfg.agg,
        threshold=cfg.threshold,
        num_workers=cfg.num_workers,
    )
    records, frames = service.predict_entries(entries, root)
    return ckpt.model_name, records, frames


def cmd_predict(cfg: RunConfig) -> int:
    manifest = _require(cfg.manifest, "--manifest")
    if len(cfg.checkpoints) != 1:
        raise UsageError("predict takes exactly one --checkpoint")
    dataset = DatasetService(manifest)
    header, entries = dataset.load()
    _, records, frames = _predict(cfg, cfg.checkpoints[0], _test_entries(entries), dataset.frame_root(header))
    output = cfg.output if cfg.output.suffix else cfg.output / PREDICTIONS_FILE
    reports = ReportRepository(output.parent)
    reports.write_predictions(output.name, records)
    reports.write_frame_scores(output.with_suffix(FRAME_SCORES_SUFFIX).name, frames)
    print(f"{len(records)} predictions written to {output}")
    return 0


def cmd_benchmark(cfg: RunConfig) -> int:
    reports = ReportRepository(cfg.output)
    dumps: dict[str, list[PredictionRecord]] = {}
    for spec in cfg.dumps:
        model, path = _dump_source(spec)
        dumps[model] = ReportRepository(path.parent).read_predictions(path.name)
    if cfg.checkpoints:
        manifest = _require(cfg.manifest, "--manifest")
        dataset = DatasetService(manifest)
        header, entries = dataset.load()
        test_entries, root = _test_entries(entries), dataset.frame_root(header)
        for checkpoint in cfg.checkpoints:
            model, records, frames = _predict(cfg, checkpoint, test_entries, root)
            if model in dumps:
                model = checkpoint.stem
            dumps[model] = records
            reports.write_predictions(Path(model) / PREDICTIONS_FILE, records)
            reports.write_frame_scores(Path(model) / f"predictions{FRAME_SCORES_SUFFIX}", frames)
    if not dumps:
        raise UsageError("benchmark needs --dump or --checkpoint")
    BenchmarkService(cfg.output).compare(dumps, cfg.threshold)
    print((cfg.output / COMPARISON_TEXT_FILE).read_text(encoding="utf-8"), end="")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    if len(cfg.dumps) != 1:
        raise UsageError("report takes exactly one --dump")
    model, path = _dump_source(cfg.dumps[0])
    records = ReportRepository(path.parent).read_predictions(path.name)
    baseline = None
    if cfg.baseline is not None:
        baseline = ReportRepository(cfg.baseline.parent).read_predictions(cfg.baseline.name)
    _, comparison = BenchmarkService(cfg.output).report(records, model, cfg.threshold, baseline)
    print((cfg.output / METRICS_FILE).read_text(encoding="utf-8"), end="")
    if comparison is not None:
        print(json.dumps({key: delta.delta for key, delta in comparison.deltas.items()}, indent=2))
    return 0


def cmd_serve(cfg: RunConfig) -> int:
    import uvicorn

    settings.serve.preset = cfg.preset.value
    settings.serve.checkpoint_dir = cfg.checkpoint_dir or settings.serve.checkpoint_dir
    uvicorn.run("main:app", host=cfg.host, port=cfg.port, log_level=cfg.log_level.lower())
    return 0


COMMANDS = {
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "predict": cmd_predict,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
    "serve": cmd_serve,
}


def describe(exc: Exception) -> str:
    if isinstance(exc, ValidationError):
        error = exc.errors()[0]
        where = ".".join(str(part) for part in error["loc"])
        return f"{where}: {error['msg']}"
    text = str(exc)
    return text.splitlines()[0] if text else exc.__class__.__name__


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        logging.basicConfig(level=cfg.log_level.upper(), format=LOG_FORMAT, force=True)
        return COMMANDS[cfg.command](cfg)
    except (DFBenchError, OSError, ValueError) as exc:
        print(f"error: {describe(exc)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
