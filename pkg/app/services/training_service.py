import copy
import logging
import math
import time
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

from modules.networks import GenConViTConfig, LossPlan
from modules.training import Checkpoint, EpochEvaluation, EpochLogRecord, TrainConfig
from networks import DETECTOR_REGISTRY, Detector
from repositories.checkpoint_repository import CheckpointRepository
from repositories.report_repository import ReportRepository
from shared.exceptions import EmptyInputError, TrainingDivergedError

__log__ = logging.getLogger(__name__)

EPOCH_LOG_SUFFIX = "_epochs.jsonl"


def checkpoint_name(model: str, epoch: int) -> str:
    return f"{model}_epoch{epoch:03d}.ckpt"


def apply_loss_plan(model: Detector, plan: LossPlan) -> None:
    for module in model.modules():
        cfg = getattr(module, "cfg", None)
        if isinstance(cfg, GenConViTConfig):
            module.cfg = cfg.model_copy(update={"loss": plan})


def build_detector(name: str, preset, seed: int, loss: LossPlan | None = None) -> Detector:
    """Constructs a registered detector with seeded initialisation."""
    torch.manual_seed(seed)
    model = DETECTOR_REGISTRY.get(name).build(preset)
    if loss is not None:
        apply_loss_plan(model, loss)
    return model


def restore_detector(checkpoint: Checkpoint) -> Detector:
    model = DETECTOR_REGISTRY.get(checkpoint.model_name).build(checkpoint.preset)
    model.load_state_dict(checkpoint.state_dict)
    model.eval()
    return model


def build_optimizer(params, cfg: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(params, lr=cfg.learning_rate, betas=cfg.betas, eps=cfg.adam_eps)


def snapshot(
    model: Detector,
    cfg: TrainConfig,
    optimizer: torch.optim.Optimizer | None,
    epoch: int,
    history: list[EpochLogRecord],
) -> Checkpoint:
    return Checkpoint(
        model_name=cfg.model,
        preset=cfg.preset.value,
        config=model.config_echo(),
        state_dict={key: value.detach().cpu().clone() for key, value in model.state_dict().items()},
        optimizer_state=copy.deepcopy(optimizer.state_dict()) if optimizer is not None else None,
        epoch=epoch,
        history=[record.model_dump(mode="json") for record in history],
    )


def _correct(model: Detector, output, labels: torch.Tensor) -> int:
    predicted = (model.score(output) >= 0.5).to(labels.dtype)
    return int((predicted == labels).sum())


@torch.no_grad()
def evaluate_epoch(model: Detector, dataset: Dataset, batch_size: int = 32, device: str = "cpu") -> EpochEvaluation:
    """
    Mean loss and accuracy at threshold 0.5, computed in eval mode
    :param dataset: yields (image, label) with label 1.0 for fake
    """
    if len(dataset) == 0:
        raise EmptyInputError("cannot evaluate on an empty set")
    was_training = model.training
    model.eval()
    total_loss, correct = 0.0, 0
    try:
        for images, labels in DataLoader(dataset, batch_size=batch_size, shuffle=False):
            images, labels = images.to(device), labels.to(device)
            output = model(images)
            total_loss += model.losses(output, labels, images).value * len(labels)
            correct += _correct(model, output, labels)
    finally:
        model.train(was_training)
    return EpochEvaluation(loss=total_loss / len(dataset), accuracy=correct / len(dataset))


def finetune(
    cfg: TrainConfig,
    train_set: Dataset,
    val_set: Dataset | None = None,
    model: Detector | None = None,
    log_path: Path | None = None,
) -> tuple[Detector, Checkpoint]:
    """
    Adam over seeded per-epoch shuffles for ``cfg.total_epochs`` epochs
    :param model: detector to train; built from the registry when omitted
    :param log_path: JSONL file receiving one EpochLogRecord per epoch
    :return: trained detector and its final checkpoint
    """
    if len(train_set) == 0:
        raise EmptyInputError("training set is empty")
    if model is None:
        model = build_detector(cfg.model, cfg.preset, cfg.seed, cfg.loss)
    elif cfg.loss is not None:
        apply_loss_plan(model, cfg.loss)
    model.to(cfg.device)
    optimizer = build_optimizer(model.parameters(), cfg)
    checkpoints = CheckpointRepository(cfg.checkpoint_out) if cfg.checkpoint_out else None
    reports = ReportRepository(log_path.parent) if log_path is not None else None

    history: list[EpochLogRecord] = []
    start_epoch = 0
    if cfg.checkpoint_in is not None:
        resumed = CheckpointRepository(cfg.checkpoint_in.parent).load(cfg.checkpoint_in.name)
        model.load_state_dict(resumed.state_dict)
        if resumed.optimizer_state is not None:
            optimizer.load_state_dict(resumed.optimizer_state)
        start_epoch = resumed.epoch
        history = [EpochLogRecord.model_validate(record) for record in resumed.history]
        __log__.info("resumed %s from %s at epoch %d", cfg.model, cfg.checkpoint_in, start_epoch)

    torch.manual_seed(cfg.seed + start_epoch)
    last_good = snapshot(model, cfg, optimizer, start_epoch, history)
    for epoch in range(start_epoch + 1, cfg.total_epochs + 1):
        started = time.perf_counter()
        if hasattr(train_set, "set_epoch"):
            train_set.set_epoch(epoch)
        generator = torch.Generator().manual_seed(cfg.seed * 1_000_003 + epoch)
        loader = DataLoader(
            train_set,
            batch_size=cfg.batch_size,
            shuffle=True,
            generator=generator,
            num_workers=cfg.num_workers,
        )
        model.train()
        seen, total_loss, correct = 0, 0.0, 0
        for step, (images, labels) in enumerate(loader):
            images, labels = images.to(cfg.device), labels.to(cfg.device)
            output = model(images)
            loss = model.losses(output, labels, images)
            value = loss.value
            if not math.isfinite(value) or value > cfg.divergence_threshold:
                raise TrainingDivergedError(
                    f"{cfg.model}: loss {value} at epoch {epoch} step {step}", last_good
                )
            optimizer.zero_grad()
            loss.total.backward()
            optimizer.step()
            seen += len(labels)
            total_loss += value * len(labels)
            correct += _correct(model, output, labels)

        validation = None
        if val_set is not None and len(val_set) > 0:
            validation = evaluate_epoch(model, val_set, cfg.batch_size, cfg.device)
        record = EpochLogRecord(
            epoch=epoch,
            train_loss=total_loss / seen,
            train_acc=correct / seen,
            val_loss=validation.loss if validation else None,
            val_acc=validation.accuracy if validation else None,
            wall_seconds=time.perf_counter() - started,
        )
        history.append(record)
        if reports is not None:
            reports.append_epoch(log_path.name, record)
        __log__.info(
            "%s epoch %d: train_loss=%.6f train_acc=%.4f val_loss=%s val_acc=%s (%.1fs)",
            cfg.model,
            epoch,
            record.train_loss,
            record.train_acc,
            "-" if record.val_loss is None else f"{record.val_loss:.6f}",
            "-" if record.val_acc is None else f"{record.val_acc:.4f}",
            record.wall_seconds,
        )
        last_good = snapshot(model, cfg, optimizer, epoch, history)
        if checkpoints is not None and epoch in cfg.epochs:
            checkpoints.save(last_good, checkpoint_name(cfg.model, epoch))
    model.eval()
    return model, last_good
