from pathlib import Path

import pytest
import torch
from torch.utils.data import TensorDataset

from conftest import blob_images
from modules.training import Checkpoint, TrainConfig
from repositories.checkpoint_repository import CheckpointRepository
from repositories.report_repository import ReportRepository
from services.training_service import (
    build_detector,
    build_optimizer,
    checkpoint_name,
    evaluate_epoch,
    finetune,
    restore_detector,
    snapshot,
)
from shared.exceptions import (
    CheckpointVersionError,
    CorruptCheckpointError,
    EmptyInputError,
    TrainingDivergedError,
)


def overfit_config(model: str, **overrides) -> TrainConfig:
    values = {"learning_rate": 1e-4, "batch_size": 4, "epochs": [30], "seed": 0}
    values.update(overrides)
    return TrainConfig.for_model(model, **values)


def test_for_model_defaults():
    vae = TrainConfig.for_model("genconvit_vae")
    assert (vae.learning_rate, vae.batch_size) == (1e-4, 16)
    assert vae.epochs == [4, 5, 6, 8, 10]
    assert vae.total_epochs == 10

    ae = TrainConfig.for_model("genconvit_ae", batch_size=None, epochs=[5, 4, 5])
    assert ae.batch_size == 32
    assert ae.epochs == [4, 5]

    baseline = TrainConfig.for_model("meso4")
    assert baseline.learning_rate == 2e-4


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(model="meso4", learning_rate=0)
    with pytest.raises(ValueError):
        TrainConfig(model="meso4", batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(model="meso4", epochs=[0])


def test_adam_single_step_matches_closed_form():
    cfg = TrainConfig(model="meso4", learning_rate=1e-3)
    x = torch.nn.Parameter(torch.tensor([1.0], dtype=torch.float64))
    optimizer = build_optimizer([x], cfg)
    for step in range(1, 3):
        optimizer.zero_grad()
        (3.0 * x).sum().backward()
        optimizer.step()
        # constant gradient: m_hat = g and v_hat = g**2 at every step
        expected = 1.0 - step * 1e-3 * 3.0 / (3.0 + 1e-8)
        assert abs(float(x) - expected) < 1e-10


@pytest.mark.parametrize("model", ["genconvit_ae", "genconvit_vae", "meso4"])
def test_overfits_separable_blobs(model: str, blob_dataset: TensorDataset):
    trained, checkpoint = finetune(overfit_config(model), blob_dataset)
    assert checkpoint.epoch == 30
    assert evaluate_epoch(trained, blob_dataset, batch_size=8).accuracy >= 0.95


@pytest.mark.parametrize("model", ["genconvit_vae", "meso4"])
def test_first_epoch_loss_is_reproducible(model: str, blob_dataset: TensorDataset):
    def first_loss(seed: int) -> float:
        cfg = TrainConfig.for_model(model, epochs=[1], batch_size=8, seed=seed)
        _, checkpoint = finetune(cfg, blob_dataset)
        return checkpoint.history[0]["train_loss"]

    assert first_loss(7) == first_loss(7)
    assert first_loss(7) != first_loss(8)


def test_evaluate_epoch_is_deterministic(blob_dataset: TensorDataset):
    model = build_detector("genconvit_vae", "desk", seed=1)
    model.train()
    first = evaluate_epoch(model, blob_dataset, batch_size=8)
    second = evaluate_epoch(model, blob_dataset, batch_size=8)
    assert first == second
    assert model.training


def test_evaluate_epoch_rejects_empty_set():
    empty = TensorDataset(torch.zeros(0, 3, 64, 64), torch.zeros(0))
    with pytest.raises(EmptyInputError):
        evaluate_epoch(build_detector("meso4", "desk", seed=0), empty)


def test_checkpoint_round_trip_is_bitwise(tmp_path: Path, blob_dataset: TensorDataset):
    cfg = TrainConfig.for_model("meso4", epochs=[1], batch_size=8)
    model, checkpoint = finetune(cfg, blob_dataset)
    repository = CheckpointRepository(tmp_path)
    repository.save(checkpoint, "meso4.ckpt")

    restored = restore_detector(repository.load("meso4.ckpt"))
    images = blob_dataset.tensors[0][:8]
    with torch.no_grad():
        assert torch.equal(model(images).logits, restored(images).logits)


def test_truncated_checkpoint_is_corrupt(tmp_path: Path):
    model = build_detector("meso4", "desk", seed=0)
    repository = CheckpointRepository(tmp_path)
    path = repository.save(snapshot(model, TrainConfig(model="meso4"), None, 0, []), "m.ckpt")
    path.write_bytes(path.read_bytes()[:-100])
    with pytest.raises(CorruptCheckpointError):
        repository.load("m.ckpt")

    path.write_bytes(b"garbage")
    with pytest.raises(CorruptCheckpointError):
        repository.load("m.ckpt")


def test_future_checkpoint_version_is_rejected(tmp_path: Path):
    model = build_detector("meso4", "desk", seed=0)
    checkpoint = Checkpoint(
        model_name="meso4",
        preset="desk",
        config=model.config_echo(),
        state_dict=model.state_dict(),
        format_version=2,
    )
    repository = CheckpointRepository(tmp_path)
    repository.save(checkpoint, "v2.ckpt")
    with pytest.raises(CheckpointVersionError):
        repository.load("v2.ckpt")


def test_weight_file_accepts_plain_state_dict(tmp_path: Path):
    model = build_detector("meso4", "desk", seed=0)
    torch.save(model.state_dict(), tmp_path / "plain.pt")
    weights = CheckpointRepository(tmp_path).load_weight_file("plain.pt")
    assert set(weights) == set(model.state_dict())


def test_divergence_stops_with_last_good_checkpoint(blob_dataset: TensorDataset):
    cfg = TrainConfig.for_model("meso4", epochs=[3], divergence_threshold=1e-9)
    with pytest.raises(TrainingDivergedError) as error:
        finetune(cfg, blob_dataset)
    assert error.value.last_good_checkpoint.epoch == 0


def test_non_finite_loss_diverges():
    images = torch.full((4, 3, 64, 64), float("nan"))
    dataset = TensorDataset(images, torch.tensor([0.0, 1.0, 0.0, 1.0]))
    with pytest.raises(TrainingDivergedError):
        finetune(TrainConfig.for_model("meso4", epochs=[1]), dataset)


def test_epoch_sweep_writes_log_and_checkpoints(tmp_path: Path, blob_dataset: TensorDataset):
    images, labels = blob_images(8, 64, seed=3)
    val_set = TensorDataset(images, labels)
    log_path = tmp_path / "meso4_epochs.jsonl"
    cfg = TrainConfig.for_model("meso4", epochs=[1, 2], batch_size=8, checkpoint_out=tmp_path)
    _, checkpoint = finetune(cfg, blob_dataset, val_set, log_path=log_path)

    records = ReportRepository(tmp_path).read_epochs(log_path.name)
    assert [r.epoch for r in records] == [1, 2]
    assert all(r.val_acc is not None for r in records)
    for epoch in (1, 2):
        assert (tmp_path / checkpoint_name("meso4", epoch)).is_file()
    assert len(checkpoint.history) == 2


def test_resume_continues_the_same_run(tmp_path: Path, blob_dataset: TensorDataset):
    straight, _ = finetune(TrainConfig.for_model("meso4", epochs=[2], batch_size=8), blob_dataset)

    first = TrainConfig.for_model("meso4", epochs=[1], batch_size=8, checkpoint_out=tmp_path)
    finetune(first, blob_dataset)
    resume = TrainConfig.for_model(
        "meso4", epochs=[2], batch_size=8, checkpoint_in=tmp_path / checkpoint_name("meso4", 1)
    )
    resumed, checkpoint = finetune(resume, blob_dataset)

    assert checkpoint.epoch == 2
    assert len(checkpoint.history) == 2
    images = blob_dataset.tensors[0][:8]
    with torch.no_grad():
        assert torch.allclose(straight(images).logits, resumed(images).logits, atol=1e-6)
