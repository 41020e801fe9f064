import logging
from pathlib import Path
from typing import AsyncGenerator

import cv2
import numpy as np
import pytest
import torch
from httpx import ASGITransport, AsyncClient
from torch.utils.data import TensorDataset

from config import settings
from dto import CorpusDTO
from main import app

__log__ = logging.getLogger(__name__)

FAKE_METHODS = ["facefusion_gan", "retalking", "wav2lip"]


def blob_images(n: int, size: int, seed: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Two separable classes on a mid-grey background: a bright centre blob
    (label 0, real) and a dark one (label 1, fake), with light noise
    :return: images (n, 3, size, size) in [0, 1] and float labels (n,)
    """
    generator = torch.Generator().manual_seed(seed)
    labels = torch.arange(n) % 2
    images = torch.full((n, 3, size, size), 0.5)
    lo, hi = size // 4, 3 * size // 4
    images[labels == 0, :, lo:hi, lo:hi] = 0.95
    images[labels == 1, :, lo:hi, lo:hi] = 0.05
    images += 0.02 * torch.randn(images.shape, generator=generator)
    return images.clamp(0.0, 1.0), labels.float()


def write_frame_corpus(
    root: Path, n_real: int, n_fake: int, frames_per_clip: int, size: int = 64, seed: int = 0
) -> CorpusDTO:
    """Writes real/<clip>/NNN.png and fake/<method>/<clip>/NNN.png frame folders."""
    rng = np.random.default_rng(seed)
    lo, hi = size // 4, 3 * size // 4

    def write_clip(folder: Path, value: int) -> None:
        folder.mkdir(parents=True)
        for index in range(frames_per_clip):
            frame = np.full((size, size, 3), 128, dtype=np.uint8)
            frame[lo:hi, lo:hi] = value
            noise = rng.integers(-6, 7, size=frame.shape)
            frame = np.clip(frame.astype(np.int64) + noise, 0, 255).astype(np.uint8)
            cv2.imwrite(str(folder / f"{index:03d}.png"), frame)

    for clip in range(n_real):
        write_clip(root / "real" / f"clip{clip:03d}", 240)
    for clip in range(n_fake):
        method = FAKE_METHODS[clip % len(FAKE_METHODS)]
        write_clip(root / "fake" / method / f"clip{clip:03d}", 15)
    methods = sorted({FAKE_METHODS[c % len(FAKE_METHODS)] for c in range(n_fake)})
    return CorpusDTO(root, n_real, n_fake, frames_per_clip, size, methods)


@pytest.fixture(scope="session")
async def ac() -> AsyncGenerator[AsyncClient, None]:
    async with AsyncClient(
        transport=ASGITransport(app=app), base_url="http://test"
    ) as ac:
        yield ac


@pytest.fixture
def blob_dataset() -> TensorDataset:
    images, labels = blob_images(32, 64)
    return TensorDataset(images, labels)


@pytest.fixture
def corpus(tmp_path: Path) -> CorpusDTO:
    return write_frame_corpus(tmp_path / "frames", n_real=20, n_fake=20, frames_per_clip=3)


@pytest.fixture
def checkpoint_dir(tmp_path: Path, monkeypatch) -> Path:
    directory = tmp_path / "checkpoints"
    directory.mkdir()
    monkeypatch.setattr(settings.serve, "checkpoint_dir", directory)
    return directory
