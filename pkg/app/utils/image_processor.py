from pathlib import Path

import albumentations as A
import cv2
import numpy as np
import torch

from modules.dataset import AugmentationConfig, TransformEnum
from shared.exceptions import ImageDecodeError, ShapeMismatchError


class ImageProcessor:
    @staticmethod
    def decode(source: str | Path | bytes) -> np.ndarray:
        """
        Decodes an image file or encoded bytes to an RGB uint8 array.

        Args:
            source (str | Path | bytes): image path or the raw file content.

        Returns:
            np.ndarray: (H, W, 3) RGB array.
        """
        if isinstance(source, bytes):
            image = cv2.imdecode(np.frombuffer(source, dtype=np.uint8), cv2.IMREAD_COLOR)
            where = "uploaded image"
        else:
            image = cv2.imread(str(source), cv2.IMREAD_COLOR)
            where = str(source)
        if image is None:
            raise ImageDecodeError(f"cannot decode {where}")
        return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)

    @staticmethod
    def resize_normalize(image: str | Path | bytes | np.ndarray, target: int) -> torch.Tensor:
        """
        Bilinear resize to ``target`` x ``target`` and scale to [0, 1].

        Args:
            image: path, encoded bytes or an (H, W, 3) RGB uint8 array.
            target (int): output side, pixels.

        Returns:
            torch.Tensor: (3, target, target) float32.
        """
        if not isinstance(image, np.ndarray):
            image = ImageProcessor.decode(image)
        if image.ndim != 3 or image.shape[2] != 3:
            raise ShapeMismatchError(f"expected an (H, W, 3) image, got {image.shape}")
        if image.shape[:2] != (target, target):
            image = cv2.resize(image, (target, target), interpolation=cv2.INTER_LINEAR)
        array = image.astype(np.float32) / 255.0
        return torch.from_numpy(np.ascontiguousarray(array.transpose(2, 0, 1))).clamp_(0.0, 1.0)

    @staticmethod
    def to_hwc(image: torch.Tensor) -> np.ndarray:
        return np.ascontiguousarray(image.detach().cpu().permute(1, 2, 0).numpy().astype(np.float32))

    @staticmethod
    def from_hwc(array: np.ndarray, like: torch.Tensor) -> torch.Tensor:
        chw = np.ascontiguousarray(np.clip(array, 0.0, 1.0).transpose(2, 0, 1))
        return torch.from_numpy(chw).to(dtype=like.dtype, device=like.device)


def build_transform(name: TransformEnum, cfg: AugmentationConfig) -> A.BasicTransform:
    """Albumentations transform for ``name`` with the configured magnitude, always applied."""
    name = TransformEnum(name)
    if name == TransformEnum.ROTATE:
        return A.Rotate(limit=cfg.rotate_limit, border_mode=cv2.BORDER_REFLECT_101, p=1.0)
    if name == TransformEnum.TRANSPOSE:
        return A.Transpose(p=1.0)
    if name == TransformEnum.HFLIP:
        return A.HorizontalFlip(p=1.0)
    if name == TransformEnum.VFLIP:
        return A.VerticalFlip(p=1.0)
    if name == TransformEnum.GAUSS_NOISE:
        return A.GaussNoise(std_range=(cfg.noise_std / 2, cfg.noise_std), p=1.0)
    if name == TransformEnum.SHIFT_SCALE_ROTATE:
        return A.Affine(
            translate_percent=(-cfg.shift_limit, cfg.shift_limit),
            scale=cfg.scale_range,
            rotate=(-cfg.rotate_limit, cfg.rotate_limit),
            border_mode=cv2.BORDER_REFLECT_101,
            p=1.0,
        )
    if name == TransformEnum.CLAHE:
        return A.CLAHE(clip_limit=cfg.clahe_clip, p=1.0)
    if name == TransformEnum.SHARPEN:
        return A.Sharpen(p=1.0)
    if name == TransformEnum.EMBOSS:
        return A.Emboss(p=1.0)
    if name == TransformEnum.BRIGHTNESS_CONTRAST:
        return A.RandomBrightnessContrast(
            brightness_limit=cfg.brightness_limit, contrast_limit=cfg.contrast_limit, p=1.0
        )
    return A.HueSaturationValue(
        hue_shift_limit=cfg.hue_shift, sat_shift_limit=20, val_shift_limit=10, p=1.0
    )


def plan_chain(cfg: AugmentationConfig, seed: int, square: bool = True) -> tuple[list[TransformEnum], int]:
    """
    Decides whether an image is altered and by which transforms
    :param seed: per-call seed, combined with ``cfg.seed``
    :param square: transpose is only eligible for square images
    :return: ordered transform chain (empty when the image stays untouched)
        and the seed of the albumentations pipeline
    """
    rng = np.random.default_rng([cfg.seed, seed])
    if rng.random() >= cfg.rate:
        return [], 0
    enabled = [t for t in cfg.transforms if square or t != TransformEnum.TRANSPOSE]
    if not enabled:
        return [], 0
    length = int(rng.integers(1, min(cfg.max_chain, len(enabled)) + 1))
    picked = rng.choice(len(enabled), size=length, replace=False)
    return [enabled[i] for i in picked], int(rng.integers(0, 2**31 - 1))


def apply_transform(
    image: torch.Tensor, name: TransformEnum, cfg: AugmentationConfig, seed: int = 0
) -> torch.Tensor:
    pipeline = A.Compose([build_transform(name, cfg)], seed=seed)
    out = pipeline(image=ImageProcessor.to_hwc(image))["image"]
    return ImageProcessor.from_hwc(out, image)


def augment(image: torch.Tensor, cfg: AugmentationConfig, seed: int) -> torch.Tensor:
    """
    With probability ``cfg.rate`` applies a chain of enabled transforms
    :param image: (3, H, W) in [0, 1]
    :param seed: per-call seed; equal seeds give equal outputs
    :return: image of the same shape, clipped to [0, 1]
    """
    if image.ndim != 3:
        raise ShapeMismatchError(f"expected a (C, H, W) image, got {tuple(image.shape)}")
    chain, pipeline_seed = plan_chain(cfg, seed, square=image.shape[1] == image.shape[2])
    if not chain:
        return image
    pipeline = A.Compose([build_transform(name, cfg) for name in chain], seed=pipeline_seed)
    out = pipeline(image=ImageProcessor.to_hwc(image))["image"]
    return ImageProcessor.from_hwc(out, image)
