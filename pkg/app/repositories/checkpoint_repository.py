import hashlib
import io
import logging
from pathlib import Path

import torch

from modules.training import CHECKPOINT_FORMAT_VERSION, Checkpoint
from repositories.base_repository import BaseRepository
from shared.exceptions import CheckpointVersionError, CorruptCheckpointError

__log__ = logging.getLogger(__name__)

MAGIC = b"DFBCKPT\x00"
DIGEST_LENGTH = 64
PAYLOAD_KEYS = (
    "format_version",
    "model_name",
    "preset",
    "config",
    "state_dict",
    "optimizer_state",
    "epoch",
    "history",
)


def _unpack(data: bytes, path: Path) -> dict:
    head = len(MAGIC) + DIGEST_LENGTH
    if len(data) < head or data[: len(MAGIC)] != MAGIC:
        raise CorruptCheckpointError(f"{path}: not a checkpoint file")
    digest = data[len(MAGIC) : head].decode("ascii", errors="replace")
    body = data[head:]
    if hashlib.sha256(body).hexdigest() != digest:
        raise CorruptCheckpointError(f"{path}: checksum mismatch, file is truncated or corrupt")
    try:
        payload = torch.load(io.BytesIO(body), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CorruptCheckpointError(f"{path}: cannot deserialize payload: {exc}") from exc
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CorruptCheckpointError(f"{path}: payload is not a checkpoint record")
    return payload


class CheckpointRepository(BaseRepository):
    """
    Checkpoint files: 8-byte magic, SHA-256 hex digest of the payload, then the
    torch-serialized payload.
    """

    def save(self, checkpoint: Checkpoint, name: str | Path) -> Path:
        payload = {key: getattr(checkpoint, key) for key in PAYLOAD_KEYS}
        buffer = io.BytesIO()
        torch.save(payload, buffer)
        body = buffer.getvalue()
        digest = hashlib.sha256(body).hexdigest().encode("ascii")
        path = self.save_bytes(name, MAGIC + digest + body)
        __log__.info("saved %s checkpoint (epoch %d) to %s", checkpoint.model_name, checkpoint.epoch, path)
        return path

    def load(self, name: str | Path) -> Checkpoint:
        path = self.resolve(name)
        payload = _unpack(path.read_bytes(), path)
        version = payload["format_version"]
        if version != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointVersionError(
                f"{path}: checkpoint format version {version} is not supported "
                f"(expected {CHECKPOINT_FORMAT_VERSION})"
            )
        missing = [key for key in PAYLOAD_KEYS if key not in payload]
        if missing:
            raise CorruptCheckpointError(f"{path}: missing fields {missing}")
        return Checkpoint(**{key: payload[key] for key in PAYLOAD_KEYS})

    def load_weight_file(self, name: str | Path) -> dict[str, torch.Tensor]:
        """
        Reads external weights keyed by layer name: either a checkpoint written
        here or a plain ``torch.save``-d state dict
        """
        path = self.resolve(name)
        data = path.read_bytes()
        if data.startswith(MAGIC):
            return self.load(name).state_dict
        try:
            weights = torch.load(io.BytesIO(data), map_location="cpu", weights_only=True)
        except Exception as exc:
            raise CorruptCheckpointError(f"{path}: cannot read weight file: {exc}") from exc
        if not isinstance(weights, dict) or not all(
            isinstance(value, torch.Tensor) for value in weights.values()
        ):
            raise CorruptCheckpointError(f"{path}: expected a mapping of layer name to tensor")
        return weights
