import json
import os
import tempfile
from pathlib import Path


class BaseRepository:
    """File-backed repository rooted at a directory."""

    def __init__(self, root: Path):
        self.root = Path(root).resolve()

    def resolve(self, name: str | Path) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.root / path

    def save_bytes(self, name: str | Path, data: bytes) -> Path:
        """
        Writes ``data`` atomically: a temporary sibling is renamed over the target
        :param name: file name relative to the root, or an absolute path
        :return: final path
        """
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path

    def save_text(self, name: str | Path, text: str) -> Path:
        return self.save_bytes(name, text.encode("utf-8"))

    def save_lines(self, name: str | Path, records: list[dict]) -> Path:
        body = "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
        return self.save_text(name, body)

    def append_line(self, name: str | Path, record: dict) -> Path:
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        return path
