import json
import logging
from pathlib import Path

from pydantic import ValidationError

from modules.dataset import ManifestEntry, ManifestHeader
from repositories.base_repository import BaseRepository
from shared.exceptions import DuplicateSampleError, ManifestParseError

__log__ = logging.getLogger(__name__)

HEADER_KEY = "manifest"


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error["loc"])
    return f"{where}: {error['msg']}" if where else error["msg"]


class ManifestRepository(BaseRepository):
    """
    Line-delimited JSON manifest. The optional first line is a header record
    ``{"manifest": {...}}``; every other line is one ManifestEntry with the
    fields sample_id, frames, label, method, split in that order.
    """

    def __init__(self, path: Path):
        super().__init__(Path(path).parent)
        self.path = Path(path)

    def frame_root(self, header: ManifestHeader) -> Path:
        return self.resolve(header.root)

    def read(self) -> tuple[ManifestHeader, list[ManifestEntry]]:
        """
        Parses and validates the manifest
        :return: header (defaults when absent) and entries in file order
        """
        header = ManifestHeader()
        entries: list[ManifestEntry] = []
        seen: set[str] = set()
        with self.path.open(encoding="utf-8") as fh:
            for number, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ManifestParseError(number, f"invalid JSON: {exc.msg}") from exc
                if not isinstance(record, dict):
                    raise ManifestParseError(number, "expected a JSON object")
                try:
                    if HEADER_KEY in record:
                        if entries or number != 1:
                            raise ManifestParseError(number, "header must be the first record")
                        header = ManifestHeader.model_validate(record[HEADER_KEY])
                        continue
                    entry = ManifestEntry.model_validate(record)
                except ValidationError as exc:
                    raise ManifestParseError(number, _first_error(exc)) from exc
                if entry.sample_id in seen:
                    raise DuplicateSampleError(entry.sample_id)
                seen.add(entry.sample_id)
                entries.append(entry)
        __log__.debug("read %d entries from %s", len(entries), self.path)
        return header, entries

    def write(self, header: ManifestHeader, entries: list[ManifestEntry]) -> Path:
        lines = [json.dumps({HEADER_KEY: header.model_dump(mode="json")})]
        lines.extend(entry.model_dump_json() for entry in entries)
        path = self.save_text(self.path.name, "\n".join(lines) + "\n")
        __log__.info("wrote manifest with %d entries to %s", len(entries), path)
        return path


def load_manifest(path: Path) -> list[ManifestEntry]:
    return ManifestRepository(path).read()[1]


class AnonymizationMapRepository(BaseRepository):
    """Two-column ``token<TAB>original_id`` file."""

    def __init__(self, path: Path):
        super().__init__(Path(path).parent)
        self.path = Path(path)

    def write(self, mapping: dict[str, str]) -> Path:
        body = "".join(f"{token}\t{original}\n" for token, original in mapping.items())
        return self.save_text(self.path.name, body)

    def read(self) -> dict[str, str]:
        mapping = {}
        for number, raw in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
            if not raw:
                continue
            token, sep, original = raw.partition("\t")
            if not sep:
                raise ManifestParseError(number, "expected token<TAB>original_id")
            mapping[token] = original
        return mapping
