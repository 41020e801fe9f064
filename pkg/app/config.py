from dataclasses import dataclass, field
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

from shared.exceptions import ConfigFileError


class RuntimeSettings(BaseSettings):
    seed: int = 0
    log_level: str = "INFO"
    device: str = "cpu"
    num_workers: int = 0

    model_config = SettingsConfigDict(
        env_prefix="dfbench_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


class ServeSettings(BaseSettings):
    host: str = "0.0.0.0"
    port: int = 8000
    checkpoint_dir: Path = Path("checkpoints")
    preset: str = "desk"
    max_loaded: int = 4

    model_config = SettingsConfigDict(
        env_prefix="serve_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


@dataclass
class Settings:
    runtime: RuntimeSettings = field(default_factory=RuntimeSettings)
    serve: ServeSettings = field(default_factory=ServeSettings)


settings = Settings()


def load_config_file(path: Path) -> dict[str, str]:
    """
    Reads a flat ``key = value`` config file
    :param path: path to the file
    :return: mapping with dashes in keys normalised to underscores
    """
    values: dict[str, str] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config file {path}: {exc}") from exc
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigFileError(f"{path}:{number}: expected 'key = value'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values
