"""Application configuration.

Config files are plain ``key = value`` lines; blank lines and # comments
are ignored. The API key itself never appears in a config file: the file
names the environment variable that holds it (``api_key_env``).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .llm import HttpChatProvider, MockProvider, Provider, ProviderConfig


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AppConfig:
    listen_addr: str = "127.0.0.1:8000"
    provider: str = "mock"  # "mock" | "http"
    endpoint: str = ""
    model_name: str = ""
    api_key_env: str = "LLM_API_KEY"
    temperature: float = 0.2
    timeout_s: float = 120.0
    transport_retries: int = 2
    max_iterations: int = 5
    store_dir: str = "sessions"
    cors_origins: tuple[str, ...] = ()
    mock_script: str = ""
    ui_dir: str = ""  # static frontend assets, served at / when set

    def __post_init__(self):
        if self.provider not in ("mock", "http"):
            raise ConfigError(f"provider must be 'mock' or 'http', "
                              f"got {self.provider!r}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        host, sep, port = self.listen_addr.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise ConfigError(f"listen_addr must look like host:port, "
                              f"got {self.listen_addr!r}")

    @property
    def host(self) -> str:
        return self.listen_addr.rpartition(":")[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rpartition(":")[2])


_FIELD_NAMES = {f.name for f in fields(AppConfig)}


def parse_config(text: str, source: str = "<config>") -> AppConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value, "
                              f"got {line!r}")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_NAMES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            if key in ("temperature", "timeout_s"):
                values[key] = float(value)
            elif key in ("transport_retries", "max_iterations"):
                values[key] = int(value)
            elif key == "cors_origins":
                values[key] = tuple(o.strip() for o in value.split(",")
                                    if o.strip())
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for "
                              f"{key}: {exc}") from exc
    try:
        return AppConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def build_provider(config: AppConfig) -> Provider:
    if config.provider == "mock":
        if not config.mock_script:
            raise ConfigError("provider = mock requires mock_script = "
                              "<path to a JSON list of scripted replies>")
        return MockProvider.from_file(config.mock_script)
    if not config.endpoint or not config.model_name:
        raise ConfigError("provider = http requires endpoint and model_name")
    return HttpChatProvider(ProviderConfig(
        endpoint=config.endpoint,
        model_name=config.model_name,
        api_key_env=config.api_key_env,
        temperature=config.temperature,
        timeout_s=config.timeout_s,
        transport_retries=config.transport_retries,
    ))
