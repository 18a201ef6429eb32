"""
Reading and writing converter configuration files (flat YAML).
"""
import logging
from pathlib import Path
from typing import Any, Mapping, Union

import yaml
from pydantic import ValidationError

from fsikit.core.exceptions import ConfigError
from fsikit.schemas.converter import ConverterConfig

logger = logging.getLogger(__name__)


class ConfigService:
    """Parse, validate and emit converter configs."""

    @staticmethod
    def parse_config(data: Mapping[str, Any]) -> ConverterConfig:
        """
        Validate a flat mapping into a ConverterConfig.

        Raises:
            ConfigError: With one message per failing field
        """
        if not isinstance(data, Mapping):
            raise ConfigError("Configuration must be a flat mapping of keys to values")
        try:
            return ConverterConfig.model_validate(dict(data))
        except ValidationError as exc:
            messages = []
            for err in exc.errors():
                loc = ".".join(str(part) for part in err["loc"]) or "config"
                messages.append(f"{loc}: {err['msg']}")
            first = exc.errors()[0]["loc"]
            raise ConfigError(
                "Invalid configuration: " + "; ".join(messages),
                field=str(first[0]) if first else None,
                errors=messages,
            ) from exc

    @staticmethod
    def parse_text(text: str) -> ConverterConfig:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"Malformed YAML: {exc}") from exc
        return ConfigService.parse_config(data if data is not None else {})

    @staticmethod
    def load_config(path: Union[str, Path]) -> ConverterConfig:
        """Read and validate a YAML config file."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"Cannot read {path}: {exc.strerror}") from exc
        logger.info("Loaded configuration %s", path)
        return ConfigService.parse_text(text)

    @staticmethod
    def emit_config(cfg: ConverterConfig) -> str:
        """YAML text that parses back to an equal config."""
        data = cfg.model_dump(mode="json", exclude_none=True)
        return yaml.safe_dump(data, sort_keys=False)
