"""Core LowdiscConfig class for configuration management.

LowdiscConfig holds plain JSON values (numbers as decimal strings) layered
over DEFAULTS; to_run_config() turns them into a validated RunConfig.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from .config_defaults import DEFAULTS
from .errors import ConfigurationError
from .models import RunConfig

logger = logging.getLogger(__name__)


class LowdiscConfig:
    """Configuration manager for lowdisc runs.

    Supports:
    - Loading/saving from JSON files
    - Merging file values onto defaults
    - Validation through RunConfig

    Attributes:
        config_file: Path to the configuration JSON file
        DEFAULTS: Class-level dictionary of default configuration values
    """

    DEFAULTS = DEFAULTS

    def __init__(self, config_file: Optional[Path] = None):
        """Initialize configuration.

        Args:
            config_file: Path to JSON config file. If None, uses ~/.lowdisc/config.json
        """
        self.config_file = Path(config_file) if config_file else Path.home() / ".lowdisc" / "config.json"
        self._config = copy.deepcopy(self.DEFAULTS)

        if self.config_file.exists():
            self.load()

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value.

        Args:
            key: Configuration key
            default: Default value if key not found or null

        Returns:
            Configuration value
        """
        value = self._config.get(key)
        return value if value is not None else default

    def set(self, key: str, value: Any) -> None:
        """Set configuration value.

        Raises:
            ConfigurationError: If key is not a known setting
        """
        if key not in self.DEFAULTS:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        self._config[key] = value

    def update(self, config_dict: Dict[str, Any]) -> None:
        """Update multiple configuration values; None values are skipped."""
        for key, value in config_dict.items():
            if value is not None:
                self.set(key, value)

    def reset_to_defaults(self) -> None:
        """Reset all configuration to default values."""
        self._config = copy.deepcopy(self.DEFAULTS)

    def load(self) -> None:
        """Load configuration from file, overlaying it on the defaults.

        Raises:
            ConfigurationError: If the file is not a JSON object or names unknown keys
        """
        if not self.config_file.exists():
            return
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            raise ConfigurationError(f"cannot read config file {self.config_file}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"config file {self.config_file} must hold a JSON object")
        unknown = sorted(set(loaded) - set(self.DEFAULTS))
        if unknown:
            raise ConfigurationError(f"unknown keys in {self.config_file}: {', '.join(unknown)}")
        self._config = copy.deepcopy(self.DEFAULTS)
        self._config.update(loaded)
        logger.debug("loaded configuration from %s", self.config_file)

    def save(self) -> None:
        """Save configuration to file."""
        self.config_file.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_file, 'w', encoding='utf-8') as f:
            json.dump(self._config, f, indent=2, sort_keys=True)

    def to_dict(self) -> Dict[str, Any]:
        """Export configuration as dictionary."""
        return self._config.copy()

    def to_json(self) -> str:
        """Export configuration as JSON string."""
        return json.dumps(self._config, indent=2, sort_keys=True)

    def to_run_config(self, **overrides: Any) -> RunConfig:
        """Validated RunConfig from these values with non-None overrides on top.

        Raises:
            ConfigurationError: If any value is out of range or malformed
        """
        values = self.to_dict()
        values.update({k: v for k, v in overrides.items() if v is not None})
        if overrides.get("zero_height") is not None and overrides.get("zero_count") is None:
            values["zero_count"] = None
        elif overrides.get("zero_count") is not None:
            values["zero_height"] = None
        try:
            return RunConfig(**values)
        except ValidationError as e:
            raise ConfigurationError(_first_error(e)) from e


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    message = err.get("msg", str(e))
    # ConfigurationError raised in a validator surfaces as "Value error, <message>".
    message = message.removeprefix("Value error, ")
    return f"{where}: {message}" if where else message
