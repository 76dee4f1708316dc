"""Centralized configuration for lowdisc.

Precedence is command-line flag, then config file (~/.lowdisc/config.json
or --config PATH), then DEFAULTS. LOWDISC_CACHE_DIR only supplies the
default cache directory.

This module re-exports the public APIs of the internal config modules:
    - config_defaults: Default configuration values
    - config_core: LowdiscConfig class
    - cache: ResultCache class
"""

from pathlib import Path
from typing import Optional, Union

from .cache import ResultCache, default_cache_dir
from .config_core import LowdiscConfig
from .config_defaults import (
    CACHE_DIR_ENV,
    DEFAULTS,
    DEFAULT_EPS,
    DEFAULT_FLOW_M,
    DEFAULT_PRECISION,
    DEFAULT_TOL,
    DEFAULT_ZERO_COUNT,
)

# Global instances for singleton pattern
_global_config: Optional[LowdiscConfig] = None
_cache: Optional[ResultCache] = None


def get_config(config_file: Optional[Union[str, Path]] = None) -> LowdiscConfig:
    """Get the global configuration.

    Args:
        config_file: Load this file instead of the default one. A config set
            via set_config() is returned only when no file is requested.

    Returns:
        LowdiscConfig instance
    """
    global _global_config
    if config_file is not None:
        _global_config = LowdiscConfig(Path(config_file))
    elif _global_config is None:
        _global_config = LowdiscConfig()
    return _global_config


def set_config(config: LowdiscConfig) -> None:
    """Set global configuration instance (used by tests)."""
    global _global_config
    _global_config = config


def get_cache(base_dir: Optional[Union[str, Path]] = None) -> ResultCache:
    """Get the report cache for a directory.

    Args:
        base_dir: Cache directory; None uses the configured cache_dir, then
            $LOWDISC_CACHE_DIR, then ~/.lowdisc/cache

    Returns:
        ResultCache instance, reused while the directory is unchanged
    """
    global _cache
    target = Path(base_dir or get_config().get("cache_dir") or default_cache_dir())
    if _cache is None or _cache.base_dir != target:
        _cache = ResultCache(target)
    return _cache


def reset_config() -> None:
    """Drop the global config and cache (for testing)."""
    global _global_config, _cache
    _global_config = None
    _cache = None


__all__ = [
    # Classes
    'LowdiscConfig',
    'ResultCache',
    # Functions
    'get_config',
    'set_config',
    'reset_config',
    'get_cache',
    'default_cache_dir',
    # Default values
    'CACHE_DIR_ENV',
    'DEFAULTS',
    'DEFAULT_EPS',
    'DEFAULT_FLOW_M',
    'DEFAULT_PRECISION',
    'DEFAULT_TOL',
    'DEFAULT_ZERO_COUNT',
]
