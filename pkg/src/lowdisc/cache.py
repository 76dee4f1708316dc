"""On-disk cache of LowReport JSON keyed by discriminant and config hash.

Reports are stored in <base_dir>/d{D}_{hash12}.json exactly as emitted, so a
hit returns the original bytes. Metadata lives in <base_dir>/index.json.
"""

import json
import logging
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config_defaults import CACHE_DIR_ENV
from .discriminant import FundamentalDiscriminant
from .models import RunConfig

logger = logging.getLogger(__name__)

HASH_PREFIX = 12


def default_cache_dir() -> Path:
    """$LOWDISC_CACHE_DIR if set, else ~/.lowdisc/cache."""
    env = os.environ.get(CACHE_DIR_ENV)
    return Path(env) if env else Path.home() / ".lowdisc" / "cache"


class ResultCache:
    """Directory of cached reports.

    Attributes:
        base_dir: Cache directory
        index_file: Path to index.json metadata
    """

    def __init__(self, base_dir: Optional[Union[str, Path]] = None):
        self.base_dir = Path(base_dir) if base_dir else default_cache_dir()
        self.index_file = self.base_dir / "index.json"
        self._index: Dict[str, Any] = {}
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self._load_index()

    def _load_index(self) -> None:
        if self.index_file.exists():
            try:
                with open(self.index_file, 'r', encoding='utf-8') as f:
                    self._index = json.load(f)
            except (json.JSONDecodeError, IOError):
                logger.warning("cache index %s is unreadable; starting a new one", self.index_file)
                self._index = {}
        self._index.setdefault("entries", {})

    def _save_index(self) -> None:
        self._atomic_write(self.index_file, json.dumps(self._index, indent=2, sort_keys=True))

    def _atomic_write(self, path: Path, text: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.base_dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, 'w', encoding='utf-8') as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def entry_name(self, disc: Union[int, FundamentalDiscriminant], config: RunConfig) -> str:
        """File stem for a discriminant and configuration."""
        d = abs(int(disc.neg_d if isinstance(disc, FundamentalDiscriminant) else disc))
        name = f"d{d}_{config.config_hash()[:HASH_PREFIX]}"
        # Sanitize like any user-influenced file name
        return "".join(c for c in name if c.isalnum() or c in "_-").lower()

    def _path(self, name: str) -> Path:
        return self.base_dir / f"{name}.json"

    def get(self, disc: Union[int, FundamentalDiscriminant], config: RunConfig) -> Optional[str]:
        """Stored report text, or None on a miss."""
        name = self.entry_name(disc, config)
        path = self._path(name)
        if not path.exists():
            logger.info("cache miss for %s", name)
            return None
        logger.info("cache hit for %s", name)
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return f.read()

    def put(self, disc: Union[int, FundamentalDiscriminant], config: RunConfig, text: str) -> Path:
        """Store report text atomically and record it in the index."""
        name = self.entry_name(disc, config)
        path = self._path(name)
        self._atomic_write(path, text)
        self._index["entries"][name] = {
            "disc": int(disc.neg_d if isinstance(disc, FundamentalDiscriminant) else disc),
            "hash": config.config_hash(),
            "lastModified": datetime.now().isoformat(),
        }
        self._save_index()
        logger.debug("cached %s", path)
        return path

    def list_entries(self) -> List[Dict[str, Any]]:
        """Cached entries with metadata, sorted by name."""
        entries = []
        for path in sorted(self.base_dir.glob("d*.json")):
            name = path.stem
            meta = self._index["entries"].get(name, {})
            entries.append({
                "name": name,
                "disc": meta.get("disc"),
                "hash": meta.get("hash"),
                "lastModified": meta.get("lastModified",
                                         datetime.fromtimestamp(path.stat().st_mtime).isoformat()),
            })
        return entries

    def clear(self) -> int:
        """Delete every cached report; returns how many were removed."""
        removed = 0
        for path in self.base_dir.glob("d*.json"):
            path.unlink()
            removed += 1
        self._index = {"entries": {}}
        self._save_index()
        logger.info("cleared %d cached reports from %s", removed, self.base_dir)
        return removed
