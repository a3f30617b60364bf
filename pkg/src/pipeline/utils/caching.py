"""Content-addressed cache for pilot results."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)


class CacheManager:
    """JSON entries keyed by a hash of everything that determines them.

    Pilot specs and tunings are plain JSON, so a cache hit reproduces the
    floats bit for bit.
    """

    def __init__(self, cache_dir: Path) -> None:
        self.cache_dir = cache_dir
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def get_cache_key(self, stage_name: str, inputs: dict[str, Any]) -> str:
        input_str = json.dumps(inputs, sort_keys=True, default=str)
        digest = hashlib.md5(input_str.encode(), usedforsecurity=False).hexdigest()
        return f"{stage_name}_{digest}"

    def get(self, cache_key: str) -> dict[str, Any] | None:
        cache_file = self.cache_dir / f"{cache_key}.json"
        if not cache_file.exists():
            return None
        try:
            payload = json.loads(cache_file.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            logger.warning("dropping unreadable cache entry %s", cache_file.name)
            cache_file.unlink(missing_ok=True)
            return None
        return payload if isinstance(payload, dict) else None

    def set(self, cache_key: str, result: dict[str, Any]) -> None:
        cache_file = self.cache_dir / f"{cache_key}.json"
        try:
            cache_file.write_text(json.dumps(result, sort_keys=True), encoding="utf-8")
        except (OSError, TypeError, ValueError):
            logger.warning("could not cache %s", cache_key)

    def clear(self) -> None:
        for cache_file in self.cache_dir.glob("*.json"):
            cache_file.unlink()

    def get_cache_stats(self) -> dict[str, Any]:
        cache_files = list(self.cache_dir.glob("*.json"))
        total_size = sum(f.stat().st_size for f in cache_files)
        return {
            "cache_dir": str(self.cache_dir),
            "cached_items": len(cache_files),
            "total_size_bytes": total_size,
        }
