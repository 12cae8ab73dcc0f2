"""File-based cache for small computed results (dimensions, condition numbers)."""
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Optional, Tuple

logger = logging.getLogger(__name__)

DEFAULT_TTL_SECONDS = 86400


@dataclass
class CacheInfo:
    """Information about a cached result."""

    value: Any
    cached_at: datetime
    expires_at: datetime
    ttl_seconds: int

    @property
    def age_seconds(self) -> float:
        return (datetime.now() - self.cached_at).total_seconds()

    def format_age(self) -> str:
        """Format cache age as human-readable string."""
        age = self.age_seconds
        if age < 60:
            return f"{int(age)} seconds ago"
        elif age < 3600:
            return f"{int(age / 60)} minutes ago"
        elif age < 86400:
            return f"{int(age / 3600)} hours ago"
        else:
            return f"{int(age / 86400)} days ago"

    def format_feedback(self) -> str:
        return f"[Cached {self.format_age()}]"


def make_key(geometry_content: bytes, command: str, params: dict[str, Any]) -> str:
    """SHA-256 over the geometry file content, the command name and sorted parameters."""
    digest = hashlib.sha256()
    digest.update(geometry_content)
    digest.update(command.encode())
    digest.update(json.dumps(params, sort_keys=True, default=str).encode())
    return digest.hexdigest()


class Cache:
    """JSON files keyed by content hashes, with expiration."""

    def __init__(self, cache_dir: Optional[str] = None, default_ttl: Optional[int] = None):
        """
        Args:
            cache_dir: Directory for cache files (env ASG1_CACHE_DIR, default "cache")
            default_ttl: Time-to-live in seconds (env ASG1_CACHE_TTL, default one day)
        """
        self.cache_dir = Path(cache_dir or os.getenv("ASG1_CACHE_DIR", "cache"))
        self.enabled = True
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.warning("Cache disabled, cannot create %s: %s", self.cache_dir, e)
            self.enabled = False
        if default_ttl is None:
            default_ttl = int(os.getenv("ASG1_CACHE_TTL", str(DEFAULT_TTL_SECONDS)))
        self.default_ttl = default_ttl

    def _get_cache_path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def get_with_info(
        self, key: str, force_refresh: bool = False
    ) -> Tuple[Optional[Any], Optional[CacheInfo]]:
        """
        Retrieve a value with its metadata.

        Returns:
            (value, CacheInfo), or (None, None) when missing, expired or bypassed
        """
        if force_refresh or not self.enabled:
            return None, None

        cache_path = self._get_cache_path(key)
        if not cache_path.exists():
            return None, None

        try:
            with open(cache_path, "r") as f:
                cache_data = json.load(f)

            expires_at = datetime.fromisoformat(cache_data["expires_at"])
            created_at = datetime.fromisoformat(cache_data["created_at"])
            if datetime.now() > expires_at:
                cache_path.unlink()
                return None, None

            info = CacheInfo(
                value=cache_data["value"],
                cached_at=created_at,
                expires_at=expires_at,
                ttl_seconds=int((expires_at - created_at).total_seconds()),
            )
            return cache_data["value"], info
        except (json.JSONDecodeError, KeyError, ValueError):
            logger.warning("Dropping unreadable cache file %s", cache_path)
            cache_path.unlink(missing_ok=True)
            return None, None

    def get(self, key: str, force_refresh: bool = False) -> Optional[Any]:
        value, _ = self.get_with_info(key, force_refresh)
        return value

    def get_cache_status(self, key: str) -> str:
        """'hit', 'miss' or 'expired' without touching the entry."""
        if not self.enabled:
            return "miss"
        cache_path = self._get_cache_path(key)
        if not cache_path.exists():
            return "miss"
        try:
            with open(cache_path, "r") as f:
                cache_data = json.load(f)
            if datetime.now() > datetime.fromisoformat(cache_data["expires_at"]):
                return "expired"
            return "hit"
        except (json.JSONDecodeError, KeyError, ValueError):
            return "miss"

    def set(self, key: str, value: Any, ttl: Optional[int] = None) -> None:
        """Store a JSON-serializable value."""
        if not self.enabled:
            return
        if ttl is None:
            ttl = self.default_ttl
        now = datetime.now()
        cache_data = {
            "value": value,
            "expires_at": (now + timedelta(seconds=ttl)).isoformat(),
            "created_at": now.isoformat(),
        }
        try:
            with open(self._get_cache_path(key), "w") as f:
                json.dump(cache_data, f, indent=2)
        except OSError as e:
            logger.warning("Could not write cache entry %s: %s", key, e)

    def clear(self) -> int:
        """Remove all entries; returns the number removed."""
        if not self.enabled:
            return 0
        removed = 0
        for cache_file in self.cache_dir.glob("*.json"):
            cache_file.unlink()
            removed += 1
        return removed
