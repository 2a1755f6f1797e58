"""
Map cache

In-process cache of converted road maps. Scenarios that share an .xodr file
reuse one ``OpenDriveMap`` instead of re-sampling the lanelet network; the
key is the SHA-256 of the map bytes plus the sampling settings.
"""

import hashlib
import logging
import threading
from collections import OrderedDict
from typing import Callable, Optional, Sequence, Tuple

logger = logging.getLogger("osc2cr.cache")

CacheKey = Tuple[str, float, Tuple[str, ...]]


class MapCache:
    """
    Bounded least-recently-used cache for parsed maps.

    Useful for: batch runs over scenario families that share a map.
    """

    def __init__(self, max_entries: int = 16):
        self.max_entries = max_entries
        self._entries: "OrderedDict[CacheKey, object]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(data: bytes, sampling_step: float, lane_types: Sequence[str]) -> CacheKey:
        """Stable key for map bytes and sampling settings"""
        return hashlib.sha256(data).hexdigest(), float(sampling_step), tuple(lane_types)

    def get(self, key: CacheKey) -> Optional[object]:
        with self._lock:
            value = self._entries.get(key)
            if value is None:
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return value

    def set(self, key: CacheKey, value: object) -> None:
        with self._lock:
            self._entries[key] = value
            self._entries.move_to_end(key)
            while len(self._entries) > self.max_entries:
                evicted, _ = self._entries.popitem(last=False)
                logger.debug(f"Evicted map {evicted[0][:12]} from cache")

    def get_or_build(self, key: CacheKey, build: Callable[[], object]) -> object:
        value = self.get(key)
        if value is None:
            value = build()
            self.set(key, value)
        else:
            logger.debug(f"Map cache hit for {key[0][:12]}")
        return value

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self.hits = self.misses = 0

    def __len__(self) -> int:
        return len(self._entries)


# Singleton instance for global usage
map_cache = MapCache()
