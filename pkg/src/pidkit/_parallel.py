from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def pmap(fn, items, threads: int = 1):
    """Ordered map, threaded when ``threads > 1``."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))
