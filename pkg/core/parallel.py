import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

logger = logging.getLogger(__name__)


def resolve_threads(threads=None):
    """Explicit value first, then the TDASUM_THREADS setting."""
    if threads is None:
        threads = getattr(settings, "TDASUM_THREADS", 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def parallel_map(fn, items, threads=None):
    """Map ``fn`` over ``items`` with at most ``threads`` workers.

    Results come back in input order.
    """
    items = list(items)
    threads = min(resolve_threads(threads), max(len(items), 1))
    if threads == 1:
        return [fn(item) for item in items]
    logger.debug("parallel_map: %d items on %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
