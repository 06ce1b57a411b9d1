"""
Thread-pool sweeps over parameter grids.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from solvegeo.config.settings import Config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def sweep(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """Apply fn to every item in parallel; results keep the input order"""
    items = list(items)
    workers = min(max_workers or Config.get_thread_count(), max(1, len(items)))
    if workers <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Sweeping {len(items)} items on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
