"""Order-preserving process-pool map."""
import os
from concurrent.futures import ProcessPoolExecutor


def default_workers():
    return os.cpu_count() or 1


def parallel_map(fn, items, workers=None):
    """``[fn(x) for x in items]`` spread over ``workers`` processes.

    Results come back in input order whatever the scheduling, so outputs
    never depend on the worker count.
    """
    items = list(items)
    workers = default_workers() if workers in (None, 0) else int(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
