"""Order-preserving parallel map, capped by the ``BT_THREADS`` env var."""

import os
from concurrent.futures import ThreadPoolExecutor


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("BT_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``[fn(x) for x in items]``, possibly on worker threads.

    Results always come back in input order, so any reduction over them is
    independent of the thread count.
    """
    items = list(items)
    threads = min(n_threads(), len(items))
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
