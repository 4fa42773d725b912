"""Counter-based random streams and order-preserving parallel maps.

Every random draw in the package comes from ``stream(seed, *keys)``: the
generator state is a hash of the seed and an integer key path (stream tag,
run index, block index, ...), so results never depend on how work is split
across workers.
"""

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

import numpy as np

# stream tags
DATA = 1
MC = 2
BOOT = 3
MCTP = 4

BLOCK_SIZE = 500
THREADS_ENV = "COVSTRUCT_THREADS"


def stream(seed, *keys):
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, workers=None, processes=False):
    """``list(map(fn, items))`` with optional threads or processes; order is kept."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    pool = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def blocked_draws(fn, total, seed, tag, workers=1, block=BLOCK_SIZE):
    """Concatenate ``fn(rng, n)`` over fixed-size blocks keyed by block index."""
    sizes = [min(block, total - s) for s in range(0, total, block)]

    def one(i):
        return fn(stream(seed, tag, i), sizes[i])

    parts = parallel_map(one, range(len(sizes)), workers=workers)
    return np.concatenate(parts) if parts else np.zeros(0)
