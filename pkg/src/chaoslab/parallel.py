"""Ordered chunked map over sample indices.

Work is split into contiguous index ranges and the pieces are concatenated
in index order, so results do not depend on the number of workers as long
as each item is a pure function of its index.  Kernels are compiled with
``nogil=True``, so threads give real concurrency under numba.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_WORKERS = "CHAOSLAB_WORKERS"


def default_workers():
    env = os.environ.get(ENV_WORKERS)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def chunk_bounds(count, workers, min_chunk=1):
    """Contiguous [lo, hi) ranges covering range(count)."""
    workers = max(1, int(workers))
    pieces = max(1, min(workers * 4, count // max(1, min_chunk)))
    edges = np.linspace(0, count, pieces + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def map_ordered(func, count, workers=None, min_chunk=64):
    """Evaluate ``func(lo, hi)`` over chunks and concatenate along axis 0.

    ``func`` returns an array (or tuple of arrays) whose first axis has
    length hi - lo.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if count == 0:
        return func(0, 0)
    bounds = chunk_bounds(count, workers, min_chunk)
    if workers == 1 or len(bounds) == 1:
        parts = [func(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: func(*b), bounds))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[k] for p in parts]) for k in range(len(parts[0])))
    return np.concatenate(parts)
