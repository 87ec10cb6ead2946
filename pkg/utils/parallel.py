import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from app import config

load_dotenv()

# smallest chunk handed to a worker
MIN_ROWS_PER_CHUNK = 256


def worker_count() -> int:
    """Threads allowed by CURVFLOW_THREADS (0 or unset = all cores)."""
    raw = os.getenv(config.THREADS_ENV, "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def map_rows(fn: Callable[..., Tuple[np.ndarray, ...]], *arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Apply a row-independent ``fn`` to contiguous row chunks and concatenate.

    Each output row depends only on the matching input rows, so the result is
    the same for every chunking and thread count.
    """
    rows = arrays[0].shape[0]
    workers = min(worker_count(), max(1, rows // MIN_ROWS_PER_CHUNK))
    if workers <= 1:
        return fn(*arrays)
    bounds = np.linspace(0, rows, workers + 1).astype(int)
    chunks: Sequence = [tuple(a[lo:hi] for a in arrays) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda args: fn(*args), chunks))
    return tuple(np.concatenate([p[k] for p in parts], axis=0) for k in range(len(parts[0])))
