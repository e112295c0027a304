"""Block-partitioned random streams whose results do not depend on worker count."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

import numpy as np

T = TypeVar("T")

BLOCK_SIZE = 1 << 15


def worker_count(workers: Optional[int] = None) -> int:
    """Explicit argument, else ``GAM_THREADS``, else the CPU count."""
    if workers is None:
        env = os.environ.get("GAM_THREADS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def block_rng(seed: int, block_id: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by ``(seed, block_id)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block_id),))
    return np.random.Generator(np.random.Philox(ss))


def block_sizes(total: int, block_size: int = BLOCK_SIZE) -> List[int]:
    full, rest = divmod(int(total), int(block_size))
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(total: int, seed: int, fn: Callable[[np.random.Generator, int], T],
               block_size: int = BLOCK_SIZE, workers: Optional[int] = None) -> List[T]:
    """Call ``fn(rng, size)`` once per block and return results in block order."""
    sizes = block_sizes(total, block_size)
    jobs = [(block_rng(seed, b), n) for b, n in enumerate(sizes)]
    nw = min(worker_count(workers), max(1, len(jobs)))
    if nw == 1:
        return [fn(rng, n) for rng, n in jobs]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
