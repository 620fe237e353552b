"""Order-preserving parallel map used by threshold sweeps and Monte Carlo."""
import os
from concurrent.futures import ProcessPoolExecutor

JOBS_ENV = "L1ROBUST_JOBS"


def default_jobs():
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items, jobs=None):
    """``list(map(fn, items))``, optionally over a process pool.

    The output order always follows ``items``; ``fn`` must be picklable
    when ``jobs > 1``.
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
