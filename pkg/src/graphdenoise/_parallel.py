"""Thread-pool helper.

Work items carry their own seeds and results are collected in input
order, so the worker count changes wall time only.  ``GD_THREADS``
caps the pool; unset or invalid values fall back to the CPU count
(at most 8).
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    raw = os.environ.get("GD_THREADS", "")
    try:
        w = int(raw)
    except ValueError:
        w = 0
    if w < 1:
        w = min(8, os.cpu_count() or 1)
    return w


def run_indexed(fn, args_list):
    """Apply ``fn(*args)`` across ``args_list``, preserving order."""
    if not args_list:
        return []
    w = min(worker_count(), len(args_list))
    if w == 1:
        return [fn(*args) for args in args_list]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(lambda args: fn(*args), args_list))
