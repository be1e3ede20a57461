"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set ``TEMPGEN_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the cross-implementation tests).
"""
import logging
import os

import numpy as np

from . import _kernels_py

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("TEMPGEN_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build environment
        log.debug("compiled kernels unavailable, using pure-Python fallback")

backend = _compiled if _compiled is not None else _kernels_py
BACKEND_NAME = "cython" if _compiled is not None else "python"


def get_backend(name: str | None = None):
    """Return a kernel module by name (``'cython'``, ``'python'`` or default)."""
    if name is None:
        return backend
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


class AliasCache:
    """Pool of alias tables keyed by adjacency position.

    A table for CSR position ``p`` covers the window of future edges that
    starts at ``p``; its contents depend only on ``p``, so eviction never
    changes sampled outputs. When the pool is full it is flushed wholesale.
    """

    def __init__(self, num_positions: int, budget: int = 1_000_000):
        self.offset = np.full(max(num_positions, 1), -1, dtype=np.int64)
        self.prob = np.zeros(budget, dtype=np.float64)
        self.alias = np.zeros(budget, dtype=np.int64)
        self.used = np.zeros(1, dtype=np.int64)
        self.flushes = np.zeros(1, dtype=np.int64)

    @property
    def entries(self) -> int:
        return int(self.used[0])

    @property
    def tables(self) -> int:
        return int((self.offset >= 0).sum())
