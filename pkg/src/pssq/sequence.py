"""Cached tables of floor(n^c) and of their square-free parts.

Tables are computed exactly (integer roots only), grown on demand, and
frozen once built; callers receive read-only views.
"""

from __future__ import annotations

import math
import threading
from typing import Dict, Tuple

import numpy as np

from .arith import squarefree_parts
from .exact_power import CExponent, as_cexponent, integer_kth_root, power_floor

TABLE_CACHE_MAX = 1 << 23
INT64_SAFE = 1 << 62

_lock = threading.RLock()
_power: Dict[Tuple[int, int], np.ndarray] = {}
_sqf: Dict[Tuple[int, int], np.ndarray] = {}


def _compute(c: CExponent, lo: int, hi: int) -> np.ndarray:
    if not c.exact:
        vals = [power_floor(n, c) for n in range(lo, hi + 1)]
    elif c.q == 2:
        p = c.p
        vals = [math.isqrt(n ** p) for n in range(lo, hi + 1)]
    else:
        p, q = c.p, c.q
        vals = [integer_kth_root(n ** p, q) for n in range(lo, hi + 1)]
    if vals and vals[-1] < INT64_SAFE:
        return np.array(vals, dtype=np.int64)
    return np.array(vals, dtype=object)


def _grow(store, key, n_needed, extend):
    cur = store.get(key)
    if cur is not None and cur.shape[0] >= n_needed:
        return cur
    with _lock:
        cur = store.get(key)
        have = 0 if cur is None else cur.shape[0]
        if have < n_needed:
            size = max(n_needed, min(TABLE_CACHE_MAX, 2 * have))
            new = extend(have, size)
            table = new if cur is None else np.concatenate([cur, new])
            if table.dtype != object and new.dtype == object:
                table = table.astype(object)
            table.setflags(write=False)
            store[key] = table
            cur = table
    return cur


def power_floor_values(c, lo: int, hi: int) -> np.ndarray:
    """floor(n^c) for lo <= n <= hi (1 <= lo), read-only."""
    c = as_cexponent(c)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    if not c.exact or hi > TABLE_CACHE_MAX:
        return _compute(c, lo, hi)
    table = _grow(_power, (c.p, c.q), hi,
                  lambda have, size: _compute(c, have + 1, size))
    return table[lo - 1:hi]


def squarefree_part_values(c, lo: int, hi: int) -> np.ndarray:
    """Square-free parts of floor(n^c) for lo <= n <= hi."""
    c = as_cexponent(c)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    if not c.exact or hi > TABLE_CACHE_MAX:
        return squarefree_parts(power_floor_values(c, lo, hi))

    def extend(have, size):
        return squarefree_parts(power_floor_values(c, have + 1, size))

    table = _grow(_sqf, (c.p, c.q), hi, extend)
    return table[lo - 1:hi]
