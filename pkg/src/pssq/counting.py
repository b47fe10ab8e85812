"""Exact counts of n <= N with floor(n^c) = s * (square).

Two independent oracles are provided:

* ``count_direct`` walks n and tests each value floor(n^c) (O(N) work);
* ``count_inverse`` walks m and asks whether the interval
  [(s m^2)^(1/c), (s m^2 + 1)^(1/c)) contains an integer (O(s^-1/2 N^(c/2))).

They share no code past the exact root primitive, which is what makes their
agreement meaningful.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

import numpy as np

from . import _kernels
from .arith import SquarefreeDecomposition, squarefree_mask, squarefree_part
from .errors import MeaninglessRange, ResourceLimit, ValidationError
from .exact_power import CExponent, as_cexponent, interval_contains_integer, power_floor
from .sequence import power_floor_values, squarefree_part_values

__all__ = [
    "CountResult", "SquarefreeDecomposition", "count_direct", "count_inverse",
    "count_inverse_batch", "count_inverse_reference", "count_dyadic",
    "count_averaged", "count_averaged_double_loop", "squarefree_part",
    "distinct_squarefree_parts", "trivial_bound", "within_trivial_bound",
]

DIRECT_SCAN_CEILING = 10**8
DIRECT_CHUNK = 1 << 16
INVERSE_CHUNK = 1 << 20
# relative error budget for the float pre-filter in count_inverse
INVERSE_REL_TOL = 2.0 ** -36


@dataclass
class CountResult:
    c: CExponent
    s: int
    N: int
    value: int
    oracle: str
    elapsed_ms: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not 0 <= self.value <= self.N:
            raise ValidationError(f"count {self.value} outside [0, {self.N}]")

    def to_record(self, timing: bool = True) -> dict:
        rec = {"c": self.c.label, "s": self.s, "N": self.N, "value": self.value,
               "oracle": self.oracle}
        if timing:
            rec["elapsed_ms"] = self.elapsed_ms
        return rec


def _check(s: int, N: int):
    if s < 1:
        raise ValidationError("s must be >= 1")
    if N < 1:
        raise ValidationError("N must be >= 1")


def _isqrt_array(w: np.ndarray) -> np.ndarray:
    r = np.sqrt(w.astype(np.float64)).astype(np.int64)
    for _ in range(2):
        r -= (r * r > w)
        r += ((r + 1) * (r + 1) <= w)
    return r


def _count_s_squares(values: np.ndarray, s: int) -> int:
    if values.dtype == object:
        hits = 0
        for v in values:
            if v % s == 0:
                w = v // s
                t = math.isqrt(w)
                hits += t * t == w
        return hits
    w = values[values % s == 0] // s
    return int(np.count_nonzero(_isqrt_array(w) ** 2 == w))


def _chunks(lo: int, hi: int, size: int):
    """Fixed, worker-independent partition of lo..hi (inclusive)."""
    a = lo
    while a <= hi:
        b = min(hi, a + size - 1)
        yield a, b
        a = b + 1


def _parallel_sum(fn, parts, workers: int) -> int:
    parts = list(parts)
    if workers <= 1 or len(parts) <= 1:
        return sum(fn(*p) for p in parts)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(lambda p: fn(*p), parts))


def _direct_range(c: CExponent, s: int, lo: int, hi: int, workers: int) -> int:
    def block(a, b):
        return _count_s_squares(power_floor_values(c, a, b), s)
    return _parallel_sum(block, _chunks(lo, hi, DIRECT_CHUNK), workers)


def count_direct(c, s: int, N: int, *, workers: int = 1,
                 ceiling: int = DIRECT_SCAN_CEILING) -> CountResult:
    """Q_c(s; N) by scanning every n <= N."""
    c = as_cexponent(c)
    _check(s, N)
    if N > ceiling:
        raise ResourceLimit(f"N = {N} exceeds the direct-scan ceiling {ceiling}; "
                            "use count_inverse")
    t0 = time.perf_counter()
    value = _direct_range(c, s, 1, N, workers)
    return CountResult(c, s, N, value, "direct", (time.perf_counter() - t0) * 1e3)


def count_dyadic(c, s: int, N: int, *, workers: int = 1,
                 ceiling: int = DIRECT_SCAN_CEILING) -> CountResult:
    """Q*_c(s; N): solutions with N/2 < n <= N."""
    c = as_cexponent(c)
    _check(s, N)
    if N < 2:
        raise ValidationError("count_dyadic needs N >= 2")
    if N > ceiling:
        raise ResourceLimit(f"N = {N} exceeds the direct-scan ceiling {ceiling}")
    t0 = time.perf_counter()
    value = _direct_range(c, s, N // 2 + 1, N, workers)
    return CountResult(c, s, N, value, "dyadic", (time.perf_counter() - t0) * 1e3)


def count_inverse_reference(c, s: int, N: int) -> int:
    """Plain m-loop with an exact interval test for every m (slow; test oracle)."""
    c = as_cexponent(c)
    _check(s, N)
    top = power_floor(N, c)
    hits = 0
    m = 1
    while s * m * m <= top:
        n = interval_contains_integer(s * m * m, c)
        if n is not None and n <= N:
            hits += 1
        m += 1
    return hits


def _inverse_block(c: CExponent, s_list: List[int], m_max: Dict[int, int],
                   N: int, a: int, b: int) -> Dict[int, int]:
    gamma = c.q / c.p
    count = b - a + 1
    base = np.empty(count, dtype=np.float64)
    flagged = np.empty(count, dtype=np.int64)
    _kernels.monomial_base(a, count, 2.0 * gamma, base)
    out = {}
    for s in s_list:
        if m_max[s] < a:
            out[s] = 0
            continue
        n_s = min(count, m_max[s] - a + 1)
        k = _kernels.inverse_scan(base, a, n_s, float(s) ** gamma, gamma, float(s),
                                  INVERSE_REL_TOL, flagged)
        hits = 0
        for m in flagged[:k].tolist():
            n = interval_contains_integer(s * m * m, c)
            if n is not None and n <= N:
                hits += 1
        out[s] = hits
    return out


def count_inverse_batch(c, s_values: Iterable[int], N: int, *,
                        workers: int = 1) -> Dict[int, int]:
    """Inverse-oracle counts for several s at once (shares the m^(2/c) table).

    Each m is first screened in floating point; the screen only discards m
    whose interval provably misses every integer, and every other m is
    decided by the exact integer test.
    """
    c = as_cexponent(c)
    s_list = sorted(set(int(s) for s in s_values))
    for s in s_list:
        _check(s, N)
    if not c.exact:
        return {s: _inverse_approx(c, s, N) for s in s_list}
    top = power_floor(N, c)
    m_max = {s: math.isqrt(top // s) for s in s_list}
    hi = max(m_max.values(), default=0)
    totals = {s: 0 for s in s_list}
    parts = list(_chunks(1, hi, INVERSE_CHUNK))

    def run(part):
        return _inverse_block(c, s_list, m_max, N, *part)

    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, parts))
    else:
        results = [run(p) for p in parts]
    for res in results:
        for s, v in res.items():
            totals[s] += v
    return totals


def _inverse_approx(c: CExponent, s: int, N: int) -> int:
    top = power_floor(N, c)
    hits, m = 0, 1
    while s * m * m <= top:
        n = interval_contains_integer(s * m * m, c)
        if n is not None and n <= N:
            hits += 1
        m += 1
    return hits


def count_inverse(c, s: int, N: int, *, workers: int = 1) -> CountResult:
    """Q_c(s; N) by walking m with s m^2 <= N^c."""
    c = as_cexponent(c)
    _check(s, N)
    t0 = time.perf_counter()
    value = count_inverse_batch(c, [s], N, workers=workers)[s]
    return CountResult(c, s, N, value, "inverse", (time.perf_counter() - t0) * 1e3)


def count_averaged(c, S: int, N: int) -> CountResult:
    """Sum of Q_c(s; N) over square-free s <= S, in one pass over n <= N."""
    c = as_cexponent(c)
    _check(S, N)
    if S > power_floor(N, c):
        raise MeaninglessRange(f"S = {S} exceeds N^c; only S <= N^c is meaningful")
    t0 = time.perf_counter()
    parts = squarefree_part_values(c, 1, N)
    if parts.dtype == object:
        value = sum(1 for v in parts if v <= S)
    else:
        value = int(np.count_nonzero(parts <= S))
    return CountResult(c, S, N, value, "averaged", (time.perf_counter() - t0) * 1e3)


def count_averaged_double_loop(c, S: int, N: int) -> int:
    """Reference value for count_averaged via per-s inverse counts."""
    c = as_cexponent(c)
    mask = squarefree_mask(S)
    s_values = np.flatnonzero(mask).tolist()
    return sum(count_inverse_batch(c, s_values, N).values())


def distinct_squarefree_parts(c, N: int) -> int:
    """Number of distinct square-free parts among floor(n^c), n <= N."""
    c = as_cexponent(c)
    _check(1, N)
    parts = squarefree_part_values(c, 1, N)
    return len(set(parts.tolist())) if parts.dtype == object else int(np.unique(parts).size)


def trivial_bound(c, s: int, N: int) -> float:
    """min(N, s^(-1/2) N^(c/2))."""
    _check(s, N)
    cf = float(as_cexponent(c))
    return min(float(N), math.exp(0.5 * cf * math.log(N) - 0.5 * math.log(s)))


def within_trivial_bound(value: int, c, s: int, N: int) -> bool:
    """Exact check of value <= min(N, s^(-1/2) N^(c/2)).

    value <= s^(-1/2) N^(p/(2q))  <=>  (s value^2)^q <= N^p.
    """
    c = as_cexponent(c)
    if not c.exact:
        return value <= trivial_bound(c, s, N) * (1 + 1e-12)
    return value <= N and (s * value * value) ** c.q <= N ** c.p


def cached_count(cache, c, s: int, N: int, oracle: str = "inverse") -> CountResult:
    """Look up (c, s, N, oracle) in a ResultCache, computing and storing on a miss."""
    c = as_cexponent(c)
    key = f"count|c={c.label}|s={s}|N={N}|oracle={oracle}"
    hit = cache.get(key)
    if hit is not None:
        return CountResult(c, hit["s"], hit["N"], hit["value"], hit["oracle"],
                           hit.get("elapsed_ms", 0.0))
    fn = {"direct": count_direct, "inverse": count_inverse, "dyadic": count_dyadic,
          "averaged": count_averaged}[oracle]
    res = fn(c, s, N)
    cache.put(key, res.to_record())
    return res
