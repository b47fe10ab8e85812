"""Prime sieves, factorisation, square-free parts and the Moebius function.

Tables built here are cached module-wide and marked read-only, so they can be
shared between worker threads without copying.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from . import _kernels
from .errors import FactorizationLimit, ResourceLimit, ValidationError
from .exact_power import integer_kth_root

SIEVE_LIMIT = 10**7
SEGMENTED_SIEVE_CEILING = 10**11
RHO_ITERATION_CAP = 2_000_000
_SEGMENT = 1 << 20

_lock = threading.Lock()
_spf = np.zeros(0, dtype=np.int32)


# ---------------------------------------------------------------------------
# sieves

def primes_upto(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(n + 1, dtype=bool)
    mark[:2] = False
    mark[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if mark[p]:
            mark[p * p::2 * p] = False
    return np.flatnonzero(mark).astype(np.int64)


@lru_cache(maxsize=8)
def _cached_primes(bound_pow2: int) -> np.ndarray:
    out = primes_upto(bound_pow2)
    out.setflags(write=False)
    return out


def prime_table(bound: int) -> np.ndarray:
    """Read-only primes <= at least ``bound`` (rounded up to a power of two)."""
    return _cached_primes(1 << max(4, int(bound).bit_length()))


def primes_in_range(lo: int, hi: int, ceiling: int = SEGMENTED_SIEVE_CEILING) -> List[int]:
    """Primes p with lo < p <= hi via a segmented sieve."""
    if hi > ceiling:
        raise ResourceLimit(f"upper end {hi} exceeds sieve ceiling {ceiling}")
    if hi <= lo or hi < 2:
        return []
    base = primes_upto(math.isqrt(hi))
    out: List[int] = []
    start = lo + 1
    while start <= hi:
        stop = min(hi, start + _SEGMENT - 1)
        mark = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, -(-start // p) * p)
            mark[first - start::p] = False
        idx = np.flatnonzero(mark) + start
        out.extend(int(v) for v in idx if v >= 2)
        start = stop + 1
    return out


def squarefree_mask(n: int) -> np.ndarray:
    """mask[k] is True iff k is square-free (mask[0] is False)."""
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    for p in primes_upto(math.isqrt(n)):
        p2 = int(p) * int(p)
        mask[p2::p2] = False
    return mask


def mobius_table(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_upto(n):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= n:
            mu[p * p::p * p] = 0
    return mu


def _build_spf(size: int) -> np.ndarray:
    spf = np.zeros(size, dtype=np.int32)
    for p in range(2, math.isqrt(size - 1) + 1):
        if spf[p] == 0:
            seg = spf[p * p::p]
            seg[seg == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf.setflags(write=False)
    return spf


def spf_table(n: int, limit: int = SIEVE_LIMIT) -> np.ndarray:
    """Smallest-prime-factor table covering at least 0..n (n <= limit)."""
    global _spf
    if n > limit:
        raise ResourceLimit(f"{n} exceeds the sieve limit {limit}")
    if _spf.shape[0] <= n:
        with _lock:
            if _spf.shape[0] <= n:
                size = min(limit + 1, max(1 << 16, 1 << (n.bit_length() + 1)))
                _spf = _build_spf(size)
    return _spf


# ---------------------------------------------------------------------------
# primality and Pollard rho

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_EXTRA = (43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
_MR_DETERMINISTIC_BOUND = 3317044064679887385961981


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, extra fixed bases above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    bases = _MR_BASES if n < _MR_DETERMINISTIC_BOUND else _MR_BASES + _MR_EXTRA
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, cap: int) -> int:
    """A non-trivial factor of composite n (Brent's variant, fixed seeds)."""
    if n % 2 == 0:
        return 2
    spent = 0
    for c in range(1, 64):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            spent += r
            if spent > cap:
                raise FactorizationLimit(f"Pollard rho exceeded {cap} steps on {n}")
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise FactorizationLimit(f"Pollard rho failed on {n}")


def _factor_rho(n: int, out: Dict[int, int], cap: int) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    t = math.isqrt(n)
    if t * t == n:
        _factor_rho(t, out, cap)
        _factor_rho(t, out, cap)
        return
    d = _brent(n, cap)
    _factor_rho(d, out, cap)
    _factor_rho(n // d, out, cap)


# ---------------------------------------------------------------------------
# factorisation

def _split(n: int, limit: int) -> Tuple[Dict[int, int], int, bool]:
    """Divide out small primes.

    Returns (exponents of the primes removed, cofactor r, few) where every
    prime factor of r exceeds the removed ones and ``few`` means r has at most
    two prime factors counted with multiplicity.
    """
    small: Dict[int, int] = {}
    if n <= limit:
        spf = spf_table(n, limit)
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            small[p] = e
        return small, 1, True
    r = n
    primes = prime_table(min(limit, integer_kth_root(n, 3) + 1)).tolist()
    for p in primes:
        if p * p * p > r:
            return small, r, True
        if r % p == 0:
            e = 0
            while r % p == 0:
                r //= p
                e += 1
            small[p] = e
    return small, r, r < 2 or (primes[-1] + 1) ** 3 > r


def factorize(n: int, limit: int = SIEVE_LIMIT, cap: int = RHO_ITERATION_CAP) -> Dict[int, int]:
    if n < 1:
        raise ValidationError("n must be >= 1")
    small, r, _ = _split(n, limit)
    _factor_rho(r, small, cap)
    return dict(sorted(small.items()))


@dataclass(frozen=True)
class SquarefreeDecomposition:
    """k = s * m^2 with s square-free."""

    k: int
    s: int
    m: int


def squarefree_part(k: int, limit: int = SIEVE_LIMIT,
                    cap: int = RHO_ITERATION_CAP) -> SquarefreeDecomposition:
    if k < 1:
        raise ValidationError("k must be >= 1")
    small, r, few = _split(k, limit)
    if not few:
        _factor_rho(r, small, cap)
        r = 1
    s = m = 1
    for p, e in small.items():
        if e & 1:
            s *= p
        m *= p ** (e // 2)
    if r > 1:
        t = math.isqrt(r)
        if t * t == r:
            m *= t
        else:
            s *= r
    return SquarefreeDecomposition(k, s, m)


def mobius(n: int, limit: int = SIEVE_LIMIT, cap: int = RHO_ITERATION_CAP) -> int:
    if n < 1:
        raise ValidationError("n must be >= 1")
    small, r, few = _split(n, limit)
    if any(e > 1 for e in small.values()):
        return 0
    omega = len(small)
    if r > 1:
        if not few:
            rest: Dict[int, int] = {}
            _factor_rho(r, rest, cap)
            if any(e > 1 for e in rest.values()):
                return 0
            omega += len(rest)
        else:
            t = math.isqrt(r)
            if t * t == r:
                return 0
            omega += 1 if is_probable_prime(r) else 2
    return -1 if omega & 1 else 1


def squarefree_parts(values) -> np.ndarray:
    """Vectorised square-free parts of positive integers.

    int64 input below 2^62 goes through the compiled trial-division kernel;
    anything else falls back to :func:`squarefree_part` per value.
    """
    arr = np.asarray(values)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.dtype != object and int(arr.min()) < 1:
        raise ValidationError("values must be positive")
    if arr.dtype.kind == "i" and int(arr.max()) < (1 << 62):
        vals = np.ascontiguousarray(arr, dtype=np.int64)
        bound = integer_kth_root(int(vals.max()), 3) + 1
        primes = prime_table(2 * bound)
        out = np.empty(vals.shape[0], dtype=np.int64)
        if not _kernels.squarefree_parts(vals, primes, out):
            for i in np.flatnonzero(out < 0):
                out[i] = squarefree_part(int(vals[i])).s
        return out
    return np.array([squarefree_part(int(v)).s for v in arr.ravel()], dtype=object)
