"""Compiled inner loops. Everything here is a pure function of its inputs."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def monomial_base(m_lo, count, exponent, out):
    for i in range(count):
        out[i] = float(m_lo + i) ** exponent


@njit(cache=True, nogil=True)
def inverse_scan(base, m_lo, count, s_gamma, gamma, s, rel, out):
    """Flag every m whose interval [K^g, (K+1)^g), K = s*m^2, may hold an integer.

    x = s_gamma * base[i] approximates K^g with relative error far below
    ``rel``; (K+1)^g - K^g <= g*K^(g-1) = g*x/K. An m is skipped only when
    [x - eps, x + eps + width] provably contains no integer. Returns the
    number of flagged m written to ``out``.
    """
    flagged = 0
    for i in range(count):
        x = s_gamma * base[i]
        eps = x * rel + rel
        fl = math.floor(x)
        fr = x - fl
        m = float(m_lo + i)
        width = gamma * x / (s * m * m)
        if fr > eps and fr + width + eps < 1.0:
            continue
        out[flagged] = m_lo + i
        flagged += 1
    return flagged


@njit(cache=True, nogil=True)
def _isqrt64(r):
    t = np.int64(math.sqrt(float(r)))
    while t * t > r:
        t -= 1
    while (t + 1) * (t + 1) <= r:
        t += 1
    return t


@njit(cache=True, nogil=True)
def squarefree_parts(values, primes, out):
    """Square-free part of each value (all values < 2^62).

    Trial division stops at the first prime p with p^3 > remaining cofactor r;
    r then has at most two prime factors, so it is square-free unless it is a
    perfect square. Values for which ``primes`` ran out get -1 and the
    function returns False.
    """
    ok = True
    np_ = primes.shape[0]
    for i in range(values.shape[0]):
        r = values[i]
        part = np.int64(1)
        j = 0
        exhausted = False
        while True:
            if j >= np_:
                exhausted = True
                break
            p = primes[j]
            if p * p * p > r:
                break
            if r % p == 0:
                e = 0
                while r % p == 0:
                    r //= p
                    e += 1
                if e & 1:
                    part *= p
            j += 1
        if exhausted:
            ok = False
            out[i] = -1
            continue
        if r > 1:
            t = _isqrt64(r)
            if t * t != r:
                part *= r
        out[i] = part
    return ok
