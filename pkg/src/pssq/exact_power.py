"""Exact evaluation of floor(n^c) for rational c = p/q.

Every floor decision is reduced to integer comparisons:

    k = floor(n^(p/q))   <=>   k^q <= n^p < (k+1)^q

so no floating-point value ever decides a result in exact mode. An
approximate mode for irrational c uses interval arithmetic (mpmath.iv) and
refuses to answer when the interval straddles an integer.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .errors import AmbiguousFloor, ValidationError

_APPROX_DPS = 40


@dataclass(frozen=True)
class CExponent:
    """The exponent c of the sequence floor(n^c).

    Exact mode stores c = p/q in lowest terms with p > q >= 2, which is the
    same as c > 1 and c not an integer. Approximate mode keeps a real
    ``approx_value`` and is only meant for irrational c.
    """

    p: int = 0
    q: int = 1
    mode: str = "exact"
    approx_value: float = 0.0

    def __post_init__(self):
        if self.mode == "exact":
            p, q = self.p, self.q
            if not (isinstance(p, int) and isinstance(q, int)):
                raise ValidationError("p and q must be integers")
            if q < 1 or p < 1:
                raise ValidationError("p and q must be positive")
            if math.gcd(p, q) != 1:
                raise ValidationError(f"{p}/{q} is not in lowest terms")
            if q == 1:
                raise ValidationError(
                    f"c = {p} is an integer; c must satisfy c > 1 and c not in N")
            if p <= q:
                raise ValidationError(f"c = {p}/{q} must exceed 1")
        elif self.mode == "approximate":
            v = float(self.approx_value)
            if not math.isfinite(v) or v <= 1:
                raise ValidationError("approximate c must be a finite real > 1")
            if abs(v - round(v)) < 1e-12:
                raise ValidationError(
                    f"c = {v} is within 1e-12 of an integer; c must not be in N")
        else:
            raise ValidationError(f"unknown mode {self.mode!r}")

    @classmethod
    def from_fraction(cls, value: Union[Fraction, int, str]) -> "CExponent":
        f = Fraction(value)
        return cls(f.numerator, f.denominator)

    @classmethod
    def approximate(cls, value: float) -> "CExponent":
        return cls(mode="approximate", approx_value=float(value))

    @classmethod
    def parse(cls, text: str) -> "CExponent":
        """Parse ``"p/q"`` or a terminating decimal such as ``"1.05"``.

        A leading ``~`` (e.g. ``"~1.41421356"``) selects approximate mode.
        """
        text = str(text).strip()
        if text.startswith("~"):
            return cls.approximate(float(text[1:]))
        if not re.fullmatch(r"\d+(/\d+|\.\d+)?", text):
            raise ValidationError(f"cannot parse exponent {text!r}; expected p/q")
        return cls.from_fraction(Fraction(text))

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def value(self) -> Union[Fraction, float]:
        return Fraction(self.p, self.q) if self.exact else self.approx_value

    @property
    def gamma(self) -> Union[Fraction, float]:
        return Fraction(self.q, self.p) if self.exact else 1.0 / self.approx_value

    def __float__(self) -> float:
        return self.p / self.q if self.exact else self.approx_value

    @property
    def label(self) -> str:
        return f"{self.p}/{self.q}" if self.exact else f"~{self.approx_value!r}"

    def __str__(self) -> str:
        return self.label


def as_cexponent(c) -> CExponent:
    if isinstance(c, CExponent):
        return c
    if isinstance(c, (Fraction, int)):
        return CExponent.from_fraction(c)
    if isinstance(c, str):
        return CExponent.parse(c)
    if isinstance(c, float):
        return CExponent.approximate(c)
    raise ValidationError(f"cannot interpret {c!r} as an exponent")


def integer_kth_root(x: int, k: int) -> int:
    """Return the r with r^k <= x < (r+1)^k.

    A floating-point guess is refined by Newton iteration from above; the
    final two-sided check is what guarantees the result.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if x < 0:
        raise ValidationError("x must be >= 0")
    if x < 2 or k == 1:
        return x
    if k == 2:
        return math.isqrt(x)
    bits = x.bit_length()
    if bits <= k:
        return 1

    if bits <= 1000:
        g = int(math.exp(math.log(x) / k))
    else:
        e = (bits - 900) // k
        g = int(math.exp(math.log(x >> (e * k)) / k)) << e
    g = max(g, 1)
    if g ** k <= x < (g + 1) ** k:
        return g

    r = g
    if r ** k <= x:
        step = max(1, r >> 40)
        while (r + step) ** k <= x:
            step *= 2
        r += step
    # r is now an upper bound; integer Newton decreases monotonically to the floor root
    while True:
        t = ((k - 1) * r + x // r ** (k - 1)) // k
        if t >= r:
            break
        r = t
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def _approx_power_interval(n, c: CExponent):
    with mpmath.workdps(_APPROX_DPS):
        return mpmath.iv.mpf(n) ** mpmath.iv.mpf(c.approx_value)


def _interval_floor(iv_value) -> int:
    lo = int(mpmath.floor(iv_value.a))
    hi = int(mpmath.floor(iv_value.b))
    if lo != hi:
        raise AmbiguousFloor(
            f"interval [{iv_value.a}, {iv_value.b}] straddles an integer")
    return lo


def power_floor(n: int, c) -> int:
    """floor(n^c) for n >= 1."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    c = as_cexponent(c)
    if c.exact:
        return integer_kth_root(n ** c.p, c.q)
    return _interval_floor(_approx_power_interval(n, c))


def least_root_ceiling(K: int, c: CExponent) -> int:
    """Smallest integer n with n^p >= K^q, i.e. ceil(K^(1/c))."""
    Kq = K ** c.q
    return integer_kth_root(Kq - 1, c.p) + 1


def interval_contains_integer(K: int, c) -> Optional[int]:
    """Return n with K^(1/c) <= n < (K+1)^(1/c) if it exists, else None.

    Equivalently the unique n with floor(n^c) = K.
    """
    if K < 1:
        raise ValidationError("K must be >= 1")
    c = as_cexponent(c)
    if c.exact:
        n = least_root_ceiling(K, c)
        return n if n ** c.p < (K + 1) ** c.q else None
    with mpmath.workdps(_APPROX_DPS):
        root = mpmath.iv.mpf(K) ** (1 / mpmath.iv.mpf(c.approx_value))
    lo = int(mpmath.ceil(root.a))
    if lo != int(mpmath.ceil(root.b)):
        raise AmbiguousFloor(f"ceil of K^(1/c) undetermined for K={K}")
    return lo if power_floor(lo, c) == K else None
