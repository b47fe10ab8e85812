"""Main terms, error exponents and envelopes, and the monomial optimiser.

Exponents are kept as exact Fractions whenever c is rational; floats only
appear when a quantity is evaluated at a concrete N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .arith import squarefree_mask
from .errors import DegenerateExponent, DegenerateFit, EmptyDirection, OutOfRange, ValidationError
from .exact_power import CExponent, as_cexponent

Number = Union[Fraction, float]

TWELVE_OVER_PI2 = 12.0 / math.pi ** 2


def _cval(c) -> Number:
    """c as a Fraction when it is exact, otherwise as a float."""
    if isinstance(c, (CExponent, str)):
        return as_cexponent(c).value
    if isinstance(c, (int, Fraction)):
        return Fraction(c)
    return float(c)


# ---------------------------------------------------------------------------
# exponent profile

@dataclass(frozen=True)
class ErrorProfile:
    rho1: Number
    theta1: Number
    rho2: Number
    theta2: Number

    def as_floats(self) -> Tuple[float, float, float, float]:
        return (float(self.rho1), float(self.theta1), float(self.rho2), float(self.theta2))


def error_profile(c, pair) -> ErrorProfile:
    """The four exponents of the fixed-s error term for exponent pair ``pair``.

    The error is s^-rho1 N^theta1 + s^-rho2 N^theta2 (up to N^o(1)).
    """
    cv = _cval(c)
    k, l = pair.kappa, pair.lam
    if isinstance(cv, float):
        k, l = float(k), float(l)
    return ErrorProfile(
        rho1=l / (2 * (k + 1)),
        theta1=(2 * k + cv * l) / (2 * (1 + k)),
        rho2=(l - k) / 2,
        theta2=(2 * k + cv * (l - k)) / 2,
    )


def theta_affine(pair) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
    """theta1 and theta2 as (a, b) with theta = a + b*c."""
    k, l = Fraction(pair.kappa), Fraction(pair.lam)
    return ((k / (1 + k), l / (2 * (1 + k))), (k, (l - k) / 2))


# ---------------------------------------------------------------------------
# main terms

def _main_coefficient(c) -> float:
    cv = _cval(c)
    gamma = 1 / cv
    if cv >= 2:
        warnings.warn(f"c = {cv} >= 2: main term is outside the range it was derived for",
                      DegenerateExponent, stacklevel=3)
    return float(gamma / (2 * gamma - 1))


def main_term_fixed(c, s: int, N: int) -> float:
    """gamma (2 gamma - 1)^-1 s^-1/2 N^(1 - c/2)."""
    if s < 1 or N < 1:
        raise ValidationError("s and N must be >= 1")
    coef = _main_coefficient(c)
    cf = float(_cval(c))
    return coef * math.exp((1 - cf / 2) * math.log(N) - 0.5 * math.log(s))


def phi_exact(S: int) -> float:
    """Sum of s^-1/2 over square-free s <= S."""
    if S < 1:
        raise ValidationError("S must be >= 1")
    idx = np.flatnonzero(squarefree_mask(S))
    return math.fsum((1.0 / np.sqrt(idx.astype(np.float64))).tolist())


def phi_table(S_max: int) -> np.ndarray:
    """phi_exact(S) for every 0 <= S <= S_max (entry 0 is 0), by running sums."""
    mask = squarefree_mask(S_max)
    w = np.zeros(S_max + 1)
    idx = np.flatnonzero(mask)
    w[idx] = 1.0 / np.sqrt(idx.astype(np.float64))
    return np.cumsum(w)


def phi_approx(S: int) -> float:
    if S < 1:
        raise ValidationError("S must be >= 1")
    return TWELVE_OVER_PI2 * math.sqrt(S)


def main_term_averaged(c, S: int, N: int) -> float:
    """12 gamma / (pi^2 (2 gamma - 1)) S^1/2 N^(1 - c/2)."""
    if S < 1 or N < 1:
        raise ValidationError("S and N must be >= 1")
    coef = _main_coefficient(c)
    cf = float(_cval(c))
    return TWELVE_OVER_PI2 * coef * math.exp((1 - cf / 2) * math.log(N) + 0.5 * math.log(S))


def main_term_averaged_phi(c, S: int, N: int) -> float:
    """Same main term with the exact Phi(S) in place of (12/pi^2) S^1/2."""
    coef = _main_coefficient(c)
    cf = float(_cval(c))
    return coef * phi_exact(S) * N ** (1 - cf / 2)


# ---------------------------------------------------------------------------
# averaged envelope

class EnvelopeTerm(NamedTuple):
    name: str
    s_exp: Number
    n_exp: Number
    value: float


def envelope_exponents(c) -> List[Tuple[str, Number, Number]]:
    cv = _cval(c)
    one = Fraction(1) if isinstance(cv, Fraction) else 1.0
    return [
        ("S^1/5 N^((1+2c)/5)", one / 5, (1 + 2 * cv) / 5),
        ("S^5/8 N^(3c/8)", 5 * one / 8, 3 * cv / 8),
        ("S^1/8 N^((2+3c)/8)", one / 8, (2 + 3 * cv) / 8),
        ("S N^(1-c)", one, 1 - cv),
    ]


def envelope_terms(c, S: int, N: int) -> List[EnvelopeTerm]:
    if S < 1 or N < 1:
        raise ValidationError("S and N must be >= 1")
    lS, lN = math.log(S), math.log(N)
    return [EnvelopeTerm(name, a, b, math.exp(float(a) * lS + float(b) * lN))
            for name, a, b in envelope_exponents(c)]


def error_envelope_averaged(c, S: int, N: int) -> float:
    return math.fsum(t.value for t in envelope_terms(c, S, N))


def dominant_term(c, sigma) -> Tuple[str, Number]:
    """Largest envelope term when S = N^sigma, by comparing exponents of N."""
    best = None
    for name, a, b in envelope_exponents(c):
        e = a * sigma + b
        if best is None or e > best[1]:
            best = (name, e)
    return best


# ---------------------------------------------------------------------------
# thresholds and sieve bounds

def tau(c) -> Number:
    """Admissible exponent for S in the averaged asymptotic (1 < c < 2)."""
    cv = _cval(c)
    if not 1 < cv < 2:
        raise OutOfRange(f"tau(c) needs 1 < c < 2, got {cv}")
    brk = Fraction(12, 7)
    return (8 - 3 * cv) / 5 if cv <= brk else 2 * (2 - cv)


def tau_remark(c) -> Number:
    """(4 - c)/5, the weaker admissible exponent, for 1 < c <= 4."""
    cv = _cval(c)
    if not 1 < cv <= 4:
        raise OutOfRange(f"tau_remark(c) needs 1 < c <= 4, got {cv}")
    return (4 - cv) / 5


def _check_beta(c, beta_c):
    cv = _cval(c)
    if not cv > 2:
        raise OutOfRange(f"sieve bounds need c > 2, got {cv}")
    if not 0 < beta_c < 1:
        raise OutOfRange(f"beta_c must lie in (0, 1), got {beta_c}")


def sieve_bound_fixed(c, N: int, beta_c: float) -> float:
    """N^(1 - beta_c/2)."""
    _check_beta(c, beta_c)
    return float(N) ** (1 - beta_c / 2)


def sieve_bound_averaged(c, S: int, N: int, beta_c: float) -> float:
    """S N^(1 - beta_c) + S^3/4 N^(1 - beta_c/2)."""
    _check_beta(c, beta_c)
    return S * float(N) ** (1 - beta_c) + S ** 0.75 * float(N) ** (1 - beta_c / 2)


def sieve_crossover(N: int, beta_c: float) -> float:
    """S at which the two averaged sieve terms are equal: S^1/4 = N^(beta_c/2)."""
    return float(N) ** (2 * beta_c)


def sieve_threshold_averaged(N: int, beta_c: float) -> float:
    """Below this S the averaged sieve bound is o(N)."""
    return float(N) ** (2 * beta_c / 3)


def beta_from_constant(beta: float, c) -> float:
    """beta(c) = beta / c^2."""
    return beta / float(_cval(c)) ** 2


# ---------------------------------------------------------------------------
# monomial optimiser

@dataclass(frozen=True)
class MonomialTerm:
    """A * Z^a (ascending) or B * Z^-b (descending); ``exponent`` is a or b > 0."""

    coefficient: float
    exponent: Number
    direction: str = "ascending"

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ValidationError("coefficient must be > 0")
        if not self.exponent > 0:
            raise ValidationError("exponent must be > 0")
        if self.direction not in ("ascending", "descending"):
            raise ValidationError(f"unknown direction {self.direction!r}")

    def __call__(self, Z: float) -> float:
        e = float(self.exponent)
        return self.coefficient * (Z ** e if self.direction == "ascending" else Z ** -e)


def evaluate_terms(terms: Sequence[MonomialTerm], Z: float) -> float:
    return math.fsum(t(Z) for t in terms)


def monomial_bound(terms: Sequence[MonomialTerm], Z1: float, Z2: float) -> float:
    asc = [t for t in terms if t.direction == "ascending"]
    desc = [t for t in terms if t.direction == "descending"]
    parts = []
    for t in asc:
        a = float(t.exponent)
        for u in desc:
            b = float(u.exponent)
            parts.append(math.exp((b * math.log(t.coefficient) + a * math.log(u.coefficient))
                                  / (a + b)))
        parts.append(t.coefficient * Z1 ** a)
    for u in desc:
        parts.append(u.coefficient * Z2 ** -float(u.exponent))
    return math.fsum(parts)


def _crossing(asc, desc, lo: float, hi: float) -> float:
    """Z where max ascending term equals max descending term (bisection in log Z)."""
    la = [(math.log(t.coefficient), float(t.exponent)) for t in asc]
    ld = [(math.log(t.coefficient), float(t.exponent)) for t in desc]

    def gap(logz):
        return max(c + a * logz for c, a in la) - max(c - b * logz for c, b in ld)

    a, b = math.log(lo), math.log(hi)
    while gap(a) > 0:
        a -= 64.0
    while gap(b) < 0:
        b += 64.0
    for _ in range(200):
        mid = 0.5 * (a + b)
        if gap(mid) < 0:
            a = mid
        else:
            b = mid
        if b - a < 1e-15 * max(1.0, abs(a)):
            break
    return math.exp(min(b, 709.0))


def optimize_monomials(terms: Sequence[MonomialTerm], Z1: float, Z2: float) -> Tuple[float, float]:
    """Return (Z, bound) with Z in (Z1, Z2] and L(Z) at most a term-count multiple of bound.

    bound is the sum over pairs (A_i^b_j B_j^a_i)^(1/(a_i+b_j)) plus the
    endpoint terms A_i Z1^a_i and B_j Z2^-b_j. Z is where the largest
    ascending and descending terms cross, clamped into (Z1, Z2].
    """
    terms = list(terms)
    if not terms:
        raise ValidationError("at least one term is required")
    if not 0 <= Z1 <= Z2 or Z2 <= 0:
        raise ValidationError("need 0 <= Z1 <= Z2 and Z2 > 0")
    asc = [t for t in terms if t.direction == "ascending"]
    desc = [t for t in terms if t.direction == "descending"]
    bound = monomial_bound(terms, Z1, Z2)
    just_above = Z1 * (1 + 2.0 ** -40) if Z1 > 0 else 0.0
    if Z1 == Z2:
        return Z2, bound
    if not desc:
        if Z1 == 0:
            raise EmptyDirection(
                "all terms ascend and Z1 = 0: the infimum 0 is approached but never attained")
        return min(Z2, just_above), bound
    if not asc:
        return Z2, bound
    lo = Z1 if Z1 > 0 else Z2 * 1e-300
    z0 = _crossing(asc, desc, lo, Z2)
    if z0 > Z2:
        return Z2, bound
    if z0 <= Z1:
        return min(Z2, just_above), bound
    return z0, bound


# ---------------------------------------------------------------------------
# fitting

def fit_exponent(samples: Sequence[Tuple[int, float]]) -> Tuple[float, float, float]:
    """Least-squares fit of log(value) = slope * log(N) + intercept.

    Returns (slope, intercept, rms residual in log space).
    """
    samples = list(samples)
    if len(samples) < 3 or len({n for n, _ in samples}) < 2:
        raise DegenerateFit("need at least 3 samples with at least 2 distinct N")
    x = np.log(np.array([float(n) for n, _ in samples]))
    vals = np.array([float(v) for _, v in samples])
    if np.any(vals <= 0):
        raise ValidationError("values must be positive")
    y = np.log(vals)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))
