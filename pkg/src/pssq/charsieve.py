"""Jacobi symbols, the square sieve on floor(n^c), character sums, and a mean-value experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .arith import factorize, is_probable_prime, primes_in_range, squarefree_mask
from .asymptotics import fit_exponent
from .counting import count_dyadic
from .errors import EvenModulus, ResourceLimit, ValidationError
from .exact_power import CExponent, as_cexponent
from .sequence import power_floor_values

MEANVALUE_CEILING = 10**8


def jacobi(k: int, q: int) -> int:
    """Jacobi symbol (k/q) for odd q >= 1, by the binary algorithm."""
    if q < 1:
        raise ValidationError("modulus must be >= 1")
    if q % 2 == 0:
        raise EvenModulus(f"Jacobi symbol needs an odd modulus, got {q}")
    k %= q
    t = 1
    while k:
        while k % 2 == 0:
            k //= 2
            if q % 8 in (3, 5):
                t = -t
        k, q = q, k
        if k % 4 == 3 and q % 4 == 3:
            t = -t
        k %= q
    return t if q == 1 else 0


def kronecker(n: int, m: int) -> int:
    """Kronecker symbol (n/m) for m >= 1, extending jacobi to even m."""
    if m < 1:
        raise ValidationError("m must be >= 1")
    t = 1
    while m % 2 == 0:
        m //= 2
        if n % 2 == 0:
            return 0
        if n % 8 in (3, 5):
            t = -t
    return t * jacobi(n, m)


@dataclass(frozen=True)
class RealCharacter:
    """The character n -> (n/q) for odd square-free q >= 3."""

    q: int
    kind: str = field(default="", compare=False)

    def __post_init__(self):
        q = self.q
        if q < 3 or q % 2 == 0:
            raise ValidationError(f"modulus must be odd and >= 3, got {q}")
        if any(e > 1 for e in factorize(q).values()):
            raise ValidationError(f"modulus {q} is not square-free")
        object.__setattr__(self, "kind", "legendre" if is_probable_prime(q) else "jacobi-composite")
        table = np.array([jacobi(k, q) for k in range(q)], dtype=np.int8)
        table.setflags(write=False)
        object.__setattr__(self, "_table", table)

    @property
    def table(self) -> np.ndarray:
        return self._table

    def __call__(self, values):
        """chi(values) for an int or an integer array (object arrays allowed)."""
        if isinstance(values, (int, np.integer)):
            return int(self._table[int(values) % self.q])
        arr = np.asarray(values)
        if arr.dtype == object:
            idx = np.array([int(v) % self.q for v in arr.ravel()], dtype=np.int64).reshape(arr.shape)
        else:
            idx = arr % self.q
        return self._table[idx].astype(np.int64)


def primes_in_dyadic(P: int) -> List[int]:
    """Primes p with P < p <= 2P."""
    if P < 2:
        raise ValidationError("P must be >= 2")
    return primes_in_range(P, 2 * P)


# ---------------------------------------------------------------------------
# square sieve

def _multiplicities(values: Sequence[int]) -> Tuple[List[int], List[int]]:
    counts: Dict[int, int] = {}
    for v in values:
        v = int(v)
        if v < 1:
            raise ValidationError("values must be positive")
        counts[v] = counts.get(v, 0) + 1
    rs = sorted(counts)
    return rs, [counts[r] for r in rs]


def _symbol_matrix(rs: Sequence[int], s: int, primes: Sequence[int]) -> np.ndarray:
    """X[i, j] = (s r_i / p_j)."""
    X = np.empty((len(rs), len(primes)), dtype=np.int64)
    for j, p in enumerate(primes):
        tab = np.array([jacobi(k, p) for k in range(p)], dtype=np.int64)
        X[:, j] = tab[np.array([(s * r) % p for r in rs], dtype=np.int64)]
    return X


def square_sieve_rhs(values: Sequence[int], s: int, P: int) -> float:
    """10 P^-2 sum_r a_r [(sum_{P<p<=2P} (sr/p) log p)^2 + (log sr)^2], a_r = multiplicity of r."""
    if s < 1:
        raise ValidationError("s must be >= 1")
    rs, mult = _multiplicities(values)
    if not rs:
        raise ValidationError("values must be nonempty")
    primes = primes_in_dyadic(P)
    logs = [math.log(p) for p in primes]
    X = _symbol_matrix(rs, s, primes)
    terms = []
    for i, r in enumerate(rs):
        inner = math.fsum(int(x) * lp for x, lp in zip(X[i], logs))
        terms.append(mult[i] * (inner * inner + math.log(s * r) ** 2))
    return 10.0 / (P * P) * math.fsum(terms)


def _is_s_square(r: int, s: int) -> bool:
    if r % s:
        return False
    w = r // s
    t = math.isqrt(w)
    return t * t == w


@dataclass
class SieveReport:
    c: CExponent
    s: int
    N: int
    P: int
    lhs: int
    rhs: float
    ratio: float
    diagonal: float
    off_diagonal: float
    off_diagonal_factored: float
    uniform_off_diagonal: float
    log_term: float
    primes: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_record(self) -> dict:
        return {"c": self.c.label, "s": self.s, "N": self.N, "P": self.P, "lhs": self.lhs,
                "rhs": self.rhs, "ratio": self.ratio, "holds": self.holds,
                "diagonal": self.diagonal, "off_diagonal": self.off_diagonal,
                "off_diagonal_factored": self.off_diagonal_factored,
                "uniform_off_diagonal": self.uniform_off_diagonal,
                "log_term": self.log_term, "primes": self.primes}


def sieve_count_estimate(c, s: int, N: int, P: int) -> SieveReport:
    """Square-sieve bound for Q*_c(s; N) with a_r the indicator of r = floor(n^c), N/2 < n <= N.

    The squared prime sum is expanded over pairs (l, p): the diagonal l = p
    is reported separately, and the off-diagonal part is computed twice,
    directly from (s r / l p) and from (s / l p) G[l, p] with
    G[l, p] = sum_r (r/l)(r/p). Dropping the sign (s / l p) gives a bound
    that does not depend on s.
    """
    c = as_cexponent(c)
    if N < 2:
        raise ValidationError("N must be >= 2")
    vals = power_floor_values(c, N // 2 + 1, N).tolist()
    primes = primes_in_dyadic(P)
    logs = np.array([math.log(p) for p in primes])
    rs = [int(v) for v in vals]
    Xs = _symbol_matrix(rs, s, primes).astype(np.float64)
    X1 = _symbol_matrix(rs, 1, primes).astype(np.float64)

    inner = Xs @ logs
    sq = [float(v) * float(v) for v in inner.tolist()]
    log_term = math.fsum(math.log(s * r) ** 2 for r in rs)
    rhs = 10.0 / (P * P) * (math.fsum(sq) + log_term)

    diag = math.fsum((Xs ** 2).sum(axis=0) * logs ** 2)
    W = np.outer(logs, logs)
    off = np.ones_like(W) - np.eye(len(primes))
    direct = math.fsum(((Xs.T @ Xs) * W * off).ravel().tolist())
    G = X1.T @ X1
    s_sign = np.array([[jacobi(s, l * p) for p in primes] for l in primes], dtype=np.float64)
    factored = math.fsum((s_sign * G * W * off).ravel().tolist())
    uniform = math.fsum((np.abs(G) * W * off).ravel().tolist())

    lhs = count_dyadic(c, s, N).value
    return SieveReport(c, s, N, P, lhs, rhs, lhs / rhs if rhs else math.inf,
                       diag, direct, factored, uniform, log_term, len(primes))


# ---------------------------------------------------------------------------
# character sums

def char_sum_T(c, chi: Union[RealCharacter, int], N: int) -> int:
    """sum over N/2 < n <= N of chi(floor(n^c))."""
    c = as_cexponent(c)
    if N < 2:
        raise ValidationError("N must be >= 2")
    if not isinstance(chi, RealCharacter):
        chi = RealCharacter(int(chi))
    vals = power_floor_values(c, N // 2 + 1, N)
    return int(np.sum(chi(vals)))


def char_sum_T_product(c, l: int, p: int, N: int) -> int:
    """T for q = l p evaluated termwise as (k/l)(k/p)."""
    c = as_cexponent(c)
    a, b = RealCharacter(l), RealCharacter(p)
    vals = power_floor_values(c, N // 2 + 1, N)
    return int(np.sum(a(vals) * b(vals)))


def beta_from_series(series: Mapping[int, Sequence[Tuple[int, float]]]) -> Tuple[float, Dict[int, float]]:
    """beta_hat = 1 - max over q of the fitted slope of |T|/sqrt(q) against N.

    |T| is floored at 1 before taking logarithms, so exact cancellation
    reads as "no growth" rather than breaking the fit.
    """
    slopes = {}
    for q, pts in series.items():
        samples = [(n, max(1.0, abs(t)) / math.sqrt(q)) for n, t in pts]
        slopes[q] = fit_exponent(samples)[0]
    return 1.0 - max(slopes.values()), slopes


def estimate_beta(c, q_set: Sequence[int], N_set: Sequence[int]) -> Tuple[float, List[dict]]:
    """Empirical cancellation exponent of T_{c,chi}(q; N); report-only."""
    c = as_cexponent(c)
    N_set = list(N_set)
    if len(N_set) < 3 or any(b <= a for a, b in zip(N_set, N_set[1:])):
        raise ValidationError("N_set must be strictly ascending with at least 3 values")
    series: Dict[int, List[Tuple[int, int]]] = {}
    chis = {q: RealCharacter(q) for q in q_set}
    for q in q_set:
        series[q] = [(N, char_sum_T(c, chis[q], N)) for N in N_set]
    beta_hat, slopes = beta_from_series(series)
    rows = []
    for q in q_set:
        for N, T in series[q]:
            rows.append({"c": c.label, "q": q, "kind": chis[q].kind, "N": N, "T": T,
                         "T_abs": abs(T), "normalized": abs(T) / math.sqrt(q) / N,
                         "slope": slopes[q], "beta_hat": beta_hat})
    return beta_hat, rows


# ---------------------------------------------------------------------------
# mean value of real character sums

def _coeff_vector(N: int, coeffs) -> Tuple[np.ndarray, np.ndarray]:
    """(square-free n <= N with nonzero a_n, their a_n)."""
    a = np.zeros(N + 1, dtype=np.complex128)
    if isinstance(coeffs, Mapping):
        for n, v in coeffs.items():
            if not 1 <= n <= N:
                raise ValidationError(f"coefficient index {n} outside 1..{N}")
            a[n] = v
    else:
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.shape != (N + 1,):
            raise ValidationError("coefficient array must have length N + 1 (index 0 unused)")
        a[1:] = arr[1:]
    sqf = squarefree_mask(N)
    idx = np.flatnonzero(sqf & (a != 0))
    return idx, a[idx]


def _check_meanvalue(M: int, N: int):
    if M < 1 or N < 1:
        raise ValidationError("M and N must be >= 1")
    if M * N > MEANVALUE_CEILING:
        raise ResourceLimit(f"M*N = {M * N} exceeds {MEANVALUE_CEILING}")


def _abs2(terms_re, terms_im) -> float:
    re, im = math.fsum(terms_re), math.fsum(terms_im)
    return re * re + im * im


def hb_meanvalue_lhs(M: int, N: int, coeffs) -> float:
    """sum over square-free m <= M of |sum over square-free n <= N of a_n (n/m)|^2, term by term."""
    _check_meanvalue(M, N)
    ns, an = _coeff_vector(N, coeffs)
    ms = np.flatnonzero(squarefree_mask(M)).tolist()
    ns_l, re_l, im_l = ns.tolist(), an.real.tolist(), an.imag.tolist()
    out = []
    for m in ms:
        re, im = [], []
        for n, ar, ai in zip(ns_l, re_l, im_l):
            k = kronecker(n, m)
            if k:
                re.append(k * ar)
                im.append(k * ai)
        out.append(_abs2(re, im))
    return math.fsum(out)


def hb_meanvalue_lhs_cached(M: int, N: int, coeffs) -> float:
    """Same quantity with (n/m) assembled from cached per-prime rows (n/p)."""
    _check_meanvalue(M, N)
    ns, an = _coeff_vector(N, coeffs)
    ms = np.flatnonzero(squarefree_mask(M)).tolist()
    rows: Dict[int, np.ndarray] = {}

    def row(p):
        if p not in rows:
            rows[p] = np.array([kronecker(n, p) for n in ns.tolist()], dtype=np.int64)
        return rows[p]

    out = []
    for m in ms:
        k = np.ones(ns.size, dtype=np.int64)
        for p in factorize(m) if m > 1 else ():
            k = k * row(p)
        nz = k != 0
        out.append(_abs2((k[nz] * an.real[nz]).tolist(), (k[nz] * an.imag[nz]).tolist()))
    return math.fsum(out)


def rhs_envelope(M: int, N: int, coeffs) -> float:
    """(M + N) sum |a_n|^2 over square-free n <= N."""
    _, an = _coeff_vector(N, coeffs)
    return (M + N) * math.fsum((np.abs(an) ** 2).tolist())


def random_unit_coeffs(N: int, seed: int) -> np.ndarray:
    """a_n = e(u_n) with u_n uniform from a seeded generator (index 0 unused)."""
    u = np.random.default_rng(seed).random(N + 1)
    a = np.exp(2j * np.pi * u)
    a[0] = 0
    return a
