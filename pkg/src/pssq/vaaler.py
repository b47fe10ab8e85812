"""The sawtooth psi, its trigonometric approximation, and monomial/trilinear sums.

Conventions: e(t) = exp(2 pi i t), psi(t) = t - floor(t) - 1/2, and m ~ M
means M < m <= 2M.

Coefficients of the approximation (1 <= |h| <= H, u = h/(H+1)):

    a(h) = -(2 pi i h)^-1 * (pi u (1 - |u|) cot(pi u) + |u|)
    b(h) = (1 - |h|/(H+1)) / (2H + 2)

With these, |psi(t) - sum a(h) e(ht)| <= sum b(h) e(ht) for all real t.
The variant without the minus sign and without the |u| term does not satisfy
the inequality; it is kept as ``vaaler_coeffs(H, variant="bare")`` so this
can be demonstrated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .arith import mobius, mobius_table
from .errors import PrecisionLoss, ResourceLimit, ValidationError
from .exact_power import as_cexponent, integer_kth_root

__all__ = [
    "psi", "vaaler_weight", "VaalerCoefficients", "vaaler_coeffs", "vaaler_check",
    "vaaler_grid_check", "exp_sum_monomial", "monomial_phases", "psi_sum_direct",
    "psi_sum_decomposition", "TrilinearSpec", "trilinear_sum", "fi_bound", "fi_terms",
    "constant_coefficients", "mobius_coefficients", "random_unit_coefficients", "mobius",
]

TRILINEAR_CEILING = 10**8
_FRAC_BITS = 64
_BLOCK = 1 << 20


def psi(t):
    """Sawtooth t - floor(t) - 1/2 (scalar or array)."""
    # t - floor(t) can round up to 1.0 for tiny negative t
    if isinstance(t, np.ndarray):
        f = t - np.floor(t)
        return np.where(f >= 1.0, 0.0, f) - 0.5
    f = t - math.floor(t)
    return (0.0 if f >= 1.0 else f) - 0.5


def vaaler_weight(u):
    """pi u (1 - |u|) cot(pi u) + |u| for |u| < 1; value 1 at u = 0."""
    u = np.asarray(u, dtype=np.float64)
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.pi * u * (1 - au) / np.tan(np.pi * u)
    core = np.where(u == 0, 1.0, core)
    # cot(pi/2) is 0 exactly but tan(pi/2) is only huge in floating point
    core = np.where(au == 0.5, 0.0, core)
    return core + au


def _bare_weight(u):
    u = np.asarray(u, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.pi * u * (1 - np.abs(u)) / np.tan(np.pi * u)
    core = np.where(u == 0, 1.0, core)
    return np.where(np.abs(u) == 0.5, 0.0, core)


@dataclass(frozen=True)
class VaalerCoefficients:
    H: int
    h: np.ndarray          # 1..H
    a: np.ndarray          # a(h) for h = 1..H (complex); a(-h) = conj(a(h))
    b: np.ndarray          # b(h) for h = 0..H; b(-h) = b(h)

    def a_of(self, h: int) -> complex:
        if h == 0 or abs(h) > self.H:
            raise ValidationError(f"a(h) is defined for 1 <= |h| <= {self.H}")
        v = complex(self.a[abs(h) - 1])
        return v if h > 0 else v.conjugate()

    def b_of(self, h: int) -> float:
        if abs(h) > self.H:
            raise ValidationError(f"b(h) is defined for |h| <= {self.H}")
        return float(self.b[abs(h)])

    def approximation(self, t):
        """sum over 1 <= |h| <= H of a(h) e(ht) (real)."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        ang = 2 * np.pi * np.outer(t, self.h)
        # a(h) e(ht) + a(-h) e(-ht) = 2 Re(a(h) e(ht))
        return 2 * (np.cos(ang) @ self.a.real - np.sin(ang) @ self.a.imag)

    def majorant(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        ang = 2 * np.pi * np.outer(t, self.h)
        return self.b[0] + 2 * (np.cos(ang) @ self.b[1:])


def vaaler_coeffs(H: int, variant: str = "vaaler") -> VaalerCoefficients:
    if H < 1:
        raise ValidationError("H must be >= 1")
    h = np.arange(1, H + 1)
    u = h / (H + 1)
    if variant == "vaaler":
        a = -vaaler_weight(u) / (2j * np.pi * h)
    elif variant == "bare":
        a = _bare_weight(u) / (2j * np.pi * h)
    else:
        raise ValidationError(f"unknown variant {variant!r}")
    b = (1 - np.arange(0, H + 1) / (H + 1)) / (2 * H + 2)
    return VaalerCoefficients(H, h, a.astype(np.complex128), b)


def vaaler_check(t: float, H: int, coeffs: Optional[VaalerCoefficients] = None) -> Tuple[float, float]:
    """(defect, majorant) at a single t."""
    co = coeffs or vaaler_coeffs(H)
    defect = abs(psi(float(t)) - float(co.approximation(t)[0]))
    return defect, float(co.majorant(t)[0])


def vaaler_grid_check(H_list: Sequence[int], grid: int = 1000,
                      variant: str = "vaaler") -> Dict[int, Dict[str, float]]:
    """max(defect - majorant) and min(majorant) over t = k/grid for each H."""
    t = np.arange(grid) / grid
    out = {}
    for H in H_list:
        co = vaaler_coeffs(H, variant)
        defect = np.abs(psi(t) - co.approximation(t))
        maj = co.majorant(t)
        out[H] = {"H": H, "max_defect_minus_majorant": float(np.max(defect - maj)),
                  "min_majorant": float(np.min(maj))}
    return out


# ---------------------------------------------------------------------------
# monomial phases h s^gamma m^(2 gamma) mod 1

def _exact_fracs(h: int, s: int, c, ms: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """frac(h s^g m^(2g)) to 64 bits, and whether the value is an integer.

    With g = q/p, the value is X^(1/p) for X = h^p s^q m^(2q); scaling by
    2^64 inside the root gives the fractional part exactly to 2^-64.
    """
    p, q = c.p, c.q
    base = h ** p * s ** q
    fr = np.empty(len(ms))
    integral = np.zeros(len(ms), dtype=bool)
    scale = 1 << _FRAC_BITS
    for i, m in enumerate(ms):
        X = base * m ** (2 * q)
        Y = integer_kth_root(X << (_FRAC_BITS * p), p)
        fr[i] = (Y & (scale - 1)) / scale
        r = Y >> _FRAC_BITS
        integral[i] = r ** p == X
    fr[integral] = 0.0
    return fr, integral


def monomial_phases(h: int, s: int, c, lo: int, hi: int, exact: bool = False) -> np.ndarray:
    """frac(h s^gamma m^(2 gamma)) for lo < m <= hi (h >= 0)."""
    c = as_cexponent(c)
    if exact:
        if not c.exact:
            raise ValidationError("exact phases need a rational c")
        return _exact_fracs(h, s, c, range(lo + 1, hi + 1))[0]
    g = np.longdouble(float(c.gamma)) if not c.exact else np.longdouble(c.q) / np.longdouble(c.p)
    m = np.arange(lo + 1, hi + 1, dtype=np.longdouble)
    x = np.longdouble(h) * np.exp(g * (np.log(np.longdouble(s)) + 2 * np.log(m)))
    return (x - np.floor(x)).astype(np.float64)


def exp_sum_monomial(h: int, s: int, c, rng: Tuple[int, int], exact: bool = False) -> complex:
    """sum over L < m <= L' of e(h s^gamma m^(2 gamma)), exactly rounded real and imaginary parts."""
    L, L2 = rng
    if L < 0 or L2 < L:
        raise ValidationError("range must satisfy 0 <= L <= L'")
    if s < 1:
        raise ValidationError("s must be >= 1")
    if h == 0:
        return complex(L2 - L, 0.0)
    sign = 1 if h > 0 else -1
    re, im = [], []
    for a in range(L, L2, _BLOCK):
        b = min(L2, a + _BLOCK)
        fr = monomial_phases(abs(h), s, c, a, b, exact)
        ang = 2 * np.pi * fr
        re.extend(np.cos(ang).tolist())
        im.extend(np.sin(ang).tolist())
    return complex(math.fsum(re), sign * math.fsum(im))


def psi_sum_direct(c, s: int, M: int, warn_eps: float = 1e-10) -> float:
    """sum over m <= M of psi(-s^gamma m^(2 gamma)).

    Fractional parts come from exact integer roots, so exact integers are
    recognised exactly. A PrecisionLoss warning is issued when some argument
    lies within ``warn_eps`` of an integer without being one.
    """
    c = as_cexponent(c)
    if M < 1 or s < 1:
        raise ValidationError("s and M must be >= 1")
    if c.exact:
        fr, integral = _exact_fracs(1, s, c, range(1, M + 1))
    else:
        fr = monomial_phases(1, s, c, 0, M)
        integral = fr == 0
    near = (~integral) & ((fr < warn_eps) | (fr > 1 - warn_eps))
    if np.any(near):
        warnings.warn(f"{int(near.sum())} arguments within {warn_eps} of an integer",
                      PrecisionLoss, stacklevel=2)
    # psi(-x) = 1/2 - frac(x) unless x is an integer, where it is -1/2
    vals = np.where(integral, -0.5, 0.5 - fr)
    return math.fsum(vals.tolist())


def psi_sum_decomposition(c, s: int, M: int, H: int) -> Dict[str, float]:
    """Compare psi_sum_direct with its degree-H trigonometric approximation.

    Summing the pointwise inequality over m gives
    |direct - approx| <= remainder with
    approx = sum_h a(h) sum_m e(-h x_m) and remainder = sum_h b(h) sum_m e(-h x_m).
    """
    c = as_cexponent(c)
    co = vaaler_coeffs(H)
    direct = psi_sum_direct(c, s, M)
    approx_terms, rem_terms = [], [co.b[0] * M]
    for h in range(1, H + 1):
        E = exp_sum_monomial(h, s, c, (0, M), exact=c.exact)
        # sum over +-h of a(h) e(-h x) = 2 Re(a(h) conj(E))
        approx_terms.append(2 * (co.a[h - 1] * E.conjugate()).real)
        rem_terms.append(2 * co.b[h] * E.real)
    approx = math.fsum(approx_terms)
    rem = math.fsum(rem_terms)
    return {"direct": direct, "approx": approx, "difference": abs(direct - approx),
            "remainder": rem, "M_over_H": M / (H + 1)}


# ---------------------------------------------------------------------------
# trilinear sums

Coeff1 = Callable[[np.ndarray], np.ndarray]
Coeff2 = Callable[[np.ndarray, np.ndarray], np.ndarray]


def constant_coefficients(value: complex = 1.0):
    def phi(m, m2=None):
        shape = np.shape(m) if m2 is None else np.broadcast(m, m2).shape
        return np.full(shape, value, dtype=np.complex128)
    return phi


def mobius_coefficients():
    """phi_m = mu(m)."""
    def phi(m):
        m = np.asarray(m)
        return mobius_table(int(m.max())).astype(np.float64)[m].astype(np.complex128)
    return phi


def random_unit_coefficients(seed: int):
    """Unit-modulus coefficients e(u), u uniform from a generator seeded with ``seed``.

    Works for one- or two-index oracles; the draw has the broadcast shape of
    the index arrays, so a given spec always sees the same coefficients.
    """
    def draw(m, m2=None):
        shape = np.shape(m) if m2 is None else np.broadcast(m, m2).shape
        u = np.random.default_rng(seed).random(shape)
        return np.exp(2j * np.pi * u)
    return draw


@dataclass
class TrilinearSpec:
    x: float
    M: int
    M1: int
    M2: int
    alpha: float
    alpha1: float
    alpha2: float
    phi: Coeff1 = None
    psi2: Coeff2 = None

    def __post_init__(self):
        if self.x < 0:
            raise ValidationError("x must be >= 0")
        if min(self.M, self.M1, self.M2) < 1:
            raise ValidationError("M, M1, M2 must be >= 1")
        if self.alpha == 1:
            raise ValidationError("alpha must differ from 1")
        if self.alpha * self.alpha1 * self.alpha2 == 0:
            raise ValidationError("alpha, alpha1, alpha2 must be nonzero")
        if self.phi is None:
            self.phi = constant_coefficients()
        if self.psi2 is None:
            self.psi2 = constant_coefficients()


def _bounded(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if np.any(np.abs(v) > 1 + 1e-12):
        raise ValidationError(f"{what} coefficients must satisfy |value| <= 1")
    return v


def trilinear_sum(spec: TrilinearSpec) -> complex:
    """Triple sum over m ~ M, m1 ~ M1, m2 ~ M2 of phi_m psi_{m1,m2} e(x (m/M)^a (m1/M1)^a1 (m2/M2)^a2)."""
    size = spec.M * spec.M1 * spec.M2
    if size > TRILINEAR_CEILING:
        raise ResourceLimit(f"M*M1*M2 = {size} exceeds {TRILINEAR_CEILING}")
    m = np.arange(spec.M + 1, 2 * spec.M + 1)
    m1 = np.arange(spec.M1 + 1, 2 * spec.M1 + 1)
    m2 = np.arange(spec.M2 + 1, 2 * spec.M2 + 1)
    phi = _bounded(spec.phi(m), "phi")
    g1, g2 = np.meshgrid(m1, m2, indexing="ij")
    psi2 = _bounded(spec.psi2(g1, g2), "psi").ravel()
    U = spec.x * (m / spec.M) ** spec.alpha
    V = ((g1 / spec.M1) ** spec.alpha1 * (g2 / spec.M2) ** spec.alpha2).ravel()
    keep = psi2 != 0
    V, psi2 = V[keep], psi2[keep]
    re, im = [], []
    rows = max(1, _BLOCK // max(1, V.size))
    for a in range(0, m.size, rows):
        ph = np.outer(U[a:a + rows], V)
        ph -= np.floor(ph)
        inner = np.exp(2j * np.pi * ph) @ psi2
        part = phi[a:a + rows] * inner
        re.extend(part.real.tolist())
        im.extend(part.imag.tolist())
    return complex(math.fsum(re), math.fsum(im))


def fi_terms(spec: TrilinearSpec) -> Dict[str, float]:
    x, M, P = float(spec.x), float(spec.M), float(spec.M1) * float(spec.M2)
    log2 = math.log(2 * M * P) ** 2
    terms = {
        "x^1/4 M^1/2 (M1M2)^3/4": x ** 0.25 * M ** 0.5 * P ** 0.75,
        "M^7/10 M1M2": M ** 0.7 * P,
        "M (M1M2)^3/4": M * P ** 0.75,
        "x^-1/4 M^11/10 M1M2": (x ** -0.25 if x > 0 else math.inf) * M ** 1.1 * P,
    }
    return {k: v * log2 for k, v in terms.items()}


def fi_bound(spec: TrilinearSpec) -> float:
    """Four-term envelope times log^2(2 M M1 M2)."""
    return math.fsum(fi_terms(spec).values())
