"""Experiment drivers: exact counts against predictions, trend fits, report tables.

Each driver returns a plain dict report with a ``rows`` list (the table) and
summary fields; nothing here depends on wall-clock time unless asked.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import asymptotics as asy
from .charsieve import (estimate_beta, hb_meanvalue_lhs, hb_meanvalue_lhs_cached,
                        random_unit_coeffs, rhs_envelope)
from .counting import count_averaged, count_inverse
from .errors import DegenerateFit, MeaninglessRange, ValidationError
from .exact_power import as_cexponent, integer_kth_root, power_floor
from .exponent_pairs import AXIOM, TRIVIAL, pair_table, search_min_theta

DEFAULT_SEEDS = (TRIVIAL, AXIOM)
SLOPE_TOLERANCE = 0.1


def geometric(lo: int, hi: int, ratio: int = 2) -> List[int]:
    """lo, lo*ratio, ... up to hi (integers)."""
    if lo < 1 or hi < lo or ratio < 2:
        raise ValidationError("geometric grid needs 1 <= lo <= hi and ratio >= 2")
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= ratio
    return out


def s_from_rule(N: int, sigma: Fraction) -> int:
    """floor(N^sigma) exactly for rational sigma >= 0."""
    sigma = Fraction(sigma)
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    return max(1, integer_kth_root(N ** sigma.numerator, sigma.denominator))


def best_exponents(c, depth: int = 12, seeds=DEFAULT_SEEDS) -> Dict[str, object]:
    c = as_cexponent(c)
    p1, prof1 = search_min_theta(c, seeds, depth, "theta1")
    pm, profm = search_min_theta(c, seeds, depth, "max_theta")
    return {"best_theta1": prof1.theta1, "best_theta1_pair": str(p1),
            "best_theta1_derivation": p1.label,
            "best_max_theta": max(profm.theta1, profm.theta2),
            "best_max_theta_pair": str(pm), "best_max_theta_derivation": pm.label,
            "profile": profm}


def fixed_envelope(profile, s: int, N: int) -> float:
    r1, t1, r2, t2 = profile.as_floats()
    return s ** -r1 * float(N) ** t1 + s ** -r2 * float(N) ** t2


def predict(c, s: int, N: int, *, depth: int = 12, workers: int = 1,
            timing: bool = False) -> dict:
    """Exact count next to the main term and the error envelope of the best pair."""
    c = as_cexponent(c)
    res = count_inverse(c, s, N, workers=workers)
    main = asy.main_term_fixed(c, s, N)
    prof = best_exponents(c, depth)["profile"]
    env = fixed_envelope(prof, s, N)
    rec = res.to_record(timing)
    rec.update({"main_term": main, "envelope": env, "ratio": abs(res.value - main) / env})
    return rec


def predict_averaged(c, S: int, N: int, *, timing: bool = False) -> dict:
    c = as_cexponent(c)
    res = count_averaged(c, S, N)
    main = asy.main_term_averaged(c, S, N)
    env = asy.error_envelope_averaged(c, S, N)
    rec = res.to_record(timing)
    rec.update({"main_term": main, "envelope": env, "ratio": abs(res.value - main) / env})
    return rec


def verify_asymptotic(c, s: int, N_set: Sequence[int], *, depth: int = 12,
                      workers: int = 1) -> dict:
    """Fit the exponent of |Q - main term| over N_set and compare with theory."""
    c = as_cexponent(c)
    N_set = list(N_set)
    if len(N_set) < 3:
        raise DegenerateFit("verify-asymptotic needs at least 3 values of N")
    if any(b <= a for a, b in zip(N_set, N_set[1:])):
        raise ValidationError("N_set must be strictly ascending")
    rows = []
    for N in N_set:
        Q = count_inverse(c, s, N, workers=workers).value
        main = asy.main_term_fixed(c, s, N)
        rows.append({"N": N, "count": Q, "main_term": main, "residual": Q - main,
                     "relative_error": abs(Q / main - 1)})
    slope, intercept, rms = asy.fit_exponent(
        [(r["N"], max(1.0, abs(r["residual"]))) for r in rows])
    best = best_exponents(c, depth)
    theory = float(best["best_max_theta"])
    main_exp = 1 - float(c) / 2
    rel = [r["relative_error"] for r in rows[-4:]]
    return {
        "command": "verify-asymptotic", "c": c.label, "s": s, "rows": rows,
        "residual_slope": slope, "residual_intercept": intercept, "fit_rms": rms,
        "best_theta1": float(best["best_theta1"]),
        "best_theta1_pair": best["best_theta1_pair"],
        "best_max_theta": theory, "best_max_theta_pair": best["best_max_theta_pair"],
        "main_exponent": main_exp,
        "asymptotic_regime": theory < main_exp,
        "relative_error_decreasing": all(b < a for a, b in zip(rel, rel[1:])),
        "verdict": ("consistent" if slope <= theory + SLOPE_TOLERANCE else "inconsistent")
        + ("" if theory < main_exp else "; formula not asymptotic in this range"),
    }


def verify_average(c, sigma: Fraction, N_set: Sequence[int]) -> dict:
    """Averaged count with S = floor(N^sigma) against main term and envelope."""
    c = as_cexponent(c)
    sigma = Fraction(sigma)
    N_set = list(N_set)
    if len(N_set) < 2 or any(b <= a for a, b in zip(N_set, N_set[1:])):
        raise ValidationError("N_set must be strictly ascending with at least 2 values")
    rows = []
    for N in N_set:
        S = s_from_rule(N, sigma)
        if S > power_floor(N, c):
            raise MeaninglessRange(f"S = N^{sigma} exceeds N^c at N = {N}")
        Q = count_averaged(c, S, N).value
        main = asy.main_term_averaged(c, S, N)
        env = asy.error_envelope_averaged(c, S, N)
        rows.append({"N": N, "S": S, "count": Q, "main_term": main, "envelope": env,
                     "ratio": abs(Q - main) / env, "density": Q / N})
    dens = [r["density"] for r in rows[-4:]]
    decreasing = all(b < a for a, b in zip(dens, dens[1:]))
    try:
        t = asy.tau(c.value)
        tau_val: Optional[float] = float(t)
    except Exception:
        tau_val = None
    regime = tau_val is not None and float(sigma) < tau_val
    verdict = "o(N)" if decreasing else "not decreasing"
    return {"command": "verify-average", "c": c.label, "sigma": sigma, "tau": tau_val,
            "sigma_below_tau": regime, "density_decreasing": decreasing,
            "verdict": verdict, "rows": rows}


def beta_fit(c, q_set: Sequence[int], N_set: Sequence[int]) -> dict:
    beta_hat, rows = estimate_beta(c, q_set, N_set)
    return {"command": "beta-fit", "c": as_cexponent(c).label, "beta_hat": beta_hat,
            "rows": rows}


def hb_meanvalue_table(sizes: Sequence[int], seed: int) -> dict:
    """lhs / ((M + N) sum |a_n|^2) with M = N and seeded random unit a_n."""
    rows = []
    for n in sizes:
        a = random_unit_coeffs(n, seed)
        lhs = hb_meanvalue_lhs(n, n, a)
        cached = hb_meanvalue_lhs_cached(n, n, a)
        rhs = rhs_envelope(n, n, a)
        rows.append({"M": n, "N": n, "seed": seed, "lhs": lhs, "rhs_envelope": rhs,
                     "ratio": lhs / rhs, "cached_agrees": lhs == cached})
    return {"command": "hb-meanvalue", "rows": rows}


def ep_table(c, depth: int, seeds=DEFAULT_SEEDS) -> dict:
    rows = []
    for r in pair_table(c, seeds, depth):
        r = dict(r)
        r["theta1_value"] = float(r["theta1"])
        r["theta2_value"] = float(r["theta2"])
        rows.append(r)
    return {"command": "ep-table", "c": as_cexponent(c).label, "depth": depth, "rows": rows}
