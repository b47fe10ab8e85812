"""Exponent pairs with exact rational arithmetic and the A/B processes.

Derivations are written as operator words applied right to left: "AB" on
seed P means A(B(P)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

from .asymptotics import ErrorProfile, error_profile
from .errors import InvariantViolation, ValidationError
from .exact_power import as_cexponent

HALF = Fraction(1, 2)
DEPTH_CAP = 12
OBJECTIVES = ("theta1", "theta2", "max_theta")


@dataclass(frozen=True)
class ExponentPair:
    kappa: Fraction
    lam: Fraction
    derivation: str = field(default="", compare=False)
    seed: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        object.__setattr__(self, "lam", Fraction(self.lam))
        if not (0 <= self.kappa <= HALF <= self.lam <= 1):
            raise InvariantViolation(
                f"({self.kappa}, {self.lam}) violates 0 <= kappa <= 1/2 <= lambda <= 1")

    @property
    def key(self) -> Tuple[Fraction, Fraction]:
        return (self.kappa, self.lam)

    @property
    def label(self) -> str:
        word = self.derivation
        return f"{word}({self.seed})" if word else self.seed

    def __str__(self):
        return f"({self.kappa}, {self.lam})"


TRIVIAL = ExponentPair(Fraction(0), Fraction(1), "", "trivial")
AXIOM = ExponentPair(Fraction(9, 56), Fraction(37, 56), "", "axiom")


def parse_pair(text: str) -> ExponentPair:
    """Parse "kappa,lambda" (each a fraction or decimal)."""
    try:
        k, l = (Fraction(t.strip()) for t in text.replace(";", ",").split(","))
    except ValueError as exc:
        raise ValidationError(f"cannot parse exponent pair {text!r}") from exc
    return ExponentPair(k, l, "", "given")


def a_process(p: ExponentPair) -> ExponentPair:
    d = 2 * p.kappa + 2
    return ExponentPair(p.kappa / d, HALF + p.lam / d, "A" + p.derivation, p.seed)


def b_process(p: ExponentPair) -> ExponentPair:
    k, l = p.lam - HALF, p.kappa + HALF
    if not (0 <= k <= HALF <= l <= 1):
        raise InvariantViolation(f"B{p} = ({k}, {l}) leaves the valid region")
    return ExponentPair(k, l, "B" + p.derivation, p.seed)


_PROCESS = {"A": a_process, "B": b_process}


def enumerate_pairs(seeds: Iterable[ExponentPair], depth: int,
                    cap: int = DEPTH_CAP) -> List[ExponentPair]:
    """Closure of ``seeds`` under A/B words of length <= depth.

    Each pair carries its least derivation in shortlex order of the word,
    ties between seeds going to the earlier seed.
    """
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    if depth > cap:
        raise ValidationError(f"depth {depth} exceeds the cap {cap}")
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("at least one seed is required")
    order = {s.seed: i for i, s in reversed(list(enumerate(seeds)))}
    found: Dict[Tuple[Fraction, Fraction], ExponentPair] = {}
    frontier = []
    for s in seeds:
        if s.key not in found:
            found[s.key] = s
            frontier.append(s)
    for _ in range(depth):
        cands = [_PROCESS[letter](p) for p in frontier for letter in "AB"]
        cands.sort(key=lambda q: (q.derivation, order.get(q.seed, 0)))
        frontier = []
        for q in cands:
            if q.key not in found:
                found[q.key] = q
                frontier.append(q)
        if not frontier:
            break
    return list(found.values())


def objective_value(profile: ErrorProfile, objective: str):
    if objective == "theta1":
        return profile.theta1
    if objective == "theta2":
        return profile.theta2
    if objective == "max_theta":
        return max(profile.theta1, profile.theta2)
    raise ValidationError(f"unknown objective {objective!r}; use one of {OBJECTIVES}")


def search_min_theta(c, seeds: Iterable[ExponentPair], depth: int,
                     objective: str = "theta1") -> Tuple[ExponentPair, ErrorProfile]:
    """Pair in the closure minimising the objective at c (ties: smaller kappa, then lambda)."""
    c = as_cexponent(c)
    best = None
    for p in enumerate_pairs(seeds, depth):
        prof = error_profile(c, p)
        key = (objective_value(prof, objective), p.kappa, p.lam)
        if best is None or key < best[0]:
            best = (key, p, prof)
    return best[1], best[2]


def single_sum_bound(h: int, s: int, c, L: int, pair: ExponentPair) -> float:
    """(h s^gamma L^(2 gamma - 1))^kappa L^lambda."""
    if min(h, s, L) < 1:
        raise ValidationError("h, s and L must be positive")
    g = float(as_cexponent(c).gamma)
    return (h * s ** g * L ** (2 * g - 1)) ** float(pair.kappa) * float(L) ** float(pair.lam)


def pair_table(c, seeds: Iterable[ExponentPair], depth: int) -> List[dict]:
    """Rows (derivation, kappa, lambda, rho1, theta1, rho2, theta2) sorted by theta1."""
    c = as_cexponent(c)
    rows = []
    for p in enumerate_pairs(seeds, depth):
        prof = error_profile(c, p)
        rows.append({"derivation": p.label, "kappa": p.kappa, "lambda": p.lam,
                     "rho1": prof.rho1, "theta1": prof.theta1,
                     "rho2": prof.rho2, "theta2": prof.theta2})
    rows.sort(key=lambda r: (r["theta1"], r["kappa"], r["lambda"]))
    return rows
