"""Command-line front end.

    pssq <command> [--c p/q] [--s int] [--S int|rule] [--N int|range] [--P int]
                   [--q modulus] [--pair k,l] [--depth int] [--H list] [--seed u64]
                   [--threads int] [--format json|csv] [--out path]

Integer ranges are written ``lo:hi:step``, ``geometric lo hi [ratio]`` or as a
comma list; ``2^k`` is accepted wherever an integer is. S may be an integer or
a rule ``N^sigma``. Exit codes: 0 success, 2 invalid input, 3 resource limit.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from . import asymptotics as asy
from . import experiments as ex
from .charsieve import RealCharacter, char_sum_T, sieve_count_estimate
from .counting import (count_averaged, count_direct, count_dyadic, count_inverse, cached_count)
from .errors import AmbiguousFloor, PssqError, ResourceLimit, ValidationError
from .exact_power import CExponent
from .exponent_pairs import AXIOM, TRIVIAL, parse_pair
from .records import ResultCache, to_csv, to_json, write_atomic
from .vaaler import vaaler_grid_check

COMMANDS = ("count", "count-avg", "predict", "verify-asymptotic", "verify-average", "sieve",
            "charsum", "beta-fit", "ep-table", "vaaler-check", "optimize", "hb-meanvalue")
# two-word spellings accepted on the command line
_ALIASES = {("vaaler", "check"): "vaaler-check", ("sieve", "demo"): "sieve"}


@dataclass
class ExperimentConfig:
    name: str
    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output: Optional[str] = None
    format: str = "json"
    threads: int = 1
    cache: Optional[str] = None
    timing: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ValidationError("format must be json or csv")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")


# ---------------------------------------------------------------------------
# parameter parsing

def parse_int(text) -> int:
    if isinstance(text, int):
        return text
    t = str(text).strip().replace("_", "")
    m = re.fullmatch(r"(\d+)\^(\d+)", t)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    m = re.fullmatch(r"(\d+)e(\d+)", t)
    if m:
        return int(m.group(1)) * 10 ** int(m.group(2))
    try:
        return int(t)
    except ValueError:
        raise ValidationError(f"expected an integer, got {text!r}") from None


def parse_int_list(text) -> List[int]:
    """An integer, ``lo:hi:step``, ``geometric lo hi [ratio]`` or a comma list."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [parse_int(v) for v in text]
    t = str(text).strip()
    if t.startswith("geometric"):
        parts = t.split()[1:]
        if len(parts) not in (2, 3):
            raise ValidationError("geometric grid syntax: 'geometric lo hi [ratio]'")
        vals = [parse_int(p) for p in parts]
        return ex.geometric(*vals)
    if ":" in t:
        parts = [parse_int(p) for p in t.split(":")]
        if len(parts) == 2:
            parts.append(1)
        lo, hi, step = parts
        if step < 1 or hi < lo:
            raise ValidationError(f"bad range {t!r}")
        return list(range(lo, hi + 1, step))
    return [parse_int(p) for p in t.split(",") if p.strip()]


def parse_sigma(text) -> Optional[Fraction]:
    """``N^sigma`` -> sigma (also ``sqrt``); None if the text is a plain integer."""
    t = str(text).strip().replace(" ", "")
    if t in ("sqrt", "sqrt(N)"):
        return Fraction(1, 2)
    m = re.fullmatch(r"N\^\(?([0-9./]+)\)?", t)
    if m:
        try:
            return Fraction(m.group(1))
        except ValueError:
            raise ValidationError(f"bad S rule {text!r}") from None
    return None


def parse_terms(text: str) -> List[asy.MonomialTerm]:
    """Comma-separated ``A*Z^a`` terms; a negative exponent means a descending term."""
    out = []
    for raw in str(text).split(","):
        t = raw.strip().replace(" ", "")
        m = re.fullmatch(r"([0-9.e+-]+)\*?Z\^\(?(-?[0-9./]+)\)?", t)
        if not m:
            raise ValidationError(f"cannot parse term {raw!r}; expected A*Z^a")
        coef, exp = float(m.group(1)), Fraction(m.group(2))
        if exp == 0:
            raise ValidationError("term exponents must be nonzero")
        out.append(asy.MonomialTerm(coef, abs(exp), "ascending" if exp > 0 else "descending"))
    return out


def _need(params: Dict[str, Any], *names):
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ValidationError("missing parameter(s): " + ", ".join("--" + n for n in missing))


# ---------------------------------------------------------------------------
# commands

def _single_or_many(rows: List[dict]) -> Any:
    return rows[0] if len(rows) == 1 else {"rows": rows}


def _cmd_count(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c", "N")
    c = CExponent.parse(p["c"])
    s_list = parse_int_list(p.get("s") or 1)
    oracle = p.get("oracle") or "inverse"
    fns = {"direct": count_direct, "inverse": count_inverse, "dyadic": count_dyadic}
    if oracle not in fns:
        raise ValidationError(f"oracle must be one of {sorted(fns)}")
    cache = ResultCache(cfg.cache) if cfg.cache else None
    rows = []
    for s in s_list:
        for N in parse_int_list(p["N"]):
            if cache is not None:
                res = cached_count(cache, c, s, N, oracle)
            else:
                res = fns[oracle](c, s, N, workers=cfg.threads)
            rows.append(res.to_record(cfg.timing))
    return _single_or_many(rows)


def _resolve_S(p, N: int) -> int:
    sigma = parse_sigma(p["S"])
    return ex.s_from_rule(N, sigma) if sigma is not None else parse_int(p["S"])


def _cmd_count_avg(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c", "S", "N")
    c = CExponent.parse(p["c"])
    rows = []
    for N in parse_int_list(p["N"]):
        rows.append(count_averaged(c, _resolve_S(p, N), N).to_record(cfg.timing))
    return _single_or_many(rows)


def _cmd_predict(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c", "N")
    c = CExponent.parse(p["c"])
    depth = parse_int(p.get("depth") or 12)
    rows = []
    for N in parse_int_list(p["N"]):
        if p.get("S") is not None:
            rows.append(ex.predict_averaged(c, _resolve_S(p, N), N, timing=cfg.timing))
        else:
            rows.append(ex.predict(c, parse_int(p.get("s") or 1), N, depth=depth,
                                   workers=cfg.threads, timing=cfg.timing))
    return _single_or_many(rows)


def _cmd_verify_asymptotic(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c")
    c = CExponent.parse(p["c"])
    Ns = parse_int_list(p.get("N") or "geometric 2^10 2^30")
    return ex.verify_asymptotic(c, parse_int(p.get("s") or 1), Ns,
                                depth=parse_int(p.get("depth") or 12), workers=cfg.threads)


def _cmd_verify_average(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c")
    c = CExponent.parse(p["c"])
    sigma = parse_sigma(p.get("S") or "N^1/2")
    if sigma is None:
        raise ValidationError("verify-average needs --S as a rule N^sigma")
    Ns = parse_int_list(p.get("N") or "geometric 2^10 2^22")
    return ex.verify_average(c, sigma, Ns)


def _cmd_sieve(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c", "N", "P")
    c = CExponent.parse(p["c"])
    rows = []
    for N in parse_int_list(p["N"]):
        for P in parse_int_list(p["P"]):
            for s in parse_int_list(p.get("s") or 1):
                rows.append(sieve_count_estimate(c, s, N, P).to_record())
    return _single_or_many(rows)


def _cmd_charsum(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c", "q", "N")
    c = CExponent.parse(p["c"])
    rows = []
    for q in parse_int_list(p["q"]):
        chi = RealCharacter(q)
        for N in parse_int_list(p["N"]):
            T = char_sum_T(c, chi, N)
            rows.append({"c": c.label, "q": q, "N": N, "T_real": T, "T_abs": abs(T),
                         "normalized": abs(T) / math.sqrt(q) / N})
    return _single_or_many(rows)


def _cmd_beta_fit(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c")
    return ex.beta_fit(CExponent.parse(p["c"]), parse_int_list(p.get("q") or "3,5,7,143"),
                       parse_int_list(p.get("N") or "10^3,10^4,10^5,10^6"))


def _cmd_ep_table(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "c")
    seeds = [TRIVIAL, AXIOM]
    if p.get("pair"):
        seeds.append(parse_pair(p["pair"]))
    return ex.ep_table(CExponent.parse(p["c"]), parse_int(p.get("depth") or 6), seeds)


def _cmd_vaaler(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    Hs = parse_int_list(p.get("H") or "1,2,4,8,16,32,64")
    grid = parse_int(p.get("grid") or 1000)
    res = vaaler_grid_check(Hs, grid)
    return {"command": "vaaler-check", "grid": grid, "rows": [res[H] for H in Hs]}


def _cmd_optimize(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    _need(p, "terms", "Z2")
    terms = parse_terms(p["terms"])
    Z1, Z2 = float(p.get("Z1") or 0.0), float(p["Z2"])
    Z, bound = asy.optimize_monomials(terms, Z1, Z2)
    u = sum(t.direction == "ascending" for t in terms)
    v = len(terms) - u
    return {"command": "optimize", "Z1": Z1, "Z2": Z2, "Z": Z, "bound": bound,
            "L_at_Z": asy.evaluate_terms(terms, Z), "K": u * v + u + v}


def _cmd_hb(cfg: ExperimentConfig) -> Any:
    p = cfg.parameters
    return ex.hb_meanvalue_table(parse_int_list(p.get("N") or "10^2,10^3"), cfg.seed)


_HANDLERS = {
    "count": _cmd_count, "count-avg": _cmd_count_avg, "predict": _cmd_predict,
    "verify-asymptotic": _cmd_verify_asymptotic, "verify-average": _cmd_verify_average,
    "sieve": _cmd_sieve, "charsum": _cmd_charsum, "beta-fit": _cmd_beta_fit,
    "ep-table": _cmd_ep_table, "vaaler-check": _cmd_vaaler, "optimize": _cmd_optimize,
    "hb-meanvalue": _cmd_hb,
}


def render(result: Any, fmt: str) -> str:
    if fmt == "json":
        return to_json(result)
    if isinstance(result, dict) and "rows" in result:
        return to_csv(result["rows"])
    return to_csv([result])


def execute(cfg: ExperimentConfig) -> str:
    """Run the configured command and return the rendered output text."""
    return render(_HANDLERS[cfg.command](cfg), cfg.format)


def run(config: ExperimentConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text = execute(config)
    except ResourceLimit as exc:
        print(f"pssq: resource limit: {exc}", file=stderr)
        return 3
    except (ValidationError, AmbiguousFloor) as exc:
        print(f"pssq: invalid input: {exc}", file=stderr)
        return 2
    except PssqError as exc:
        print(f"pssq: error: {exc}", file=stderr)
        return 2
    if config.output:
        write_atomic(config.output, text)
    else:
        stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argv

_PARAMS = ("c", "s", "S", "N", "P", "q", "pair", "depth", "H", "grid", "oracle",
           "terms", "Z1", "Z2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pssq", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--c", help="exponent p/q (or ~x for approximate mode)")
    ap.add_argument("--s", help="multiplier s, or a list of them")
    ap.add_argument("--S", help="bound S as an integer or rule N^sigma")
    ap.add_argument("--N", help="N as an integer, lo:hi:step, 'geometric lo hi [ratio]' or list")
    ap.add_argument("--P", help="sieve prime scale P (list allowed)")
    ap.add_argument("--q", help="modulus or list of moduli")
    ap.add_argument("--pair", help="extra exponent-pair seed 'kappa,lambda'")
    ap.add_argument("--depth", help="A/B derivation depth")
    ap.add_argument("--H", help="list of H values")
    ap.add_argument("--grid", help="number of grid points in [0, 1)")
    ap.add_argument("--oracle", choices=("direct", "inverse", "dyadic"))
    ap.add_argument("--terms", help="optimizer terms, e.g. '1*Z^1,1*Z^-1'")
    ap.add_argument("--Z1", help="optimizer lower end (exclusive)")
    ap.add_argument("--Z2", help="optimizer upper end")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--out", help="output path (written atomically); default stdout")
    ap.add_argument("--cache", help="append-only CSV result cache (count only)")
    ap.add_argument("--timing", action="store_true", help="include elapsed_ms in records")
    return ap


def config_from_argv(argv: Sequence[str]) -> ExperimentConfig:
    argv = list(argv)
    if len(argv) >= 2 and (argv[0], argv[1]) in _ALIASES:
        argv = [_ALIASES[(argv[0], argv[1])]] + argv[2:]
    ns = build_parser().parse_args(argv)
    params = {k: getattr(ns, k) for k in _PARAMS if getattr(ns, k) is not None}
    return ExperimentConfig(name=ns.command, command=ns.command, parameters=params,
                            seed=ns.seed, output=ns.out, format=ns.format,
                            threads=ns.threads, cache=ns.cache, timing=ns.timing)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_argv(sys.argv[1:] if argv is None else argv)
    except ValidationError as exc:
        print(f"pssq: invalid input: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
