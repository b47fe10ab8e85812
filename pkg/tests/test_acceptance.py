"""Acceptance suite: one test (or a small group) per criterion, reported by number.

A summary line per criterion is printed at the end of the run by conftest.py.
"""

import json
import math
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from pssq import asymptotics as asy
from pssq.arith import primes_upto
from pssq.charsieve import jacobi, sieve_count_estimate
from pssq.cli import main
from pssq.counting import (count_direct, count_dyadic, count_inverse_batch,
                           within_trivial_bound)
from pssq.exact_power import power_floor
from pssq.experiments import geometric, verify_asymptotic, verify_average
from pssq.exponent_pairs import AXIOM, ExponentPair, b_process
from pssq.sequence import power_floor_values
from pssq.vaaler import vaaler_coeffs, vaaler_grid_check

HALF = F(1, 2)
GRID_C = ["5/4", "3/2", "7/4", "5/2", "7/2"]
GRID_S = range(1, 51)
GRID_N = [10 ** 3, 10 ** 4, 10 ** 5]


def _rational_c_grid(qmax=7, cmax=4):
    out = []
    for q in range(2, qmax + 1):
        for p in range(q + 1, cmax * q):
            if math.gcd(p, q) == 1:
                out.append(F(p, q))
    return out


@pytest.mark.criterion(1, "exact power floor, n <= 1e4, c = p/q with q <= 7")
def test_c01_power_floor_exact():
    t0 = time.perf_counter()
    rng = random.Random(1)
    cs = _rational_c_grid()
    for c in cs:
        p, q = c.numerator, c.denominator
        table = power_floor_values(c, 1, 10 ** 4).tolist()
        for n, k in enumerate(table, start=1):
            np_ = n ** p
            assert k ** q <= np_ < (k + 1) ** q, (c, n)
        for n in rng.sample(range(1, 10 ** 4 + 1), 200):
            assert power_floor(n, c) == table[n - 1]
    assert time.perf_counter() - t0 < 30


@pytest.fixture(scope="module")
def count_grid():
    """Direct and inverse counts on the (c, s, N) grid, plus Q at N/2 and Q* at N."""
    t0 = time.perf_counter()
    rows = []
    for c in GRID_C:
        for N in GRID_N:
            inv = count_inverse_batch(c, GRID_S, N)
            for s in GRID_S:
                rows.append({"c": c, "s": s, "N": N, "direct": count_direct(c, s, N).value,
                             "inverse": inv[s], "half": count_direct(c, s, N // 2).value,
                             "dyadic": count_dyadic(c, s, N).value})
    return rows, time.perf_counter() - t0


@pytest.mark.criterion(2, "direct = inverse oracle and dyadic split on 5x50x3 grid")
def test_c02_dual_oracle(count_grid):
    rows, secs = count_grid
    assert len(rows) == 5 * 50 * 3
    bad = [r for r in rows if r["direct"] != r["inverse"]]
    assert not bad, bad[:5]
    split = [r for r in rows if r["direct"] != r["half"] + r["dyadic"]]
    assert not split, split[:5]
    assert secs < 300


@pytest.mark.criterion(3, "known values Q_3/2(1;20) = Q_3/2(2;20) = 3")
def test_c03_known_values():
    for s in (1, 2):
        brute = sum(1 for n in range(1, 21)
                    if any(s * v * v == power_floor(n, "3/2") for v in range(1, 10)))
        assert brute == 3
        assert count_direct("3/2", s, 20).value == 3
        assert count_inverse_batch("3/2", [s], 20)[s] == 3


@pytest.mark.criterion(4, "trivial bound holds exactly on the criterion-2 grid")
def test_c04_trivial_bound(count_grid):
    rows, _ = count_grid
    for r in rows:
        assert within_trivial_bound(r["direct"], r["c"], r["s"], r["N"]), r


@pytest.mark.criterion(5, "exponent algebra: profiles, tau(12/7), B o B = id")
def test_c05_exponent_algebra():
    for c in (F(21, 20), F(3, 2), F(5, 2), F(39, 10)):
        a = asy.error_profile(c, AXIOM)
        assert (a.rho1, a.theta1, a.rho2, a.theta2) == (
            F(37, 130), (18 + 37 * c) / 130, F(1, 4), (9 + 14 * c) / 56)
        h = asy.error_profile(c, ExponentPair(HALF, HALF))
        assert (h.rho1, h.theta1, h.theta2) == (F(1, 6), (2 + c) / 6, HALF)
    brk = F(12, 7)
    assert (8 - 3 * brk) / 5 == 2 * (2 - brk) == F(4, 7) == asy.tau(brk)
    rng = random.Random(5)
    for _ in range(1000):
        p = ExponentPair(F(rng.randint(0, 10 ** 6), 2 * 10 ** 6),
                         F(rng.randint(10 ** 6, 2 * 10 ** 6), 2 * 10 ** 6))
        assert b_process(b_process(p)) == p


@pytest.mark.criterion(6, "Vaaler inequality and majorant sign on the (t, H) grid")
def test_c06_vaaler_inequality():
    t0 = time.perf_counter()
    for H, row in vaaler_grid_check([1, 2, 4, 8, 16, 32, 64], 1000).items():
        assert row["max_defect_minus_majorant"] <= 1e-9, row
        assert row["min_majorant"] >= -1e-9, row
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion(6, "Vaaler a(+-1) = 0 at H = 1")
def test_c06_vaaler_a1_vanishes_at_H1():
    co = vaaler_coeffs(1)
    assert abs(co.a_of(1)) <= 1e-12 and abs(co.a_of(-1)) <= 1e-12


@pytest.mark.criterion(7, "square sieve inequality with constant 10")
def test_c07_square_sieve():
    t0 = time.perf_counter()
    for c in ("5/2", "7/2"):
        for N in (10 ** 3, 10 ** 4):
            for P in (20, 50, 100):
                for s in (1, 2, 3):
                    rep = sieve_count_estimate(c, s, N, P)
                    assert rep.lhs <= rep.rhs, rep.to_record()
    assert time.perf_counter() - t0 < 120


@pytest.mark.criterion(8, "Jacobi: Euler criterion for p < 1e4, multiplicativity grids")
def test_c08_jacobi():
    t0 = time.perf_counter()
    for p in primes_upto(10 ** 4).tolist()[1:]:
        e = (p - 1) // 2
        for k in range(p):
            r = pow(k, e, p)
            assert jacobi(k, p) == (r if r < 2 else -1), (k, p)
    ks = np.arange(1, 1001)
    for q in (3, 15, 105, 999, 1001, 9999):
        tab = np.array([jacobi(k, q) for k in range(q)])
        lhs = tab[np.outer(ks, ks) % q]
        rhs = np.outer(tab[ks % q], tab[ks % q])
        assert np.array_equal(lhs, rhs), q
    odd = list(range(1, 1000, 2))
    for k in (2, -1, 7, 1234567):
        row = {q: jacobi(k, q) for q in odd}
        for q1 in odd:
            for q2 in odd[::7]:
                assert jacobi(k, q1 * q2) == row[q1] * row[q2], (k, q1, q2)
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion(9, "asymptotic trend at c = 21/20, N = 2^14..2^30")
def test_c09_asymptotic_trend():
    t0 = time.perf_counter()
    rep = verify_asymptotic(F(21, 20), 1, geometric(2 ** 14, 2 ** 30))
    print("residual slope", rep["residual_slope"], "best theta1", rep["best_theta1"])
    assert rep["residual_slope"] <= rep["best_theta1"] + 0.1
    rel = [r["relative_error"] for r in rep["rows"][-4:]]
    assert all(b < a for a, b in zip(rel, rel[1:])), rel
    assert time.perf_counter() - t0 < 120


@pytest.mark.criterion(10, "averaged density decreasing, c = 3/2, S = N^1/2")
def test_c10_averaged_trend():
    t0 = time.perf_counter()
    rep = verify_average(F(3, 2), HALF, geometric(2 ** 10, 2 ** 22))
    dens = [r["density"] for r in rep["rows"][-4:]]
    assert all(b < a for a, b in zip(dens, dens[1:])), dens
    assert rep["verdict"] == "o(N)"
    assert time.perf_counter() - t0 < 300


@pytest.mark.criterion(11, "square-free harmonic sum vs (12/pi^2) sqrt S up to 1e6")
def test_c11_phi_approximation():
    t0 = time.perf_counter()
    S = np.arange(1, 10 ** 6 + 1)
    phi = asy.phi_table(10 ** 6)[1:]
    gap = np.abs(phi - 12 / math.pi ** 2 * np.sqrt(S))
    assert np.all(gap <= 2 + 2 * np.log(S))
    for s in (1, 10, 999, 10 ** 6):
        assert asy.phi_exact(s) == pytest.approx(phi[s - 1], rel=1e-12)
    assert time.perf_counter() - t0 < 60


def _random_system(rng):
    u, v = rng.randint(1, 3), rng.randint(1, 3)
    terms = [asy.MonomialTerm(10 ** rng.uniform(-2, 2), F(rng.randint(1, 8), rng.randint(1, 4)))
             for _ in range(u)]
    terms += [asy.MonomialTerm(10 ** rng.uniform(-2, 2), F(rng.randint(1, 8), rng.randint(1, 4)),
                               "descending") for _ in range(v)]
    Z1 = rng.choice([0.0, 10 ** rng.uniform(-3, 0)])
    Z2 = Z1 + 10 ** rng.uniform(-1, 3)
    return terms, Z1, Z2, u * v + u + v


@pytest.mark.criterion(12, "monomial optimizer on 100 random systems")
def test_c12_optimizer():
    t0 = time.perf_counter()
    rng = random.Random(12)
    for _ in range(100):
        terms, Z1, Z2, K = _random_system(rng)
        Z, bound = asy.optimize_monomials(terms, Z1, Z2)
        assert Z1 < Z <= Z2
        lo = Z1 if Z1 > 0 else Z2 * 1e-9
        grid = np.geomspace(lo, Z2, 20001)[1:]
        grid_min = min(asy.evaluate_terms(terms, float(z)) for z in grid[::10])
        assert grid_min <= K * bound * (1 + 1e-9)
        assert asy.evaluate_terms(terms, Z) <= K * bound * (1 + 1e-9)
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion(13, "report-only experiments: beta-fit and hb-meanvalue tables")
def test_c13_report_only(capsys):
    t0 = time.perf_counter()
    assert main(["beta-fit", "--c", "5/2", "--q", "3,5,7,143",
                 "--N", "10^3,10^4,10^5,10^6"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["command"] == "beta-fit" and isinstance(rep["beta_hat"], float)
    assert {r["q"] for r in rep["rows"]} == {3, 5, 7, 143}
    keys = {"c", "q", "kind", "N", "T", "T_abs", "normalized", "slope", "beta_hat"}
    assert all(set(r) == keys for r in rep["rows"])
    beta_hat = rep["beta_hat"]

    assert main(["hb-meanvalue", "--N", "10^2,10^3", "--seed", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [r["M"] for r in rep["rows"]] == [100, 1000]
    for r in rep["rows"]:
        assert r["lhs"] >= 0 and r["rhs_envelope"] > 0 and r["cached_agrees"] is True
        assert r["ratio"] == pytest.approx(r["lhs"] / r["rhs_envelope"])
    print("beta_hat", beta_hat, "hb ratios", [r["ratio"] for r in rep["rows"]])
    assert time.perf_counter() - t0 < 600


@pytest.mark.criterion(14, "byte-identical output for repeated runs with one seed")
def test_c14_determinism(tmp_path):
    runs = [
        ["count", "--c", "3/2", "--s", "1,2", "--N", "geometric 2^10 2^16"],
        ["count-avg", "--c", "3/2", "--S", "N^1/2", "--N", "1000,4000"],
        ["predict", "--c", "7/4", "--s", "3", "--N", "10^5"],
        ["verify-asymptotic", "--c", "21/20", "--N", "geometric 2^10 2^18"],
        ["verify-average", "--c", "3/2", "--S", "N^1/2", "--N", "geometric 2^10 2^14"],
        ["sieve", "--c", "5/2", "--N", "1000", "--P", "20,50", "--s", "1,2"],
        ["charsum", "--c", "5/2", "--q", "3,143", "--N", "10^4"],
        ["beta-fit", "--c", "5/2", "--q", "3,5", "--N", "10^3,10^4,10^5"],
        ["ep-table", "--c", "1.05", "--depth", "6"],
        ["vaaler-check", "--H", "1,8", "--grid", "100"],
        ["optimize", "--terms", "2*Z^1/2,3*Z^-1", "--Z1", "0.5", "--Z2", "100"],
        ["hb-meanvalue", "--N", "100,300", "--seed", "42"],
    ]
    for i, argv in enumerate(runs):
        outs = []
        for fmt in ("json", "csv"):
            for rep in range(2):
                path = tmp_path / f"{i}-{fmt}-{rep}"
                assert main(argv + ["--format", fmt, "--seed", "42", "--out", str(path)]) == 0, argv
                outs.append(path.read_bytes())
        assert outs[0] == outs[1] and outs[2] == outs[3], argv
