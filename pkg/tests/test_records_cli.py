import csv
import io
import json
import random
from fractions import Fraction

import pytest

from pssq.cli import ExperimentConfig, main, parse_int, parse_int_list, parse_sigma, run
from pssq.counting import cached_count, count_direct, count_inverse
from pssq.errors import ValidationError
from pssq.records import (ResultCache, cache_key, format_float, to_csv, to_json,
                          write_atomic)


def test_format_float_round_trips():
    rng = random.Random(1)
    for _ in range(1000):
        x = rng.uniform(-1e6, 1e6) * 10 ** rng.randint(-20, 20)
        assert float(format_float(x)) == x
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(3.0) == "3.0"


def test_to_json_plain_values():
    out = to_json({"f": Fraction(3, 2), "z": 1 + 2j, "n": 3, "x": 0.5, "b": True, "l": []})
    assert json.loads(out) == {"f": "3/2", "z": {"re": 1.0, "im": 2.0}, "n": 3, "x": 0.5,
                               "b": True, "l": []}


def test_to_csv_header_union():
    text = to_csv([{"a": 1, "b": 0.25}, {"a": 2, "c": "x"}])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows == [["a", "b", "c"], ["1", "0.25", ""], ["2", "", "x"]]


def test_write_atomic(tmp_path):
    p = tmp_path / "sub" / "out.json"
    write_atomic(str(p), "one\n")
    write_atomic(str(p), "two\n")
    assert p.read_text() == "two\n"
    assert [f.name for f in p.parent.iterdir()] == ["out.json"]


def test_cache_key_sorted():
    assert cache_key("count", {"s": 1, "c": "3/2"}) == cache_key("count", {"c": "3/2", "s": 1})


def test_cache_first_write_wins(tmp_path):
    cache = ResultCache(str(tmp_path / "cache.csv"))
    cache.put("k", {"value": 1})
    cache.put("k", {"value": 2})
    assert cache.get("k") == {"value": 1}
    assert ResultCache(str(tmp_path / "cache.csv")).keys() == ["k"]


def test_cache_coherence_random_replays(tmp_path):
    path = str(tmp_path / "cache.csv")
    rng = random.Random(20)
    cs = ["3/2", "5/4", "7/4", "5/2"]
    for _ in range(20):
        c, s, N = rng.choice(cs), rng.randint(1, 10), rng.randint(10, 5000)
        first = cached_count(ResultCache(path), c, s, N)
        again = cached_count(ResultCache(path), c, s, N)
        fresh = count_inverse(c, s, N)
        assert first.value == again.value == fresh.value == count_direct(c, s, N).value


def test_parsers():
    assert parse_int("2^10") == 1024 and parse_int("1e6") == 10 ** 6
    assert parse_int_list("10:40:10") == [10, 20, 30, 40]
    assert parse_int_list("geometric 4 64") == [4, 8, 16, 32, 64]
    assert parse_int_list("geometric 1 100 10") == [1, 10, 100]
    assert parse_int_list("3,5,7") == [3, 5, 7]
    assert parse_sigma("N^1/2") == Fraction(1, 2) and parse_sigma("7") is None
    with pytest.raises(ValidationError):
        parse_int("x")


def test_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig("x", "nope")
    with pytest.raises(ValidationError):
        ExperimentConfig("x", "count", seed=-1)


def _cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_count(capsys):
    code, out, _ = _cli(capsys, "count", "--c", "3/2", "--s", "1", "--N", "20")
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == 3 and "elapsed_ms" not in rec


def test_cli_exit_codes(capsys):
    code, _, err = _cli(capsys, "count", "--c", "3/1", "--N", "20")
    assert code == 2 and "not in N" in err
    assert _cli(capsys, "count", "--c", "3/2")[0] == 2
    assert _cli(capsys, "count", "--c", "3/2", "--N", "1e9", "--oracle", "direct")[0] == 3
    assert _cli(capsys, "count-avg", "--c", "3/2", "--S", "2000", "--N", "100")[0] == 2
    assert _cli(capsys, "bogus")[0] == 2


def test_cli_ep_table_axiom_row(capsys):
    code, out, _ = _cli(capsys, "ep-table", "--c", "1.05", "--depth", "6", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    axiom = [r for r in rows if r["derivation"] == "axiom"]
    assert len(axiom) == 1
    assert float(axiom[0]["theta1_value"]) == pytest.approx((18 + 37 * 1.05) / 130, rel=1e-15)


def test_cli_vaaler_and_sieve_aliases(capsys):
    code, out, _ = _cli(capsys, "vaaler", "check", "--H", "1,2,4", "--grid", "200")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["H"] for r in rows] == [1, 2, 4]
    assert all(r["max_defect_minus_majorant"] <= 1e-9 for r in rows)
    code, out, _ = _cli(capsys, "sieve", "demo", "--c", "5/2", "--N", "1000", "--P", "20")
    assert code == 0 and json.loads(out)["holds"] is True


def test_cli_other_commands(capsys):
    code, out, _ = _cli(capsys, "charsum", "--c", "3/2", "--q", "3", "--N", "4")
    assert code == 0 and json.loads(out)["T_real"] == -2
    code, out, _ = _cli(capsys, "optimize", "--terms", "1*Z^1,4*Z^-1", "--Z2", "100")
    rec = json.loads(out)
    assert code == 0 and rec["Z"] == pytest.approx(2.0) and rec["K"] == 3
    code, out, _ = _cli(capsys, "predict", "--c", "3/2", "--N", "1000")
    assert code == 0 and json.loads(out)["value"] == count_direct("3/2", 1, 1000).value
    code, out, _ = _cli(capsys, "verify-asymptotic", "--c", "3/2", "--N", "geometric 2^10 2^20")
    rep = json.loads(out)
    assert code == 0 and "not asymptotic" in rep["verdict"]
    assert rep["residual_slope"] <= 0.5 + 0.1
    assert _cli(capsys, "verify-asymptotic", "--c", "3/2", "--N", "1024")[0] == 2


def test_cli_out_file_and_determinism(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"hb{i}.csv"
        assert main(["hb-meanvalue", "--N", "50,100", "--seed", "7", "--format", "csv",
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert main(["hb-meanvalue", "--N", "50,100", "--seed", "8", "--format", "csv",
                 "--out", str(tmp_path / "other.csv")]) == 0
    assert (tmp_path / "other.csv").read_bytes() != outs[0]


def test_run_with_cache(tmp_path):
    cfg = ExperimentConfig("c", "count", {"c": "5/2", "s": "3", "N": "1000"},
                           cache=str(tmp_path / "cache.csv"), output=str(tmp_path / "o.json"))
    assert run(cfg) == 0
    first = (tmp_path / "o.json").read_bytes()
    assert run(cfg) == 0
    assert (tmp_path / "o.json").read_bytes() == first
    assert json.loads(first)["value"] == 3
