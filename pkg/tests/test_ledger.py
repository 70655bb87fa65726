import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permext.ledger import (BoundRecord, Ledger, PAFormatError, compare_to_paper, conjecture_check,
                            conjecture_rhs, conjecture_scan, embedded_mols_counts, format_pa,
                            macneish_bound, mols_count, parse_pa, published_bounds,
                            published_new_bound, read_pa, write_pa)
from permext.perm import PermutationArray


@given(st.integers(1, 9), st.integers(0, 12), st.integers(0, 2**31))
def test_pa_roundtrip_bytes(n, m, seed):
    rng = np.random.default_rng(seed)
    rows = np.unique(np.array([rng.permutation(n) for _ in range(m)]).reshape(m, n), axis=0)
    A = PermutationArray(rows, n,
                         meta={"family": "test", "q": 7, "note": "has space", "reps": [[1, 0]]})
    text = format_pa(A, d=2)
    B = parse_pa(text)
    assert np.array_equal(A.rows, B.rows) and B.meta["d"] == 2
    assert format_pa(B) == text


def test_golden_file_bytes(data_dir, tmp_path):
    path = f"{data_dir}/golden/agl4_simple_ext.pa"
    A = read_pa(path)
    assert len(A) == 12 and A.n == 5 and A.meta["source"] == "transcribed"
    out = write_pa(A, tmp_path / "x.pa")
    assert open(out, "rb").read() == open(path, "rb").read()


def test_pa_errors_carry_line_numbers():
    with pytest.raises(PAFormatError) as exc:
        parse_pa("# n=3 count=2\n0 1 2\n0 0 1\n")
    assert exc.value.line == 3 and "bijectivity" in str(exc.value)
    with pytest.raises(PAFormatError, match="count"):
        parse_pa("# n=3 count=3\n0 1 2\n")
    with pytest.raises(PAFormatError, match="symbols"):
        parse_pa("0 1 2\n0 1\n")
    with pytest.raises(PAFormatError, match="CR"):
        parse_pa("0 1\r\n")
    assert len(parse_pa("0 0 1\n", validate=False)) == 1


def test_record_bound_is_monotone(tmp_path):
    path = str(tmp_path / "ledger.csv")
    led = Ledger(path)
    led.record_bound(BoundRecord(39, 37, 1301, "sequential", "constructed", "a.pa", "full"))
    led.record_bound(BoundRecord(39, 37, 195, "coset", "constructed", "b.pa", "full"))
    assert led.get(39, 37).bound == 1301
    assert len(led.history) == 2
    again = Ledger(path)
    assert again.get(39, 37).bound == 1301 and len(again.history) == 2
    assert Ledger.from_csv(led.to_csv()).to_csv() == led.to_csv()


def test_constructed_needs_artifact():
    with pytest.raises(ValueError):
        BoundRecord(39, 37, 1301, "x", "constructed")
    with pytest.raises(ValueError):
        BoundRecord(39, 37, 1301, "x", "guess")
    with pytest.raises(ValueError):
        BoundRecord(39, 37, 0, "x", "paper-table")
    BoundRecord(39, 37, 1301, "x", "paper-table")


def test_compare_to_published():
    led = Ledger()
    led.record_bound(BoundRecord(39, 37, 1301, "seq", "constructed", "a.pa", "full"))
    led.record_bound(BoundRecord(118, 117, 936, "kron", "constructed", "b.pa", "full"))
    led.record_bound(BoundRecord(18, 13, 100, "coset", "constructed", "c.pa", "coset"))
    led.record_bound(BoundRecord(7, 6, 42, "x", "constructed", "d.pa", "full"))
    led.record_bound(BoundRecord(24, 19, 1, "x", "paper-table"))
    verdicts = {(r["n"], r["d"]): r["verdict"] for r in compare_to_paper(led)}
    assert verdicts == {(7, 6): "absent", (18, 13): "fall-short", (39, 37): "match", (118, 117): "match"}


def test_published_bounds_well_formed():
    rows = published_bounds()
    assert rows
    for r in rows:
        assert r["source"] and r["new"] > 0 and r["n"] > r["d"] >= 2
    assert published_new_bound(39, 37) == 1301
    assert published_new_bound(5, 4) is None


def test_mols_provenance_present():
    for e in embedded_mols_counts().values():
        assert e.provenance.strip() and e.N_lower >= 1


@pytest.mark.parametrize("n,expected", [(2, 1), (6, 1), (12, 2), (15, 2), (117, 8), (144, 8), (35, 4)])
def test_macneish(n, expected):
    assert macneish_bound(n) == expected


def test_mols_count_sources():
    assert mols_count(13).N_lower == 12
    assert mols_count(10).N_lower == 1 and "MacNeish" in mols_count(10).provenance
    assert mols_count(144).N_lower == 10


def test_conjecture_exceptions():
    res = conjecture_scan()
    assert [r["status"] for r in res] == ["exception"] * 4
    assert [r["conjectured"] for r in res] == [1440, 2288, 2912, 3036]


def test_conjecture_holds_for_prime_power_case():
    # n-1 = 9: RHS = 9 * min(3, 8) = 27
    assert conjecture_rhs(10, 8) == 27
    assert conjecture_check(10, 27)["status"] == "holds"
    assert conjecture_check(10, 26)["status"] == "exception"
    with pytest.raises(KeyError):
        conjecture_check(11, 5, mols_counts={}, require_embedded=True)
