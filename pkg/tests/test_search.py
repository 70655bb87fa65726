import itertools

import numpy as np
import pytest

from permext.groups import agl1, cyclic_coset_decomposition, pgl2
from permext.perm import PermutationArray, compose
from permext.search import (IlpModel, SearchConfig, brute_force_ilp, contiguous_partition,
                            coset_distance_to_group, decode_partition, decode_permutation,
                            default_symbol_partition, export_lp, filter_representatives,
                            greedy_partition, ilp_coset_model, ilp_partition_model, is_partition,
                            parse_lp, partition_coverage, random_coset_search, rotate_partition,
                            solve_ilp, trivial_partition)

from conftest import brute_cross, greedy_instances


def _random_model(rng, nv):
    m = IlpModel("rand")
    for v in range(nv):
        m.add_var(f"v{v}")
    m.set_objective({f"v{v}": int(rng.integers(-3, 4)) for v in range(nv)})
    for c in range(int(rng.integers(0, 5))):
        vs = rng.choice(nv, int(rng.integers(1, min(nv, 6) + 1)), replace=False)
        terms = {f"v{v}": int(rng.choice([-2, -1, 1, 2])) for v in vs}
        sense = str(rng.choice(["<=", "=", ">="]))
        m.add_constraint(terms, sense, int(rng.integers(-1, 3)))
    return m


@pytest.mark.parametrize("seed", range(100))
def test_builtin_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    m = _random_model(rng, int(rng.integers(1, 21)))
    best, sols = brute_force_ilp(m)
    res = solve_ilp(m, all_optimal=True)
    if best is None:
        assert res.status == "infeasible"
        return
    assert res.status == "optimal" and res.objective == best
    assert {tuple(s) for s in res.solutions} == {tuple(s) for s in sols}
    val, ok = m.evaluate(res.assignment)
    assert ok and val == best


def test_trivial_models():
    m = IlpModel()
    assert solve_ilp(m).objective == 0
    m.add_var("a")
    m.set_objective({"a": 1})
    assert solve_ilp(m).objective == 1
    m.add_constraint({"a": 1}, "=", 1)
    m.add_constraint({"a": 1}, "=", 0)
    assert solve_ilp(m).status == "infeasible"


def test_export_only_and_bad_config():
    m = IlpModel()
    m.add_var("a")
    assert solve_ilp(m, SearchConfig(solver="export-only")).status == "exported"
    with pytest.raises(ValueError):
        SearchConfig(solver="glpk")
    with pytest.raises(ValueError):
        SearchConfig(trial_budget=0)


def test_highs_agrees_on_small_model():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = _random_model(rng, 12)
        best, _ = brute_force_ilp(m)
        res = solve_ilp(m, SearchConfig(solver="highs"))
        if best is None:
            assert res.status in ("infeasible", "no-solution-in-budget")
        else:
            assert res.objective == best


@pytest.fixture(scope="module")
def small_blocks():
    return cyclic_coset_decomposition(agl1(4))


def test_partition_model_optimum(small_blocks):
    Q = [[0, 1], [2, 3]]
    m = ilp_partition_model(small_blocks[:2], Q)
    res = solve_ilp(m)
    assert res.status == "optimal" and res.objective == 8
    P = decode_partition(m, res.assignment)
    assert is_partition(P, 4)
    assert sum(partition_coverage(small_blocks[:2], P, Q)) == 8


def test_lp_roundtrip(small_blocks):
    m = ilp_partition_model(small_blocks[:2], [[0, 1], [2, 3]])
    text = export_lp(m)
    assert text.splitlines()[1] == "Maximize" and text.rstrip().endswith("End")
    assert all(len(line) <= 255 for line in text.splitlines())
    again = export_lp(parse_lp(text))
    assert again.splitlines()[1:] == text.splitlines()[1:]
    assert solve_ilp(parse_lp(text)).objective == 8


def test_lp_parse_handwritten():
    text = "Maximize\n obj: 2 x + y - z\nSubject To\n c1: x + y <= 1\n c2: y + z >= 1\nBinary\n x\n y\n z\nEnd\n"
    m = parse_lp(text)
    best, _ = brute_force_ilp(m)
    assert best == 1 and solve_ilp(m).objective == 1


def test_greedy_small(small_blocks):
    P = greedy_partition(small_blocks[:2], [[0, 1], [2, 3]])
    assert is_partition(P, 4)
    assert sum(partition_coverage(small_blocks[:2], P, [[0, 1], [2, 3]])) == 8


def test_greedy_single_block(small_blocks):
    assert greedy_partition(small_blocks[:1]) == [[0, 1, 2, 3]]
    with pytest.raises(ValueError):
        greedy_partition(small_blocks[:2], [[0, 1, 2, 3]])


def test_default_symbol_partition():
    assert default_symbol_partition(9, 3) == [[0, 1, 2], [3, 4, 5], [6, 7, 8]]
    assert default_symbol_partition(11, 3)[-1] == [6, 7, 8, 9, 10]
    assert is_partition(default_symbol_partition(5, 3), 5)
    assert contiguous_partition(7, 3) == [[0, 1, 2], [3, 4], [5, 6]]
    assert trivial_partition(9, 3) == default_symbol_partition(9, 3)
    with pytest.raises(ValueError):
        default_symbol_partition(3, 4)


def test_rotate_partition():
    assert rotate_partition([[0], [1], [2]]) == [[[0], [1], [2]], [[1], [2], [0]], [[2], [0], [1]]]


@pytest.mark.parametrize("seed", range(12))
def test_ilp_not_worse_than_greedy(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.choice([5, 7]))
    k = int(rng.integers(2, 4))
    pool = cyclic_coset_decomposition(agl1(q))
    blocks = [pool[i] for i in rng.choice(len(pool), k, replace=False)]
    Q = default_symbol_partition(q, k)
    g = sum(partition_coverage(blocks, greedy_partition(blocks, Q), Q))
    m = ilp_partition_model(blocks, Q)
    res = solve_ilp(m)
    assert res.status == "optimal" and res.objective >= g
    assert sum(partition_coverage(blocks, decode_partition(m, res.assignment), Q)) == res.objective


def test_coset_model_derangements():
    G = PermutationArray([[0, 1, 2]])
    m = ilp_coset_model(G, 3)
    res = solve_ilp(m, all_optimal=True)
    perms = sorted(tuple(decode_permutation(m, x)) for x in res.solutions)
    assert perms == [(1, 2, 0), (2, 0, 1)]


def test_coset_model_d0_accepts_anything():
    G = agl1(5)
    res = solve_ilp(ilp_coset_model(G, 0))
    assert res.status == "optimal" and res.objective == 5


def test_coset_model_agl5_d4_brute_force():
    G = agl1(5)
    ok = [p for p in itertools.permutations(range(5)) if coset_distance_to_group(G, np.array(p)) >= 4]
    res = solve_ilp(ilp_coset_model(G, 4))
    if ok:
        rho = decode_permutation(ilp_coset_model(G, 4), res.assignment)
        assert coset_distance_to_group(G, rho) >= 4
    else:
        assert res.status == "infeasible"


def test_coset_model_translations():
    rows = np.array([[(x + b) % 5 for x in range(5)] for b in range(5)])
    G = PermutationArray(rows)
    m = ilp_coset_model(G, 4)
    res = solve_ilp(m, all_optimal=True)
    found = {tuple(decode_permutation(m, x)) for x in res.solutions}
    brute = {p for p in itertools.permutations(range(5))
             if min(int((np.array(p) != r).sum()) for r in rows) >= 4}
    assert found == brute and len(found) > 0


def test_random_search_d0_takes_first():
    G = agl1(5)
    found = random_coset_search(G, 0, cfg=SearchConfig(seed=7, trial_budget=1), max_found=1)
    assert np.array_equal(found[0], np.random.default_rng(7).permutation(5))


def test_random_search_pgl5_verified():
    # PGL(2,5) has index 6 in S_6; at distance 2 every other coset qualifies
    G = pgl2(5)
    found = random_coset_search(G, 2, cfg=SearchConfig(seed=1, trial_budget=400))
    assert len(found) == 5
    cosets = [G.rows] + [G.rows[:, rho] for rho in found]
    for i in range(len(cosets)):
        for j in range(i + 1, len(cosets)):
            assert brute_cross(cosets[i], cosets[j]) >= 2
    assert filter_representatives(G, found, 2)["passed"]
    assert not filter_representatives(G, found, 3)["passed"]
    assert coset_distance_to_group(G, np.arange(6)) == 0


def test_random_search_deterministic():
    G = pgl2(5)
    cfg = SearchConfig(seed=11, trial_budget=200)
    a = random_coset_search(G, 2, cfg=cfg)
    b = random_coset_search(G, 2, cfg=cfg)
    assert [x.tolist() for x in a] == [x.tolist() for x in b]


def test_filter_rejects_close_reps():
    G = agl1(5)
    rho = np.array([1, 0, 2, 3, 4])
    rep = filter_representatives(G, [rho, compose(rho, np.arange(5))], 3)
    assert rep["min_pairwise"] == 0 and not rep["passed"]


def _greedy_vs(baseline):
    worse = 0
    for blocks, k, q in greedy_instances(50, seed=0):
        Q = default_symbol_partition(q, k)
        g = sum(partition_coverage(blocks, greedy_partition(blocks, Q), Q))
        t = sum(partition_coverage(blocks, baseline(q, k), Q))
        worse += g < t
    return worse


def test_greedy_never_below_trivial():
    assert _greedy_vs(trivial_partition) == 0


@pytest.mark.xfail(strict=True, reason="greedy is myopic; equal-length split beats it on a few instances")
def test_greedy_never_below_equal_split():
    assert _greedy_vs(contiguous_partition) == 0
