import numpy as np
import pytest

from pcman import manip
from pcman.core import Method, consistent_from_weights, consistency_index, derive, rank_of, validate
from pcman.exceptions import AlphaOutOfRange, InvalidIndices, NoSwapAchieved
from pcman.manip import (
    Algorithm,
    ManipulationRequest,
    find_m,
    matrix_compute_changes,
    respos,
    row_compute_changes,
)

from oracles import (
    alpha_grid,
    find_m_oracle,
    matrix_listing,
    random_pc,
    rank_oracle,
    row_listing,
    weights_oracle,
)

P, Q = 2, 1  # alternatives 3 and 2 of the worked examples


# -- row heuristic ------------------------------------------------------------------

def test_row_example_steps(c0):
    m, res, trace = row_compute_changes(c0, 1.2, P, Q)
    assert m == 6
    assert [s.modified_pair for s in trace] == [(2, 1), (2, 3), (2, 0)]
    expected_w = [
        [0.2849, 0.3332, 0.1110, 0.2709],
        [0.3482, 0.3503, 0.1769, 0.1246],
        [0.1394, 0.3235, 0.3882, 0.1489],
    ]
    for step, w in zip(trace, expected_w):
        assert np.allclose(step.weights_after.weights, w, atol=1e-3)
    assert [round(s.ci_after, 4) for s in trace] == pytest.approx([0.4477, 0.3783, 0.0454], abs=2e-3)
    assert [s.ranks_after for s in trace] == [(1, 4), (2, 4), (4, 3)]
    assert res[2, 0] == pytest.approx(3.7469, abs=5e-4)
    assert res[2, 3] == pytest.approx(2.0605, abs=5e-4)
    assert res[2, 1] == 1.2


def test_row_stops_after_direct_pair():
    C = consistent_from_weights([0.4, 0.3, 0.2, 0.1])
    # p = 4th alternative; alpha large enough to lift it over the 3rd at once
    m, res, trace = row_compute_changes(C, 9.0, 3, 2)
    assert m == 2
    assert len(trace) == 1


def test_row_touches_only_row_and_column_p(rng):
    a = random_pc(rng, 6)
    m, res, _ = row_compute_changes(validate(a), 1.5, 0, 5)
    diff = np.argwhere(~np.isclose(res.entries, a, rtol=0, atol=0))
    assert all(0 in (i, j) for i, j in diff)
    assert len(diff) == m


@pytest.mark.parametrize("seed", range(10))
def test_row_matches_listing_oracle(seed):
    rng = np.random.default_rng(seed)
    a = random_pc(rng, 4)
    w = weights_oracle(a, "evm")
    p, q = int(np.argmin(w)), int(np.argmax(w))
    m, res, trace = row_compute_changes(validate(a), 1.3, p, q)
    m_ref, res_ref, steps = row_listing(a, 1.3, p, q)
    assert m == m_ref
    assert [s.modified_pair for s in trace] == [s[0] for s in steps]
    assert np.allclose(res.entries, res_ref, rtol=1e-14)


# -- matrix heuristic ------------------------------------------------------------------

def test_matrix_example_steps(c0):
    m, res, trace = matrix_compute_changes(c0, 1.2, P, Q)
    assert m == 8
    assert [s.modified_pair for s in trace] == [(3, 2), (0, 2), (1, 2), (1, 0)]
    assert np.allclose(trace[-1].weights_after.weights, [0.2013, 0.2923, 0.3499, 0.1565], atol=1e-3)
    assert trace[-1].ci_after == pytest.approx(0.0056, abs=1e-3)
    c2 = manip.replay(c0, trace)[1]
    assert c2[0, 2] == pytest.approx(0.5219, abs=5e-4)
    assert c2[2, 0] == pytest.approx(1.9163, abs=5e-4)


def test_respos_example(c0):
    w = derive(c0, "evm").weights.copy()
    w[P] = 1.2 * w[Q]
    con = w[:, None] / w[None, :]
    positions = respos(c0.entries, con)
    h = c0.entries * con.T
    values = [h[i, j] for i, j in positions]
    assert values == pytest.approx([14.6741, 12.2943, 3.87048, 1.95532, 1.45109, 1.00999], abs=1e-3)


def test_respos_strictly_above_one():
    con = np.ones((3, 3))
    assert respos(np.ones((3, 3)), con) == []


def test_matrix_no_change_when_already_target():
    C = consistent_from_weights([0.1, 0.2, 0.7])
    # alternative 3 already outranks 2; w_3 = 3.5 * w_2 makes C^con equal to C
    m, res, trace = matrix_compute_changes(C, 3.5, 2, 1)
    assert m == 0 and trace == ()


@pytest.mark.parametrize("seed", range(10))
def test_matrix_matches_listing_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    a = random_pc(rng, 5)
    w = weights_oracle(a, "gmm")
    p, q = int(np.argmin(w)), int(np.argmax(w))
    m, res, trace = matrix_compute_changes(validate(a), 1.4, p, q, Method.GMM)
    m_ref, res_ref, steps = matrix_listing(a, 1.4, p, q, "gmm")
    assert m == m_ref
    assert [s.modified_pair for s in trace] == [s[0] for s in steps]
    assert np.allclose(res.entries, res_ref, rtol=1e-12)


# -- argument checks ------------------------------------------------------------------

@pytest.mark.parametrize("fn", [row_compute_changes, matrix_compute_changes])
def test_compute_changes_rejects_bad_args(fn, c0):
    with pytest.raises(InvalidIndices):
        fn(c0, 1.2, 1, 1)
    with pytest.raises(InvalidIndices):
        fn(c0, 1.2, 0, 4)
    with pytest.raises(AlphaOutOfRange):
        fn(c0, 1.0, 2, 1)


def test_request_validation():
    with pytest.raises(InvalidIndices):
        ManipulationRequest(1, 1)
    with pytest.raises(AlphaOutOfRange):
        ManipulationRequest(0, 1, alpha_start=1.0)
    with pytest.raises(ValueError):
        ManipulationRequest(0, 1, alpha_step=0)
    with pytest.raises(ValueError):
        ManipulationRequest(0, 1, ci_threshold=0)
    with pytest.raises(ValueError):
        ManipulationRequest(0, 1, selection="cheapest")


def test_alpha_sweep_endpoints():
    alphas = manip.alpha_sweep(9.0, 0.1)
    assert alphas[0] == 9.0 and alphas[-1] == 1.1 and len(alphas) == 80
    assert manip.alpha_sweep(1.2, 1.0) == [1.2]
    assert manip.alpha_sweep(9.0, 0.1) == alpha_grid(9.0, 0.1)


# -- find_m ---------------------------------------------------------------------------

def test_find_m_example_row(c0):
    req = ManipulationRequest(P, Q, Algorithm.ROW, alpha_start=1.2, alpha_step=1)
    res = find_m(c0, req)
    assert res.m_res == 6 and res.cost == 3 and res.success
    assert res.alpha_used == 1.2


def test_find_m_full_sweep_no_worse_than_example(c0):
    for algo, bound in ((Algorithm.ROW, 6), (Algorithm.MATRIX, 8)):
        res = find_m(c0, ManipulationRequest(P, Q, algo, selection="listing"))
        assert res.m_res <= bound


def test_find_m_already_swapped(c0):
    res = find_m(c0, ManipulationRequest(Q, P))
    assert res.m_res == 0 and res.swap_achieved and res.alpha_used is None
    assert res.success == (consistency_index(c0) <= 0.1)


def test_find_m_no_swap_flag():
    # clamping to the scale keeps the weakest alternative from overtaking the strongest
    C = validate(consistent_from_weights([0.001, 0.009, 0.99]).entries)
    req = ManipulationRequest(0, 2, Algorithm.ROW, alpha_start=1.05, alpha_step=1, clamp=True)
    res = find_m(C, req)
    assert not res.swap_achieved and not res.success
    with pytest.raises(NoSwapAchieved) as info:
        find_m(C, req, raise_on_no_swap=True)
    assert info.value.result.m_res == res.m_res


def test_find_m_strict_alpha(c0):
    req = ManipulationRequest(P, Q, alpha_start=3.0, alpha_step=0.5, strict_alpha=True)
    res = find_m(c0, req)
    assert all(pt.alpha > c0[P, Q] for pt in res.sweep)
    # c_12 = 3 lies above every alpha in the sweep, yet 1 still ranks below 2
    C = validate([[1, 3, 1 / 9], [1 / 3, 1, 9], [9, 1 / 9, 1]])
    with pytest.raises(AlphaOutOfRange):
        find_m(C, ManipulationRequest(0, 1, alpha_start=2.0, alpha_step=0.5, strict_alpha=True))


def test_find_m_clamp_keeps_scale():
    C = validate(consistent_from_weights([0.02, 0.18, 0.8]).entries)
    res = find_m(C, ManipulationRequest(0, 2, Algorithm.ROW, clamp=True))
    assert np.all(res.matrix.entries <= 9 + 1e-12)
    assert np.all(res.matrix.entries >= 1 / 9 - 1e-12)
    unclamped = find_m(C, ManipulationRequest(0, 2, Algorithm.ROW))
    assert unclamped.out_of_scale


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("selection", ["feasible", "listing"])
def test_find_m_matches_exhaustive_oracle(seed, selection):
    rng = np.random.default_rng(200 + seed)
    a = random_pc(rng, 4, d=2.5)
    w = weights_oracle(a, "evm")
    p, q = int(np.argmin(w)), int(np.argmax(w))
    for algo in ("row", "matrix"):
        req = ManipulationRequest(p, q, algo, alpha_start=3.0, alpha_step=0.1, selection=selection)
        res = find_m(validate(a), req)
        m_ref, alpha_ref, ci_ref, swapped_ref = find_m_oracle(
            a, p, q, algo, start=3.0, step=0.1, selection=selection)
        assert res.m_res == m_ref
        assert res.swap_achieved == swapped_ref
        assert res.final_ci == pytest.approx(ci_ref, abs=1e-8)


def test_find_m_listing_dominance(rng):
    for _ in range(5):
        a = random_pc(rng, 5)
        w = weights_oracle(a, "evm")
        p, q = int(np.argmin(w)), int(np.argmax(w))
        res = find_m(validate(a), ManipulationRequest(p, q, Algorithm.MATRIX, selection="listing"))
        assert res.m_res == min(pt.m_res for pt in res.sweep)


def test_find_m_feasible_dominance_among_feasible(rng):
    for _ in range(5):
        a = random_pc(rng, 5)
        w = weights_oracle(a, "evm")
        p, q = int(np.argmin(w)), int(np.argmax(w))
        res = find_m(validate(a), ManipulationRequest(p, q, Algorithm.ROW))
        feasible = [pt.m_res for pt in res.sweep if pt.swapped and pt.ci <= 0.1]
        if feasible:
            assert res.success and res.m_res == min(feasible)


def test_success_implies_swap_recomputed(rng):
    for method in Method:
        a = random_pc(rng, 5)
        w = weights_oracle(a, method.value)
        p, q = int(np.argmin(w)), int(np.argmax(w))
        res = find_m(validate(a), ManipulationRequest(p, q, Algorithm.MATRIX, method=method))
        if res.success:
            r = rank_oracle(weights_oracle(res.matrix.entries, method.value))
            assert r[q] < r[p]
            assert rank_of(derive(res.matrix, method)).positions == tuple(r)


def test_find_m_trace_replays_to_result(c0):
    res = find_m(c0, ManipulationRequest(P, Q, Algorithm.MATRIX))
    mats = res.intermediate_matrices()
    assert len(mats) == len(res.trace) == res.m_res // 2
    assert np.array_equal(mats[-1].entries, res.matrix.entries)


def test_find_m_deterministic(c0):
    req = ManipulationRequest(P, Q, Algorithm.ROW)
    a, b = find_m(c0, req), find_m(c0, req)
    assert a.m_res == b.m_res and a.alpha_used == b.alpha_used
    assert np.array_equal(a.matrix.entries, b.matrix.entries)


def test_sweep_candidates_match_single_runs(rng):
    a = random_pc(rng, 5)
    alphas = manip.alpha_sweep(4.0, 0.25)
    for algo in Algorithm:
        for method in Method:
            ms, cis, swaps = manip.sweep_candidates(a, alphas, 0, 4, method, algo)
            for alpha, m, ci in zip(alphas, ms, cis):
                single = manip.compute_changes(validate(a), alpha, 0, 4, method, algo)
                assert m == single.m_res
                assert ci == pytest.approx(consistency_index(single.matrix), abs=1e-10)
