import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barygap.embed import canonical_clique_collection, embed_phi, embed_psi, embed_xi
from barygap.errors import InputError
from barygap.fpq import (
    FpqProblem,
    fpq_closed_form_22,
    fpq_gradient,
    fpq_objective,
    q1_clique_witness,
    q1_value_formula,
    qinf_clique_witness,
    solve_fpq,
)
from barygap.graph import complete_graph, cycle_graph

K4 = complete_graph(4)


def test_trivial_examples():
    s = solve_fpq(FpqProblem(np.array([[0.0, 0.0], [2.0, 0.0]]), 2, 2))
    assert abs(s.value - 2) < 1e-12 and np.allclose(s.minimizer, [1, 0])
    s = solve_fpq(FpqProblem(np.array([[5.0, -1.0]]), 1.7, 3))
    assert s.value == 0 and np.allclose(s.minimizer, [5, -1])
    s = solve_fpq(FpqProblem(np.array([[0.0], [1.0], [2.0]]), 1, 2))
    assert abs(s.value - 2) < 1e-9 and abs(s.minimizer[0] - 1) < 1e-9


def test_input_validation():
    with pytest.raises(InputError):
        FpqProblem(np.array([[0.0]]), 0.5, 2)
    with pytest.raises(InputError):
        FpqProblem(np.array([[0.0]]), 1, 0.5)
    with pytest.raises(InputError):
        FpqProblem(np.array([[np.inf]]), 1, 2)
    with pytest.raises(InputError):
        solve_fpq(FpqProblem(np.array([[0.0]]), 1, 2), tol=0)


def test_closed_form_22_examples():
    cfg = embed_phi(K4, 3)
    sol = fpq_closed_form_22(cfg.dense_tuple((0, 1, 2)).astype(np.int64))
    assert sol.value_exact == Fraction(10)  # M - k + 1 = 12 - 2
    sol = fpq_closed_form_22(np.array([[1, 0], [-1, 0]]))
    assert sol.value_exact == Fraction(2)
    sol = fpq_closed_form_22(np.array([[3, 1], [3, 1], [3, 1]]))
    assert sol.value_exact == 0


def test_closed_form_matches_generic_solver():
    cfg = embed_phi(K4, 3)
    pts = cfg.dense_tuple((0, 1, 2)).astype(float)
    generic = solve_fpq(FpqProblem(pts, 2, 2), force_iterative=True)
    assert abs(generic.value - 10.0) < 1e-8


def test_q1_value_formula():
    assert q1_value_formula(4, 4, 3, 6, 1) == 456
    assert q1_value_formula(4, 4, 3, 0, 1) == 480
    assert q1_value_formula(4, 4, 3, 6, 2) == Fraction(456**2, 4) == 51984
    with pytest.raises(InputError):
        q1_value_formula(4, 3, 3, 0, 1)  # odd k
    with pytest.raises(InputError):
        q1_value_formula(1, 2, 1, 100, 1)  # negative base


def test_q1_exact_median_solver_on_clique_tuple():
    cfg = embed_psi(K4, 4)
    pts = cfg.dense_tuple((0, 1, 2, 3)).astype(float)
    sol = solve_fpq(FpqProblem(pts, 1, 1))
    assert sol.method == "coordinate-q1"
    assert abs(sol.value - 456) < 1e-9


def test_q1_frank_wolfe_p2_certified():
    cfg = embed_psi(K4, 4)
    pts = cfg.dense_tuple((0, 1, 2, 3)).astype(float)
    sol = solve_fpq(FpqProblem(pts, 2, 1), tol=5.0)
    want = 51984.0
    assert sol.lower_bound is not None
    assert sol.lower_bound - 1e-9 <= want <= sol.value + 1e-9
    assert abs(sol.value - want) <= 1e-4 * want


def test_q1_clique_witness_identities():
    cfg = embed_psi(K4, 4)
    y = q1_clique_witness(cfg, (0, 1, 2, 3))
    for i in range(4):
        dist = int(np.abs(cfg.dense_point(i, i).astype(np.int64) - y).sum())
        assert dist == 114  # n(k-1)(nk-2n+2) - 2(k-1)
    total = sum(
        int(np.abs(cfg.dense_point(i, i).astype(np.int64) - y).sum()) for i in range(4)
    )
    assert total == q1_value_formula(4, 4, 3, 6, 1)


def test_q1_clique_witness_k2():
    g = complete_graph(2)
    cfg = embed_psi(g, 2)
    y = q1_clique_witness(cfg, (0, 1))
    # per-vector distance n(k-1)(nk-2n+2) - 2(k-1) = 2*1*2 - 2 = 2
    for i in range(2):
        dist = int(np.abs(cfg.dense_point(i, i).astype(np.int64) - y).sum())
        assert dist == 2
    sol = solve_fpq(FpqProblem(cfg.dense_tuple((0, 1)).astype(float), 1, 1))
    assert abs(sol.value - 4) < 1e-12  # k * 2


def test_qinf_clique_witness():
    cfg = embed_xi(K4, 3)
    y = qinf_clique_witness(cfg, (0, 1, 2))
    pts = cfg.dense_tuple((0, 1, 2)).astype(float)
    assert np.abs(pts - y).max() <= 0.5
    assert abs(fpq_objective(pts, y, 1, math.inf) - 1.5) < 1e-12
    assert abs(fpq_objective(pts, y, 2, math.inf) - 0.75) < 1e-12
    # n = 3 boundary
    cfg3 = embed_xi(complete_graph(3), 3)
    y3 = qinf_clique_witness(cfg3, (0, 1, 2))
    pts3 = cfg3.dense_tuple((0, 1, 2)).astype(float)
    assert abs(fpq_objective(pts3, y3, 1, math.inf) - 1.5) < 1e-12


def test_qinf_lp_exact_and_bounds():
    cfg = embed_xi(K4, 3)
    pts = cfg.dense_tuple((0, 1, 2)).astype(float)
    sol = solve_fpq(FpqProblem(pts, 1, math.inf))
    assert abs(sol.value - 1.5) < 1e-7
    sol = solve_fpq(FpqProblem(pts, 2, math.inf), tol=1e-6)
    assert abs(sol.value - 0.75) < 1e-5
    assert sol.lower_bound is not None and sol.lower_bound <= sol.value + 1e-12


def test_failure_mode_q1_on_phi():
    cfg = embed_phi(K4, 6)
    pts = cfg.dense_tuple((0, 1, 2, 3, 0, 1)).astype(float)
    sol = solve_fpq(FpqProblem(pts, 1, 1))
    assert abs(sol.value - 90) < 1e-9  # k (D(k-1))^p
    sol = solve_fpq(FpqProblem(pts, 2, 1), tol=0.1)
    assert abs(sol.value - 1350) <= 1e-4 * 1350


def test_failure_mode_qinf_on_phi():
    for k in (3, 4):
        cfg = embed_phi(K4, k)
        pts = cfg.dense_tuple(tuple(v % 4 for v in range(k))).astype(float)
        for p in (1.0, 2.0):
            sol = solve_fpq(FpqProblem(pts, p, math.inf), tol=1e-6)
            assert abs(sol.value - k / 2**p) <= 1e-4


def test_weights_are_respected():
    pts = np.array([[0.0], [1.0]])
    lam = np.array([0.25, 0.75])
    sol = solve_fpq(FpqProblem(pts, 2, 2, weights=lam))
    # weighted mean 0.75; value = 0.25*0.75^2 + 0.75*0.25^2
    assert abs(sol.minimizer[0] - 0.75) < 1e-12
    assert abs(sol.value - (0.25 * 0.5625 + 0.75 * 0.0625)) < 1e-12


def test_column_compression_is_exact():
    rng = np.random.default_rng(3)
    base = rng.integers(-1, 2, size=(4, 6)).astype(float)
    dup = np.hstack([base, base[:, :3], np.zeros((4, 5))])
    for p, q in [(1, 2), (2, 1.5), (1, 1), (2, math.inf)]:
        a = solve_fpq(FpqProblem(base, p, q), tol=1e-8)
        # duplicated columns double those coordinates' contribution; compare
        # against the solver on the expanded matrix directly
        b = solve_fpq(FpqProblem(dup, p, q), tol=1e-8)
        direct = fpq_objective(dup, b.minimizer, p, q)
        assert abs(b.value - direct) < 1e-9


@given(st.data())
@settings(max_examples=30, deadline=None)
def test_power_gap_helper(data):
    T = data.draw(st.floats(1.0, 100.0))
    t = data.draw(st.floats(0.0, T))
    tp = data.draw(st.floats(0.0, t))
    gamma = data.draw(st.floats(0.05, 4.0))
    lhs = t**gamma - tp**gamma
    if gamma >= 1:
        assert lhs >= (t - tp) ** gamma - 1e-9 * max(1.0, t**gamma)
    else:
        assert lhs >= gamma / T * (t - tp) - 1e-12


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        k = int(rng.integers(2, 5))
        d = int(rng.integers(2, 5))
        p = float(rng.choice([1.5, 2.0, 3.0]))
        q = float(rng.choice([1.5, 2.0, 2.5]))
        x = rng.normal(size=(k, d))
        y = rng.normal(size=d) * 0.5
        g = fpq_gradient(x, y, p, q)
        h = 1e-6
        fd = np.empty(d)
        for c in range(d):
            e = np.zeros(d)
            e[c] = h
            fd[c] = (fpq_objective(x, y + e, p, q) - fpq_objective(x, y - e, p, q)) / (2 * h)
        scale = max(1.0, float(np.abs(g).max()))
        assert np.abs(g - fd).max() <= 1e-5 * scale


def test_minimizer_stays_in_bounding_box():
    rng = np.random.default_rng(4)
    for p, q in [(1, 2), (2, 1.5), (2, 1), (1, math.inf)]:
        x = rng.normal(size=(4, 3))
        sol = solve_fpq(FpqProblem(x, p, q), tol=1e-6)
        assert (sol.minimizer >= x.min(axis=0) - 1e-9).all()
        assert (sol.minimizer <= x.max(axis=0) + 1e-9).all()


def test_smooth_minimizer_gradient_consistency():
    # q in (1, inf), p > 1: interior minimizers carry a near-zero gradient
    rng = np.random.default_rng(14)
    for _ in range(10):
        k = int(rng.integers(3, 6))
        coll = canonical_clique_collection(k, int(rng.integers(1, 4)))
        p = float(rng.choice([1.5, 2.0]))
        q = float(rng.choice([1.5, 2.0, 3.0]))
        x = coll.vectors.astype(float)
        sol = solve_fpq(FpqProblem(x, p, q), tol=1e-9)
        g = fpq_gradient(x, sol.minimizer, p, q)
        interior = (sol.minimizer > x.min(axis=0) + 1e-9) & (
            sol.minimizer < x.max(axis=0) - 1e-9
        )
        scale = max(1.0, abs(sol.value))
        assert np.abs(g[interior]).max() <= 1e-5 * scale


def test_residual_identity():
    rng = np.random.default_rng(9)
    for p, q in [(2, 2), (1, 1), (2, 1), (1, math.inf), (2, 3)]:
        x = rng.integers(-1, 2, size=(3, 8)).astype(float)
        sol = solve_fpq(FpqProblem(x, p, q), tol=1e-6)
        assert abs(sol.value - fpq_objective(x, sol.minimizer, p, q)) < 1e-9
