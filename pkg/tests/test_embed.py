import math

import numpy as np
import pytest

from barygap.embed import (
    add_edge_move,
    canonical_clique_collection,
    collection_from_pattern,
    embed_phi,
    embed_psi,
    embed_xi,
    phi_coord,
    PointConfig,
    tau,
    verify_collection,
)
from barygap.errors import InputError
from barygap.graph import (
    Graph,
    complete_graph,
    cycle_graph,
    induced_edge_count,
    random_regular_graph,
)

K4 = complete_graph(4)
C5 = cycle_graph(5)


# ---------------------------------------------------------------------------
# phi


def test_phi_k4_dimensions_and_gram():
    cfg = embed_phi(K4, 3)
    assert cfg.d == 48
    pts = [[cfg.dense_point(i, v).astype(np.int64) for v in range(4)] for i in range(3)]
    for i in range(3):
        for v in range(4):
            assert pts[i][v] @ pts[i][v] == 3 * 2  # D(k-1)
    for i in range(3):
        for j in range(i + 1, 3):
            for v in range(4):
                for w in range(4):
                    assert pts[i][v] @ pts[j][w] == (1 if K4.has_edge(v, w) else 0)


def test_phi_c5_k2():
    cfg = embed_phi(C5, 2)
    assert cfg.d == 25
    a = cfg.dense_point(0, 0).astype(int)
    assert a @ cfg.dense_point(1, 1).astype(int) == 1  # edge
    assert a @ cfg.dense_point(1, 2).astype(int) == 0  # non-edge


def test_phi_edgeless_graph_gives_zero_vectors():
    g = Graph.from_edges(3, [])
    cfg = embed_phi(g, 2)
    for i in range(2):
        for v in range(3):
            assert not cfg.dense_point(i, v).any()


def test_phi_gram_on_random_regular_graphs():
    pool = [(4, 2), (5, 2), (6, 3), (7, 2), (6, 4), (8, 3), (5, 4), (7, 4),
            (8, 5), (6, 2), (4, 3), (8, 4), (7, 6), (6, 5), (5, 2), (8, 7),
            (6, 3), (7, 2), (8, 3), (4, 2)]
    ks = [2, 3, 4]
    for i, (n, deg) in enumerate(pool):
        g = random_regular_graph(n, deg, seed=20 + i)
        k = ks[i % 3]
        cfg = embed_phi(g, k)
        stack = np.stack(
            [cfg.dense_point(a, v).astype(np.int64) for a in range(k) for v in range(n)]
        )
        gram = stack @ stack.T
        for a in range(k):
            for v in range(n):
                assert gram[a * n + v, a * n + v] == deg * (k - 1)
                for b in range(a + 1, k):
                    for w in range(n):
                        assert gram[a * n + v, b * n + w] == int(g.has_edge(v, w))


def test_phi_requires_regular():
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(InputError):
        embed_phi(star, 2)


# ---------------------------------------------------------------------------
# psi


def test_tau_values_and_evenness():
    assert tau(1, 2, 3) == -1
    for k in (4, 6):
        for l in range(1, k + 1):
            for lp in range(l + 1, k + 1):
                assert sum(tau(l, lp, i) for i in range(1, k + 1) if i not in (l, lp)) == 0
    # odd k breaks the cancellation: the k=3 case has a single tau = -1
    assert sum(tau(1, 2, i) for i in range(1, 4) if i not in (1, 2)) == -1


def test_psi_dimensions_norms_and_guards():
    cfg = embed_psi(K4, 4)
    assert cfg.d == 2 * 6 * 16 == 192
    for i in range(4):
        for v in range(4):
            # ||psi(i,v)||_1 = n(k-1)(nk-2n+2)
            assert int(np.abs(cfg.dense_point(i, v).astype(np.int64)).sum()) == 120
    with pytest.raises(InputError):
        embed_psi(K4, 3)
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(InputError):
        embed_psi(star, 2)


def test_psi_tau_sum_inside_embedding():
    cfg = embed_psi(K4, 4)
    n, k = 4, 4
    for l in range(k):
        for lp in range(l + 1, k):
            for u in range(n):
                for up in range(n):
                    for s_idx, s in enumerate((1, -1)):
                        coord = (
                            (l * k - l * (l + 1) // 2 + (lp - l - 1)) * n * n
                            + u * n + up
                        ) * 2 + s_idx
                        total = sum(
                            int(cfg.dense_point(i, 0)[coord])
                            for i in range(k)
                            if i not in (l, lp)
                        )
                        assert total == 0


# ---------------------------------------------------------------------------
# xi


def test_xi_c5_coordinates():
    cfg = embed_xi(C5, 3)
    co = phi_coord(5, 3, 0, 0, 1, 2)
    assert cfg.dense_point(0, 0)[co] == -1
    assert cfg.dense_point(1, 2)[co] == 1
    diff = np.abs(
        cfg.dense_point(0, 0).astype(int) - cfg.dense_point(1, 2).astype(int)
    ).max()
    assert diff == 2


def test_xi_k4_no_minus_one_on_edge_coordinates():
    cfg = embed_xi(K4, 3)
    n, k = 4, 3
    for l in range(k):
        for lp in range(l + 1, k):
            base = (l * k - l * (l + 1) // 2 + (lp - l - 1)) * n * n
            for u, up in [(u, up) for u in range(n) for up in range(n) if K4.has_edge(u, up)]:
                coord = base + u * n + up
                for i in range(k):
                    for v in range(n):
                        assert cfg.dense_point(i, v)[coord] != -1


def test_xi_c5_k2_pairwise_linf_at_least_one():
    cfg = embed_xi(C5, 2)
    for v in range(5):
        for w in range(5):
            diff = np.abs(
                cfg.dense_point(0, v).astype(int) - cfg.dense_point(1, w).astype(int)
            ).max()
            assert diff >= 1


def test_xi_requires_three_vertices():
    with pytest.raises(InputError):
        embed_xi(complete_graph(2), 2)


# ---------------------------------------------------------------------------
# collections


def test_verify_collection_on_phi_tuples():
    pool = [(5, 2), (6, 3), (7, 4), (8, 3), (6, 4)]
    rng = np.random.default_rng(5)
    for i, (n, deg) in enumerate(pool):
        g = random_regular_graph(n, deg, seed=50 + i)
        k = int(rng.integers(2, 5))
        cfg = embed_phi(g, k)
        for _ in range(5):
            vt = tuple(int(v) for v in rng.integers(0, n, size=k))
            res = verify_collection(cfg.dense_tuple(vt))
            assert res["ok"], res
            assert res["s"] == deg * (k - 1)
            assert res["t"] == induced_edge_count(g, vt)


def test_verify_collection_rejects_identical_copies():
    vec = np.zeros(6, dtype=int)
    vec[:2] = 1  # s = 2
    res = verify_collection(np.stack([vec, vec, vec]))
    assert not res["ok"]
    assert res["violations"]


def test_verify_collection_rejects_nonbinary():
    with pytest.raises(InputError):
        verify_collection(np.array([[0, 2], [1, 0]]))


def test_canonical_clique_collection():
    c = canonical_clique_collection(2, 1)
    assert c.vectors.shape == (2, 1) and c.s == 1 and c.t == 1
    assert verify_collection(c.vectors)["ok"]
    c = canonical_clique_collection(3, 2)
    assert c.vectors.shape[1] == 9 and c.s == 4 and c.t == 3
    assert verify_collection(c.vectors) == {"ok": True, "s": 4, "t": 3, "violations": []}
    # construction dimension C(k,2) + k(D-1)(k-1); s and t as specified
    c = canonical_clique_collection(4, 3)
    assert c.vectors.shape[1] == 6 + 4 * 2 * 3
    res = verify_collection(c.vectors)
    assert res["ok"] and res["s"] == 9 and res["t"] == 6


def test_collection_from_pattern():
    c = collection_from_pattern(4, 2, [(0, 1), (2, 3)])
    res = verify_collection(c.vectors)
    assert res["ok"] and res["s"] == 6 and res["t"] == 2


def test_add_edge_move_on_phi_path_tuple():
    cfg = embed_phi(C5, 3)
    from barygap.embed import Collection

    vecs = cfg.dense_tuple((0, 1, 2)).astype(np.int64)
    start = verify_collection(vecs)
    assert start["t"] == 2
    out = add_edge_move(Collection(vectors=vecs, s=start["s"], t=start["t"]))
    res = verify_collection(out.vectors)
    assert res["ok"] and res["t"] == 3 and res["s"] == start["s"]


def test_add_edge_move_restores_full_overlap():
    c = canonical_clique_collection(3, 2)
    # drop one shared coordinate to get t = C(k,2) - 1
    vecs = c.vectors.copy()
    vecs[0, 0] = 0
    extra = np.zeros((3, 1), dtype=np.int64)
    extra[0, 0] = 1
    vecs = np.hstack([vecs, extra])
    res = verify_collection(vecs)
    assert res["t"] == 2
    from barygap.embed import Collection

    out = add_edge_move(Collection(vectors=vecs, s=res["s"], t=res["t"]))
    chk = verify_collection(out.vectors)
    assert chk["ok"] and chk["t"] == 3


def test_add_edge_move_preconditions():
    from barygap.embed import Collection

    c = canonical_clique_collection(3, 2)
    with pytest.raises(InputError):
        add_edge_move(c)  # t already at C(k,2)
    tiny = collection_from_pattern(3, 1, [])  # s = 2 >= k-1: fine
    out = add_edge_move(tiny)
    assert verify_collection(out.vectors)["t"] == 1


# ---------------------------------------------------------------------------
# serialization


def test_point_config_roundtrip(tmp_path):
    cfg = embed_psi(K4, 4)
    path = tmp_path / "pts.json"
    cfg.save(path)
    back = PointConfig.load(path)
    assert back.k == cfg.k and back.n == cfg.n and back.d == cfg.d
    assert back.regime == cfg.regime and back.q == cfg.q
    for i in range(cfg.k):
        for j in range(cfg.n):
            assert np.array_equal(back.dense_point(i, j), cfg.dense_point(i, j))


def test_point_config_inf_q_roundtrip(tmp_path):
    cfg = embed_xi(K4, 3, p=2.0)
    path = tmp_path / "pts.json"
    cfg.save(path)
    back = PointConfig.load(path)
    assert back.q == math.inf and back.regime == "QINF"
