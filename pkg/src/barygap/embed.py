"""Graph-to-point embeddings and binary overlap collections.

Three embeddings map the k groups x n vertices of a graph to points in
{-1,0,1}^d, one per cost regime:

* ``embed_phi``  -- shared-edge indicator embedding, used for q in (1, inf)
  (including the p=q=2 closed-form regime).
* ``embed_psi``  -- signed two-channel embedding with alternating filler
  values, used for q = 1 (requires even k).
* ``embed_xi``   -- asymmetric signed embedding, used for q = inf.

Coordinates are laid out deterministically: group pairs (l, l') with l < l'
in lexicographic order, then u, then u' (0-indexed vertices), and for psi a
final sign channel s in {+1, -1} with +1 first.  Serialized configs are
therefore bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import Graph

REGIMES = ("Q22", "QIN", "Q1", "QINF")


def regime_for(p, q) -> str:
    if q == 1:
        return "Q1"
    if q == math.inf:
        return "QINF"
    if p == 2 and q == 2:
        return "Q22"
    if 1 < q < math.inf:
        return "QIN"
    raise InputError(f"q must lie in [1, inf], got {q}")


def pair_index(k, l, lp) -> int:
    """Rank of the pair (l, lp), l < lp, in lexicographic order over [k]."""
    if not 0 <= l < lp < k:
        raise InputError(f"need 0 <= l < lp < k, got ({l}, {lp}), k={k}")
    # pairs (0,1),(0,2),...,(0,k-1),(1,2),...
    return l * k - l * (l + 1) // 2 + (lp - l - 1)


def phi_dimension(n, k):
    return math.comb(k, 2) * n * n


def psi_dimension(n, k):
    return 2 * math.comb(k, 2) * n * n


def phi_coord(n, k, l, u, lp, up):
    return pair_index(k, l, lp) * n * n + u * n + up


def psi_coord(n, k, l, u, lp, up, s):
    """Flat psi coordinate; s = +1 or -1, +1 stored first."""
    s_idx = 0 if s == 1 else 1
    return (pair_index(k, l, lp) * n * n + u * n + up) * 2 + s_idx


def tau(l, lp, i) -> int:
    """Alternating filler value (-1)^(#{1..i} outside {l, lp}), 1-indexed args."""
    if not (1 <= l < lp) or i in (l, lp):
        raise InputError(f"tau needs 1 <= l < lp and i not in {{l, lp}}, got {(l, lp, i)}")
    m = i - (1 if l <= i else 0) - (1 if lp <= i else 0)
    return -1 if m % 2 else 1


@dataclass
class PointConfig:
    """k groups of n points in {-1,0,1}^d, stored sparsely.

    ``sparse[i][j]`` is a pair (coords, vals) of int arrays for the j-th
    point of group i.
    """

    k: int
    n: int
    d: int
    p: float
    q: float
    regime: str
    sparse: list
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InputError(f"unknown regime {self.regime!r}")
        if self.regime != regime_for(self.p, self.q):
            raise InputError(
                f"regime {self.regime} inconsistent with (p, q) = ({self.p}, {self.q})"
            )

    def dense_point(self, i, j):
        y = np.zeros(self.d, dtype=np.int8)
        coords, vals = self.sparse[i][j]
        y[coords] = vals
        return y

    def dense_group(self, i):
        return np.stack([self.dense_point(i, j) for j in range(self.n)])

    def dense_tuple(self, vertex_tuple):
        """Stack of the k points selected by a vertex tuple, shape (k, d)."""
        if len(vertex_tuple) != self.k:
            raise InputError(f"tuple length {len(vertex_tuple)} != k={self.k}")
        return np.stack([self.dense_point(i, j) for i, j in enumerate(vertex_tuple)])

    def to_json(self):
        return {
            "p": self.p,
            "q": "inf" if self.q == math.inf else self.q,
            "k": self.k,
            "n": self.n,
            "d": self.d,
            "regime": self.regime,
            "points": [
                [[int(c), int(v)] for c, v in zip(*self.sparse[i][j])]
                for i in range(self.k)
                for j in range(self.n)
            ],
            "source": self.source,
        }

    @staticmethod
    def from_json(obj):
        try:
            q = math.inf if obj["q"] == "inf" else float(obj["q"])
            k, n, d = int(obj["k"]), int(obj["n"]), int(obj["d"])
            flat = obj["points"]
            if len(flat) != k * n:
                raise InputError(f"expected {k * n} points, got {len(flat)}")
            sparse = []
            for i in range(k):
                group = []
                for j in range(n):
                    pairs = flat[i * n + j]
                    coords = np.array([c for c, _ in pairs], dtype=np.int64)
                    vals = np.array([v for _, v in pairs], dtype=np.int8)
                    group.append((coords, vals))
                sparse.append(group)
            return PointConfig(
                k=k, n=n, d=d, p=float(obj["p"]), q=q,
                regime=obj["regime"], sparse=sparse, source=obj.get("source", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed point config JSON: {exc}") from exc

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path):
        with open(path) as fh:
            return PointConfig.from_json(json.load(fh))


def _graph_source(g: Graph, name, k):
    payload = json.dumps(g.to_json(), sort_keys=True).encode()
    return {
        "embedding": name,
        "graph": g.to_json(),
        "graph_sha256": hashlib.sha256(payload).hexdigest(),
        "k": k,
    }


def _sparsify(dense):
    out = []
    for i in range(dense.shape[0]):
        group = []
        for j in range(dense.shape[1]):
            coords = np.nonzero(dense[i, j])[0]
            group.append((coords.astype(np.int64), dense[i, j, coords]))
        out.append(group)
    return out


def embed_phi(g: Graph, k, p=2.0, q=2.0) -> PointConfig:
    """Shared-edge embedding: point (i, v) indicates edges of v on the pair
    blocks containing group i.

    For a D-regular graph: cross-group inner products equal the edge
    indicator and every point has squared norm D(k-1).
    """
    if not g.is_regular():
        raise InputError("embed_phi requires a regular graph")
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if q == 1 or q == math.inf:
        raise InputError("phi serves q in (1, inf); use psi for q=1, xi for q=inf")
    n = g.n
    d = phi_dimension(n, k)
    dense = np.zeros((k, n, d), dtype=np.int8)
    for l in range(k):
        for lp in range(l + 1, k):
            base = pair_index(k, l, lp) * n * n
            for u, up in g.edges:
                # both orientations of the edge occupy (u, u') and (u', u)
                for a, b in ((u, up), (up, u)):
                    coord = base + a * n + b
                    dense[l, a, coord] = 1
                    dense[lp, b, coord] = 1
    return PointConfig(
        k=k, n=n, d=d, p=p, q=q, regime=regime_for(p, q),
        sparse=_sparsify(dense), source=_graph_source(g, "phi", k),
    )


def embed_psi(g: Graph, k, p=1.0) -> PointConfig:
    """Signed two-channel embedding for the q=1 regime (k must be even)."""
    if k % 2 != 0 or k < 2:
        raise InputError(f"embed_psi requires even k >= 2, got {k}")
    if not g.is_regular():
        raise InputError("embed_psi requires a regular graph")
    n = g.n
    d = psi_dimension(n, k)
    dense = np.zeros((k, n, d), dtype=np.int8)
    adj = g.adjacency_matrix()
    for l in range(k):
        for lp in range(l + 1, k):
            base = pair_index(k, l, lp) * n * n * 2
            block = slice(base, base + n * n * 2)
            for i in range(k):
                if i in (l, lp):
                    continue
                dense[i, :, block] = tau(l + 1, lp + 1, i + 1)
            for v in range(n):
                # (i, v) = (l, u): entry s on both sign channels
                offs = base + (v * n + np.arange(n)) * 2
                dense[l, v, offs] = 1
                dense[l, v, offs + 1] = -1
                # (i, v) = (lp, u'): entry s on edges, -s otherwise
                offs = base + (np.arange(n) * n + v) * 2
                sign = np.where(adj[:, v], 1, -1).astype(np.int8)
                dense[lp, v, offs] = sign
                dense[lp, v, offs + 1] = -sign
    return PointConfig(
        k=k, n=n, d=d, p=p, q=1.0, regime="Q1",
        sparse=_sparsify(dense), source=_graph_source(g, "psi", k),
    )


def embed_xi(g: Graph, k, p=1.0) -> PointConfig:
    """Asymmetric signed embedding for the q=inf regime (needs n >= 3)."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if g.n < 3:
        raise InputError(f"embed_xi requires n >= 3, got n={g.n}")
    n = g.n
    d = phi_dimension(n, k)
    dense = np.zeros((k, n, d), dtype=np.int8)
    adj = g.adjacency_matrix()
    for l in range(k):
        for lp in range(l + 1, k):
            base = pair_index(k, l, lp) * n * n
            for v in range(n):
                # (i, v) = (l', u'): always 1
                dense[lp, v, base + np.arange(n) * n + v] = 1
                # (i, v) = (l, u): sign tracks adjacency of (v, u')
                sign = np.where(adj[v, :], 1, -1).astype(np.int8)
                dense[l, v, base + v * n + np.arange(n)] = sign
    return PointConfig(
        k=k, n=n, d=d, p=p, q=math.inf, regime="QINF",
        sparse=_sparsify(dense), source=_graph_source(g, "xi", k),
    )


def embed_auto(g: Graph, k, p, q) -> PointConfig:
    """Pick the embedding the regime calls for."""
    if q == 1:
        return embed_psi(g, k, p=p)
    if q == math.inf:
        return embed_xi(g, k, p=p)
    return embed_phi(g, k, p=p, q=q)


# ---------------------------------------------------------------------------
# Binary overlap collections


@dataclass
class Collection:
    """k binary vectors with equal support size s and t overlapping pairs."""

    vectors: np.ndarray  # (k, d) of {0, 1}
    s: int
    t: int


def verify_collection(vectors):
    """Check the four structural conditions of an overlap collection.

    Returns a dict with ``ok``, the certified common support size ``s`` and
    overlap count ``t``, and a list of human-readable violations.  Entries
    must be 0/1.
    """
    x = np.asarray(vectors)
    if x.ndim != 2:
        raise InputError(f"expected a (k, d) array, got shape {x.shape}")
    if not np.isin(x, (0, 1)).all():
        raise InputError("collection vectors must have 0/1 entries")
    x = x.astype(np.int64)
    k, d = x.shape
    violations = []
    supports = x.sum(axis=1)
    s = int(supports[0]) if k else 0
    if not (supports == s).all():
        violations.append(f"support sizes differ: {supports.tolist()}")
    gram = x @ x.T
    t = 0
    for i in range(k):
        for j in range(i + 1, k):
            ip = int(gram[i, j])
            if ip == 1:
                t += 1
            elif ip != 0:
                violations.append(f"pair ({i},{j}) shares {ip} coordinates")
    col_load = x.sum(axis=0)
    bad = np.nonzero(col_load > 2)[0]
    if bad.size:
        violations.append(
            f"{bad.size} coordinate(s) used by more than two vectors, first at {int(bad[0])}"
        )
    return {"ok": not violations, "s": s, "t": t, "violations": violations}


def canonical_clique_collection(k, D) -> Collection:
    """The reference collection every clique embedding is equivalent to.

    The first C(k,2) coordinates are shared pairwise (one per pair); each
    vector is then padded with (D-1)(k-1) private ones.
    """
    if k < 2 or D < 1:
        raise InputError(f"need k >= 2 and D >= 1, got k={k}, D={D}")
    pairs = math.comb(k, 2)
    pad = (D - 1) * (k - 1)
    d = pairs + k * pad
    x = np.zeros((k, d), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            x[i, pair_index(k, i, j)] = 1
            x[j, pair_index(k, i, j)] = 1
    for i in range(k):
        x[i, pairs + i * pad : pairs + (i + 1) * pad] = 1
    return Collection(vectors=x, s=D * (k - 1), t=pairs)


def collection_from_pattern(k, D, pattern_edges) -> Collection:
    """A (k, D(k-1), t)-collection whose overlap graph is ``pattern_edges``.

    ``pattern_edges`` is an iterable of pairs (i, j), i < j < k.  Used to
    sweep every possible overlap structure at a given (k, D).
    """
    if k < 2 or D < 1:
        raise InputError(f"need k >= 2 and D >= 1, got k={k}, D={D}")
    edges = sorted({(min(i, j), max(i, j)) for i, j in pattern_edges})
    for i, j in edges:
        if not 0 <= i < j < k:
            raise InputError(f"bad pattern edge ({i}, {j})")
    s = D * (k - 1)
    deg = [0] * k
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    d = len(edges) + sum(s - deg[i] for i in range(k))
    x = np.zeros((k, d), dtype=np.int64)
    for e, (i, j) in enumerate(edges):
        x[i, e] = 1
        x[j, e] = 1
    off = len(edges)
    for i in range(k):
        x[i, off : off + s - deg[i]] = 1
        off += s - deg[i]
    return Collection(vectors=x, s=s, t=len(edges))


def add_edge_move(c: Collection) -> Collection:
    """Relocate one private nonzero so a disjoint pair becomes overlapping.

    Needs t < C(k,2) and s >= k-1; the result is a collection with the same
    s and t+1.
    """
    x = np.asarray(c.vectors)
    chk = verify_collection(x)
    if not chk["ok"]:
        raise InputError(f"input is not a valid collection: {chk['violations']}")
    k, d = x.shape
    pairs = math.comb(k, 2)
    if chk["t"] >= pairs:
        raise InputError(f"t = {chk['t']} already at C(k,2) = {pairs}")
    if chk["s"] < k - 1:
        raise InputError(f"need s >= k-1, got s={chk['s']}, k={k}")
    gram = x @ x.T
    target = None
    for i in range(k):
        for j in range(i + 1, k):
            if gram[i, j] == 0:
                target = (i, j)
                break
        if target is not None:
            break
    col_load = x.sum(axis=0)
    i, j = target
    private_i = np.nonzero((x[i] == 1) & (col_load == 1))[0]
    private_j = np.nonzero((x[j] == 1) & (col_load == 1))[0]
    if not (private_i.size and private_j.size):
        # cannot happen when s >= k-1: a vector shares at most k-2
        # coordinates with the others once one pair is disjoint
        raise InputError("no private coordinate available for the move")
    out = x.copy()
    out[i, private_i[0]] = 0
    out[i, private_j[0]] = 1
    return Collection(vectors=out, s=chk["s"], t=chk["t"] + 1)
