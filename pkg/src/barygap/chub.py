"""Brute-force hub-selection solver: minimize F_{p,q} over all n^k tuples.

Enumeration is exhaustive and lexicographic.  Inner solves are cached per
tuple-equivalence class: two tuples whose selected point matrices agree up
to a coordinate permutation have the same value, so the multiset of columns
is a sound cache key.  For embedded configs that key collapses to the
induced edge pattern (plus the degree profile for the q=inf embedding),
which is computed vectorized for the whole tuple space.  Every tuple is
still enumerated and assigned its value; caching never prunes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .embed import PointConfig
from .errors import InputError, ResourceCapError
from .fpq import FpqProblem, solve_fpq
from .graph import DEFAULT_ENUM_CAP, Graph, _iter_tuple_chunks


@dataclass
class ChubResult:
    value: float
    argmin: tuple
    tolerance: float
    method: str
    value_exact: Fraction | None = None
    per_tuple: dict | None = None

    def to_json(self):
        out = {
            "value": self.value,
            "argmin": list(self.argmin),
            "tolerance": self.tolerance,
            "method": self.method,
        }
        if self.value_exact is not None:
            out["value_exact"] = [self.value_exact.numerator, self.value_exact.denominator]
        return out


def _check_cap(n, k, cap):
    total = n**k
    if total > cap:
        raise ResourceCapError(
            f"enumerating {total} tuples exceeds cap {cap}", required=total, cap=cap
        )
    return total


def _pair_list(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def _column_signature(points):
    """Canonical multiset-of-columns key; exact but O(k d log d) per tuple."""
    x = np.asarray(points)
    cols, counts = np.unique(x, axis=1, return_counts=True)
    return cols.tobytes() + counts.tobytes()


def _source_graph(config: PointConfig):
    src = config.source or {}
    if "graph" in src and src.get("embedding") in ("phi", "psi", "xi"):
        return Graph.from_json(src["graph"]), src["embedding"]
    return None, None


def chub_closed_form_22(g: Graph, k, cap=DEFAULT_ENUM_CAP) -> Fraction:
    """Exact p=q=2 value D(k-1)^2 - (2/k) * max_multiset_edges(g, k)."""
    from .graph import max_multiset_edges

    if not g.is_regular():
        raise InputError("closed form requires a regular graph")
    d = g.regular_degree()
    m = d * (k - 1) ** 2
    best = max_multiset_edges(g, k, cap=cap)
    return Fraction(k * m - 2 * best, k)


def solve_chub(
    config: PointConfig,
    tol: float = 1e-6,
    cap: int = DEFAULT_ENUM_CAP,
    exact: bool | None = None,
    keep_per_tuple: bool = False,
    force_per_tuple_solve: bool = False,
    chunk: int = 65536,
) -> ChubResult:
    """Minimize F_{p,q} over all tuples of ``config``.

    Inner solves run at tolerance tol/2 so the reported minimum carries at
    most ``tol`` additive error.  ``exact`` (default: automatic for the
    p=q=2 regime) switches to integer closed-form arithmetic; the result
    then carries an exact Fraction value.  ``force_per_tuple_solve``
    disables class caching (test hook).
    """
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    n, k = config.n, config.k
    total = _check_cap(n, k, cap)
    if exact is None:
        exact = config.regime == "Q22"

    if exact:
        if config.regime != "Q22":
            raise InputError("exact mode is defined for the p=q=2 regime")
        return _solve_chub_exact_22(config, total, chunk, keep_per_tuple)

    graph, emb = (None, None) if force_per_tuple_solve else _source_graph(config)
    values = np.empty(total, dtype=float)
    tolerances = []

    if graph is not None:
        keys = _class_keys_embedded(config, graph, emb, total, chunk)
        if keys.shape[1] == 1:
            uniq, rep_idx, inverse = np.unique(
                keys[:, 0], return_index=True, return_inverse=True
            )
        else:
            uniq, rep_idx, inverse = np.unique(
                keys, axis=0, return_index=True, return_inverse=True
            )
        class_vals = np.empty(len(uniq), dtype=float)
        for cls in range(len(uniq)):
            vt = _flat_to_tuple(int(rep_idx[cls]), n, k)
            sol = solve_fpq(
                FpqProblem(config.dense_tuple(vt).astype(float), config.p, config.q),
                tol=tol / 2,
            )
            class_vals[cls] = sol.value
            tolerances.append(sol.tolerance)
        values = class_vals[inverse]
        method = f"class-cache[{len(uniq)}]"
    else:
        cache = {}
        for flat in range(total):
            vt = _flat_to_tuple(flat, n, k)
            pts = config.dense_tuple(vt)
            key = _column_signature(pts)
            if key not in cache:
                sol = solve_fpq(
                    FpqProblem(pts.astype(float), config.p, config.q), tol=tol / 2
                )
                cache[key] = sol.value
                tolerances.append(sol.tolerance)
            values[flat] = cache[key]
        method = f"signature-cache[{len(cache)}]"

    vmin = float(values.min())
    arg = int(np.nonzero(values <= vmin + tol)[0][0])
    per = None
    if keep_per_tuple:
        per = {_flat_to_tuple(i, n, k): float(values[i]) for i in range(total)}
    inner_tol = max(tolerances) if tolerances else 0.0
    return ChubResult(
        value=vmin,
        argmin=_flat_to_tuple(arg, n, k),
        tolerance=min(tol, 2 * inner_tol) if inner_tol > 0 else tol,
        method=method,
        per_tuple=per,
    )


def _flat_to_tuple(flat, n, k):
    out = []
    for i in range(k):
        out.append((flat // (n ** (k - 1 - i))) % n)
    return tuple(out)


def _class_keys_embedded(config, graph, emb, total, chunk):
    """Per-tuple class keys, vectorized: edge-pattern bits (+ degrees for xi)."""
    n, k = config.n, config.k
    pairs = _pair_list(k)
    if len(pairs) > 62:
        raise ResourceCapError(f"k={k} has too many pairs for pattern keys")
    adj = graph.adjacency_matrix()
    deg = np.asarray(graph.degrees, dtype=np.int64)
    need_deg = emb == "xi" and not graph.is_regular()
    width = 1 + (k if need_deg else 0)
    keys = np.empty((total, width), dtype=np.int64)
    start = 0
    for cols in _iter_tuple_chunks(n, k, chunk):
        bits = np.zeros(cols.shape[0], dtype=np.int64)
        for idx, (i, j) in enumerate(pairs):
            bits |= adj[cols[:, i], cols[:, j]].astype(np.int64) << idx
        keys[start : start + cols.shape[0], 0] = bits
        if need_deg:
            keys[start : start + cols.shape[0], 1:] = deg[cols]
        start += cols.shape[0]
    return keys


def _solve_chub_exact_22(config, total, chunk, keep_per_tuple):
    """Vectorized integer closed form: k*F(tuple) = k*S - ||sum x||^2."""
    n, k = config.n, config.k
    # Gram tensors over all (group, vertex) points
    pts = np.stack(
        [config.dense_point(i, j).astype(np.int64) for i in range(k) for j in range(n)]
    )
    gram = pts @ pts.T  # (k*n, k*n)
    norms = np.diag(gram).reshape(k, n)
    pairs = _pair_list(k)
    best = None
    best_arg = None
    per = {} if keep_per_tuple else None
    start = 0
    for cols in _iter_tuple_chunks(n, k, chunk):
        kf = np.zeros(cols.shape[0], dtype=np.int64)
        for i in range(k):
            kf += (k - 1) * norms[i, cols[:, i]]
        for i, j in pairs:
            kf -= 2 * gram[i * n + cols[:, i], j * n + cols[:, j]]
        am = int(kf.argmin())
        if best is None or kf[am] < best:
            best = int(kf[am])
            best_arg = start + am
        if per is not None:
            for row in range(cols.shape[0]):
                per[tuple(int(v) for v in cols[row])] = Fraction(int(kf[row]), k)
        start += cols.shape[0]
    exact = Fraction(best, k)
    return ChubResult(
        value=float(exact),
        argmin=_flat_to_tuple(best_arg, n, k),
        tolerance=0.0,
        method="closed-form-22-exact",
        value_exact=exact,
        per_tuple=per,
    )
