"""Evaluator for the inner hub objective min_y sum_i w_i ||z_i - y||_q^p.

The objective is convex for every p >= 1, q in [1, inf].  There is no single
algorithm that is simultaneously exact, certified and fast across the whole
(p, q) square, so the solver dispatches:

* p = q = 2            -- closed form (weighted mean).
* q = 1,  p = 1        -- exact per-coordinate weighted median.
* q = 1,  p > 1        -- subgradient warm start + Frank-Wolfe polish over the
                          achievable-distance polytope; the linear oracle is a
                          per-coordinate weighted median, so every iterate
                          carries a certified lower bound.
* q = inf, p = 1       -- one exact LP (epigraph form).
* q = inf, p > 1       -- subgradient upper bound + Fenchel/LP lower bound,
                          with optional Frank-Wolfe polish.
* q in (1, inf)        -- Weiszfeld for (p, q) = (1, 2); otherwise L-BFGS-B
                          multistart with analytic gradients (projected
                          subgradient fallback available).

Before dispatch, coordinates with identical values across all k points are
fixed at that shared value and duplicate coordinate columns are merged into
one weighted column: both reductions are exact for every norm, and they are
what makes brute-force enumeration over embedded instances cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize as sciopt

from .errors import InputError, SolverError


@dataclass
class FpqProblem:
    points: np.ndarray  # (k, d)
    p: float
    q: float  # math.inf allowed
    weights: np.ndarray | None = None  # per-point multipliers, default all-ones

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InputError(f"points must be a nonempty (k, d) array, got {pts.shape}")
        if not np.isfinite(pts).all():
            raise InputError("points must be finite")
        if self.p < 1:
            raise InputError(f"p must be >= 1, got {self.p}")
        if not (self.q >= 1):
            raise InputError(f"q must be in [1, inf], got {self.q}")
        object.__setattr__(self, "points", pts)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (pts.shape[0],) or (w < 0).any():
                raise InputError("weights must be nonnegative, one per point")
            object.__setattr__(self, "weights", w)


@dataclass
class FpqSolution:
    value: float
    minimizer: np.ndarray
    tolerance: float
    method: str
    lower_bound: float | None = None
    value_exact: Fraction | None = None


def fpq_objective(points, y, p, q, weights=None):
    """sum_i w_i ||x_i - y||_q^p, evaluated exactly as stated."""
    x = np.asarray(points, dtype=float)
    diff = np.abs(x - np.asarray(y, dtype=float)[None, :])
    if q == math.inf:
        norms = diff.max(axis=1)
    else:
        norms = (diff**q).sum(axis=1) ** (1.0 / q)
    vals = norms**p
    if weights is not None:
        vals = vals * weights
    return float(vals.sum())


def fpq_gradient(points, y, p, q, weights=None):
    """Analytic gradient for q in (1, inf); a subgradient at kink points."""
    if not (1 < q < math.inf):
        raise InputError("fpq_gradient is defined for q in (1, inf)")
    x = np.asarray(points, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = y[None, :] - x
    absd = np.abs(diff)
    s = (absd**q).sum(axis=1)  # ||x_i - y||_q^q
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = p * np.where(s > 0, s ** (p / q - 1.0), 0.0)
    if weights is not None:
        scale = scale * weights
    g = (scale[:, None] * absd ** (q - 1.0) * np.sign(diff)).sum(axis=0)
    return g


# ---------------------------------------------------------------------------
# Column reduction


@dataclass
class _Reduced:
    x: np.ndarray        # (k, C) distinct non-constant columns
    w: np.ndarray        # (C,) column multiplicities
    fixed_cols: np.ndarray
    fixed_vals: np.ndarray
    var_cols_inverse: np.ndarray  # original column -> reduced column id
    var_mask: np.ndarray
    d: int

    def expand(self, y_red):
        y = np.empty(self.d, dtype=float)
        y[self.fixed_cols] = self.fixed_vals
        y[self.var_mask] = y_red[self.var_cols_inverse]
        return y


def _reduce_columns(points):
    """Fix constant columns and merge duplicate columns (exact for any norm).

    Permuting identical columns of y leaves the objective unchanged, so by
    convexity some optimum is constant on each duplicate class; a constant
    column is optimally matched exactly.
    """
    x = np.asarray(points, dtype=float)
    k, d = x.shape
    const = (x == x[0]).all(axis=0)
    fixed_cols = np.nonzero(const)[0]
    fixed_vals = x[0, fixed_cols]
    var_mask = ~const
    xv = x[:, var_mask]
    if xv.shape[1] == 0:
        uniq = np.zeros((k, 0))
        counts = np.zeros(0)
        inverse = np.zeros(0, dtype=np.int64)
    else:
        uniq, inverse, counts = np.unique(
            xv, axis=1, return_inverse=True, return_counts=True
        )
    return _Reduced(
        x=uniq, w=counts.astype(float), fixed_cols=fixed_cols,
        fixed_vals=fixed_vals, var_cols_inverse=inverse, var_mask=var_mask, d=d,
    )


def _wobj(x, w, y, p, q, lam):
    """Objective on reduced columns with multiplicities w."""
    diff = np.abs(x - y[None, :])
    if q == math.inf:
        norms = diff.max(axis=1) if x.shape[1] else np.zeros(x.shape[0])
    else:
        norms = ((diff**q) * w[None, :]).sum(axis=1) ** (1.0 / q)
    vals = norms**p
    if lam is not None:
        vals = vals * lam
    return float(vals.sum())


def _wgrad(x, w, y, p, q, lam):
    diff = y[None, :] - x
    absd = np.abs(diff)
    s = ((absd**q) * w[None, :]).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = p * np.where(s > 0, s ** (p / q - 1.0), 0.0)
    if lam is not None:
        scale = scale * lam
    return (scale[:, None] * w[None, :] * absd ** (q - 1.0) * np.sign(diff)).sum(axis=0)


def _l1_dists(x, w, y):
    return (np.abs(x - y[None, :]) * w[None, :]).sum(axis=1)


def _linf_dists(x, y):
    if x.shape[1] == 0:
        return np.zeros(x.shape[0])
    return np.abs(x - y[None, :]).max(axis=1)


def _weighted_median_columns(x, g):
    """argmin_y sum_i g_i |x_ic - y_c| per column, all columns at once."""
    k, c = x.shape
    if c == 0:
        return np.zeros(0)
    order = np.argsort(x, axis=0, kind="stable")
    gw = np.broadcast_to(g[:, None], (k, c))
    g_sorted = np.take_along_axis(gw, order, axis=0)
    csum = np.cumsum(g_sorted, axis=0)
    total = csum[-1, :]
    # first index where cumulative weight reaches half the total
    idx = (csum < 0.5 * total[None, :] - 1e-15).sum(axis=0)
    med_pos = order[idx, np.arange(c)]
    return x[med_pos, np.arange(c)]


def _conjugate_power_sum(g, p, lam):
    """Fenchel conjugate of t -> sum_i lam_i t_i^p on t >= 0, at g >= 0."""
    g = np.maximum(g, 0.0)
    if p == 1:
        # conjugate is 0 where g <= lam, +inf otherwise; callers keep g <= lam
        return 0.0
    lam = np.ones_like(g) if lam is None else lam
    out = 0.0
    pos = lam > 0
    r = p / (p - 1.0)
    out += ((p - 1.0) * lam[pos] * (g[pos] / (p * lam[pos])) ** r).sum()
    # lam_i = 0 forces g_i = 0 for a finite conjugate; treat tiny g as 0
    return float(out)


# ---------------------------------------------------------------------------
# Engines


def _solve_mean_22(x, w, lam):
    tw = np.ones(x.shape[0]) if lam is None else lam
    if tw.sum() <= 0:
        return np.zeros(x.shape[1]), 0.0
    y = (tw[:, None] * x).sum(axis=0) / tw.sum()
    return y, _wobj(x, w, y, 2.0, 2.0, lam)


def _solve_median_q1p1(x, w, lam):
    lamv = np.ones(x.shape[0]) if lam is None else lam
    y = _weighted_median_columns(x, lamv)
    return y, _wobj(x, w, y, 1.0, 1.0, lam)


def _solve_weiszfeld(x, w, lam, iters=10000, tol=1e-14):
    """Geometric median of the rows of x under the w-weighted l2 metric."""
    xt = x * np.sqrt(w)[None, :]
    lamv = np.ones(x.shape[0]) if lam is None else lam
    y = (lamv[:, None] * xt).sum(axis=0) / lamv.sum()
    for _ in range(iters):
        dist = np.linalg.norm(xt - y[None, :], axis=1)
        hit = dist < 1e-13
        if hit.any():
            j = int(np.nonzero(hit)[0][0])
            rest = ~hit
            if not rest.any():
                break
            r = (
                lamv[rest, None] * (xt[rest] - y[None, :]) / dist[rest, None]
            ).sum(axis=0)
            if np.linalg.norm(r) <= lamv[hit].sum() + 1e-12:
                break  # subgradient optimality at the data point
            y = y + (np.linalg.norm(r) - lamv[hit].sum()) / lamv.sum() * r / np.linalg.norm(r)
            continue
        wts = lamv / dist
        y_new = (wts[:, None] * xt).sum(axis=0) / wts.sum()
        if np.linalg.norm(y_new - y) <= tol * (1.0 + np.linalg.norm(y)):
            y = y_new
            break
        y = y_new
    y_back = np.divide(y, np.sqrt(w), out=np.zeros_like(y), where=w > 0)
    return y_back, _wobj(x, w, y_back, 1.0, 2.0, lam)


def _solve_lbfgs(x, w, lam, p, q, seed=0):
    """Multistart L-BFGS-B: mean and median starts, random restarts only
    when those two disagree (kinks can trap a single run)."""
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    bounds = list(zip(lo, hi))
    lamv = np.ones(x.shape[0]) if lam is None else lam

    def run(y0):
        res = sciopt.minimize(
            lambda y: _wobj(x, w, y, p, q, lam),
            np.clip(y0, lo, hi),
            jac=lambda y: _wgrad(x, w, y, p, q, lam),
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12},
        )
        return res.x, _wobj(x, w, res.x, p, q, lam)

    cands = [
        run((lamv[:, None] * x).sum(axis=0) / max(lamv.sum(), 1e-30)),
        run(np.sort(x, axis=0)[(x.shape[0] - 1) // 2]),
    ]
    best = min(cands, key=lambda c: c[1])
    spread = max(c[1] for c in cands) - best[1]
    if spread > 1e-9 * (1.0 + abs(best[1])):
        rng = np.random.default_rng(seed)
        for _ in range(3):
            cand = run(lo + rng.random(x.shape[1]) * (hi - lo))
            if cand[1] < best[1]:
                best = cand
    return best


def _solve_subgradient(x, w, lam, p, q, iters=5000, seed=0, lower_bound=None):
    """Projected subgradient on the bounding box; Polyak steps when a lower
    bound is available, 1/sqrt(t) decay otherwise."""
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    lamv = np.ones(x.shape[0]) if lam is None else lam
    y = (lamv[:, None] * x).sum(axis=0) / max(lamv.sum(), 1e-30)
    y = np.clip(y, lo, hi)
    diam = float(np.linalg.norm(hi - lo)) or 1.0
    best_y, best_f = y.copy(), _wobj(x, w, y, p, q, lam)
    for it in range(1, iters + 1):
        if q == math.inf:
            diff = y[None, :] - x
            absd = np.abs(diff)
            m = absd.max(axis=1) if x.shape[1] else np.zeros(x.shape[0])
            g = np.zeros_like(y)
            cstar = absd.argmax(axis=1) if x.shape[1] else None
            for i in range(x.shape[0]):
                if m[i] <= 0:
                    continue
                c = cstar[i]
                g[c] += lamv[i] * p * m[i] ** (p - 1) * np.sign(diff[i, c])
        elif q == 1:
            diff = y[None, :] - x
            t = _l1_dists(x, w, y)
            scale = lamv * p * np.where(t > 0, t ** (p - 1.0), 0.0)
            g = (scale[:, None] * w[None, :] * np.sign(diff)).sum(axis=0)
        else:
            g = _wgrad(x, w, y, p, q, lam)
        gn = float(np.linalg.norm(g))
        if gn <= 1e-15:
            break
        f = _wobj(x, w, y, p, q, lam)
        if f < best_f:
            best_f, best_y = f, y.copy()
        if lower_bound is not None and f > lower_bound:
            step = (f - lower_bound) / (gn * gn)
        else:
            step = 0.1 * diam / (gn * math.sqrt(it))
        y = np.clip(y - step * g, lo, hi)
    f = _wobj(x, w, y, p, q, lam)
    if f < best_f:
        best_f, best_y = f, y
    return best_y, best_f


def _q1_oracle(x, w, g):
    """min_y sum_i g_i ||x_i - y||_1 (w-weighted columns): exact, separable."""
    y = _weighted_median_columns(x, g)
    t = _l1_dists(x, w, y)
    return y, t, float((g * t).sum())


def _qinf_oracle(x, g, lo, hi):
    """min_y sum_i g_i ||x_i - y||_inf via one LP (HiGHS)."""
    k, c = x.shape
    if c == 0:
        return np.zeros(0), np.zeros(k), 0.0
    # variables: [y_1..y_c, t_1..t_k]
    rows = []
    rhs = []
    for i in range(k):
        for j in range(c):
            r = np.zeros(c + k)
            r[j] = 1.0
            r[c + i] = -1.0
            rows.append(r)
            rhs.append(x[i, j])
            r2 = np.zeros(c + k)
            r2[j] = -1.0
            r2[c + i] = -1.0
            rows.append(r2)
            rhs.append(-x[i, j])
    cost = np.concatenate([np.zeros(c), np.maximum(g, 0.0)])
    bounds = [(float(a), float(b)) for a, b in zip(lo, hi)] + [(0.0, None)] * k
    res = sciopt.linprog(
        cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs"
    )
    if not res.success:
        raise SolverError(f"LP oracle failed: {res.message}")
    y = res.x[:c]
    t = _linf_dists(x, y)
    return y, t, float(res.fun)


def _frank_wolfe(x, w, lam, p, q, y0, tol, max_iters=4000):
    """Certified minimization of sum_i lam_i t_i^p over achievable q-distance
    vectors, for the polyhedral norms q in {1, inf}."""
    lamv = np.ones(x.shape[0]) if lam is None else lam
    lo = x.min(axis=0)
    hi = x.max(axis=0)

    def dists(y):
        return _l1_dists(x, w, y) if q == 1 else _linf_dists(x, y)

    def fval(t):
        return float((lamv * t**p).sum())

    y = y0.copy()
    t = dists(y)
    best_lb = -math.inf
    lp_calls = 0
    for _ in range(max_iters):
        g = lamv * p * t ** (p - 1.0)
        if q == 1:
            y_v, t_v, lpval = _q1_oracle(x, w, g)
        else:
            y_v, t_v, lpval = _qinf_oracle(x, g, lo, hi)
            lp_calls += 1
        lb = lpval - _conjugate_power_sum(g, p, lamv)
        best_lb = max(best_lb, lb)
        gap = fval(t) - best_lb
        if gap <= tol:
            break
        # exact segment line search for p=2, golden-section otherwise
        dt = t_v - t
        if p == 2:
            denom = float((lamv * dt * dt).sum())
            gamma = 0.0 if denom <= 0 else min(1.0, max(0.0, -float((lamv * t * dt).sum()) / denom))
        else:
            a, b = 0.0, 1.0
            for _ in range(40):
                m1 = a + (b - a) / 3
                m2 = b - (b - a) / 3
                if fval(t + m1 * dt) <= fval(t + m2 * dt):
                    b = m2
                else:
                    a = m1
            gamma = 0.5 * (a + b)
        if gamma <= 0:
            gamma = min(1.0, 2.0 / (2 + max(1, lp_calls)))
        y = (1 - gamma) * y + gamma * y_v
        t_seg = (1 - gamma) * t + gamma * t_v
        t_at_y = dists(y)
        # actual distances at the blended hub dominate the segment bound
        t = np.minimum(t_seg, t_at_y)
    return y, fval(dists(y)), best_lb


# ---------------------------------------------------------------------------
# Public entry points


def solve_fpq(
    prob: FpqProblem,
    tol: float = 1e-8,
    certify: bool = False,
    force_iterative: bool = False,
    seed: int = 0,
) -> FpqSolution:
    """Minimize sum_i w_i ||z_i - y||_q^p over y.

    ``tol`` is the accuracy target; certified paths (q in {1, inf}) raise
    SolverError carrying (lower, upper) when they cannot close the gap, the
    smooth path reports an estimated tolerance.  ``force_iterative`` skips
    the p=q=2 closed form (used by agreement tests).
    """
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    x_full = prob.points
    k, d = x_full.shape
    p, q, lam = prob.p, prob.q, prob.weights
    if k == 1:
        return FpqSolution(0.0, x_full[0].astype(float).copy(), 0.0, "single-point", 0.0)

    red = _reduce_columns(x_full)
    x, w = red.x, red.w

    if x.shape[1] == 0:
        y = red.expand(np.zeros(0))
        return FpqSolution(0.0, y, 0.0, "constant", 0.0)

    if p == 2 and q == 2 and not force_iterative:
        y_red, val = _solve_mean_22(x, w, lam)
        return FpqSolution(val, red.expand(y_red), 0.0, "closed-form-22", val)

    if q == 1 and p == 1:
        y_red, val = _solve_median_q1p1(x, w, lam)
        return FpqSolution(val, red.expand(y_red), 0.0, "coordinate-q1", val)

    if q == 1:  # p > 1
        y0, up = _solve_subgradient(x, w, lam, p, q, iters=300, seed=seed)
        y_red, val, lb = _frank_wolfe(x, w, lam, p, q, y0, tol)
        if certify and val - lb > tol:
            raise SolverError(
                f"frank-wolfe gap {val - lb:.3e} above tol {tol:.3e}", lower=lb, upper=val
            )
        sol_y = red.expand(y_red)
        return FpqSolution(
            fpq_objective(x_full, sol_y, p, q, lam), sol_y,
            max(val - lb, 0.0), "subgradient+frank-wolfe", lb,
        )

    if q == math.inf:
        lo = x.min(axis=0)
        hi = x.max(axis=0)
        if p == 1:
            ones = np.ones(k) if lam is None else lam
            y_red, t, lpv = _qinf_oracle(x, ones, lo, hi)
            sol_y = red.expand(y_red)
            val = fpq_objective(x_full, sol_y, p, q, lam)
            return FpqSolution(val, sol_y, max(val - lpv, 0.0), "lp-qinf", lpv)
        y0, up = _solve_subgradient(x, w, lam, p, q, iters=1500, seed=seed)
        y_red, val, lb = _frank_wolfe(x, w, lam, p, q, y0, tol, max_iters=200)
        if certify and val - lb > tol:
            raise SolverError(
                f"qinf gap {val - lb:.3e} above tol {tol:.3e}", lower=lb, upper=val
            )
        sol_y = red.expand(y_red)
        return FpqSolution(
            fpq_objective(x_full, sol_y, p, q, lam), sol_y,
            max(val - lb, 0.0), "subgradient+frank-wolfe", lb,
        )

    # q in (1, inf)
    if p == 1 and q == 2:
        y_red, val = _solve_weiszfeld(x, w, lam)
        sol_y = red.expand(y_red)
        return FpqSolution(
            fpq_objective(x_full, sol_y, p, q, lam), sol_y, tol, "weiszfeld", None
        )
    y_red, val = _solve_lbfgs(x, w, lam, p, q, seed=seed)
    sol_y = red.expand(y_red)
    return FpqSolution(
        fpq_objective(x_full, sol_y, p, q, lam), sol_y, tol, "lbfgs", None
    )


def fpq_closed_form_22(points, weights=None) -> FpqSolution:
    """p=q=2 value at the weighted mean; exact rationals for integer input.

    With unit weights: value = (1 - 1/k) sum ||x_i||^2 - (2/k) sum_{i<i'}
    <x_i, x_i'>, an integer divided by k.
    """
    x = np.asarray(points)
    k = x.shape[0]
    if weights is None and np.issubdtype(x.dtype, np.integer):
        g = x.astype(np.int64) @ x.astype(np.int64).T
        s = int(np.trace(g))
        total = int(g.sum())
        exact = Fraction(k * s - total, k)
        y = x.astype(float).mean(axis=0)
        return FpqSolution(float(exact), y, 0.0, "closed-form-22", float(exact), exact)
    lam = None if weights is None else np.asarray(weights, dtype=float)
    lamv = np.ones(k) if lam is None else lam
    y = (lamv[:, None] * x.astype(float)).sum(axis=0) / lamv.sum()
    val = fpq_objective(x, y, 2.0, 2.0, lam)
    return FpqSolution(val, y, 0.0, "closed-form-22", val)


def q1_value_formula(n, k, D, t, p):
    """Clique-regime value bound for the q=1 embedding:
    k^(1-p) * (n k (k-1)(n k - 2n + 2) - 4t)^p.

    Exact (Fraction) when p is a positive integer.  D is accepted for
    signature symmetry with the certificate helpers; the bound does not
    depend on it.
    """
    if k < 2 or k % 2 != 0:
        raise InputError(f"formula requires even k >= 2, got {k}")
    if t < 0:
        raise InputError(f"t must be nonnegative, got {t}")
    base = n * k * (k - 1) * (n * k - 2 * n + 2) - 4 * t
    if base < 0:
        raise InputError(f"negative base {base}: t too large for (n, k) = ({n}, {k})")
    if float(p) == int(p) and p >= 1:
        ip = int(p)
        return Fraction(base**ip, k ** (ip - 1))
    return float(k) ** (1.0 - p) * float(base) ** p


def q1_clique_witness(config, vertex_tuple) -> np.ndarray:
    """Optimal hub for a clique tuple under the q=1 embedding.

    Sets y = s on every doubly-selected edge coordinate (both group slots
    matching the tuple and the underlying pair adjacent), zero elsewhere.
    """
    from .embed import psi_coord  # local import to avoid a cycle

    if config.regime != "Q1":
        raise InputError("q1_clique_witness expects a psi-embedded config")
    g = config.source.get("graph")
    if g is None:
        raise InputError("config lacks source graph metadata")
    from .graph import Graph

    graph = Graph.from_json(g)
    k, n = config.k, config.n
    vt = tuple(vertex_tuple)
    y = np.zeros(config.d, dtype=np.int64)
    for l in range(k):
        for lp in range(l + 1, k):
            if graph.has_edge(vt[l], vt[lp]):
                y[psi_coord(n, k, l, vt[l], lp, vt[lp], 1)] = 1
                y[psi_coord(n, k, l, vt[l], lp, vt[lp], -1)] = -1
    return y


def qinf_clique_witness(config, vertex_tuple) -> np.ndarray:
    """Half-integer hub for a clique tuple under the q=inf embedding:
    -1/2 where some selected point is -1, +1/2 elsewhere."""
    if config.regime != "QINF":
        raise InputError("qinf_clique_witness expects a xi-embedded config")
    pts = config.dense_tuple(vertex_tuple)
    y = np.where((pts == -1).any(axis=0), -0.5, 0.5)
    return y


def power_gap_lower_bound(t, t_prime, gamma, T):
    """Reference inequality used in the monotonicity argument:
    t^g - t'^g >= (t - t')^g for g >= 1, and >= (g/T)(t - t') for g in (0,1)."""
    if not 0 <= t_prime <= t <= T or T < 1:
        raise InputError("need 0 <= t' <= t <= T and T >= 1")
    if gamma >= 1:
        return (t - t_prime) ** gamma
    return gamma / T * (t - t_prime)
