"""Discrete measures, W_{p,q} distances, exact barycenter values via the
multimarginal transport LP, the union-support 2-approximation, and the
quantize-and-split uniformization transform.

The k-marginal LP has one variable per support tuple; entries of its cost
tensor are inner hub solves (closed form at p=q=2).  Desk-scale caps guard
every enumeration.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputError, ResourceCapError
from .fpq import FpqProblem, solve_fpq
from .simplex import solve_lp

DEFAULT_LP_CAP = 10**5


def _norm_q(x, q):
    x = np.asarray(x, dtype=float)
    if q == math.inf:
        return float(np.abs(x).max()) if x.size else 0.0
    return float((np.abs(x) ** q).sum() ** (1.0 / q))


@dataclass
class DiscreteMeasure:
    """Finitely supported probability measure on R^d."""

    atoms: np.ndarray   # (m, d)
    masses: np.ndarray  # (m,)

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        masses = np.asarray(self.masses, dtype=float)
        if atoms.shape[0] != masses.shape[0]:
            raise InputError(
                f"{atoms.shape[0]} atoms but {masses.shape[0]} masses"
            )
        if not np.isfinite(atoms).all():
            raise InputError("atoms must be finite")
        if (masses < -1e-15).any():
            raise InputError("masses must be nonnegative")
        if abs(masses.sum() - 1.0) > 1e-12:
            raise InputError(f"masses sum to {masses.sum()!r}, expected 1")
        uniq = np.unique(atoms, axis=0)
        if uniq.shape[0] != atoms.shape[0]:
            raise InputError("atoms must be pairwise distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", np.maximum(masses, 0.0))

    @property
    def d(self):
        return self.atoms.shape[1]

    @property
    def size(self):
        return self.atoms.shape[0]

    def is_uniform(self):
        return np.allclose(self.masses, 1.0 / self.size, atol=1e-12)

    @staticmethod
    def dirac(x):
        return DiscreteMeasure(np.atleast_2d(np.asarray(x, dtype=float)), np.array([1.0]))

    @staticmethod
    def uniform(atoms):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        m = atoms.shape[0]
        return DiscreteMeasure(atoms, np.full(m, 1.0 / m))

    def to_json(self):
        return {
            "d": self.d,
            "atoms": [[float(v) for v in row] for row in self.atoms],
            "masses": [float(v) for v in self.masses],
        }

    @staticmethod
    def from_json(obj):
        try:
            return DiscreteMeasure(np.array(obj["atoms"], dtype=float),
                                   np.array(obj["masses"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed measure JSON: {exc}") from exc


@dataclass
class BaryInstance:
    measures: list
    p: float
    q: float
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not self.measures:
            raise InputError("need at least one measure")
        d = self.measures[0].d
        for m in self.measures:
            if m.d != d:
                raise InputError("measures must share an ambient dimension")
        k = len(self.measures)
        if self.weights is None:
            w = np.full(k, 1.0 / k)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (k,) or (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
                raise InputError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)
        if self.p < 1 or not (self.q >= 1):
            raise InputError(f"need p >= 1 and q in [1, inf], got ({self.p}, {self.q})")

    @property
    def k(self):
        return len(self.measures)

    @property
    def d(self):
        return self.measures[0].d

    def support_diameter_power(self):
        """R_{p,q}: p-th power of the l_q diameter of the union support."""
        pts = np.vstack([m.atoms for m in self.measures])
        best = 0.0
        for i in range(pts.shape[0]):
            for j in range(i + 1, pts.shape[0]):
                best = max(best, _norm_q(pts[i] - pts[j], self.q))
        return best**self.p

    def to_json(self):
        return {
            "p": self.p,
            "q": "inf" if self.q == math.inf else self.q,
            "weights": [float(w) for w in self.weights],
            "measures": [m.to_json() for m in self.measures],
        }

    @staticmethod
    def from_json(obj):
        try:
            q = math.inf if obj["q"] == "inf" else float(obj["q"])
            return BaryInstance(
                measures=[DiscreteMeasure.from_json(m) for m in obj["measures"]],
                p=float(obj["p"]),
                q=q,
                weights=np.array(obj["weights"], dtype=float) if "weights" in obj else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed instance JSON: {exc}") from exc

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path):
        with open(path) as fh:
            return BaryInstance.from_json(json.load(fh))


@dataclass
class TransportTensor:
    """Sparse nonnegative tensor with prescribed marginals."""

    shape: tuple
    entries: dict  # tuple -> mass

    def marginal(self, i):
        out = np.zeros(self.shape[i])
        for t, v in self.entries.items():
            out[t[i]] += v
        return out

    def max_marginal_violation(self, measures):
        worst = 0.0
        for i, mu in enumerate(measures):
            worst = max(worst, float(np.abs(self.marginal(i) - mu.masses).max()))
        return worst

    def total_mass(self):
        return float(sum(self.entries.values()))


@dataclass
class CostOracle:
    """Deterministic tuple -> cost callback with caching and max tracking."""

    fn: object
    cache: dict = field(default_factory=dict)

    def __call__(self, t):
        t = tuple(t)
        if t not in self.cache:
            self.cache[t] = self.fn(t)
        return self.cache[t]

    @property
    def c_max(self):
        return max((abs(v) for v in self.cache.values()), default=0.0)


# ---------------------------------------------------------------------------
# Optimal transport between two measures


def _pairwise_cost(a, b, p, q):
    diff = a[:, None, :] - b[None, :, :]
    if q == math.inf:
        m = np.abs(diff).max(axis=2)
    else:
        m = (np.abs(diff) ** q).sum(axis=2) ** (1.0 / q)
    return m**p


def ot_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, p, q, exact=False, cap=DEFAULT_LP_CAP):
    """Optimal value and plan of the transportation LP with cost ||x-y||_q^p."""
    if mu.d != nu.d:
        raise InputError(f"dimension mismatch: {mu.d} vs {nu.d}")
    nm, nn = mu.size, nu.size
    if nm * nn > cap:
        raise ResourceCapError(
            f"OT LP with {nm * nn} variables exceeds cap {cap}",
            required=nm * nn, cap=cap,
        )
    cost = _pairwise_cost(mu.atoms, nu.atoms, p, q)
    if (
        not exact
        and nm == nn
        and nm > 64
        and mu.is_uniform()
        and nu.is_uniform()
    ):
        # equal uniform marginals: LP optimum is a permutation (Birkhoff)
        rows, cols = linear_sum_assignment(cost)
        value = float(cost[rows, cols].sum() / nm)
        plan = TransportTensor(
            (nm, nn), {(int(r), int(c)): 1.0 / nm for r, c in zip(rows, cols)}
        )
        return value, plan
    A = np.zeros((nm + nn, nm * nn))
    for i in range(nm):
        A[i, i * nn : (i + 1) * nn] = 1.0
    for j in range(nn):
        A[nm + j, j::nn] = 1.0
    b = np.concatenate([mu.masses, nu.masses])
    if exact:
        bf = [Fraction(x).limit_denominator(10**12) for x in b]
        cf = [Fraction(x).limit_denominator(10**12) for x in cost.ravel()]
        value, x = solve_lp(A, np.array(bf, dtype=object), np.array(cf, dtype=object), exact=True)
        entries = {
            (i // nn, i % nn): v for i, v in enumerate(x) if v > 0
        }
        return value, TransportTensor((nm, nn), entries)
    value, x = solve_lp(A, b, cost.ravel())
    entries = {
        (i // nn, i % nn): float(v) for i, v in enumerate(x) if v > 1e-12
    }
    return float(value), TransportTensor((nm, nn), entries)


def wasserstein_pq(mu: DiscreteMeasure, nu: DiscreteMeasure, p, q, cap=DEFAULT_LP_CAP):
    """W_{p,q}(mu, nu): p-th root of the optimal transport cost."""
    value, _ = ot_cost(mu, nu, p, q, cap=cap)
    return max(value, 0.0) ** (1.0 / p)


def barycenter_objective(inst: BaryInstance, nu: DiscreteMeasure, cap=DEFAULT_LP_CAP):
    """sum_i lambda_i W_{p,q}^p(mu_i, nu)."""
    total = 0.0
    for lam, mu in zip(inst.weights, inst.measures):
        value, _ = ot_cost(mu, nu, inst.p, inst.q, cap=cap)
        total += lam * value
    return total


# ---------------------------------------------------------------------------
# Multimarginal LP


@dataclass
class MotResult:
    value: float
    plan: TransportTensor
    tolerance: float
    value_exact: Fraction | None = None


def _tuple_iter(shape):
    return itertools.product(*(range(s) for s in shape))


def _cost_closed_form_22(inst):
    """Vectorized p=q=2 costs over all tuples: sum lam ||x||^2 - ||sum lam x||^2 / sum lam."""
    shape = tuple(m.size for m in inst.measures)
    lam = inst.weights
    total = int(np.prod(shape))
    costs = np.zeros(total)
    sq = [np.einsum("ij,ij->i", m.atoms, m.atoms) for m in inst.measures]
    flat = np.arange(total)
    idx = []
    rem = flat
    for s in reversed(shape):
        idx.append(rem % s)
        rem = rem // s
    idx = idx[::-1]
    acc = np.zeros((total, inst.d))
    for i, m in enumerate(inst.measures):
        costs += lam[i] * sq[i][idx[i]]
        acc += lam[i] * m.atoms[idx[i]]
    costs -= np.einsum("ij,ij->i", acc, acc) / lam.sum()
    return costs


def _cost_exact_22(inst):
    """Exact rational p=q=2 costs; needs integer atoms and rational weights."""
    shape = tuple(m.size for m in inst.measures)
    atoms = [m.atoms for m in inst.measures]
    for a in atoms:
        if not np.allclose(a, np.round(a)):
            raise InputError("exact mode needs integer-valued atoms")
    k = inst.k
    lam = [Fraction(w).limit_denominator(10**9) for w in inst.weights]
    costs = []
    for t in _tuple_iter(shape):
        xs = [np.round(atoms[i][t[i]]).astype(int) for i in range(k)]
        s = sum(l * int(x @ x) for l, x in zip(lam, xs))
        acc = [Fraction(0)] * inst.d
        for l, x in zip(lam, xs):
            for c in range(inst.d):
                acc[c] += l * int(x[c])
        s -= sum(a * a for a in acc) / sum(lam)
        costs.append(s)
    return costs


def bary_value_mot(
    inst: BaryInstance,
    tol: float = 1e-6,
    cap: int = DEFAULT_LP_CAP,
    exact: bool = False,
    cost_values=None,
) -> MotResult:
    """Exact barycenter value as the k-marginal transport LP.

    Cost entries are hub solves to tolerance tol/2 (closed form at p=q=2),
    so the LP value carries at most tol additive error.  ``cost_values``
    lets callers inject a precomputed cost vector in lexicographic tuple
    order (the reduction pipeline reuses its class-cached sweep).
    """
    shape = tuple(m.size for m in inst.measures)
    total = int(np.prod([float(s) for s in shape]))
    if total > cap:
        raise ResourceCapError(
            f"MOT LP with {total} variables exceeds cap {cap}", required=total, cap=cap
        )
    k = inst.k

    if inst.k == 2 and cost_values is None and not exact:
        mu, nu = inst.measures
        if mu.size == nu.size and mu.size * nu.size > 64 and mu.is_uniform() and nu.is_uniform():
            # 2-marginal plan over equal uniform marginals is a permutation
            value, plan = _mot_k2_fast(inst)
            return MotResult(value=value, plan=plan, tolerance=tol)

    if cost_values is not None:
        costs = np.asarray(cost_values, dtype=float)
        if costs.shape != (total,):
            raise InputError(f"cost_values must have shape ({total},)")
    elif exact:
        if inst.p != 2 or inst.q != 2:
            raise InputError("exact MOT mode is defined for p=q=2")
        costs = _cost_exact_22(inst)
    elif inst.p == 2 and inst.q == 2:
        costs = _cost_closed_form_22(inst)
    else:
        def hub_cost(t):
            pts = np.stack([inst.measures[i].atoms[t[i]] for i in range(k)])
            sol = solve_fpq(
                FpqProblem(pts, inst.p, inst.q, weights=inst.weights), tol=tol / 2
            )
            return sol.value

        oracle = CostOracle(fn=hub_cost)
        costs = np.fromiter(
            (oracle(t) for t in _tuple_iter(shape)), dtype=float, count=total
        )

    A_rows = sum(shape)
    A = np.zeros((A_rows, total))
    row = 0
    flat_idx = np.arange(total)
    strides = []
    rem = 1
    for s in reversed(shape):
        strides.append(rem)
        rem *= s
    strides = strides[::-1]
    for i, s in enumerate(shape):
        coord = (flat_idx // strides[i]) % s
        for j in range(s):
            A[row + j, coord == j] = 1.0
        row += s
    b = np.concatenate([m.masses for m in inst.measures])

    if exact:
        bf = np.array([Fraction(x).limit_denominator(10**12) for x in b], dtype=object)
        cf = np.array(list(costs), dtype=object)
        value, x = solve_lp(A, bf, cf, exact=True)
        entries = {}
        for flat, v in enumerate(x):
            if v > 0:
                t = tuple((flat // strides[i]) % shape[i] for i in range(k))
                entries[t] = v
        return MotResult(
            value=float(value), plan=TransportTensor(shape, entries),
            tolerance=0.0, value_exact=value,
        )
    value, x = solve_lp(A, b, np.asarray(costs, dtype=float))
    entries = {}
    for flat in np.nonzero(x > 1e-12)[0]:
        t = tuple(int((flat // strides[i]) % shape[i]) for i in range(k))
        entries[t] = float(x[flat])
    return MotResult(value=float(value), plan=TransportTensor(shape, entries), tolerance=tol)


def _mot_k2_fast(inst):
    """Assignment fast path for two equal-size uniform measures."""
    mu, nu = inst.measures
    lam = inst.weights
    n = mu.size
    # hub cost per pair: min_y lam1||a-y||^p + lam2||b-y||^p along the segment
    diff = _pairwise_cost(mu.atoms, nu.atoms, 1.0, inst.q)  # plain distances
    if inst.p == 1:
        cost = np.minimum(lam[0], lam[1]) * diff
    elif inst.p == 2:
        cost = (lam[0] * lam[1] / lam.sum()) * diff**2
    else:
        # vectorized ternary search for min_t lam1 t^p + lam2 (D - t)^p on [0, D]
        dv = diff.ravel()
        lo = np.zeros_like(dv)
        hi = dv.copy()

        def seg(t):
            return lam[0] * t**inst.p + lam[1] * (dv - t) ** inst.p

        for _ in range(80):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            better = seg(m1) <= seg(m2)
            hi = np.where(better, m2, hi)
            lo = np.where(better, lo, m1)
        cost = seg(0.5 * (lo + hi)).reshape(diff.shape)
    rows, cols = linear_sum_assignment(cost)
    value = float(cost[rows, cols].sum() / n)
    plan = TransportTensor((n, n), {(int(r), int(c)): 1.0 / n for r, c in zip(rows, cols)})
    return value, plan


def extract_barycenter(plan: TransportTensor, inst: BaryInstance, tol: float = 1e-8):
    """Pushforward of the plan under the tuple -> optimal hub map."""
    buckets = {}
    for t, mass in plan.entries.items():
        if mass <= 0:
            continue
        pts = np.stack([inst.measures[i].atoms[t[i]] for i in range(inst.k)])
        sol = solve_fpq(FpqProblem(pts, inst.p, inst.q, weights=inst.weights), tol=tol)
        key = tuple(np.round(sol.minimizer, 9))
        if key in buckets:
            buckets[key][1] += mass
        else:
            buckets[key] = [sol.minimizer, mass]
    atoms = np.stack([v[0] for v in buckets.values()])
    masses = np.array([v[1] for v in buckets.values()])
    masses = masses / masses.sum()
    return DiscreteMeasure(atoms, masses)


# ---------------------------------------------------------------------------
# Union-support 2-approximation


def borgwardt_2approx(inst: BaryInstance, cap: int = DEFAULT_LP_CAP):
    """Optimize over barycenters supported on the union of input supports.

    One joint LP over the k transport plans and the nk support weights;
    the value is within a factor 2 of the optimum.
    """
    union = np.unique(np.vstack([m.atoms for m in inst.measures]), axis=0)
    s = union.shape[0]
    sizes = [m.size for m in inst.measures]
    n_plan = sum(ni * s for ni in sizes)
    if n_plan + s > cap:
        raise ResourceCapError(
            f"union-support LP with {n_plan + s} variables exceeds cap {cap}",
            required=n_plan + s, cap=cap,
        )
    k = inst.k
    offs = np.cumsum([0] + [ni * s for ni in sizes])
    w_off = offs[-1]
    nvar = w_off + s
    rows = sum(sizes) + k * s
    A = np.zeros((rows, nvar))
    b = np.zeros(rows)
    cost = np.zeros(nvar)
    r = 0
    for i, mu in enumerate(inst.measures):
        ci = _pairwise_cost(mu.atoms, union.astype(float), inst.p, inst.q)
        cost[offs[i] : offs[i + 1]] = inst.weights[i] * ci.ravel()
        for j in range(sizes[i]):
            A[r, offs[i] + j * s : offs[i] + (j + 1) * s] = 1.0
            b[r] = mu.masses[j]
            r += 1
    for i in range(k):
        for l in range(s):
            A[r, offs[i] + l : offs[i + 1] : s] = 1.0
            A[r, w_off + l] = -1.0
            r += 1
    value, x = solve_lp(A, b, cost)
    w = np.maximum(x[w_off:], 0.0)
    keep = w > 1e-12
    nu = DiscreteMeasure(union[keep], w[keep] / w[keep].sum())
    return {"value": float(value), "nu": nu}


# ---------------------------------------------------------------------------
# Uniformization (quantize + split)


def quantize_masses(masses, N):
    """Largest-remainder rounding of masses to multiples of 1/N (sums to N)."""
    masses = np.asarray(masses, dtype=float)
    scaled = masses * N
    base = np.floor(scaled).astype(int)
    short = N - base.sum()
    if short < 0 or short > len(masses):
        raise InputError(f"cannot apportion {N} units over {masses}")
    frac = scaled - base
    order = np.argsort(-frac, kind="stable")
    base[order[:short]] += 1
    return base


def rounding_coupling(mu: DiscreteMeasure, counts, N):
    """Explicit coupling between mu and its quantized version.

    Returns (entries, moved_mass): diagonal mass plus greedy moves of the
    excess, in deterministic atom order.
    """
    m_new = counts / N
    diag = np.minimum(mu.masses, m_new)
    surplus = mu.masses - diag
    deficit = m_new - diag
    entries = {(i, i): float(diag[i]) for i in range(mu.size) if diag[i] > 0}
    moved = 0.0
    j = 0
    for i in range(mu.size):
        s = surplus[i]
        while s > 1e-15:
            while j < mu.size and deficit[j] <= 1e-15:
                j += 1
            if j >= mu.size:
                break
            take = min(s, deficit[j])
            entries[(i, j)] = entries.get((i, j), 0.0) + float(take)
            deficit[j] -= take
            s -= take
            moved += float(take)
        surplus[i] = s
    return entries, moved


def uniformize(inst: BaryInstance, eps: float, c: float = 4.0, max_atoms: int = 10**6):
    """Rewrite every measure as uniform over exactly N atoms in the unit ball.

    N = ceil(c * n * p * 2^p / eps) with n the largest input support size.
    Masses are quantized to multiples of 1/N by largest-remainder rounding,
    then each atom of mass m/N is split into m distinct atoms within l_q
    distance eps/(p 2^p) of the original (split offsets use half that radius
    so the radial projection back into the unit ball cannot overshoot).
    """
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    p, q = inst.p, inst.q
    for m in inst.measures:
        for a in m.atoms:
            if _norm_q(a, q) > 1.0 + 1e-12:
                raise InputError(
                    "uniformize expects atoms in the unit l_q ball; rescale first"
                )
    n_max = max(m.size for m in inst.measures)
    N = math.ceil(c * n_max * p * 2.0**p / eps)
    if N > max_atoms:
        raise ResourceCapError(
            f"eps={eps} needs N={N} atoms per measure (cap {max_atoms}); "
            f"the split radius would be {eps / (2 * p * 2.0**p):.3e}",
            required=N, cap=max_atoms,
        )
    r = eps / (2.0 * p * 2.0**p)
    if r <= 0 or not np.isfinite(r):
        raise InputError(f"split radius underflow for eps={eps}")
    d = inst.d
    out = []
    for mu in inst.measures:
        counts = quantize_masses(mu.masses, N)
        new_atoms = []
        for j in range(mu.size):
            m = int(counts[j])
            if m == 0:
                continue
            x = mu.atoms[j]
            for l in range(m):
                off = np.zeros(d)
                off[l % d] = r * (l + 1) / m * (1 if (l // d) % 2 == 0 else -1)
                y = x + off
                nq = _norm_q(y, q)
                if nq > 1.0:
                    y = y / nq
                new_atoms.append(y)
        atoms = np.array(new_atoms)
        uniq = np.unique(atoms, axis=0)
        if uniq.shape[0] != atoms.shape[0]:
            raise InputError(
                f"split atoms collide at radius {r:.3e}; eps={eps} is too small "
                f"for this support (atoms within {2 * r:.3e} of each other)"
            )
        out.append(DiscreteMeasure(atoms, np.full(len(new_atoms), 1.0 / N)))
    return BaryInstance(measures=out, p=inst.p, q=inst.q, weights=inst.weights)
