"""Constant-sum strong Rayleigh measures and the matroids carried by their supports.

Ground-set elements are ``0..n-1`` everywhere, including the JSON formats.
Parts of a partition are indexed ``0..k-1``; each part ``S_j`` is reported
with the largest eigenvalue of its indicator vector.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import hyperb, partition, polycore
from ._scalar import RATIONAL, fmt_scalar, to_scalar
from .errors import (BudgetExceeded, CapExceeded, ExchangeAxiomError, NotHyperbolic,
                     PreconditionError)
from .surd import QuadSurd

EXCHANGE_FULL_MAX_N = 14
EXCHANGE_SAMPLES = 2000
EDMONDS_MAX_N = 20
MAX_BASES = 10**4
PACKING_BUDGET = 10**6


def _mask(subset):
    out = 0
    for i in subset:
        out |= 1 << i
    return out


def _members(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass(frozen=True)
class DiscreteMeasure:
    n: int
    support: tuple  # ((frozenset, Fraction), ...) sorted by (size, members)

    def __post_init__(self):
        seen = {}
        for s, p in self.support:
            s = frozenset(s)
            if any(not 0 <= i < self.n for i in s):
                raise PreconditionError("support set outside the ground set", set=sorted(s), n=self.n)
            if s in seen:
                raise PreconditionError("support sets must be distinct", set=sorted(s))
            p = to_scalar(p, RATIONAL)
            if p <= 0:
                raise PreconditionError("probabilities must be positive", set=sorted(s), prob=str(p))
            seen[s] = p
        total = sum(seen.values(), Fraction(0))
        if total != 1:
            raise PreconditionError("probabilities must sum to 1", total=str(total))
        ordered = tuple(sorted(seen.items(), key=lambda sp: (len(sp[0]), sorted(sp[0]))))
        object.__setattr__(self, "support", ordered)

    @classmethod
    def uniform(cls, n, sets):
        sets = [frozenset(s) for s in sets]
        p = Fraction(1, len(sets))
        return cls(n, tuple((s, p) for s in sets))

    @classmethod
    def point_mass(cls, n, subset):
        return cls(n, ((frozenset(subset), Fraction(1)),))

    @property
    def sets(self):
        return [s for s, _ in self.support]

    def size(self):
        """Common support-set size, or ``None`` when sizes differ."""
        sizes = {len(s) for s in self.sets}
        return sizes.pop() if len(sizes) == 1 else None

    @property
    def is_constant_sum(self):
        return self.size() is not None

    def to_json(self):
        return {"n": self.n,
                "support": [{"set": sorted(s), "prob": fmt_scalar(p)} for s, p in self.support]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["n"]), tuple((frozenset(e["set"]), to_scalar(e["prob"], RATIONAL))
                                        for e in obj["support"]))


def partition_function(mu):
    """``sum_S mu(S) prod_{i in S} x_i``: multi-affine, homogeneous exactly when ``mu`` is constant-sum."""
    terms = {}
    for s, p in mu.support:
        exp = tuple(1 if i in s else 0 for i in range(mu.n))
        terms[exp] = p
    return polycore.MultiPoly(mu.n, terms, RATIONAL)


def _require_constant_sum(mu):
    if not mu.is_constant_sum:
        raise PreconditionError(
            "measure is not constant-sum; general stability testing is out of scope",
            sizes=sorted({len(s) for s in mu.sets}))


def certify_strong_rayleigh(mu, strategy="auto", samples=hyperb.DEFAULT_SAMPLES, seed=0):
    """Context of the partition function at the all-ones vector.

    Hyperbolicity goes through ``hyperb.certify_hyperbolic``; afterwards
    the coordinate vectors and ``samples`` seeded nonnegative points are
    checked to lie in the closed hyperbolicity cone.
    """
    _require_constant_sum(mu)
    if mu.size() == 0:
        raise PreconditionError("the point mass on the empty set has a constant partition function")
    h = partition_function(mu)
    ctx = hyperb.certify_hyperbolic(h, polycore.ones(mu.n), strategy=strategy,
                                    samples=samples, seed=seed)
    rng = random.Random(seed)
    points = [polycore.unit(mu.n, i) for i in range(mu.n)]
    points += [tuple(Fraction(rng.randint(0, 10)) for _ in range(mu.n)) for _ in range(samples)]
    for x in points:
        if not hyperb.cone_membership(ctx, x, "closed"):
            raise NotHyperbolic("nonnegative point outside the hyperbolicity cone",
                                witness=[str(c) for c in x], seed=seed)
    return ctx


def marginal(mu, i):
    """``P[i in S]``; equals the trace of the ``i``-th coordinate vector in the certified context."""
    if not 0 <= i < mu.n:
        raise IndexError(f"element {i} outside ground set of size {mu.n}")
    return sum((p for s, p in mu.support if i in s), Fraction(0))


def rayleigh_partition(mu, k, ctx=None):
    """Greedy partition of the coordinate vectors of a certified measure into ``k`` parts.

    Parts are indexed ``0..k-1`` and the marginal bound holds for each part.
    """
    if ctx is None:
        raise PreconditionError("a certified context is required; run certify_strong_rayleigh first")
    if ctx.h != partition_function(mu):
        raise PreconditionError("context does not belong to this measure")
    units = [polycore.unit(mu.n, i) for i in range(mu.n)]
    inst = partition.make_instance(ctx, units, k)
    return partition.greedy_partition(inst)


class MatroidView:
    """Matroid given by its bases; the exchange axiom is checked on construction."""

    def __init__(self, n, bases, seed=0):
        bases = sorted({_mask(b) for b in bases}, key=lambda m: _members(m))
        if not bases:
            raise PreconditionError("a matroid needs at least one basis")
        sizes = {b.bit_count() for b in bases}
        if len(sizes) != 1:
            raise ExchangeAxiomError("bases have different sizes", sizes=sorted(sizes))
        if any(b >> n for b in bases):
            raise PreconditionError("basis outside the ground set", n=n)
        self.n = n
        self.d = sizes.pop()
        self._bases = bases
        self._set = frozenset(bases)
        self._rank_cache = {}
        self._table = None
        self._check_exchange(seed)

    @property
    def bases(self):
        return [frozenset(_members(b)) for b in self._bases]

    def _exchange_fails(self, b1, b2):
        for x in _members(b1 & ~b2):
            base = b1 & ~(1 << x)
            if not any(base | (1 << y) in self._set for y in _members(b2 & ~b1)):
                return x
        return None

    def _check_exchange(self, seed):
        if self.n <= EXCHANGE_FULL_MAX_N:
            pairs = itertools.product(self._bases, repeat=2)
        else:
            rng = random.Random(seed)
            pairs = ((rng.choice(self._bases), rng.choice(self._bases)) for _ in range(EXCHANGE_SAMPLES))
        for b1, b2 in pairs:
            x = self._exchange_fails(b1, b2)
            if x is not None:
                raise ExchangeAxiomError("basis exchange fails", first=_members(b1),
                                         second=_members(b2), element=x)

    def rank(self, subset):
        mask = subset if isinstance(subset, int) else _mask(subset)
        r = self._rank_cache.get(mask)
        if r is None:
            r = max((mask & b).bit_count() for b in self._bases)
            self._rank_cache[mask] = r
        return r

    def rank_table(self):
        """Ranks of all ``2**n`` subsets, indexed by bitmask."""
        if self._table is None:
            n = self.n
            indep = np.zeros(1 << n, dtype=bool)
            indep[self._bases] = True
            # independent sets are the subsets of bases
            for i in range(n):
                view = indep.reshape(-1, 2, 1 << i)
                view[:, 0, :] |= view[:, 1, :]
            popcount = np.zeros(1 << n, dtype=np.int16)
            for i in range(n):
                popcount.reshape(-1, 2, 1 << i)[:, 1, :] += 1
            table = np.where(indep, popcount, 0).astype(np.int16)
            for i in range(n):
                view = table.reshape(-1, 2, 1 << i)
                np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
            self._table = (table, popcount)
        return self._table[0]

    def __repr__(self):
        return f"MatroidView(n={self.n}, d={self.d}, bases={len(self._bases)})"

    def to_json(self):
        return {"n": self.n, "support": [{"set": _members(b)} for b in self._bases]}

    @classmethod
    def from_json(cls, obj):
        sets = obj["bases"] if "bases" in obj else [e["set"] for e in obj["support"]]
        return cls(int(obj["n"]), sets)

    @classmethod
    def uniform(cls, d, n):
        return cls(n, itertools.combinations(range(n), d))

    @classmethod
    def graphic(cls, edges, vertices=None):
        """Cycle matroid of a connected graph; elements are edge positions."""
        edges = [tuple(e) for e in edges]
        if vertices is None:
            vertices = 1 + max((max(e) for e in edges), default=-1)
        trees = [c for c in itertools.combinations(range(len(edges)), vertices - 1)
                 if _is_forest([edges[i] for i in c], vertices)]
        if not trees:
            raise PreconditionError("graph is not connected")
        return cls(len(edges), trees)

    @classmethod
    def from_edge_list(cls, path):
        edges = []
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    u, v = line.split()[:2]
                    edges.append((int(u), int(v)))
        return cls.graphic(edges)


def _is_forest(edges, vertices):
    parent = list(range(vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def complete_graph_edges(v):
    return list(itertools.combinations(range(v), 2))


def support_matroid(mu):
    """Matroid whose bases are the support sets of a constant-sum measure."""
    _require_constant_sum(mu)
    return MatroidView(mu.n, mu.sets)


def matroid_rank(matroid, subset):
    """``max |S & B|`` over bases ``B``."""
    return matroid.rank(subset)


def edmonds_check(matroid, k):
    """Check ``k*r(S) >= k*d - (n - |S|)`` on every subset; the first violation is the witness.

    Subsets are ordered by size, then lexicographically, so the witness is
    the smallest violating set in that order.
    """
    n, d = matroid.n, matroid.d
    if n > EDMONDS_MAX_N:
        raise CapExceeded("subset enumeration capped", n=n, cap=EDMONDS_MAX_N)
    table = matroid.rank_table().astype(np.int64)
    size = matroid._table[1].astype(np.int64)
    bad = np.flatnonzero(k * table < k * d - (n - size))
    if len(bad) == 0:
        return {"passed": True, "k": k, "witness": None}
    smallest = size[bad].min()
    subset = min(_members(int(b)) for b in bad if size[b] == smallest)
    r = int(table[_mask(subset)])
    return {"passed": False, "k": k,
            "witness": {"set": subset, "rank": r,
                        "required": fmt_scalar(Fraction(k * d - (n - len(subset)), k))}}


def find_disjoint_bases(matroid, k, budget=PACKING_BUDGET):
    """``k`` pairwise-disjoint bases by backtracking, or ``None`` when none exist."""
    if len(matroid._bases) > MAX_BASES:
        raise CapExceeded("too many bases for backtracking", bases=len(matroid._bases), cap=MAX_BASES)
    if k * matroid.d > matroid.n:
        return None
    bases = matroid._bases
    nodes = 0
    chosen = []

    def walk(start, used):
        nonlocal nodes
        if len(chosen) == k:
            return True
        for idx in range(start, len(bases)):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("disjoint-bases search exceeded its budget", budget=budget)
            b = bases[idx]
            if b & used:
                continue
            chosen.append(b)
            # bases are taken in increasing index order, so the search is over sets of bases
            if walk(idx + 1, used | b):
                return True
            chosen.pop()
        return False

    return [_members(b) for b in chosen] if walk(0, 0) else None


def packing_threshold(k):
    """``(1/sqrt(k-1) - 1/sqrt(k))**2`` as an exact surd."""
    if k < 2:
        raise PreconditionError("packing threshold needs k >= 2", k=k)
    q = k * (k - 1)
    return QuadSurd(Fraction(1, k - 1) + Fraction(1, k), Fraction(-2, q), q)


def packing_certificate(mu, k, ctx=None, budget=PACKING_BUDGET):
    """Compare the largest marginal with the packing threshold and search for disjoint bases.

    ``status`` is ``"confirmed"`` when the threshold holds and bases were
    found, ``"silent"`` when the threshold does not hold, and
    ``"contradiction"`` when it holds but no bases exist.
    """
    if ctx is None:
        raise PreconditionError("a certified context is required; run certify_strong_rayleigh first")
    threshold = packing_threshold(k)
    top = max(marginal(mu, i) for i in range(mu.n))
    applies = threshold.compare(top) >= 0
    matroid = support_matroid(mu)
    bases = find_disjoint_bases(matroid, k, budget)
    if applies:
        status = "confirmed" if bases is not None else "contradiction"
    else:
        status = "silent"
    report = {
        "k": k,
        "threshold": threshold.to_json(),
        "max_marginal": fmt_scalar(top),
        "theorem_applies": applies,
        "bases": bases,
        "packing_exists": bases is not None,
        "status": status,
    }
    if matroid.n <= EDMONDS_MAX_N:
        report["edmonds"] = edmonds_check(matroid, k)["passed"]
    return report
