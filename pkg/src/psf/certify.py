"""Non-generation certificates and bounds on the minimal generator count m(F).

Every certificate records an invariant preserved by both ``+`` and the join,
violated by some element of G(F); ``Certificate.check`` re-verifies it from
scratch with exact arithmetic.

* SIGN: all generators have the same weak sign at a vertex. Joins select a
  coordinate from one operand and sums keep sign classes.
* RATIO (isolated forests only): ``g_j >= a * g_k`` for every generator.
* CARDINALITY_DEPTH: fewer generators than ``depth + 1``.
* CHAIN: the projection onto some root-to-leaf chain fails to generate
  Z^chain as an additive semigroup. Projection onto a parent-closed set is a
  homomorphism and on a chain the join selects one operand, so the image of
  the closure is the additive semigroup spanned by the projected generators.
  Such a semigroup is everything only if the generators span a lattice of
  index 1 and admit a relation with all coefficients >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact
from .derivation import GeneratorSet
from .forest import RootedForest, is_isomorphic, kpn, path, shape_stats

__all__ = [
    "Certificate",
    "CertificateError",
    "SIGN",
    "RATIO",
    "CARDINALITY_DEPTH",
    "CHAIN",
    "find_sign_certificate",
    "find_ratio_certificate",
    "cardinality_depth_certificate",
    "find_chain_certificate",
    "find_certificate",
    "ratio_feasible_interval",
    "BoundsReport",
    "bounds_report",
    "sign_mask",
    "ratio_mask",
    "ChainFilter",
]

SIGN = "SIGN"
RATIO = "RATIO"
CARDINALITY_DEPTH = "CARDINALITY_DEPTH"
CHAIN = "CHAIN"

GE0 = ">=0"
LE0 = "<=0"


class CertificateError(ValueError):
    """A certificate was requested where its invariant is not known to hold."""


def _fraction_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


@dataclass(frozen=True)
class Certificate:
    kind: str
    forest: RootedForest = field(repr=False)
    gens: tuple[tuple[int, ...], ...]
    vertex: int | None = None
    polarity: str | None = None
    j: int | None = None
    k: int | None = None
    a: Fraction | None = None
    depth: int | None = None
    chain: tuple[int, ...] | None = None
    reason: str | None = None

    def check(self) -> bool:
        """Re-verify the invariant against the stored generators."""
        f, gens = self.forest, self.gens
        if self.kind == SIGN:
            w = self.vertex
            if self.polarity == GE0:
                return all(g[w] >= 0 for g in gens)
            return self.polarity == LE0 and all(g[w] <= 0 for g in gens)
        if self.kind == RATIO:
            return (
                f.is_isolated
                and self.j != self.k
                and self.a is not None
                and self.a > 0
                and all(g[self.j] >= self.a * g[self.k] for g in gens)
            )
        if self.kind == CARDINALITY_DEPTH:
            return self.depth == f.depth and len(gens) <= f.depth
        if self.kind == CHAIN:
            if self.chain not in f.maximal_chains():
                return False
            return _chain_failure([[g[v] for v in self.chain] for g in gens]) is not None
        return False

    def invariant_holds(self, u: Sequence[int]) -> bool:
        """Whether a vector satisfies the invariant every closure element must satisfy."""
        if self.kind == SIGN:
            c = u[self.vertex]
            return c >= 0 if self.polarity == GE0 else c <= 0
        if self.kind == RATIO:
            return u[self.j] >= self.a * u[self.k]
        raise CertificateError(f"{self.kind} certificates carry no per-vector invariant")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == SIGN:
            out.update(vertex=self.vertex, polarity=self.polarity)
        elif self.kind == RATIO:
            out.update(j=self.j, k=self.k, a=_fraction_json(self.a))
        elif self.kind == CARDINALITY_DEPTH:
            out.update(depth=self.depth, size=len(self.gens))
        elif self.kind == CHAIN:
            out.update(chain=list(self.chain), reason=self.reason)
        out["gens"] = [list(g) for g in self.gens]
        return out


def find_sign_certificate(gs: GeneratorSet) -> Certificate | None:
    gens = tuple(gs.coords)
    for w in range(gs.forest.n):
        col = [g[w] for g in gens]
        if all(c >= 0 for c in col):
            return Certificate(SIGN, gs.forest, gens, vertex=w, polarity=GE0)
        if all(c <= 0 for c in col):
            return Certificate(SIGN, gs.forest, gens, vertex=w, polarity=LE0)
    return None


def ratio_feasible_interval(gens: Sequence[Sequence[int]], j: int, k: int):
    """Exact set {a > 0 : g_j >= a g_k for all g} as (lo, lo_closed, hi); None if empty.

    ``hi`` is None for an unbounded interval; ``lo`` is 0 (open) when no
    constraint bounds a from below.
    """
    lo, lo_closed, hi = Fraction(0), False, None
    for g in gens:
        num, den = g[j], g[k]
        if den == 0:
            if num < 0:
                return None
            continue
        r = Fraction(num, den)
        if den > 0:
            if hi is None or r < hi:
                hi = r
        elif r > lo:  # r <= 0 bounds nothing, since a > 0
            lo, lo_closed = r, True
    if hi is not None:
        if hi < lo or hi <= 0 or (hi == lo and not lo_closed):
            return None
    return lo, lo_closed, hi


def find_ratio_certificate(gs: GeneratorSet) -> Certificate | None:
    """First ordered pair (j, k) with a feasible ratio, using the smallest admissible a.

    The witness is the closed lower end of the feasible interval when there is
    one, else ``1/D`` with ``D = max |g|`` (always feasible then).
    """
    f = gs.forest
    if not f.is_isolated:
        raise CertificateError("ratio certificates are only sound on isolated forests")
    gens = tuple(gs.coords)
    big = max(1, gs.max_abs())
    for j in range(f.n):
        for k in range(f.n):
            if j == k:
                continue
            iv = ratio_feasible_interval(gens, j, k)
            if iv is None:
                continue
            lo, lo_closed, hi = iv
            a = lo if lo_closed else Fraction(1, big)
            return Certificate(RATIO, f, gens, j=j, k=k, a=a)
    return None


def cardinality_depth_certificate(f: RootedForest, gs: GeneratorSet) -> Certificate | None:
    if gs.forest is not f and not f.same_structure(gs.forest):
        raise ValueError("generator set lives on a different forest")
    if len(gs) <= f.depth:
        return Certificate(CARDINALITY_DEPTH, gs.forest, tuple(gs.coords), depth=f.depth)
    return None


def _chain_failure(projected: list[list[int]]) -> str | None:
    if not projected:
        return "rank"
    dim = len(projected[0])
    index = _exact.lattice_index(projected, dim)
    if index is None:
        return "rank"
    if index != 1:
        return "index"
    if _exact.positive_relation(projected) is None:
        return "cone"
    return None


def find_chain_certificate(gs: GeneratorSet) -> Certificate | None:
    f = gs.forest
    gens = tuple(gs.coords)
    for chain in f.maximal_chains():
        reason = _chain_failure([[g[v] for v in chain] for g in gens])
        if reason is not None:
            return Certificate(CHAIN, f, gens, chain=tuple(chain), reason=reason)
    return None


def find_certificate(gs: GeneratorSet, chains: bool = True) -> Certificate | None:
    """Cheapest applicable certificate: cardinality, sign, ratio (isolated forests), chain."""
    cert = cardinality_depth_certificate(gs.forest, gs) or find_sign_certificate(gs)
    if cert is None and gs.forest.is_isolated:
        cert = find_ratio_certificate(gs)
    if cert is None and chains:
        cert = find_chain_certificate(gs)
    return cert


# --- batched filters --------------------------------------------------------

def sign_mask(batch: np.ndarray) -> np.ndarray:
    """Rows of a (batch, s, n) integer array that admit a SIGN certificate."""
    nonneg = (batch >= 0).all(axis=1)
    nonpos = (batch <= 0).all(axis=1)
    return (nonneg | nonpos).any(axis=1)


def ratio_mask(batch: np.ndarray) -> np.ndarray:
    """Rows of a (batch, s, n) integer array that admit a RATIO certificate.

    Integer cross-multiplication only, so the answer is exact.
    """
    batch = np.asarray(batch, dtype=np.int64)
    _, s, n = batch.shape
    out = np.zeros(batch.shape[0], dtype=bool)
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            num, den = batch[:, :, j], batch[:, :, k]
            ok = ((den != 0) | (num >= 0)).all(axis=1)
            upper = den > 0
            # every upper bound num/den must be positive
            ok &= (~upper | (num > 0)).all(axis=1)
            lower = den < 0
            for p in range(s):
                for q in range(s):
                    # lower bound (-num_p)/(-den_p) <= upper bound num_q/den_q
                    bad = lower[:, p] & upper[:, q] & ((-num[:, p]) * den[:, q] > num[:, q] * (-den[:, p]))
                    ok &= ~bad
            out |= ok
    return out


class ChainFilter:
    """Batched CHAIN test for one forest, with results cached per projected set.

    Single-vertex chains reduce to a gcd test (the sign part is the SIGN
    certificate), done in numpy; longer chains go through the exact test.
    """

    def __init__(self, f: RootedForest):
        chains = f.maximal_chains()
        self.points = np.array([c[0] for c in chains if len(c) == 1], dtype=np.intp)
        self.long = [list(c) for c in chains if len(c) > 1]
        self._cache: dict = {}

    def mask(self, batch: np.ndarray) -> np.ndarray:
        """Rows of a (batch, s, n) array that admit a CHAIN certificate."""
        batch = np.asarray(batch, dtype=np.int64)
        out = np.zeros(batch.shape[0], dtype=bool)
        if len(self.points):
            g = np.gcd.reduce(batch[:, :, self.points], axis=1)
            out |= (g != 1).any(axis=1)
        for chain in self.long:
            for r in np.nonzero(~out)[0]:
                proj = tuple(sorted(tuple(v) for v in batch[r][:, chain].tolist()))
                hit = self._cache.get(proj)
                if hit is None:
                    hit = _chain_failure([list(v) for v in proj]) is not None
                    self._cache[proj] = hit
                if hit:
                    out[r] = True
        return out


# --- bounds -----------------------------------------------------------------

@dataclass
class BoundsReport:
    lower: int
    upper: int
    exact: int | None = None
    provenance: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"lower": self.lower, "upper": self.upper}
        if self.exact is not None:
            out["exact"] = self.exact
        out["provenance"] = list(self.provenance)
        return out


def _paths_profile(f: RootedForest) -> tuple[int, int] | None:
    """(k, n) when ``f`` is k disjoint rooted paths of n vertices each."""
    k = len(f.roots)
    if f.n % k:
        return None
    n = f.n // k
    return (k, n) if is_isomorphic(f, kpn(k, n)) else None


def _exact_value(f: RootedForest) -> tuple[int, str] | None:
    if f.is_isolated:
        return (2, "isolated forest on at most 2 vertices") if f.n <= 2 else (3, "isolated forest on 3+ vertices")
    if len(f.roots) == 1 and is_isomorphic(f, path(f.n)):
        return f.n + 1, "rooted path"
    prof = _paths_profile(f)
    if prof is not None:
        k, n = prof
        if k <= n + 1:
            return n + 1, "k paths of length n with k <= n+1"
        if n == 2:
            return 3, "disjoint paths of length 2"
    return None


def bounds_report(f: RootedForest) -> BoundsReport:
    depth = f.depth
    width = shape_stats(f).width
    lower = depth + 1
    prov = ["lower: depth+1 (too few generators for a root path)"]
    if width <= 1:
        upper = depth + 1
        prov.append("upper: width 1 gives depth+1")
    elif width == 2:
        upper = 2 * depth
        prov.append("upper: width 2 gives 2*depth")
    else:
        upper = 3 * depth
        prov.append("upper: width 3+ gives 3*depth")
    exact = None
    known = _exact_value(f)
    if known is not None:
        exact = known[0]
        prov.append(f"exact: {known[1]}")
    elif lower == upper:
        exact = lower
        prov.append("exact: bounds coincide")
    return BoundsReport(lower, upper, exact, prov)
