"""Ideal-simple semirings built from parasemifields, with axiom and ideal checkers.

Kinds:

* ``ZP_ZERO_MULT``: Z_p with its usual addition and zero multiplication.
* ``ADJOIN_ZERO``: a parasemifield G(F) plus a new element that is neutral
  for the join and absorbing for the product.
* ``GROUP_WITH_ABSORBING_ADD``: Z^r plus an element 0; every sum is 0.
* ``SUBGROUP_EMBEDDING``: A = Z^m with an absorbing 0; ``M`` embeds the
  multiplicative group Z^n of G(F) into A, and x + y (semiring sum) is
  ``M(M^-1(y - x) | 0) + x`` when ``y - x`` lies in the image, else 0.

Semiring multiplication on nonzero elements is always vector addition.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import _exact
from .forest import RootedForest, parse_forest
from .parasemifield import join_coords

__all__ = [
    "ZP_ZERO_MULT",
    "ADJOIN_ZERO",
    "GROUP_WITH_ABSORBING_ADD",
    "SUBGROUP_EMBEDDING",
    "ABSORBING_ZERO",
    "SemiringInstance",
    "SemifieldSpecError",
    "AxiomReport",
    "make_instance",
    "parse_semifield_spec",
    "check_semiring_axioms",
    "check_ideal_simple_finite",
]

ZP_ZERO_MULT = "ZP_ZERO_MULT"
ADJOIN_ZERO = "ADJOIN_ZERO"
GROUP_WITH_ABSORBING_ADD = "GROUP_WITH_ABSORBING_ADD"
SUBGROUP_EMBEDDING = "SUBGROUP_EMBEDDING"
KINDS = (ZP_ZERO_MULT, ADJOIN_ZERO, GROUP_WITH_ABSORBING_ADD, SUBGROUP_EMBEDDING)


class _AbsorbingZero:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSORBING_ZERO"

    def __reduce__(self):
        return (_AbsorbingZero, ())


ABSORBING_ZERO = _AbsorbingZero()


class SemifieldSpecError(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class SemiringInstance:
    kind: str
    p: int | None = None
    forest: RootedForest | None = None  # None encodes the trivial parasemifield Z^0
    rank: int = 0  # rank of the group part: n for ADJOIN_ZERO, r, or m for SUBGROUP_EMBEDDING
    matrix: tuple[tuple[int, ...], ...] | None = None
    preimage: Callable[[tuple[int, ...]], tuple[int, ...] | None] | None = field(
        default=None, repr=False, compare=False
    )

    @property
    def p_rank(self) -> int:
        return 0 if self.forest is None else self.forest.n

    @property
    def is_finite(self) -> bool:
        return self.kind == ZP_ZERO_MULT

    @property
    def zero(self):
        return 0 if self.kind == ZP_ZERO_MULT else ABSORBING_ZERO

    def elements(self) -> list:
        if not self.is_finite:
            raise ValueError(f"{self.kind} instances are infinite")
        return list(range(self.p))

    def _pjoin(self, u: tuple[int, ...], v: tuple[int, ...]) -> tuple[int, ...]:
        if self.forest is None:
            return ()
        return join_coords(self.forest, u, v)

    def _solve(self, target: tuple[int, ...]) -> tuple[int, ...] | None:
        if self.preimage is not None:
            return self.preimage(target)
        n = self.p_rank
        if n == 0:
            return () if not any(target) else None
        x = _exact.solve_q(self.matrix, target)
        if x is None or any(q.denominator != 1 for q in x):
            return None
        d = tuple(int(q) for q in x)
        if self._apply(d) != target:
            return None
        return d

    def _apply(self, d: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, d)) for row in self.matrix)

    def in_image(self, a: Sequence[int]) -> bool:
        return self._solve(tuple(a)) is not None

    def add(self, x, y):
        k = self.kind
        if k == ZP_ZERO_MULT:
            return (x + y) % self.p
        if k == ADJOIN_ZERO:
            if x is ABSORBING_ZERO:
                return y
            if y is ABSORBING_ZERO:
                return x
            return self._pjoin(x, y)
        if k == GROUP_WITH_ABSORBING_ADD:
            return ABSORBING_ZERO
        if x is ABSORBING_ZERO or y is ABSORBING_ZERO:
            return ABSORBING_ZERO
        diff = tuple(b - a for a, b in zip(x, y))
        d = self._solve(diff)
        if d is None:
            return ABSORBING_ZERO
        lifted = self._apply(self._pjoin(d, (0,) * self.p_rank))
        return tuple(a + b for a, b in zip(lifted, x))

    def mul(self, x, y):
        if self.kind == ZP_ZERO_MULT:
            return 0
        if x is ABSORBING_ZERO or y is ABSORBING_ZERO:
            return ABSORBING_ZERO
        return tuple(a + b for a, b in zip(x, y))

    def one(self):
        if self.kind == ZP_ZERO_MULT:
            raise ValueError("zero multiplication has no unit")
        return (0,) * self.rank

    def encode(self, x):
        """JSON-friendly form of an element."""
        if x is ABSORBING_ZERO:
            return "0"
        return x if isinstance(x, int) else list(x)


def make_instance(spec: dict, check: bool = True) -> SemiringInstance:
    """Build an instance from a semifield-spec mapping.

    ``check=False`` skips the primality and injectivity checks; it exists to
    build deliberately broken instances for negative tests.
    """
    if not isinstance(spec, dict) or spec.get("kind") not in KINDS:
        raise SemifieldSpecError(f"kind must be one of {', '.join(KINDS)}")
    kind = spec["kind"]
    if kind == ZP_ZERO_MULT:
        p = spec.get("p")
        if isinstance(p, bool) or not isinstance(p, int) or p < 1:
            raise SemifieldSpecError("p must be a positive integer")
        if check and not _is_prime(p):
            raise SemifieldSpecError(f"p = {p} is not prime")
        return SemiringInstance(kind, p=p)
    if kind == GROUP_WITH_ABSORBING_ADD:
        r = spec.get("rank")
        if isinstance(r, bool) or not isinstance(r, int) or r < 0:
            raise SemifieldSpecError("rank must be a nonnegative integer")
        return SemiringInstance(kind, rank=r)
    forest = _forest_of(spec)
    n = 0 if forest is None else forest.n
    if kind == ADJOIN_ZERO:
        return SemiringInstance(kind, forest=forest, rank=n)
    matrix = spec.get("matrix")
    if not isinstance(matrix, list) or not matrix or not all(isinstance(r, list) for r in matrix):
        raise SemifieldSpecError("matrix must be a nonempty list of integer rows")
    rows = []
    for row in matrix:
        if len(row) != n or any(isinstance(x, bool) or not isinstance(x, int) for x in row):
            raise SemifieldSpecError(f"every matrix row needs {n} integers")
        rows.append(tuple(row))
    if check and n and _exact.rank_q(rows) != n:
        raise SemifieldSpecError("matrix is not injective (rank below the parasemifield rank)")
    return SemiringInstance(kind, forest=forest, rank=len(rows), matrix=tuple(rows),
                            preimage=spec.get("preimage") if not check else None)


def _forest_of(spec: dict) -> RootedForest | None:
    f = spec.get("forest")
    if f is None:
        return None
    if isinstance(f, RootedForest):
        return f
    return parse_forest(f)


def parse_semifield_spec(text: str | dict) -> SemiringInstance:
    import json

    obj = json.loads(text) if isinstance(text, str) else text
    return make_instance(obj)


# --- checkers ---------------------------------------------------------------

@dataclass
class AxiomReport:
    passed: bool
    checked: int
    law: str | None = None
    counterexample: tuple | None = None

    def as_dict(self, s: SemiringInstance | None = None) -> dict:
        out = {"passed": self.passed, "checked": self.checked}
        if not self.passed:
            enc = s.encode if s is not None else (lambda x: x)
            out["law"] = self.law
            out["counterexample"] = [enc(x) for x in self.counterexample]
        return out


def _sampler(s: SemiringInstance, rng: random.Random, bound: int):
    """Triples of elements; group parts stay within ``bound`` before embedding.

    For the embedding kind most triples share a coset of the image, so that
    sums are not almost always 0.
    """
    if s.kind == ZP_ZERO_MULT:
        return lambda: tuple(rng.randrange(s.p) for _ in range(3))

    def vec(k: int) -> tuple[int, ...]:
        return tuple(rng.randint(-bound, bound) for _ in range(k))

    def plain() -> object:
        return ABSORBING_ZERO if rng.random() < 0.1 else vec(s.rank)

    if s.kind != SUBGROUP_EMBEDDING:
        return lambda: (plain(), plain(), plain())

    def coset_triple():
        base = vec(s.rank)
        out = []
        for _ in range(3):
            r = rng.random()
            if r < 0.08:
                out.append(ABSORBING_ZERO)
            elif r < 0.18:
                out.append(vec(s.rank))
            else:
                d = s._apply(vec(s.p_rank)) if s.p_rank else (0,) * s.rank
                out.append(tuple(a + b for a, b in zip(base, d)))
        return tuple(out)

    return coset_triple


def check_semiring_axioms(s: SemiringInstance, samples: int = 1000, seed: int = 0,
                          bound: int = 20) -> AxiomReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = random.Random(seed)
    draw = _sampler(s, rng, bound)
    add, mul = s.add, s.mul
    laws = (
        ("add associative", lambda x, y, z: add(add(x, y), z) == add(x, add(y, z))),
        ("add commutative", lambda x, y, z: add(x, y) == add(y, x)),
        ("mul associative", lambda x, y, z: mul(mul(x, y), z) == mul(x, mul(y, z))),
        ("mul commutative", lambda x, y, z: mul(x, y) == mul(y, x)),
        ("distributive", lambda x, y, z: mul(x, add(y, z)) == add(mul(x, y), mul(x, z))),
    )
    for i in range(samples):
        t = draw()
        for name, law in laws:
            if not law(*t):
                return AxiomReport(False, i + 1, name, t)
    return AxiomReport(True, samples)


def _ideal_closure(s: SemiringInstance, seed: set) -> set:
    elems = s.elements()
    ideal = set(seed)
    while True:
        extra = {s.add(a, b) for a in ideal for b in ideal} | {s.mul(r, a) for r in elems for a in ideal}
        if extra <= ideal:
            return ideal
        ideal |= extra


def check_ideal_simple_finite(s: SemiringInstance) -> bool:
    """Every ideal has at most one element or is everything.

    An ideal with two or more elements contains the ideal generated by two of
    them, so checking the ideals generated by pairs is enough.
    """
    elems = s.elements()
    if len(elems) < 3:
        warnings.warn(f"|S| = {len(elems)} is below 3; ideal-simplicity holds vacuously", stacklevel=2)
    full = set(elems)
    for i, a in enumerate(elems):
        for b in elems[i + 1:]:
            if _ideal_closure(s, {a, b}) != full:
                return False
    return True
