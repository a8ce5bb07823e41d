"""Explicit generating sets for G(F, R), each shipped with replayable witnesses.

Every constructor returns a :class:`GeneratorSet` whose witnesses derive each
unit vector ``e_w`` and the all ``-1`` vector. Together these generate the
whole group additively, so a successful replay proves generation. Witnesses
never use a zero constant: wherever a zero vector is needed, a term that
evaluates to zero is spelled out instead.
"""

from __future__ import annotations

from typing import Sequence

from .derivation import (
    NEGATIVE,
    Add,
    Derivation,
    Gen,
    GeneratorSet,
    Join,
    Scale,
    evaluate,
    substitute,
    sum_terms,
    times,
    unit_role,
)
from .forest import (
    RootedForest,
    attach_root,
    disjoint_union,
    induced_subforest,
    kpn as kpn_forest,
    leaf_minor_embedding,
    shape_stats,
)
from .forest import isol as isol_forest
from .forest import path as path_forest
from .parasemifield import ForestVector

__all__ = [
    "gens_isol",
    "gens_path",
    "gens_union",
    "gens_root_extension",
    "gens_tkl",
    "gens_kpn",
    "gens_generic",
    "gens_layered",
    "project_genset",
    "MissingWitnesses",
]


class MissingWitnesses(ValueError):
    """The base generator set has no complete witness map."""


def _check_count(name: str, value: int, least: int = 1) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < least:
        raise ValueError(f"{name} must be an integer >= {least}, got {value!r}")


def _join_all(terms: Sequence[Derivation]) -> Derivation:
    acc = terms[0]
    for t in terms[1:]:
        acc = Join(acc, t)
    return acc


def _finish(gs: GeneratorSet, verify: bool) -> GeneratorSet:
    if verify:
        gs.assert_replays()
    return gs


class _Basis:
    """Unit and negative witnesses of a base set, for writing any target vector.

    A target ``t`` is written as ``k * negative + sum_v w_v * unit(v)`` with
    ``k >= 1`` and all ``w_v >= 0``.
    """

    def __init__(self, gs: GeneratorSet):
        if not gs.has_complete_witnesses():
            raise MissingWitnesses("base generator set needs unit and negative witnesses")
        n = gs.forest.n
        self.n = n
        self.units = [gs.witnesses[unit_role(w)] for w in range(n)]
        self.neg = gs.witnesses[NEGATIVE]
        cached = getattr(gs, "_negative_value", None)
        self.neg_value = cached if cached is not None else evaluate(gs.forest, gs.coords, self.neg)
        if not all(c < 0 for c in self.neg_value):
            raise MissingWitnesses("negative witness does not evaluate to a negative vector")
        self._prefix: list[Derivation | None] | None = None
        self._suffix: list[Derivation | None] | None = None

    def combine(self, target: Sequence[int]) -> Derivation:
        u = self.neg_value
        k = 1
        for t, c in zip(target, u):
            # need t - k*c >= 0 with c < 0
            k = max(k, -(t // -c))
        terms: list[Derivation] = [times(k, self.neg)]
        for v, (t, c) in enumerate(zip(target, u)):
            w = t - k * c
            if w > 0:
                terms.append(times(w, self.units[v]))
        return sum_terms(terms)

    def constant(self, c: int) -> Derivation:
        return self.combine([c] * self.n)

    def minus_unit(self, w: int) -> Derivation:
        """Term for ``-e_w``: negative plus |u_v| e_v for v != w, with shared partial sums."""
        if self._prefix is None:
            mags = [-c for c in self.neg_value]
            terms = [times(m, self.units[v]) for v, m in enumerate(mags)]
            prefix: list[Derivation | None] = [None]
            for t in terms:
                prefix.append(t if prefix[-1] is None else Add(prefix[-1], t))
            suffix: list[Derivation | None] = [None]
            for t in reversed(terms):
                suffix.append(t if suffix[-1] is None else Add(t, suffix[-1]))
            suffix.reverse()
            self._prefix, self._suffix = prefix, suffix
        parts: list[Derivation] = [self.neg]
        before, after = self._prefix[w], self._suffix[w + 1]
        if before is not None:
            parts.append(before)
        if after is not None:
            parts.append(after)
        extra = -self.neg_value[w] - 1
        if extra > 0:
            parts.append(times(extra, self.units[w]))
        return sum_terms(parts)


def _with_negative(gs: GeneratorSet, value: Sequence[int]) -> GeneratorSet:
    gs._negative_value = tuple(value)  # type: ignore[attr-defined]
    return gs


def _isol_terms(n: int, a: Derivation, b: Derivation, c: Derivation) -> tuple[list[Derivation], Derivation]:
    """Unit and zero terms from generators ``a_i = i``, ``b_i = n^2+1-i^2``, ``c = -1``.

    Works verbatim wherever these three evaluate to vectors that are constant
    on n independent blocks, which is how the multi-copy construction reuses it.
    """
    k = n * n + 1
    vs = []
    for i in range(1, n + 1):
        u_i = Add(Scale(2 * i, a), b)
        # coordinate i of u_i is k + i^2, strictly the largest; bring it down to 1
        vs.append(Add(u_i, times(k + i * i - 1, c)))
    zero = Add(_join_all(vs), c)
    return [Join(v, zero) for v in vs], zero


def gens_isol(n: int, verify: bool = True) -> GeneratorSet:
    """Generators of G(Isol_n): two for n <= 2, three for n >= 3."""
    _check_count("n", n)
    f = isol_forest(n)
    if n == 1:
        gs = GeneratorSet(f, [[1], [-1]], {unit_role(0): Gen(1), NEGATIVE: Gen(2)})
    elif n == 2:
        g1, g2 = Gen(1), Gen(2)
        wit = {
            unit_role(0): Add(Join(g1, Scale(5, g1)), Scale(2, g2)),
            unit_role(1): Add(Join(g2, Scale(5, g2)), Scale(2, g1)),
            NEGATIVE: Add(g1, g2),
        }
        gs = GeneratorSet(f, [[1, -2], [-2, 1]], wit)
    else:
        k = n * n + 1
        a = [i for i in range(1, n + 1)]
        b = [k - i * i for i in range(1, n + 1)]
        c = [-1] * n
        units, _ = _isol_terms(n, Gen(1), Gen(2), Gen(3))
        wit = {unit_role(w): units[w] for w in range(n)}
        wit[NEGATIVE] = Gen(3)
        gs = GeneratorSet(f, [a, b, c], wit)
    gs.label = f"isol({n})"
    return _finish(_with_negative(gs, [-1] * n), verify)


def gens_path(n: int, verify: bool = True) -> GeneratorSet:
    """Units plus the all ``-1`` vector: n+1 generators of G(P_n)."""
    _check_count("n", n)
    f = path_forest(n)
    gens = [[1 if j == i else 0 for j in range(n)] for i in range(n)] + [[-1] * n]
    wit = {unit_role(w): Gen(w + 1) for w in range(n)}
    wit[NEGATIVE] = Gen(n + 1)
    gs = GeneratorSet(f, gens, wit, label=f"path({n})")
    return _finish(_with_negative(gs, [-1] * n), verify)


def gens_union(base: GeneratorSet, m: int, verify: bool = True) -> GeneratorSet:
    """Generators for m disjoint copies of ``base.forest``.

    Two copies need one extra generator, three or more need two.
    """
    _check_count("m", m, 2)
    basis = _Basis(base)
    f = base.forest
    n, k = f.n, len(base)
    forest = disjoint_union(*([f] * m))
    g = base.coords
    if m == 2:
        C = 1 + base.max_abs()
        gens = [[x + 2 * C for x in gi] + [x - 4 * C for x in gi] for gi in g]
        gens.append([-C] * n + [2 * C] * n)
        last = Gen(k + 1)
        # (g_i | g_i) = h_i + 2 h_{k+1}
        dmemo: dict = {}
        diag_map = {i: Add(Gen(i), Scale(2, last)) for i in range(1, k + 1)}

        def diag(d: Derivation) -> Derivation:
            return substitute(d, diag_map, dmemo)

        # (g_i | 0) = (h_i | h_{k+1}) + (-2C | -2C); the join picks h_i on copy 1, h_{k+1} on copy 2
        minus_2c = diag(basis.constant(-2 * C))
        lmemo: dict = {}
        left_map = {i: Add(Join(Gen(i), last), minus_2c) for i in range(1, k + 1)}

        def left(d: Derivation) -> Derivation:
            return substitute(d, left_map, lmemo)

        wit: dict[str, Derivation] = {}
        for w in range(n):
            wit[unit_role(w)] = left(basis.units[w])
            # (0 | e_w) = (e_w | e_w) + (-e_w | 0)
            wit[unit_role(n + w)] = Add(diag(basis.units[w]), left(basis.minus_unit(w)))
        wit[NEGATIVE] = diag(basis.neg)
        neg_value = list(basis.neg_value) * 2
    else:
        gens = [list(gi) * m for gi in g]
        gens.append([j for j in range(1, m + 1) for _ in range(n)])
        gens.append([m * m + 1 - j * j for j in range(1, m + 1) for _ in range(n)])
        # h_i is g_i repeated, so base terms keep their meaning blockwise
        c = basis.neg if all(x == -1 for x in basis.neg_value) else basis.constant(-1)
        block_units, zero = _isol_terms(m, Gen(k + 1), Gen(k + 2), c)
        wit = {}
        for i in range(m):
            t_i = Add(c, block_units[i])  # 0 on copy i, -1 elsewhere
            for w in range(n):
                wit[unit_role(i * n + w)] = Join(Add(t_i, basis.units[w]), zero)
        wit[NEGATIVE] = c
        neg_value = [-1] * (n * m)
    gs = GeneratorSet(forest, gens, wit, label=f"union({base.label or '?'}, {m})")
    return _finish(_with_negative(gs, neg_value), verify)


def gens_root_extension(base: GeneratorSet, verify: bool = True) -> GeneratorSet:
    """Generators for ``attach_root(base.forest)``: (-1, g_i) for each g_i, plus e_root."""
    basis = _Basis(base)
    f = base.forest
    n, k = f.n, len(base)
    forest = attach_root(f)
    gens = [[-1] + list(gi) for gi in base.coords] + [[1] + [0] * n]
    root = Gen(k + 1)
    memo: dict = {}
    lift_map = {i: Add(Gen(i), root) for i in range(1, k + 1)}

    def lift(d: Derivation) -> Derivation:
        return substitute(d, lift_map, memo)

    wit: dict[str, Derivation] = {unit_role(0): root}
    for w in range(n):
        wit[unit_role(w + 1)] = lift(basis.units[w])
    # (-1, -1) = h_1 + (0, -1 - g_1)
    g1 = base.coords[0]
    wit[NEGATIVE] = Add(Gen(1), lift(basis.combine([-1 - x for x in g1])))
    gs = GeneratorSet(forest, gens, wit, label=f"extend({base.label or '?'})")
    return _finish(_with_negative(gs, [-1] * (n + 1)), verify)


def gens_tkl(k: int, l: int, verify: bool = True) -> GeneratorSet:
    """Generators of G(T_kl): l+1 for k = 1, at most 2l for k = 2, at most 3l otherwise."""
    _check_count("k", k)
    _check_count("l", l)
    if k == 1:
        return gens_path(l, verify=verify)
    gs = gens_isol(k, verify=False)
    for _ in range(l - 1):
        gs = gens_union(gens_root_extension(gs, verify=False), k, verify=False)
    gs.label = f"tkl({k},{l})"
    return _finish(gs, verify)


def gens_kpn(k: int, n: int, verify: bool = True) -> GeneratorSet:
    """n+1 generators of G(kP_n) for k <= n+1.

    Built for n+1 copies; fewer copies are obtained by dropping whole paths.
    """
    _check_count("k", k)
    _check_count("n", n)
    if k > n + 1:
        raise ValueError(f"construction needs k <= n+1 (got k={k}, n={n}); use gens_generic")
    copies = n + 1
    forest = kpn_forest(copies, n)

    def e(i: int) -> list[int]:
        return [1 if j == i else 0 for j in range(n)]

    gens = []
    for i in range(n):
        gens.append([x for b in range(copies) for x in ([-2] * n if b == i else e(i))])
    gens.append([x for b in range(copies) for x in ([-2] * n if b == n else e(b))])
    g = [Gen(i + 1) for i in range(copies)]
    negative = sum_terms(g)
    zero = sum_terms(Join(gi, Scale(2, gi)) for gi in g)

    def lifted(i: int, j: int) -> Derivation:
        # g_i + 3 g_j + 2 * (all others) = -2 + g_j - g_i
        rest = [Scale(2, g[t]) for t in range(copies) if t not in (i, j)]
        return sum_terms([g[i], Scale(3, g[j]), *rest])

    wit: dict[str, Derivation] = {}
    for b in range(copies):
        for p in range(n):
            if b == n:
                i, j = n, p
            elif p == b:
                i, j = b, n
            else:
                i, j = b, p
            wit[unit_role(b * n + p)] = Join(lifted(i, j), zero)
    wit[NEGATIVE] = negative
    gs = GeneratorSet(forest, gens, wit, label=f"kpn({copies},{n})")
    _with_negative(gs, [-1] * forest.n)
    if k < copies:
        sub = kpn_forest(k, n)
        gs = project_genset(gs, sub, list(range(k * n)), verify=False)
        gs.label = f"kpn({k},{n})"
    return _finish(gs, verify)


def project_genset(
    gs: GeneratorSet, sub: RootedForest, keep: Sequence[int], verify: bool = True
) -> GeneratorSet:
    """Restrict a generator set to a leaf minor.

    ``keep[v]`` is the vertex of ``gs.forest`` that survives as vertex ``v`` of
    ``sub``. Deleting leaf coordinates commutes with + and |, so witnesses
    carry over unchanged.
    """
    if len(keep) != sub.n:
        raise ValueError("embedding length does not match the sub-forest")
    gens = [ForestVector(sub, (g.coords[v] for v in keep)) for g in gs.gens]
    wit = None
    if gs.witnesses is not None:
        wit = {}
        for v, src in enumerate(keep):
            role = unit_role(src)
            if role in gs.witnesses:
                wit[unit_role(v)] = gs.witnesses[role]
        if NEGATIVE in gs.witnesses:
            wit[NEGATIVE] = gs.witnesses[NEGATIVE]
    out = GeneratorSet(sub, gens, wit, label=f"project({gs.label or '?'})")
    neg = getattr(gs, "_negative_value", None)
    if neg is not None:
        _with_negative(out, [neg[v] for v in keep])
    return _finish(out, verify)


class EmbeddingUndecided(RuntimeError):
    def __init__(self, message: str, unprojected: GeneratorSet):
        super().__init__(message)
        self.unprojected = unprojected


def gens_generic(f: RootedForest, node_budget: int = 200_000, verify: bool = True) -> GeneratorSet:
    """Generators for any forest, projected from the universal forest of its width and depth."""
    stats = shape_stats(f)
    big = gens_tkl(stats.width, stats.depth, verify=False)
    found = leaf_minor_embedding(f, big.forest, node_budget)
    if found.status == "undecided":
        raise EmbeddingUndecided("embedding search exceeded its node budget", big)
    if found.status == "no":
        raise AssertionError("forest is not a leaf minor of its universal forest")
    out = project_genset(big, f, found.embedding, verify=verify)
    out.label = f"generic(width={stats.width}, depth={stats.depth})"
    return out


def gens_layered(f: RootedForest, witnesses: bool = True, verify: bool = True) -> GeneratorSet:
    """Depth-layer construction: Isol generators for each depth level, zero elsewhere.

    Vectors supported on a single depth level join coordinate-wise on that
    level, so each layer behaves like an isolated-vertex forest.
    """
    gens: list[list[int]] = []
    wit: dict[str, Derivation] = {}
    negs: list[Derivation] = []
    for level in f.levels():
        base = gens_isol(len(level), verify=False)
        offset = len(gens)
        for g in base.coords:
            vec = [0] * f.n
            for x, v in zip(g, level):
                vec[v] = x
            gens.append(vec)
        memo: dict = {}
        shift = {i: Gen(offset + i) for i in range(1, len(base) + 1)}
        for local, v in enumerate(level):
            wit[unit_role(v)] = substitute(base.witnesses[unit_role(local)], shift, memo)
        negs.append(substitute(base.witnesses[NEGATIVE], shift, memo))
    wit[NEGATIVE] = sum_terms(negs)
    gs = GeneratorSet(f, gens, wit if witnesses else None, label="layered")
    if not witnesses:
        return gs
    return _finish(_with_negative(gs, [-1] * f.n), verify)
