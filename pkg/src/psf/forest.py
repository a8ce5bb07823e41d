"""Rooted forests: the index structure of every parasemifield G(F, R).

A forest is stored as a ``parents`` array in topological order: vertex ``i``
is either a root (``None``) or has a parent ``j < i``. That order is the
coordinate order of every vector living on the forest.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "RootedForest",
    "ForestShapeStats",
    "ForestFormatError",
    "LeafMinorResult",
    "parse_forest",
    "forest_to_json",
    "shape_stats",
    "build_family",
    "isol",
    "path",
    "tkl",
    "kpn",
    "disjoint_union",
    "attach_root",
    "canonical_form",
    "is_isomorphic",
    "is_leaf_minor",
    "leaf_minor_embedding",
    "induced_subforest",
]


class ForestFormatError(ValueError):
    """Raised for malformed forest-JSON or invalid parent arrays."""


class RootedForest:
    """Immutable rooted forest on vertices ``0..n-1``.

    Equality is identity: two separately built forests never compare equal,
    even when their parent arrays coincide. Vectors are tied to a specific
    forest object, so this keeps differently constructed coordinate systems
    from mixing. Use :meth:`same_structure` for structural comparison.
    """

    __slots__ = ("parents", "roots", "children", "vertex_depth", "_levels", "__weakref__")

    def __init__(self, parents: Iterable[int | None]):
        parents = tuple(parents)
        if not parents:
            raise ForestFormatError("a forest needs at least one vertex")
        children: list[list[int]] = [[] for _ in parents]
        depth = [0] * len(parents)
        roots = []
        for i, p in enumerate(parents):
            if p is None:
                roots.append(i)
                depth[i] = 1
                continue
            if isinstance(p, bool) or not isinstance(p, int):
                raise ForestFormatError(f"parent of vertex {i} must be an integer or null, got {p!r}")
            if p < 0:
                raise ForestFormatError(f"parent index {p} of vertex {i} is out of range")
            if p >= i:
                raise ForestFormatError(
                    f"parent index {p} of vertex {i} is not smaller than the child"
                )
            children[p].append(i)
            depth[i] = depth[p] + 1
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "roots", tuple(roots))
        object.__setattr__(self, "children", tuple(tuple(c) for c in children))
        object.__setattr__(self, "vertex_depth", tuple(depth))
        object.__setattr__(self, "_levels", None)

    def __setattr__(self, name, value):
        raise AttributeError("RootedForest is immutable")

    def __len__(self) -> int:
        return len(self.parents)

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def depth(self) -> int:
        return max(self.vertex_depth)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (self.parents[v] is not None)

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    @property
    def is_isolated(self) -> bool:
        """True when the forest has no edges (the forest Isol_n)."""
        return len(self.roots) == len(self.parents)

    def root_path(self, v: int) -> tuple[int, ...]:
        path = [v]
        while self.parents[path[-1]] is not None:
            path.append(self.parents[path[-1]])
        return tuple(reversed(path))

    def root_of(self, v: int) -> int:
        return self.root_path(v)[0]

    def levels(self) -> tuple[tuple[int, ...], ...]:
        """Vertices grouped by depth; ``levels()[0]`` are the roots."""
        if self._levels is None:
            buckets: list[list[int]] = [[] for _ in range(self.depth)]
            for v, d in enumerate(self.vertex_depth):
                buckets[d - 1].append(v)
            object.__setattr__(self, "_levels", tuple(tuple(b) for b in buckets))
        return self._levels

    def maximal_chains(self) -> list[tuple[int, ...]]:
        """Root-to-leaf paths, one per childless vertex, in vertex order."""
        return [self.root_path(v) for v in range(self.n) if not self.children[v]]

    def components(self) -> list[tuple[int, ...]]:
        comps = []
        for r in self.roots:
            stack, comp = [r], []
            while stack:
                v = stack.pop()
                comp.append(v)
                stack.extend(self.children[v])
            comps.append(tuple(sorted(comp)))
        return comps

    def same_structure(self, other: "RootedForest") -> bool:
        return self.parents == other.parents

    def to_json(self) -> str:
        return forest_to_json(self)

    def __repr__(self) -> str:
        return f"RootedForest({list(self.parents)!r})"


@dataclass(frozen=True)
class ForestShapeStats:
    n_vertices: int
    n_roots: int
    depth: int
    width: int
    leaves: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "n_roots": self.n_roots,
            "depth": self.depth,
            "width": self.width,
            "leaves": list(self.leaves),
        }


def parse_forest(text: str | bytes | dict) -> RootedForest:
    """Parse forest-JSON ``{"parents": [null|int, ...]}``."""
    if isinstance(text, dict):
        obj = text
    else:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ForestFormatError(f"malformed forest JSON: {exc}") from exc
    if not isinstance(obj, dict) or "parents" not in obj:
        raise ForestFormatError('forest JSON must be an object with a "parents" array')
    parents = obj["parents"]
    if not isinstance(parents, list):
        raise ForestFormatError('"parents" must be an array')
    return RootedForest(parents)


def forest_to_json(f: RootedForest) -> str:
    return json.dumps({"parents": list(f.parents)})


def shape_stats(f: RootedForest) -> ForestShapeStats:
    root_deg = max(f.degree(r) for r in f.roots)
    width = max(len(f.roots), root_deg, max(f.degree(v) - 1 for v in range(f.n)))
    leaves = tuple(
        v for v in range(f.n)
        if f.degree(v) == (0 if f.parents[v] is None else 1)
    )
    return ForestShapeStats(f.n, len(f.roots), f.depth, width, leaves)


# --- constructors -----------------------------------------------------------

def _check_positive(**params: int) -> None:
    for name, value in params.items():
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def isol(n: int) -> RootedForest:
    _check_positive(n=n)
    return RootedForest([None] * n)


def path(n: int) -> RootedForest:
    _check_positive(n=n)
    return RootedForest([None] + list(range(n - 1)))


def _complete_tree_parents(k: int, l: int, offset: int) -> list[int | None]:
    # depth-first numbering of one tree: a root with k children per level, l levels
    parents: list[int | None] = []

    def grow(parent: int | None, level: int) -> None:
        me = offset + len(parents)
        parents.append(parent)
        if level < l:
            for _ in range(k):
                grow(me, level + 1)

    grow(None, 1)
    return parents


def tkl(k: int, l: int) -> RootedForest:
    """The universal forest of width ``k`` and depth ``l``.

    ``k`` roots, every non-leaf vertex has ``k`` children, all leaves at depth ``l``.
    """
    _check_positive(k=k, l=l)
    if k == 1:
        return path(l)
    parents: list[int | None] = []
    for _ in range(k):
        parents.extend(_complete_tree_parents(k, l, len(parents)))
    return RootedForest(parents)


def kpn(k: int, n: int) -> RootedForest:
    _check_positive(k=k, n=n)
    parents: list[int | None] = []
    for c in range(k):
        base = c * n
        parents.append(None)
        parents.extend(base + j for j in range(n - 1))
    return RootedForest(parents)


_FAMILIES = {
    "isol": (isol, ("n",)),
    "path": (path, ("n",)),
    "tkl": (tkl, ("k", "l")),
    "kpn": (kpn, ("k", "n")),
}


def build_family(family: str, **params: int) -> RootedForest:
    try:
        ctor, names = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown forest family {family!r}") from None
    missing = [p for p in names if p not in params]
    if missing:
        raise ValueError(f"family {family!r} needs parameters {names}, missing {missing}")
    return ctor(*(params[p] for p in names))


def disjoint_union(*forests: RootedForest) -> RootedForest:
    parents: list[int | None] = []
    for f in forests:
        off = len(parents)
        parents.extend(None if p is None else p + off for p in f.parents)
    return RootedForest(parents)


def attach_root(f: RootedForest) -> RootedForest:
    """Add a new vertex 0 as the unique root; old roots become its children."""
    return RootedForest([None] + [0 if p is None else p + 1 for p in f.parents])


def induced_subforest(f: RootedForest, keep: Sequence[int]) -> RootedForest:
    """Forest on the ancestor-closed vertex set ``keep`` (kept in increasing order)."""
    keep = sorted(keep)
    index = {v: i for i, v in enumerate(keep)}
    parents = []
    for v in keep:
        p = f.parents[v]
        if p is not None and p not in index:
            raise ValueError(f"vertex set is not closed under parents (missing {p})")
        parents.append(None if p is None else index[p])
    return RootedForest(parents)


# --- isomorphism ------------------------------------------------------------

def _subtree_canons(f: RootedForest) -> list[tuple]:
    canon: list[tuple] = [()] * f.n
    for v in reversed(range(f.n)):
        canon[v] = tuple(sorted(canon[c] for c in f.children[v]))
    return canon


def canonical_form(f: RootedForest) -> tuple:
    """Isomorphism invariant: the sorted multiset of recursively sorted trees."""
    canon = _subtree_canons(f)
    return tuple(sorted(canon[r] for r in f.roots))


def is_isomorphic(f1: RootedForest, f2: RootedForest) -> bool:
    return f1.n == f2.n and canonical_form(f1) == canonical_form(f2)


# --- leaf minors ------------------------------------------------------------

@dataclass(frozen=True)
class LeafMinorResult:
    """Outcome of a leaf-minor test.

    ``status`` is ``"yes"``, ``"no"`` or ``"undecided"`` (node budget ran out).
    For ``"yes"``, ``embedding[v]`` is the vertex of the larger forest that
    survives as vertex ``v`` of the smaller one.
    """

    status: str
    embedding: tuple[int, ...] | None = None
    nodes: int = 0

    def __bool__(self) -> bool:
        if self.status == "undecided":
            raise ValueError("leaf-minor test undecided within budget")
        return self.status == "yes"


class _BudgetExceeded(Exception):
    pass


class _Embedder:
    """Root-preserving embeddings of f into e, children into children.

    Repeated leaf deletion leaves exactly the parent-closed vertex sets, so
    f is a leaf minor of e iff such an embedding exists. Candidate targets
    with the same subtree shape are tried only once.
    """

    def __init__(self, f: RootedForest, e: RootedForest, budget: int):
        self.f, self.e, self.budget, self.nodes = f, e, budget, 0
        self.fcanon = _subtree_canons(f)
        self.ecanon = _subtree_canons(e)
        self.fsize = [1] * f.n
        for v in reversed(range(f.n)):
            for c in f.children[v]:
                self.fsize[v] += self.fsize[c]
        self.esize = [1] * e.n
        for v in reversed(range(e.n)):
            for c in e.children[v]:
                self.esize[v] += self.esize[c]
        self.fheight = [1] * f.n
        for v in reversed(range(f.n)):
            for c in f.children[v]:
                self.fheight[v] = max(self.fheight[v], self.fheight[c] + 1)
        self.eheight = [1] * e.n
        for v in reversed(range(e.n)):
            for c in e.children[v]:
                self.eheight[v] = max(self.eheight[v], self.eheight[c] + 1)
        self.memo: dict[tuple, bool] = {}

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExceeded

    def fits(self, fv: int, ev: int) -> bool:
        key = (self.fcanon[fv], self.ecanon[ev])
        if key in self.memo:
            return self.memo[key]
        self.tick()
        ok = (
            self.fsize[fv] <= self.esize[ev]
            and self.fheight[fv] <= self.eheight[ev]
            and self.match(self.f.children[fv], self.e.children[ev]) is not None
        )
        self.memo[key] = ok
        return ok

    def match(self, fs: Sequence[int], es: Sequence[int]) -> list[int] | None:
        """Injective assignment of f-vertices ``fs`` to e-vertices ``es``."""
        if len(fs) > len(es):
            return None
        # largest subtrees first: fewer viable targets, earlier failure
        order = sorted(range(len(fs)), key=lambda i: -self.fsize[fs[i]])
        chosen: list[int | None] = [None] * len(fs)
        used: set[int] = set()

        def place(pos: int) -> bool:
            if pos == len(order):
                return True
            i = order[pos]
            tried: set[tuple] = set()
            for ev in es:
                if ev in used or self.ecanon[ev] in tried:
                    continue
                tried.add(self.ecanon[ev])
                self.tick()
                if self.fits(fs[i], ev):
                    used.add(ev)
                    chosen[i] = ev
                    if place(pos + 1):
                        return True
                    used.discard(ev)
            return False

        return list(chosen) if place(0) else None  # type: ignore[arg-type]

    def realize(self, fv: int, ev: int, out: list[int]) -> None:
        out[fv] = ev
        assignment = self.match(self.f.children[fv], self.e.children[ev])
        assert assignment is not None
        for fc, ec in zip(self.f.children[fv], assignment):
            self.realize(fc, ec, out)


def leaf_minor_embedding(
    f: RootedForest, e: RootedForest, node_budget: int = 200_000
) -> LeafMinorResult:
    emb = _Embedder(f, e, node_budget)
    try:
        roots = emb.match(f.roots, e.roots)
        if roots is None:
            return LeafMinorResult("no", None, emb.nodes)
        out = [-1] * f.n
        for fr, er in zip(f.roots, roots):
            emb.realize(fr, er, out)
    except _BudgetExceeded:
        return LeafMinorResult("undecided", None, emb.nodes)
    return LeafMinorResult("yes", tuple(out), emb.nodes)


def is_leaf_minor(f: RootedForest, e: RootedForest, node_budget: int = 200_000) -> LeafMinorResult:
    """Decide whether ``f`` arises from ``e`` by repeatedly deleting leaves."""
    return leaf_minor_embedding(f, e, node_budget)


def parent_closed_subsets(f: RootedForest, size: int) -> Iterable[tuple[int, ...]]:
    """All parent-closed vertex sets of the given size (small forests only)."""
    for combo in itertools.combinations(range(f.n), size):
        s = set(combo)
        if all(f.parents[v] is None or f.parents[v] in s for v in combo):
            yield combo
