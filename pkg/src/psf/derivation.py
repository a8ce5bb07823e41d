"""Semiring terms over a generator list, and generator sets that carry them.

A derivation is an expression DAG built from ``Gen(i)`` (1-based generator
index), ``Add``, ``Join`` and ``Scale(k >= 1, ...)``. There is no negation and
no constant node, so every derivation is a genuine (+, |)-term. Nodes compare
by identity: subterms are shared freely and evaluation memoises per node.

Text form (derivation-sexpr): ``(g i) | (+ e e) | (j e e) | (s k e)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .forest import RootedForest, parse_forest
from ._sharedtree import SharedTreeAlgebra
from .parasemifield import ForestVector, LevelJoin

__all__ = [
    "Derivation",
    "Gen",
    "Add",
    "Join",
    "Scale",
    "GeneratorSet",
    "DerivationError",
    "ReplayError",
    "unit_role",
    "NEGATIVE",
    "sum_terms",
    "substitute",
    "evaluate",
    "evaluate_many",
    "to_sexpr",
    "parse_sexpr",
    "tree_size",
    "dag_size",
    "genset_to_json",
    "parse_genset",
]

NEGATIVE = "negative"


def unit_role(w: int) -> str:
    return f"unit({w})"


_UNIT_RE = re.compile(r"^unit\((\d+)\)$")


class DerivationError(ValueError):
    """Ill-formed derivation: bad generator index, bad repetition count, bad syntax."""


class ReplayError(AssertionError):
    """A witness did not replay to its claimed target."""


class Derivation:
    __slots__ = ()

    def children(self) -> tuple["Derivation", ...]:
        return ()

    def __repr__(self) -> str:
        text = to_sexpr(self, limit=200)
        return f"<{text}>"


@dataclass(frozen=True, eq=False, repr=False)
class Gen(Derivation):
    index: int

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, int) or self.index < 1:
            raise DerivationError(f"generator index must be a positive integer, got {self.index!r}")


@dataclass(frozen=True, eq=False, repr=False)
class Add(Derivation):
    left: Derivation
    right: Derivation

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False, repr=False)
class Join(Derivation):
    left: Derivation
    right: Derivation

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False, repr=False)
class Scale(Derivation):
    k: int
    child: Derivation

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise DerivationError(f"repetition count must be a positive integer, got {self.k!r}")

    def children(self):
        return (self.child,)


def sum_terms(terms: Iterable[Derivation]) -> Derivation:
    """Left-folded ``Add`` of a non-empty sequence of terms."""
    it = iter(terms)
    try:
        acc = next(it)
    except StopIteration:
        raise DerivationError("empty sum is not a semiring term") from None
    for t in it:
        acc = Add(acc, t)
    return acc


def times(k: int, d: Derivation) -> Derivation:
    return d if k == 1 else Scale(k, d)


def _postorder(roots: Sequence[Derivation], done: Mapping[int, object] | None = None) -> list[Derivation]:
    """Children-first node order; nodes whose id is in ``done`` are not revisited."""
    seen: set[int] = set()
    done = done if done is not None else {}
    order: list[Derivation] = []
    stack: list[tuple[Derivation, bool]] = [(r, False) for r in reversed(roots)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or id(node) in done:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children()):
            if id(c) not in seen and id(c) not in done:
                stack.append((c, False))
    return order


def substitute(d: Derivation, mapping: Mapping[int, Derivation] | Callable[[int], Derivation],
               memo: dict | None = None) -> Derivation:
    """Replace every ``Gen(i)`` by ``mapping[i]``, preserving sharing.

    Pass the same ``memo`` across calls to keep shared subterms shared.
    """
    lookup = mapping if callable(mapping) else mapping.__getitem__
    memo = {} if memo is None else memo
    for node in _postorder([d], memo):
        key = id(node)
        if isinstance(node, Gen):
            memo[key] = (node, lookup(node.index))
        elif isinstance(node, Add):
            memo[key] = (node, Add(memo[id(node.left)][1], memo[id(node.right)][1]))
        elif isinstance(node, Join):
            memo[key] = (node, Join(memo[id(node.left)][1], memo[id(node.right)][1]))
        elif isinstance(node, Scale):
            memo[key] = (node, Scale(node.k, memo[id(node.child)][1]))
        else:
            raise DerivationError(f"unknown derivation node {node!r}")
    # memo values keep the source node alive so its id cannot be reused
    return memo[id(d)][1]


def dag_size(roots: Derivation | Sequence[Derivation]) -> int:
    if isinstance(roots, Derivation):
        roots = [roots]
    return len(_postorder(list(roots)))


def tree_size(d: Derivation) -> int:
    """Number of nodes once all sharing is expanded (the sexpr length in nodes)."""
    size: dict[int, int] = {}
    for node in _postorder([d]):
        size[id(node)] = 1 + sum(size[id(c)] for c in node.children())
    return size[id(d)]


# --- evaluation -------------------------------------------------------------

def _max_index(roots: Sequence[Derivation]) -> int:
    m = 0
    for node in _postorder(list(roots)):
        if isinstance(node, Gen):
            m = max(m, node.index)
    return m


def _run(roots: Sequence[Derivation], leaf, add, join, scale) -> list:
    """Evaluate a DAG children-first; a value is freed once all its parents used it."""
    roots = list(roots)
    order = _postorder(roots)
    pending: dict[int, int] = {}
    for node in order:
        for c in node.children():
            pending[id(c)] = pending.get(id(c), 0) + 1
    wanted = {id(r) for r in roots}
    vals: dict[int, object] = {}
    results: dict[int, object] = {}
    for node in order:
        if isinstance(node, Gen):
            val = leaf(node.index)
        elif isinstance(node, Add):
            val = add(vals[id(node.left)], vals[id(node.right)])
        elif isinstance(node, Join):
            val = join(vals[id(node.left)], vals[id(node.right)])
        elif isinstance(node, Scale):
            val = scale(node.k, vals[id(node.child)])
        else:
            raise DerivationError(f"unknown derivation node {node!r}")
        for c in node.children():
            cid = id(c)
            pending[cid] -= 1
            if pending[cid] == 0:
                del vals[cid]
        if id(node) in wanted:
            results[id(node)] = val
        if pending.get(id(node), 0) > 0:
            vals[id(node)] = val
    return [results[id(r)] for r in roots]


def _leaf_lookup(values: Sequence):
    k = len(values)

    def leaf(i: int):
        if i > k:
            raise DerivationError(f"generator index {i} out of range 1..{k}")
        return values[i - 1]

    return leaf


#: above this many vertices, evaluation switches to the hash-consed backend
SHARED_BACKEND_MIN_VERTICES = 400


def evaluate_many(
    forest: RootedForest,
    gens: Sequence[Sequence[int]],
    roots: Sequence[Derivation],
    backend: str = "auto",
) -> list[tuple[int, ...]]:
    """Evaluate several derivations over one generator list, sharing work.

    ``backend`` is ``"dense"`` (numpy object arrays), ``"shared"``
    (hash-consed subtrees, see :mod:`psf._sharedtree`) or ``"auto"``. Both are
    exact and give identical results.
    """
    if backend == "auto":
        backend = "shared" if forest.n >= SHARED_BACKEND_MIN_VERTICES else "dense"
    if backend == "dense":
        gen_arrays = [np.array([int(x) for x in g], dtype=object) for g in gens]
        joiner = LevelJoin(forest)
        vals = _run(roots, _leaf_lookup(gen_arrays), np.add, joiner,
                    lambda k, x: x * k)
        return [tuple(int(x) for x in v) for v in vals]
    if backend == "shared":
        alg = SharedTreeAlgebra(forest)
        trees = [alg.from_coords(g) for g in gens]
        vals = _run(roots, _leaf_lookup(trees), alg.add, alg.join, alg.scale)
        return [alg.to_coords(v) for v in vals]
    raise ValueError(f"unknown backend {backend!r}")


def evaluate(forest: RootedForest, gens: Sequence[Sequence[int]], d: Derivation) -> tuple[int, ...]:
    return evaluate_many(forest, gens, [d])[0]


# --- generator sets ---------------------------------------------------------

@dataclass
class GeneratorSet:
    """Generators on one forest, optionally with witnesses.

    ``witnesses`` maps ``unit(w)`` (one per vertex) and ``negative`` to
    derivations; replaying them proves generation.
    """

    forest: RootedForest
    gens: list[ForestVector]
    witnesses: dict[str, Derivation] | None = None
    label: str = ""

    def __post_init__(self):
        gens = []
        for g in self.gens:
            if isinstance(g, ForestVector):
                if g.forest is not self.forest:
                    raise ValueError("all generators must share the generator set's forest")
                gens.append(g)
            else:
                gens.append(ForestVector(self.forest, g))
        self.gens = gens
        if self.witnesses is not None:
            self.witnesses = dict(self.witnesses)
            for role in self.witnesses:
                if role != NEGATIVE and _UNIT_RE.match(role) is None:
                    raise ValueError(f"unknown witness role {role!r}")

    def __len__(self) -> int:
        return len(self.gens)

    @property
    def coords(self) -> list[tuple[int, ...]]:
        return [g.coords for g in self.gens]

    def max_abs(self) -> int:
        return max((abs(c) for g in self.gens for c in g.coords), default=0)

    def eval(self, d: Derivation) -> ForestVector:
        return ForestVector(self.forest, evaluate(self.forest, self.coords, d))

    def has_complete_witnesses(self) -> bool:
        if not self.witnesses:
            return False
        return NEGATIVE in self.witnesses and all(
            unit_role(w) in self.witnesses for w in range(self.forest.n)
        )

    def replay_failures(self, backend: str = "auto") -> list[str]:
        """Roles whose witness is missing or evaluates to the wrong vector."""
        f = self.forest
        roles = [unit_role(w) for w in range(f.n)] + [NEGATIVE]
        wit = self.witnesses or {}
        bad = [r for r in roles if r not in wit]
        present = [r for r in roles if r in wit]
        if not present:
            return bad
        if backend == "auto":
            backend = "shared" if f.n >= SHARED_BACKEND_MIN_VERTICES else "dense"
        if backend == "shared":
            alg = SharedTreeAlgebra(f)
            trees = [alg.from_coords(g) for g in self.coords]
            vals = _run([wit[r] for r in present], _leaf_lookup(trees), alg.add, alg.join, alg.scale)
            for role, val in zip(present, vals):
                if role == NEGATIVE:
                    ok = alg.all_negative(val)
                else:
                    ok = alg.same(val, alg.unit(int(_UNIT_RE.match(role).group(1))))
                if not ok:
                    bad.append(role)
            return bad
        values = evaluate_many(f, self.coords, [wit[r] for r in present], backend=backend)
        for role, val in zip(present, values):
            if role == NEGATIVE:
                if not all(c < 0 for c in val):
                    bad.append(role)
            else:
                w = int(_UNIT_RE.match(role).group(1))
                if any(c != (1 if i == w else 0) for i, c in enumerate(val)):
                    bad.append(role)
        return bad

    def assert_replays(self) -> None:
        bad = self.replay_failures()
        if bad:
            raise ReplayError(f"witness replay failed for {bad[:5]}{'...' if len(bad) > 5 else ''}")


# --- text formats -----------------------------------------------------------

def to_sexpr(d: Derivation, limit: int | None = None) -> str:
    """Fully expanded derivation-sexpr. ``limit`` truncates very large terms with ``...``."""
    out: list[str] = []
    stack: list[object] = [d]
    emitted = 0
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        emitted += 1
        if limit is not None and emitted > limit:
            out.append("...")
            break
        if isinstance(item, Gen):
            out.append(f"(g {item.index})")
        elif isinstance(item, (Add, Join)):
            out.append("(+ " if isinstance(item, Add) else "(j ")
            stack.extend([")", item.right, " ", item.left])
        elif isinstance(item, Scale):
            out.append(f"(s {item.k} ")
            stack.extend([")", item.child])
        else:
            raise DerivationError(f"unknown derivation node {item!r}")
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def parse_sexpr(text: str) -> Derivation:
    tokens: list[str] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise DerivationError(f"cannot tokenize derivation at offset {pos}")
        tokens.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    # frames: [op, args]
    stack: list[list] = []
    result: Derivation | None = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            if i + 1 >= len(tokens):
                raise DerivationError("unexpected end of derivation")
            stack.append([tokens[i + 1], []])
            i += 2
            continue
        if tok == ")":
            if not stack:
                raise DerivationError("unbalanced ')' in derivation")
            op, args = stack.pop()
            node = _build(op, args)
            if stack:
                stack[-1][1].append(node)
            elif result is None:
                result = node
            else:
                raise DerivationError("trailing input after derivation")
            i += 1
            continue
        if not stack:
            raise DerivationError(f"unexpected token {tok!r}")
        try:
            stack[-1][1].append(int(tok))
        except ValueError:
            raise DerivationError(f"unexpected token {tok!r}") from None
        i += 1
    if stack or result is None:
        raise DerivationError("unbalanced derivation")
    return result


def _build(op: str, args: list) -> Derivation:
    def need(kinds: tuple) -> None:
        if len(args) != len(kinds) or not all(isinstance(a, k) for a, k in zip(args, kinds)):
            raise DerivationError(f"bad arguments for ({op} ...)")

    if op == "g":
        need((int,))
        return Gen(args[0])
    if op == "+":
        need((Derivation, Derivation))
        return Add(args[0], args[1])
    if op == "j":
        need((Derivation, Derivation))
        return Join(args[0], args[1])
    if op == "s":
        need((int, Derivation))
        return Scale(args[0], args[1])
    raise DerivationError(f"unknown derivation operator {op!r}")


SEXPR_NODE_LIMIT = 2_000_000


def genset_to_dict(gs: GeneratorSet, node_limit: int = SEXPR_NODE_LIMIT) -> dict:
    out: dict = {
        "forest": {"parents": list(gs.forest.parents)},
        "gens": [list(g.coords) for g in gs.gens],
    }
    if gs.witnesses is not None:
        wit = {}
        for role in sorted(gs.witnesses, key=_role_key):
            d = gs.witnesses[role]
            size = tree_size(d)
            if size > node_limit:
                raise DerivationError(
                    f"witness {role} expands to {size} nodes, above the limit of {node_limit}"
                )
            wit[role] = to_sexpr(d)
        out["witnesses"] = wit
    return out


def _role_key(role: str) -> tuple:
    m = _UNIT_RE.match(role)
    return (0, int(m.group(1))) if m else (1, 0)


def genset_to_json(gs: GeneratorSet, node_limit: int = SEXPR_NODE_LIMIT) -> str:
    return json.dumps(genset_to_dict(gs, node_limit))


def parse_genset(text: str | dict) -> GeneratorSet:
    obj = json.loads(text) if not isinstance(text, dict) else text
    if not isinstance(obj, dict) or "forest" not in obj or "gens" not in obj:
        raise ValueError('genset JSON needs "forest" and "gens"')
    forest = parse_forest(obj["forest"])
    gens = obj["gens"]
    if not isinstance(gens, list) or not all(isinstance(g, list) for g in gens):
        raise ValueError('"gens" must be a list of integer arrays')
    witnesses = None
    if obj.get("witnesses") is not None:
        witnesses = {role: parse_sexpr(s) for role, s in obj["witnesses"].items()}
    return GeneratorSet(forest, [ForestVector(forest, g) for g in gens], witnesses)
