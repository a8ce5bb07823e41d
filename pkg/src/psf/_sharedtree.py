"""Hash-consed representation of forest vectors for replaying large witness sets.

A vector is a tuple of root nodes; a node is (value, child nodes). Nodes are
interned, so equal subvectors on equally shaped subtrees are the same object
and equality is an identity test. The join of two subtrees whose root values
differ is one of the operands, untouched; adding an all-zero subtree is free.
Unit vectors and blockwise constants therefore cost O(depth * width) per
operation instead of O(n).
"""

from __future__ import annotations

import weakref
from typing import Sequence

from .forest import RootedForest


class Node:
    __slots__ = ("v", "ch", "zero", "_neg", "__weakref__")

    def __init__(self, v: int, ch: tuple["Node", ...]):
        self.v = v
        self.ch = ch
        self.zero = v == 0 and all(c.zero for c in ch)
        self._neg: bool | None = None

    def all_negative(self) -> bool:
        if self._neg is None:
            self._neg = self.v < 0 and all(c.all_negative() for c in self.ch)
        return self._neg


class SharedTreeAlgebra:
    """Interning arena plus + / join / scale on node tuples for one forest."""

    def __init__(self, forest: RootedForest):
        self.forest = forest
        self._table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
        zt: list[Node | None] = [None] * forest.n
        for v in reversed(range(forest.n)):
            zt[v] = self.node(0, tuple(zt[c] for c in forest.children[v]))
        self._zero_tree = zt

    def node(self, v: int, ch: tuple[Node, ...]) -> Node:
        key = (v, tuple(map(id, ch)))
        found = self._table.get(key)
        if found is None:
            found = Node(v, ch)
            self._table[key] = found
        return found

    # conversions

    def from_coords(self, coords: Sequence[int]) -> tuple[Node, ...]:
        f = self.forest
        nodes: list[Node | None] = [None] * f.n
        for v in reversed(range(f.n)):
            nodes[v] = self.node(int(coords[v]), tuple(nodes[c] for c in f.children[v]))
        return tuple(nodes[r] for r in f.roots)

    def to_coords(self, vec: tuple[Node, ...]) -> tuple[int, ...]:
        f = self.forest
        out = [0] * f.n
        stack = list(zip(f.roots, vec))
        while stack:
            v, nd = stack.pop()
            out[v] = nd.v
            stack.extend(zip(f.children[v], nd.ch))
        return tuple(out)

    def unit(self, w: int) -> tuple[Node, ...]:
        f, zt = self.forest, self._zero_tree
        cur = self.node(1, tuple(zt[c] for c in f.children[w]))
        prev = w
        p = f.parents[w]
        while p is not None:
            cur = self.node(0, tuple(cur if c == prev else zt[c] for c in f.children[p]))
            prev, p = p, f.parents[p]
        return tuple(cur if r == prev else zt[r] for r in f.roots)

    # operations

    def add(self, a: tuple[Node, ...], b: tuple[Node, ...]) -> tuple[Node, ...]:
        memo: dict = {}
        return tuple(self._add(x, y, memo) for x, y in zip(a, b))

    def _add(self, a: Node, b: Node, memo: dict) -> Node:
        if a.zero:
            return b
        if b.zero:
            return a
        key = (id(a), id(b))
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = self.node(a.v + b.v, tuple(self._add(x, y, memo) for x, y in zip(a.ch, b.ch)))
        memo[key] = out
        return out

    def join(self, a: tuple[Node, ...], b: tuple[Node, ...]) -> tuple[Node, ...]:
        memo: dict = {}
        return tuple(self._join(x, y, memo) for x, y in zip(a, b))

    def _join(self, a: Node, b: Node, memo: dict) -> Node:
        if a is b or a.v > b.v:
            return a
        if a.v < b.v:
            return b
        key = (id(a), id(b))
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = self.node(a.v, tuple(self._join(x, y, memo) for x, y in zip(a.ch, b.ch)))
        memo[key] = out
        return out

    def scale(self, k: int, a: tuple[Node, ...]) -> tuple[Node, ...]:
        memo: dict = {}
        return tuple(self._scale(k, x, memo) for x in a)

    def _scale(self, k: int, a: Node, memo: dict) -> Node:
        if a.zero:
            return a
        hit = memo.get(id(a))
        if hit is not None:
            return hit
        out = self.node(k * a.v, tuple(self._scale(k, c, memo) for c in a.ch))
        memo[id(a)] = out
        return out

    @staticmethod
    def same(a: tuple[Node, ...], b: tuple[Node, ...]) -> bool:
        return all(x is y for x, y in zip(a, b))

    @staticmethod
    def all_negative(a: tuple[Node, ...]) -> bool:
        return all(x.all_negative() for x in a)
