"""The parasemifield G(F, R): integer vectors on a rooted forest.

Semiring multiplication is coordinate-wise ``+``; semiring addition is the
forest-lexicographic join ``|``: at each vertex, the first disagreement along
its root path decides which operand supplies the coordinate. ``&`` is the
lattice meet ``-((-u) | (-v))``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .forest import RootedForest

__all__ = [
    "ForestVector",
    "ForestMismatch",
    "add",
    "join",
    "meet",
    "scale",
    "leq",
    "join_coords",
    "zero",
    "unit",
    "constant",
    "LevelJoin",
]

TIE, LEFT, RIGHT = 0, 1, 2


class ForestMismatch(ValueError):
    """Operands live on different forest objects."""


def join_coords(f: RootedForest, u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
    """Forest join on raw coordinate sequences, one root-to-leaf pass."""
    state = [TIE] * f.n
    out = [0] * f.n
    parents = f.parents
    for w in range(f.n):
        p = parents[w]
        s = TIE if p is None else state[p]
        if s == TIE:
            a, b = u[w], v[w]
            if a > b:
                s = LEFT
            elif a < b:
                s = RIGHT
            out[w] = a if a >= b else b
        else:
            out[w] = u[w] if s == LEFT else v[w]
        state[w] = s
    return tuple(out)


class ForestVector:
    """An element of G(F, R): one exact integer per vertex of ``forest``."""

    __slots__ = ("forest", "coords")

    def __init__(self, forest: RootedForest, coords: Iterable[int]):
        coords = tuple(coords)
        if len(coords) != forest.n:
            raise ValueError(f"expected {forest.n} coordinates, got {len(coords)}")
        for c in coords:
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
                raise TypeError(f"coordinates must be integers, got {c!r}")
        object.__setattr__(self, "forest", forest)
        object.__setattr__(self, "coords", tuple(int(c) for c in coords))

    def __setattr__(self, name, value):
        raise AttributeError("ForestVector is immutable")

    def _check(self, other: "ForestVector") -> None:
        if not isinstance(other, ForestVector):
            raise TypeError(f"expected a ForestVector, got {type(other).__name__}")
        if other.forest is not self.forest:
            raise ForestMismatch("vectors belong to different forests")

    def __add__(self, other: "ForestVector") -> "ForestVector":
        if not isinstance(other, ForestVector):
            return NotImplemented
        self._check(other)
        return ForestVector(self.forest, (a + b for a, b in zip(self.coords, other.coords)))

    def __or__(self, other: "ForestVector") -> "ForestVector":
        if not isinstance(other, ForestVector):
            return NotImplemented
        self._check(other)
        return ForestVector(self.forest, join_coords(self.forest, self.coords, other.coords))

    def __and__(self, other: "ForestVector") -> "ForestVector":
        if not isinstance(other, ForestVector):
            return NotImplemented
        return -((-self) | (-other))

    def __neg__(self) -> "ForestVector":
        return ForestVector(self.forest, (-a for a in self.coords))

    def __rmul__(self, k: int) -> "ForestVector":
        if isinstance(k, bool) or not isinstance(k, int):
            return NotImplemented
        return scale(k, self)

    def __le__(self, other: "ForestVector") -> bool:
        return leq(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ForestVector):
            return NotImplemented
        return self.forest is other.forest and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((id(self.forest), self.coords))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i: int) -> int:
        return self.coords[i]

    def is_negative(self) -> bool:
        return all(c < 0 for c in self.coords)

    def project(self, sub: RootedForest, keep: Sequence[int]) -> "ForestVector":
        """Restrict to the coordinates ``keep`` (a leaf-minor image), viewed on ``sub``."""
        return ForestVector(sub, (self.coords[v] for v in keep))

    def __repr__(self) -> str:
        return f"ForestVector({list(self.coords)})"


def add(u: ForestVector, v: ForestVector) -> ForestVector:
    return u + v


def join(u: ForestVector, v: ForestVector) -> ForestVector:
    return u | v


def meet(u: ForestVector, v: ForestVector) -> ForestVector:
    u._check(v)
    return u & v


def scale(k: int, u: ForestVector) -> ForestVector:
    """``k``-fold sum of ``u``; only positive repetition is a semiring term."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"repetition count must be a positive integer, got {k!r}")
    return ForestVector(u.forest, (k * a for a in u.coords))


def leq(u: ForestVector, v: ForestVector) -> bool:
    return (u | v) == v


def zero(f: RootedForest) -> ForestVector:
    return ForestVector(f, [0] * f.n)


def constant(f: RootedForest, c: int) -> ForestVector:
    return ForestVector(f, [c] * f.n)


def unit(f: RootedForest, w: int) -> ForestVector:
    coords = [0] * f.n
    coords[w] = 1
    return ForestVector(f, coords)


class LevelJoin:
    """Batched forest join on numpy arrays, vectorised one depth level at a time.

    Rows are vectors; works for any integer dtype, including ``object`` for
    unbounded integers.
    """

    def __init__(self, f: RootedForest):
        self.forest = f
        self.levels = [np.asarray(lv, dtype=np.intp) for lv in f.levels()]
        self.level_parents = [
            np.asarray([f.parents[v] for v in lv], dtype=np.intp) for lv in f.levels()[1:]
        ]

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        v = np.asarray(v)
        u, v = np.broadcast_arrays(u, v)
        cmp = np.sign(u - v).astype(np.int8)
        state = np.empty(cmp.shape, dtype=np.int8)
        roots = self.levels[0]
        state[..., roots] = cmp[..., roots]
        for lv, par in zip(self.levels[1:], self.level_parents):
            s = state[..., par]
            state[..., lv] = np.where(s != 0, s, cmp[..., lv])
        return np.where(state >= 0, u, v)
