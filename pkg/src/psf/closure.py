"""Generation verification: witness replay, bounded closure search, minimal-set search.

The bounded closure explores sums and joins of generators but discards any
vector with a coordinate outside ``[-B, B]``. That keeps every positive answer
sound (each one comes with a replayable derivation) while giving up
completeness: a vector missing from the bounded closure may still be
generated. Nothing here ever claims non-generation from search alone; only
certificates do.

Exploration runs in rounds. Each round combines the previous round's new
vectors with everything known so far, keeps unseen in-box results, gives each
the smallest parent link ``(op, i, j)`` among all ways it was produced, and
appends them in lexicographic order. Vector indices, parent links and hence
derivations depend only on the input and the budget, never on thread count.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .certify import (
    Certificate,
    ChainFilter,
    cardinality_depth_certificate,
    find_certificate,
    ratio_mask,
    sign_mask,
)
from .derivation import (
    NEGATIVE,
    Add,
    Derivation,
    DerivationError,
    Gen,
    GeneratorSet,
    Join,
    Scale,
    unit_role,
)
from .forest import RootedForest, _subtree_canons
from .parasemifield import ForestMismatch, ForestVector, LevelJoin

__all__ = [
    "PROVEN_GENERATES",
    "PROVEN_NOT",
    "UNKNOWN",
    "MEMBER",
    "Verdict",
    "SearchBudget",
    "ClosureRun",
    "Membership",
    "MinGensOutcome",
    "bounded_closure",
    "eval_derivation",
    "verify_generator_set",
    "goal_search",
    "is_member_bounded",
    "search_min_gens",
    "automorphisms",
]

PROVEN_GENERATES = "PROVEN_GENERATES"
PROVEN_NOT = "PROVEN_NOT"
UNKNOWN = "UNKNOWN"
MEMBER = "MEMBER"

_OP_GEN, _OP_ADD, _OP_JOIN = -1, 0, 1
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class SearchBudget:
    box: int = 12
    node_cap: int = 5_000_000
    seed: int = 0

    def __post_init__(self):
        if self.box < 0 or self.node_cap < 1:
            raise ValueError("box must be >= 0 and node_cap >= 1")

    def as_dict(self) -> dict:
        return {"box": self.box, "node_cap": self.node_cap, "seed": self.seed}


@dataclass
class Verdict:
    status: str
    certificate: Certificate | None = None
    witnesses: dict[str, Derivation] | None = None
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"status": self.status}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        if self.stats:
            out["stats"] = dict(self.stats)
        return out


def eval_derivation(gs: GeneratorSet, d: Derivation) -> ForestVector:
    return gs.eval(d)


# --- bounded closure --------------------------------------------------------

class _Keys:
    """Order-preserving row keys: int64 when the box fits, else raw big-endian bytes."""

    def __init__(self, n: int, box: int):
        self.n, self.box = n, box
        radix = 2 * box + 1
        self.compact = n * np.log2(radix) < 62
        if self.compact:
            self.weights = np.array([radix ** (n - 1 - i) for i in range(n)], dtype=np.int64)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        if self.compact:
            return (rows + self.box) @ self.weights
        flipped = (rows.view(np.uint64) ^ np.uint64(1 << 63)).astype(">u8")
        return np.ascontiguousarray(flipped).view(np.dtype((np.void, 8 * self.n))).ravel()


def _first_per_key(keys, op, lo, hi):
    order = np.lexsort((hi, lo, op, keys))
    keys = keys[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    sel = order[first]
    return sel


@dataclass
class ClosureRun:
    """Outcome of one bounded exploration; ``status`` is goals / saturated / exhausted."""

    status: str
    vectors: np.ndarray
    rounds: int
    links: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    gen_index: dict[int, int] = field(repr=False)
    found: dict[str, int] = field(default_factory=dict)

    @property
    def nodes(self) -> int:
        return len(self.vectors)

    def vector_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(x) for x in row) for row in self.vectors}

    def derivations(self, indices: Sequence[int]) -> list[Derivation]:
        """Terms rebuilt from parent links; repeated sums of one term become ``Scale``."""
        op, pa, pb = self.links
        built: dict[int, Derivation] = {}
        mult: dict[int, tuple[int, int]] = {}  # index -> (base index, multiplicity)
        out = []
        for root in indices:
            stack = [int(root)]
            while stack:
                i = stack[-1]
                if i in built:
                    stack.pop()
                    continue
                if op[i] == _OP_GEN:
                    built[i] = Gen(self.gen_index[i] + 1)
                    mult[i] = (i, 1)
                    stack.pop()
                    continue
                a, b = int(pa[i]), int(pb[i])
                pending = [c for c in (a, b) if c not in built]
                if pending:
                    stack.extend(pending)
                    continue
                stack.pop()
                if op[i] == _OP_ADD:
                    (ba, ka), (bb, kb) = mult[a], mult[b]
                    if ba == bb:
                        mult[i] = (ba, ka + kb)
                        built[i] = Scale(ka + kb, built[ba])
                    else:
                        mult[i] = (i, 1)
                        built[i] = Add(built[a], built[b])
                else:
                    mult[i] = (i, 1)
                    built[i] = Join(built[a], built[b])
            out.append(built[int(root)])
        return out


class _Explorer:
    def __init__(self, gs: GeneratorSet, budget: SearchBudget, threads: int = 1):
        self.forest = gs.forest
        self.n = gs.forest.n
        self.box = budget.box
        self.cap = budget.node_cap
        self.threads = max(1, int(threads))
        self.keys = _Keys(self.n, self.box)
        self.joiner = LevelJoin(self.forest)
        rows, gen_index = [], {}
        seen = set()
        for idx, g in enumerate(gs.coords):
            if g in seen:
                continue
            seen.add(g)
            gen_index[len(rows)] = idx
            rows.append(g)
        self.vals = np.array(rows, dtype=np.int64).reshape(len(rows), self.n)
        self.gen_index = gen_index
        m = len(rows)
        self.op = np.full(m, _OP_GEN, dtype=np.int8)
        self.pa = np.full(m, -1, dtype=np.int64)
        self.pb = np.full(m, -1, dtype=np.int64)
        k = self.keys(self.vals)
        self.sorted_keys = np.sort(k)

    def _chunk(self, lo: int, hi: int, start: int, end: int):
        vals = self.vals
        f_rows = vals[lo:hi]
        a_rows = vals[:end]
        i_idx = np.arange(lo, hi)[:, None]
        j_idx = np.arange(end)[None, :]
        allowed = (j_idx < start) | (j_idx <= i_idx)
        out_rows, out_op, out_lo, out_hi = [], [], [], []
        sums = f_rows[:, None, :] + a_rows[None, :, :]
        ok = allowed & (np.abs(sums) <= self.box).all(axis=2)
        joins = self.joiner(f_rows[:, None, :], a_rows[None, :, :])
        for code, cand, mask in ((_OP_ADD, sums, ok), (_OP_JOIN, joins, allowed)):
            ii, jj = np.nonzero(mask)
            if not len(ii):
                continue
            rows = cand[ii, jj]
            keys = self.keys(rows)
            pos = np.searchsorted(self.sorted_keys, keys)
            pos = np.minimum(pos, len(self.sorted_keys) - 1)
            fresh = self.sorted_keys[pos] != keys
            if not fresh.any():
                continue
            out_rows.append(rows[fresh])
            out_op.append(np.full(int(fresh.sum()), code, dtype=np.int8))
            out_lo.append(jj[fresh].astype(np.int64))
            out_hi.append((ii[fresh] + lo).astype(np.int64))
        if not out_rows:
            return None
        rows = np.concatenate(out_rows)
        op = np.concatenate(out_op)
        plo = np.concatenate(out_lo)
        phi = np.concatenate(out_hi)
        sel = _first_per_key(self.keys(rows), op, plo, phi)
        return rows[sel], op[sel], plo[sel], phi[sel]

    def step(self, start: int) -> int:
        """One round over the frontier ``[start, end)``; returns the new end."""
        end = len(self.vals)
        per_row = max(1, end * self.n * 3)
        step = max(1, _CHUNK_ELEMS // per_row)
        bounds = [(lo, min(end, lo + step)) for lo in range(start, end, step)]
        if self.threads > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                parts = list(pool.map(lambda b: self._chunk(b[0], b[1], start, end), bounds))
        else:
            parts = [self._chunk(lo, hi, start, end) for lo, hi in bounds]
        parts = [p for p in parts if p is not None]
        if not parts:
            return end
        rows = np.concatenate([p[0] for p in parts])
        op = np.concatenate([p[1] for p in parts])
        plo = np.concatenate([p[2] for p in parts])
        phi = np.concatenate([p[3] for p in parts])
        keys = self.keys(rows)
        sel = _first_per_key(keys, op, plo, phi)  # sorted by key, i.e. lexicographically
        room = self.cap - end
        if len(sel) > room:
            sel = sel[:max(0, room)]
            self.truncated = True
        self.vals = np.concatenate([self.vals, rows[sel]])
        self.op = np.concatenate([self.op, op[sel]])
        self.pa = np.concatenate([self.pa, plo[sel]])
        self.pb = np.concatenate([self.pb, phi[sel]])
        self.sorted_keys = np.sort(np.concatenate([self.sorted_keys, keys[sel]]))
        return len(self.vals)

    truncated = False

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Index of each row among explored vectors, or -1."""
        keys = self.keys(rows)
        all_keys = self.keys(self.vals)
        order = np.argsort(all_keys, kind="stable")
        pos = np.searchsorted(all_keys[order], keys)
        pos = np.minimum(pos, len(order) - 1)
        hit = all_keys[order][pos] == keys
        return np.where(hit, order[pos], -1)


def _explore(gs: GeneratorSet, budget: SearchBudget, targets: dict[str, tuple[int, ...]] | None,
             want_negative: bool, threads: int = 1) -> ClosureRun:
    ex = _Explorer(gs, budget, threads)
    names = list(targets or {})
    target_rows = np.array([targets[t] for t in names], dtype=np.int64).reshape(len(names), gs.forest.n)
    found: dict[str, int] = {}
    start, rounds = 0, 0

    def scan(lo: int) -> None:
        if names:
            idx = ex.lookup(target_rows)
            for name, i in zip(names, idx):
                if i >= 0 and name not in found:
                    found[name] = int(i)
        if want_negative and NEGATIVE not in found:
            neg = np.nonzero((ex.vals[lo:] < 0).all(axis=1))[0]
            if len(neg):
                found[NEGATIVE] = int(neg[0]) + lo

    def done() -> bool:
        return all(t in found for t in names) and (not want_negative or NEGATIVE in found)

    scan(0)
    status = "saturated"
    while True:
        if (names or want_negative) and done():
            status = "goals"
            break
        end = len(ex.vals)
        if start == end:
            break
        new_end = ex.step(start)
        rounds += 1
        scan(end)
        start = end
        if ex.truncated:
            status = "goals" if (names or want_negative) and done() else "exhausted"
            break
    return ClosureRun(status, ex.vals, rounds, (ex.op, ex.pa, ex.pb), ex.gen_index, found)


def bounded_closure(gs: GeneratorSet, budget: SearchBudget, threads: int = 1) -> ClosureRun:
    """Explore to saturation (or the node cap) without any goal."""
    _check_box(gs, budget)
    return _explore(gs, budget, None, False, threads)


def _check_box(gs: GeneratorSet, budget: SearchBudget) -> None:
    if gs.max_abs() > budget.box:
        raise ValueError(f"box {budget.box} is smaller than the generators' largest entry {gs.max_abs()}")


def _unit_targets(f: RootedForest) -> dict[str, tuple[int, ...]]:
    return {unit_role(w): tuple(1 if v == w else 0 for v in range(f.n)) for w in range(f.n)}


def goal_search(gs: GeneratorSet, budget: SearchBudget, threads: int = 1) -> Verdict:
    """Look for every unit vector and an all-negative vector inside the box."""
    if gs.max_abs() > budget.box:
        return Verdict(UNKNOWN, stats={"search": "box-too-small", "nodes": 0})
    run = _explore(gs, budget, _unit_targets(gs.forest), True, threads)
    stats = {"search": run.status, "nodes": run.nodes, "rounds": run.rounds}
    if run.status != "goals":
        wanted = list(_unit_targets(gs.forest)) + [NEGATIVE]
        stats["missing"] = [r for r in wanted if r not in run.found]
        return Verdict(UNKNOWN, stats=stats)
    roles = list(run.found)
    wit = dict(zip(roles, run.derivations([run.found[r] for r in roles])))
    checked = GeneratorSet(gs.forest, gs.gens, wit, gs.label)
    bad = checked.replay_failures()
    if bad:  # would be an engine bug; never report an unreplayable success
        raise AssertionError(f"reconstructed witnesses failed replay: {bad}")
    return Verdict(PROVEN_GENERATES, witnesses=wit, stats=stats)


def verify_generator_set(gs: GeneratorSet, budget: SearchBudget | None = None,
                         threads: int = 1, search: bool = True) -> Verdict:
    budget = budget or SearchBudget()
    stats: dict = {}
    if gs.witnesses:
        bad = gs.replay_failures()
        if not bad:
            return Verdict(PROVEN_GENERATES, witnesses=gs.witnesses, stats={"source": "witnesses"})
        stats["replay_failures"] = bad[:10]
    cert = find_certificate(gs)
    if cert is not None:
        return Verdict(PROVEN_NOT, certificate=cert, stats={**stats, "source": "certificate"})
    if not search:
        return Verdict(UNKNOWN, stats={**stats, "source": "none"})
    v = goal_search(gs, budget, threads)
    v.stats = {**stats, **v.stats, "source": "search"}
    return v


@dataclass
class Membership:
    status: str
    derivation: Derivation | None = None
    stats: dict = field(default_factory=dict)


def is_member_bounded(gs: GeneratorSet, target: ForestVector | Sequence[int],
                      budget: SearchBudget, threads: int = 1) -> Membership:
    if isinstance(target, ForestVector):
        if target.forest is not gs.forest:
            raise ForestMismatch("target lives on a different forest")
        t = target.coords
    else:
        t = tuple(int(x) for x in target)
        if len(t) != gs.forest.n:
            raise ForestMismatch(f"target has {len(t)} coordinates, forest has {gs.forest.n}")
    if gs.max_abs() > budget.box or max(map(abs, t), default=0) > budget.box:
        return Membership(UNKNOWN, stats={"search": "outside-box"})
    run = _explore(gs, budget, {"target": t}, False, threads)
    stats = {"search": run.status, "nodes": run.nodes, "rounds": run.rounds}
    if "target" not in run.found:
        return Membership(UNKNOWN, stats=stats)
    d = run.derivations([run.found["target"]])[0]
    if gs.eval(d).coords != t:
        raise AssertionError("reconstructed derivation does not evaluate to the target")
    return Membership(MEMBER, d, stats)


# --- minimal generating sets ------------------------------------------------

def automorphisms(f: RootedForest, limit: int = 5000) -> list[tuple[int, ...]] | None:
    """All vertex permutations preserving the parent map (None beyond ``limit``)."""
    canon = _subtree_canons(f)
    n = f.n
    out: list[tuple[int, ...]] = []
    image = [-1] * n
    used = [False] * n

    def extend(v: int) -> bool:
        if v == n:
            out.append(tuple(image))
            return len(out) <= limit
        p = f.parents[v]
        pool = f.roots if p is None else f.children[image[p]]
        for w in pool:
            if not used[w] and canon[w] == canon[v]:
                used[w], image[v] = True, w
                if not extend(v + 1):
                    return False
                used[w], image[v] = False, -1
        return True

    if not extend(0):
        return None
    return out


def _box_vectors(n: int, box: int) -> np.ndarray:
    axis = np.arange(-box, box + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)
    return grid.reshape(-1, n)


def _index_batches(total: int, s: int, chunk: int) -> Iterator[np.ndarray]:
    """All increasing s-tuples of range(total), lexicographic, as (m, s) arrays."""
    if s == 1:
        for lo in range(0, total, chunk):
            yield np.arange(lo, min(total, lo + chunk))[:, None]
        return
    buf, size = [], 0
    for prefix in itertools.combinations(range(total), s - 2):
        first = prefix[-1] + 1 if prefix else 0
        for a in range(first, total - 1):
            b = np.arange(a + 1, total)
            block = np.empty((len(b), s), dtype=np.int64)
            block[:, : s - 2] = prefix
            block[:, s - 2] = a
            block[:, s - 1] = b
            buf.append(block)
            size += len(b)
            if size >= chunk:
                yield np.concatenate(buf)
                buf, size = [], 0
    if buf:
        yield np.concatenate(buf)


@dataclass
class MinGensOutcome:
    """``result`` is found / none / exhausted; ``proof`` says why a none is a proof."""

    result: str
    gens: GeneratorSet | None = None
    proof: str | None = None
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"result": self.result}
        if self.proof is not None:
            out["proof"] = self.proof
        if self.gens is not None:
            out["gens"] = [list(g) for g in self.gens.coords]
        out["stats"] = dict(self.stats)
        return out


def search_min_gens(f: RootedForest, size: int, budget: SearchBudget | None = None,
                    threads: int = 1, candidate_cap: int | None = None,
                    max_box_vectors: int = 200_000) -> MinGensOutcome:
    """First generating ``size``-set inside the box, in lexicographic order of sorted sets.

    Candidates are filtered by sign, ratio (isolated forests) and chain
    certificates before any closure work, and by forest automorphisms: a set
    whose image under some automorphism is lexicographically smaller has the
    same outcome as that earlier image.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    budget = budget or SearchBudget()
    stats = {"enumerated": 0, "sign": 0, "ratio": 0, "chain": 0, "symmetric": 0,
             "closures": 0, "nodes": 0}
    if size <= f.depth:
        dummy = GeneratorSet(f, [[0] * f.n] * size)
        cert = cardinality_depth_certificate(f, dummy)
        stats["depth"] = cert.depth
        return MinGensOutcome("none", proof="depth", stats=stats)
    total = (2 * budget.box + 1) ** f.n
    if total > max_box_vectors:
        stats["reason"] = f"box holds {total} vectors"
        return MinGensOutcome("exhausted", stats=stats)
    vecs = _box_vectors(f.n, budget.box)
    autos = [a for a in (automorphisms(f) or []) if a != tuple(range(f.n))]
    perms = [np.argsort(a) for a in autos]  # coords of the image vector
    keys = _Keys(f.n, budget.box)
    isolated = f.is_isolated
    chains = ChainFilter(f)
    chunk = max(1, 2_000_000 // (size * f.n))
    for batch_idx in _index_batches(len(vecs), size, chunk):
        batch = vecs[batch_idx]
        stats["enumerated"] += len(batch)
        alive = ~sign_mask(batch)
        stats["sign"] += int((~alive).sum())
        if isolated and alive.any():
            killed = np.zeros_like(alive)
            killed[alive] = ratio_mask(batch[alive])
            stats["ratio"] += int(killed.sum())
            alive &= ~killed
        if alive.any():
            killed = np.zeros_like(alive)
            killed[alive] = chains.mask(batch[alive])
            stats["chain"] += int(killed.sum())
            alive &= ~killed
        for row in np.nonzero(alive)[0]:
            cand = [tuple(int(x) for x in v) for v in batch[row]]
            gs = GeneratorSet(f, cand)
            if perms and _has_smaller_image(batch[row], perms, keys):
                stats["symmetric"] += 1
                continue
            # node_cap bounds the whole search, not each closure
            left = budget.node_cap - stats["nodes"]
            stats["closures"] += 1
            verdict = goal_search(gs, SearchBudget(budget.box, left, budget.seed), threads)
            stats["nodes"] += verdict.stats.get("nodes", 0)
            if verdict.status == PROVEN_GENERATES:
                found = GeneratorSet(f, cand, verdict.witnesses, label=f"search-min size {size}")
                return MinGensOutcome("found", found, stats={**stats, "last": verdict.stats})
            if verdict.stats.get("search") == "exhausted" or stats["nodes"] >= budget.node_cap:
                stats["reason"] = "node cap reached"
                return MinGensOutcome("exhausted", stats=stats)
            if candidate_cap is not None and stats["closures"] >= candidate_cap:
                stats["reason"] = "candidate cap reached"
                return MinGensOutcome("exhausted", stats=stats)
    if stats["closures"] == 0 and stats["symmetric"] == 0:
        return MinGensOutcome("none", proof="certificates", stats=stats)
    return MinGensOutcome("none", stats=stats)


def _has_smaller_image(cand: np.ndarray, perms: list[np.ndarray], keys: _Keys) -> bool:
    own = np.sort(keys(cand))
    for p in perms:
        img = np.sort(keys(cand[:, p]))
        for x, y in zip(img, own):
            if x != y:
                if x < y:
                    return True
                break
    return False
