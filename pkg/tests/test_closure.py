from __future__ import annotations

import itertools
import random

import pytest

import psf.closure as closure_mod
from psf.closure import (
    MEMBER,
    PROVEN_GENERATES,
    PROVEN_NOT,
    UNKNOWN,
    SearchBudget,
    automorphisms,
    bounded_closure,
    eval_derivation,
    goal_search,
    is_member_bounded,
    search_min_gens,
    verify_generator_set,
)
from psf.derivation import NEGATIVE, Add, DerivationError, Gen, GeneratorSet, Join, parse_sexpr, unit_role
from psf.forest import RootedForest, isol, path, tkl
from psf.gensets import gens_isol, gens_path
from psf.parasemifield import ForestMismatch, ForestVector

from conftest import random_forest


def brute_closure_max_plus(gens, box):
    """Fixed point of coordinate-wise max and plus, clipped to the box."""
    reach = set(map(tuple, gens))
    while True:
        new = set()
        for a in reach:
            for b in reach:
                s = tuple(x + y for x, y in zip(a, b))
                if all(abs(x) <= box for x in s):
                    new.add(s)
                new.add(tuple(max(x, y) for x, y in zip(a, b)))
        if new <= reach:
            return reach
        reach |= new


def gset(f, rows):
    return GeneratorSet(f, [tuple(r) for r in rows])


def test_eval_examples():
    gs = gens_isol(2)
    assert eval_derivation(gs, parse_sexpr("(g 1)")).coords == (1, -2)
    assert eval_derivation(gs, parse_sexpr("(+ (g 1) (g 2))")).coords == (-1, -1)
    assert eval_derivation(gs, parse_sexpr("(j (g 1) (s 5 (g 1)))")).coords == (5, -2)
    with pytest.raises(DerivationError):
        eval_derivation(gs, Gen(3))


def test_verify_examples():
    assert verify_generator_set(gens_isol(2)).status == PROVEN_GENERATES
    v = verify_generator_set(gset(isol(3), [(1, 2, 3), (9, 6, 1)]))
    assert v.status == PROVEN_NOT and v.certificate.kind == "SIGN" and v.certificate.check()
    assert verify_generator_set(gens_path(2)).status == PROVEN_GENERATES


def test_verify_falls_back_to_search_without_witnesses():
    bare = gset(isol(2), [(1, -2), (-2, 1)])
    v = verify_generator_set(bare, SearchBudget(box=12))
    assert v.status == PROVEN_GENERATES and v.stats["source"] == "search"
    assert GeneratorSet(bare.forest, bare.gens, v.witnesses).replay_failures() == []


def test_verify_ignores_broken_witnesses():
    gs = gens_isol(2)
    wit = dict(gs.witnesses)
    wit[unit_role(0)] = Gen(1)
    v = verify_generator_set(GeneratorSet(gs.forest, gs.gens, wit), SearchBudget(box=12))
    assert v.status == PROVEN_GENERATES
    assert v.stats["replay_failures"] == [unit_role(0)]


def test_goal_search_examples():
    v = goal_search(gens_isol(2), SearchBudget(box=12))
    assert v.status == PROVEN_GENERATES
    assert set(v.witnesses) == {unit_role(0), unit_role(1), NEGATIVE}
    assert goal_search(gset(isol(1), [(2,)]), SearchBudget(box=10)).status == UNKNOWN
    for b in (1, 5, 12):
        assert goal_search(gset(isol(1), [(1,)]), SearchBudget(box=b)).status == UNKNOWN
    assert verify_generator_set(gset(isol(1), [(1,)])).status == PROVEN_NOT


def test_goal_search_box_smaller_than_generators():
    v = goal_search(gset(isol(1), [(5,), (-5,)]), SearchBudget(box=3))
    assert v.status == UNKNOWN and v.stats["search"] == "box-too-small"


def test_membership_examples():
    b = SearchBudget(box=12)
    m = is_member_bounded(gens_isol(2), (1, 0), b)
    assert m.status == MEMBER and gens_isol(2).eval(m.derivation).coords == (1, 0)
    one = gset(isol(1), [(1,)])
    m = is_member_bounded(one, (3,), b)
    assert m.status == MEMBER
    from psf.derivation import to_sexpr

    assert to_sexpr(m.derivation) == "(s 3 (g 1))"
    assert is_member_bounded(one, (-1,), b).status == UNKNOWN
    with pytest.raises(ForestMismatch):
        is_member_bounded(one, ForestVector(isol(1), (3,)), b)


@pytest.mark.parametrize("box", [0, 1, 2, 3, 4, 5, 6])
def test_closure_equals_brute_force(box):
    rng = random.Random(box)
    for _ in range(15):
        n = rng.randint(1, 2)
        rows = [[rng.randint(-box, box) for _ in range(n)] for _ in range(rng.randint(1, 3))]
        run = bounded_closure(gset(isol(n), rows), SearchBudget(box=box))
        assert run.status == "saturated"
        assert run.vector_set() == brute_closure_max_plus(rows, box)


def test_every_reached_vector_replays():
    rng = random.Random(9)
    for _ in range(10):
        f = random_forest(rng, rng.randint(1, 3))
        rows = [[rng.randint(-3, 3) for _ in range(f.n)] for _ in range(3)]
        gs = gset(f, rows)
        run = bounded_closure(gs, SearchBudget(box=5, node_cap=20_000))
        ders = run.derivations(range(run.nodes))
        for vec, d in zip(run.vectors.tolist(), ders):
            assert gs.eval(d).coords == tuple(vec)


def test_closure_monotone_in_box_and_cap():
    gs = gset(path(2), [(1, -2), (-2, 1), (0, 1)])
    small = bounded_closure(gs, SearchBudget(box=3)).vector_set()
    large = bounded_closure(gs, SearchBudget(box=5)).vector_set()
    assert small <= large
    capped = bounded_closure(gs, SearchBudget(box=5, node_cap=30))
    assert capped.status == "exhausted" and capped.nodes == 30
    assert capped.vector_set() <= large


def test_deterministic_across_threads(monkeypatch):
    gs = gset(tkl(2, 1), [(1, -2), (-2, 1)])
    base = bounded_closure(gs, SearchBudget(box=9))
    monkeypatch.setattr(closure_mod, "_CHUNK_ELEMS", 64)
    for threads in (1, 3, 8):
        run = bounded_closure(gs, SearchBudget(box=9), threads=threads)
        assert run.vectors.tolist() == base.vectors.tolist()
        assert all((a == b).all() for a, b in zip(run.links, base.links))


def test_wide_forest_uses_byte_keys():
    f = isol(16)
    rows = [[1 if i == j else 0 for i in range(16)] for j in range(16)] + [[-1] * 16]
    v = goal_search(gset(f, rows), SearchBudget(box=2, node_cap=10_000))
    assert v.status == PROVEN_GENERATES


def test_automorphisms():
    assert len(automorphisms(RootedForest([None, 0, 0]))) == 2
    assert len(automorphisms(tkl(2, 2))) == 8
    assert automorphisms(path(4)) == [(0, 1, 2, 3)]
    assert automorphisms(isol(8), limit=100) is None


def test_search_min_examples():
    o = search_min_gens(path(2), 2, SearchBudget(box=4))
    assert (o.result, o.proof) == ("none", "depth")
    o = search_min_gens(path(2), 3, SearchBudget(box=4))
    assert o.result == "found" and len(o.gens) == 3
    assert o.gens.replay_failures() == []
    o = search_min_gens(isol(3), 2, SearchBudget(box=5))
    assert (o.result, o.proof) == ("none", "certificates")


def test_search_min_is_exhaustive_for_isol1():
    # in box 1 the only generating pair is {(-1), (1)}
    o = search_min_gens(isol(1), 2, SearchBudget(box=1))
    assert o.result == "found" and o.gens.coords == [(-1,), (1,)]
    o = search_min_gens(isol(1), 1, SearchBudget(box=3))
    assert (o.result, o.proof) == ("none", "depth")


def test_search_min_evidence_without_proof():
    # in box 1, Isol_2 has no generating pair, but some pair survives all certificates
    o = search_min_gens(isol(2), 2, SearchBudget(box=1))
    assert o.result == "none" and o.proof is None and o.stats["closures"] > 0


def test_search_min_reports_exhaustion():
    o = search_min_gens(isol(3), 3, SearchBudget(box=3, node_cap=5))
    assert o.result == "exhausted"
    o = search_min_gens(tkl(2, 2), 3, SearchBudget(box=12))
    assert o.result == "exhausted"


def test_search_min_matches_brute_force_on_isol1():
    box = 2
    pairs = [p for p in itertools.combinations(range(-box, box + 1), 2)]
    expect = None
    for a, b in pairs:
        reach = brute_closure_max_plus([(a,), (b,)], box)
        if (1,) in reach and any(v[0] < 0 for v in reach):
            expect = [(a,), (b,)]
            break
    o = search_min_gens(isol(1), 2, SearchBudget(box=box))
    assert o.gens.coords == expect
