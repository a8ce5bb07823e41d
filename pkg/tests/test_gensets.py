from __future__ import annotations

import random

import pytest

from psf.closure import PROVEN_GENERATES, SearchBudget, goal_search, verify_generator_set
from psf.derivation import NEGATIVE, GeneratorSet, unit_role
from psf.forest import RootedForest, attach_root, is_isomorphic, isol, kpn, path, shape_stats, tkl
from psf.gensets import (
    MissingWitnesses,
    gens_generic,
    gens_isol,
    gens_kpn,
    gens_layered,
    gens_path,
    gens_root_extension,
    gens_tkl,
    gens_union,
)

from conftest import random_forest


def test_isol_small_cases():
    assert gens_isol(1).coords == [(1,), (-1,)]
    gs = gens_isol(2)
    assert gs.coords == [(1, -2), (-2, 1)]
    assert gs.replay_failures() == []


def test_isol_three():
    gs = gens_isol(3)
    assert gs.coords == [(1, 2, 3), (9, 6, 1), (-1, -1, -1)]
    assert gs.replay_failures() == []
    assert gs.witnesses[NEGATIVE].index == 3


@pytest.mark.parametrize("n", [3, 10, 50])
def test_isol_u_vectors_peak_on_the_diagonal(n):
    k = n * n + 1
    for i in range(1, n + 1):
        u = [2 * i * j + (k - j * j) for j in range(1, n + 1)]
        top = max(u)
        assert u[i - 1] == top and u.count(top) == 1


def test_path_family():
    assert gens_path(1).coords == [(1,), (-1,)]
    assert gens_path(2).coords == [(1, 0), (0, 1), (-1, -1)]
    for n in range(1, 7):
        gs = gens_path(n)
        assert len(gs) == n + 1 and gs.replay_failures() == []


def test_union_two_copies_of_isol1():
    gs = gens_union(gens_isol(1), 2)
    assert gs.coords == [(5, -7), (3, -9), (-2, 4)]
    assert gs.replay_failures() == []


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("base", [gens_isol(2), gens_path(2), gens_isol(3)])
def test_union_sizes(base, m):
    gs = gens_union(base, m)
    assert len(gs) == len(base) + (1 if m == 2 else 2)
    assert gs.forest.n == m * base.forest.n
    assert gs.replay_failures() == []


def test_root_extension_of_isol1():
    gs = gens_root_extension(gens_isol(1))
    assert gs.forest.same_structure(path(2))
    assert gs.coords == [(-1, 1), (-1, -1), (1, 0)]
    assert gs.replay_failures() == []


@pytest.mark.parametrize("base", [gens_isol(3), gens_path(3), gens_union(gens_isol(2), 2)])
def test_root_extension_adds_one(base):
    gs = gens_root_extension(base)
    assert len(gs) == len(base) + 1
    assert is_isomorphic(gs.forest, attach_root(base.forest))
    assert gs.replay_failures() == []


def test_constructions_require_witnesses():
    bare = GeneratorSet(isol(2), [(1, -2), (-2, 1)])
    with pytest.raises(MissingWitnesses):
        gens_union(bare, 2)
    with pytest.raises(MissingWitnesses):
        gens_root_extension(bare)


@pytest.mark.parametrize("k, l", [(1, 4), (3, 1), (2, 2), (2, 3), (3, 2), (4, 2)])
def test_tkl(k, l):
    gs = gens_tkl(k, l)
    assert is_isomorphic(gs.forest, tkl(k, l))
    limit = l + 1 if k == 1 else (2 * l if k == 2 else 3 * l)
    assert len(gs) <= limit
    assert gs.replay_failures() == []


def test_kpn_three_two():
    gs = gens_kpn(3, 2)
    assert gs.coords == [(-2, -2, 1, 0, 1, 0), (0, 1, -2, -2, 0, 1), (1, 0, 0, 1, -2, -2)]
    total = [sum(c) for c in zip(*gs.coords)]
    assert total == [-1] * 6
    assert gs.replay_failures() == []


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kpn_all_k(n):
    for k in range(1, n + 2):
        gs = gens_kpn(k, n)
        assert len(gs) == n + 1
        assert gs.forest.same_structure(kpn(k, n))
        assert gs.replay_failures() == []


def test_kpn_refuses_too_many_paths():
    with pytest.raises(ValueError):
        gens_kpn(4, 2)


@pytest.mark.parametrize(
    "f, limit",
    [
        (path(3), 4),
        (RootedForest([None, 0, 0]), 4),
        (RootedForest([None, 0, 1, 1, None]), 6),
        (kpn(5, 2), 6),
    ],
)
def test_generic(f, limit):
    gs = gens_generic(f)
    assert gs.forest is f
    assert len(gs) <= limit
    assert gs.replay_failures() == []


def test_generic_on_random_forests():
    rng = random.Random(11)
    for _ in range(25):
        f = random_forest(rng, rng.randint(1, 10))
        gs = gens_generic(f)
        st = shape_stats(f)
        limit = st.depth + 1 if st.width == 1 else (2 if st.width == 2 else 3) * st.depth
        assert len(gs) <= limit
        assert gs.replay_failures() == []


def test_layered_on_random_forests():
    rng = random.Random(12)
    for _ in range(40):
        f = random_forest(rng, rng.randint(1, 10))
        gs = gens_layered(f)
        assert gs.replay_failures() == []
        assert len(gs) <= 3 * f.depth


def test_layered_agrees_with_goal_search():
    rng = random.Random(13)
    budget = SearchBudget(box=12, node_cap=200_000)
    for _ in range(8):
        f = random_forest(rng, rng.randint(1, 3))
        bare = gens_layered(f, witnesses=False)
        assert bare.witnesses is None
        if bare.max_abs() > budget.box:
            continue
        assert goal_search(bare, budget).status == PROVEN_GENERATES


def test_verifier_accepts_every_family():
    for gs in (gens_isol(4), gens_path(3), gens_tkl(2, 2), gens_kpn(2, 3), gens_generic(tkl(2, 2))):
        assert verify_generator_set(gs).status == PROVEN_GENERATES


def test_witness_roles_complete():
    gs = gens_tkl(3, 2)
    assert set(gs.witnesses) == {unit_role(w) for w in range(gs.forest.n)} | {NEGATIVE}
