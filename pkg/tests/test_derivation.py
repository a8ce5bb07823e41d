from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psf.derivation import (
    NEGATIVE,
    Add,
    DerivationError,
    Gen,
    GeneratorSet,
    Join,
    ReplayError,
    Scale,
    dag_size,
    evaluate,
    evaluate_many,
    genset_to_dict,
    genset_to_json,
    parse_genset,
    parse_sexpr,
    substitute,
    to_sexpr,
    tree_size,
    unit_role,
)
from psf.forest import isol, path, tkl
from psf.gensets import gens_isol, gens_tkl


@st.composite
def derivations(draw, gens: int = 3, depth: int = 4):
    if depth == 0 or draw(st.booleans()):
        return Gen(draw(st.integers(1, gens)))
    op = draw(st.sampled_from(["+", "j", "s"]))
    if op == "s":
        return Scale(draw(st.integers(1, 5)), draw(derivations(gens, depth - 1)))
    left = draw(derivations(gens, depth - 1))
    right = draw(derivations(gens, depth - 1))
    return Add(left, right) if op == "+" else Join(left, right)


def test_spec_style_evaluations():
    gs = gens_isol(2)
    assert gs.eval(parse_sexpr("(g 1)")).coords == (1, -2)
    assert gs.eval(parse_sexpr("(+ (g 1) (g 2))")).coords == (-1, -1)
    assert gs.eval(parse_sexpr("(j (g 1) (s 5 (g 1)))")).coords == (5, -2)


@settings(max_examples=150, deadline=None)
@given(derivations())
def test_sexpr_roundtrip(d):
    text = to_sexpr(d)
    again = parse_sexpr(text)
    assert to_sexpr(again) == text
    gens = [(1, -2, 0), (-2, 1, 3), (0, 0, -1)]
    assert evaluate(tkl(1, 3), gens, d) == evaluate(tkl(1, 3), gens, again)


@pytest.mark.parametrize(
    "text",
    ["", "(g)", "(g 0)", "(g x)", "(+ (g 1))", "(s 0 (g 1))", "(s -2 (g 1))", "(q (g 1) (g 2))",
     "(g 1) (g 2)", "((g 1)", "(g 1))", "g 1"],
)
def test_sexpr_rejects(text):
    with pytest.raises(DerivationError):
        parse_sexpr(text)


def test_bad_index_at_evaluation():
    with pytest.raises(DerivationError):
        evaluate(isol(2), [(1, 2)], Gen(2))


def test_shared_subterms_counted_once():
    g = Gen(1)
    a = Add(g, g)
    b = Join(a, a)
    c = Add(b, b)
    assert dag_size(c) == 4
    assert tree_size(c) == 15


def test_substitute_shares_memo():
    d = Add(Gen(1), Join(Gen(2), Gen(1)))
    memo: dict = {}
    out = substitute(d, {1: Gen(2), 2: Scale(3, Gen(1))}, memo)
    assert to_sexpr(out) == "(+ (g 2) (j (s 3 (g 1)) (g 2)))"


def test_deep_derivation_has_no_recursion_limit():
    d = Gen(1)
    for _ in range(50_000):
        d = Add(d, Gen(1))
    assert evaluate(isol(1), [(1,)], d) == (50_001,)
    assert parse_sexpr(to_sexpr(d)) is not None


def test_backends_agree_on_random_terms():
    gs = gens_tkl(2, 2)
    gens = gs.coords
    roots = list(gs.witnesses.values())
    dense = evaluate_many(gs.forest, gens, roots, backend="dense")
    shared = evaluate_many(gs.forest, gens, roots, backend="shared")
    assert dense == shared


def test_replay_detects_corruption_in_both_backends():
    gs = gens_tkl(2, 2)
    wit = dict(gs.witnesses)
    wit[unit_role(3)] = Add(wit[unit_role(3)], wit[unit_role(3)])
    wit[NEGATIVE] = Join(wit[NEGATIVE], Gen(1))
    bad = GeneratorSet(gs.forest, gs.gens, wit)
    for backend in ("dense", "shared"):
        assert sorted(bad.replay_failures(backend)) == sorted([unit_role(3), NEGATIVE])
    with pytest.raises(ReplayError):
        bad.assert_replays()


def test_missing_roles_reported():
    gs = gens_isol(2)
    partial = GeneratorSet(gs.forest, gs.gens, {NEGATIVE: gs.witnesses[NEGATIVE]})
    assert partial.replay_failures() == [unit_role(0), unit_role(1)]
    assert not partial.has_complete_witnesses()


def test_genset_json_roundtrip():
    gs = gens_isol(3)
    obj = json.loads(genset_to_json(gs))
    assert obj["gens"] == [[1, 2, 3], [9, 6, 1], [-1, -1, -1]]
    assert list(obj["witnesses"]) == ["unit(0)", "unit(1)", "unit(2)", "negative"]
    again = parse_genset(obj)
    assert again.replay_failures() == []
    assert genset_to_dict(again) == obj


def test_genset_json_refuses_huge_expansion():
    with pytest.raises(DerivationError):
        genset_to_dict(gens_tkl(2, 3), node_limit=10)


def test_genset_rejects_foreign_roles_and_forests():
    f = path(2)
    with pytest.raises(ValueError):
        GeneratorSet(f, [(1, 0)], {"unit(x)": Gen(1)})
    with pytest.raises(ValueError):
        parse_genset({"forest": {"parents": [None]}, "gens": [[1, 2]]})
    with pytest.raises(ValueError):
        parse_genset({"gens": [[1]]})
