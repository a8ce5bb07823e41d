from __future__ import annotations

import random

from hypothesis import strategies as st

from psf.forest import RootedForest


def random_forest(rng: random.Random, n: int, root_bias: float = 0.25) -> RootedForest:
    parents = [None]
    for i in range(1, n):
        parents.append(None if rng.random() < root_bias else rng.randrange(i))
    return RootedForest(parents)


@st.composite
def forests(draw, max_vertices: int = 8):
    n = draw(st.integers(1, max_vertices))
    parents = [None]
    for i in range(1, n):
        parents.append(draw(st.one_of(st.none(), st.integers(0, i - 1))))
    return RootedForest(parents)


@st.composite
def forest_and_vectors(draw, count: int = 3, bound: int = 50, max_vertices: int = 8):
    f = draw(forests(max_vertices))
    vecs = [
        tuple(draw(st.lists(st.integers(-bound, bound), min_size=f.n, max_size=f.n)))
        for _ in range(count)
    ]
    return f, vecs


# one summary line per acceptance criterion, whatever the capture mode
_criteria: dict[int, tuple[str, str]] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    n, title = mark.args
    _criteria[n] = ("PASS" if call.excinfo is None else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        verdict, title = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}")
