"""Exact linear algebra over Z and Q: elimination, lattice index, LP feasibility."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


def rank_q(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                factor = m[r][col] / m[rank][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def solve_q(matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[Fraction] | None:
    """Some rational solution of ``matrix @ x = rhs`` (free variables set to 0), or None."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [a * inv for a in m[r]]
        for i in range(rows):
            if i != r and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    if any(m[i][cols] != 0 for i in range(r, rows)):
        return None
    x = [Fraction(0)] * cols
    for i, col in enumerate(pivots):
        x[col] = m[i][cols]
    return x


def hermite_rows(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form basis of the integer row lattice (zero rows dropped)."""
    m = [list(map(int, r)) for r in rows]
    ncols = len(m[0]) if m else 0
    out: Matrix = []
    for col in range(ncols):
        # gcd-reduce column ``col`` among remaining rows
        while True:
            live = [r for r in m if r[col] != 0]
            if len(live) <= 1:
                break
            live.sort(key=lambda r: abs(r[col]))
            p = live[0]
            for r in live[1:]:
                q = r[col] // p[col]
                for j in range(col, ncols):
                    r[j] -= q * p[j]
        piv = next((r for r in m if r[col] != 0), None)
        if piv is None:
            continue
        m.remove(piv)
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append(piv)
    for i, row in enumerate(out):
        col = next(j for j, x in enumerate(row) if x != 0)
        for prev in out[:i]:
            q = prev[col] // row[col]
            if q:
                for j in range(len(row)):
                    prev[j] -= q * row[j]
    return out


def lattice_index(rows: Sequence[Sequence[int]], dim: int) -> int | None:
    """Index of the row lattice in Z^dim, or None when it has lower rank."""
    basis = hermite_rows(rows) if rows else []
    if len(basis) < dim:
        return None
    det = 1
    for row in basis:
        det *= next(x for x in row if x != 0)
    return abs(det)


def feasible_nonneg(a: Sequence[Sequence[int]], b: Sequence[int]) -> list[Fraction] | None:
    """A vertex solution of ``a @ x = b, x >= 0`` by exact phase-one simplex, or None."""
    rows = len(a)
    n = len(a[0]) if rows else 0
    if rows == 0:
        return [Fraction(0)] * n
    # tableau rows: [coeffs (n), artificials (rows), rhs]
    tab: list[list[Fraction]] = []
    for i, (row, bi) in enumerate(zip(a, b)):
        sign = -1 if bi < 0 else 1
        art = [Fraction(0)] * rows
        art[i] = Fraction(1)
        tab.append([Fraction(sign * x) for x in row] + art + [Fraction(sign * bi)])
    basis = [n + i for i in range(rows)]
    width = n + rows
    # minimise the sum of artificials: reduced costs = -(sum of rows) on structural columns
    cost = [Fraction(0)] * (width + 1)
    for row in tab:
        for j in range(n):
            cost[j] -= row[j]
        cost[width] -= row[width]
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)  # Bland's rule
        if enter is None:
            break
        best, leave = None, None
        for i, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[width] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded direction cannot occur in phase one
            break
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(rows):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, tab[leave])]
        basis[leave] = enter
    if cost[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][width]
    return x


def positive_relation(vectors: Sequence[Sequence[int]]) -> list[int] | None:
    """Integers ``c_i >= 1`` with ``sum c_i v_i = 0``, or None if none exist."""
    if not vectors:
        return None
    dim = len(vectors[0])
    s = len(vectors)
    # c = 1 + x with x >= 0:  sum x_i v_i = -sum v_i
    a = [[vectors[i][r] for i in range(s)] for r in range(dim)]
    b = [-sum(v[r] for v in vectors) for r in range(dim)]
    x = feasible_nonneg(a, b)
    if x is None:
        return None
    c = [1 + xi for xi in x]
    den = 1
    for ci in c:
        den = den * ci.denominator // _gcd(den, ci.denominator)
    return [int(ci * den) for ci in c]


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)
