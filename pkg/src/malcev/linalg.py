"""Exact rational and integer linear algebra on sparse vectors.

Vectors are canonical tuples of ``(coordinate, Fraction)`` pairs, sorted by
coordinate, with no zero entries.  They are hashable and compare by value,
which is what the presentations and oracles rely on.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

Vec = tuple  # tuple[tuple[int, Fraction], ...]

ZERO: Vec = ()


def vec(entries: Mapping[int, object] | Iterable[tuple[int, object]]) -> Vec:
    items = entries.items() if isinstance(entries, Mapping) else entries
    acc: dict[int, Fraction] = {}
    for i, c in items:
        acc[i] = acc.get(i, Fraction(0)) + Fraction(c)
    return tuple(sorted((i, c) for i, c in acc.items() if c))


def unit(i: int) -> Vec:
    return ((i, Fraction(1)),)


def vadd(a: Vec, b: Vec) -> Vec:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = a[i][0], b[j][0]
        if ka == kb:
            s = a[i][1] + b[j][1]
            if s:
                out.append((ka, s))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def vscale(a: Vec, k) -> Vec:
    if not k:
        return ZERO
    k = Fraction(k)
    return tuple((i, c * k) for i, c in a)


def vneg(a: Vec) -> Vec:
    return tuple((i, -c) for i, c in a)


def vsub(a: Vec, b: Vec) -> Vec:
    return vadd(a, vneg(b))


def combo(coeffs: Sequence, vectors: Sequence[Vec]) -> Vec:
    out = ZERO
    for k, v in zip(coeffs, vectors):
        if k:
            out = vadd(out, vscale(v, k))
    return out


def support(a: Vec) -> list[int]:
    return [i for i, _ in a]


def denominator(a: Vec) -> int:
    return lcm(1, *(c.denominator for _, c in a))


class Echelon:
    """Incremental row echelon form over Q that remembers how each row was built.

    ``add`` returns whether the vector was independent of those added before;
    ``express`` writes a vector as a combination of the added vectors.
    """

    def __init__(self, vectors: Iterable[Vec] = ()):
        self.rows: dict[int, tuple[dict, dict]] = {}  # pivot -> (row, combo over inputs)
        self.inputs: list[Vec] = []
        self.independent: list[bool] = []
        for v in vectors:
            self.add(v)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _reduce(self, v: Vec) -> tuple[dict, dict]:
        row = dict(v)
        comb: dict[int, Fraction] = {}
        last = None
        while True:
            # pivots have minimal coordinate in their row, so sweeping upward terminates
            cand = [k for k in row if k in self.rows and (last is None or k > last)]
            if not cand:
                return row, comb
            p = last = min(cand)
            prow, pcomb = self.rows[p]
            f = row[p] / prow[p]
            for k, c in prow.items():
                n = row.get(k, 0) - f * c
                if n:
                    row[k] = n
                else:
                    row.pop(k, None)
            for k, c in pcomb.items():
                n = comb.get(k, 0) + f * c
                if n:
                    comb[k] = n
                else:
                    comb.pop(k, None)

    def residual(self, v: Vec) -> Vec:
        return vec(self._reduce(v)[0])

    def contains(self, v: Vec) -> bool:
        return not self._reduce(v)[0]

    def add(self, v: Vec) -> bool:
        idx = len(self.inputs)
        self.inputs.append(v)
        row, comb = self._reduce(v)
        if not row:
            self.independent.append(False)
            return False
        # row = v - sum(comb_j * input_j)
        own = {k: -c for k, c in comb.items()}
        own[idx] = Fraction(1)
        self.rows[min(row)] = (row, own)
        self.independent.append(True)
        return True

    def express(self, v: Vec) -> dict[int, Fraction] | None:
        """Coefficients over the added inputs, or None when ``v`` is outside the span."""
        row, comb = self._reduce(v)
        if row:
            return None
        return {k: c for k, c in comb.items() if c}

    def copy(self) -> "Echelon":
        e = Echelon()
        e.rows = {p: (dict(r), dict(c)) for p, (r, c) in self.rows.items()}
        e.inputs = list(self.inputs)
        e.independent = list(self.independent)
        return e


def rank(vectors: Iterable[Vec]) -> int:
    return Echelon(vectors).rank


def independent(vectors: Sequence[Vec]) -> bool:
    return rank(vectors) == len(vectors)


def independent_over(xs: Sequence[Vec], cs: Sequence[Vec]) -> bool:
    """True iff ``xs`` is linearly independent over the span of ``cs``."""
    e = Echelon(cs)
    base = e.rank
    for x in xs:
        e.add(x)
    return e.rank == base + len(xs)


def in_span(x: Vec, ys: Sequence[Vec]) -> bool:
    return Echelon(ys).contains(x)


def integer_relation(x: Vec, ys: Sequence[Vec]) -> tuple[int, list[int]] | None:
    """Primitive integers ``(n, m)`` with ``n > 0`` and ``n*x = sum m_i*y_i``.

    Only defined when ``ys`` is independent; returns None if ``x`` is outside
    their span.
    """
    e = Echelon(ys)
    if e.rank != len(ys):
        raise ValueError("integer_relation needs an independent tuple")
    coeffs = e.express(x)
    if coeffs is None:
        return None
    qs = [coeffs.get(i, Fraction(0)) for i in range(len(ys))]
    n = lcm(1, *(q.denominator for q in qs))
    ms = [int(q * n) for q in qs]
    g = gcd(n, *ms)
    return n // g, [m // g for m in ms]


# ---------------------------------------------------------------- integers


def _swap_rows(m, i, j):
    m[i], m[j] = m[j], m[i]


def _swap_cols(m, i, j):
    for row in m:
        row[i], row[j] = row[j], row[i]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(a: Sequence[Sequence[int]]):
    """Return ``(U, D, V)`` with ``U * A * V = D`` diagonal, U and V unimodular.

    Diagonal entries are non-negative and each divides the next.
    """
    m = [list(map(int, row)) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = identity(rows)
    v = identity(cols)
    t = 0
    while t < min(rows, cols):
        # pick the smallest nonzero pivot in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if m[i][j] and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        _swap_rows(m, t, best[0])
        _swap_rows(u, t, best[0])
        _swap_cols(m, t, best[1])
        _swap_cols(v, t, best[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, rows):
                if m[i][t]:
                    q = m[i][t] // m[t][t]
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
                    if m[i][t]:
                        _swap_rows(m, t, i)
                        _swap_rows(u, t, i)
                        done = False
            for j in range(t + 1, cols):
                if m[t][j]:
                    q = m[t][j] // m[t][t]
                    for row in m:
                        row[j] -= q * row[t]
                    for row in v:
                        row[j] -= q * row[t]
                    if m[t][j]:
                        _swap_cols(m, t, j)
                        _swap_cols(v, t, j)
                        done = False
            if done:
                # enforce divisibility of the rest of the block
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if m[i][j] % m[t][t]:
                            m[t] = [x + y for x, y in zip(m[t], m[i])]
                            u[t] = [x + y for x, y in zip(u[t], u[i])]
                            done = False
                            break
                    if not done:
                        break
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, m, v


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def det(a: Sequence[Sequence]) -> Fraction:
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    d = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return d


def inverse_unimodular(a: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c])
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    out = [[x for x in row[n:]] for row in m]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def lattice_basis(vectors: Sequence[Vec]) -> list[Vec]:
    """A Z-basis of the subgroup of Q^(omega) generated by ``vectors``."""
    vectors = [v for v in vectors if v]
    if not vectors:
        return []
    coords = sorted({i for v in vectors for i, _ in v})
    d = lcm(1, *(denominator(v) for v in vectors))
    mat = [[int(dict(v).get(i, 0) * d) for i in coords] for v in vectors]
    u, diag, v = smith_normal_form(mat)
    # rows of U*A = D*V^-1 ; nonzero rows of U*A form a basis
    ua = matmul(u, mat)
    basis = []
    for row in ua:
        if any(row):
            basis.append(vec({c: Fraction(x, d) for c, x in zip(coords, row)}))
    return basis


def coordinates(x: Vec, basis: Sequence[Vec]) -> list[Fraction] | None:
    e = Echelon(basis)
    c = e.express(x)
    if c is None:
        return None
    return [c.get(i, Fraction(0)) for i in range(len(basis))]
