"""The Σ₁ family for Z-linear dependence over the ``add``/``zero`` graphs.

``x ∈ cl(y_1..y_n)`` iff ``n·x = Σ m_i·y_i`` for integers with ``n ≠ 0``.
Each such relation is one open formula: both sides are written as
left-folded sums of variables, the partial sums being witnesses ``z1, z2…``;
negative coefficients move to the other side.

Formula indexing.  A formula is determined by a rational coefficient vector
``q`` (``x = Σ q_j y_{j+1}``) and a multiplier ``k ≥ 1`` scaling the cleared
relation.  Its index is ``2^(k-1)·(2·code(q) + 1) - 1`` where ``code`` is
the ⊕Q element coding from :mod:`malcev.groups`.  So ``x = y_j`` has index
``4(j-1)`` and the arity-``n`` family is the set of indices whose ``q`` is
supported on the first ``n`` coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm

from .formulas import And, Atom, Eq, ExistFormula
from .groups import ADD, DIVISIBLE, ZERO_REL
from .linalg import Echelon, Vec, vadd, vec


def decode_index(i: int) -> tuple[int, Vec]:
    m = i + 1
    k = 1
    while m % 2 == 0:
        m //= 2
        k += 1
    return k, DIVISIBLE.decode((m - 1) // 2)


def formula_index(k: int, q: Vec, upto: int | None = None) -> int | None:
    """Index of the formula ``(k, q)``; None if it exceeds ``upto``."""
    scale = 2 ** (k - 1)
    if upto is None:
        return scale * (2 * DIVISIBLE.encode(q) + 1) - 1
    # index <= upto  iff  code(q) <= ((upto + 1) / scale - 1) / 2
    bound = ((upto + 1) // scale - 1) // 2
    if bound < 0:
        return None
    code = DIVISIBLE.index_below(q, bound + 1)
    if code is None:
        return None
    return scale * (2 * code + 1) - 1


def relation(k: int, q: Vec) -> tuple[int, dict[int, int]]:
    """Integer relation ``(n, {j: m_j})`` with ``n·x = Σ m_j y_{j+1}``."""
    d = lcm(1, *(c.denominator for _, c in q))
    n = k * d
    return n, {j: int(c * n) for j, c in q}


def sides(n: int, ms: dict[int, int]) -> tuple[list, list]:
    """Term lists as ``('x', None)`` / ``('y', j)`` markers."""
    lhs = [("x", None)] * n
    rhs = []
    for j in sorted(ms):
        m = ms[j]
        if m < 0:
            lhs += [("y", j)] * (-m)
        else:
            rhs += [("y", j)] * m
    return lhs, rhs


@lru_cache(maxsize=4096)
def build_formula(k: int, q: Vec) -> ExistFormula:
    n, ms = relation(k, q)
    lhs, rhs = sides(n, ms)
    atoms = []
    count = 0

    def name(term):
        return "x" if term[0] == "x" else f"y{term[1] + 1}"

    def fold(terms):
        nonlocal count
        acc = name(terms[0])
        for t in terms[1:]:
            count += 1
            z = f"z{count}"
            atoms.append(Atom(ADD, (acc, name(t), z)))
            acc = z
        return acc

    left = fold(lhs)
    if rhs:
        right = fold(rhs)
        atoms.append(Eq(left, right))
    else:
        atoms.append(Atom(ZERO_REL, (left,)))
    return ExistFormula(tuple(f"z{i}" for i in range(1, count + 1)), And(tuple(atoms)))


def chain_values(k: int, q: Vec, x: Vec, ys: list[Vec]) -> list[Vec]:
    """Exact values of the witnesses ``z1, z2…`` for the formula ``(k, q)``."""
    n, ms = relation(k, q)
    lhs, rhs = sides(n, ms)
    out = []
    for terms in (lhs, rhs):
        if not terms:
            continue
        vals = [x if t[0] == "x" else ys[t[1]] for t in terms]
        acc = vals[0]
        for v in vals[1:]:
            acc = vadd(acc, v)
            out.append(acc)
    return out


@dataclass
class ZDependenceFamily:
    """Σ₁ family for Z-dependence; no parameters are needed (d̄ is empty)."""

    params: tuple[int, ...] = ()
    prefix_monotone = True

    def formula(self, i: int) -> ExistFormula:
        return build_formula(*decode_index(i))

    def arity_of(self, i: int) -> int:
        """Least arity whose family contains index ``i``."""
        _, q = decode_index(i)
        return max((j + 1 for j, _ in q), default=0)

    def indices(self, n: int, upto: int):
        for i in range(upto + 1):
            if self.arity_of(i) <= n:
                yield i

    def free_names(self, n: int) -> tuple[str, ...]:
        return ("x",) + tuple(f"y{j}" for j in range(1, n + 1))


class ZDependenceAccelerator:
    """Exact shortcut for ``cl_t`` over a :class:`~malcev.groups.VectorGroup`.

    A formula can only hold if the relation it encodes holds exactly, and
    then its witnesses are forced (``add`` is a graph), so membership reduces
    to index bookkeeping.  Answers coincide with formula-by-formula
    evaluation; the test suite checks this on small fragments.
    """

    def __init__(self, structure):
        self.structure = structure
        self._echelons: dict[tuple, Echelon] = {}

    def _echelon(self, ys: tuple) -> Echelon:
        e = self._echelons.get(ys)
        if e is None:
            if ys and ys[:-1] in self._echelons:
                e = self._echelons[ys[:-1]].copy()
                e.add(self.structure.element(ys[-1]))
            else:
                e = Echelon(self.structure.element(y) for y in ys)
            if len(self._echelons) > 20000:
                self._echelons.clear()
            self._echelons[ys] = e
        return e

    def _witnesses_below(self, k, q, x, ys, t) -> bool:
        S = self.structure
        for v in chain_values(k, q, x, ys):
            if S.index_below(v, t) is None:
                return False
        return True

    def member(self, x: int, ys: tuple, t: int) -> bool:
        if x >= t or any(y >= t for y in ys) or t < 1:
            return False
        S = self.structure
        vx = S.element(x)
        vys = [S.element(y) for y in ys]
        e = self._echelon(tuple(ys))
        if e.rank == len(ys):
            coeffs = e.express(vx)
            if coeffs is None:
                return False
            q = vec({j: c for j, c in coeffs.items()})
            k = 1
            while 2 ** (k - 1) <= t + 1:
                if formula_index(k, q, t) is not None and self._uses_available_relations(k, q, t):
                    if self._witnesses_below(k, q, vx, vys, t):
                        return True
                k += 1
            return False
        # dependent parameters: several relations, scan the formulas in order
        if not e.contains(vx):
            return False
        n_ar = len(ys)
        for i in range(t + 1):
            k, q = decode_index(i)
            if any(j >= n_ar for j, _ in q):
                continue
            n, ms = relation(k, q)
            total = vec({})
            for j, m in ms.items():
                total = vadd(total, tuple((c, a * m) for c, a in vys[j]))
            if tuple((c, a * n) for c, a in vx) != total:
                continue
            if self._uses_available_relations(k, q, t) and self._witnesses_below(k, q, vx, vys, t):
                return True
        return False

    def threshold(self, x: int, ys: tuple, upto: int) -> int | None:
        """Least ``t ≤ upto`` with ``x ∈ cl_t(ys)``; only for independent ``ys``."""
        S = self.structure
        e = self._echelon(tuple(ys))
        if e.rank != len(ys):
            return None
        coeffs = e.express(S.element(x))
        if coeffs is None:
            return None
        q = vec(coeffs)
        vx, vys = S.element(x), [S.element(y) for y in ys]
        floor = max([x] + list(ys)) + 1
        best = None
        k = 1
        while 2 ** (k - 1) <= upto + 1:
            i = formula_index(k, q, upto)
            if i is not None:
                need = max(floor, i, max((a.rel for a in build_formula(k, q).atoms()), default=-1) + 1)
                ok = True
                for v in chain_values(k, q, vx, vys):
                    j = S.index_below(v, upto)
                    if j is None:
                        ok = False
                        break
                    need = max(need, j + 1)
                if ok and need <= upto and (best is None or need < best):
                    best = need
            k += 1
        return best

    def surely_independent(self, X) -> bool:
        """Exact independence; a t-dependence among ``X`` is then impossible."""
        return self._echelon(tuple(X)).rank == len(X)

    @staticmethod
    def _uses_available_relations(k, q, t) -> bool:
        f = build_formula(k, q)
        return all(a.rel < t for a in f.atoms())


def zero_formula_index() -> int:
    return formula_index(1, ())


def identity_formula_index(j: int) -> int:
    """Index of ``x = y_j`` (``j`` is 1-based)."""
    return formula_index(1, ((j - 1, Fraction(1)),))
