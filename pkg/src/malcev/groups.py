"""Vector-group presentations shared by the torsion-free and ordered classes.

Element coding (stable across runs):

* index ``2k`` is the generator ``e_k``;
* index ``2j + 1`` is the ``j``-th remaining group element, listed by
  weight and then by the canonical tuple order.  The weight of a vector is
  ``sum(i + 1 + h(c_i))`` over its support, where ``h(p/q) = |p| + 2(q - 1)``.

Each weight level is finite, so the coding is a bijection between ω and the
group.  Which denominators may appear at coordinate ``i`` is decided by an
``allowed(i, q)`` predicate: everything for ⊕Q, nothing for free groups.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Mapping

from .formulas import And, Atom, Eq, ExistFormula, Not, Or
from .linalg import ZERO, Vec, unit, vadd, vscale, vsub
from .presentation import PreconditionError, PresentedStructure, Signature, find_witness

ADD, ZERO_REL, LT = 0, 1, 2
GROUP_SIGNATURE = Signature((("add", 3), ("zero", 1)))
ORDERED_SIGNATURE = Signature((("add", 3), ("zero", 1), ("lt", 2)))


def height(c: Fraction) -> int:
    return abs(c.numerator) + 2 * (c.denominator - 1)


def weight(v: Vec) -> int:
    return sum(i + 1 + height(c) for i, c in v)


def is_generator(v: Vec) -> bool:
    return len(v) == 1 and v[0][1] == 1


class VectorCoding:
    """Bijection ω ↔ ⊕_i R_i e_i, with R_i ⊆ Q fixed by ``allowed``."""

    def __init__(self, allowed: Callable[[int, int], bool], divisible: bool = False):
        self.allowed = allowed
        self.divisible = divisible
        self._levels: list[list[Vec]] = []
        self._pos: list[dict[Vec, int]] = []
        self._cum = [0]
        self._sub = lru_cache(maxsize=None)(self._sub_level)

    def _rationals(self, i: int, h: int) -> list[Fraction]:
        out = []
        for q in range(1, h // 2 + 2):
            p = h - 2 * (q - 1)
            if p <= 0 or gcd(p, q) != 1:
                continue
            if q > 1 and not self.allowed(i, q):
                continue
            out += [Fraction(p, q), Fraction(-p, q)]
        return out

    def _sub_level(self, w: int, start: int) -> tuple:
        if w == 0:
            return ((),)
        res = []
        for i in range(start, w):
            for h in range(1, w - i):
                for r in self._rationals(i, h):
                    for rest in self._sub(w - (i + 1 + h), i + 1):
                        res.append(((i, r),) + rest)
        return tuple(res)

    def _grow(self):
        w = len(self._levels)
        level = sorted(v for v in self._sub(w, 0) if not is_generator(v))
        self._levels.append(level)
        self._pos.append({v: k for k, v in enumerate(level)})
        self._cum.append(self._cum[-1] + len(level))

    def _cover(self, position: int):
        while self._cum[-1] <= position:
            self._grow()

    def decode(self, n: int) -> Vec:
        if n < 0:
            raise ValueError("negative index")
        if n % 2 == 0:
            return unit(n // 2)
        p = (n - 1) // 2
        self._cover(p)
        w = next(k for k in range(len(self._levels)) if self._cum[k + 1] > p)
        return self._levels[w][p - self._cum[w]]

    def contains(self, v: Vec) -> bool:
        return all(c.denominator == 1 or self._denominator_ok(i, c.denominator) for i, c in v)

    def contains_all(self, vs) -> bool:
        return all(self.contains(v) for v in vs)

    def _denominator_ok(self, i: int, q: int) -> bool:
        return self.allowed(i, q)

    def index_below(self, v: Vec, t: int) -> int | None:
        """Index of ``v`` if it is smaller than ``t``, else None."""
        if is_generator(v):
            n = 2 * v[0][0]
            return n if n < t else None
        if t <= 1:
            return None
        pmax = (t - 2) // 2  # largest list position with odd index < t
        self._cover(pmax)
        w = weight(v)
        wmax = next(k for k in range(len(self._levels)) if self._cum[k + 1] > pmax)
        if w > wmax:
            return None
        if not self.contains(v):
            return None
        k = self._pos[w].get(v)
        if k is None:
            return None
        n = 2 * (self._cum[w] + k) + 1
        return n if n < t else None

    def encode(self, v: Vec, limit_weight: int = 40) -> int:
        if is_generator(v):
            return 2 * v[0][0]
        w = weight(v)
        if w > limit_weight:
            raise OverflowError(f"weight {w} too large to encode")
        if not self.contains(v):
            raise ValueError(f"{v} is not an element of this group")
        while len(self._levels) <= w:
            self._grow()
        return 2 * (self._cum[w] + self._pos[w][v]) + 1


DIVISIBLE = VectorCoding(lambda i, q: True, divisible=True)
FREE = VectorCoding(lambda i, q: False)


class VectorGroup(PresentedStructure):
    """A coded vector group, optionally relabelled by a finite permutation.

    ``perm`` maps presentation index -> standard index on the finitely many
    moved indices; every other index is fixed.
    """

    signature = GROUP_SIGNATURE

    def __init__(self, coding: VectorCoding, perm: Mapping[int, int] | None = None):
        self.coding = coding
        self.divisible = coding.divisible
        self.perm = dict(perm or {})
        if sorted(self.perm) != sorted(self.perm.values()):
            raise ValueError("relabelling must be a permutation of its support")
        self.inv = {v: k for k, v in self.perm.items()}
        self.moved_bound = max(self.perm, default=-1) + 1
        self._cache: dict[int, Vec] = {}

    def element(self, n: int) -> Vec:
        v = self._cache.get(n)
        if v is None:
            v = self.coding.decode(self.perm.get(n, n))
            self._cache[n] = v
        return v

    def index_below(self, v: Vec, t: int) -> int | None:
        s = self.coding.index_below(v, max(t, self.moved_bound))
        if s is None:
            return None
        n = self.inv.get(s, s)
        return n if n < t else None

    def index_of(self, v: Vec) -> int:
        s = self.coding.encode(v)
        return self.inv.get(s, s)

    def holds(self, rel, args):
        if rel == ADD:
            x, y, z = args
            return vadd(self.element(x), self.element(y)) == self.element(z)
        if rel == ZERO_REL:
            return not self.element(args[0])
        raise PreconditionError(f"unknown relation {rel}")

    def solve(self, rel, args, bound):
        if rel == ZERO_REL:
            z = self.index_below(ZERO, bound)
            return [] if z is None else [z]
        if rel == ADD:
            x, y, z = args
            if z is None:
                v = vadd(self.element(x), self.element(y))
            elif y is None:
                v = vsub(self.element(z), self.element(x))
            else:
                v = vsub(self.element(z), self.element(y))
            n = self.index_below(v, bound)
            return [] if n is None else [n]
        return super().solve(rel, args, bound)

    def solve_repeated(self, rel, args, bound):
        """``solve`` with one unknown in several slots of an addition fact."""
        if rel != ADD:
            return None
        x, y, z = args
        if x is None and y is None and z is None:
            n = self.index_below(ZERO, bound)
            return [] if n is None else [n]
        if x is None and y is None:
            half = vscale(self.element(z), Fraction(1, 2))
            if not self.coding.contains(half):
                return []
            n = self.index_below(half, bound)
            return [] if n is None else [n]
        # e + y = e or x + e = e: the other summand must be zero
        other = y if x is None else x
        if z is None and (x is None) != (y is None):
            return list(range(bound)) if not self.element(other) else []
        return None


def eval_on_values(phi, env: Mapping[str, Vec], less=None) -> bool:
    """Truth of a quantifier-free formula when variables denote exact vectors.

    ``less(a, b)`` interprets the order symbol when present.
    """
    if isinstance(phi, Atom):
        vals = [env[a] for a in phi.args]
        if phi.rel == ADD:
            return vadd(vals[0], vals[1]) == vals[2]
        if phi.rel == ZERO_REL:
            return not vals[0]
        if phi.rel == LT and less is not None:
            return less(vals[0], vals[1])
        raise PreconditionError(f"relation {phi.rel} has no exact interpretation")
    if isinstance(phi, Eq):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, Not):
        return not eval_on_values(phi.body, env, less)
    if isinstance(phi, And):
        return all(eval_on_values(p, env, less) for p in phi.parts)
    if isinstance(phi, Or):
        return any(eval_on_values(p, env, less) for p in phi.parts)
    raise TypeError(phi)


def witness_in_structure(structure: PresentedStructure, phi: ExistFormula, asg: Mapping[str, int], budget: int):
    """Witness indices for ``phi`` under ``asg``, searching fragments of growing size."""
    t = max(asg.values(), default=0) + 1
    while True:
        t = min(t, budget)
        w = find_witness(structure.fragment(t), phi, asg, t)
        if w is not None or t >= budget:
            return w
        t *= 2
