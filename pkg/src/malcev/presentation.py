"""Relational structures presented by growing finite fragments.

A presentation has domain the natural numbers and a total atomic-fact
oracle.  ``fragment(P, t)`` is the finite piece seen after looking at the
first ``t`` elements and the first ``t`` relation symbols.  Function symbols
never appear: a group's addition is the ternary graph ``add(x, y, x+y)``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

from .formulas import (
    And,
    Atom,
    Eq,
    ExistFormula,
    Not,
    Or,
    conjuncts_if_literals,
    serialize,
)


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique")
        if any(a < 1 for _, a in self.relations):
            raise ValueError("arities must be >= 1")

    def __len__(self):
        return len(self.relations)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.relations):
            if n == name:
                return i
        raise KeyError(name)

    def arity(self, rel: int) -> int:
        return self.relations[rel][1]

    def name(self, rel: int) -> str:
        return self.relations[rel][0]


# ------------------------------------------------------------------ fragments


class FiniteFragment:
    """Elements ``0..size-1`` with the atomic facts over the first ``nrel`` symbols."""

    signature: Signature
    size: int
    nrel: int

    def holds(self, rel: int, args: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def solve(self, rel: int, args: tuple) -> list[int]:
        """Values for the single ``None`` slot of ``args`` that make the fact hold."""
        slot = args.index(None)
        out = []
        for e in range(self.size):
            full = args[:slot] + (e,) + args[slot + 1:]
            if self.holds(rel, full):
                out.append(e)
        return out

    def solve_repeated(self, rel: int, args: tuple, bound: int) -> list[int] | None:
        """Values ``e < bound`` that make the fact hold when every ``None`` slot is ``e``.

        ``None`` means no shortcut is known and the caller should scan.
        """
        return None

    def facts_within(self, rel: int, elements: Iterable[int]) -> set[tuple[int, ...]]:
        elems = sorted(set(elements))
        inside = set(elems)
        k = self.signature.arity(rel)
        out = set()
        if k == 1:
            return {(e,) for e in elems if self.holds(rel, (e,))}
        for head in product(elems, repeat=k - 1):
            for last in self.solve(rel, head + (None,)):
                if last in inside:
                    out.add(head + (last,))
        return out

    @property
    def facts(self) -> frozenset:
        out = set()
        for rel in range(self.nrel):
            out.update((rel, tup) for tup in self.facts_within(rel, range(self.size)))
        return frozenset(out)

    def restrict(self, t: int, nrel: int | None = None) -> "ExplicitFragment":
        nrel = min(t, len(self.signature)) if nrel is None else nrel
        facts = set()
        for rel in range(min(nrel, self.nrel)):
            facts.update((rel, tup) for tup in self.facts_within(rel, range(min(t, self.size))))
        return ExplicitFragment(self.signature, min(t, self.size), frozenset(facts), min(nrel, self.nrel))

    def __eq__(self, other):
        if not isinstance(other, FiniteFragment):
            return NotImplemented
        return (self.size, self.nrel, self.signature) == (other.size, other.nrel, other.signature) and (
            self.facts == other.facts
        )

    def __hash__(self):
        return hash((self.size, self.nrel))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for rel, tup in sorted(self.facts):
            w.writerow([self.signature.name(rel), *tup])
        return buf.getvalue()


class ExplicitFragment(FiniteFragment):
    def __init__(self, signature: Signature, size: int, facts: Iterable, nrel: int | None = None):
        self.signature = signature
        self.size = size
        self.nrel = min(size, len(signature)) if nrel is None else nrel
        self._facts = frozenset(facts)
        for rel, tup in self._facts:
            if rel >= self.nrel or any(e >= size for e in tup) or len(tup) != signature.arity(rel):
                raise ValueError(f"fact {(rel, tup)} outside fragment of size {size}")
        self._index: dict[tuple[int, int], dict[tuple, list[int]]] = {}

    def holds(self, rel, args):
        return (rel, tuple(args)) in self._facts

    def solve(self, rel, args):
        slot = args.index(None)
        idx = self._index.get((rel, slot))
        if idx is None:
            idx = {}
            for r, tup in self._facts:
                if r == rel:
                    idx.setdefault(tup[:slot] + tup[slot + 1:], []).append(tup[slot])
            self._index[(rel, slot)] = idx
        return sorted(idx.get(tuple(args[:slot]) + tuple(args[slot + 1:]), ()))

    @property
    def facts(self):
        return self._facts


class StructureFragment(FiniteFragment):
    """Lazy view of a presentation truncated at ``t``; facts are materialized on demand."""

    def __init__(self, structure: "PresentedStructure", t: int):
        self.structure = structure
        self.signature = structure.signature
        self.size = t
        self.nrel = min(t, len(structure.signature))
        self._facts = None

    def holds(self, rel, args):
        if rel >= self.nrel or any(e >= self.size for e in args):
            return False
        return self.structure.holds(rel, tuple(args))

    def solve(self, rel, args):
        if rel >= self.nrel:
            return []
        if any(a is not None and a >= self.size for a in args):
            return []
        vals = self.structure.solve(rel, tuple(args), self.size)
        return sorted(v for v in vals if v < self.size)

    def solve_repeated(self, rel, args, bound):
        hook = getattr(self.structure, "solve_repeated", None)
        if hook is None:
            return None
        if rel >= self.nrel:
            return []
        if any(a is not None and a >= self.size for a in args):
            return []
        vals = hook(rel, tuple(args), min(bound, self.size))
        return None if vals is None else sorted(v for v in vals if v < self.size)

    @property
    def facts(self):
        if self._facts is None:
            self._facts = FiniteFragment.facts.fget(self)
        return self._facts


class PresentedStructure:
    """A computable presentation: domain ω and a total atomic-fact oracle.

    Subclasses override ``holds``; overriding ``solve`` (with ``bound``, the
    fragment size being queried) gives fast witness lookup for graphs of
    functions.  ``element(n)`` may expose the exact mathematical object for
    oracle code; construction code never calls it.
    """

    signature: Signature

    def holds(self, rel: int, args: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def solve(self, rel: int, args: tuple, bound: int) -> list[int]:
        slot = args.index(None)
        return [e for e in range(bound) if self.holds(rel, args[:slot] + (e,) + args[slot + 1:])]

    def element(self, n: int):
        raise NotImplementedError

    @lru_cache(maxsize=64)
    def fragment(self, t: int) -> StructureFragment:
        return StructureFragment(self, t)


def fragment(P: PresentedStructure, t: int) -> FiniteFragment:
    if t < 0:
        raise PreconditionError("t must be >= 0")
    return P.fragment(t)


# ----------------------------------------------------------------- evaluation


def _eval(F: FiniteFragment, phi, asg) -> bool:
    if isinstance(phi, Atom):
        if phi.rel >= F.nrel:
            raise PreconditionError(f"relation {phi.rel} outside fragment (nrel={F.nrel})")
        return F.holds(phi.rel, tuple(asg[a] for a in phi.args))
    if isinstance(phi, Eq):
        return asg[phi.left] == asg[phi.right]
    if isinstance(phi, Not):
        return not _eval(F, phi.body, asg)
    if isinstance(phi, And):
        return all(_eval(F, p, asg) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_eval(F, p, asg) for p in phi.parts)
    raise TypeError(f"not a quantifier-free formula: {phi!r}")


def eval_qf(F: FiniteFragment, phi, asg: Mapping[str, int]) -> bool:
    missing = phi.variables() - set(asg)
    if missing:
        raise PreconditionError(f"unassigned variables {sorted(missing)}")
    for v in phi.variables():
        if not 0 <= asg[v] < F.size:
            raise PreconditionError(f"element {asg[v]} for {v} outside fragment of size {F.size}")
    return _eval(F, phi, asg)


def eval_exists_bounded(F: FiniteFragment, phi: ExistFormula, asg: Mapping[str, int], bound: int) -> bool:
    """True iff some witness tuple with entries ``< bound`` satisfies the matrix."""
    if bound > F.size:
        raise PreconditionError("bound exceeds fragment size")
    free = phi.matrix.variables() - set(phi.bound)
    missing = free - set(asg)
    if missing:
        raise PreconditionError(f"unassigned variables {sorted(missing)}")
    for v in free:
        if not 0 <= asg[v] < F.size:
            raise PreconditionError(f"element {asg[v]} for {v} outside fragment of size {F.size}")
    for a in phi.matrix.atoms():
        if a.rel >= F.nrel:
            raise PreconditionError(f"relation {a.rel} outside fragment (nrel={F.nrel})")
    return find_witness(F, phi, asg, bound) is not None


def find_witness(F: FiniteFragment, phi: ExistFormula, asg: Mapping[str, int], bound: int):
    """The first witness assignment (as a dict) in search order, or None."""
    qvars = list(phi.bound)
    base = {k: v for k, v in asg.items() if k not in qvars}
    lits = conjuncts_if_literals(phi.matrix)
    if lits is None:
        for combo in product(range(bound), repeat=len(qvars)):
            full = dict(base, **dict(zip(qvars, combo)))
            if _eval(F, phi.matrix, full):
                return dict(zip(qvars, combo))
        return None
    return _join(F, lits, base, qvars, bound)


def _lit_vars(lit):
    return lit.variables()


def _join(F, lits, asg, todo, bound):
    # literals whose variables are all bound can be checked right away
    for lit in lits:
        if _lit_vars(lit) <= asg.keys() and not _eval(F, lit, asg):
            return None
    if not todo:
        return {}
    best = None
    for var in todo:
        cands = None
        for lit in lits:
            if isinstance(lit, Eq) and var in (lit.left, lit.right):
                other = lit.right if lit.left == var else lit.left
                if other in asg:
                    cands = [asg[other]] if asg[other] < bound else []
                    break
            if isinstance(lit, Atom) and var in lit.args:
                others = [a for a in lit.args if a != var]
                if all(o in asg for o in others):
                    args = tuple(None if a == var else asg[a] for a in lit.args)
                    if lit.args.count(var) == 1:
                        got = F.solve(lit.rel, args)
                    else:
                        got = F.solve_repeated(lit.rel, args, bound)
                    if got is not None:
                        got = [e for e in got if e < bound]
                        cands = got if cands is None else [e for e in cands if e in got]
        if cands is not None and (best is None or len(cands) < len(best[1])):
            best = (var, cands)
    if best is None:
        best = (todo[0], range(bound))
    var, cands = best
    rest = [v for v in todo if v != var]
    relevant = [lit for lit in lits if var in _lit_vars(lit)]
    for e in cands:
        asg2 = dict(asg)
        asg2[var] = e
        ok = True
        for lit in relevant:
            if _lit_vars(lit) <= asg2.keys() and not _eval(F, lit, asg2):
                ok = False
                break
        if not ok:
            continue
        sub = _join(F, [l for l in lits if not (_lit_vars(l) <= asg2.keys())], asg2, rest, bound)
        if sub is not None:
            sub[var] = e
            return sub
    return None


# ------------------------------------------------------------ diagram & maps


def partition_names(partition: tuple[Sequence[int], Sequence[int], Sequence[int]]) -> dict[str, int]:
    """Variable names used by :func:`atomic_diagram_formula`, mapped to elements."""
    cs, vs, us = partition
    names = {}
    for prefix, block in (("c", cs), ("v", vs), ("u", us)):
        for j, e in enumerate(block):
            names[f"{prefix}{j}"] = e
    return names


def atomic_diagram_formula(F: FiniteFragment, partition) -> And:
    cs, vs, us = (list(b) for b in partition)
    everything = cs + vs + us
    if sorted(everything) != list(range(F.size)):
        raise PreconditionError("partition must cover the fragment exactly once")
    name_of = {e: n for n, e in partition_names((cs, vs, us)).items()}
    lits = []
    for rel in range(F.nrel):
        k = F.signature.arity(rel)
        for tup in product(range(F.size), repeat=k):
            atom = Atom(rel, tuple(name_of[e] for e in tup))
            lits.append(atom if F.holds(rel, tup) else Not(atom))
    for a in range(F.size):
        for b in range(a + 1, F.size):
            lits.append(Not(Eq(name_of[a], name_of[b])))
    lits.sort(key=serialize)
    return And(tuple(lits))


def _as_map(tau) -> dict[int, int]:
    if isinstance(tau, Mapping):
        return dict(tau)
    return dict(enumerate(tau))


def pullback(F_M: FiniteFragment, tau, nrel: int | None = None) -> ExplicitFragment:
    """The structure on ``dom(tau)`` making ``tau`` an embedding into ``F_M``."""
    m = _as_map(tau)
    if sorted(m) != list(range(len(m))):
        raise PreconditionError("domain of tau must be an initial segment")
    if len(set(m.values())) != len(m):
        raise PreconditionError("tau must be injective")
    if any(not 0 <= v < F_M.size for v in m.values()):
        raise PreconditionError("range of tau must lie in the fragment")
    inv = {v: k for k, v in m.items()}
    nrel = F_M.nrel if nrel is None else min(nrel, F_M.nrel)
    facts = set()
    for rel in range(nrel):
        for tup in F_M.facts_within(rel, m.values()):
            facts.add((rel, tuple(inv[e] for e in tup)))
    return ExplicitFragment(F_M.signature, len(m), facts, nrel)


def is_partial_isomorphism(F_A: FiniteFragment, F_B: FiniteFragment, mapping) -> bool:
    m = _as_map(mapping)
    if len(set(m.values())) != len(m):
        return False
    if any(not 0 <= k < F_A.size for k in m) or any(not 0 <= v < F_B.size for v in m.values()):
        return False
    inv = {v: k for k, v in m.items()}
    for rel in range(min(F_A.nrel, F_B.nrel)):
        fa = {tuple(m[e] for e in tup) for tup in F_A.facts_within(rel, m)}
        fb = F_B.facts_within(rel, inv)
        if fa != fb:
            return False
    return True


def compose(tau, sigma) -> dict[int, int]:
    """``tau ∘ sigma`` on the part of dom(sigma) that sigma maps into dom(tau)."""
    t, s = _as_map(tau), _as_map(sigma)
    return {k: t[v] for k, v in s.items() if v in t}


def fragment_from_csv(signature: Signature, size: int, text: str, nrel: int | None = None) -> ExplicitFragment:
    facts = set()
    for row in csv.reader(io.StringIO(text)):
        if row:
            facts.add((signature.index(row[0]), tuple(int(x) for x in row[1:])))
    return ExplicitFragment(signature, size, facts, nrel)
