"""Quantifier-free and existential formulas over a relational signature.

Canonical text form is prefix notation::

    (and (R0 x y z) (not (= x y)))
    (exists (y0 y1) (and (R0 x y0 y1) (R1 y1)))

``(and)`` is true and ``(or)`` is false.  Relation symbols are written
``R<index>``; variables are bare identifiers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass


class Formula:
    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def atoms(self) -> list["Atom"]:
        return []

    def __str__(self):
        return serialize(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: int
    args: tuple[str, ...]

    def variables(self):
        return frozenset(self.args)

    def atoms(self):
        return [self]


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str

    def variables(self):
        return frozenset((self.left, self.right))


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def variables(self):
        return self.body.variables()

    def atoms(self):
        return self.body.atoms()


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...] = ()

    def variables(self):
        return frozenset().union(*(p.variables() for p in self.parts))

    def atoms(self):
        return [a for p in self.parts for a in p.atoms()]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...] = ()

    def variables(self):
        return frozenset().union(*(p.variables() for p in self.parts))

    def atoms(self):
        return [a for p in self.parts for a in p.atoms()]


TRUE = And(())


@dataclass(frozen=True)
class ExistFormula(Formula):
    """``∃ variables . matrix`` with the matrix quantifier-free."""

    bound: tuple[str, ...]
    matrix: Formula

    def variables(self):
        return self.matrix.variables() | frozenset(self.bound)

    def free(self) -> frozenset[str]:
        return self.matrix.variables() - set(self.bound)

    def atoms(self):
        return self.matrix.atoms()


def conj(*parts: Formula) -> And:
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else (p,))
    return And(tuple(flat))


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Atom, Eq)) or (isinstance(f, Not) and isinstance(f.body, (Atom, Eq)))


def conjuncts_if_literals(f: Formula) -> list[Formula] | None:
    if is_literal(f):
        return [f]
    if isinstance(f, And) and all(is_literal(p) for p in f.parts):
        return list(f.parts)
    return None


def nnf(f: Formula, negate: bool = False) -> Formula:
    if isinstance(f, (Atom, Eq)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, And):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    raise TypeError(f)


def dnf(f: Formula) -> list[list[Formula]]:
    """Disjunctive normal form as a list of literal lists."""
    f = nnf(f)

    def go(g):
        if is_literal(g):
            return [[g]]
        if isinstance(g, Or):
            return [c for p in g.parts for c in go(p)]
        if isinstance(g, And):
            acc = [[]]
            for p in g.parts:
                acc = [a + b for a in acc for b in go(p)]
            return acc
        raise TypeError(g)

    return go(f)


# ------------------------------------------------------------- serialization


def serialize(f: Formula) -> str:
    if isinstance(f, Atom):
        return "(R%d %s)" % (f.rel, " ".join(f.args))
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {serialize(f.body)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + serialize(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + serialize(p) for p in f.parts) + ")"
    if isinstance(f, ExistFormula):
        return "(exists (%s) %s)" % (" ".join(f.bound), serialize(f.matrix))
    raise TypeError(f)


def _occurrence_order(f: Formula, out: list):
    if isinstance(f, Atom):
        names = f.args
    elif isinstance(f, Eq):
        names = (f.left, f.right)
    elif isinstance(f, Not):
        return _occurrence_order(f.body, out)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _occurrence_order(p, out)
        return out
    elif isinstance(f, ExistFormula):
        return _occurrence_order(f.matrix, out)
    else:
        raise TypeError(f)
    for n in names:
        if n not in out:
            out.append(n)
    return out


def rename(f: Formula, m: dict[str, str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(m.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(m.get(f.left, f.left), m.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(rename(f.body, m))
    if isinstance(f, And):
        return And(tuple(rename(p, m) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(rename(p, m) for p in f.parts))
    if isinstance(f, ExistFormula):
        return ExistFormula(tuple(m.get(v, v) for v in f.bound), rename(f.matrix, m))
    raise TypeError(f)


def canonical(f: Formula, free_order: tuple[str, ...] = ()) -> str:
    """Serialization with variables renamed ``v0, v1, ...``.

    Declared free variables are numbered first, the rest by first occurrence.
    """
    order = list(free_order)
    _occurrence_order(f, order)
    return serialize(rename(f, {n: f"v{i}" for i, n in enumerate(order)}))


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse(text: str) -> Formula:
    tokens = _TOKEN.findall(text)
    pos = 0

    def expr():
        nonlocal pos
        if tokens[pos] != "(":
            raise ValueError(f"expected '(' at token {pos}")
        pos += 1
        head = tokens[pos]
        pos += 1
        if head == "exists":
            assert tokens[pos] == "("
            pos += 1
            names = []
            while tokens[pos] != ")":
                names.append(tokens[pos])
                pos += 1
            pos += 1
            body = expr()
            out = ExistFormula(tuple(names), body)
        elif head in ("and", "or"):
            parts = []
            while tokens[pos] != ")":
                parts.append(expr())
            out = (And if head == "and" else Or)(tuple(parts))
        elif head == "not":
            out = Not(expr())
        elif head == "=":
            out = Eq(tokens[pos], tokens[pos + 1])
            pos += 2
        elif head.startswith("R") and head[1:].isdigit():
            args = []
            while tokens[pos] != ")":
                args.append(tokens[pos])
                pos += 1
            out = Atom(int(head[1:]), tuple(args))
        else:
            raise ValueError(f"unknown head {head!r}")
        if tokens[pos] != ")":
            raise ValueError(f"expected ')' at token {pos}")
        pos += 1
        return out

    f = expr()
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return f
