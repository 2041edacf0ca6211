"""Stage approximations of a Σ₁-defined closure operator.

``cl_t(Y)`` contains ``x`` when ``x < t`` and some formula with index at
most ``t`` in the arity-``|Y|`` family holds of ``(x, Y)`` in the first
``t`` elements, with every existential witness also below ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, count
from typing import Callable, Iterator, Protocol, Sequence

from .presentation import PresentedStructure, eval_exists_bounded


class BudgetExhausted(RuntimeError):
    """A semidecision ran out of steps before reaching an answer."""

    def __init__(self, what: str, used: int):
        super().__init__(f"{what}: budget of {used} steps exhausted")
        self.used = used


class Sigma1Family(Protocol):
    """Enumerated open formulas; ``formula(i)`` has free ``x``, ``y1..yn``, ``d1..``.

    ``arity_of(i)`` is the least ``n`` with ``i ∈ S_n``.  When
    ``prefix_monotone`` holds, ``S_n ⊆ S_{n+1}`` and the members of ``S_n``
    only mention ``y1..yn``.
    """

    params: tuple[int, ...]
    prefix_monotone: bool

    def formula(self, i: int): ...

    def arity_of(self, i: int) -> int: ...


@dataclass
class LeastSpanWitnesses:
    t: int
    elements: tuple[int, ...]


class ClosureApprox:
    """``cl_t`` over a presentation, with a memo of decided triples.

    ``accelerator`` (optional) must give the same answers as formula-by-formula
    evaluation; class modules supply one that works from exact values.  The
    memo is not locked, so an instance belongs to one thread.
    """

    def __init__(self, structure: PresentedStructure, family: Sigma1Family, accelerator=None):
        self.structure = structure
        self.family = family
        self.accelerator = accelerator
        self._memo: dict[tuple, bool] = {}
        self._span_memo: dict[int, list[int]] = {}

    # ------------------------------------------------------------- cl_t

    def member(self, x: int, Y: Sequence[int], t: int) -> bool:
        Y = tuple(Y)
        key = (x, Y, t)
        hit = self._memo.get(key)
        if hit is None:
            if self.accelerator is not None:
                hit = self.accelerator.member(x, Y, t)
            else:
                hit = self.member_generic(x, Y, t)
            if len(self._memo) > 500_000:
                self._memo.clear()
            self._memo[key] = hit
        return hit

    def member_generic(self, x: int, Y: tuple, t: int) -> bool:
        """Formula-by-formula evaluation in ``fragment(t)``; no shortcuts."""
        if t <= 0 or x >= t or any(y >= t for y in Y):
            return False
        params = self.family.params
        if any(d >= t for d in params):
            return False
        F = self.structure.fragment(t)
        asg = {"x": x}
        asg.update({f"y{j + 1}": y for j, y in enumerate(Y)})
        asg.update({f"d{j + 1}": d for j, d in enumerate(params)})
        n = len(Y)
        for i in range(t + 1):
            if self.family.arity_of(i) > n:
                continue
            phi = self.family.formula(i)
            if any(a.rel >= F.nrel for a in phi.atoms()):
                # the fragment records no facts for this symbol yet
                continue
            sub = {v: asg[v] for v in phi.free()}
            if eval_exists_bounded(F, phi, sub, t):
                return True
        return False

    def threshold(self, x: int, Y: Sequence[int], t_max: int) -> int | None:
        """Least ``t ≤ t_max`` with ``x ∈ cl_t(Y)``, by bisection (``cl_t`` grows with ``t``)."""
        Y = tuple(Y)
        if not self.member(x, Y, t_max):
            return None
        lo, hi = -1, t_max
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.member(x, Y, mid):
                hi = mid
            else:
                lo = mid
        return hi

    def is_t_independent(self, X: Sequence[int], t: int) -> bool:
        X = tuple(X)
        sure = getattr(self.accelerator, "surely_independent", None)
        if sure is not None and sure(X):
            return True
        return not any(self.member(x, X[:j] + X[j + 1:], t) for j, x in enumerate(X))

    def independent_prefix(self, X: Sequence[int], t: int) -> int:
        """Length of the longest ``t``-independent prefix of ``X``."""
        n = 0
        while n < len(X) and self.is_t_independent(X[: n + 1], t):
            n += 1
        return n

    # ------------------------------------------------------ least span

    def least_span_witnesses(self, t: int, k: int) -> LeastSpanWitnesses:
        seq = self._span_memo.setdefault(t, [])
        if len(seq) < k + 1 and not (seq and seq[-1] is None):
            start = 0
            if seq and self.family.prefix_monotone:
                # everything below n_{i-1} already lies in the smaller closure
                start = seq[-1] + 1
            while len(seq) < k + 1:
                nxt = next((e for e in range(start, t) if not self.member(e, tuple(seq), t)), None)
                if nxt is None:
                    seq.append(None)
                    break
                seq.append(nxt)
                start = nxt + 1 if self.family.prefix_monotone else 0
        out = [e for e in seq[: k + 1] if e is not None]
        return LeastSpanWitnesses(t, tuple(out))

    def has_least_span_at(self, U: Sequence[int], t: int) -> bool:
        U = tuple(U)
        if not U:
            return True
        ns = self.least_span_witnesses(t, len(U) - 1).elements
        if len(ns) < len(U):
            return False
        for i, n_i in enumerate(ns):
            if not self.member(n_i, U[: i + 1], t):
                return False
            if not self.member(U[i], U[:i] + (n_i,), t):
                return False
        return True

    def clear(self):
        self._memo.clear()
        self._span_memo.clear()


# ------------------------------------------------------- basis <-> closure


def dependence_from_basis(
    basis: Callable[[int], int] | Sequence[int],
    X: Sequence[int],
    closure: ClosureApprox,
    budget: int = 40,
    t_start: int = 1,
) -> bool:
    """Decide whether ``X`` is dependent, given a basis of the structure.

    Dovetails two searches over ``t``: a direct ``cl_t`` dependence among the
    members of ``X``, and a finite ``A ⊆ B`` with ``X ⊆ cl_t(A)`` from which
    ``|X|`` members can be exchanged for ``X`` without losing ``A`` (which
    certifies independence).  ``t`` doubles between rounds, which is enough
    because ``cl_t`` only grows with ``t``.  Raises :class:`BudgetExhausted`
    after ``budget`` rounds.
    """
    X = tuple(X)
    if len(set(X)) < len(X):
        return True
    get = basis if callable(basis) else basis.__getitem__
    n = len(X)
    t = max(1, t_start)
    for _ in range(budget):
        if not closure.is_t_independent(X, t):
            return True
        m = 0
        A: list[int] = []
        while m <= t and not all(closure.member(x, tuple(A), t) for x in X):
            try:
                A.append(get(m))
            except IndexError:
                break
            m += 1
        if all(closure.member(x, tuple(A), t) for x in X):
            for S in combinations(range(len(A)), n):
                rest = tuple(a for j, a in enumerate(A) if j not in S)
                if all(closure.member(A[j], X + rest, t) for j in S):
                    return False
        t *= 2
    raise BudgetExhausted("dependence_from_basis", budget)


def basis_from_closure(decider: Callable[[tuple[int, ...]], bool], start: int = 0) -> Iterator[int]:
    """Greedy basis: each next element is the least one independent of the emitted ones.

    ``decider(X)`` returns True when ``X`` is dependent.
    """
    emitted: list[int] = []
    for e in count(start):
        if not decider(tuple(emitted) + (e,)):
            emitted.append(e)
            yield e
