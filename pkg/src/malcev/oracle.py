"""Brute-force ground truth computed from exact element values.

Nothing here looks at formula enumerations or stage approximations: closure
and independence are rank computations over Q on the vectors behind a
presentation, and diagram membership is exhaustive search in a fragment.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .formulas import ExistFormula
from .linalg import Echelon
from .presentation import PresentedStructure, eval_exists_bounded

YES = "yes"
NO_AT_BOUND = "no-at-this-bound"


@dataclass(frozen=True)
class OracleContext:
    """Exact view of a presentation; ``kind`` is ``"tfag"`` or ``"aoag"``."""

    structure: PresentedStructure
    kind: str = "tfag"

    def value(self, n: int):
        return self.structure.element(n)

    def values(self, ns: Sequence[int]):
        return [self.structure.element(n) for n in ns]


def brute_independent(ctx: OracleContext, X: Sequence[int], over: Sequence[int] = ()) -> bool:
    e = Echelon(ctx.values(over))
    base = e.rank
    for v in ctx.values(X):
        e.add(v)
    return e.rank == base + len(X)


def brute_cl(ctx: OracleContext, x: int, Y: Sequence[int], bound: int | None = None) -> bool:
    if bound is not None and (x >= bound or any(y >= bound for y in Y)):
        return False
    return Echelon(ctx.values(Y)).contains(ctx.value(x))


def brute_dependent(ctx: OracleContext, X: Sequence[int]) -> bool:
    return not brute_independent(ctx, X)


def omega_least_basis(ctx: OracleContext, k: int, limit: int = 100_000) -> list[int]:
    """The first ``k`` members of the greedy basis along the enumeration."""
    e = Echelon()
    out = []
    for n in range(limit):
        if len(out) >= k:
            break
        if e.add(ctx.value(n)):
            out.append(n)
    return out


def _within_height(v, coeff_bound) -> bool:
    # naive height max(|p|, q) of every coordinate
    return coeff_bound is None or all(max(abs(c.numerator), c.denominator) <= coeff_bound for _, c in v)


def brute_indep_diagram(
    ctx: OracleContext,
    cs: Sequence[int],
    phi: ExistFormula,
    fragment_bound: int,
    coeff_bound: int | None = None,
) -> str:
    """Search tuples ``ū`` below ``fragment_bound`` independent over ``c̄`` satisfying ``phi``.

    ``phi`` has free variables ``c0..`` for the parameters and ``u0..`` for
    the tuple; its witnesses range over the same fragment.
    """
    free = phi.free()
    n = sum(1 for v in free if v.startswith("u"))
    F = ctx.structure.fragment(fragment_bound)
    if any(c >= fragment_bound for c in cs):
        return NO_AT_BOUND
    base = {f"c{j}": c for j, c in enumerate(cs)}
    pool = [e for e in range(fragment_bound) if _within_height(ctx.value(e), coeff_bound)]
    for us in product(pool, repeat=n):
        if len(set(us)) < n:
            continue
        if not brute_independent(ctx, us, cs):
            continue
        asg = dict(base)
        asg.update({f"u{j}": u for j, u in enumerate(us)})
        asg = {k: v for k, v in asg.items() if k in free}
        if eval_exists_bounded(F, phi, asg, fragment_bound):
            return YES
    return NO_AT_BOUND
