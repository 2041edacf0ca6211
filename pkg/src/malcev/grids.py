"""Engine-versus-oracle comparison grids on small fragments."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

from .formulas import And, Atom, Eq, ExistFormula, Not, canonical
from .groups import ADD, LT, ZERO_REL
from .oracle import YES, OracleContext, brute_cl, brute_indep_diagram, brute_independent, omega_least_basis
from .pregeometry import BudgetExhausted, ClosureApprox, basis_from_closure, dependence_from_basis
from .presentation import eval_exists_bounded


@dataclass
class Tally:
    agree: int = 0
    disagree: int = 0
    unresolved: int = 0
    extra: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"agree": self.agree, "disagree": self.disagree, "unresolved": self.unresolved}
        out.update(self.extra)
        out["failures"] = self.failures[:10]
        return out


# ---------------------------------------------------------- dependence


def dependence_grid(ctx: OracleContext, closure: ClosureApprox, fragment: int = 12, max_size: int = 4, budget: int = 40) -> Tally:
    """``dependence_from_basis`` fed the oracle basis against the rank test."""
    basis = omega_least_basis(ctx, fragment + max_size + 4)
    out = Tally()
    for k in range(1, max_size + 1):
        for X in combinations(range(fragment), k):
            try:
                got = dependence_from_basis(basis, X, closure, budget)
            except BudgetExhausted:
                out.unresolved += 1
                continue
            if got == (not brute_independent(ctx, X)):
                out.agree += 1
            else:
                out.disagree += 1
                out.failures.append(list(X))
    return out


def basis_prefix_check(ctx: OracleContext, closure: ClosureApprox, k: int = 5, budget: int = 40) -> tuple[list[int], list[int]]:
    basis = omega_least_basis(ctx, 3 * k + 8)
    gen = basis_from_closure(lambda X: dependence_from_basis(basis, X, closure, budget))
    got = [next(gen) for _ in range(k)]
    return got, omega_least_basis(ctx, k)


# ------------------------------------------------------------- closure


def _sample_ts(t_max: int, around: int | None) -> list[int]:
    ts = {0, t_max}
    p = 1
    while p < t_max:
        ts.add(p)
        p *= 2
    if around is not None:
        ts.update(t for t in (around - 1, around, around + 1) if 0 <= t <= t_max)
    return sorted(ts)


def closure_grid(ctx: OracleContext, closure: ClosureApprox, fragment: int = 12, max_y: int = 3, t_max: int = 5000) -> Tally:
    """Every ``(x, Y)`` below ``fragment``: ``cl_t`` reaches the brute answer, monotonically."""
    out = Tally(extra={"t_max_used": 0, "monotonicity_violations": 0})
    for k in range(max_y + 1):
        for Y in combinations(range(fragment), k):
            for x in range(fragment):
                truth = brute_cl(ctx, x, Y)
                thr = closure.threshold(x, Y, t_max) if truth else None
                ts = _sample_ts(t_max, thr)
                vals = [closure.member(x, Y, t) for t in ts]
                if any(a and not b for a, b in zip(vals, vals[1:])):
                    out.extra["monotonicity_violations"] += 1
                    out.failures.append({"x": x, "Y": list(Y), "kind": "monotonicity"})
                if truth and thr is not None:
                    out.agree += 1
                    out.extra["t_max_used"] = max(out.extra["t_max_used"], thr)
                elif not truth and not any(vals):
                    out.agree += 1
                elif truth:
                    out.unresolved += 1
                else:
                    out.disagree += 1
                    out.failures.append({"x": x, "Y": list(Y), "kind": "unsound"})
    return out


# -------------------------------------------------------- certificates


def literals(names: Sequence[str], ordered: bool) -> list:
    rank = {v: i for i, v in enumerate(names)}
    # x + y = z and y + x = z say the same thing; keep one
    pos = [Atom(ADD, t) for t in product(names, repeat=3) if rank[t[0]] <= rank[t[1]]]
    pos += [Atom(ZERO_REL, (v,)) for v in names]
    pos += [Eq(a, b) for a, b in combinations(names, 2)]
    if ordered:
        pos += [Atom(LT, (a, b)) for a, b in product(names, repeat=2)]
    return pos + [Not(p) for p in pos]


def formula_grid(n_params: int, ordered: bool, max_literals: int = 2) -> list[ExistFormula]:
    """Conjunctions of up to ``max_literals`` literals in ``c0.., u0`` and one bound ``y0``."""
    names = [f"c{j}" for j in range(n_params)] + ["u0", "y0"]
    lits = literals(names, ordered)
    seen = set()
    out = []
    for k in range(1, max_literals + 1):
        for combo in combinations(lits, k):
            body = And(tuple(combo))
            bound = ("y0",) if "y0" in body.variables() else ()
            phi = ExistFormula(bound, body)
            key = canonical(phi, tuple(n for n in names if n != "y0"))
            if key not in seen:
                seen.add(key)
                out.append(phi)
    return out


def _holds_somewhere(S, phi, asg, limit: int = 1 << 15) -> bool:
    B = max([16] + [v + 1 for v in asg.values()])
    while B <= limit:
        if eval_exists_bounded(S.fragment(B), phi, asg, B):
            return True
        B *= 2
    return False


DEFAULT_PARAMS = ((), (0,), (1,), (0, 2), (0, 3))


def certificate_grid(
    ctx: OracleContext,
    semidecide,
    fragment: int = 10,
    height: int = 3,
    params: Sequence[Sequence[int]] = DEFAULT_PARAMS,
    max_literals: int = 2,
    budget: int = 64,
) -> Tally:
    """``semidecide(cs, phi, budget)`` against ``brute_indep_diagram``.

    A brute "yes" the semidecider misses is unresolved; a semidecider "yes"
    is contradicted when its own tuple fails the oracle.
    """
    ordered = ctx.kind == "aoag"
    out = Tally(extra={"contradicted": 0, "engine_only_yes": 0, "both_open": 0})
    S = ctx.structure
    grids = {}
    for cs in params:
        phis = grids.setdefault(len(cs), formula_grid(len(cs), ordered, max_literals))
        for phi in phis:
            brute = brute_indep_diagram(ctx, cs, phi, fragment, height)
            res = semidecide(tuple(cs), phi, budget)
            if res:
                us = res.found
                asg = {f"c{j}": c for j, c in enumerate(cs)}
                asg.update({f"u{j}": u for j, u in enumerate(us)})
                asg = {k: v for k, v in asg.items() if k in phi.free()}
                if not brute_independent(ctx, us, cs) or not _holds_somewhere(S, phi, asg):
                    out.extra["contradicted"] += 1
                    out.disagree += 1
                    out.failures.append({"cs": list(cs), "phi": str(phi), "kind": "contradicted"})
                    continue
            if brute == YES and res:
                out.agree += 1
            elif brute == YES:
                out.unresolved += 1
                out.failures.append({"cs": list(cs), "phi": str(phi), "kind": "unresolved"})
            elif res:
                out.extra["engine_only_yes"] += 1
            else:
                out.extra["both_open"] += 1
    return out
