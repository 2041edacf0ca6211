"""Building a copy with a computable basis, one finite stage at a time.

A stage holds a finite injective map ``tau`` from an initial segment of the
naturals (the copy being built) into the presented structure, a list of
designated domain elements ``a_0..a_s`` whose images are meant to be
independent, and a bound ``t``.  Each new stage keeps the images that are
still safe, moves the rest along an embedding ``rho`` of the old fragment
into the new one, and designates one more element.

The class-specific work is delegated to an oracle object with methods

``tuple_independent(U)``
    exact test, used only to skip per-``i`` safeness work when it says yes;
``confirm_safeness(cs, us, t, budget)``
    a semidecision (``SemidecisionResult``) that the safeness formula for
    ``(c̄, ū)`` at bound ``t`` is in the independence diagram; a yes may carry
    ``embedding``, a map of the first ``t`` elements to exact values;
``injury_map(t_old, cs, us, vs, embedding)``
    ``rho`` on the first ``t_old`` elements, fixing ``c̄`` and taking ``ū``
    to an independent tuple indistinguishable from ``v̄``;
``is_embedding(t_old, rho, t_new)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .formulas import ExistFormula
from .pregeometry import BudgetExhausted, ClosureApprox
from .presentation import PresentedStructure, atomic_diagram_formula, pullback

P5_UNCONFIRMED = "P5-unconfirmed"
TAGS = ("P1", "P2", "P3", "P4", "P5", "P6")


@dataclass(frozen=True)
class StageState:
    s: int
    tau: tuple[int, ...]
    designated: tuple[int, ...]
    t: int
    rho: Mapping[int, int] | None = None
    sigma: tuple = ()

    def images(self) -> tuple[int, ...]:
        return tuple(self.tau[a] for a in self.designated)

    def committed(self, structure: PresentedStructure):
        """Atomic diagram of the copy so far, as an explicit fragment."""
        return pullback(structure.fragment(self.t), self.tau)

    def event(self) -> dict:
        return {"event": "stage", "s": self.s, "tau": list(self.tau), "designated": list(self.designated), "t": self.t}


@dataclass
class SafenessFormula:
    """``∃v̄ θ(c̄, v̄, ū)`` with ``θ`` the whole diagram of the first ``t`` elements.

    Kept implicit: the diagram has on the order of ``t³`` literals, so it is
    only written out by :meth:`materialize`.
    """

    i: int
    cs: tuple[int, ...]
    us: tuple[int, ...]
    t: int
    structure: PresentedStructure

    @property
    def vs(self) -> tuple[int, ...]:
        taken = set(self.cs) | set(self.us)
        return tuple(e for e in range(self.t) if e not in taken)

    def materialize(self) -> ExistFormula:
        F = self.structure.fragment(self.t)
        theta = atomic_diagram_formula(F, (self.cs, self.vs, self.us))
        return ExistFormula(tuple(f"v{j}" for j in range(len(self.vs))), theta)

    def assignment(self) -> dict[str, int]:
        asg = {f"c{j}": c for j, c in enumerate(self.cs)}
        asg.update({f"u{j}": u for j, u in enumerate(self.us)})
        return asg

    def conjunct_count(self) -> int:
        F = self.structure.fragment(self.t)
        n = sum(self.t ** F.signature.arity(r) for r in range(F.nrel))
        return n + self.t * (self.t - 1) // 2


@dataclass
class PropertyReport:
    violations: list[str] = field(default_factory=list)
    sigma: tuple = ()
    p5_steps: list[tuple[int, int]] = field(default_factory=list)


def level(closure: ClosureApprox, e: int, U: Sequence[int], t: int) -> int | None:
    """Least ``i`` with ``e ∈ cl_t(u_0..u_i)``; binary search needs a prefix-monotone family."""
    U = tuple(U)
    if not closure.family.prefix_monotone:
        return next((i for i in range(len(U)) if closure.member(e, U[: i + 1], t)), None)
    if not U or not closure.member(e, U, t):
        return None
    lo, hi = 0, len(U) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if closure.member(e, U[: mid + 1], t):
            hi = mid
        else:
            lo = mid + 1
    return lo


def build_safeness_formula(state: StageState, i: int, closure: ClosureApprox) -> SafenessFormula:
    U = state.images()
    if not -1 <= i < state.s:
        raise ValueError("safeness index out of range")
    head = U[: i + 1]
    cs = tuple(sorted(e for e in set(state.tau) if closure.member(e, head, state.t)))
    return SafenessFormula(i, cs, U[i + 1:], state.t, closure.structure)


def _p5(state: StageState, closure: ClosureApprox, oracle, budget: int, report: PropertyReport):
    U = state.images()
    if oracle.tuple_independent(U):
        # c̄_i lies in the true span of u_0..u_i, so ū stays independent over it
        report.sigma = (None,) * state.s
        report.p5_steps = [(i, 1) for i in range(state.s)]
        return True
    levels = {e: level(closure, e, U, state.t) for e in set(state.tau)}
    sigma = []
    for i in range(state.s):
        cs = tuple(sorted(e for e, lv in levels.items() if lv is not None and lv <= i))
        res = oracle.confirm_safeness(cs, U[i + 1:], state.t, budget)
        if not res:
            return False
        sigma.append(getattr(res, "embedding", None))
        report.p5_steps.append((i, res.steps))
    report.sigma = tuple(sigma)
    return True


def _check(prev: StageState | None, nxt: StageState, closure: ClosureApprox, oracle, budget: int) -> PropertyReport:
    report = PropertyReport()
    bad = report.violations
    U = nxt.images()
    t = nxt.t
    if prev is not None and nxt.s != prev.s + 1:
        raise ValueError("states are not consecutive")
    if len(set(nxt.tau)) != len(nxt.tau) or len(U) != nxt.s + 1 or len(set(nxt.designated)) != len(U):
        bad.append("P2")
        return report
    if not closure.is_t_independent(U, t):
        bad.append("P1")
    if (
        t <= nxt.s
        or any(e >= t for e in nxt.tau)
        or not set(range(nxt.s)) <= set(nxt.tau)
        or any(not closure.member(e, U, t) for e in nxt.tau)
    ):
        bad.append("P2")
    if prev is not None:
        old = len(prev.tau)
        if len(nxt.tau) < old or nxt.designated[: prev.s + 1] != prev.designated or t < prev.t:
            bad.append("P3")
        elif nxt.rho is None:
            if nxt.tau[:old] != prev.tau:
                bad.append("P3")
        elif any(nxt.tau[b] != nxt.rho.get(prev.tau[b]) for b in range(old)) or not oracle.is_embedding(prev.t, nxt.rho, t):
            bad.append("P3")
        moved = [b for b in range(min(old, len(nxt.tau))) if prev.tau[b] != nxt.tau[b]]
        if moved:
            pU = prev.images()
            for b in moved:
                lv = level(closure, prev.tau[b], pU, prev.t)
                if lv is not None and closure.is_t_independent(pU[: lv + 1], t):
                    bad.append("P4")
                    break
    if not closure.has_least_span_at(U, t):
        bad.append("P6")
    if not bad and not _p5(nxt, closure, oracle, budget, report):
        bad.append(P5_UNCONFIRMED)
    return report


def check_properties(prev: StageState | None, nxt: StageState, closure: ClosureApprox, oracle, budget: int = 64) -> list[str]:
    """Violated tags among P1..P6; ``P5-unconfirmed`` if the diagram check ran out of budget.

    P5 is only attempted when the other five hold.
    """
    return _check(prev, nxt, closure, oracle, budget).violations


# ----------------------------------------------------------------- search


@dataclass
class SearchSchedule:
    """Knobs for :func:`next_stage`.

    ``lookahead``: a bound ``t`` is only used when the least span of the
    needed length is the same at ``lookahead·t``; 1 disables the check.
    """

    lookahead: int = 2
    p5_budget: int = 64
    max_t_steps: int = 20_000


class _Reject(Exception):
    def __init__(self, jump: int | None = None):
        self.jump = jump


class GoodCopyBuilder:
    def __init__(self, closure: ClosureApprox, oracle, schedule: SearchSchedule | None = None):
        self.closure = closure
        self.oracle = oracle
        self.schedule = schedule or SearchSchedule()
        self.last_injury: dict | None = None
        self.last_report: PropertyReport | None = None

    def _span(self, t: int, k: int) -> tuple[int, ...] | None:
        ns = self.closure.least_span_witnesses(t, k).elements
        if len(ns) < k + 1:
            return None
        la = self.schedule.lookahead
        if la > 1:
            far = self.closure.least_span_witnesses(la * t, k).elements[: k + 1]
            if far != ns:
                j = next((j for j, (a, b) in enumerate(zip(ns, far)) if a != b), len(far))
                jump = None
                th = getattr(self.closure.accelerator, "threshold", None)
                if th is not None and j < len(ns) and far[:j] == ns[:j]:
                    # n_j is still free at t but not at la·t: skip to where it stops being free
                    jump = th(ns[j], ns[:j], la * t)
                raise _Reject(jump)
        return ns

    def initial(self) -> StageState:
        for t in range(1, self.schedule.max_t_steps):
            try:
                ns = self._span(t, 0)
            except _Reject:
                continue
            if ns is None:
                continue
            st = StageState(0, (ns[0],), (0,), t)
            rep = _check(None, st, self.closure, self.oracle, self.schedule.p5_budget)
            if not rep.violations:
                self.last_report = rep
                return st
        raise BudgetExhausted("stage 0", self.schedule.max_t_steps)

    def _candidate(self, state: StageState, t: int) -> StageState:
        s = state.s
        ns = self._span(t, s + 1)
        if ns is None:
            raise _Reject()
        U = state.images()
        keep = self.closure.independent_prefix(U, t)
        tau, rho = state.tau, None
        self.last_injury = None
        if keep < s + 1:
            i = keep - 1
            cl = self.closure
            cs = tuple(sorted(e for e in set(state.tau) if cl.member(e, U[: i + 1], state.t)))
            vs = ns[i + 1: s + 1]
            emb = state.sigma[i] if 0 <= i < len(state.sigma) else None
            if i < 0 or i >= len(state.sigma):
                res = self.oracle.confirm_safeness(cs, U[i + 1:], state.t, self.schedule.p5_budget)
                if not res:
                    raise _Reject()
                emb = getattr(res, "embedding", None)
            rho = self.oracle.injury_map(state.t, cs, U[i + 1:], vs, emb)
            if rho is None:
                raise _Reject()
            top = max(rho.values(), default=0)
            if top >= t:
                raise _Reject(top + 1)
            tau = tuple(rho[e] for e in state.tau)
            self.last_injury = {
                "i": i,
                "moved": [b for b in range(len(tau)) if tau[b] != state.tau[b]],
                "rho": sorted([k, v] for k, v in rho.items() if k != v),
            }
        tau = list(tau)
        new = ns[s + 1]
        if new in tau:
            a_new = tau.index(new)
        else:
            a_new = len(tau)
            tau.append(new)
        for m in range(s + 2):
            if m not in tau:
                tau.append(m)
        if max(tau) >= t:
            raise _Reject(max(tau) + 1)
        return StageState(s + 1, tuple(tau), state.designated + (a_new,), t, rho)

    def next_stage(self, state: StageState) -> StageState:
        t = max(state.t, state.s + 2)
        for _ in range(self.schedule.max_t_steps):
            try:
                cand = self._candidate(state, t)
            except _Reject as r:
                t = max(t + 1, r.jump or 0)
                continue
            rep = _check(state, cand, self.closure, self.oracle, self.schedule.p5_budget)
            if not rep.violations:
                self.last_report = rep
                return StageState(cand.s, cand.tau, cand.designated, cand.t, cand.rho, rep.sigma)
            t += 1
        raise BudgetExhausted(f"stage {state.s + 1}", self.schedule.max_t_steps)


def next_stage(state: StageState, closure: ClosureApprox, oracle, schedule: SearchSchedule | None = None) -> StageState:
    return GoodCopyBuilder(closure, oracle, schedule).next_stage(state)


# -------------------------------------------------------------------- run


@dataclass
class GoodCopyResult:
    status: str
    states: list[StageState]
    trace: list[dict]

    @property
    def final(self) -> StageState:
        return self.states[-1]

    def basis(self) -> tuple[int, ...]:
        return self.final.designated


def run(
    closure: ClosureApprox,
    oracle,
    stages: int,
    schedule: SearchSchedule | None = None,
    config: Mapping | None = None,
    sink: Callable[[dict], None] | None = None,
    resume: Sequence[StageState] = (),
) -> GoodCopyResult:
    """Stages ``0..stages``; stops early and reports ``resumable`` when a search runs dry."""
    b = GoodCopyBuilder(closure, oracle, schedule)
    trace: list[dict] = []

    def emit(ev):
        trace.append(ev)
        if sink is not None:
            sink(ev)

    emit({"event": "config", "schema": 1, **dict(config or {})})
    states = list(resume)
    try:
        if not states:
            states.append(b.initial())
            emit(states[-1].event())
        while states[-1].s < stages:
            st = b.next_stage(states[-1])
            if b.last_injury is not None:
                emit({"event": "injury", "s": st.s, **b.last_injury})
            emit(st.event())
            for i, used in b.last_report.p5_steps:
                emit({"event": "p5_confirmed", "s": st.s, "i": i, "budget_used": used})
            states.append(st)
    except BudgetExhausted as e:
        emit({"event": "resumable", "s": states[-1].s if states else -1, "reason": str(e)})
        return GoodCopyResult("resumable", states, trace)
    emit({"event": "done", "s": states[-1].s})
    return GoodCopyResult("complete", states, trace)


def states_from_trace(events: Iterable[Mapping]) -> list[StageState]:
    out: list[StageState] = []
    rho = None
    for ev in events:
        kind = ev.get("event")
        if kind == "injury":
            rho = {int(k): int(v) for k, v in ev["rho"]}
        elif kind == "stage":
            if rho is not None and out:
                # the trace only lists moved points; rho is the identity elsewhere
                full = {e: e for e in range(out[-1].t)}
                full.update(rho)
                rho = full
            out.append(StageState(ev["s"], tuple(ev["tau"]), tuple(ev["designated"]), ev["t"], rho))
            rho = None
    return out


def verify_trace(events: Iterable[Mapping], closure: ClosureApprox, oracle, budget: int = 64) -> list[tuple[int, list[str]]]:
    """Re-check every recorded stage; returns ``(s, tags)`` for the failures."""
    states = states_from_trace(events)
    bad = []
    prev = None
    for st in states:
        tags = check_properties(prev, st, closure, oracle, budget)
        if tags:
            bad.append((st.s, tags))
        prev = st
    return bad


def stabilization_report(
    events: Iterable[Mapping],
    closure: ClosureApprox | None = None,
    certified: Callable[[Sequence[int]], bool] | None = None,
) -> dict:
    """Last stage each copy element changed image, plus any late moves.

    A move of ``b`` at stage ``s`` is late when ``certified`` (an exact
    independence test on structure elements) accepts the designated prefix
    governing ``b`` at stage ``s-1``: the shortest prefix whose ``cl_t``
    contains the old image.  Needs ``closure`` for the governing prefix.
    """
    states = states_from_trace(list(events))
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    late = []
    moves = 0
    for k, st in enumerate(states):
        for b in range(len(st.tau)):
            first.setdefault(b, st.s)
        if k == 0:
            continue
        prev = states[k - 1]
        for b in range(len(prev.tau)):
            if prev.tau[b] == st.tau[b]:
                continue
            last[b] = st.s
            moves += 1
            if certified is None or closure is None:
                continue
            pU = prev.images()
            lv = level(closure, prev.tau[b], pU, prev.t)
            if lv is not None and certified(pU[: lv + 1]):
                late.append({"element": b, "stage": st.s})
    return {
        "last_change": {b: last.get(b, first[b]) for b in first},
        "first_seen": first,
        "moves": moves,
        "late_moves": late,
    }


def dumps_trace(events: Iterable[Mapping]) -> str:
    return "".join(json.dumps(ev, sort_keys=True, separators=(",", ":")) + "\n" for ev in events)
