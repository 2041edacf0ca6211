"""A copy whose dependence relation defeats every supplied guesser.

The copy ``B`` is grown one element at a time.  Each ``B``-element carries a
current value in the structure, and every atom among the elements built so
far is committed as soon as both ends exist.  Requirement ``R_e`` watches
one guesser; when it calls ``b_0..b_e`` independent, every element whose
value involves the ``e``-th basis coordinate is moved by substituting a
dependent value ``w`` for that coordinate, chosen so that all committed atoms
stay true.  The structure element the old ``b_e`` stood for then gets a
fresh ``B``-element.

Values only change by these substitutions, which are linear, so a tuple
that is dependent at some stage stays dependent forever.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Protocol, Sequence

from .groups import LT, VectorGroup
from .linalg import Echelon, Vec, vadd, vscale, vsub
from .presentation import ExplicitFragment, is_partial_isomorphism
from .tfag import WitnessError, vec_to_json

INDEPENDENT = "independent"
DEPENDENT = "dependent"


class DependenceGuesser(Protocol):
    name: str

    def query(self, tup: tuple[int, ...], budget: int, view: "BView") -> str | None: ...


@dataclass
class BView:
    """What a guesser may look at: the copy built so far."""

    size: int
    _values: Sequence[Vec]
    _oracle_access: bool = False

    def exact_values(self) -> Sequence[Vec]:
        if not self._oracle_access:
            raise PermissionError("exact values are only for the oracle guesser")
        return self._values


class InvalidWitnessError(RuntimeError):
    """The witness oracle proposed a value outside the span it was asked for."""

    def __init__(self, record: dict):
        super().__init__(f"invalid witness for requirement {record.get('e')}")
        self.record = record


class PluginError(ValueError):
    pass


# ----------------------------------------------------------------- guessers


@dataclass
class EagerGuesser:
    name: str = "eager"

    def query(self, tup, budget, view):
        return INDEPENDENT


@dataclass
class ThresholdGuesser:
    threshold: int
    name: str = "threshold"

    def query(self, tup, budget, view):
        return INDEPENDENT if budget >= self.threshold else None


@dataclass
class OracleGuesser:
    """Answers only what can never change: dependence of the current values."""

    name: str = "oracle"
    wants_oracle = True

    def query(self, tup, budget, view):
        vals = view.exact_values()
        if Echelon(vals[b] for b in tup).rank < len(tup):
            return DEPENDENT
        return None


@dataclass
class RandomGuesser:
    seed: int
    rate: float = 0.05
    name: str = "random"

    def query(self, tup, budget, view):
        rng = random.Random(f"{self.seed}:{tup}:{budget}")
        x = rng.random()
        if x < self.rate:
            return INDEPENDENT
        if x < 2 * self.rate:
            return DEPENDENT
        return None


@dataclass
class BrokenGuesser:
    """Misbehaves on purpose: raises, or returns nonsense."""

    name: str = "broken"

    def query(self, tup, budget, view):
        if budget % 3 == 0:
            raise RuntimeError("broken plugin")
        if budget % 3 == 1:
            return "maybe"
        return 42


def guesser_suite(seed: int = 7, threshold: int = 25) -> list:
    return [EagerGuesser(), ThresholdGuesser(threshold), OracleGuesser(), RandomGuesser(seed), BrokenGuesser()]


def guesser_from_json(d: Mapping):
    kind = d["kind"]
    if kind == "eager":
        return EagerGuesser()
    if kind == "threshold":
        return ThresholdGuesser(int(d.get("t", 25)))
    if kind == "oracle":
        return OracleGuesser()
    if kind == "random":
        return RandomGuesser(int(d.get("seed", 0)), float(d.get("rate", 0.05)))
    if kind == "broken":
        return BrokenGuesser()
    if kind == "plugin":
        return load_plugin(d.get("path", ""))
    raise PluginError(f"unknown guesser kind {kind!r}")


def load_plugin(path: str):
    """``module:attribute``; the attribute is a guesser or a zero-argument factory."""
    import importlib

    mod, _, attr = path.partition(":")
    try:
        obj = getattr(importlib.import_module(mod), attr)
    except (ImportError, AttributeError, ValueError) as exc:
        raise PluginError(f"cannot load guesser plugin {path!r}: {exc}") from exc
    if isinstance(obj, type) or (callable(obj) and not hasattr(obj, "query")):
        obj = obj()
    if not callable(getattr(obj, "query", None)) or not isinstance(getattr(obj, "name", None), str):
        raise PluginError(f"{path!r} is not a guesser (needs name and query)")
    return obj


# ------------------------------------------------------------- class hooks


class GroupConditionB:
    """Witness candidates for a vector group with basis ``e_0, e_1, …`` (indices ``2i``)."""

    def __init__(self, structure: VectorGroup, scan_limit: int = 200_000):
        self.structure = structure
        self.scan_limit = scan_limit

    def basis_index(self, i: int) -> int:
        return 2 * i

    def coordinate(self, v: Vec, i: int):
        return dict(v).get(i, 0)

    def candidates(self, e: int, anchors: Sequence[Vec], old: Vec) -> Iterator[Vec]:
        """Least-coded elements of the span of ``anchors``."""
        span = Echelon(anchors)
        for n in range(self.scan_limit):
            v = self.structure.element(n)
            if v != old and span.contains(v):
                yield v

    def less(self):
        return None


class LogConditionB(GroupConditionB):
    """Ordered case: candidates must sit very close to the old value."""

    def candidates(self, e, anchors, old):
        from decimal import Decimal

        from .aoag import _positive_below, density_witness

        spec = self.structure.spec
        delta = Decimal(1)
        for _ in range(60):
            eps = _positive_below(anchors, delta, spec)
            yield density_witness(anchors, vsub(old, eps), vadd(old, eps), spec).element
            delta /= 8

    def less(self):
        return self.structure.less


# ---------------------------------------------------------------- the copy


@dataclass
class Requirement:
    e: int
    guesser: object
    status: str = "waiting"
    witness: int | None = None
    answered: tuple[int, ...] | None = None
    answer: str | None = None


@dataclass
class BadCopyState:
    values: list[Vec] = field(default_factory=list)
    index: dict[Vec, int] = field(default_factory=dict)
    covered: int = 0
    requirements: list[Requirement] = field(default_factory=list)
    changes: dict[int, list[int]] = field(default_factory=dict)


@dataclass
class BadCopyResult:
    state: BadCopyState
    log: list[dict]
    structure: VectorGroup

    def fragment(self) -> ExplicitFragment:
        return copy_fragment(self.state, self.structure)

    def image_map(self, bound: int | None = None) -> dict[int, int]:
        """``B``-element -> structure index, for elements landing below ``bound``."""
        out = {}
        if bound is not None:
            # invert the first `bound` elements; index_of on big values is slow
            low = {self.structure.element(n): n for n in range(bound)}
            return {b: low[v] for b, v in enumerate(self.state.values) if v in low}
        for b, v in enumerate(self.state.values):
            try:
                n = self.structure.index_of(v)
            except OverflowError:
                continue
            if bound is None or n < bound:
                out[b] = n
        return out


def copy_fragment(state: BadCopyState, structure) -> ExplicitFragment:
    vals = state.values
    facts = set()
    for x, vx in enumerate(vals):
        if not vx:
            facts.add((1, (x,)))
        for y, vy in enumerate(vals):
            z = state.index.get(vadd(vx, vy))
            if z is not None:
                facts.add((0, (x, y, z)))
    less = getattr(structure, "less", None)
    if len(structure.signature) > LT and less is not None:
        for x, vx in enumerate(vals):
            for y, vy in enumerate(vals):
                if less(vx, vy):
                    facts.add((LT, (x, y)))
    return ExplicitFragment(structure.signature, len(vals), facts, len(structure.signature))


def _substitute(values: Sequence[Vec], e: int, w: Vec, hook) -> dict[int, Vec]:
    out = {}
    for b, v in enumerate(values):
        k = hook.coordinate(v, e)
        if k:
            out[b] = vadd(v, vscale(vsub(w, _basis_value(hook, e)), k))
    return out


def _basis_value(hook, e) -> Vec:
    return hook.structure.element(hook.basis_index(e))


def keeps_diagram(values: Sequence[Vec], moved: Mapping[int, Vec], less=None) -> bool:
    """Replacing ``values`` by ``moved`` on its keys preserves every atom and non-atom."""
    new = list(values)
    for b, v in moved.items():
        new[b] = v
    old_index = {v: b for b, v in enumerate(values)}
    new_index = {}
    for b, v in enumerate(new):
        if v in new_index:
            return False
        new_index[v] = b
    for b in moved:
        if (not values[b]) != (not new[b]):
            return False
    n = len(values)
    hot = set(moved)
    for x in range(n):
        for y in range(x, n):
            before = old_index.get(vadd(values[x], values[y]))
            if x not in hot and y not in hot and before is not None and before not in hot:
                # both summands and their sum are untouched
                continue
            if new_index.get(vadd(new[x], new[y])) != before:
                return False
    if less is not None:
        for b in hot:
            for y in range(n):
                if less(values[b], values[y]) != less(new[b], new[y]):
                    return False
    return True


class BadCopyBuilder:
    def __init__(self, structure, hook, guessers: Sequence, anchors: int = 1, sink: Callable[[dict], None] | None = None):
        self.P = structure
        self.hook = hook
        self.anchors = anchors
        self.state = BadCopyState()
        self.state.requirements = [Requirement(anchors + j, g) for j, g in enumerate(guessers)]
        self.log: list[dict] = []
        self.sink = sink
        self._cache: dict[tuple, str] = {}

    def emit(self, ev):
        self.log.append(ev)
        if self.sink is not None:
            self.sink(ev)

    # -- growing ------------------------------------------------------------

    def _new_element(self, v: Vec) -> int:
        st = self.state
        b = len(st.values)
        st.values.append(v)
        st.index[v] = b
        st.changes[b] = []
        return b

    def cover(self, n: int):
        """Make sure structure element ``n`` has a ``B``-element."""
        v = self.P.element(n)
        if v not in self.state.index:
            self._new_element(v)

    def special(self, i: int) -> int | None:
        return self.state.index.get(self.P.element(self.hook.basis_index(i)))

    # -- requirements -------------------------------------------------------

    def _ask(self, req: Requirement, tup, budget) -> str | None:
        key = (req.e, tup)
        if key in self._cache:
            return self._cache[key]
        view = BView(len(self.state.values), self.state.values, getattr(req.guesser, "wants_oracle", False))
        try:
            ans = req.guesser.query(tup, budget, view)
        except Exception as exc:
            self.emit({"event": "guesser_error", "e": req.e, "error": type(exc).__name__})
            return None
        if ans not in (INDEPENDENT, DEPENDENT):
            if ans is not None:
                self.emit({"event": "guesser_error", "e": req.e, "error": "bad answer"})
            return None
        self._cache[key] = ans
        return ans

    def act(self, req: Requirement, stage: int):
        if req.status != "waiting":
            raise ValueError(f"requirement {req.e} has already acted")
        e = req.e
        st = self.state
        c = [self.special(i) for i in range(e)]
        old_b = self.special(e)
        anchors = [st.values[b] for b in c]
        old = st.values[old_b]
        less = self.hook.less()
        span = Echelon(anchors)
        for w in self.hook.candidates(e, anchors, old):
            if not span.contains(w):
                raise InvalidWitnessError(
                    {"e": e, "stage": stage, "anchors": [vec_to_json(a) for a in anchors], "candidate": vec_to_json(w)}
                )
            if w in st.index:
                continue
            moved = _substitute(st.values, e, w, self.hook)
            if keeps_diagram(st.values, moved, less):
                break
        else:
            raise WitnessError(f"no valid dependent value for requirement {e}")
        for b, v in moved.items():
            del st.index[st.values[b]]
        for b, v in moved.items():
            st.values[b] = v
            st.index[v] = b
            st.changes[b].append(stage)
        # the structure elements left without a B-element get fresh ones
        for n in range(st.covered):
            self.cover(n)
        new_b = self.special(e)
        req.status = "acted"
        req.witness = old_b
        self.emit(
            {
                "event": "act",
                "s": stage,
                "e": e,
                "old_witness": old_b,
                "new_dependent_value": vec_to_json(w),
                "new_image_of_a_e": new_b,
                "moved": sorted(moved),
            }
        )

    def stage(self, s: int):
        st = self.state
        self.cover(s)
        st.covered = s + 1
        for req in st.requirements:
            if req.status != "waiting":
                continue
            tup = [self.special(i) for i in range(req.e + 1)]
            if any(b is None for b in tup):
                continue
            tup = tuple(tup)
            ans = self._ask(req, tup, s)
            if ans == INDEPENDENT:
                req.answered, req.answer = tup, ans
                self.act(req, s)
            elif ans == DEPENDENT:
                req.answered, req.answer = tup, ans
                req.status = "permanently-satisfied"
                self.emit({"event": "satisfied", "s": s, "e": req.e, "tuple": list(tup)})

    def run(self, stages: int) -> BadCopyResult:
        self.emit({"event": "config", "schema": 1, "stages": stages, "anchors": self.anchors,
                   "guessers": [r.guesser.name for r in self.state.requirements]})
        for s in range(stages):
            self.stage(s)
        self.emit({"event": "done", "size": len(self.state.values)})
        return BadCopyResult(self.state, self.log, self.P)


def run(structure, hook, guessers: Sequence, stages: int, anchors: int = 1, sink=None) -> BadCopyResult:
    return BadCopyBuilder(structure, hook, guessers, anchors, sink).run(stages)


def verify_defeated(result: BadCopyResult, e: int) -> bool:
    """Guesser ``e`` called a tuple independent that is dependent at the end."""
    req = next((r for r in result.state.requirements if r.e == e), None)
    if req is None or req.answer != INDEPENDENT or req.answered is None:
        return False
    vals = result.state.values
    return Echelon(vals[b] for b in req.answered).rank < len(req.answered)


def wrongly_dependent(result: BadCopyResult, e: int) -> bool:
    """Guesser ``e`` called a tuple dependent that is independent at the end."""
    req = next((r for r in result.state.requirements if r.e == e), None)
    if req is None or req.answer != DEPENDENT:
        return False
    vals = result.state.values
    return Echelon(vals[b] for b in req.answered).rank == len(req.answered)


def pullback_check(result: BadCopyResult, bound: int = 40) -> bool:
    """The copy's diagram matches the structure through the value map."""
    m = result.image_map(bound)
    sub = sorted(m)
    F = result.fragment()
    relabel = {b: j for j, b in enumerate(sub)}
    facts = set()
    for rel, args in F.facts:
        if all(a in relabel for a in args):
            facts.add((rel, tuple(relabel[a] for a in args)))
    G = ExplicitFragment(F.signature, len(sub), facts, F.nrel)
    return is_partial_isomorphism(G, result.structure.fragment(bound), {relabel[b]: m[b] for b in sub})


def dumps_log(events: Iterable[Mapping]) -> str:
    return "".join(json.dumps(ev, sort_keys=True, separators=(",", ":")) + "\n" for ev in events)
