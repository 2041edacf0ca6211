"""Archimedean ordered groups realized as Z-spans of logarithms of primes.

An element is an integer exponent vector ``a``; it denotes
``Σ a_i ln p_i = ln Π p_i^{a_i}``.  Unique factorization makes the value
zero only for the zero vector, and ``x < y`` reduces to comparing two
positive integers.  Real approximations (``decimal``) only steer searches;
every answer is confirmed by an exact comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache
from itertools import count
from math import isqrt
from typing import Mapping, Sequence

from .formulas import ExistFormula, Not
from .groups import ADD, FREE, LT, ORDERED_SIGNATURE, VectorGroup, eval_on_values, witness_in_structure
from .linalg import Echelon, Vec, combo, vadd, vneg, vscale, vsub
from .presentation import PreconditionError, find_witness
from .pregeometry import ClosureApprox
from .tfag import (
    NOT_YET,
    YES,
    Collapse,
    MalformedCertificate,
    PartialSubgroupCertificate,
    SemidecisionResult,
    WitnessError,
    _candidates,
    _chain_first,
    _literal_difference,
    _triangular_complement,
    build_scramble,
    certificate_from_values,
    decompose_pure,
    formal_reps,
    true_literals,
    vec_from_json,
    vec_to_json,
)
from .zdep import ZDependenceAccelerator, ZDependenceFamily

_PRIMES = [2, 3]


def nth_prime(i: int) -> int:
    while len(_PRIMES) <= i:
        n = _PRIMES[-1] + 2
        while any(n % p == 0 for p in _PRIMES if p <= isqrt(n)):
            n += 2
        _PRIMES.append(n)
    return _PRIMES[i]


@lru_cache(maxsize=None)
def _listed_prime(primes: tuple[int, ...], i: int) -> int:
    # past the listed block, the unused primes in increasing order
    used = set(primes)
    k = i - len(primes)
    for j in count():
        p = nth_prime(j)
        if p not in used:
            if k == 0:
                return p
            k -= 1


@dataclass(frozen=True)
class LogGroupSpec:
    """Generator ``i`` is ``ln`` of the ``i``-th listed prime.

    ``primes`` lists an initial block explicitly; past it the primes not yet
    used continue in increasing order.  Empty means 2, 3, 5, ...
    """

    primes: tuple[int, ...] = ()

    def __post_init__(self):
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("primes must be distinct")
        for p in self.primes:
            if p < 2 or any(p % q == 0 for q in range(2, isqrt(p) + 1)):
                raise ValueError(f"{p} is not a prime")

    def prime(self, i: int) -> int:
        if not self.primes:
            return nth_prime(i)
        if i < len(self.primes):
            return self.primes[i]
        return _listed_prime(self.primes, i)

    def to_json(self) -> dict:
        return {"schema": 1, "class": "aoag", "primes": list(self.primes)}

    @classmethod
    def from_json(cls, doc: Mapping) -> "LogGroupSpec":
        if doc.get("schema", 1) != 1:
            raise ValueError("unsupported LogGroupSpec schema")
        if "first" in doc:
            return cls(tuple(nth_prime(i) for i in range(int(doc["first"]))))
        return cls(tuple(int(p) for p in doc.get("primes", ())))


DEFAULT_SPEC = LogGroupSpec()


def ratio(x: Vec, spec: LogGroupSpec = DEFAULT_SPEC) -> tuple[int, int]:
    """``(num, den)`` with ``x = ln(num/den)``."""
    num = den = 1
    for i, a in x:
        if a.denominator != 1:
            raise PreconditionError("log-group elements have integer exponents")
        p = spec.prime(i)
        if a > 0:
            num *= p ** int(a)
        else:
            den *= p ** int(-a)
    return num, den


@lru_cache(maxsize=4096)
def _ln_prime(p: int, prec: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = prec
        return Decimal(p).ln()


def sign(x: Vec, spec: LogGroupSpec = DEFAULT_SPEC) -> int:
    if any(getattr(a, "denominator", 1) != 1 for _, a in x):
        raise PreconditionError("log-group elements have integer exponents")
    if sum(abs(int(a)) for _, a in x) <= 64:
        num, den = ratio(x, spec)
        return (num > den) - (num < den)
    # a 60-digit estimate settles almost every case; exact integers otherwise
    with localcontext() as ctx:
        ctx.prec = 70
        v = sum((Decimal(int(a)) * _ln_prime(spec.prime(i), 60) for i, a in x), Decimal(0))
        err = sum((abs(Decimal(int(a))) * (_ln_prime(spec.prime(i), 60) + 1) for i, a in x), Decimal(0))
        err *= Decimal(10) ** -55
        if abs(v) > err:
            return 1 if v > 0 else -1
    num, den = ratio(x, spec)
    return (num > den) - (num < den)


def compare(x: Vec, y: Vec, spec: LogGroupSpec = DEFAULT_SPEC) -> int:
    """-1, 0, 1 as ``x <, =, > y``."""
    return sign(vsub(x, y), spec)


def less(spec: LogGroupSpec = DEFAULT_SPEC):
    return lambda a, b: compare(a, b, spec) < 0


def approx(x: Vec, prec: int = 40, spec: LogGroupSpec = DEFAULT_SPEC) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = prec
        return sum((Decimal(int(a)) * Decimal(spec.prime(i)).ln() for i, a in x), Decimal(0))


def archimedean_multiple(x: Vec, y: Vec, spec: LogGroupSpec = DEFAULT_SPEC, limit: int = 10**6) -> int:
    """Least ``m ≥ 1`` with ``m·|x| > |y|``."""
    ax = x if sign(x, spec) >= 0 else vneg(x)
    ay = y if sign(y, spec) >= 0 else vneg(y)
    if not ax:
        raise PreconditionError("x must be nonzero")
    for m in range(1, limit):
        if compare(vscale(ax, m), ay, spec) > 0:
            return m
    raise WitnessError("no multiple found below the limit")


# ---------------------------------------------------------- presentations


class LogGroup(VectorGroup):
    """The free abelian group on ``ln p_i`` with its real order."""

    signature = ORDERED_SIGNATURE

    def __init__(self, spec: LogGroupSpec = DEFAULT_SPEC, perm=None):
        super().__init__(FREE, perm)
        self.spec = spec
        self._floats: dict[int, tuple[float, float]] = {}

    def less(self, a: Vec, b: Vec) -> bool:
        return compare(a, b, self.spec) < 0

    def _float(self, n: int) -> tuple[float, float]:
        """Value of element ``n`` as a float, with a generous error bound."""
        hit = self._floats.get(n)
        if hit is None:
            terms = [(float(a), math.log(self.spec.prime(i))) for i, a in self.element(n)]
            val = sum(a * lp for a, lp in terms)
            err = 1e-12 * sum(abs(a) * (lp + 1) for a, lp in terms)
            hit = self._floats[n] = (val, err)
        return hit

    def _less_at(self, x: int, y: int) -> bool:
        (vx, ex), (vy, ey) = self._float(x), self._float(y)
        if abs(vx - vy) > ex + ey:
            return vx < vy
        return self.less(self.element(x), self.element(y))

    def holds(self, rel, args):
        if rel == LT:
            return self._less_at(args[0], args[1])
        return super().holds(rel, args)

    def solve(self, rel, args, bound):
        if rel == LT:
            x, y = args
            if x is not None and y is not None:
                return [0] if self.holds(LT, (x, y)) else []
            if x is not None:
                return [e for e in range(bound) if self._less_at(x, e)]
            if y is not None:
                return [e for e in range(bound) if self._less_at(e, y)]
            return [e for e in range(bound)]
        return super().solve(rel, args, bound)

    def solve_repeated(self, rel, args, bound):
        if rel == LT:
            # irreflexive: x < x never holds
            return []
        return super().solve_repeated(rel, args, bound)


def standard_presentation(spec: LogGroupSpec = DEFAULT_SPEC) -> LogGroup:
    return LogGroup(spec)


def scrambled_presentation(spec: LogGroupSpec, schedule: Sequence[Collapse]) -> LogGroup:
    G = LogGroup(spec, build_scramble(FREE, schedule))
    G.schedule = tuple(schedule)
    return G


def order_consistent(F) -> bool:
    """The ``lt`` facts of a fragment form a strict total order that ``add`` respects."""
    n = F.size
    lt = {(a, b) for a in range(n) for b in range(n) if F.holds(LT, (a, b))}
    for a in range(n):
        if (a, a) in lt:
            return False
        for b in range(a + 1, n):
            if ((a, b) in lt) == ((b, a) in lt):
                return False
    for a, b in lt:
        for c in range(n):
            if (b, c) in lt and (a, c) not in lt:
                return False
    sums = {}
    for x in range(n):
        for y in range(n):
            for z in F.solve(ADD, (x, y, None)):
                sums[(x, y)] = z
    for (x, z), xz in sums.items():
        for y in range(n):
            yz = sums.get((y, z))
            if yz is not None and ((x, y) in lt) != ((xz, yz) in lt):
                return False
    return True


def sigma1_family() -> ZDependenceFamily:
    return ZDependenceFamily()


def closure_approx(structure: LogGroup, accelerate: bool = True) -> ClosureApprox:
    acc = ZDependenceAccelerator(structure) if accelerate else None
    return ClosureApprox(structure, sigma1_family(), acc)


# --------------------------------------------------------------- density


@dataclass(frozen=True)
class DensityWitness:
    element: Vec
    s: int
    t: int

    @property
    def bound(self) -> int:
        return max(abs(self.s), abs(self.t))


def _two_independent(gens: Sequence[Vec]) -> tuple[Vec, Vec]:
    e = Echelon()
    picked = []
    for g in gens:
        if e.add(g):
            picked.append(g)
            if len(picked) == 2:
                return picked[0], picked[1]
    raise PreconditionError("generators must contain two independent elements")


def _small_positive(c1: Vec, c2: Vec, below: Decimal, prec: int, spec) -> tuple[int, int] | None:
    """``(s, t)`` with ``0 < s·c1 + t·c2`` and (approximately) ``< below``.

    Convergents ``p/q`` of ``|c1|/|c2|`` make ``q·|c1| - p·|c2|`` shrink
    geometrically; signs are folded back into ``s``, ``t`` at the end.
    """
    a, b = approx(c1, prec, spec), approx(c2, prec, spec)
    sa, sb = (1 if a > 0 else -1), (1 if b > 0 else -1)
    a, b = abs(a), abs(b)
    with localcontext() as ctx:
        ctx.prec = prec
        x = a / b
        h0, h1, k0, k1 = 0, 1, 1, 0
        for _ in range(4 * prec):
            q = int(x)
            h0, h1 = h1, q * h1 + h0
            k0, k1 = k1, q * k1 + k0
            # h1/k1 ≈ a/b, so k1·a - h1·b is small
            d = k1 * a - h1 * b
            if d != 0 and abs(d) < below:
                s, t = (k1, -h1) if d > 0 else (-k1, h1)
                return s * sa, t * sb
            frac = x - q
            if frac <= Decimal(10) ** (-(prec - 5)):
                return None
            x = 1 / frac
    return None


def density_witness(
    gens: Sequence[Vec],
    lo: Vec,
    hi: Vec,
    spec: LogGroupSpec = DEFAULT_SPEC,
    brute_bound: int = 60,
) -> DensityWitness:
    """``s·c1 + t·c2`` strictly between ``lo`` and ``hi``.

    ``c1, c2`` are the first two independent generators.  A small positive
    ``ε`` comes from continued fractions, then ``n·ε`` is stepped past
    ``lo``; precision doubles on any failed exact check, and a bounded
    brute-force scan is the last resort.
    """
    if compare(lo, hi, spec) >= 0:
        raise PreconditionError("need lo < hi")
    c1, c2 = _two_independent(gens)
    if sign(lo, spec) < 0 < sign(hi, spec):
        return DensityWitness((), 0, 0)
    prec = 30
    while prec <= 480:
        with localcontext() as ctx:
            ctx.prec = prec
            L, H = approx(lo, prec, spec), approx(hi, prec, spec)
            st = _small_positive(c1, c2, H - L, prec, spec)
            if st is not None:
                s0, t0 = st
                eps = vadd(vscale(c1, s0), vscale(c2, t0))
                if sign(eps, spec) > 0:
                    e = approx(eps, prec, spec)
                    n = int((L / e).to_integral_value(rounding="ROUND_FLOOR"))
                    for m in (n, n + 1, n + 2, n - 1):
                        cand = vscale(eps, m)
                        if compare(lo, cand, spec) < 0 < compare(hi, cand, spec):
                            return DensityWitness(cand, s0 * m, t0 * m)
        prec *= 2
    for B in range(1, brute_bound + 1):
        for s in range(-B, B + 1):
            for t in (-B, B) if abs(s) < B else range(-B, B + 1):
                cand = vadd(vscale(c1, s), vscale(c2, t))
                if compare(lo, cand, spec) < 0 < compare(hi, cand, spec):
                    return DensityWitness(cand, s, t)
    raise WitnessError("no combination found in the interval")


def _positive_below(gens, delta: Decimal, spec, prec: int = 60) -> Vec:
    """A positive element of ``span(gens)`` with value below ``delta``."""
    c1, c2 = _two_independent(gens)
    while prec <= 960:
        st = _small_positive(c1, c2, delta, prec, spec)
        if st is not None:
            eps = vadd(vscale(c1, st[0]), vscale(c2, st[1]))
            if sign(eps, spec) > 0 and approx(eps, prec, spec) < delta:
                return eps
        prec *= 2
    raise WitnessError("could not find a small positive element")


# ---------------------------------------------------- Condition B witness


def _sign_constraints(clause, env, gs, hs, spec):
    """Formal reps of every difference whose sign the clause depends on."""
    out = []
    for lit in clause:
        body = lit.body if isinstance(lit, Not) else lit
        if getattr(body, "rel", None) == LT:
            a, b = (env[n] for n in body.args)
            d = vsub(b, a)
        elif isinstance(lit, Not):
            d = _literal_difference(lit, env)
        else:
            continue
        if d:
            out.append((formal_reps([d], gs, hs)[0], sign(d, spec)))
    return out


def _perturb(gs, hs, constraints, targets, spec, delta: Decimal):
    """Replacements for ``hs`` within ``delta`` of the originals, from ``targets[j]`` spans."""
    new = []
    for j, h in enumerate(hs):
        eps = _positive_below(targets[j], delta, spec)
        lo, hi = vsub(h, eps), vadd(h, eps)
        new.append(targets_pick(targets[j], lo, hi, spec, j))
    return new


def targets_pick(gens, lo, hi, spec, j):
    return density_witness(gens, lo, hi, spec).element


def _margin(constraints, gs, hs, spec, prec=60) -> Decimal:
    """Half the least |value| over the constraints, divided by their coefficient mass."""
    ng = len(gs)
    best = None
    for rep, _ in constraints:
        val = abs(approx(vadd(combo(rep[:ng], gs), combo(rep[ng:], hs)), prec, spec))
        mass = sum(abs(r) for r in rep[ng:]) + 1
        m = val / (2 * mass)
        best = m if best is None or m < best else best
    return best if best is not None else Decimal(1)


def dependent_witness(
    cs: Sequence[Vec],
    a: Vec,
    psi: ExistFormula,
    witness: Mapping[str, Vec] | None = None,
    structure: LogGroup | None = None,
    spec: LogGroupSpec | None = None,
    search_budget: int = 1 << 12,
) -> tuple[Vec, dict[str, Vec]]:
    """``b ∈ cl(c̄)`` with ``∃ȳ ψ(c̄, ȳ, b)``; ``psi`` uses ``c0, …`` and ``x``.

    The complement of the pure closure ``C`` of ``c̄`` inside ``⟨c̄, a, ȳ⟩`` is
    replaced generator by generator with elements of ``C`` close enough that
    every order and inequation literal keeps its sign.
    """
    spec = spec or (structure.spec if structure is not None else DEFAULT_SPEC)
    cs = list(cs)
    if Echelon(cs).rank < 2:
        raise PreconditionError("c̄ needs two independent elements")
    env = {f"c{j}": c for j, c in enumerate(cs)}
    env["x"] = a
    if witness is None and not psi.bound:
        witness = {}
    if witness is None:
        if structure is None:
            raise PreconditionError("need a witness or a structure to search")
        asg = {k: structure.index_of(v) for k, v in env.items() if k in psi.free()}
        found = witness_in_structure(structure, psi, asg, search_budget)
        if found is None:
            raise WitnessError("no witness for ψ(c̄, a) within the search budget")
        witness = {k: structure.element(v) for k, v in found.items()}
    env.update(witness)
    lt = less(spec)
    clause = true_literals(psi.matrix, env, lt)
    if clause is None:
        raise PreconditionError("ψ(c̄, a) is false under the given witness")
    names = list(env)
    gs, hs = decompose_pure([env[n] for n in names], cs)
    reps = dict(zip(names, formal_reps([env[n] for n in names], gs, hs)))
    cons = _sign_constraints(clause, env, gs, hs, spec)
    delta = _margin(cons, gs, hs, spec)
    ng = len(gs)
    for _ in range(12):
        new = _perturb(gs, hs, cons, [gs] * len(hs), spec, delta)
        out = {n: vadd(combo(reps[n][:ng], gs), combo(reps[n][ng:], new)) for n in names}
        check = dict(env)
        check.update({n: v for n, v in out.items() if not n.startswith("c")})
        if eval_on_values(psi.matrix, check, lt) and Echelon(cs).contains(check["x"]):
            b = check.pop("x")
            return b, {n: v for n, v in check.items() if not n.startswith("c")}
        delta /= 4
    raise WitnessError("constructed element failed its own post-check")


# ---------------------------------------------------- Condition G witness


def local_indist_witness(
    cs: Sequence[Vec],
    us: Sequence[Vec],
    vs: Sequence[Vec],
    phi: ExistFormula,
    witness: Mapping[str, Vec] | None = None,
    structure: LogGroup | None = None,
    spec: LogGroupSpec | None = None,
    search_budget: int = 1 << 12,
) -> tuple[list[Vec], dict[str, Vec]]:
    """``w̄`` with ``φ(c̄, w̄)``, ``w_i ∈ cl(c̄, v_0..v_i)`` and independent over ``c̄``.

    The complement generators of ``⟨c̄, ū, ȳ⟩`` are rebased to be triangular
    against ``ū``; the ``i``-th goes to some ``s·c + t·v_i`` with ``t ≠ 0``
    close to its old value, the extra ones to elements of ``span(c, v_0)``.
    """
    spec = spec or (structure.spec if structure is not None else DEFAULT_SPEC)
    cs, us, vs = list(cs), list(us), list(vs)
    if us == vs:
        return list(us), dict(witness or {})
    if len(us) != len(vs):
        raise PreconditionError("ū and v̄ must have the same length")
    if Echelon(cs).rank < 1:
        raise PreconditionError("c̄ must have dimension at least 1")
    rc = Echelon(cs).rank
    if Echelon(cs + us).rank != rc + len(us) or Echelon(cs + vs).rank != rc + len(vs):
        raise PreconditionError("ū and v̄ must be independent over c̄")
    env = {f"c{j}": c for j, c in enumerate(cs)}
    env.update({f"u{j}": u for j, u in enumerate(us)})
    if witness is None and not phi.bound:
        witness = {}
    if witness is None:
        if structure is None:
            raise PreconditionError("need a witness or a structure to search")
        asg = {k: structure.index_of(v) for k, v in env.items() if k in phi.free()}
        found = witness_in_structure(structure, phi, asg, search_budget)
        if found is None:
            raise WitnessError("no witness for φ(c̄, ū) within the search budget")
        witness = {k: structure.element(v) for k, v in found.items()}
    env.update(witness)
    lt = less(spec)
    clause = true_literals(phi.matrix, env, lt)
    if clause is None:
        raise PreconditionError("φ(c̄, ū) is false under the given witness")
    names = list(env)
    gs, hs = decompose_pure([env[n] for n in names], cs)
    ng = len(gs)
    ureps = formal_reps(us, gs, hs)
    hs = _triangular_complement([list(r[ng:]) for r in ureps], hs)
    reps = dict(zip(names, formal_reps([env[n] for n in names], gs, hs)))
    cons = _sign_constraints(clause, env, gs, hs, spec)
    delta = _margin(cons, gs, hs, spec)
    c = gs[0]
    spans = [[c, vs[j]] if j < len(vs) else [c, vs[0]] for j in range(len(hs))]
    for _ in range(12):
        new = []
        for j, h in enumerate(hs):
            eps = _positive_below(spans[j], delta, spec)
            lo, hi = vsub(h, eps), vadd(h, eps)
            while True:
                dw = density_witness(spans[j], lo, hi, spec)
                if j >= len(vs) or dw.t != 0:
                    break
                lo = dw.element
            new.append(dw.element)
        out = {n: vadd(combo(reps[n][:ng], gs), combo(reps[n][ng:], new)) for n in names}
        check = dict(env)
        check.update({n: v for n, v in out.items() if not n.startswith("c")})
        ws = [check[f"u{j}"] for j in range(len(us))]
        e = Echelon(cs)
        ok = eval_on_values(phi.matrix, check, lt) and all(
            Echelon(cs + vs[: j + 1]).contains(w) and e.add(w) for j, w in enumerate(ws)
        )
        if ok:
            return ws, {n: v for n, v in check.items() if n[0] not in "cu"}
        delta /= 4
    raise WitnessError("image tuple failed its post-check")


# ------------------------------------------------------------ certificates


@dataclass(frozen=True)
class OrderedCertificate:
    """A partial-group certificate plus a realization of ``h̄`` fixing the order.

    The order on the box is the one induced by sending ``h_j`` to
    ``h_values[j]``; any such realization with ``ḡ, h̄`` independent gives a
    group order extending the partial data.
    """

    base: PartialSubgroupCertificate
    h_values: tuple[Vec, ...]

    def to_json(self) -> dict:
        d = self.base.to_json()
        d["h_values"] = [vec_to_json(v) for v in self.h_values]
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "OrderedCertificate":
        try:
            return cls(PartialSubgroupCertificate.from_json(d), tuple(vec_from_json(v) for v in d["h_values"]))
        except (KeyError, TypeError) as exc:
            raise MalformedCertificate(str(exc)) from exc


def ordered_certificate_check(cert: OrderedCertificate, psi: ExistFormula, spec: LogGroupSpec = DEFAULT_SPEC) -> bool:
    from .tfag import certificate_check

    b = cert.base
    if len(cert.h_values) != b.q:
        raise MalformedCertificate("need one value per complement generator")
    if any(a.denominator != 1 for v in list(b.g) + list(cert.h_values) for _, a in v):
        return False
    basis = list(b.g) + list(cert.h_values)
    if Echelon(basis).rank != len(basis):
        return False

    def lt(r1, r2):
        return compare(combo(r1, basis), combo(r2, basis), spec) < 0

    return certificate_check(b, psi, contains=lambda v: all(a.denominator == 1 for _, a in v), less=lt)


def ordered_certificate_from_values(cs, us, witness) -> OrderedCertificate:
    base = certificate_from_values(cs, us, witness)
    names = sorted(witness)
    allv = list(cs) + list(us) + [witness[n] for n in names]
    _, hs = decompose_pure(allv, cs)
    return OrderedCertificate(base, tuple(hs))


def indep_diagram_semidecide(
    structure: LogGroup,
    cs: Sequence[int],
    phi: ExistFormula,
    budget: int,
    hint: Sequence[int] | None = None,
) -> SemidecisionResult:
    """Same search as the torsion-free version, with order-carrying certificates."""
    spec = structure.spec
    n = sum(1 for v in phi.free() if v.startswith("u"))
    cvals = [structure.element(c) for c in cs]
    steps = 0
    cands = _candidates(n)
    if hint is not None:
        cands = _chain_first((tuple(hint), 16 * (max(hint, default=0) + 1) ** 2), cands)
    for us, bound in cands:
        if steps >= budget:
            break
        steps += 1
        asg = {f"c{j}": c for j, c in enumerate(cs)}
        asg.update({f"u{j}": u for j, u in enumerate(us)})
        asg = {k: v for k, v in asg.items() if k in phi.free()}
        bound = max([bound] + [v + 1 for v in asg.values()])
        w = find_witness(structure.fragment(bound), phi, asg, bound)
        if w is None:
            continue
        cert = ordered_certificate_from_values(
            cvals, [structure.element(u) for u in us], {k: structure.element(v) for k, v in w.items()}
        )
        if ordered_certificate_check(cert, phi, spec):
            return SemidecisionResult(YES, steps, cert, tuple(us))
    return SemidecisionResult(NOT_YET, steps)


class LogConditionG:
    """Condition-G oracle for the good-copy driver.

    Only exact independence confirms a safeness formula here; a dependent
    designated tuple waits until ``cl_t`` notices and the stage is redone.
    """

    def __init__(self, structure: LogGroup):
        self.structure = structure

    def tuple_independent(self, U) -> bool:
        return Echelon(self.structure.element(u) for u in U).rank == len(U)

    def confirm_safeness(self, cs, us, t, budget) -> SemidecisionResult:
        S = self.structure
        e = Echelon(S.element(c) for c in cs)
        base = e.rank
        for u in us:
            e.add(S.element(u))
        return SemidecisionResult(YES if e.rank == base + len(us) else NOT_YET, 1)

    def injury_map(self, t_old, cs, us, vs, embedding=None):
        return None

    def is_embedding(self, t_old, rho, t_new) -> bool:
        return all(rho.get(e) == e for e in range(t_old))

    def semidecide(self, cs, phi, budget, hint=None) -> SemidecisionResult:
        return indep_diagram_semidecide(self.structure, cs, phi, budget, hint)
