"""Torsion-free abelian groups as coded subgroups of Q^(ω).

The group for a :class:`GroupSpec` is ``⊕_i R_i e_i`` where ``R_i ⊆ Q`` is
the ring of fractions whose denominators only use the primes allowed at
generator ``i``.  Full divisibility gives ⊕Q.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

from .formulas import And, Atom, Eq, ExistFormula, Not, Or, dnf
from .groups import (
    ADD,
    DIVISIBLE,
    ZERO_REL,
    VectorCoding,
    VectorGroup,
    eval_on_values,
    is_generator,
    witness_in_structure,
)
from .linalg import (
    Echelon,
    Vec,
    coordinates,
    inverse_unimodular,
    lattice_basis,
    smith_normal_form,
    unit,
    vadd,
    vec,
    vscale,
    vsub,
    combo,
)
from .presentation import PreconditionError, find_witness
from .pregeometry import ClosureApprox
from .zdep import ZDependenceAccelerator, ZDependenceFamily


def prime_factors(n: int) -> set[int]:
    out, p = set(), 2
    while p * p <= n:
        while n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


@dataclass(frozen=True)
class GroupSpec:
    """Which primes may divide generator ``i``.

    ``divisibility`` is ``"full"`` (⊕Q) or a non-empty list of prime lists,
    used cyclically: generator ``i`` may be divided by the primes in
    ``divisibility[i % len]``.  An empty entry means that generator is not
    divisible at all.
    """

    divisibility: object = "full"

    def __post_init__(self):
        d = self.divisibility
        if d == "full":
            return
        if not isinstance(d, tuple) or not d:
            raise ValueError("divisibility must be 'full' or a non-empty list of prime lists")
        for entry in d:
            for p in entry:
                if prime_factors(p) != {p}:
                    raise ValueError(f"{p} is not a prime")

    @classmethod
    def full(cls) -> "GroupSpec":
        return cls("full")

    @classmethod
    def cyclic(cls, primes: Sequence[Sequence[int]]) -> "GroupSpec":
        return cls(tuple(tuple(sorted(set(e))) for e in primes))

    def allowed(self, i: int, q: int) -> bool:
        if self.divisibility == "full":
            return True
        ok = self.divisibility[i % len(self.divisibility)]
        return prime_factors(q) <= set(ok)

    def contains(self, v: Vec) -> bool:
        return all(c.denominator == 1 or self.allowed(i, c.denominator) for i, c in v)

    def to_json(self) -> dict:
        d = self.divisibility
        return {"schema": 1, "class": "tfag", "divisibility": d if d == "full" else [list(e) for e in d]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "GroupSpec":
        if doc.get("schema", 1) != 1:
            raise ValueError("unsupported GroupSpec schema")
        d = doc.get("divisibility", "full")
        return cls.full() if d == "full" else cls.cyclic(d)


@lru_cache(maxsize=None)
def coding_for(spec: GroupSpec) -> VectorCoding:
    if spec.divisibility == "full":
        return DIVISIBLE
    return VectorCoding(spec.allowed)


# ------------------------------------------------------------ presentations


@dataclass(frozen=True)
class Collapse:
    """Hide ``dependent = ratio · base`` until the multiples of ``base`` show up.

    Positions are presentation indices.  Every formula witnessing the
    dependence passes through ``2·base, …, (ratio-1)·base``; they are placed
    at ``reveal, reveal+1, …``, so the dependence becomes visible to ``cl_t``
    only for ``t`` past ``reveal + ratio - 3``.
    """

    base: int
    dependent: int
    ratio: int
    reveal: int

    @property
    def hidden(self) -> range:
        return range(self.reveal, self.reveal + self.ratio - 2)

    def to_json(self):
        return {"base": self.base, "dependent": self.dependent, "ratio": self.ratio, "reveal": self.reveal}

    @classmethod
    def from_json(cls, d):
        return cls(int(d["base"]), int(d["dependent"]), int(d["ratio"]), int(d["reveal"]))


class ScheduleError(ValueError):
    pass


def standard_presentation(spec: GroupSpec) -> VectorGroup:
    return VectorGroup(coding_for(spec))


def build_scramble(coding: VectorCoding, schedule: Sequence[Collapse]) -> dict[int, int]:
    """The finite relabelling realizing ``schedule`` (presentation -> standard index)."""
    perm: dict[int, int] = {}
    where: dict[int, int] = {}  # standard -> presentation, for moved indices

    def std(p):
        return perm.get(p, p)

    def pos(s):
        return where.get(s, s)

    def swap(p, q):
        a, b = std(p), std(q)
        perm[p], perm[q] = b, a
        where[b], where[a] = p, q

    pinned: set[int] = set()
    for c in schedule:
        if c.ratio < 3:
            raise ScheduleError("ratio must be an integer >= 3 so the dependence needs a hidden witness")
        spots = {c.base, c.dependent, *c.hidden}
        if len(spots) < c.ratio:
            raise ScheduleError("base, dependent and the hidden positions must be distinct")
        if c.reveal <= max(c.base, c.dependent):
            raise ScheduleError("reveal must come after both collapsed elements")
        if spots & pinned:
            raise ScheduleError("collapses must use disjoint positions")
        x = coding.decode(std(c.base))
        if not x:
            raise ScheduleError("base must not be the zero element")
        targets = [(c.dependent, vscale(x, c.ratio))]
        targets += [(p, vscale(x, m)) for p, m in zip(c.hidden, range(2, c.ratio))]
        done = {c.base}
        for p, v in targets:
            if not coding.contains(v):
                raise ScheduleError("multiples of base must lie in the group")
            src = pos(coding.encode(v, limit_weight=10**6))
            if src in pinned or src in done:
                raise ScheduleError("a multiple of base collides with a pinned position")
            if src != p:
                swap(p, src)
            done.add(p)
        pinned |= spots
        # other multiples of base would expose the collapse in the diagram
        far = c.reveal + c.ratio - 2
        for p in range(c.reveal):
            if p in spots or not _parallel(coding.decode(std(p)), x):
                continue
            if p in pinned:
                raise ScheduleError("a multiple of base sits on a pinned position")
            # a far generator is a harmless filler for the freed position
            while far in pinned or not is_generator(coding.decode(std(far))):
                far += 1
            swap(p, far)
            far += 1
    for c in schedule:
        x = coding.decode(std(c.base))
        want = [(c.dependent, c.ratio)] + list(zip(c.hidden, range(2, c.ratio)))
        if any(coding.decode(std(p)) != vscale(x, m) for p, m in want):
            raise ScheduleError("collapses interfere with one another")
        spots = {c.base, c.dependent}
        if any(p not in spots and _parallel(coding.decode(std(p)), x) for p in range(c.reveal)):
            raise ScheduleError("collapses interfere with one another")
    return {k: v for k, v in perm.items() if k != v}


def _parallel(v: Vec, x: Vec) -> bool:
    """``v`` is a nonzero rational multiple of ``x``."""
    if not v or len(v) != len(x) or any(i != j for (i, _), (j, _) in zip(v, x)):
        return False
    r = v[0][1] / x[0][1]
    return all(a == r * b for (_, a), (_, b) in zip(v, x))


def scrambled_presentation(spec: GroupSpec, schedule: Sequence[Collapse]) -> VectorGroup:
    coding = coding_for(spec)
    G = VectorGroup(coding, build_scramble(coding, schedule))
    G.schedule = tuple(schedule)
    return G


# the documented schedule: each dependent takes the place of another
# multiple of its base, the bases are designated u_0, u_1, u_2, and cl_t
# flips at t = 41, 91, 201
DEFAULT_SCHEDULE = (
    Collapse(base=0, dependent=3, ratio=3, reveal=40),
    Collapse(base=2, dependent=9, ratio=3, reveal=90),
    Collapse(base=4, dependent=23, ratio=3, reveal=200),
)


def sigma1_family(spec: GroupSpec | None = None) -> ZDependenceFamily:
    return ZDependenceFamily()


def closure_approx(structure: VectorGroup, accelerate: bool = True) -> ClosureApprox:
    acc = ZDependenceAccelerator(structure) if accelerate else None
    return ClosureApprox(structure, sigma1_family(), acc)


# ------------------------------------------------------ pure decomposition


def decompose_pure(generators: Sequence[Vec], cs: Sequence[Vec]) -> tuple[list[Vec], list[Vec]]:
    """Split ``X = ⟨generators⟩`` as ``C ⊕ W`` with ``C`` the pure closure of ``c̄`` in ``X``.

    Returns Z-bases ``(ḡ, h̄)`` of ``C`` and of a complement ``W``.
    """
    basis = lattice_basis(list(generators))
    rows = []
    for c in cs:
        co = coordinates(c, basis) if basis else ([] if not c else None)
        if co is None or any(x.denominator != 1 for x in co):
            raise PreconditionError("c̄ must lie in the subgroup generated by X")
        rows.append([int(x) for x in co])
    r = len(basis)
    if not rows or not any(any(row) for row in rows):
        return [], list(basis)
    _, d, v = smith_normal_form(rows)
    rank = sum(1 for i in range(min(len(d), r)) if d[i][i])
    vinv = inverse_unimodular(v)
    new = [combo(row, basis) for row in vinv]
    return new[:rank], new[rank:]


def formal_reps(xs: Sequence[Vec], gs: Sequence[Vec], hs: Sequence[Vec]) -> list[tuple[int, ...]]:
    """Integer coordinates of each ``x`` over the Z-basis ``ḡ h̄``."""
    out = []
    for x in xs:
        co = coordinates(x, list(gs) + list(hs))
        if co is None or any(c.denominator != 1 for c in co):
            raise PreconditionError("element outside ⟨ḡ, h̄⟩")
        out.append(tuple(int(c) for c in co))
    return out


def _literal_difference(lit, env) -> Vec | None:
    """For a negative literal, the element that must stay nonzero."""
    body = lit.body
    if isinstance(body, Atom):
        vals = [env[a] for a in body.args]
        if body.rel == ADD:
            return vsub(vadd(vals[0], vals[1]), vals[2])
        if body.rel == ZERO_REL:
            return vals[0]
        return None
    if isinstance(body, Eq):
        return vsub(env[body.left], env[body.right])
    return None


def true_literals(phi, env, less=None) -> list:
    """Literals of the first disjunct of ``phi`` satisfied under ``env``."""
    for clause in dnf(phi):
        if all(eval_on_values(l, env, less) for l in clause):
            return clause
    return None


# ------------------------------------------------------ Condition B witness


class WitnessError(RuntimeError):
    pass


def dependent_witness(
    cs: Sequence[Vec],
    a: Vec,
    psi: ExistFormula,
    witness: Mapping[str, Vec] | None = None,
    structure: VectorGroup | None = None,
    search_budget: int = 1 << 20,
) -> tuple[Vec, dict[str, Vec]]:
    """``b ∈ cl(c̄)`` satisfying ``∃ȳ ψ(c̄, ȳ, b)``, plus the witness values.

    ``psi`` has free variables ``c0, c1, …`` and ``x``.  A witness for ``a``
    is either passed in or searched for in ``structure``.  Complement
    generators of ``⟨c̄, a, ȳ⟩`` are replaced by multiples ``m·u`` of a
    nonzero ``u ∈ C``, each ``m`` chosen as the least positive integer that
    keeps every inequation of the satisfied disjunct true.
    """
    cs = list(cs)
    if not any(cs):
        raise PreconditionError("c̄ must contain a nonzero element")
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
    clause = true_literals(psi.matrix, env)
    if clause is None:
        raise PreconditionError("ψ(c̄, a) is false under the given witness")
    names = list(env)
    gs, hs = decompose_pure([env[n] for n in names], cs)
    reps = dict(zip(names, formal_reps([env[n] for n in names], gs, hs)))
    u = next(c for c in cs if c)
    ng = len(gs)

    def image(rep, ms):
        out = combo(rep[:ng], gs)
        for j, m in enumerate(ms):
            if rep[ng + j]:
                out = vadd(out, vscale(u, rep[ng + j] * m))
        rest = [(rep[ng + j], hs[j]) for j in range(len(ms), len(hs))]
        for k, h in rest:
            out = vadd(out, vscale(h, k))
        return out

    negs = [l for l in clause if isinstance(l, Not)]
    diffs = []
    for l in negs:
        d = _literal_difference(l, env)
        if d is not None:
            diffs.append(formal_reps([d], gs, hs)[0])
    ms: list[int] = []
    for j in range(len(hs)):
        m = 1
        while any(not image(d, ms + [m]) for d in diffs):
            m += 1
        ms.append(m)
    out = {n: image(reps[n], ms) for n in names}
    b = out.pop("x")
    for n in list(out):
        if n.startswith("c"):
            out.pop(n)
    check = dict(env)
    check.update(out)
    check["x"] = b
    if not eval_on_values(psi.matrix, check) or not Echelon(cs).contains(b):
        raise WitnessError("constructed element failed its own post-check")
    return b, out


# ------------------------------------------------------ Condition G witness


def _support_bound(vectors) -> int:
    return max((i for v in vectors for i, _ in v), default=-1) + 1


def _triangular_complement(us_w: list[list[int]], hs: list[Vec]) -> list[Vec]:
    """Change the basis ``h̄`` so that row ``i`` of ``us_w`` only uses ``h_0..h_i``."""
    a = [list(r) for r in us_w]
    hs = list(hs)
    r = len(hs)
    for i in range(len(a)):
        while True:
            nz = [j for j in range(i, r) if a[i][j]]
            if len(nz) <= 1:
                break
            p = min(nz, key=lambda j: abs(a[i][j]))
            for j in nz:
                if j == p:
                    continue
                q = a[i][j] // a[i][p]
                for row in a:
                    row[j] -= q * row[p]
                hs[p] = vadd(hs[p], vscale(hs[j], q))
        nz = [j for j in range(i, r) if a[i][j]]
        if not nz:
            raise PreconditionError("ū is not independent over c̄")
        j = nz[0]
        if j != i:
            for row in a:
                row[i], row[j] = row[j], row[i]
            hs[i], hs[j] = hs[j], hs[i]
    return hs


class Homomorphism:
    """A group map on ``span(domain)`` given by images of a basis."""

    def __init__(self, basis: Sequence[Vec], images: Sequence[Vec]):
        self.basis = list(basis)
        self.images = list(images)
        self._e = Echelon(self.basis)

    def __call__(self, x: Vec) -> Vec:
        co = self._e.express(x)
        if co is None:
            raise PreconditionError("element outside the homomorphism's domain")
        return combo([co.get(i, 0) for i in range(len(self.images))], self.images)


def indistinguishing_map(
    cs: Sequence[Vec], us: Sequence[Vec], vs: Sequence[Vec], extra: Sequence[Vec], divisible: bool
) -> Homomorphism:
    """Embedding of ``⟨c̄, ū, extra⟩`` into the group fixing ``c̄`` with ``u_i ↦ cl(c̄, v_0..v_i)``.

    Over ⊕Q the map sends ``u_i`` to ``v_i`` exactly.  Otherwise the
    complement of the pure closure of ``c̄`` is rebased to be triangular
    against ``ū`` and its generators go to ``v̄`` and fresh generators.
    """
    if len(us) != len(vs):
        raise PreconditionError("ū and v̄ must have the same length")
    fresh = _support_bound(list(cs) + list(us) + list(vs) + list(extra))
    if divisible:
        e = Echelon(cs)
        basis = [c for c, ok in zip(cs, e.independent) if ok]
        images = list(basis)
        for u, v in zip(us, vs):
            if not e.add(u):
                raise PreconditionError("ū is not independent over c̄")
            basis.append(u)
            images.append(v)
        for y in extra:
            if e.add(y):
                basis.append(y)
                images.append(unit(fresh))
                fresh += 1
        return Homomorphism(basis, images)
    gs, hs = decompose_pure(list(cs) + list(us) + list(extra), cs)
    ng = len(gs)
    reps = formal_reps(us, gs, hs)
    hs = _triangular_complement([list(r[ng:]) for r in reps], hs)
    images = list(gs) + list(vs)
    for _ in range(len(hs) - len(us)):
        images.append(unit(fresh))
        fresh += 1
    return Homomorphism(gs + hs, images)


def local_indist_witness(
    cs: Sequence[Vec],
    us: Sequence[Vec],
    vs: Sequence[Vec],
    phi: ExistFormula,
    witness: Mapping[str, Vec] | None = None,
    structure: VectorGroup | None = None,
    divisible: bool | None = None,
    search_budget: int = 1 << 20,
) -> tuple[list[Vec], dict[str, Vec]]:
    """``w̄`` with ``φ(c̄, w̄)``, independent over ``c̄``, ``w_i ∈ cl(c̄, v_0..v_i)``.

    ``phi`` has free variables ``c0, …`` and ``u0, …``.
    """
    cs, us, vs = list(cs), list(us), list(vs)
    if us == vs:
        return list(us), dict(witness or {})
    if not (Echelon(cs).rank + len(us) == Echelon(cs + us).rank and Echelon(cs).rank + len(vs) == Echelon(cs + vs).rank):
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
    if not eval_on_values(phi.matrix, env):
        raise PreconditionError("φ(c̄, ū) is false under the given witness")
    if divisible is None:
        divisible = structure is None or structure.divisible
    f = indistinguishing_map(cs, us, vs, list(witness.values()), divisible)
    ws = [f(u) for u in us]
    wit = {k: f(v) for k, v in witness.items()}
    check = {f"c{j}": c for j, c in enumerate(cs)}
    check.update({f"u{j}": w for j, w in enumerate(ws)})
    check.update(wit)
    if not eval_on_values(phi.matrix, check):
        raise WitnessError("image tuple fails φ")
    e = Echelon(cs)
    for j, w in enumerate(ws):
        if not Echelon(cs + vs[: j + 1]).contains(w) or not e.add(w):
            raise WitnessError("image tuple is not interdependent with v̄ over c̄")
    return ws, wit


# ------------------------------------------------------------ certificates


class MalformedCertificate(ValueError):
    """The certificate's data is not even well-typed (distinct from failing)."""


def vec_to_json(v: Vec) -> list:
    return [[i, str(c)] for i, c in v]


def vec_from_json(d) -> Vec:
    return vec({int(i): Fraction(c) for i, c in d})


@dataclass(frozen=True)
class PartialSubgroupCertificate:
    """A box ``H = C ⊕ W`` with ``C = ⟨ḡ⟩↾k`` and ``W = ⟨h_0..h_{q-1}⟩↾k``.

    Elements of ``H`` are integer vectors of length ``len(g) + q`` with
    entries in ``[-k, k]``; the sum table holds exactly the sums that stay in
    the box.  ``g`` are actual group elements; the ``h`` are abstract.
    """

    g: tuple[Vec, ...]
    q: int
    k: int
    c: tuple[Vec, ...]
    c_reps: tuple[tuple[int, ...], ...]
    a_reps: tuple[tuple[int, ...], ...]
    w_reps: tuple[tuple[str, tuple[int, ...]], ...] = ()

    @property
    def width(self) -> int:
        return len(self.g) + self.q

    def elements(self):
        """All box elements; only sensible for tiny certificates."""
        return list(product(range(-self.k, self.k + 1), repeat=self.width))

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "g": [vec_to_json(v) for v in self.g],
            "q": self.q,
            "k": self.k,
            "c": [vec_to_json(v) for v in self.c],
            "c_reps": [list(r) for r in self.c_reps],
            "a_reps": [list(r) for r in self.a_reps],
            "w_reps": {n: list(r) for n, r in self.w_reps},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, d: Mapping) -> "PartialSubgroupCertificate":
        try:
            return cls(
                g=tuple(vec_from_json(v) for v in d["g"]),
                q=int(d["q"]),
                k=int(d["k"]),
                c=tuple(vec_from_json(v) for v in d["c"]),
                c_reps=tuple(tuple(int(x) for x in r) for r in d["c_reps"]),
                a_reps=tuple(tuple(int(x) for x in r) for r in d["a_reps"]),
                w_reps=tuple(sorted((n, tuple(int(x) for x in r)) for n, r in d.get("w_reps", {}).items())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedCertificate(str(exc)) from exc


def _formal_eval(phi, env, less=None) -> bool:
    if isinstance(phi, Atom):
        vals = [env[a] for a in phi.args]
        if phi.rel == ADD:
            return tuple(x + y for x, y in zip(vals[0], vals[1])) == vals[2]
        if phi.rel == ZERO_REL:
            return not any(vals[0])
        if less is not None:
            return less(vals[0], vals[1])
        raise MalformedCertificate(f"relation {phi.rel} is not interpreted in the certificate")
    if isinstance(phi, Eq):
        return env[phi.left] == env[phi.right]
    if isinstance(phi, Not):
        return not _formal_eval(phi.body, env, less)
    if isinstance(phi, And):
        return all(_formal_eval(p, env, less) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_formal_eval(p, env, less) for p in phi.parts)
    raise TypeError(phi)


def _int_rank(rows) -> int:
    return Echelon(vec(enumerate(r)) for r in rows).rank


def certificate_check(cert: PartialSubgroupCertificate, psi: ExistFormula, contains=None, less=None) -> bool:
    """Box bounds, ``c̄ ⊆ C``, formal independence of ``ā`` over ``c̄``, and ``H ⊨ ∃ȳ ψ(c̄, ā, ȳ)``.

    ``contains`` tests group membership of ``ḡ``; ``less`` interprets the
    order symbol on formal representations (ordered groups only).
    """
    width = cert.width
    if cert.k < 1 or cert.q < 0:
        raise MalformedCertificate("k must be >= 1 and q >= 0")
    reps = list(cert.c_reps) + list(cert.a_reps) + [r for _, r in cert.w_reps]
    if any(len(r) != width for r in reps) or len(cert.c_reps) != len(cert.c):
        raise MalformedCertificate("representation lengths do not match the box")
    names = [f"c{j}" for j in range(len(cert.c))] + [f"u{j}" for j in range(len(cert.a_reps))]
    names += [n for n, _ in cert.w_reps]
    if len(set(names)) != len(names):
        raise MalformedCertificate("duplicate variable names")
    needed = psi.free() | set(psi.bound)
    if not needed <= set(names):
        raise MalformedCertificate(f"certificate leaves {sorted(needed - set(names))} unassigned")
    # everything lives in the box C↾k ⊕ W↾k
    if any(abs(x) > cert.k for r in reps for x in r):
        return False
    # ḡ must be independent group elements, so formal reps are faithful on C
    if Echelon(cert.g).rank != len(cert.g):
        return False
    if contains is not None and not all(contains(g) for g in cert.g):
        return False
    ng = len(cert.g)
    # c̄ sits in C and the reps evaluate to the actual parameters
    for c, r in zip(cert.c, cert.c_reps):
        if any(r[ng:]) or combo(r[:ng], cert.g) != c:
            return False
    # ā is independent over c̄ formally
    base = _int_rank(cert.c_reps)
    if _int_rank(list(cert.c_reps) + list(cert.a_reps)) != base + len(cert.a_reps):
        return False
    env = dict(zip(names, reps))
    return _formal_eval(psi.matrix, env, less)


def realize_certificate(cert: PartialSubgroupCertificate, fresh_from: int | None = None):
    """Send ``h_j`` to fresh generators; returns values for ``ā`` and the witnesses."""
    start = _support_bound(cert.g) if fresh_from is None else fresh_from
    hs = [unit(start + j) for j in range(cert.q)]
    basis = list(cert.g) + hs

    def val(r):
        return combo(r, basis)

    return [val(r) for r in cert.a_reps], {n: val(r) for n, r in cert.w_reps}


def certificate_from_values(cs: Sequence[Vec], us: Sequence[Vec], witness: Mapping[str, Vec]) -> PartialSubgroupCertificate:
    """The certificate read off a concrete solution via ``decompose_pure``."""
    names = sorted(witness)
    allv = list(cs) + list(us) + [witness[n] for n in names]
    gs, hs = decompose_pure(allv, cs)
    reps = formal_reps(allv, gs, hs)
    k = max([1] + [abs(x) for r in reps for x in r])
    nc, nu = len(cs), len(us)
    return PartialSubgroupCertificate(
        g=tuple(gs),
        q=len(hs),
        k=k,
        c=tuple(cs),
        c_reps=tuple(reps[:nc]),
        a_reps=tuple(reps[nc : nc + nu]),
        w_reps=tuple(zip(names, reps[nc + nu :])),
    )


YES = "yes"
NOT_YET = "not-yet"


@dataclass
class SemidecisionResult:
    answer: str
    steps: int
    certificate: PartialSubgroupCertificate | None = None
    found: tuple[int, ...] | None = None

    def __bool__(self):
        return self.answer == YES


def _candidates(n: int):
    """``(ū, witness bound)`` pairs: level ``m`` tries every distinct tuple below ``m+1``."""
    m = 0
    while True:
        for tup in product(range(m + 1), repeat=n):
            if len(set(tup)) == n:
                yield tup, 4 * (m + 1) ** 2 + 12
        m += 1


def indep_diagram_semidecide(
    structure: VectorGroup,
    cs: Sequence[int],
    phi: ExistFormula,
    budget: int,
    hint: Sequence[int] | None = None,
    certify=None,
) -> SemidecisionResult:
    """Semi-decide ``φ ∈ I(c̄)`` by searching for a checkable certificate.

    Candidate tuples ``ū`` are taken in a fixed order (largest element first,
    then lexicographic); for each, a witness is sought in the fragment just
    above the tuple and a certificate is read off by pure decomposition and
    verified formally.  One candidate costs one step.
    """
    certify = certify or (lambda cert: certificate_check(cert, phi, contains=structure.coding.contains))
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
        cert = certificate_from_values(cvals, [structure.element(u) for u in us], {k: structure.element(v) for k, v in w.items()})
        if certify(cert):
            return SemidecisionResult(YES, steps, cert, tuple(us))
    return SemidecisionResult(NOT_YET, steps)


def _chain_first(first, rest):
    yield first
    for x in rest:
        if x != first:
            yield x


# ------------------------------------------------- realizing a fragment diagram


def fragment_sums(structure: VectorGroup, t: int):
    """All ``add`` facts ``(x, y, x+y)`` among the first ``t`` elements."""
    out = []
    vals = [structure.element(e) for e in range(t)]
    index = {v: e for e, v in enumerate(vals)}
    for x in range(t):
        for y in range(x, t):
            z = index.get(vadd(vals[x], vals[y]))
            if z is not None:
                out.append((x, y, z))
    return out


def _solve_affine(unknowns: list[int], equations, fresh: int) -> dict[int, Vec]:
    """Most general solution of ``Σ coef·f(var) = rhs`` with free variables fresh generators."""
    pivots: dict[int, tuple[dict, Vec]] = {}
    for row, rhs in equations:
        row = dict(row)
        last = -1
        while True:
            cand = [k for k in row if k in pivots and k > last]
            if not cand:
                break
            p = last = min(cand)
            prow, prhs = pivots[p]
            f = row[p] / prow[p]
            for k, c in prow.items():
                n = row.get(k, 0) - f * c
                if n:
                    row[k] = n
                else:
                    row.pop(k, None)
            rhs = vsub(rhs, vscale(prhs, f))
        if not row:
            if rhs:
                raise PreconditionError("inconsistent diagram")
            continue
        pivots[min(row)] = (row, rhs)
    value: dict[int, Vec] = {}
    for v in unknowns:
        if v not in pivots:
            value[v] = unit(fresh)
            fresh += 1
    for p in sorted(pivots, reverse=True):
        row, rhs = pivots[p]
        acc = rhs
        for k, c in row.items():
            if k != p:
                acc = vsub(acc, vscale(value[k], c))
        value[p] = vscale(acc, 1 / row[p])
    return value


def realize_diagram(structure: VectorGroup, t: int, fixed: Sequence[int], us: Sequence[int], sums=None):
    """An embedding of the first ``t`` elements fixing ``fixed`` with ``ū`` independent over them.

    The ``add``/``zero`` facts are solved as a linear system with the fixed
    elements as constants and every free parameter sent to a fresh
    generator.  That solution satisfies exactly the relations the facts force,
    so it is an embedding with ``ū`` independent whenever any such embedding
    exists in ⊕Q.  Returns ``{element: value}`` or None.
    """
    fixed = set(fixed)
    vals = [structure.element(e) for e in range(t)]
    unknowns = [e for e in range(t) if e not in fixed]
    sums = fragment_sums(structure, t) if sums is None else sums
    eqs = []
    for x, y, z in sums:
        row: dict[int, Fraction] = {}
        rhs: Vec = ()
        for e, c in ((x, 1), (y, 1), (z, -1)):
            if e in fixed:
                rhs = vsub(rhs, vscale(vals[e], c))
            else:
                row[e] = row.get(e, 0) + c
        row = {k: Fraction(c) for k, c in row.items() if c}
        eqs.append((row, rhs))
    if t >= 2:
        z0 = structure.index_below((), t)
        if z0 is not None and z0 not in fixed:
            eqs.append(({z0: Fraction(1)}, ()))
    fresh = _support_bound(vals)
    try:
        sol = _solve_affine(unknowns, eqs, fresh)
    except PreconditionError:
        return None
    sigma = {e: (vals[e] if e in fixed else sol[e]) for e in range(t)}
    if not structure.coding.contains_all(sigma.values()):
        return None
    if not is_embedding(structure, t, sigma, sums):
        return None
    if not Echelon([sigma[c] for c in fixed]).rank + len(us) == Echelon([sigma[c] for c in fixed] + [sigma[u] for u in us]).rank:
        return None
    return sigma


def is_embedding(structure: VectorGroup, t: int, sigma: Mapping[int, Vec], sums=None) -> bool:
    """``sigma`` preserves facts and non-facts of the first ``t`` elements (as values)."""
    inv = {}
    for e in range(t):
        v = sigma[e]
        if v in inv:
            return False
        inv[v] = e
    facts = {}
    for x, y, z in (fragment_sums(structure, t) if sums is None else sums):
        facts[(x, y)] = z
    for x in range(t):
        for y in range(x, t):
            got = inv.get(vadd(sigma[x], sigma[y]))
            if got != facts.get((x, y)):
                return False
    if t >= 2:
        z0 = structure.index_below((), t)
        for e in range(t):
            if (not sigma[e]) != (e == z0):
                return False
    return True


# ------------------------------------------------------- Condition G oracle


class GroupConditionG:
    """Independence-diagram confirmations and witnesses for a vector group.

    Safeness formulas are the existential closure of a fragment's whole atomic
    diagram, so they are handled structurally: either the designated tuple
    is itself independent over the parameters, or the diagram is realized by
    :func:`realize_diagram`.  Either way the answer comes with the embedding
    that witnesses it.
    """

    def __init__(self, structure: VectorGroup):
        self.structure = structure
        self._sums: dict[int, list] = {}

    def sums(self, t):
        if t not in self._sums:
            if len(self._sums) > 8:
                self._sums.clear()
            self._sums[t] = fragment_sums(self.structure, t)
        return self._sums[t]

    def tuple_independent(self, U: Sequence[int]) -> bool:
        return Echelon(self.structure.element(u) for u in U).rank == len(U)

    def confirm_safeness(self, cs: Sequence[int], us: Sequence[int], t: int, budget: int) -> SemidecisionResult:
        S = self.structure
        cv = [S.element(c) for c in cs]
        e = Echelon(cv)
        base = e.rank
        for u in us:
            e.add(S.element(u))
        if e.rank == base + len(us):
            return SemidecisionResult(YES, 1)
        if budget < 2:
            return SemidecisionResult(NOT_YET, 1)
        sigma = realize_diagram(S, t, cs, us, self.sums(t))
        if sigma is None:
            return SemidecisionResult(NOT_YET, 2)
        r = SemidecisionResult(YES, 2)
        r.embedding = sigma
        return r

    def injury_map(self, t_old: int, cs, us, vs, embedding=None) -> dict[int, int] | None:
        """``ρ`` on the first ``t_old`` elements: fix ``c̄``, send ``ū`` towards ``v̄``."""
        S = self.structure
        cv = Echelon(S.element(c) for c in cs)
        base = cv.rank
        for v in vs:
            cv.add(S.element(v))
        if cv.rank != base + len(vs):
            # no embedding can send ū onto a tuple dependent over c̄
            return None
        sigma = embedding or {e: S.element(e) for e in range(t_old)}
        f = indistinguishing_map(
            [S.element(c) for c in cs],
            [sigma[u] for u in us],
            [S.element(v) for v in vs],
            [sigma[e] for e in range(t_old)],
            S.divisible,
        )
        rho = {}
        for e in range(t_old):
            try:
                rho[e] = S.index_of(f(sigma[e]))
            except (OverflowError, ValueError):
                return None
        return rho

    def is_embedding(self, t_old: int, rho: Mapping[int, int], t_new: int) -> bool:
        S = self.structure
        if any(not 0 <= rho.get(e, -1) < t_new for e in range(t_old)):
            return False
        return is_embedding(S, t_old, {e: S.element(rho[e]) for e in range(t_old)}, self.sums(t_old))

    def semidecide(self, cs, phi, budget, hint=None) -> SemidecisionResult:
        return indep_diagram_semidecide(self.structure, cs, phi, budget, hint)
