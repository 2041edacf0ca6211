"""Acceptance criteria 1-9, one test each.

Every test records a PASS/FAIL line in ``conftest.CRITERIA`` before
asserting; the lines are printed at the end of the pytest run.
"""
import json
import random
import time
from itertools import product

import pytest
from conftest import CRITERIA

from malcev import aoag, grids, tfag
from malcev import bad_copy as bc
from malcev import good_copy as gc
from malcev.cli import main
from malcev.formulas import And, Atom, Eq, ExistFormula, Not
from malcev.groups import ADD, LT, eval_on_values
from malcev.linalg import Echelon, unit, vadd, vec, vscale, vsub, combo
from malcev.oracle import OracleContext, brute_independent
from malcev.presentation import fragment_from_csv, is_partial_isomorphism


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[n] = line
    print(line)


def read_jsonl(path):
    return [json.loads(x) for x in path.read_text().splitlines() if x.strip()]


# ------------------------------------------------------------ shared runs


@pytest.fixture(scope="module")
def good_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("good")
    out = {}
    t0 = time.time()
    out["exit"] = main(["good-copy", "--stages=200", "--scramble=default", f"--trace={d / 'a.jsonl'}", f"--diagram={d / 'a.csv'}"])
    out["seconds"] = time.time() - t0
    out["verify"] = main(["verify", str(d / "a.jsonl")])
    out["exit_again"] = main(["good-copy", "--stages=200", "--scramble=default", f"--trace={d / 'b.jsonl'}"])
    out["dir"] = d
    return out


@pytest.fixture(scope="module")
def bad_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("bad")
    out = {}
    t0 = time.time()
    out["exit"] = main(["bad-copy", "--stages=300", f"--trace={d / 'a.jsonl'}"])
    out["seconds"] = time.time() - t0
    out["verify"] = main(["verify", str(d / "a.jsonl")])
    out["exit_again"] = main(["bad-copy", "--stages=300", f"--trace={d / 'b.jsonl'}"])
    out["dir"] = d
    return out


# ------------------------------------------------------------- criteria


def test_criterion_1_good_copy_soundness(good_run):
    S = tfag.scrambled_presentation(tfag.GroupSpec.full(), tfag.DEFAULT_SCHEDULE)
    events = read_jsonl(good_run["dir"] / "a.jsonl")
    final = gc.states_from_trace(events)[-1]
    images = final.images()[:10]
    independent = brute_independent(OracleContext(S), images)
    # the diagram file written by the run, restricted to the first 50 copy elements
    n = 50
    tau = final.tau
    F = fragment_from_csv(S.signature, len(tau), (good_run["dir"] / "a.csv").read_text())
    mapping = {b: tau[b] for b in range(n)}
    iso = is_partial_isomorphism(F, S.fragment(final.t), mapping)
    ok = (
        good_run["exit"] == 0
        and good_run["verify"] == 0
        and final.s == 200
        and independent
        and iso
        and good_run["seconds"] < 300
    )
    record(
        1,
        ok,
        f"exit {good_run['exit']}, verify {good_run['verify']}, S={final.s}, t={final.t}, "
        f"first 10 images independent={independent}, iso on 50={iso}, {good_run['seconds']:.1f}s",
    )
    assert ok


def test_criterion_2_stabilization(good_run):
    S = tfag.scrambled_presentation(tfag.GroupSpec.full(), tfag.DEFAULT_SCHEDULE)
    ctx = OracleContext(S)
    events = read_jsonl(good_run["dir"] / "a.jsonl")
    rep = gc.stabilization_report(events, tfag.closure_approx(S), lambda U: brute_independent(ctx, U))
    P = tfag.standard_presentation(tfag.GroupSpec.full())
    plain = gc.run(tfag.closure_approx(P), tfag.GroupConditionG(P), 200)
    plain_moves = gc.stabilization_report(plain.trace)["moves"]
    ok = not rep["late_moves"] and plain.status == "complete" and plain_moves == 0
    record(
        2,
        ok,
        f"scrambled: {rep['moves']} moves, {len(rep['late_moves'])} after certification; "
        f"unscrambled: {plain_moves} moves",
    )
    assert ok


def test_criterion_3_dependence_from_basis():
    parts = []
    ok = True
    for name, spec in (("⊕Q", tfag.GroupSpec.full()), ("2-divisible/none", tfag.GroupSpec.cyclic([[2], []]))):
        G = tfag.standard_presentation(spec)
        ctx = OracleContext(G)
        cl = tfag.closure_approx(G)
        tally = grids.dependence_grid(ctx, cl, fragment=12, max_size=4)
        got, want = grids.basis_prefix_check(ctx, cl, k=5)
        good = tally.disagree == 0 and tally.unresolved == 0 and got == want
        ok = ok and good
        parts.append(f"{name}: {tally.agree} agree, {tally.disagree} disagree, {tally.unresolved} unresolved, basis {got} vs {want}")
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_4_closure_convergence():
    parts = []
    ok = True
    for name, G, closure in (
        ("tfag", tfag.standard_presentation(tfag.GroupSpec.full()), tfag.closure_approx),
        ("aoag", aoag.standard_presentation(), aoag.closure_approx),
    ):
        tally = grids.closure_grid(OracleContext(G, name), closure(G), fragment=12, max_y=3, t_max=5000)
        good = tally.disagree == 0 and tally.unresolved == 0 and tally.extra["monotonicity_violations"] == 0
        ok = ok and good
        parts.append(
            f"{name}: {tally.agree} pairs converge, T_max used {tally.extra['t_max_used']}, "
            f"{tally.extra['monotonicity_violations']} monotonicity violations"
        )
    record(4, ok, "; ".join(parts))
    assert ok


def test_criterion_5_bad_copy(bad_run):
    P = tfag.standard_presentation(tfag.GroupSpec.full())
    res = bc.run(P, bc.GroupConditionB(P), bc.guesser_suite(), 300)
    acts = [ev["e"] for ev in res.log if ev["event"] == "act"]
    once = len(acts) == len(set(acts))
    defeated = all(bc.verify_defeated(res, e) for e in acts)
    oracle = [r for r in res.state.requirements if isinstance(r.guesser, bc.OracleGuesser)]
    oracle_ok = all(not bc.verify_defeated(res, r.e) for r in oracle)
    pull = bc.pullback_check(res, 40)
    ok = bad_run["exit"] == 0 and bad_run["verify"] == 0 and once and defeated and oracle_ok and pull and bad_run["seconds"] < 300
    record(
        5,
        ok,
        f"exit {bad_run['exit']}, replay {bad_run['verify']}, acted {sorted(acts)}, all defeated={defeated}, "
        f"oracle never defeated={oracle_ok}, at most once={once}, pullback={pull}, {bad_run['seconds']:.1f}s",
    )
    assert ok


def test_criterion_6_certificates():
    parts = []
    ok = True
    for name, G, semi in (
        ("tfag", tfag.standard_presentation(tfag.GroupSpec.full()), tfag.indep_diagram_semidecide),
        ("aoag", aoag.standard_presentation(), aoag.indep_diagram_semidecide),
    ):
        tally = grids.certificate_grid(
            OracleContext(G, name), lambda cs, phi, b: semi(G, cs, phi, b), fragment=10, height=3
        )
        good = tally.disagree == 0 and tally.unresolved == 0 and tally.extra["contradicted"] == 0
        ok = ok and good
        parts.append(
            f"{name}: {tally.agree} agree, {tally.unresolved} brute-only yes, "
            f"{tally.extra['contradicted']} contradicted, {tally.extra['both_open']} open"
        )
    record(6, ok, "; ".join(parts))
    assert ok


def _witness_instance(rng, ordered):
    cs = [unit(0), unit(1)] if ordered else [unit(0)]
    a = unit(5)
    ys = [vadd(vscale(a, rng.randint(-2, 2)), combo([rng.randint(-2, 2) for _ in cs], cs)) for _ in range(2)]
    env = {f"c{j}": c for j, c in enumerate(cs)}
    env["x"] = a
    env.update({f"y{j}": y for j, y in enumerate(ys)})
    lt = aoag.less() if ordered else None
    names = list(env)
    atoms = [Atom(ADD, t) for t in product(names, repeat=3)]
    atoms += [Eq(p, q) for p, q in product(names, repeat=2) if p < q]
    if ordered:
        atoms += [Atom(LT, t) for t in product(names, repeat=2)]
    lits = [a_ if eval_on_values(a_, env, lt) else Not(a_) for a_ in atoms]
    psi = ExistFormula(("y0", "y1"), And(tuple(rng.sample(lits, 12))))
    return cs, a, psi, {k: v for k, v in env.items() if k.startswith("y")}, lt


def test_criterion_7_condition_b():
    parts = []
    ok = True
    for name, ordered, fn in (("tfag", False, tfag.dependent_witness), ("aoag", True, aoag.dependent_witness)):
        rng = random.Random(1)
        good = 0
        for _ in range(100):
            cs, a, psi, w, lt = _witness_instance(rng, ordered)
            b, wit = fn(cs, a, psi, w)
            env = {f"c{j}": c for j, c in enumerate(cs)}
            env["x"] = b
            env.update(wit)
            good += Echelon(cs).contains(b) and eval_on_values(psi.matrix, env, lt)
        ok = ok and good == 100
        parts.append(f"{name}: {good}/100")
    record(7, ok, ", ".join(parts))
    assert ok


def _rv(rng, n=4):
    return vec({i: rng.randint(-3, 3) for i in range(n)})


def test_criterion_8_aoag_exactness():
    rng = random.Random(0)
    bad_order = 0
    for _ in range(1000):
        x, y, z = _rv(rng), _rv(rng), _rv(rng)
        c = aoag.compare(x, y)
        total = c == -aoag.compare(y, x) and (c == 0) == (x == y)
        trans = not (c < 0 and aoag.compare(y, z) < 0) or aoag.compare(x, z) < 0
        bad_order += not (total and trans and aoag.compare(vadd(x, z), vadd(y, z)) == c)
    # ln 101 - 2 ln 2 - 2 ln 5 = ln 1.01
    one_pct = vsub(unit(25), vec({0: 2, 2: 2}))
    gens = [unit(0), unit(1)]
    bad_density = 0
    max_bound = 0
    for _ in range(100):
        lo = _rv(rng, 6)
        hi = vadd(lo, vscale(one_pct, rng.randint(1, 3)))
        d = aoag.density_witness(gens, lo, hi)
        inside = aoag.compare(lo, d.element) < 0 < aoag.compare(hi, d.element)
        bad_density += not (inside and d.element == vadd(vscale(gens[0], d.s), vscale(gens[1], d.t)))
        max_bound = max(max_bound, d.bound)
    G = aoag.standard_presentation()
    nonzero = [G.element(n) for n in range(12) if G.element(n)]
    bad_arch = 0
    for x, y in product(nonzero, repeat=2):
        m = aoag.archimedean_multiple(x, y)
        ax = x if aoag.sign(x) > 0 else vscale(x, -1)
        ay = y if aoag.sign(y) > 0 else vscale(y, -1)
        bad_arch += not aoag.compare(vscale(ax, m), ay) > 0
    ok = bad_order == 0 and bad_density == 0 and bad_arch == 0
    record(
        8,
        ok,
        f"order: {bad_order}/1000 bad; density: {bad_density}/100 bad, max |coefficient| {max_bound}; "
        f"Archimedean: {bad_arch}/{len(nonzero) ** 2} bad",
    )
    assert ok


def test_criterion_9_determinism(good_run, bad_run):
    same_good = (good_run["dir"] / "a.jsonl").read_bytes() == (good_run["dir"] / "b.jsonl").read_bytes()
    same_bad = (bad_run["dir"] / "a.jsonl").read_bytes() == (bad_run["dir"] / "b.jsonl").read_bytes()
    ok = same_good and same_bad and good_run["exit_again"] == 0 and bad_run["exit_again"] == 0
    record(9, ok, f"good-copy traces identical={same_good}, bad-copy logs identical={same_bad}")
    assert ok
