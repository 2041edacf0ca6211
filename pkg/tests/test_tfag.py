from fractions import Fraction

import pytest

from malcev import tfag
from malcev.formulas import parse
from malcev.groups import eval_on_values
from malcev.linalg import Echelon, unit, vadd, vec, vscale
from malcev.oracle import OracleContext, brute_independent


def test_spec_round_trip_and_membership():
    spec = tfag.GroupSpec.cyclic([[2], []])
    assert tfag.GroupSpec.from_json(spec.to_json()) == spec
    assert spec.contains(vec({0: Fraction(1, 4)}))
    assert not spec.contains(vec({1: Fraction(1, 2)}))
    assert not spec.contains(vec({0: Fraction(1, 3)}))
    with pytest.raises(ValueError):
        tfag.GroupSpec.cyclic([[4]])


def test_standard_presentation_is_a_bijection():
    G = tfag.standard_presentation(tfag.GroupSpec.cyclic([[2], []]))
    vals = [G.element(n) for n in range(300)]
    assert len(set(vals)) == 300
    assert all(G.index_of(v) == n for n, v in enumerate(vals[:50]))


def test_scramble_hides_collapses():
    G = tfag.scrambled_presentation(tfag.GroupSpec.full(), tfag.DEFAULT_SCHEDULE)
    H = tfag.standard_presentation(tfag.GroupSpec.full())
    assert {G.element(n) for n in range(400)} == {H.element(n) for n in range(400)}
    ctx = OracleContext(G)
    for c in tfag.DEFAULT_SCHEDULE:
        assert not brute_independent(ctx, (c.base, c.dependent))


def test_scramble_cl_flips_after_reveal():
    G = tfag.scrambled_presentation(tfag.GroupSpec.full(), tfag.DEFAULT_SCHEDULE)
    cl = tfag.closure_approx(G)
    c = tfag.DEFAULT_SCHEDULE[0]
    assert not cl.member(c.dependent, (c.base,), c.reveal)
    assert cl.member(c.dependent, (c.base,), 2 * c.reveal)


def test_dependent_witness_keeps_the_formula():
    cs = [unit(0)]
    a = unit(3)
    psi = parse("(exists (y0) (and (R0 x x y0) (not (R1 x)) (not (= x c0))))")
    b, w = tfag.dependent_witness(cs, a, psi, {"y0": vscale(a, 2)})
    assert Echelon(cs).contains(b)
    assert eval_on_values(psi.matrix, {"c0": cs[0], "x": b, **w})


def test_dependent_witness_non_divisible_searches():
    G = tfag.standard_presentation(tfag.GroupSpec.cyclic([[2], []]))
    cs = [unit(0)]
    psi = parse("(exists (y0) (and (R0 y0 y0 x) (not (R1 x))))")
    # x = 2y, with x independent of c0: the search has to find y itself
    b, w = tfag.dependent_witness(cs, vscale(unit(1), 2), psi, structure=G)
    assert Echelon(cs).contains(b)
    assert eval_on_values(psi.matrix, {"c0": cs[0], "x": b, **w})


def test_local_indist_witness_maps_into_closures():
    cs = [unit(0)]
    us = [unit(1), unit(2)]
    vs = [unit(5), vadd(unit(6), unit(0))]
    phi = parse("(exists (y0) (and (R0 u0 u1 y0) (not (R1 y0))))")
    ws, wit = tfag.local_indist_witness(cs, us, vs, phi, {"y0": vadd(us[0], us[1])}, divisible=True)
    assert Echelon(cs + ws).rank == 3
    assert Echelon(cs + vs[:1]).contains(ws[0])
    assert Echelon(cs + vs).contains(ws[1])
    assert eval_on_values(phi.matrix, {"c0": cs[0], "u0": ws[0], "u1": ws[1], **wit})


def test_certificate_round_trip_and_check():
    cs = [unit(0)]
    us = [unit(1)]
    phi = parse("(exists (y0) (and (R0 u0 c0 y0) (not (= y0 u0))))")
    cert = tfag.certificate_from_values(cs, us, {"y0": vadd(unit(0), unit(1))})
    assert tfag.certificate_check(cert, phi)
    again = tfag.PartialSubgroupCertificate.from_json(cert.to_json())
    assert again == cert
    # a certificate whose tuple is not independent over c̄ is rejected
    bad = tfag.certificate_from_values(cs, [vscale(unit(0), 3)], {"y0": vscale(unit(0), 4)})
    assert not tfag.certificate_check(bad, phi)


def test_malformed_certificate():
    with pytest.raises(tfag.MalformedCertificate):
        tfag.PartialSubgroupCertificate.from_json({"g": []})


def test_semidecide_finds_and_misses():
    G = tfag.standard_presentation(tfag.GroupSpec.full())
    yes = tfag.indep_diagram_semidecide(G, (0,), parse("(exists (y0) (and (R0 u0 u0 y0) (not (R1 u0))))"), 64)
    assert yes and brute_independent(OracleContext(G), yes.found, (0,))
    # every element is dependent over itself, so this never succeeds
    no = tfag.indep_diagram_semidecide(G, (0,), parse("(exists () (= u0 c0))"), 64)
    assert not no and no.steps == 64


def test_condition_g_oracle():
    G = tfag.standard_presentation(tfag.GroupSpec.full())
    orc = tfag.GroupConditionG(G)
    assert orc.tuple_independent((0, 2, 4))
    assert not orc.tuple_independent((0, 3))
