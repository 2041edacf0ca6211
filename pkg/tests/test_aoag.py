import math
import random
from fractions import Fraction

import pytest

from malcev import aoag
from malcev.formulas import parse
from malcev.groups import eval_on_values
from malcev.linalg import Echelon, unit, vadd, vec, vscale, vsub
from malcev.presentation import PreconditionError


def rv(rng, n=4):
    return vec({i: rng.randint(-3, 3) for i in range(n)})


def test_spec_primes():
    spec = aoag.LogGroupSpec((5, 2))
    assert [spec.prime(i) for i in range(4)] == [5, 2, 3, 7]
    assert aoag.LogGroupSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        aoag.LogGroupSpec((4,))


def test_compare_matches_floats_on_small_values():
    rng = random.Random(3)
    for _ in range(300):
        x, y = rv(rng), rv(rng)
        fx = sum(float(a) * math.log(aoag.nth_prime(i)) for i, a in x)
        fy = sum(float(a) * math.log(aoag.nth_prime(i)) for i, a in y)
        if abs(fx - fy) > 1e-9:
            assert aoag.compare(x, y) == (1 if fx > fy else -1)


def test_sign_exact_on_huge_exponents():
    # ln(2^a 3^-b) with a/b close to ln3/ln2; the estimate has to defer to exact arithmetic
    a, b = 1054, 665
    x = vec({0: a, 1: -b})
    assert aoag.sign(x) == (1 if 2**a > 3**b else -1)
    assert aoag.sign(vscale(x, 1000)) == aoag.sign(x)


def test_sign_rejects_fractions():
    with pytest.raises(PreconditionError):
        aoag.sign(vec({0: Fraction(1, 2)}))


def test_density_witness_lands_inside():
    rng = random.Random(4)
    gens = [unit(0), unit(1)]
    for _ in range(20):
        lo = rv(rng, 5)
        hi = vadd(lo, vec({25: 1, 0: -2, 2: -2}))  # ln 1.01
        d = aoag.density_witness(gens, lo, hi)
        assert aoag.compare(lo, d.element) < 0 < aoag.compare(hi, d.element)
        assert Echelon(gens).contains(d.element)


def test_density_needs_an_interval():
    with pytest.raises(PreconditionError):
        aoag.density_witness([unit(0), unit(1)], unit(1), unit(0))


def test_archimedean_multiple():
    x, y = unit(0), unit(7)
    n = aoag.archimedean_multiple(x, y)
    assert aoag.compare(vscale(x, n), y) > 0
    assert aoag.compare(vscale(x, n - 1), y) <= 0


def test_presentation_order_is_consistent():
    G = aoag.standard_presentation()
    assert aoag.order_consistent(G.fragment(14))


def test_dependent_witness_respects_order():
    cs = [unit(0), unit(1)]
    a = unit(4)
    psi = parse("(exists (y0) (and (R0 x x y0) (R2 c0 x) (R2 c1 x) (R2 x y0)))")
    b, w = aoag.dependent_witness(cs, a, psi, {"y0": vscale(a, 2)})
    assert Echelon(cs).contains(b)
    assert eval_on_values(psi.matrix, {"c0": cs[0], "c1": cs[1], "x": b, **w}, aoag.less())


def test_ordered_certificate_round_trip():
    cs = [unit(0)]
    us = [unit(1)]
    phi = parse("(exists (y0) (and (R0 u0 c0 y0) (R2 c0 u0)))")
    cert = aoag.ordered_certificate_from_values(cs, us, {"y0": vadd(unit(0), unit(1))})
    assert aoag.ordered_certificate_check(cert, phi)
    assert aoag.OrderedCertificate.from_json(cert.to_json()) == cert
    flipped = parse("(exists (y0) (and (R0 u0 c0 y0) (R2 u0 c0)))")
    assert not aoag.ordered_certificate_check(cert, flipped)


def test_semidecide_and_condition_g():
    G = aoag.standard_presentation()
    res = aoag.indep_diagram_semidecide(G, (0,), parse("(exists () (R2 c0 u0))"), 64)
    assert res
    u = G.element(res.found[0])
    assert aoag.compare(G.element(0), u) < 0
    orc = aoag.LogConditionG(G)
    assert orc.tuple_independent((res.found[0], 0)) == (Echelon([u, G.element(0)]).rank == 2)
    assert orc.injury_map(5, (), (), ()) is None


def test_one_percent_gap_value():
    onepct = vsub(unit(25), vec({0: 2, 2: 2}))
    assert aoag.nth_prime(25) == 101
    assert abs(float(aoag.approx(onepct)) - math.log(1.01)) < 1e-12
