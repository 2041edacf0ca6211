import pytest

from malcev.formulas import And, Atom, Eq, ExistFormula, Not, canonical, parse, serialize
from malcev.groups import ADD, GROUP_SIGNATURE, ZERO_REL
from malcev.presentation import (
    ExplicitFragment,
    PreconditionError,
    atomic_diagram_formula,
    compose,
    eval_exists_bounded,
    eval_qf,
    find_witness,
    fragment_from_csv,
    is_partial_isomorphism,
    pullback,
)


def test_parse_roundtrip():
    text = "(exists (y0) (and (R0 x y0 z) (not (= x z))))"
    assert serialize(parse(text)) == text


def test_canonical_renames_by_occurrence():
    a = parse("(exists (q) (R0 p q p))")
    b = parse("(exists (w) (R0 v w v))")
    assert canonical(a) == canonical(b)


def test_empty_and_is_true(qgroup):
    F = qgroup.fragment(3)
    assert eval_qf(F, And(()), {})


def test_fragment_zero_and_sums(qgroup):
    F = qgroup.fragment(8)
    zero = [e for e in range(8) if F.holds(ZERO_REL, (e,))]
    assert zero == [1]
    # e0 + (-e0) = 0
    assert F.holds(ADD, (0, 3, 1))
    assert not F.holds(ADD, (0, 0, 0))


def test_fragment_rejects_outside_elements(qgroup):
    F = qgroup.fragment(4)
    assert not F.holds(ADD, (0, 3, 9))
    with pytest.raises(PreconditionError):
        eval_qf(F, Atom(ADD, ("a", "a", "a")), {"a": 7})


def test_bounded_witness(qgroup):
    F = qgroup.fragment(12)
    phi = ExistFormula(("y",), And((Atom(ADD, ("x", "x", "y")),)))
    # 2·e0 has index 7
    assert find_witness(F, phi, {"x": 0}, 12) == {"y": 7}
    assert not eval_exists_bounded(F, phi, {"x": 2}, 12)


def test_bound_larger_than_fragment(qgroup):
    F = qgroup.fragment(4)
    phi = ExistFormula(("y",), Eq("x", "y"))
    with pytest.raises(PreconditionError):
        eval_exists_bounded(F, phi, {"x": 0}, 5)


def test_pullback_and_partial_iso(qgroup):
    F = qgroup.fragment(12)
    tau = [0, 3, 1, 7]
    P = pullback(F, tau)
    assert P.holds(ADD, (0, 1, 2))
    assert is_partial_isomorphism(P, F, dict(enumerate(tau)))
    assert not is_partial_isomorphism(P, F, {0: 0, 1: 2, 2: 1, 3: 7})


def test_pullback_needs_initial_segment(qgroup):
    with pytest.raises(PreconditionError):
        pullback(qgroup.fragment(5), {1: 0})
    with pytest.raises(PreconditionError):
        pullback(qgroup.fragment(5), [0, 0])


def test_csv_roundtrip(qgroup):
    F = qgroup.fragment(9)
    G = fragment_from_csv(GROUP_SIGNATURE, 9, F.to_csv(), F.nrel)
    assert G.facts == F.facts


def test_atomic_diagram_holds_in_its_own_fragment(qgroup):
    F = qgroup.fragment(4)
    phi = atomic_diagram_formula(F, ([0, 1], [2], [3]))
    assert eval_qf(F, phi, {"c0": 0, "c1": 1, "v0": 2, "u0": 3})
    assert not eval_qf(F, phi, {"c0": 0, "c1": 1, "v0": 3, "u0": 2})


def test_compose():
    assert compose({0: 5, 1: 6}, {3: 1, 4: 9}) == {3: 6}


def test_explicit_fragment_validates():
    with pytest.raises(ValueError):
        ExplicitFragment(GROUP_SIGNATURE, 2, {(ADD, (0, 1, 2))})


def test_negated_atom_uses_scan(qgroup):
    F = qgroup.fragment(10)
    phi = ExistFormula(("y",), And((Not(Atom(ADD, ("x", "y", "y"))),)))
    # x + y = y fails for every y once x is not zero
    assert eval_exists_bounded(F, phi, {"x": 0}, 10)
    assert not eval_exists_bounded(F, phi, {"x": 1}, 10)
