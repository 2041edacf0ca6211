import random

import pytest

from malcev import aoag, tfag
from malcev.oracle import OracleContext, brute_cl, omega_least_basis
from malcev.pregeometry import BudgetExhausted, basis_from_closure, dependence_from_basis
from malcev.zdep import ZDependenceFamily


def test_accelerator_matches_formula_evaluation(qgroup):
    # the accelerator must give exactly the generic cl_t answers
    fast = tfag.closure_approx(qgroup)
    slow = tfag.closure_approx(qgroup, accelerate=False)
    rng = random.Random(11)
    for _ in range(60):
        x = rng.randrange(10)
        Y = tuple(rng.sample(range(10), rng.randint(0, 2)))
        t = rng.randrange(1, 40)
        assert fast.member(x, Y, t) == slow.member_generic(x, Y, t), (x, Y, t)


def test_accelerator_matches_on_log_group(loggroup):
    fast = aoag.closure_approx(loggroup)
    slow = aoag.closure_approx(loggroup, accelerate=False)
    rng = random.Random(5)
    for _ in range(40):
        x = rng.randrange(10)
        Y = tuple(rng.sample(range(10), rng.randint(0, 2)))
        t = rng.randrange(1, 30)
        assert fast.member(x, Y, t) == slow.member_generic(x, Y, t), (x, Y, t)


def test_cl_is_sound_and_monotone(qgroup):
    cl = tfag.closure_approx(qgroup)
    ctx = OracleContext(qgroup)
    for x in range(8):
        for Y in [(), (0,), (2,), (0, 2)]:
            seen = False
            for t in range(0, 200, 7):
                m = cl.member(x, Y, t)
                assert not (seen and not m)
                seen = m
                if m:
                    assert brute_cl(ctx, x, Y)


def test_zero_and_self_in_closure(qgroup):
    cl = tfag.closure_approx(qgroup)
    assert cl.threshold(1, (), 100) is not None
    assert cl.threshold(4, (4,), 100) is not None


def test_least_span_is_omega_least_basis_on_standard(qgroup):
    cl = tfag.closure_approx(qgroup)
    ns = cl.least_span_witnesses(400, 4).elements
    assert list(ns) == omega_least_basis(OracleContext(qgroup), 5)


def test_dependence_from_basis_small(qgroup):
    cl = tfag.closure_approx(qgroup)
    basis = omega_least_basis(OracleContext(qgroup), 12)
    assert dependence_from_basis(basis, (0, 2), cl) is False
    assert dependence_from_basis(basis, (0, 3), cl) is True
    assert dependence_from_basis(basis, (1,), cl) is True
    assert dependence_from_basis(basis, (4, 4), cl) is True


def test_dependence_from_basis_budget(qgroup):
    cl = tfag.closure_approx(qgroup)
    basis = omega_least_basis(OracleContext(qgroup), 12)
    with pytest.raises(BudgetExhausted):
        dependence_from_basis(basis, (10, 11), cl, budget=1)


def test_basis_from_closure_greedy():
    # decider on plain integers: a set is dependent when it holds two numbers of the same parity
    gen = basis_from_closure(lambda X: len({x % 2 for x in X}) < len(X))
    assert [next(gen) for _ in range(2)] == [0, 1]


def test_family_formulas_are_existential():
    fam = ZDependenceFamily()
    for i in range(50):
        phi = fam.formula(i)
        assert "x" in phi.free()
        assert fam.arity_of(i) >= 0
