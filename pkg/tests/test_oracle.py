from malcev.formulas import parse
from malcev.oracle import (
    NO_AT_BOUND,
    YES,
    OracleContext,
    brute_cl,
    brute_dependent,
    brute_indep_diagram,
    brute_independent,
    omega_least_basis,
)


def test_rank_tests(qgroup):
    ctx = OracleContext(qgroup)
    # even indices are the generators, index 1 is zero
    assert brute_independent(ctx, (0, 2, 4))
    assert brute_dependent(ctx, (1,))
    assert brute_dependent(ctx, (0, 3))
    assert brute_independent(ctx, (2,), over=(0,))
    assert not brute_independent(ctx, (3,), over=(0,))


def test_closure(qgroup):
    ctx = OracleContext(qgroup)
    assert brute_cl(ctx, 3, (0,))
    assert brute_cl(ctx, 1, ())
    assert not brute_cl(ctx, 2, (0,))
    assert not brute_cl(ctx, 3, (0,), bound=3)


def test_omega_least_basis(qgroup, nondiv):
    assert omega_least_basis(OracleContext(qgroup), 4) == [0, 2, 4, 6]
    assert omega_least_basis(OracleContext(nondiv), 3)[0] == 0


def test_indep_diagram(qgroup):
    ctx = OracleContext(qgroup)
    assert brute_indep_diagram(ctx, (0,), parse("(exists (y0) (R0 u0 y0 u0))"), 10) == YES
    assert brute_indep_diagram(ctx, (0,), parse("(exists () (= u0 c0))"), 10) == NO_AT_BOUND
    assert brute_indep_diagram(ctx, (12,), parse("(exists () (R1 u0))"), 10) == NO_AT_BOUND


def test_ordered_indep_diagram(loggroup):
    ctx = OracleContext(loggroup, "aoag")
    assert brute_indep_diagram(ctx, (0,), parse("(exists () (R2 c0 u0))"), 10) == YES
