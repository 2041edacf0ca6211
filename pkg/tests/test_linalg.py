import random
from fractions import Fraction

from malcev.linalg import (
    Echelon,
    coordinates,
    det,
    integer_relation,
    lattice_basis,
    matmul,
    smith_normal_form,
    unit,
    vadd,
    vec,
    vscale,
)


def test_vector_arithmetic_cancels():
    a = vec({0: 1, 3: Fraction(1, 2)})
    assert vadd(a, vscale(a, -1)) == ()


def test_echelon_rank_and_express():
    e = Echelon([unit(0), unit(1), vadd(unit(0), unit(1))])
    assert e.rank == 2
    assert e.contains(vec({0: 3, 1: -2}))
    assert not e.contains(unit(2))


def test_integer_relation():
    assert integer_relation(vec({0: 2, 1: 2}), [unit(0), unit(1)]) == (1, [2, 2])
    assert integer_relation(vec({0: Fraction(1, 2)}), [unit(0)]) == (2, [1])
    assert integer_relation(unit(2), [unit(0)]) is None


def test_smith_normal_form_random():
    rng = random.Random(3)
    for _ in range(30):
        a = [[rng.randint(-5, 5) for _ in range(3)] for _ in range(4)]
        u, d, v = smith_normal_form(a)
        assert matmul(matmul(u, a), v) == d
        diag = [d[i][i] for i in range(3)]
        assert all(x >= 0 for x in diag)
        assert all(diag[i + 1] % diag[i] == 0 for i in range(2) if diag[i])
        assert abs(det(u)) == 1 and abs(det(v)) == 1


def test_lattice_basis_spans():
    vs = [vec({0: 2}), vec({0: 3}), vec({1: Fraction(1, 2)})]
    b = lattice_basis(vs)
    assert len(b) == 2
    for v in vs:
        c = coordinates(v, b)
        assert c is not None and all(x.denominator == 1 for x in c)
