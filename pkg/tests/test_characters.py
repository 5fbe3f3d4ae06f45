import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistmatch.algebra import root_of_unity
from twistmatch.characters import (
    ConcreteQuadChar,
    LocalChar,
    extra_iso_psi,
    is_l_admissible,
    p_free_part,
    prescribe_order_2,
    prescribe_order_l,
)
from twistmatch.errors import AdmissibilityError
from twistmatch.numberfield import NumberField, PrimeIdeal, rational_field, split_prime

QI = NumberField.parse("x^2+1")
P11 = [PrimeIdeal.synthetic(11, [c, 1]) for c in (1, 2, 3)]
P7_INERT = PrimeIdeal.synthetic(7, [1, 0, 1])


def char_st(order, primes):
    n = len(primes)
    bits = st.lists(st.integers(0, order - 1), min_size=n, max_size=n)
    ram = st.lists(st.integers(0, 1), min_size=n, max_size=n) if order == 2 else st.just([0] * n)
    return st.builds(lambda r, e: LocalChar(order, tuple(primes), tuple(r), tuple(e)), ram, bits)


@given(char_st(2, P11), char_st(2, P11), char_st(2, P11))
def test_quadratic_group_law(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * a == LocalChar.trivial(P11, 2)
    assert a.inverse() == a


@given(char_st(5, P11), char_st(5, P11))
def test_order_l_group_law(a, b):
    assert (a * b).value(P11[0]) == a.value(P11[0]) * b.value(P11[0])
    assert a**5 == LocalChar.trivial(P11, 5)
    assert a * a.inverse() == LocalChar.trivial(P11, 5)


def test_admissibility():
    assert is_l_admissible(P11[0], 5)  # 11 = 1 mod 5
    assert not is_l_admissible(P11[0], 7)
    assert not is_l_admissible(P7_INERT, 3)
    assert is_l_admissible(P7_INERT, 2)
    with pytest.raises(AdmissibilityError):
        LocalChar.from_values(7, {P11[0]: None})
    # unramified values are always allowed
    assert LocalChar.from_values(7, {P11[0]: 3}).value(P11[0]) == root_of_unity(7, 3)


def test_prescribed_values():
    chi = prescribe_order_2(P11, [0, 1, -1])
    assert [chi.value(P) for P in P11] == [0, 1, -1]
    psi = prescribe_order_l(P11, [0, 2, 4], 5)
    assert psi.value(P11[2]) == root_of_unity(5, 4)
    with pytest.raises(ValueError):
        prescribe_order_2(P11, [2, 0, 0])


def test_parse_and_render():
    P1, P2 = split_prime(QI, 5)
    chi = LocalChar.parse_values(2, [P1, P2], ["0", "+1"])
    assert chi.to_json() == [{"prime": "(5, x+2)", "value": "0"}, {"prime": "(5, x+3)", "value": "+1"}]
    psi = LocalChar.parse_values(5, [P1, P2], ["zeta^2", "1"])
    assert psi.exponent(P1) == 2 and psi.exponent(P2) == 0
    with pytest.raises(ValueError):
        LocalChar.parse_values(5, [P1, P2], ["-1", "1"])


@given(st.integers(-30, 30).filter(bool), st.integers(-30, 30).filter(bool), st.sampled_from([5, 13, 17, 29, 37, 41]))
def test_concrete_quadratic_is_multiplicative(d1, d2, p):
    for P in split_prime(QI, p):
        c1, c2, c12 = (ConcreteQuadChar(QI, QI(d)) for d in (d1, d2, d1 * d2))
        assert c12(P) == c1(P) * c2(P)


def test_concrete_character_over_q_is_legendre():
    Q = rational_field()
    chi = ConcreteQuadChar(Q, Q(3))
    values = [chi(split_prime(Q, p)[0]) for p in (3, 5, 7, 11, 13)]
    assert values == [0, -1, -1, 1, 1]


def test_extra_iso_psi():
    assert p_free_part(50, 5) == 2
    # 2 and 3 are nonsquares mod 5, 6 = 1 is a square, -1 = 4 is a square
    assert [extra_iso_psi(d, 5) for d in (1, -1, 2, 3, 5, 6)] == [1, -1, -2, -3, 5, 6]
    with pytest.raises(ValueError):
        extra_iso_psi(2, 7)


@given(st.integers(-40, 40).filter(bool), st.integers(-40, 40).filter(bool))
def test_extra_iso_psi_is_homomorphism_on_square_classes(d1, d2):
    # psi(d1 d2) = psi(d1) psi(d2) up to squares, checked through the sign
    s = lambda d: extra_iso_psi(d, 5) // d
    assert s(d1 * d2) == s(d1) * s(d2)
