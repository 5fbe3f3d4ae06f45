import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistmatch.algebra import ExtField, PolyModP, is_prime
from twistmatch.curves import (
    CurveOverFq,
    EllipticCurveOverK,
    LocalData,
    count_points,
    count_points_naive,
    hasse_bound,
    local_data,
    local_data_from_traces,
    reduce_curve,
    synthetic_local_data,
)
from twistmatch.errors import BadReduction, BudgetExceeded
from twistmatch.lseries import gaussian_example
from twistmatch.numberfield import NumberField, PrimeIdeal, rational_field, split_prime


def brute_count(a: int, b: int, p: int) -> int:
    """Affine solutions of y^2 = x^3 + a x + b over F_p plus infinity."""
    return 1 + sum(1 for x in range(p) for y in range(p) if (y * y - x**3 - a * x - b) % p == 0)


def test_gaussian_counts_at_five():
    K, E, _ = gaussian_example()
    P1, P2 = split_prime(K, 5)
    # θ = 3 at (5, x+2) and θ = 2 at (5, x+3)
    assert count_points(reduce_curve(E, P1)) == brute_count(3, 0, 5) == 10
    assert count_points(reduce_curve(E, P2)) == brute_count(2, 0, 5) == 2
    (P3,) = split_prime(K, 3)
    C = reduce_curve(E, P3)
    assert count_points(C) == count_points_naive(C)


def test_parse_curve():
    K = NumberField.parse("x^2+1")
    E = EllipticCurveOverK.parse(K, "y^2 = x^3 + (θ)x + (0)")
    assert E == EllipticCurveOverK.from_coeffs(K, K.theta, 0)
    E2 = EllipticCurveOverK.parse(K, "y^2 = x^3 + (2θ+1)x + (θ^2)")
    assert E2.b == K(-1)
    with pytest.raises(ValueError):
        EllipticCurveOverK.parse(K, "y^2 = x^3")


@given(st.integers(-20, 20), st.integers(-20, 20), st.sampled_from([3, 5, 7, 11, 13]))
def test_fast_count_matches_brute_force(a, b, p):
    Q = rational_field()
    if (4 * a**3 + 27 * b**2) % p == 0:
        return
    (P,) = split_prime(Q, p)
    E = EllipticCurveOverK.from_coeffs(Q, a, b) if 4 * a**3 + 27 * b**2 else None
    if E is None:
        return
    assert count_points(reduce_curve(E, P)) == brute_count(a, b, p)


@pytest.mark.parametrize("g", [[2, 2, 1], [1, 0, 1]])
def test_extension_count_matches_naive(g):
    F = ExtField(PolyModP(g, 3))
    for a, b in [(1, 1), (2, 0), (F.gen, 1), (1, F.gen)]:
        try:
            C = CurveOverFq(F(a), F(b))
        except BadReduction:
            continue
        assert count_points(C) == count_points_naive(C)


def test_singular_reduction():
    Q = rational_field()
    # 4(-3)^3 + 27 * 2^2 = 0
    with pytest.raises(ValueError):
        E = EllipticCurveOverK.from_coeffs(Q, -3, 2)
    E = EllipticCurveOverK.from_coeffs(Q, 1, 1)  # disc -16 * 31
    (P,) = split_prime(Q, 31)
    with pytest.raises(BadReduction):
        local_data(E, P)


def test_point_budget():
    F = ExtField.prime(1000003)
    with pytest.raises(BudgetExceeded):
        count_points(CurveOverFq(F(1), F(1)))


@given(st.integers(0, 10**6))
def test_twist_duality(seed):
    # N(E) + N(E^c) = 2q + 2 for a nonsquare c
    rng = random.Random(seed)
    p = rng.choice([q for q in range(3, 500) if is_prime(q)])
    F = ExtField.prime(p)
    a, b = rng.randrange(p), rng.randrange(p)
    try:
        C = CurveOverFq(F(a), F(b))
    except BadReduction:
        return
    c = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)
    assert count_points(C) + count_points(C.twist(F(c))) == 2 * p + 2


def test_conjugate_curve_has_conjugate_data():
    K, E, sigma = gaussian_example()
    from twistmatch.numberfield import apply_iso_to_prime

    Es = E.conjugate(sigma)
    for p in (5, 13, 17, 29, 3, 7):
        for P in split_prime(K, p):
            assert local_data(E, P).coeffs == local_data(Es, apply_iso_to_prime(sigma, P)).coeffs


def test_local_data_validation():
    P = PrimeIdeal.synthetic(5, [2, 1])
    with pytest.raises(ValueError):
        LocalData(P, 1, (5, 5))  # |a| > 2 sqrt 5
    with pytest.raises(ValueError):
        LocalData(P, 1, (1, 6))
    D = local_data_from_traces(P, [2, -3])
    assert D.coeffs == (-1, 4, -5, 25)


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_synthetic_data_is_weil_product(seed, d):
    P = PrimeIdeal.synthetic(7, [3, 1])
    D = synthetic_local_data(d, P, seed)
    assert len(D.coeffs) == 2 * d and D.coeffs[-1] == 7**d
    # functional equation symmetry: (a)_(2d - i) = q^(d - i) (a)_i
    for i in range(1, d):
        assert D.coeffs[2 * d - i - 1] == 7 ** (d - i) * D.coeffs[i - 1]
    assert hasse_bound(7) == 5
