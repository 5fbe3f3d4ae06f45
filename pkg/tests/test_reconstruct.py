import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistmatch.algebra import big_z, root_of_unity
from twistmatch.characters import LocalChar
from twistmatch.curves import LocalData, local_data_from_traces, synthetic_local_data
from twistmatch.errors import DegreeMismatch, InconsistentOracle, InductionDataMissing
from twistmatch.harness import (
    CallableOracle,
    HiddenInstance,
    from_curves,
    observably_equivalent,
    random_order_l_instance,
    random_primes,
    random_quadratic_instance,
)
from twistmatch.lseries import char_items, gaussian_example, twisted_product
from twistmatch.numberfield import FieldIso, PrimeIdeal
from twistmatch.reconstruct import (
    OracleSession,
    ReconConfig,
    c_map,
    check_degrees,
    chi_plus_quadratic,
    extract_level_f,
    extreme_char,
    kuhn_matching,
    level_coeff,
    line_circle_solve,
    match_by_ramification_quadratic,
    maximizer_sets,
    q_sets,
    reconstruct_order_l,
    reconstruct_quadratic,
    verify_sigma,
)

FAST = ReconConfig(transport_probes=10)


def test_kuhn_matching_augments():
    adj = {"a": [1, 2], "b": [1]}
    assert kuhn_matching(["a", "b"], adj) == {"a": 2, "b": 1}
    assert len(kuhn_matching(["a", "b"], {"a": [1], "b": [1]})) == 1


def test_level_coefficients_and_sets():
    P1 = PrimeIdeal.synthetic(7, [1, 1])
    P2 = PrimeIdeal.synthetic(7, [1, 0, 1])
    D1 = local_data_from_traces(P1, [1, 2])  # coeffs (3, 16, 21, 49)
    D2 = LocalData(P2, 2, (0, -7, 0, 2401))
    assert [level_coeff(D1, f) for f in range(1, 6)] == [3, 16, 21, 49, 0]
    assert [level_coeff(D2, f) for f in range(1, 6)] == [0, 0, 0, -7, 0]
    qs = q_sets([D1, D2], 4)
    assert set(qs.Q) == {P1, P2} and qs.plus == (P1,) and qs.minus == (P2,)
    assert qs.lower == (P1,)


@given(st.integers(-6, 6), st.integers(-6, 6), st.sampled_from([3, 5, 7]))
def test_line_circle_only_at_z(a, A, l):
    sols = line_circle_solve(a, A, l)
    if a == 0:
        assert sols == ([k for k in range(1, l)] if A == 0 else [])
    else:
        assert sols == ([1] if A == a else [])


def _level_setup(seed, l=5, d=2):
    rng = random.Random(seed)
    primes = random_primes(11, [1, 1, 2], rng)
    return rng, [synthetic_local_data(d, P, rng) for P in primes]


@given(st.integers(0, 10**6))
def test_extract_level_recovers_c(seed):
    # [T^f] of the full factor minus the truncated lower product gives sum_(Q_f) chi^(f/f_P) a
    l = 5
    rng, datas = _level_setup(seed, l)
    chi = LocalChar.from_values(l, {D.prime: rng.randrange(l) for D in datas})
    triv = LocalChar.trivial([D.prime for D in datas], l)
    for f in range(1, 5):
        S1 = extract_level_f(twisted_product(char_items(datas, triv), l), char_items(datas, triv), f, l)
        Sc = extract_level_f(twisted_product(char_items(datas, chi), l), char_items(datas, chi), f, l)
        assert S1 - Sc == c_map(datas, chi, f)


def test_perturbed_induction_data_is_detected():
    l = 5
    rng, datas = _level_setup(11, l)
    chi = LocalChar.from_values(l, {D.prime: rng.randrange(1, l) for D in datas})
    f = 2
    poly = twisted_product(char_items(datas, chi), l)
    good = extract_level_f(poly, char_items(datas, chi), f, l)
    bad_items = [(D.inertia, (D.coeffs[0] + 1,) + D.coeffs[1:], chi.exponent(D.prime)) for D in datas]
    assert extract_level_f(poly, bad_items, f, l) != good
    with pytest.raises(InductionDataMissing):
        extract_level_f(poly, [(1, (None, 5), 0)], 2, l)
    with pytest.raises(InductionDataMissing):
        extract_level_f(poly, None, 2, l)


@pytest.mark.parametrize("seed", range(5))
def test_maximizer_sets_agree(seed):
    rng = random.Random(seed)
    primes = random_primes(11, [1, 1, 1], rng)
    datas = [LocalData(P, 1, (rng.choice([-3, -1, 0, 2, 4]), 11)) for P in primes]
    argmax, characterised = maximizer_sets(datas, 1, 5)
    assert argmax == characterised
    chi = extreme_char(datas, 1, 5, 1)
    assert chi.exps in argmax


def test_chi_plus_signs():
    primes = random_primes(7, [1, 1, 1], random.Random(0))
    datas = [LocalData(P, 1, (a, 7)) for P, a in zip(primes, (3, -2, 0))]
    chi = chi_plus_quadratic(datas)
    assert [chi.value(P) for P in primes] == [1, -1, 1]


def test_gaussian_recovery_matches_conjugation():
    K, E, sigma = gaussian_example()
    Es = E.conjugate(sigma)
    inst = from_curves(E, Es, sigma, 5)
    match = reconstruct_quadratic(inst.known, inst)
    assert {str(m.left): str(m.right) for m in match.pairs} == {"(5, x+2)": "(5, x+3)", "(5, x+3)": "(5, x+2)"}
    assert verify_sigma(sigma, match)
    assert not verify_sigma(FieldIso.identity(K), match)
    assert all(m.transport_verified for m in match.pairs)
    js = match.to_json()
    assert set(js) == {"p", "pairs", "undetermined"}
    assert set(js["pairs"][0]) == {"left", "right", "f", "coeffs", "collision", "transport_verified"}


def test_gaussian_order_l_recovery():
    K, E, sigma = gaussian_example()
    inst = from_curves(E, E.conjugate(sigma), sigma, 13, order=5)
    match = reconstruct_order_l(inst.known, inst, 5, FAST)
    assert verify_sigma(sigma, match)
    assert match.cross_level_checks > 0


@pytest.mark.parametrize("seed", range(20))
def test_quadratic_round_trip(seed):
    rng = random.Random(seed)
    inst = random_quadratic_instance(rng)
    match = reconstruct_quadratic(inst.known, inst, FAST)
    data = {D.prime: D for D in inst.known}
    for m in match.pairs:
        assert data[m.left].a != 0
        assert m.right == inst.phi[m.left] or m.collision
    assert {m.left for m in match.undetermined} == {P for P, D in data.items() if D.a == 0}
    assert observably_equivalent(inst, match, rng)


def test_scrambled_zero_primes_are_undetermined():
    rng = random.Random(5)
    primes = random_primes(13, [1, 1, 1], rng)
    hidden = random_primes(13, [1, 1, 1], rng)
    known = (LocalData(primes[0], 1, (3, 13)), LocalData(primes[1], 1, (0, 13)), LocalData(primes[2], 1, (0, 13)))
    phi = dict(zip(primes, hidden))
    hid = tuple(LocalData(phi[D.prime], 1, D.coeffs) for D in known)
    inst = HiddenInstance(13, 2, known, hid, phi, scramble={primes[1]: primes[0]})
    match = reconstruct_quadratic(inst.known, inst, FAST)
    assert [m.left for m in match.pairs] == [primes[0]]
    assert {m.left for m in match.undetermined} == {primes[1], primes[2]}
    assert observably_equivalent(inst, match, rng)


@pytest.mark.parametrize("seed", range(12))
def test_order_l_round_trip(seed):
    rng = random.Random(seed)
    inst = random_order_l_instance(rng)
    match = reconstruct_order_l(inst.known, inst, inst.order, FAST)
    hidden = inst.hidden_data()
    for m in match.pairs:
        assert hidden[m.right].coeffs == m.coeffs
        assert m.right == inst.phi[m.left] or m.collision
    assert observably_equivalent(inst, match, rng)


def _corrupt(inst, index, coeffs):
    hidden = list(inst.hidden)
    D = hidden[index]
    hidden[index] = LocalData(D.prime, D.dim, coeffs)
    return HiddenInstance(inst.p, inst.order, inst.known, tuple(hidden), inst.phi, split_companion=inst.split_companion)


def test_inconsistent_hidden_data_quadratic():
    inst = random_quadratic_instance(random.Random(8), zero_rate=0)
    D = inst.hidden[0]
    a = D.a - 1 if D.a > 0 else D.a + 1
    with pytest.raises(InconsistentOracle):
        reconstruct_quadratic(inst.known, _corrupt(inst, 0, (a, D.coeffs[1])), FAST)


def test_inconsistent_second_level_order_l():
    # same (a)_1 but different (a)_2: the first level passes, the second fails
    rng = random.Random(2)
    P = random_primes(11, [1], rng)[0]
    Q = random_primes(11, [1], rng)[0]
    known = (local_data_from_traces(P, [1, 3]),)
    inst = HiddenInstance(11, 5, known, (local_data_from_traces(Q, [1, 3]),), {P: Q})
    comp_known = (local_data_from_traces(P, [0, 0]),)
    inst.split_companion = (comp_known, HiddenInstance(11, 5, comp_known, (local_data_from_traces(Q, [0, 0]),), {P: Q}))
    reconstruct_order_l(inst.known, inst, 5, FAST)
    bad = _corrupt(inst, 0, local_data_from_traces(Q, [2, 2]).coeffs)
    assert bad.hidden[0].coeffs[0] == known[0].coeffs[0]
    with pytest.raises(InconsistentOracle):
        reconstruct_order_l(bad.known, bad, 5, FAST)


def test_missing_companion():
    inst = random_order_l_instance(random.Random(1), l=5, d=1)
    inst.split_companion = None
    with pytest.raises(InductionDataMissing):
        reconstruct_order_l(inst.known, inst, 5, FAST)


def test_l_must_exceed_2d():
    inst = random_order_l_instance(random.Random(1), l=5, d=2)
    with pytest.raises(ValueError):
        reconstruct_order_l(inst.known, inst, 3, FAST)


def _dimension_mismatch_oracle():
    """Known: two primes with d = 2.  Hidden: four primes with d = 1, same product of Weil factors."""
    rng = random.Random(0)
    p = 11
    kp = random_primes(p, [1, 1], rng)
    hp = random_primes(p, [1, 1, 1, 1], rng)
    traces = [(1, -2), (3, 0)]
    known = tuple(local_data_from_traces(P, t) for P, t in zip(kp, traces))
    hidden = tuple(local_data_from_traces(q, [t]) for q, t in zip(hp, [1, -2, 3, 0]))
    owner = {hp[0]: kp[0], hp[1]: kp[0], hp[2]: kp[1], hp[3]: kp[1]}

    def forward(chi):
        values = {q: chi.exponent(owner[q]) for q in hp}
        psi = LocalChar.from_values(chi.order, values)
        return twisted_product(char_items(hidden, psi), chi.order)

    def reverse(chi):
        values = {P: chi.exponent(hp[0] if P == kp[0] else hp[2]) for P in kp}
        back = LocalChar.from_values(chi.order, values)
        return twisted_product(char_items(known, back), chi.order)

    oracle = CallableOracle(p, 2, tuple(hp), 8, forward, reverse)
    return known, oracle


def test_dimension_mismatch_detected():
    known, oracle = _dimension_mismatch_oracle()
    # the untwisted factors agree
    triv = LocalChar.trivial([D.prime for D in known], 2)
    assert oracle.factor_query(triv).poly == twisted_product(char_items(known, triv), 2)
    with pytest.raises(DegreeMismatch):
        check_degrees(oracle, known)
    with pytest.raises(DegreeMismatch):
        reconstruct_quadratic(known, oracle)


def test_trivial_degree_mismatch():
    inst = random_quadratic_instance(random.Random(4))
    oracle = CallableOracle(inst.p, 2, inst.hidden_primes, inst.trivial_degree + 2, lambda c: inst.factor_query(c).poly, lambda c: inst.reverse_factor_query(c).poly)
    with pytest.raises(DegreeMismatch):
        check_degrees(oracle, inst.known)


def test_session_degree_bookkeeping():
    inst = random_quadratic_instance(random.Random(6), zero_rate=0)
    lying = CallableOracle(
        inst.p, 2, inst.hidden_primes, inst.trivial_degree,
        lambda c: inst.factor_query(LocalChar.trivial(c.primes, 2)).poly,
        lambda c: inst.reverse_factor_query(c).poly,
    )
    s = OracleSession(lying, inst.known, 2)
    P = inst.known_primes[0]
    with pytest.raises(InconsistentOracle):
        s.forward(s.known_char({P: None}))


def test_sum_of_inertia_mismatch():
    rng = random.Random(0)
    kp = random_primes(7, [1, 1], rng)
    hp = random_primes(7, [2], rng)
    known = tuple(LocalData(P, 1, (2, 7)) for P in kp)
    hidden = (LocalData(hp[0], 1, (4, 49)),)
    oracle = CallableOracle(7, 2, tuple(hp), 4, lambda c: twisted_product(char_items(hidden, LocalChar.trivial(hp, 2)), 2), lambda c: (1,))
    s = OracleSession(oracle, known, 2)
    assert s.n == s.n_hidden == 2
    with pytest.raises(InconsistentOracle):
        match_by_ramification_quadratic(s)
