import random
from fractions import Fraction

import pytest

from nonarch.errors import DivisionError, IntegrityError, LevelError, PrecisionError
from nonarch.field import FieldElement, FieldParams, Valuation, make_element, teichmuller
from nonarch.series import TateSeries
from nonarch.tilt import (
    BallIsomorphism,
    TiltElement,
    additive_congruence_check,
    ball_isomorphism,
    digit_lift,
    flat_of_monomial,
    flat_root,
    reduce_patch_relation,
    sharp,
    unit_transfer,
    verify_ball_isomorphism,
)


def char0(p=2, level=3, cap=10):
    return FieldParams(p, 0, level, Fraction(cap))


def test_monomial_sequence_structure():
    q = char0(2, 3)
    x = flat_of_monomial(q, 1, Fraction(1), 2)
    expected = [
        FieldElement.pi_power(q, Fraction(1)),
        FieldElement.pi_power(q, Fraction(1, 2)),
        FieldElement.pi_power(q, Fraction(1, 4)),
    ]
    assert list(x.sequence) == expected
    assert sharp(x) == FieldElement.pi_power(q, Fraction(1))


def test_sharp_of_unit_is_one():
    q = char0(3, 2)
    one = TiltElement.one(q, 2)
    assert sharp(one) == FieldElement.one(q)


def test_sharp_multiplicative_on_monomials():
    q = char0(2, 4, cap=8)
    a = flat_of_monomial(q, 1, Fraction(1, 2), 2)
    b = flat_of_monomial(q, 1, Fraction(1, 2), 2)
    prod = a * b
    assert sharp(prod) == sharp(a) * sharp(b)
    assert sharp(prod) == FieldElement.pi_power(q, Fraction(1))


def test_sharp_multiplicative_random_monomials():
    rng = random.Random(41)
    for p in (2, 3, 5):
        q = FieldParams(p, 0, 3, Fraction(9))
        for _ in range(25):
            d1 = rng.randrange(1, p)
            d2 = rng.randrange(1, p)
            e1 = Fraction(rng.randrange(0, 8), p)
            e2 = Fraction(rng.randrange(0, 8), p)
            depth = rng.randrange(0, 3)
            a = flat_of_monomial(q, d1, e1, depth)
            b = flat_of_monomial(q, d2, e2, depth)
            assert sharp(a * b) == sharp(a) * sharp(b)


def test_teichmuller_constant_sequence():
    # (c = 2 in Q3, e = 0): constant sequence of the square root of unity
    q = FieldParams(3, 0, 2, Fraction(8))
    x = flat_of_monomial(q, 2, Fraction(0), 2)
    w = teichmuller(q, 2)
    assert all(entry == w for entry in x.sequence)
    assert w ** 2 == FieldElement.one(q)
    assert w.residue_digit() == 2


def test_ones_sequence():
    q = char0(5, 2)
    x = flat_of_monomial(q, 1, Fraction(0), 2)
    assert all(entry == FieldElement.one(q) for entry in x.sequence)


def test_depth_exceeds_level():
    q = char0(2, 1)
    with pytest.raises(LevelError):
        flat_of_monomial(q, 1, Fraction(1, 2), 1)


def test_sequence_integrity_enforced():
    q = char0(2, 2)
    good = flat_of_monomial(q, 1, Fraction(1), 1)
    broken = (good.sequence[0], good.sequence[1] + FieldElement.one(q))
    with pytest.raises(IntegrityError):
        TiltElement(q, 1, broken, good.flat_value)


def test_flat_root_and_digit_lift():
    q = char0(2, 2, cap=6)
    fq = q.flat()
    y = make_element(fq, [(Fraction(0), 1), (Fraction(1), 1)])
    r = flat_root(y, 1)
    assert r.digits == {Fraction(0): 1, Fraction(1, 2): 1}
    lifted = digit_lift(y, q)
    assert lifted == FieldElement.one(q) + FieldElement.pi_power(q, Fraction(1))


def test_additive_congruence_identity():
    q = char0(2, 3)
    assert additive_congruence_check(TiltElement.one(q, 2))


def test_additive_congruence_composite():
    # 1 + t-term composite at depth 3, p = 2
    q = char0(2, 3, cap=8)
    fq = q.flat()
    y = make_element(fq, [(Fraction(0), 1), (Fraction(1), 1)])  # 1 + t
    a = TiltElement.from_flat(y, 3, q)
    assert additive_congruence_check(a)


def test_additive_congruence_random():
    rng = random.Random(97)
    for p in (2, 3):
        q = FieldParams(p, 0, 3, Fraction(8))
        fq = q.flat()
        for _ in range(40):
            terms = []
            for _ in range(rng.randrange(1, 4)):
                e = Fraction(rng.randrange(0, 4))
                d = rng.randrange(0, p)
                terms.append((e, d))
            y = make_element(fq, [(Fraction(0), 1)] + terms)
            if y.is_zero():
                continue
            depth = rng.randrange(0, 4 - y.support_level())
            a = TiltElement.from_flat(y, depth, q)
            assert additive_congruence_check(a)


def test_unit_transfer_one():
    q = char0(2, 2)
    b, cert = unit_transfer(FieldElement.one(q))
    assert sharp(b) == FieldElement.one(q)
    assert cert.is_infinite


def test_unit_transfer_teichmuller():
    q = FieldParams(5, 0, 2, Fraction(8))
    w = teichmuller(q, 3)
    b, cert = unit_transfer(w)
    assert sharp(b) == w
    assert cert.is_infinite
    assert b.flat_value == make_element(q.flat(), [(Fraction(0), 3)])


def test_unit_transfer_certificate():
    q = FieldParams(2, 0, 2, Fraction(10))
    a = FieldElement.one(q) + FieldElement.pi_power(q, Fraction(1)) + \
        FieldElement.pi_power(q, Fraction(2))
    b, cert = unit_transfer(a)
    assert cert >= Valuation(Fraction(1))


def test_unit_transfer_random_certificates():
    rng = random.Random(13)
    for p in (2, 3, 5):
        q = FieldParams(p, 0, 2, Fraction(8))
        for _ in range(20):
            terms = [(Fraction(0), rng.randrange(1, p))]
            for _ in range(3):
                terms.append((Fraction(rng.randrange(1, 12), p), rng.randrange(0, p)))
            a = make_element(q, terms)
            b, cert = unit_transfer(a)
            assert cert >= Valuation(Fraction(1))


def test_unit_transfer_requires_unit():
    q = char0(2, 1)
    with pytest.raises(DivisionError):
        unit_transfer(FieldElement.pi_power(q, Fraction(1)))


def test_unit_transfer_residue_bijection():
    # transferring back lands in the same unit class mod 1 + m
    rng = random.Random(71)
    q = FieldParams(3, 0, 2, Fraction(8))
    for _ in range(20):
        terms = [(Fraction(0), rng.randrange(1, 3))]
        for _ in range(2):
            terms.append((Fraction(rng.randrange(1, 9), 3), rng.randrange(0, 3)))
        a = make_element(q, terms)
        b, _ = unit_transfer(a)
        again, cert2 = unit_transfer(sharp(b))
        assert again.flat_value == b.flat_value
        assert cert2 >= Valuation(Fraction(1))


def test_ball_isomorphism_affine_at_level_zero():
    data = ball_isomorphism(2, 0, 12)
    report = verify_ball_isomorphism(data)
    assert report["all_ok"]
    # u(chi) = chi and w(chi) = pi chi + 1 at h = 0
    disk = data.disk_params
    assert data.u_of_chi == TateSeries.variable(disk, "chi")


def test_ball_isomorphism_examples():
    for p, h in [(2, 1), (3, 1), (2, 2), (3, 2)]:
        data = ball_isomorphism(p, h, 12)
        report = verify_ball_isomorphism(data)
        assert report["all_ok"], (p, h, report)


def test_ball_norm_identity_p3_h2():
    data = ball_isomorphism(3, 2, 12)
    patch = data.patch_params
    w = TateSeries.variable(patch, "w")
    reduced = reduce_patch_relation((w - TateSeries.one(patch)) ** 9, 2)
    assert reduced.gauss_norm() == Valuation(Fraction(1))


def test_ball_isomorphism_precision_guard():
    with pytest.raises(PrecisionError):
        ball_isomorphism(2, 2, 2)


def test_ball_binomial_coefficient_valuations():
    # middle coefficients of u(chi) carry positive valuation, edge is exact 0
    from nonarch.field import binomial_valuation
    data = ball_isomorphism(2, 2, 12)
    terms = data.u_of_chi.terms
    n = 4
    for exps, coeff in terms.items():
        i = int(exps[0])
        want = binomial_valuation(2, 2, i) - Fraction(n - i, n)
        assert coeff.valuation() == Valuation(want)
