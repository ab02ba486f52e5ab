import math
import random
from fractions import Fraction

import pytest

from normsched.exactnum import (
    Comparison,
    NegativeBase,
    NormExponent,
    PrecisionExhausted,
    RealEnclosure,
    Verdict,
    certified_ceil,
    certified_relation,
    cmp_certified,
    enclosure_to_json,
    exact_pow,
    format_rational,
    parse_rational,
    pow_frac,
    pow_int,
    pow_rat,
)


def root_oracle(x: Fraction, m: int, bits: int) -> RealEnclosure:
    """Independent enclosure of x**(1/m) by integer m-th roots of a scaled value.

    floor(r) <= r < floor(r)+1 with r = the integer m-th root of
    x.num * s^m // x.den at scale s = 2**bits.
    """
    s = 1 << bits
    scaled = (x.numerator * s**m) // x.denominator
    lo = _int_nthroot(scaled, m)
    return RealEnclosure(Fraction(lo, s), Fraction(lo + 2, s), bits)


def _int_nthroot(n: int, m: int) -> int:
    if n < 0:
        raise ValueError
    if n == 0:
        return 0
    x = 1 << (n.bit_length() // m + 1)
    while True:
        y = ((m - 1) * x + n // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    while x ** m > n:
        x -= 1
    return x


def test_parse_and_format_rational():
    assert parse_rational("-3/7") == Fraction(-3, 7)
    assert parse_rational("5") == Fraction(5)
    assert parse_rational(4) == Fraction(4)
    assert format_rational(Fraction(-3, 7)) == "-3/7"
    assert format_rational(Fraction(10, 2)) == "5"
    with pytest.raises(TypeError):
        parse_rational(0.5)
    with pytest.raises(TypeError):
        parse_rational(True)


def test_pow_int_basics():
    assert pow_int(Fraction(3, 2), 2) == Fraction(9, 4)
    assert pow_int(Fraction(-7, 3), 0) == 1
    assert pow_int(Fraction(0), 0) == 1
    assert pow_int(Fraction(-5), 3) == -125
    with pytest.raises(ValueError):
        pow_int(Fraction(2), -1)


def test_pow_int_multiplicativity():
    rng = random.Random(11)
    for _ in range(200):
        x = Fraction(rng.randint(-50, 50), rng.randint(1, 40))
        j = rng.randint(0, 6)
        k = rng.randint(0, 6)
        assert pow_int(x, j) * pow_int(x, k) == pow_int(x, j + k)


def test_pow_frac_perfect_powers_are_points():
    enc = pow_frac(Fraction(4), Fraction(1, 2))
    assert enc.contains(2)
    enc = pow_frac(Fraction(27, 8), Fraction(1, 3))
    assert enc.contains(Fraction(3, 2))
    assert pow_frac(Fraction(0), Fraction(1, 2)).is_point
    assert pow_frac(Fraction(0), Fraction(1, 2)).contains(0)
    assert pow_frac(Fraction(1), Fraction(2, 3)).contains(1)


def test_pow_frac_rejects_bad_inputs():
    with pytest.raises(NegativeBase):
        pow_frac(Fraction(-1), Fraction(1, 2))
    with pytest.raises(ValueError):
        pow_frac(Fraction(2), Fraction(3, 2))
    with pytest.raises(ValueError):
        pow_frac(Fraction(2), Fraction(0))


def test_pow_frac_sqrt2_against_root_oracle():
    enc = pow_frac(Fraction(2), Fraction(1, 2), 128)
    oracle = root_oracle(Fraction(2), 2, 200)
    # both enclose sqrt(2); the tighter one must sit inside the looser
    assert enc.lower < oracle.upper and oracle.lower < enc.upper
    assert enc.lower ** 2 < 2 < enc.upper ** 2
    assert enc.width <= Fraction(2, 2 ** 127)


def test_pow_frac_width_contract():
    rng = random.Random(7)
    for _ in range(40):
        x = Fraction(rng.randint(1, 10 ** 6), rng.randint(1, 997))
        k = Fraction(rng.randint(1, 9), 10)
        if not (0 < k < 1):
            continue
        for p in (64, 128, 192):
            enc = pow_frac(x, k, p)
            bound = Fraction(2) ** (1 - p) * max(Fraction(1), enc.upper)
            assert enc.width <= bound


def test_pow_frac_refinement_nests():
    rng = random.Random(13)
    for _ in range(25):
        x = Fraction(rng.randint(2, 10 ** 5), rng.randint(1, 313))
        k = Fraction(rng.randint(1, 7), 8)
        coarse = pow_frac(x, k, 64)
        fine = pow_frac(x, k, 256)
        assert coarse.lower <= fine.lower and fine.upper <= coarse.upper


def test_pow_frac_enclosure_soundness_on_perfect_powers():
    rng = random.Random(19)
    for _ in range(30):
        q = Fraction(rng.randint(1, 60), rng.randint(1, 60))
        m = rng.randint(2, 4)
        x = q ** m
        for p in (48, 96, 192):
            assert pow_frac(x, Fraction(1, m), p).contains(q)


def test_pow_frac_huge_magnitudes():
    x = Fraction(10) ** 200 + Fraction(1, 3)
    enc = pow_frac(x, Fraction(1, 4), 192)
    assert enc.lower > 0
    assert enc.lower ** 4 < x < enc.upper ** 4
    tiny = Fraction(1, 10 ** 180)
    enc = pow_frac(tiny, Fraction(2, 3), 192)
    assert enc.lower >= 0
    assert enc.lower ** 3 <= tiny ** 2 <= enc.upper ** 3


def test_exact_pow():
    assert exact_pow(Fraction(8, 27), Fraction(2, 3)) == Fraction(4, 9)
    assert exact_pow(Fraction(2), Fraction(1, 2)) is None
    assert exact_pow(Fraction(5), Fraction(3)) == 125
    assert exact_pow(Fraction(0), Fraction(1, 2)) == 0


def test_pow_rat_splits_whole_and_fractional():
    v = pow_rat(Fraction(2), Fraction(7, 2), 128)
    assert isinstance(v, RealEnclosure)
    # 2^(7/2) = 8*sqrt(2)
    assert v.lower ** 2 < 2 ** 7 < v.upper ** 2
    assert pow_rat(Fraction(9), Fraction(3, 2), 64) == 27


def test_cmp_certified():
    one = RealEnclosure.point(1)
    two = RealEnclosure.point(2)
    assert cmp_certified(one, two) is Comparison.LESS
    assert cmp_certified(two, one) is Comparison.GREATER
    a = RealEnclosure(Fraction(1), Fraction(3), 64)
    b = RealEnclosure(Fraction(2), Fraction(4), 64)
    assert cmp_certified(a, b) is Comparison.UNKNOWN
    sqrt2 = pow_frac(Fraction(2), Fraction(1, 2), 64)
    assert cmp_certified(sqrt2, RealEnclosure.point(Fraction(3, 2))) is Comparison.LESS


def test_certified_relation_escalates():
    # sqrt(2) < 1.41421356237309504880168872421 is true but very tight:
    # needs roughly 96 bits, so a 16-bit start must escalate
    tight = Fraction(141421356237309504880168872421, 10 ** 29)
    verdict, lhs, rhs = certified_relation(
        lambda p: pow_frac(Fraction(2), Fraction(1, 2), p), tight, "<",
        start_precision=16)
    assert verdict is Verdict.PASS
    verdict, _, _ = certified_relation(
        lambda p: pow_frac(Fraction(2), Fraction(1, 2), p), tight, ">",
        start_precision=16)
    assert verdict is Verdict.FAIL


def test_certified_relation_inconclusive_on_equality():
    sqrt2 = lambda p: pow_frac(Fraction(2), Fraction(1, 2), p)
    verdict, _, _ = certified_relation(sqrt2, sqrt2, "<",
                                       start_precision=32, precision_ceiling=128)
    assert verdict is Verdict.INCONCLUSIVE


def test_certified_relation_exact_sides():
    verdict, _, _ = certified_relation(Fraction(1, 3), Fraction(2, 3), "<")
    assert verdict is Verdict.PASS
    verdict, _, _ = certified_relation(Fraction(1, 3), Fraction(1, 3), "<=")
    assert verdict is Verdict.PASS
    verdict, _, _ = certified_relation(Fraction(1, 3), Fraction(1, 3), ">")
    assert verdict is Verdict.FAIL


def test_certified_ceil():
    assert certified_ceil(Fraction(7, 2)) == 4
    assert certified_ceil(Fraction(4)) == 4
    assert certified_ceil(lambda p: pow_frac(Fraction(2), Fraction(1, 2), p)) == 2
    big = lambda p: pow_rat(Fraction(360), Fraction(11, 2), p)
    c = certified_ceil(big)
    assert (c - 1) ** 2 < 360 ** 11 <= c ** 2
    with pytest.raises(PrecisionExhausted):
        certified_ceil(RealEnclosure(Fraction(1, 2), Fraction(3, 2), 64))


def test_enclosure_arithmetic_exact():
    a = RealEnclosure(Fraction(1, 3), Fraction(1, 2), 64)
    b = RealEnclosure(Fraction(-2), Fraction(5), 64)
    s = a + b
    assert (s.lower, s.upper) == (Fraction(-5, 3), Fraction(11, 2))
    p = a * b
    assert p.lower == Fraction(-1)
    assert p.upper == Fraction(5, 2)
    d = a / RealEnclosure(Fraction(2), Fraction(4), 64)
    assert (d.lower, d.upper) == (Fraction(1, 12), Fraction(1, 4))
    with pytest.raises(ZeroDivisionError):
        a / b
    scaled = 3 * a - Fraction(1)
    assert (scaled.lower, scaled.upper) == (Fraction(0), Fraction(1, 2))
    inv = 1 / RealEnclosure(Fraction(2), Fraction(4), 64)
    assert (inv.lower, inv.upper) == (Fraction(1, 4), Fraction(1, 2))


def test_interval_multiplication_soundness():
    rng = random.Random(23)
    for _ in range(300):
        bounds = sorted(Fraction(rng.randint(-60, 60), rng.randint(1, 9)) for _ in range(2))
        a = RealEnclosure(bounds[0], bounds[1], 64)
        bounds = sorted(Fraction(rng.randint(-60, 60), rng.randint(1, 9)) for _ in range(2))
        b = RealEnclosure(bounds[0], bounds[1], 64)
        prod = a * b
        for _ in range(5):
            x = a.lower + (a.upper - a.lower) * Fraction(rng.randint(0, 8), 8)
            y = b.lower + (b.upper - b.lower) * Fraction(rng.randint(0, 8), 8)
            assert prod.contains(x * y)


def test_enclosure_json_round_down_up():
    enc = pow_frac(Fraction(2), Fraction(1, 2), 64)
    blob = enclosure_to_json(enc)
    assert blob["precision_bits"] == 64
    lo = Fraction(blob["lower"])
    hi = Fraction(blob["upper"])
    assert lo <= enc.lower and enc.upper <= hi
    assert blob["lower"].startswith("1.414213562373095")
    pt = enclosure_to_json(RealEnclosure.point(Fraction(-3, 2), 32))
    assert Fraction(pt["lower"]) <= Fraction(-3, 2) <= Fraction(pt["upper"])


def test_norm_exponent():
    k2 = NormExponent.integer(2)
    assert k2.is_integer and str(k2) == "2"
    half = NormExponent.fractional(Fraction(1, 2))
    assert half.is_fractional and str(half) == "1/2"
    inf = NormExponent.infinity()
    assert inf.is_infinite and str(inf) == "inf"
    assert NormExponent.parse("3") == NormExponent.integer(3)
    assert NormExponent.parse("1/4") == NormExponent.fractional(Fraction(1, 4))
    assert NormExponent.parse("inf") == inf
    with pytest.raises(ValueError):
        NormExponent.integer(0)
    with pytest.raises(ValueError):
        NormExponent.fractional(Fraction(5, 4))
    with pytest.raises(ValueError):
        NormExponent.parse("0")
