"""Exact rational scalars and certified enclosures of real powers.

Every time quantity and every integer-exponent objective value in this
package is a ``fractions.Fraction``. Fractional exponents (x^k with
0 < k < 1) are generally irrational; they are represented by
``RealEnclosure``, a pair of exact dyadic rational bounds produced by
directed-rounded multiprecision evaluation of exp(k*ln x). Because the
bounds themselves are Fractions, all downstream interval arithmetic
(sums, products, comparisons against rational thresholds) is exact; the
only outward rounding in the system happens inside ``pow_frac``.

Comparisons that cannot be decided at the current precision are retried
at doubled precision up to a ceiling, after which they are reported as
inconclusive rather than guessed.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Union

import gmpy2

# sound parameters reach magnitudes whose exact decimal forms run to many
# thousands of digits; the interpreter's conversion guard is meant for
# untrusted web inputs, not for an exact-arithmetic workload
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(max(sys.get_int_max_str_digits(), 2_000_000))

Rational = Fraction

DEFAULT_PRECISION = 192
PRECISION_CEILING = 4096

# extra working bits inside pow_frac so the returned width stays far
# below the 2^(1-p) contract even for operands with huge exponents
_GUARD_BITS = 64

# skip exact-power detection when intermediate integers would exceed this
_EXACT_POW_BIT_LIMIT = 1 << 22


class NegativeBase(ValueError):
    """Fractional power requested for a negative base."""


class PrecisionExhausted(RuntimeError):
    """A certified decision was still unknown at the precision ceiling."""


def parse_rational(value) -> Fraction:
    """Parse rational text like "-3/7" or "5"; ints pass through.

    Floats are rejected: file formats carry rationals as text exactly.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use rational text")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot parse rational from {type(value).__name__}")


def format_rational(value) -> str:
    return str(Fraction(value))


def pow_int(x: Fraction, k: int) -> Fraction:
    """Exact x**k for integer k >= 0. pow_int(x, 0) == 1 for every x."""
    if k < 0:
        raise ValueError("pow_int requires a non-negative exponent")
    return Fraction(x) ** k


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class RealEnclosure:
    """Closed interval [lower, upper] guaranteed to contain an exact real.

    ``precision_bits`` records the precision the enclosure was requested
    at; re-evaluating the producing expression at higher precision yields
    a sub-interval.
    """

    lower: Fraction
    upper: Fraction
    precision_bits: int

    def __post_init__(self):
        object.__setattr__(self, "lower", _to_fraction(self.lower))
        object.__setattr__(self, "upper", _to_fraction(self.upper))
        if self.precision_bits <= 0:
            raise ValueError("precision_bits must be positive")
        if self.lower > self.upper:
            raise ValueError(f"inverted enclosure [{self.lower}, {self.upper}]")

    @classmethod
    def point(cls, value, precision_bits: int = DEFAULT_PRECISION) -> "RealEnclosure":
        v = _to_fraction(value)
        return cls(v, v, precision_bits)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    def contains(self, value) -> bool:
        v = _to_fraction(value)
        return self.lower <= v <= self.upper

    def encloses(self, other: "RealEnclosure") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def _coerce(self, other):
        if isinstance(other, RealEnclosure):
            return other
        if isinstance(other, (int, Fraction)):
            return RealEnclosure.point(other, self.precision_bits)
        return None

    def _combine_precision(self, other: "RealEnclosure") -> int:
        return max(self.precision_bits, other.precision_bits)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RealEnclosure(self.lower + o.lower, self.upper + o.upper,
                             self._combine_precision(o))

    __radd__ = __add__

    def __neg__(self):
        return RealEnclosure(-self.upper, -self.lower, self.precision_bits)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        products = [self.lower * o.lower, self.lower * o.upper,
                    self.upper * o.lower, self.upper * o.upper]
        return RealEnclosure(min(products), max(products),
                             self._combine_precision(o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.lower <= 0 <= o.upper:
            raise ZeroDivisionError("divisor enclosure contains zero")
        inv = RealEnclosure(1 / o.upper, 1 / o.lower, o.precision_bits)
        return self * inv

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self


RVal = Union[Fraction, RealEnclosure]


def _mpfr_to_fraction(x) -> Fraction:
    q = gmpy2.mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def exact_pow(x: Fraction, e: Fraction):
    """Exact value of x**e for x >= 0, e >= 0, or None if irrational / too big.

    For e = u/v in lowest terms, x^(u/v) is rational iff numerator and
    denominator of x are both perfect v-th powers.
    """
    x = _to_fraction(x)
    e = _to_fraction(e)
    if e < 0:
        raise ValueError("exact_pow requires a non-negative exponent")
    if x < 0:
        raise NegativeBase(f"negative base {x}")
    if e.denominator == 1:
        if x.numerator.bit_length() * int(e) > _EXACT_POW_BIT_LIMIT:
            return None
        return pow_int(x, int(e))
    if x == 0:
        return Fraction(0)
    if x == 1:
        return Fraction(1)
    u, v = e.numerator, e.denominator
    if max(x.numerator.bit_length(), x.denominator.bit_length()) * max(u, 1) > _EXACT_POW_BIT_LIMIT:
        return None
    num_root, num_exact = gmpy2.iroot(gmpy2.mpz(x.numerator), v)
    if not num_exact:
        return None
    den_root, den_exact = gmpy2.iroot(gmpy2.mpz(x.denominator), v)
    if not den_exact:
        return None
    return Fraction(int(num_root) ** u, int(den_root) ** u)


def pow_frac(x: Fraction, k: Fraction, precision_bits: int = DEFAULT_PRECISION) -> RealEnclosure:
    """Certified enclosure of x**k for x >= 0 and 0 < k < 1.

    The bounds come from exp(k*ln x) evaluated once rounding down and
    once rounding up at precision_bits + guard bits; every step of the
    chain is monotone, so the result is a true enclosure and refines
    monotonically with precision.
    """
    x = _to_fraction(x)
    k = _to_fraction(k)
    if not (0 < k < 1):
        raise ValueError(f"pow_frac exponent must lie strictly in (0,1), got {k}")
    if x < 0:
        raise NegativeBase(f"negative base {x}")
    if precision_bits <= 0:
        raise ValueError("precision_bits must be positive")
    if x == 0:
        return RealEnclosure.point(0, precision_bits)
    exact = exact_pow(x, k)
    if exact is not None:
        return RealEnclosure.point(exact, precision_bits)

    work = precision_bits + _GUARD_BITS
    xq = gmpy2.mpq(x.numerator, x.denominator)
    kq = gmpy2.mpq(k.numerator, k.denominator)
    with gmpy2.context(precision=work, round=gmpy2.RoundDown):
        lo = gmpy2.exp(gmpy2.mul(gmpy2.log(gmpy2.mpfr(xq)), kq))
    with gmpy2.context(precision=work, round=gmpy2.RoundUp):
        hi = gmpy2.exp(gmpy2.mul(gmpy2.log(gmpy2.mpfr(xq)), kq))
    lower = _mpfr_to_fraction(lo)
    upper = _mpfr_to_fraction(hi)
    if lower < 0:
        lower = Fraction(0)
    return RealEnclosure(lower, upper, precision_bits)


def pow_rat(x: Fraction, e: Fraction, precision_bits: int = DEFAULT_PRECISION) -> RVal:
    """x**e for x >= 0, e >= 0: exact Fraction when representable, else enclosure."""
    x = _to_fraction(x)
    e = _to_fraction(e)
    if e < 0:
        raise ValueError("pow_rat requires a non-negative exponent")
    if x < 0:
        raise NegativeBase(f"negative base {x}")
    exact = exact_pow(x, e)
    if exact is not None:
        return exact
    whole = e.numerator // e.denominator
    frac = e - whole
    enc = pow_frac(x, frac, precision_bits)
    if whole:
        enc = enc * pow_int(x, whole)
    return enc


def rv_pow(value: RVal, e: Fraction, precision_bits: int = DEFAULT_PRECISION) -> RVal:
    """value**e for a non-negative exact rational or enclosure value, e >= 0.

    x**e is monotone in x for e >= 0, so enclosure bounds map to bounds.
    """
    e = _to_fraction(e)
    if isinstance(value, (int, Fraction)):
        return pow_rat(_to_fraction(value), e, precision_bits)
    if value.lower < 0:
        raise NegativeBase(f"enclosure {value.lower}..{value.upper} reaches below zero")
    lo = pow_rat(value.lower, e, precision_bits)
    hi = pow_rat(value.upper, e, precision_bits)
    lo_bound = lo.lower if isinstance(lo, RealEnclosure) else lo
    hi_bound = hi.upper if isinstance(hi, RealEnclosure) else hi
    if lo_bound == hi_bound:
        return lo_bound
    return RealEnclosure(lo_bound, hi_bound, precision_bits)


class Comparison(Enum):
    LESS = "Less"
    GREATER = "Greater"
    UNKNOWN = "Unknown"


def as_enclosure(value: RVal, precision_bits: int = DEFAULT_PRECISION) -> RealEnclosure:
    if isinstance(value, RealEnclosure):
        return value
    return RealEnclosure.point(value, precision_bits)


def cmp_certified(a, b) -> Comparison:
    """Less iff a.upper < b.lower; Greater iff a.lower > b.upper; else Unknown."""
    a = as_enclosure(a)
    b = as_enclosure(b)
    if a.upper < b.lower:
        return Comparison.LESS
    if a.lower > b.upper:
        return Comparison.GREATER
    return Comparison.UNKNOWN


class Verdict(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


Evaluator = Union[Fraction, int, RealEnclosure, Callable[[int], RVal]]

_RELATIONS = ("<", "<=", ">", ">=")


def _bounds(value: RVal):
    if isinstance(value, RealEnclosure):
        return value.lower, value.upper
    v = _to_fraction(value)
    return v, v


def _decide(relation: str, lhs: RVal, rhs: RVal):
    ll, lu = _bounds(lhs)
    rl, ru = _bounds(rhs)
    if relation == "<":
        if lu < rl:
            return True
        if ll >= ru:
            return False
    elif relation == "<=":
        if lu <= rl:
            return True
        if ll > ru:
            return False
    elif relation == ">":
        if ll > ru:
            return True
        if lu <= rl:
            return False
    elif relation == ">=":
        if ll >= ru:
            return True
        if lu < rl:
            return False
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return None


def _evaluate(side: Evaluator, precision_bits: int) -> RVal:
    if callable(side):
        return side(precision_bits)
    if isinstance(side, (int, Fraction)):
        return _to_fraction(side)
    return side


def certified_relation(lhs: Evaluator, rhs: Evaluator, relation: str,
                       start_precision: int = DEFAULT_PRECISION,
                       precision_ceiling: int = PRECISION_CEILING):
    """Decide ``lhs relation rhs``, escalating precision while Unknown.

    Sides may be exact rationals, enclosures, or callables taking a
    precision and returning either. Returns (verdict, lhs_value,
    rhs_value) with the values from the deciding evaluation.
    """
    if relation not in _RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    precision = start_precision
    refinable = callable(lhs) or callable(rhs)
    while True:
        lv = _evaluate(lhs, precision)
        rv = _evaluate(rhs, precision)
        decided = _decide(relation, lv, rv)
        if decided is True:
            return Verdict.PASS, lv, rv
        if decided is False:
            return Verdict.FAIL, lv, rv
        if not refinable or precision >= precision_ceiling:
            return Verdict.INCONCLUSIVE, lv, rv
        precision = min(precision * 2, precision_ceiling)


def certified_ceil(value: Evaluator,
                   start_precision: int = DEFAULT_PRECISION,
                   precision_ceiling: int = PRECISION_CEILING) -> int:
    """Exact ceiling of a real given by an evaluator; escalates until pinned."""
    precision = start_precision
    refinable = callable(value)
    while True:
        v = _evaluate(value, precision)
        lo, hi = _bounds(v)
        clo, chi = math.ceil(lo), math.ceil(hi)
        if clo == chi:
            return clo
        if not refinable or precision >= precision_ceiling:
            raise PrecisionExhausted(
                f"ceiling undecided in [{clo}, {chi}] at {precision} bits")
        precision = min(precision * 2, precision_ceiling)


def sci_str(q, digits: int = 12) -> str:
    """Scientific-notation rendering by integer arithmetic only; safe for
    magnitudes far beyond float range."""
    q = Fraction(q)
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    aq = abs(q)
    e = int((aq.numerator.bit_length() - aq.denominator.bit_length()) * 0.30103)
    while Fraction(10) ** e > aq:
        e -= 1
    while Fraction(10) ** (e + 1) <= aq:
        e += 1
    mantissa = int(aq / Fraction(10) ** e * 10 ** digits)
    s = str(mantissa)
    return f"{sign}{s[0]}.{s[1:]}e{e:+d}"


def _decimal_directed(q: Fraction, digits: int, round_up: bool) -> str:
    scale = 10 ** digits
    scaled = q * scale
    n = -((-scaled.numerator) // scaled.denominator) if round_up else scaled.numerator // scaled.denominator
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def enclosure_to_json(enc: RealEnclosure) -> dict:
    """Serialize with outward-rounded exact decimal bounds."""
    digits = max(24, enc.precision_bits * 302 // 1000 + 4)
    return {
        "lower": _decimal_directed(enc.lower, digits, round_up=False),
        "upper": _decimal_directed(enc.upper, digits, round_up=True),
        "precision_bits": enc.precision_bits,
    }


@dataclass(frozen=True)
class NormExponent:
    """Objective exponent: an integer k >= 1, a rational strictly in (0,1), or infinity."""

    kind: str
    value: Fraction | None

    _KINDS = ("integer", "fractional", "infinity")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown exponent kind {self.kind!r}")
        if self.kind == "integer":
            v = self.value
            if v is None or v.denominator != 1 or v < 1:
                raise ValueError(f"integer exponent must be an integer >= 1, got {v}")
        elif self.kind == "fractional":
            v = self.value
            if v is None or not (0 < v < 1):
                raise ValueError(f"fractional exponent must lie strictly in (0,1), got {v}")
        elif self.value is not None:
            raise ValueError("infinity exponent carries no value")

    @classmethod
    def integer(cls, k) -> "NormExponent":
        return cls("integer", Fraction(k))

    @classmethod
    def fractional(cls, k) -> "NormExponent":
        return cls("fractional", _to_fraction(parse_rational(k)))

    @classmethod
    def infinity(cls) -> "NormExponent":
        return cls("infinity", None)

    @classmethod
    def parse(cls, text: str) -> "NormExponent":
        t = str(text).strip().lower()
        if t in ("inf", "infinity", "oo"):
            return cls.infinity()
        q = parse_rational(t)
        if q.denominator == 1:
            return cls.integer(q)
        return cls.fractional(q)

    @property
    def is_integer(self) -> bool:
        return self.kind == "integer"

    @property
    def is_fractional(self) -> bool:
        return self.kind == "fractional"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinity"

    def __str__(self) -> str:
        if self.is_infinite:
            return "inf"
        return format_rational(self.value)
