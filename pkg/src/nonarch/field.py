"""Exact arithmetic in truncated non-archimedean fields with p-power-root levels.

Elements are finite digit expansions over exponents in (1/p^H) * Z, truncated
strictly below an absolute precision cap.  In characteristic 0 the base is a
totally ramified extension of the p-adic numbers with uniformizer pi^(1/p^H)
where pi = p; digits carry in base p (p copies of a digit at exponent e
combine into one digit at exponent e+1).  In characteristic p the base is a
Laurent-series field in t^(1/p^H) over F_p and addition is digit-wise.

Valuations are exact rationals normalized so that v(pi) = 1; the norm order
is the reverse of the valuation order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DigitRangeError,
    DivisionError,
    LevelError,
    ParamsMismatchError,
    SchemaError,
)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldParams:
    """Shape of a truncated field: prime, characteristic, level and cap.

    ``level`` is the exponent-denominator level H: all exponents have
    denominator dividing p^H.  ``precision_cap`` bounds stored exponents
    strictly from above.
    """

    p: int
    characteristic: int
    level: int
    precision_cap: Fraction

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.characteristic not in (0, self.p):
            raise ValueError("characteristic must be 0 or p")
        if self.level < 0:
            raise ValueError("level must be non-negative")
        cap = Fraction(self.precision_cap)
        object.__setattr__(self, "precision_cap", cap)
        if (self.p ** self.level) % cap.denominator != 0:
            raise LevelError("precision cap denominator exceeds level")

    @property
    def exponent_denominator(self) -> int:
        return self.p ** self.level

    @property
    def cap_numerator(self) -> int:
        cap = self.precision_cap
        return cap.numerator * (self.exponent_denominator // cap.denominator)

    def embed(self, new_level: int) -> "FieldParams":
        """Parameters at a deeper level with the same cap."""
        if new_level < self.level:
            raise LevelError("cannot embed into a shallower level")
        return FieldParams(self.p, self.characteristic, new_level, self.precision_cap)

    def flat(self) -> "FieldParams":
        """The characteristic-p partner parameters (same p, level, cap)."""
        return FieldParams(self.p, self.p, self.level, self.precision_cap)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "char": 0 if self.characteristic == 0 else "p",
            "level": self.level,
            "cap": f"{self.precision_cap.numerator}/{self.precision_cap.denominator}",
        }

    @classmethod
    def from_json(cls, data: dict) -> "FieldParams":
        try:
            p = int(data["p"])
            char = data["char"]
            level = int(data["level"])
            cap = _parse_fraction(data["cap"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad field parameters: {exc}") from exc
        characteristic = 0 if char == 0 else p
        if char not in (0, "p"):
            raise SchemaError(f"char must be 0 or \"p\", got {char!r}")
        return cls(p, characteristic, level, cap)


def _parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise SchemaError(f"expected rational string, got {text!r}")
    return Fraction(text)


def _fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class Valuation:
    """A rational valuation value, with None encoding +infinity.

    Infinity stands for "zero up to precision".  Ordering: infinite is the
    largest value; the associated norm order is reversed.
    """

    __slots__ = ("value",)

    def __init__(self, value: Fraction | None):
        self.value = None if value is None else Fraction(value)

    @classmethod
    def infinite(cls) -> "Valuation":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __eq__(self, other):
        if isinstance(other, Valuation):
            return self.value == other.value
        if other is None:
            return False
        return not self.is_infinite and self.value == other

    def __hash__(self):
        return hash(self.value)

    def _key(self):
        return (1,) if self.is_infinite else (0, self.value)

    def __lt__(self, other):
        other = other if isinstance(other, Valuation) else Valuation(other)
        return self._key() < other._key()

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __add__(self, other):
        other = other if isinstance(other, Valuation) else Valuation(other)
        if self.is_infinite or other.is_infinite:
            return Valuation.infinite()
        return Valuation(self.value + other.value)

    def __repr__(self):
        return "Valuation(inf)" if self.is_infinite else f"Valuation({self.value})"

    def to_json(self):
        return "inf" if self.is_infinite else _fraction_str(self.value)


class FieldElement:
    """A carry-normalized truncated digit expansion.

    Internally exponents are stored as integer numerators over p^level.
    Instances are immutable and safe to share.
    """

    __slots__ = ("params", "_terms")

    def __init__(self, params: FieldParams, terms: tuple):
        self.params = params
        self._terms = terms

    # -- construction -----------------------------------------------------

    @classmethod
    def _normalize(cls, params: FieldParams, work: dict) -> "FieldElement":
        p = params.p
        cap_num = params.cap_numerator
        step = params.exponent_denominator
        out = {}
        if params.characteristic == 0:
            heap = [e for e, v in work.items() if v]
            heapq.heapify(heap)
            vals = dict(work)
            while heap:
                e = heapq.heappop(heap)
                v = vals.pop(e, 0)
                if v == 0 or e >= cap_num:
                    continue
                r = v % p
                q = (v - r) // p
                if r:
                    out[e] = r
                if q:
                    ne = e + step
                    if ne in vals:
                        vals[ne] += q
                    else:
                        vals[ne] = q
                        heapq.heappush(heap, ne)
        else:
            for e, v in work.items():
                if e >= cap_num:
                    continue
                r = v % p
                if r:
                    out[e] = r
        return cls(params, tuple(sorted(out.items())))

    @classmethod
    def zero(cls, params: FieldParams) -> "FieldElement":
        return cls(params, ())

    @classmethod
    def one(cls, params: FieldParams) -> "FieldElement":
        return cls._normalize(params, {0: 1})

    @classmethod
    def from_integer(cls, params: FieldParams, n: int) -> "FieldElement":
        return cls._normalize(params, {0: n})

    @classmethod
    def pi_power(cls, params: FieldParams, exponent: Fraction) -> "FieldElement":
        """The monomial pi^e with digit 1; e must be representable."""
        exponent = Fraction(exponent)
        num = cls._exponent_numerator(params, exponent)
        return cls._normalize(params, {num: 1})

    @staticmethod
    def _exponent_numerator(params: FieldParams, exponent: Fraction) -> int:
        step = params.exponent_denominator
        if step % exponent.denominator != 0:
            raise LevelError(
                f"exponent {exponent} needs level above {params.level}"
            )
        return exponent.numerator * (step // exponent.denominator)

    # -- inspection --------------------------------------------------------

    @property
    def digits(self) -> dict:
        step = self.params.exponent_denominator
        return {Fraction(e, step): d for e, d in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def valuation(self) -> Valuation:
        if not self._terms:
            return Valuation.infinite()
        return Valuation(Fraction(self._terms[0][0], self.params.exponent_denominator))

    def is_topologically_nilpotent(self) -> bool:
        return self.valuation() > Valuation(Fraction(0))

    def is_power_bounded(self) -> bool:
        return self.valuation() >= Valuation(Fraction(0))

    def is_unit(self) -> bool:
        return self.valuation() == Valuation(Fraction(0))

    def leading_digit(self) -> int:
        if not self._terms:
            raise DivisionError("zero up to precision has no leading digit")
        return self._terms[0][1]

    def residue_digit(self) -> int:
        """The digit at exponent 0 (0 if absent)."""
        for e, d in self._terms:
            if e == 0:
                return d
            if e > 0:
                break
        return 0

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "FieldElement"):
        if self.params != other.params:
            raise ParamsMismatchError(
                f"mixed parameters {self.params} vs {other.params}"
            )

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        work = dict(self._terms)
        for e, d in other._terms:
            work[e] = work.get(e, 0) + d
        return FieldElement._normalize(self.params, work)

    def __neg__(self) -> "FieldElement":
        work = {e: -d for e, d in self._terms}
        return FieldElement._normalize(self.params, work)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return self + (-other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        cap_num = self.params.cap_numerator
        work = {}
        for e1, d1 in self._terms:
            for e2, d2 in other._terms:
                e = e1 + e2
                if e >= cap_num:
                    continue
                work[e] = work.get(e, 0) + d1 * d2
        return FieldElement._normalize(self.params, work)

    def scalar_mul_int(self, n: int) -> "FieldElement":
        work = {e: d * n for e, d in self._terms}
        return FieldElement._normalize(self.params, work)

    def scalar_mul_rational(self, q: Fraction) -> "FieldElement":
        q = Fraction(q)
        num = self.scalar_mul_int(q.numerator)
        if q.denominator == 1:
            return num
        den = FieldElement.from_integer(self.params, q.denominator)
        return num * den.invert()

    def shift(self, exponent: Fraction) -> "FieldElement":
        """Multiply by pi^e exactly (exponent translation)."""
        off = self._exponent_numerator(self.params, Fraction(exponent))
        cap_num = self.params.cap_numerator
        terms = tuple((e + off, d) for e, d in self._terms if e + off < cap_num)
        return FieldElement(self.params, terms)

    def invert(self) -> "FieldElement":
        """Two-sided inverse.

        For power-bounded x the product x * invert(x) equals one exactly
        below the cap.  For v(x) = -a < 0 the stored digits of the inverse
        stop at the cap, so the identity is exact only below cap - a; the
        absolute-cap precision model cannot do better.
        """
        if not self._terms:
            raise DivisionError("cannot invert zero up to precision")
        v = Fraction(self._terms[0][0], self.params.exponent_denominator)
        # negative valuation: the inverse carries digits up to cap + |v|
        # before the final shift, so give the Newton loop the headroom
        work_params = self.params
        x = self
        if v < 0:
            work_params = FieldParams(
                self.params.p,
                self.params.characteristic,
                self.params.level,
                self.params.precision_cap - v,
            )
            x = FieldElement(work_params, self._terms)
        unit = x.shift(-v)
        p = work_params.p
        one = FieldElement.one(work_params)
        two = FieldElement.from_integer(work_params, 2)
        c0 = unit.leading_digit()
        if work_params.characteristic == 0:
            d0 = pow(c0, -1, p)
        else:
            d0 = pow(c0, p - 2, p)
        w = FieldElement._normalize(work_params, {0: d0})
        max_iter = max(4, work_params.cap_numerator.bit_length() + 4)
        for _ in range(max_iter):
            err = unit * w
            if err == one:
                break
            w = w * (two - err)
        else:
            raise DivisionError("inverse iteration failed to stabilize")
        result = w.shift(-v)
        if work_params is not self.params:
            cap_num = self.params.cap_numerator
            result = FieldElement(
                self.params,
                tuple(t for t in result._terms if t[0] < cap_num),
            )
        return result

    def __pow__(self, n: int) -> "FieldElement":
        if n < 0:
            return self.invert() ** (-n)
        result = FieldElement.one(self.params)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def embed(self, new_params: FieldParams) -> "FieldElement":
        """Re-express at a deeper level (exact)."""
        if (
            new_params.p != self.params.p
            or new_params.characteristic != self.params.characteristic
            or new_params.precision_cap != self.params.precision_cap
        ):
            raise ParamsMismatchError("embedding must keep p, char and cap")
        if new_params.level < self.params.level:
            raise LevelError("cannot embed into a shallower level")
        scale = new_params.exponent_denominator // self.params.exponent_denominator
        terms = tuple((e * scale, d) for e, d in self._terms)
        return FieldElement(new_params, terms)

    def truncate_level(self, h: int) -> "FieldElement":
        """Drop digits whose exponent denominator exceeds p^h."""
        step = self.params.exponent_denominator
        keep_mod = self.params.p ** max(self.params.level - h, 0)
        terms = tuple((e, d) for e, d in self._terms if e % keep_mod == 0)
        return FieldElement(self.params, terms)

    def support_level(self) -> int:
        """Smallest h with all exponent denominators dividing p^h."""
        p = self.params.p
        level = 0
        step = self.params.exponent_denominator
        for e, _ in self._terms:
            den = Fraction(e, step).denominator
            h = 0
            while den > 1:
                den //= p
                h += 1
            level = max(level, h)
        return level

    # -- comparisons and serialization ---------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.params == other.params
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.params, self._terms))

    def __repr__(self):
        if not self._terms:
            return "FieldElement(0)"
        step = self.params.exponent_denominator
        bits = [f"{d}*pi^({Fraction(e, step)})" for e, d in self._terms]
        return "FieldElement(" + " + ".join(bits) + ")"

    def to_json(self) -> dict:
        step = self.params.exponent_denominator
        data = self.params.to_json()
        data["terms"] = [
            [_fraction_str(Fraction(e, step)), d] for e, d in self._terms
        ]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "FieldElement":
        params = FieldParams.from_json(data)
        try:
            raw = [(_parse_fraction(e), int(d)) for e, d in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad element terms: {exc}") from exc
        return make_element(params, raw)


def make_element(params: FieldParams, terms) -> FieldElement:
    """Build a carry-normalized element from (exponent, digit) pairs.

    Repeated exponents accumulate before normalization, so the carry rule is
    observable: p copies of a digit at e become one digit at e+1.
    """
    work: dict = {}
    for exponent, digit in terms:
        exponent = Fraction(exponent)
        num = FieldElement._exponent_numerator(params, exponent)
        digit = int(digit)
        if not 0 <= digit <= params.p - 1:
            raise DigitRangeError(f"digit {digit} outside 0..{params.p - 1}")
        work[num] = work.get(num, 0) + digit
    return FieldElement._normalize(params, work)


def binomial_valuation(p: int, h: int, i: int) -> Fraction:
    """v_p of the binomial coefficient C(p^h, i), by Legendre's formula."""
    if not _is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    n = p ** h
    if not 0 <= i <= n:
        raise ValueError(f"i = {i} outside 0..{n}")
    total = 0
    pk = p
    while pk <= n:
        total += n // pk - i // pk - (n - i) // pk
        pk *= p
    return Fraction(total)


def valuation(x: FieldElement) -> Valuation:
    return x.valuation()


def is_topologically_nilpotent(x: FieldElement) -> bool:
    return x.is_topologically_nilpotent()


def is_power_bounded(x: FieldElement) -> bool:
    return x.is_power_bounded()


def teichmuller(params: FieldParams, digit: int) -> FieldElement:
    """The multiplicative lift of a nonzero residue digit.

    In characteristic 0 this is the root of x^(p-1) = 1 congruent to the
    digit mod pi, computed by Hensel iteration; in characteristic p it is
    the digit itself.
    """
    p = params.p
    if not 1 <= digit <= p - 1:
        raise DigitRangeError(f"digit {digit} outside 1..{p - 1}")
    if params.characteristic != 0:
        return FieldElement.from_integer(params, digit)
    if p == 2:
        return FieldElement.one(params)
    x = FieldElement.from_integer(params, digit)
    one = FieldElement.one(params)
    exp = p - 1
    cap_num = params.cap_numerator
    max_iter = max(4, cap_num.bit_length() + 4)
    for _ in range(max_iter):
        fx = x ** exp - one
        if fx.is_zero():
            break
        dfx = x ** (exp - 1)
        dfx = dfx.scalar_mul_int(exp)
        x = x - fx * dfx.invert()
    else:
        raise DivisionError("Hensel iteration for Teichmuller lift stalled")
    return x
