"""Strictly convergent multivariate series truncations with fractional exponents.

A series is a sparse map from exponent vectors to field-element coefficients.
Exponents of variable i live in (1/p^{H_i}) * Z_{>=0}; the weighted total
degree of a term is the plain sum of its exponents and the degree cap bounds
it.  Equality is structural on the canonically sorted term map.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    CapError,
    ConvergenceError,
    LevelError,
    ParamsMismatchError,
    SchemaError,
)
from .field import (
    FieldElement,
    FieldParams,
    Valuation,
    _fraction_str,
    _parse_fraction,
)


@dataclass(frozen=True)
class SeriesParams:
    field: FieldParams
    variables: tuple
    degree_cap: Fraction
    var_levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "degree_cap", Fraction(self.degree_cap))
        if self.var_levels is None:
            levels = tuple(self.field.level for _ in self.variables)
        else:
            levels = tuple(int(h) for h in self.var_levels)
        object.__setattr__(self, "var_levels", levels)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        if len(levels) != len(self.variables):
            raise ValueError("one level per variable required")
        if self.degree_cap < 0:
            raise ValueError("degree cap must be non-negative")
        for h in levels:
            if h < 0 or h > self.field.level:
                raise LevelError(f"variable level {h} outside 0..{self.field.level}")

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def without(self, name: str) -> "SeriesParams":
        i = self.index(name)
        return SeriesParams(
            self.field,
            self.variables[:i] + self.variables[i + 1 :],
            self.degree_cap,
            self.var_levels[:i] + self.var_levels[i + 1 :],
        )

    def extend(self, names, levels=None) -> "SeriesParams":
        names = tuple(names)
        if levels is None:
            levels = tuple(0 for _ in names)
        return SeriesParams(
            self.field,
            self.variables + names,
            self.degree_cap,
            self.var_levels + tuple(levels),
        )

    def with_cap(self, cap) -> "SeriesParams":
        return SeriesParams(self.field, self.variables, Fraction(cap), self.var_levels)


def series_params(field: FieldParams, variables, degree_cap, var_levels=None) -> SeriesParams:
    return SeriesParams(field, tuple(variables), Fraction(degree_cap), var_levels)


class TateSeries:
    """Sparse truncated series over FieldElement coefficients."""

    __slots__ = ("params", "_terms")

    def __init__(self, params: SeriesParams, terms: tuple):
        self.params = params
        self._terms = terms

    # -- construction -------------------------------------------------------

    @classmethod
    def _make(cls, params: SeriesParams, work: dict) -> "TateSeries":
        cap = params.degree_cap
        out = []
        for exps, coeff in work.items():
            if coeff.is_zero():
                continue
            if sum(exps, Fraction(0)) > cap:
                continue
            out.append((exps, coeff))
        out.sort(key=lambda t: t[0])
        return cls(params, tuple(out))

    @classmethod
    def zero(cls, params: SeriesParams) -> "TateSeries":
        return cls(params, ())

    @classmethod
    def constant(cls, params: SeriesParams, value: FieldElement) -> "TateSeries":
        if value.params != params.field:
            raise ParamsMismatchError("coefficient parameters do not match")
        zero_vec = tuple(Fraction(0) for _ in params.variables)
        return cls._make(params, {zero_vec: value})

    @classmethod
    def one(cls, params: SeriesParams) -> "TateSeries":
        return cls.constant(params, FieldElement.one(params.field))

    @classmethod
    def monomial(cls, params: SeriesParams, exponents, coeff: FieldElement) -> "TateSeries":
        vec = cls._normalize_exponents(params, exponents)
        if sum(vec, Fraction(0)) > params.degree_cap:
            raise CapError("monomial degree exceeds the cap")
        return cls._make(params, {vec: coeff})

    @classmethod
    def variable(cls, params: SeriesParams, name: str) -> "TateSeries":
        exps = {name: Fraction(1)}
        return cls.monomial(params, exps, FieldElement.one(params.field))

    @staticmethod
    def _normalize_exponents(params: SeriesParams, exponents) -> tuple:
        if isinstance(exponents, dict):
            vec = [Fraction(0)] * len(params.variables)
            for name, e in exponents.items():
                vec[params.index(name)] = Fraction(e)
        else:
            vec = [Fraction(e) for e in exponents]
            if len(vec) != len(params.variables):
                raise ValueError("exponent vector length mismatch")
        for i, e in enumerate(vec):
            if e < 0:
                raise ValueError("negative variable exponent")
            if (params.field.p ** params.var_levels[i]) % e.denominator != 0:
                raise LevelError(
                    f"exponent {e} exceeds level {params.var_levels[i]} "
                    f"of variable {params.variables[i]!r}"
                )
        return tuple(vec)

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> FieldElement:
        zero_vec = tuple(Fraction(0) for _ in self.params.variables)
        for exps, coeff in self._terms:
            if exps == zero_vec:
                return coeff
        return FieldElement.zero(self.params.field)

    def gauss_norm(self) -> Valuation:
        """Minimal coefficient valuation (maximal norm); infinite for zero."""
        best = Valuation.infinite()
        for _, coeff in self._terms:
            v = coeff.valuation()
            if v < best:
                best = v
        return best

    def degree(self) -> Fraction:
        return max((sum(e, Fraction(0)) for e, _ in self._terms), default=Fraction(0))

    def support_level(self) -> int:
        """Smallest h such that every exponent denominator divides p^h."""
        p = self.params.field.p
        level = 0
        for exps, _ in self._terms:
            for e in exps:
                den = e.denominator
                h = 0
                while den > 1:
                    den //= p
                    h += 1
                level = max(level, h)
        return level

    def is_power_bounded(self) -> bool:
        return self.gauss_norm() >= Valuation(Fraction(0))

    # -- ring operations -------------------------------------------------------

    def _check(self, other: "TateSeries"):
        if self.params != other.params:
            raise ParamsMismatchError("series parameters differ")

    def __add__(self, other: "TateSeries") -> "TateSeries":
        self._check(other)
        work = dict(self._terms)
        for exps, coeff in other._terms:
            if exps in work:
                work[exps] = work[exps] + coeff
            else:
                work[exps] = coeff
        return TateSeries._make(self.params, work)

    def __neg__(self) -> "TateSeries":
        return TateSeries(self.params, tuple((e, -c) for e, c in self._terms))

    def __sub__(self, other: "TateSeries") -> "TateSeries":
        return self + (-other)

    def __mul__(self, other: "TateSeries") -> "TateSeries":
        self._check(other)
        cap = self.params.degree_cap
        work: dict = {}
        for e1, c1 in self._terms:
            d1 = sum(e1, Fraction(0))
            for e2, c2 in other._terms:
                if d1 + sum(e2, Fraction(0)) > cap:
                    continue
                key = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                if key in work:
                    work[key] = work[key] + prod
                else:
                    work[key] = prod
        return TateSeries._make(self.params, work)

    def scalar_mul(self, c: FieldElement) -> "TateSeries":
        if c.params != self.params.field:
            raise ParamsMismatchError("coefficient parameters do not match")
        work = {e: coeff * c for e, coeff in self._terms}
        return TateSeries._make(self.params, work)

    def scalar_mul_int(self, n: int) -> "TateSeries":
        work = {e: coeff.scalar_mul_int(n) for e, coeff in self._terms}
        return TateSeries._make(self.params, work)

    def scalar_mul_rational(self, q: Fraction) -> "TateSeries":
        work = {e: coeff.scalar_mul_rational(q) for e, coeff in self._terms}
        return TateSeries._make(self.params, work)

    def __pow__(self, n: int) -> "TateSeries":
        if n < 0:
            raise ValueError("negative series powers are not supported")
        result = TateSeries.one(self.params)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def invert(self) -> "TateSeries":
        """Inverse of a constant-dominant unit via a geometric series."""
        c0 = self.constant_term()
        if c0.is_zero():
            raise ConvergenceError("series has no dominant constant term")
        rest = self - TateSeries.constant(self.params, c0)
        v0 = c0.valuation()
        if not rest.is_zero() and not rest.gauss_norm() > v0:
            raise ConvergenceError("series is not a unit below precision")
        c0_inv = c0.invert()
        u = rest.scalar_mul(c0_inv)
        # sum (-u)^k; terminates because v(u) > 0 caps out at the precision
        result = TateSeries.one(self.params)
        term = TateSeries.one(self.params)
        step = u.gauss_norm()
        cap = self.params.field.precision_cap - min(v0.value, 0)
        k = 0
        while not term.is_zero():
            term = -(term * u)
            result = result + term
            k += 1
            if not step.is_infinite and step.value * k > cap:
                break
        return result.scalar_mul(c0_inv)

    # -- structural operations ---------------------------------------------------

    def rename(self, mapping: dict) -> "TateSeries":
        new_vars = tuple(mapping.get(v, v) for v in self.params.variables)
        new_params = SeriesParams(
            self.params.field, new_vars, self.params.degree_cap, self.params.var_levels
        )
        return TateSeries(new_params, self._terms)

    def extend_params(self, new_params: SeriesParams) -> "TateSeries":
        """Reinterpret over a superset of variables (zero exponents added)."""
        if new_params.field != self.params.field:
            raise ParamsMismatchError("field parameters differ")
        positions = [new_params.index(v) for v in self.params.variables]
        width = len(new_params.variables)
        work = {}
        for exps, coeff in self._terms:
            vec = [Fraction(0)] * width
            for pos, e in zip(positions, exps):
                vec[pos] = e
            work[tuple(vec)] = coeff
        return TateSeries._make(new_params, work)

    def face_restrict(self, name: str, eps: int) -> "TateSeries":
        """Substitute variable = eps in {0, 1}; result lives without it.

        Direct evaluation: 0^e = 0 for e > 0 and 1^e = 1, so fractional
        exponents on the restricted variable are fine.
        """
        if eps not in (0, 1):
            raise ValueError("face value must be 0 or 1")
        i = self.params.index(name)
        new_params = self.params.without(name)
        work: dict = {}
        for exps, coeff in self._terms:
            e = exps[i]
            if eps == 0 and e > 0:
                continue
            key = exps[:i] + exps[i + 1 :]
            if key in work:
                work[key] = work[key] + coeff
            else:
                work[key] = coeff
        return TateSeries._make(new_params, work)

    def frobenius_pullback(self, names=None) -> "TateSeries":
        """Replace each selected variable x by x^p (exponent multiplication)."""
        p = self.params.field.p
        if names is None:
            names = self.params.variables
        idx = {self.params.index(n) for n in names}
        cap = self.params.degree_cap
        work = {}
        for exps, coeff in self._terms:
            vec = tuple(e * p if i in idx else e for i, e in enumerate(exps))
            if sum(vec, Fraction(0)) > cap:
                raise CapError("pullback exceeds the degree cap")
            work[vec] = coeff
        return TateSeries._make(self.params, work)

    def recap(self, cap) -> "TateSeries":
        """Reinterpret under a different degree cap (overflow terms drop)."""
        return TateSeries._make(self.params.with_cap(cap), dict(self._terms))

    def truncate_level(self, h: int) -> "TateSeries":
        """Drop terms with an exponent denominator above p^h (projection T_h)."""
        p = self.params.field.p
        bound = p ** h
        keep = {}
        for exps, coeff in self._terms:
            if all(bound % e.denominator == 0 for e in exps):
                keep[exps] = coeff
        return TateSeries._make(self.params, keep)

    def map_coefficients(self, fn) -> "TateSeries":
        work = {e: fn(c) for e, c in self._terms}
        return TateSeries._make(self.params, work)

    def substitute(self, assignment: dict, allow_unbounded: bool = False) -> "TateSeries":
        """Compose with variable -> series assignments.

        Unassigned variables map to themselves in the target parameter set.
        Assigned series must map into the unit ball (Gauss norm <= 1) unless
        allow_unbounded is set.  A variable occurring with fractional
        exponents can only receive an exact-root monomial (single term with
        digit-one coefficient).
        """
        target = None
        for value in assignment.values():
            if target is None:
                target = value.params
            elif value.params != target:
                raise ParamsMismatchError("assigned series parameters differ")
        if target is None:
            target = self.params
        if not allow_unbounded:
            for name, value in assignment.items():
                if Valuation(Fraction(0)) > value.gauss_norm():
                    raise ConvergenceError(
                        f"assignment for {name!r} leaves the unit ball"
                    )
        images = []
        for i, name in enumerate(self.params.variables):
            if name in assignment:
                images.append(assignment[name])
            else:
                images.append(TateSeries.variable(target, name))
        result = TateSeries.zero(target)
        for exps, coeff in self._terms:
            term = TateSeries.constant(target, coeff)
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                if e.denominator == 1:
                    term = term * (images[i] ** e.numerator)
                else:
                    term = term * _monomial_power(images[i], e)
            result = result + term
        return result

    # -- comparisons and serialization ----------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, TateSeries)
            and self.params == other.params
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.params, self._terms))

    def __repr__(self):
        if not self._terms:
            return "TateSeries(0)"
        bits = []
        for exps, coeff in self._terms[:6]:
            mono = "*".join(
                f"{v}^({e})"
                for v, e in zip(self.params.variables, exps)
                if e != 0
            )
            bits.append(f"({coeff!r}){('*' + mono) if mono else ''}")
        more = "" if len(self._terms) <= 6 else f" + {len(self._terms) - 6} more"
        return "TateSeries(" + " + ".join(bits) + more + ")"

    def to_json(self) -> dict:
        terms = []
        for exps, coeff in self._terms:
            emap = {
                v: _fraction_str(e)
                for v, e in zip(self.params.variables, exps)
                if e != 0
            }
            terms.append({"exps": emap, "coeff": coeff.to_json()})
        return {
            "field": self.params.field.to_json(),
            "vars": list(self.params.variables),
            "levels": list(self.params.var_levels),
            "deg_cap": _fraction_str(self.params.degree_cap),
            "terms": terms,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TateSeries":
        try:
            field = FieldParams.from_json(data["field"])
            variables = tuple(str(v) for v in data["vars"])
            levels = tuple(int(h) for h in data.get("levels", [field.level] * len(variables)))
            cap = _parse_fraction(data["deg_cap"])
            params = SeriesParams(field, variables, cap, levels)
            work = {}
            for item in data["terms"]:
                exps = {str(v): _parse_fraction(e) for v, e in item["exps"].items()}
                coeff = FieldElement.from_json(item["coeff"])
                if coeff.params != field:
                    raise SchemaError("coefficient field differs from series field")
                vec = cls._normalize_exponents(params, exps)
                work[vec] = work.get(vec, FieldElement.zero(field)) + coeff
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad series data: {exc}") from exc
        return cls._make(params, work)


def _monomial_power(g: TateSeries, e: Fraction) -> TateSeries:
    """g^e for fractional e; g must be an exact-root monomial."""
    if len(g._terms) != 1:
        raise ConvergenceError(
            "fractional exponents need a single-term monomial argument"
        )
    exps, coeff = g._terms[0]
    digits = coeff.digits
    if len(digits) != 1 or next(iter(digits.values())) != 1:
        raise ConvergenceError(
            "fractional exponents need a digit-one monomial coefficient"
        )
    (pi_exp, _), = digits.items()
    new_coeff = FieldElement.pi_power(g.params.field, pi_exp * e)
    new_exps = {
        v: ev * e for v, ev in zip(g.params.variables, exps) if ev != 0
    }
    return TateSeries.monomial(g.params, new_exps, new_coeff)


def gauss_norm(f: TateSeries) -> Valuation:
    return f.gauss_norm()


def support_level(f: TateSeries) -> int:
    return f.support_level()
