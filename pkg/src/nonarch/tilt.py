"""Desk-scale tilting between the two characteristics.

A tilt element is a finite compatible p-power-root sequence on the
characteristic-0 side together with the characteristic-p expansion it
represents.  Sequences are built by lifting a deep root digit-by-digit and
powering back down, which keeps the compatibility x_{i+1}^p = x_i exact
below the precision cap.  The multiplicative projection returns the first
sequence entry; its accuracy against the untruncated limit grows linearly
in the depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DivisionError,
    IntegrityError,
    LevelError,
    PrecisionError,
    SchemaError,
)
from .field import (
    FieldElement,
    FieldParams,
    Valuation,
    make_element,
    teichmuller,
)
from .series import SeriesParams, TateSeries, series_params


def flat_root(y: FieldElement, k: int) -> FieldElement:
    """y^(1/p^k) on the characteristic-p side (exact; digits are Frobenius-fixed)."""
    if y.params.characteristic == 0:
        raise IntegrityError("p-power roots are exact only in characteristic p")
    if k == 0:
        return y
    p = y.params.p
    scale = p ** k
    if y.support_level() + k > y.params.level:
        raise LevelError(
            f"root depth {k} needs level {y.support_level() + k}, "
            f"have {y.params.level}"
        )
    return make_element(y.params, [(e / scale, d) for e, d in y.digits.items()])


def digit_lift(y: FieldElement, char0: FieldParams) -> FieldElement:
    """Teichmuller-per-digit section of the mod-pi residue identification."""
    if y.params.characteristic == 0:
        raise IntegrityError("digit lift expects a characteristic-p element")
    acc = FieldElement.zero(char0)
    for e, d in y.digits.items():
        acc = acc + teichmuller(char0, d).shift(e)
    return acc


@dataclass(frozen=True)
class TiltElement:
    """Compatible sequence x_0..x_m with x_{i+1}^p = x_i, plus its flat value."""

    params: FieldParams  # characteristic-0 parameters
    depth: int
    sequence: tuple
    flat_value: FieldElement

    def __post_init__(self):
        if self.params.characteristic != 0:
            raise IntegrityError("sequence side must have characteristic 0")
        if len(self.sequence) != self.depth + 1:
            raise IntegrityError("sequence length must be depth + 1")
        if self.flat_value.params != self.params.flat():
            raise IntegrityError("flat value parameters do not match")
        p = self.params.p
        for i in range(self.depth):
            if self.sequence[i + 1] ** p != self.sequence[i]:
                raise IntegrityError(
                    f"sequence breaks compatibility at depth {i + 1}"
                )
        # mod-pi consistency with the flat expansion at every depth
        for i in range(self.depth + 1):
            want = _residue(digit_lift(flat_root(self.flat_value, i), self.params))
            if _residue(self.sequence[i]) != want:
                raise IntegrityError(
                    f"sequence disagrees with the flat residue at depth {i}"
                )

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_flat(cls, y: FieldElement, depth: int, char0: FieldParams) -> "TiltElement":
        """Lift the p^depth-th root digit-wise and power back down."""
        if char0.characteristic != 0:
            raise IntegrityError("target parameters must have characteristic 0")
        if y.params != char0.flat():
            raise IntegrityError("flat parameters do not match the target")
        root = flat_root(y, depth)
        p = char0.p
        seq = [None] * (depth + 1)
        seq[depth] = digit_lift(root, char0)
        for i in range(depth - 1, -1, -1):
            seq[i] = seq[i + 1] ** p
        return cls(char0, depth, tuple(seq), y)

    @classmethod
    def from_monomial(cls, char0: FieldParams, digit: int, exponent: Fraction,
                      depth: int) -> "TiltElement":
        """The tilt of a single monomial: exact Teichmuller root tower."""
        exponent = Fraction(exponent)
        flat = make_element(char0.flat(), [(exponent, digit)])
        return cls.from_flat(flat, depth, char0)

    @classmethod
    def one(cls, char0: FieldParams, depth: int) -> "TiltElement":
        return cls.from_monomial(char0, 1, Fraction(0), depth)

    # -- operations ------------------------------------------------------------

    def __mul__(self, other: "TiltElement") -> "TiltElement":
        if self.params != other.params:
            raise IntegrityError("mixed parameters in tilt product")
        depth = min(self.depth, other.depth)
        seq = tuple(
            a * b for a, b in zip(self.sequence[: depth + 1], other.sequence[: depth + 1])
        )
        return TiltElement(self.params, depth, seq, self.flat_value * other.flat_value)

    def sharp(self) -> FieldElement:
        """The multiplicative projection: x_0, with stabilization asserted."""
        p = self.params.p
        if self.depth >= 1:
            deep = self.sequence[self.depth] ** (p ** self.depth)
            prev = self.sequence[self.depth - 1] ** (p ** (self.depth - 1))
            if deep != prev:
                raise IntegrityError("sharp projection failed to stabilize")
        return self.sequence[0]

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "sequence": [x.to_json() for x in self.sequence],
            "flat": self.flat_value.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TiltElement":
        try:
            depth = int(data["depth"])
            seq = tuple(FieldElement.from_json(x) for x in data["sequence"])
            flat = FieldElement.from_json(data["flat"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad tilt element: {exc}") from exc
        if not seq:
            raise SchemaError("tilt sequence must be non-empty")
        return cls(seq[0].params, depth, seq, flat)


def _residue(x: FieldElement) -> tuple:
    """Digits below exponent 1 (the mod-pi class)."""
    return tuple((e, d) for e, d in x.digits.items() if e < 1)


def sharp(x: TiltElement) -> FieldElement:
    return x.sharp()


def flat_of_monomial(char0: FieldParams, digit: int, exponent: Fraction,
                     depth: int) -> TiltElement:
    """Spec-level constructor: compatible sequence of a Teichmuller monomial."""
    exponent = Fraction(exponent)
    den_level = 0
    d = exponent.denominator
    while d > 1:
        d //= char0.p
        den_level += 1
    if den_level + depth > char0.level:
        raise LevelError(
            f"monomial exponent {exponent} at depth {depth} exceeds level "
            f"{char0.level}"
        )
    return TiltElement.from_monomial(char0, digit, exponent, depth)


def additive_congruence_check(a: TiltElement) -> bool:
    """Does sharp(a) - 1 agree with sharp(a - 1) mod pi?

    The subtraction happens on the flat side, where it is exact; the sharp
    of the difference is computed at the deepest affordable root depth.
    """
    params = a.params
    one_flat = FieldElement.one(params.flat())
    diff_flat = a.flat_value - one_flat
    lhs = a.sharp() - FieldElement.one(params)
    if diff_flat.is_zero():
        return lhs.valuation() >= Valuation(Fraction(1))
    depth = min(a.depth, params.level - diff_flat.support_level())
    if depth < 0:
        raise LevelError("flat difference needs deeper roots than the level holds")
    rhs = TiltElement.from_flat(diff_flat, depth, params).sharp()
    return (lhs - rhs).valuation() >= Valuation(Fraction(1))


def unit_transfer(a: FieldElement) -> tuple:
    """Transfer a unit of the valuation ring to the flat side.

    Returns (b, certificate) where b is a tilt element whose sharp projection
    satisfies v(sharp(b) * a^-1 - 1) >= 1; the certificate is that valuation.
    The construction reads the digit expansion of a below exponent 1 through
    the residue identification of the two valuation rings mod pi.
    """
    if not a.is_unit():
        raise DivisionError("unit transfer requires a valuation-0 unit")
    params = a.params
    flat_params = params.flat()
    below_one = [(e, d) for e, d in a.digits.items() if e < 1]
    y = make_element(flat_params, below_one)
    depth = max(0, params.level - y.support_level())
    b = TiltElement.from_flat(y, depth, params)
    cert = (b.sharp() * a.invert() - FieldElement.one(params)).valuation()
    return b, cert


# ---------------------------------------------------------------------------
# the explicit level-h cover of the disk neighborhood of 1


@dataclass(frozen=True)
class BallIsomorphism:
    """Coordinate maps between the level-h torus patch and the unit disk.

    The patch is the locus |u - 1| <= |pi| at tower level h presented by the
    relation w^(p^h) = pi u + 1; the disk has coordinate chi.
    """

    h: int
    disk_params: SeriesParams
    patch_params: SeriesParams
    u_of_chi: TateSeries
    w_of_chi: TateSeries
    chi_of_patch: TateSeries

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "u_of_chi": self.u_of_chi.to_json(),
            "w_of_chi": self.w_of_chi.to_json(),
            "chi_of_patch": self.chi_of_patch.to_json(),
        }


def _required_precision(p: int, h: int) -> int:
    from math import comb

    n = p ** h
    worst = max(comb(n, i) for i in range(n + 1))
    k = 0
    power = 1
    while power <= worst:
        power *= p
        k += 1
    return k + 2


def ball_isomorphism(p: int, h: int, prec) -> BallIsomorphism:
    """Construct both coordinate maps at tower level h.

    Raises a precision error when the cap cannot hold the binomial
    coefficients that the verification identities need to see exactly.
    """
    prec = Fraction(prec)
    need = _required_precision(p, h)
    if prec < need:
        raise PrecisionError(
            f"precision cap {prec} too small; the identities at (p, h) = "
            f"({p}, {h}) need at least {need}"
        )
    field = FieldParams(p, 0, max(h, 1), prec)
    n = p ** h
    disk = series_params(field, ("chi",), n, (0,))
    patch = series_params(field, ("u", "w"), n, (0, 0))

    chi = TateSeries.variable(disk, "chi")
    root_inv = FieldElement.pi_power(field, Fraction(-1, n))
    shifted = chi + TateSeries.constant(disk, root_inv)
    u_of_chi = shifted ** n - TateSeries.constant(
        disk, FieldElement.pi_power(field, Fraction(-1))
    )
    w_of_chi = chi.scalar_mul(FieldElement.pi_power(field, Fraction(1, n))) + \
        TateSeries.one(disk)

    w = TateSeries.variable(patch, "w")
    chi_of_patch = (w - TateSeries.one(patch)).scalar_mul(root_inv)

    return BallIsomorphism(h, disk, patch, u_of_chi, w_of_chi, chi_of_patch)


def reduce_patch_relation(f: TateSeries, h: int) -> TateSeries:
    """Rewrite w^(p^h) -> pi u + 1 until all w-exponents are below p^h."""
    params = f.params
    p = params.field.p
    n = p ** h
    u_idx = params.index("u")
    w_idx = params.index("w")
    pi = FieldElement.pi_power(params.field, Fraction(1))
    current = f
    while True:
        hot = None
        for exps, coeff in current.terms.items():
            if exps[w_idx] >= n:
                hot = (exps, coeff)
                break
        if hot is None:
            return current
        exps, coeff = hot
        mono = TateSeries._make(params, {exps: coeff})
        lowered = dict(
            zip(params.variables, exps)
        )
        lowered["w"] = exps[w_idx] - n
        base = TateSeries.monomial(params, lowered, coeff)
        relation = TateSeries.variable(params, "u").scalar_mul(pi) + \
            TateSeries.one(params)
        current = current - mono + base * relation


def verify_ball_isomorphism(data: BallIsomorphism) -> dict:
    """The three exact checks: mutual inverses, norm identity, unit-ball bound."""
    disk = data.disk_params
    patch = data.patch_params
    field = disk.field
    n = field.p ** data.h

    # (i) composites act as the identity on coordinate generators
    chi = TateSeries.variable(disk, "chi")
    comp_disk = data.chi_of_patch.substitute(
        {"u": data.u_of_chi, "w": data.w_of_chi}, allow_unbounded=True
    )
    disk_ok = comp_disk == chi

    u = TateSeries.variable(patch, "u")
    w = TateSeries.variable(patch, "w")
    chi_back = data.chi_of_patch
    comp_u = reduce_patch_relation(
        data.u_of_chi.substitute({"chi": chi_back}, allow_unbounded=True), data.h
    )
    comp_w = reduce_patch_relation(
        data.w_of_chi.substitute({"chi": chi_back}, allow_unbounded=True), data.h
    )
    patch_ok = comp_u == u and comp_w == w

    # (ii) v((w - 1)^(p^h)) = 1 in the quotient presentation
    wm1 = w - TateSeries.one(patch)
    norm_series = reduce_patch_relation(wm1 ** n, data.h)
    norm_ok = norm_series.gauss_norm() == Valuation(Fraction(1))

    # (iii) the disk-side coordinate stays on the unit sphere
    unit_ok = data.u_of_chi.gauss_norm() == Valuation(Fraction(0))
    bounded_ok = data.u_of_chi.is_power_bounded() and data.w_of_chi.is_power_bounded()

    return {
        "composite_disk_identity": disk_ok,
        "composite_patch_identity": patch_ok,
        "norm_identity": norm_ok,
        "unit_ball_estimate": unit_ok and bounded_ok,
        "all_ok": disk_ok and patch_ok and norm_ok and unit_ok and bounded_ok,
        "h": data.h,
        "p": field.p,
    }
