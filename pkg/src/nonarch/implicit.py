"""Constructive formal implicit function solving with certified bounds.

A system P_i(sigma, tau) = 0 with invertible tau-Jacobian at a chosen center
is normalized to the shape tau_i = sum c_{iJH} sigma^J tau^H and solved
degree by degree through the homogeneous-part recursion; coefficients live
in an arbitrary truncated series ring, so centers may be ring elements, not
just field constants.  The same machinery powers the homotopy that factors
a map over a finite tower level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ApproximationError,
    ConvergenceError,
    IntegrityError,
    SchemaError,
    SingularityError,
)
from .field import FieldElement, Valuation, _fraction_str, _parse_fraction
from .series import SeriesParams, TateSeries


# ---------------------------------------------------------------------------
# nested representation: multi-index over sigma/tau -> coefficient series


def _zero_key(n):
    return tuple(0 for _ in range(n))


def _compositions(total, parts):
    """Ordered tuples of positive integers with the given sum, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _np_add_into(acc: dict, key, value: TateSeries):
    if key in acc:
        acc[key] = acc[key] + value
    else:
        acc[key] = value
    if acc[key].is_zero():
        del acc[key]


def _np_mul(a: dict, b: dict, cap: int) -> dict:
    out: dict = {}
    for ka, va in a.items():
        da = sum(ka)
        for kb, vb in b.items():
            if da + sum(kb) > cap:
                continue
            key = tuple(x + y for x, y in zip(ka, kb))
            _np_add_into(out, key, va * vb)
    return out


def _np_scale(a: dict, s: TateSeries) -> dict:
    out = {}
    for k, v in a.items():
        prod = v * s
        if not prod.is_zero():
            out[k] = prod
    return out


# ---------------------------------------------------------------------------
# public system types


@dataclass(frozen=True)
class PolySystem:
    """Polynomials over (sigma, tau, coefficient variables) plus a center.

    The center components are series over the coefficient variables alone;
    plain field constants are wrapped as constant series.
    """

    sigma: tuple
    tau: tuple
    polys: tuple
    center_sigma: tuple
    center_tau: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "tau", tuple(self.tau))
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "center_sigma", tuple(self.center_sigma))
        object.__setattr__(self, "center_tau", tuple(self.center_tau))
        if len(self.polys) != len(self.tau):
            raise IntegrityError("need one polynomial per tau variable")
        if len(self.center_sigma) != len(self.sigma):
            raise IntegrityError("center sigma length mismatch")
        if len(self.center_tau) != len(self.tau):
            raise IntegrityError("center tau length mismatch")
        full = self.polys[0].params
        for p in self.polys:
            if p.params != full:
                raise IntegrityError("polynomials live over different parameters")
        coef = self.coef_params
        for val in self.center_sigma + self.center_tau:
            if val.params != coef:
                raise IntegrityError(
                    "center components must live over the coefficient variables"
                )

    @property
    def full_params(self) -> SeriesParams:
        return self.polys[0].params

    @property
    def coef_params(self) -> SeriesParams:
        params = self.full_params
        for name in self.sigma + self.tau:
            params = params.without(name)
        return params

    def to_json(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "tau": list(self.tau),
            "polys": [p.to_json() for p in self.polys],
            "center": {
                "sigma": [v.to_json() for v in self.center_sigma],
                "tau": [v.to_json() for v in self.center_tau],
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolySystem":
        try:
            sigma = tuple(str(v) for v in data["sigma"])
            tau = tuple(str(v) for v in data["tau"])
            polys = tuple(TateSeries.from_json(p) for p in data["polys"])
            center = data["center"]
            cs = tuple(TateSeries.from_json(v) for v in center["sigma"])
            ct = tuple(TateSeries.from_json(v) for v in center["tau"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad system data: {exc}") from exc
        return cls(sigma, tau, polys, cs, ct)


@dataclass(frozen=True)
class NormalizedSystem:
    """tau_i = sum c_{iJH} sigma^J tau^H with the Jacobian already identity."""

    sigma: tuple
    tau: tuple
    coef_params: SeriesParams
    coeffs: tuple  # per i: tuple of ((J, H), coefficient-series) pairs
    bound_valuation: Fraction

    def coeff_map(self, i: int) -> dict:
        return dict(self.coeffs[i])


@dataclass(frozen=True)
class ImplicitSeries:
    """Truncated solution F with per-coefficient bound certification data.

    parts[i] maps a sigma multi-index J to the coefficient of (sigma -
    center)^J in F_i; J = 0 holds the tau center.
    """

    sigma: tuple
    tau: tuple
    coef_params: SeriesParams
    parts: tuple  # per i: tuple of (J, coefficient-series) pairs
    center_sigma: tuple
    degree: int
    bound_valuation: Fraction
    radius_valuation: Fraction

    def part_map(self, i: int) -> dict:
        return dict(self.parts[i])

    def coefficient(self, i: int, J) -> TateSeries:
        J = tuple(int(x) for x in J)
        for key, value in self.parts[i]:
            if key == J:
                return value
        return TateSeries.zero(self.coef_params)

    def homogeneous_part(self, i: int, q: int) -> dict:
        return {J: v for J, v in self.parts[i] if sum(J) == q}

    def evaluate(self, arguments, enforce_radius: bool = True):
        """F at the given coefficient-ring arguments (absolute, not offsets)."""
        deltas = [a - c for a, c in zip(arguments, self.center_sigma)]
        if enforce_radius:
            for d in deltas:
                if not d.gauss_norm() > Valuation(self.radius_valuation):
                    raise ConvergenceError(
                        "argument is outside the certified radius"
                    )
        return self.evaluate_increment(deltas)

    def evaluate_increment(self, deltas):
        out = []
        one = TateSeries.one(self.coef_params)
        power_cache = {}

        def delta_power(i, k):
            if (i, k) not in power_cache:
                if k == 0:
                    power_cache[(i, k)] = one
                else:
                    power_cache[(i, k)] = delta_power(i, k - 1) * deltas[i]
            return power_cache[(i, k)]

        for i in range(len(self.tau)):
            acc = TateSeries.zero(self.coef_params)
            for J, coeff in self.parts[i]:
                term = coeff
                for pos, k in enumerate(J):
                    if k:
                        term = term * delta_power(pos, k)
                acc = acc + term
            out.append(acc)
        return out

    def series(self, i: int) -> TateSeries:
        """Render F_i over sigma plus coefficient variables.

        Monomials in the sigma variables stand for powers of (sigma - center).
        """
        cp = self.coef_params
        params = SeriesParams(
            cp.field,
            self.sigma + cp.variables,
            Fraction(self.degree) + cp.degree_cap,
            tuple(0 for _ in self.sigma) + cp.var_levels,
        )
        acc = TateSeries.zero(params)
        for J, coeff in self.parts[i]:
            ext = coeff.extend_params(params)
            mono = TateSeries.monomial(
                params,
                {v: Fraction(e) for v, e in zip(self.sigma, J) if e},
                FieldElement.one(params.field),
            )
            acc = acc + ext * mono
        return acc

    def to_json(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "tau": list(self.tau),
            "degree": self.degree,
            "bound_valuation": _fraction_str(self.bound_valuation),
            "radius_valuation": _fraction_str(self.radius_valuation),
            "center_sigma": [v.to_json() for v in self.center_sigma],
            "components": [
                [[list(J), coeff.to_json()] for J, coeff in comp]
                for comp in self.parts
            ],
        }


# ---------------------------------------------------------------------------
# splitting and translation


def _split_poly(poly: TateSeries, sigma, tau) -> dict:
    """Full series -> {(J, H): coefficient-series over the remaining vars}."""
    params = poly.params
    sidx = [params.index(v) for v in sigma]
    tidx = [params.index(v) for v in tau]
    drop = set(sidx) | set(tidx)
    coef_params = params
    for name in sigma + tau:
        coef_params = coef_params.without(name)
    out: dict = {}
    for exps, coeff in poly.terms.items():
        J = []
        for i in sidx:
            e = exps[i]
            if e.denominator != 1:
                raise IntegrityError("sigma exponents must be integers")
            J.append(int(e))
        H = []
        for i in tidx:
            e = exps[i]
            if e.denominator != 1:
                raise IntegrityError("tau exponents must be integers")
            H.append(int(e))
        rest = tuple(e for i, e in enumerate(exps) if i not in drop)
        mono = TateSeries._make(coef_params, {rest: coeff})
        _np_add_into(out, (tuple(J), tuple(H)), mono)
    return out


def _shift_variable(nested: dict, which: str, pos: int, value: TateSeries) -> dict:
    """Substitute var -> var + value on the sigma (or tau) slot at pos."""
    if value.is_zero():
        return nested
    from math import comb

    out: dict = {}
    power_cache = {0: TateSeries.one(value.params)}

    def val_power(k):
        if k not in power_cache:
            power_cache[k] = val_power(k - 1) * value
        return power_cache[k]

    for (J, H), coeff in nested.items():
        e = J[pos] if which == "sigma" else H[pos]
        for k in range(e + 1):
            scaled = coeff.scalar_mul_int(comb(e, k)) * val_power(e - k)
            if scaled.is_zero():
                continue
            if which == "sigma":
                key = (J[:pos] + (k,) + J[pos + 1 :], H)
            else:
                key = (J, H[:pos] + (k,) + H[pos + 1 :])
            _np_add_into(out, key, scaled)
    return out


def _ring_matrix_inverse(M, coef_params):
    """Inverse of a series matrix by Gauss-Jordan with unit pivots."""
    m = len(M)
    work = [list(row) + [TateSeries.zero(coef_params)] * m for row in M]
    for i in range(m):
        work[i][m + i] = TateSeries.one(coef_params)
    for col in range(m):
        pivot_row = None
        pivot_inv = None
        for r in range(col, m):
            try:
                pivot_inv = work[r][col].invert()
                pivot_row = r
                break
            except ConvergenceError:
                continue
        if pivot_row is None:
            raise SingularityError(
                "Jacobian is not invertible below precision"
            )
        work[col], work[pivot_row] = work[pivot_row], work[col]
        work[col] = [x * pivot_inv for x in work[col]]
        for r in range(m):
            if r == col:
                continue
            f = work[r][col]
            if f.is_zero():
                continue
            work[r] = [a - f * b for a, b in zip(work[r], work[col])]
    return [row[m:] for row in work]


def normalize_system(sys: PolySystem) -> NormalizedSystem:
    """Translate the center to the origin and make the Jacobian the identity."""
    n, m = len(sys.sigma), len(sys.tau)
    coef_params = sys.coef_params
    nested = [_split_poly(p, sys.sigma, sys.tau) for p in sys.polys]
    for pos, val in enumerate(sys.center_sigma):
        nested = [_shift_variable(d, "sigma", pos, val) for d in nested]
    for pos, val in enumerate(sys.center_tau):
        nested = [_shift_variable(d, "tau", pos, val) for d in nested]

    zero_key = (_zero_key(n), _zero_key(m))
    for i, d in enumerate(nested):
        const = d.get(zero_key)
        if const is not None and not const.is_zero():
            raise IntegrityError(
                f"P_{i} does not vanish at the center below precision"
            )

    def unit_tau(j):
        return tuple(1 if t == j else 0 for t in range(m))

    jac = [
        [nested[i].get((_zero_key(n), unit_tau(j)), TateSeries.zero(coef_params))
         for j in range(m)]
        for i in range(m)
    ]
    inv = _ring_matrix_inverse(jac, coef_params)

    normalized = []
    for i in range(m):
        acc: dict = {}
        for j in range(m):
            f = inv[i][j]
            if f.is_zero():
                continue
            for key, coeff in nested[j].items():
                _np_add_into(acc, key, f * coeff)
        normalized.append(acc)

    one = TateSeries.one(coef_params)
    coeffs = []
    min_val = Valuation(Fraction(0))
    for i in range(m):
        row = {}
        for (J, H), coeff in normalized[i].items():
            if (J, H) == (_zero_key(n), unit_tau(i)):
                if coeff != one:
                    raise IntegrityError("normalization failed to reach identity")
                continue
            if sum(J) == 0 and sum(H) == 1:
                if not coeff.is_zero():
                    raise IntegrityError(
                        "linear tau coefficients must vanish after normalization"
                    )
                continue
            if sum(J) == 0 and sum(H) == 0:
                if not coeff.is_zero():
                    raise IntegrityError("constant term must vanish")
                continue
            c = -coeff
            row[(J, H)] = c
            v = c.gauss_norm()
            if v < min_val:
                min_val = v
        if (_zero_key(n), unit_tau(i)) not in normalized[i]:
            raise IntegrityError("normalization failed to reach identity")
        coeffs.append(tuple(sorted(row.items())))

    bound = -min_val.value if not min_val.is_infinite and min_val.value < 0 else Fraction(0)
    return NormalizedSystem(sys.sigma, sys.tau, coef_params, tuple(coeffs), bound)


# ---------------------------------------------------------------------------
# the degree-by-degree recursion


def solve_formal(nsys: NormalizedSystem, degree: int,
                 center_sigma=None, center_tau=None) -> ImplicitSeries:
    """Unique F with F(0) = 0 and tau = F(sigma) solving the normalized system.

    Homogeneous parts are produced by enumerating, for every q, the system's
    support keys (J, H) together with all ordered compositions of q - |J|
    into |H| positive parts; the composition entries index previously solved
    homogeneous parts, and the excluded-case assertion verifies that nothing
    at degree >= q is ever referenced.
    """
    n, m = len(nsys.sigma), len(nsys.tau)
    cp = nsys.coef_params
    if center_sigma is None:
        center_sigma = tuple(TateSeries.zero(cp) for _ in range(n))
    if center_tau is None:
        center_tau = tuple(TateSeries.zero(cp) for _ in range(m))

    hom = [{0: {}} for _ in range(m)]  # hom[i][q] = {J: coeff}

    for q in range(1, degree + 1):
        for i in range(m):
            acc: dict = {}
            for (J, H), c in nsys.coeffs[i]:
                base = sum(J)
                need = q - base
                slots = [r for r in range(m) for _ in range(H[r])]
                if not slots:
                    if need == 0:
                        _np_add_into(acc, J, c)
                    continue
                if need < len(slots):
                    continue
                for comp in _compositions(need, len(slots)):
                    for part in comp:
                        if part >= q:
                            raise AssertionError(
                                "recursion referenced a part at degree >= q; "
                                "the structural vanishing must have failed"
                            )
                    prod = None
                    dead = False
                    for r, k in zip(slots, comp):
                        factor = hom[r].get(k)
                        if not factor:
                            dead = True
                            break
                        prod = factor if prod is None else _np_mul(prod, factor, degree)
                        if not prod:
                            dead = True
                            break
                    if dead:
                        continue
                    for key, value in prod.items():
                        shifted = tuple(a + b for a, b in zip(key, J))
                        _np_add_into(acc, shifted, value * c)
            hom[i][q] = acc

    parts = []
    for i in range(m):
        comp: dict = {}
        if not center_tau[i].is_zero():
            comp[_zero_key(n)] = center_tau[i]
        for q in range(1, degree + 1):
            for J, value in hom[i][q].items():
                comp[J] = value
        parts.append(tuple(sorted(comp.items())))

    bound = nsys.bound_valuation
    return ImplicitSeries(
        nsys.sigma,
        nsys.tau,
        cp,
        tuple(parts),
        tuple(center_sigma),
        degree,
        bound,
        2 * bound,
    )


def solve_at_point(sys: PolySystem, degree: int) -> ImplicitSeries:
    """Translate to the center, normalize, solve, and translate back."""
    nsys = normalize_system(sys)
    return solve_formal(nsys, degree, sys.center_sigma, sys.center_tau)


def residual(nsys: NormalizedSystem, F: ImplicitSeries):
    """Nested coefficients of F_i - sum c sigma^J prod F^H, through the degree.

    Computed by plain nested-polynomial composition of the complete solution,
    a different route than the degree recursion that produced F.
    """
    n, m = len(nsys.sigma), len(nsys.tau)
    cap = F.degree
    comps = []
    for i in range(m):
        comps.append({J: v for J, v in F.parts[i] if sum(J) > 0})
    out = []
    for i in range(m):
        acc = dict(comps[i])
        for (J, H), c in nsys.coeffs[i]:
            if sum(J) > cap:
                continue
            prod = {J: c}
            dead = False
            for r in range(m):
                for _ in range(H[r]):
                    prod = _np_mul(prod, comps[r], cap)
                    if not prod:
                        dead = True
                        break
                if dead:
                    break
            if dead:
                continue
            for key, value in prod.items():
                _np_add_into(acc, key, -value)
        out.append(acc)
    return out


def residual_is_zero(nsys: NormalizedSystem, F: ImplicitSeries) -> bool:
    return all(not r for r in residual(nsys, F))


def certify_bounds(F: ImplicitSeries, nsys: NormalizedSystem) -> dict:
    """Verify v(d_{iI}) >= -|I| v(pi_B) for every stored coefficient.

    The certification is a finite-prefix statement about the stored degrees
    plus the rescaling bound; the report says so explicitly.
    """
    bound = nsys.bound_valuation
    witness = None
    for i in range(len(F.tau)):
        for J, coeff in F.parts[i]:
            size = sum(J)
            if size == 0:
                continue
            needed = Valuation(Fraction(-size) * bound)
            if not coeff.gauss_norm() >= needed:
                witness = {"component": i, "index": list(J)}
                break
        if witness:
            break
    return {
        "bound_ok": witness is None,
        "witness": witness,
        "bound_valuation": _fraction_str(bound),
        "radius_valuation": _fraction_str(2 * bound),
        "finite_prefix": True,
        "degree": F.degree,
    }


# ---------------------------------------------------------------------------
# tower pullback


def system_pullback(sys: PolySystem, power: int) -> PolySystem:
    """Replace sigma by sigma^power in every polynomial (one tower step is p)."""
    polys = []
    for poly in sys.polys:
        out = poly
        for _ in range(_p_exponent(power, sys.full_params.field.p)):
            out = out.frobenius_pullback(sys.sigma)
        polys.append(out)
    return PolySystem(sys.sigma, sys.tau, tuple(polys), sys.center_sigma, sys.center_tau)


def _p_exponent(power: int, p: int) -> int:
    h = 0
    while power > 1:
        if power % p:
            raise ValueError("pullback power must be a power of p")
        power //= p
        h += 1
    return h


def pullback_check(F_h: ImplicitSeries, F_h1: ImplicitSeries, p: int) -> bool:
    """Does F at level h+1 equal F at level h composed with sigma -> sigma^p?

    Compared through the largest degree where both sides are determined.
    """
    if F_h.coef_params != F_h1.coef_params or F_h.sigma != F_h1.sigma:
        return False
    limit = min(F_h1.degree, p * F_h.degree)
    for i in range(len(F_h.tau)):
        lhs = {J: v for J, v in F_h1.parts[i] if sum(J) <= limit}
        rhs = {}
        for J, v in F_h.parts[i]:
            scaled = tuple(p * x for x in J)
            if sum(scaled) <= limit:
                rhs[scaled] = v
        if lhs != rhs:
            return False
    return True


def radius_growth_step(rho: Fraction) -> Fraction:
    """One tower step on the convergence threshold: rho -> max(rho - 1, 0)."""
    rho = Fraction(rho)
    if rho < 0:
        raise ValueError("threshold must be non-negative")
    return max(rho - 1, Fraction(0))


def radius_step_count(rho: Fraction, p: int) -> int:
    """Steps until the threshold drops below 1/p (norm above |p|^(1/p))."""
    rho = Fraction(rho)
    target = Fraction(1, p)
    count = 0
    while rho >= target:
        rho = radius_growth_step(rho)
        count += 1
    return count


# ---------------------------------------------------------------------------
# homotopy factorization over a tower


@dataclass(frozen=True)
class HomotopyFactorization:
    """H(chi) with H(0) the original map and H(1) at a finite level."""

    sigma: tuple
    tau: tuple
    chi: str
    h_sigma: tuple
    h_tau: tuple
    level: int
    radius_valuation: Fraction
    s_trunc: tuple
    implicit: ImplicitSeries

    def face(self, eps: int):
        cap = self.s_trunc[0].params.degree_cap
        sig = tuple(
            c.face_restrict(self.chi, eps).recap(cap) for c in self.h_sigma
        )
        tau = tuple(
            c.face_restrict(self.chi, eps).recap(cap) for c in self.h_tau
        )
        return sig, tau


def _embed_system(sys: PolySystem, ambient: SeriesParams,
                  s, t) -> PolySystem:
    """Re-center the system over the ambient coefficient ring at (s, t)."""
    target = ambient.extend(sys.sigma + sys.tau,
                            tuple(0 for _ in sys.sigma + sys.tau))
    polys = tuple(p.extend_params(target) for p in sys.polys)
    return PolySystem(sys.sigma, sys.tau, polys, tuple(s), tuple(t))


def homotopy_factor(sys: PolySystem, s, t, degree: int, chi: str = "chi",
                    epsilon: Fraction | None = None,
                    max_level: int | None = None) -> HomotopyFactorization:
    """Factor the map (s, t) through a finite level, up to homotopy.

    The homotopy follows the substitution formula: the sigma components
    interpolate s toward its level truncation along chi, and the tau
    components apply the implicit solution to the interpolated arguments.
    The chosen truncation level is the smallest one whose gap beats the
    certified radius and keeps the far face power-bounded; the reported
    level is the discovered support level of the chi = 1 face.
    """
    ambient = s[0].params
    for comp in tuple(s) + tuple(t):
        if not comp.is_power_bounded():
            raise IntegrityError("map data must be power-bounded")
    embedded = _embed_system(sys, ambient, s, t)
    F = solve_at_point(embedded, degree)
    rho = F.radius_valuation
    threshold = rho if epsilon is None else max(rho, Fraction(epsilon))

    if max_level is None:
        max_level = max((lv for lv in ambient.var_levels), default=0)
    chosen = None
    for h in range(0, max_level + 1):
        s_trunc = tuple(x.truncate_level(h) for x in s)
        deltas = [a - b for a, b in zip(s_trunc, s)]
        if not all(d.gauss_norm() > Valuation(threshold) for d in deltas):
            continue
        face_vals = F.evaluate_increment(deltas)
        if all(v.is_power_bounded() for v in face_vals):
            chosen = (h, s_trunc, deltas, face_vals)
            break
    if chosen is None:
        raise ApproximationError(
            "no truncation level meets the radius threshold with a "
            "power-bounded far face"
        )
    h, s_trunc, deltas, face_vals = chosen

    # chi powers carry up to `degree` extra weighted degree; give the
    # interpolation that headroom so the chi = 1 face sums exactly
    extended = ambient.extend((chi,), (0,)).with_cap(
        ambient.degree_cap + Fraction(degree)
    )
    chi_var = TateSeries.variable(extended, chi)
    h_sigma = []
    for x, d in zip(s, deltas):
        h_sigma.append(x.extend_params(extended) + d.extend_params(extended) * chi_var)
    power_cache: dict = {}

    def delta_power(pos, k):
        if k == 0:
            return TateSeries.one(ambient)
        if (pos, k) not in power_cache:
            power_cache[(pos, k)] = delta_power(pos, k - 1) * deltas[pos]
        return power_cache[(pos, k)]

    h_tau = []
    for i in range(len(sys.tau)):
        acc = TateSeries.zero(extended)
        for J, coeff in F.parts[i]:
            size = sum(J)
            term = coeff
            for pos, k in enumerate(J):
                if k:
                    term = term * delta_power(pos, k)
            acc = acc + term.extend_params(extended) * chi_var ** size
        h_tau.append(acc)

    level = 0
    for comp in list(s_trunc) + list(face_vals):
        level = max(level, comp.support_level())

    return HomotopyFactorization(
        sys.sigma, sys.tau, chi, tuple(h_sigma), tuple(h_tau),
        level, rho, s_trunc, F,
    )


def verify_homotopy(result: HomotopyFactorization, s, t) -> dict:
    """Exact face checks for a computed factorization."""
    sig0, tau0 = result.face(0)
    sig1, tau1 = result.face(1)
    near_ok = sig0 == tuple(s) and tau0 == tuple(t)
    far_level = max(
        (c.support_level() for c in sig1 + tau1), default=0
    )
    return {
        "near_face_equals_input": near_ok,
        "far_face_level": far_level,
        "level_reported": result.level,
        "far_face_within_level": far_level <= result.level,
        "radius_valuation": _fraction_str(result.radius_valuation),
    }
