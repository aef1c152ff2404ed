import random
from fractions import Fraction

import pytest

from nonarch.errors import ApproximationError, IntegrityError, SingularityError
from nonarch.field import FieldElement, FieldParams, Valuation
from nonarch.implicit import (
    HomotopyFactorization,
    ImplicitSeries,
    PolySystem,
    certify_bounds,
    homotopy_factor,
    normalize_system,
    pullback_check,
    radius_growth_step,
    radius_step_count,
    residual,
    residual_is_zero,
    solve_at_point,
    solve_formal,
    system_pullback,
    verify_homotopy,
)
from nonarch.series import SeriesParams, TateSeries, series_params


def build_params(p=2, prec=16, extra=(), cap=10, level=0, extra_levels=None):
    field = FieldParams(p, 0, level, Fraction(prec))
    variables = ("s", "t") + tuple(extra)
    if extra_levels is None:
        extra_levels = tuple(0 for _ in extra)
    return series_params(field, variables, cap, (0, 0) + tuple(extra_levels))


def catalan_system(p=2, prec=16, D=10):
    # t = s + t^2
    params = build_params(p, prec, cap=D)
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    poly = t - s - t * t
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    return PolySystem(("s",), ("t",), (poly,), (zero,), (zero,))


def fixed_point_oracle(sys: PolySystem, D: int):
    """Independent route: iterate t <- rhs(t) on plain truncated series."""
    params = sys.full_params.with_cap(Fraction(D))
    polys = [TateSeries(params, p._terms) for p in sys.polys]
    t_names = sys.tau
    rhs = [TateSeries.variable(params, name) - poly for name, poly in zip(t_names, polys)]
    current = [TateSeries.zero(params) for _ in t_names]
    for _ in range(D + 1):
        assign = dict(zip(t_names, current))
        current = [r.substitute(assign, allow_unbounded=True) for r in rhs]
    return current


def oracle_coefficients(sys, D, i=0):
    sol = fixed_point_oracle(sys, D)[i]
    out = {}
    params = sol.params
    sidx = [params.index(v) for v in sys.sigma]
    for exps, coeff in sol.terms.items():
        key = tuple(int(exps[j]) for j in sidx)
        out[key] = coeff
    return out


def test_linear_identity():
    params = build_params()
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    sys = PolySystem(("s",), ("t",), (t - s,), (zero,), (zero,))
    F = solve_at_point(sys, 6)
    assert F.coefficient(0, (1,)) == TateSeries.one(coef)
    assert all(sum(J) <= 1 for J, _ in F.parts[0])


def test_catalan_coefficients():
    sys = catalan_system(D=10)
    F = solve_at_point(sys, 8)
    coef = F.coef_params
    expected = [1, 1, 2, 5, 14, 42, 132, 429]
    for k, c in enumerate(expected, start=1):
        want = TateSeries.constant(coef, FieldElement.from_integer(coef.field, c))
        assert F.coefficient(0, (k,)) == want


def test_catalan_matches_fixed_point_oracle():
    for p in (2, 3, 5):
        sys = catalan_system(p=p, D=9)
        F = solve_at_point(sys, 8)
        oracle = oracle_coefficients(sys, 8)
        for k in range(1, 9):
            assert F.coefficient(0, (k,)).constant_term() == oracle.get((k,))


def test_residual_vanishes():
    sys = catalan_system(D=10)
    nsys = normalize_system(sys)
    F = solve_formal(nsys, 8)
    assert residual_is_zero(nsys, F)


def test_two_sigma_system_against_oracle():
    # t = s1 s2 + s1 t, solved by undetermined coefficients via the oracle
    params = series_params(FieldParams(3, 0, 0, Fraction(16)), ("s1", "s2", "t"), 8,
                           (0, 0, 0))
    s1 = TateSeries.variable(params, "s1")
    s2 = TateSeries.variable(params, "s2")
    t = TateSeries.variable(params, "t")
    poly = t - s1 * s2 - s1 * t
    coef = params.without("s1").without("s2").without("t")
    zero = TateSeries.zero(coef)
    sys = PolySystem(("s1", "s2"), ("t",), (poly,), (zero, zero), (zero,))
    F = solve_at_point(sys, 6)
    oracle = oracle_coefficients(sys, 6)
    for J, coeff in F.parts[0]:
        assert coeff.constant_term() == oracle.get(J), J
    for J, c in oracle.items():
        if 0 < sum(J) <= 6:
            assert F.coefficient(0, J).constant_term() == c


def test_normalize_scales_by_unit():
    # 2t - s over Q3 becomes t - (1/2) s
    params = build_params(p=3)
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    poly = t.scalar_mul_int(2) - s
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    nsys = normalize_system(PolySystem(("s",), ("t",), (poly,), (zero,), (zero,)))
    c = nsys.coeff_map(0)[((1,), (0,))]
    half = FieldElement.from_integer(coef.field, 2).invert()
    assert c == TateSeries.constant(coef, half)


def test_normalize_triangular_jacobian():
    # Jacobian [[1, pi],[0, 1]]: strictly triangular correction applied
    field = FieldParams(2, 0, 0, Fraction(12))
    params = series_params(field, ("s", "t1", "t2"), 8, (0, 0, 0))
    s = TateSeries.variable(params, "s")
    t1 = TateSeries.variable(params, "t1")
    t2 = TateSeries.variable(params, "t2")
    pi = FieldElement.pi_power(field, Fraction(1))
    p1 = t1 + t2.scalar_mul(pi) - s
    p2 = t2 - s * s
    coef = params.without("s").without("t1").without("t2")
    zero = TateSeries.zero(coef)
    sys = PolySystem(("s",), ("t1", "t2"), (p1, p2), (zero,), (zero, zero))
    nsys = normalize_system(sys)
    # output Jacobian is the identity: no linear tau coefficients remain
    for i in range(2):
        for (J, H), _ in nsys.coeffs[i]:
            assert not (sum(J) == 0 and sum(H) == 1)
    F = solve_formal(nsys, 6)
    assert residual_is_zero(nsys, F)
    # explicit solution: t2 = s^2, t1 = s - pi s^2
    one = TateSeries.one(coef)
    assert F.coefficient(1, (2,)) == one
    assert F.coefficient(0, (1,)) == one
    assert F.coefficient(0, (2,)) == TateSeries.constant(coef, -pi)


def test_singular_jacobian_rejected():
    params = build_params()
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    with pytest.raises(SingularityError):
        normalize_system(PolySystem(("s",), ("t",), (t * t - s,), (zero,), (zero,)))


def test_center_must_be_root():
    params = build_params()
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    one = TateSeries.one(coef)
    with pytest.raises(IntegrityError):
        normalize_system(PolySystem(("s",), ("t",), (t - s,), (zero,), (one,)))


def test_solve_at_point_translated():
    # t^2 - s at (1, 1) over Q3: F = 1 + (s-1)/2 - (s-1)^2/8 + ...
    params = build_params(p=3)
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    one = TateSeries.one(coef)
    sys = PolySystem(("s",), ("t",), (t * t - s,), (one,), (one,))
    F = solve_at_point(sys, 5)
    fe = coef.field
    half = FieldElement.from_integer(fe, 2).invert()
    eighth = FieldElement.from_integer(fe, 8).invert()
    assert F.coefficient(0, (0,)) == one
    assert F.coefficient(0, (1,)) == TateSeries.constant(coef, half)
    assert F.coefficient(0, (2,)) == TateSeries.constant(coef, -eighth)
    # Newton-style oracle on the translated system: (1 + u)^(1/2) expansion
    # check F(s)^2 = s through degree 5: substitute back
    total = {}
    for J, c in F.parts[0]:
        total[J[0]] = c.constant_term()
    # square the series sum total_k (s-1)^k and compare with s = 1 + (s-1)
    prod = {}
    for a, ca in total.items():
        for b, cb in total.items():
            if a + b <= 5:
                prod[a + b] = prod.get(a + b, FieldElement.zero(fe)) + ca * cb
    assert prod[0] == FieldElement.one(fe)
    assert prod[1] == FieldElement.one(fe)
    for k in range(2, 6):
        assert prod.get(k, FieldElement.zero(fe)).is_zero()


def test_translation_invariance_linear():
    params = build_params(p=5)
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    c = TateSeries.constant(coef, FieldElement.from_integer(coef.field, 3))
    sys = PolySystem(("s",), ("t",), (t - s,), (c,), (c,))
    F = solve_at_point(sys, 5)
    assert F.coefficient(0, (0,)) == c
    assert F.coefficient(0, (1,)) == TateSeries.one(coef)
    assert all(sum(J) <= 1 for J, _ in F.parts[0])


def test_certify_catalan_bounds():
    sys = catalan_system(D=10)
    nsys = normalize_system(sys)
    F = solve_formal(nsys, 8)
    report = certify_bounds(F, nsys)
    assert report["bound_ok"]
    assert report["bound_valuation"] == "0/1"
    assert report["radius_valuation"] == "0/1"


def test_certify_negative_valuation_coefficients():
    # adversarial: coefficient of valuation -1; bound v(d) >= -|I| verified
    params = build_params(p=2, prec=24, cap=8)
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    half = FieldElement.pi_power(coef.field, Fraction(1)).invert()
    poly = t - s - (t * t).scalar_mul(half)
    zero = TateSeries.zero(coef)
    sys = PolySystem(("s",), ("t",), (poly,), (zero,), (zero,))
    nsys = normalize_system(sys)
    assert nsys.bound_valuation == 1
    F = solve_formal(nsys, 6)
    report = certify_bounds(F, nsys)
    assert report["bound_ok"]
    assert residual_is_zero(nsys, F)


def test_certification_failure_has_witness():
    sys = catalan_system(D=10)
    nsys = normalize_system(sys)
    F = solve_formal(nsys, 6)
    # forge a tighter bound than the coefficients satisfy
    from dataclasses import replace
    tight = replace(nsys, bound_valuation=Fraction(-1))
    report = certify_bounds(F, tight)
    assert not report["bound_ok"]
    assert report["witness"] is not None


def test_pullback_functional_equation():
    # base t = s + t^2; towers at s^p and s^(p^2)
    p = 2
    sys0 = catalan_system(p=p, D=16, prec=16)
    sys1 = system_pullback(sys0, p)
    sys2 = system_pullback(sys1, p)
    F0 = solve_at_point(sys0, 8)
    F1 = solve_at_point(sys1, 8)
    F2 = solve_at_point(sys2, 8)
    assert pullback_check(F0, F1, p)
    assert pullback_check(F1, F2, p)
    # negative control: perturb one coefficient
    parts = [list(comp) for comp in F1.parts]
    coef = F1.coef_params
    parts[0][0] = (parts[0][0][0], parts[0][0][1] + TateSeries.one(coef))
    bad = ImplicitSeries(F1.sigma, F1.tau, coef, tuple(tuple(c) for c in parts),
                         F1.center_sigma, F1.degree, F1.bound_valuation,
                         F1.radius_valuation)
    assert not pullback_check(F0, bad, p)


def test_radius_growth():
    assert radius_growth_step(Fraction(3)) == 2
    assert radius_growth_step(Fraction(1, 2)) == 0
    assert radius_step_count(Fraction(5), 2) == 5
    assert radius_step_count(Fraction(0), 2) == 0


def tower_params(p=2, level=3, prec=24, cap=8):
    field = FieldParams(p, 0, level, Fraction(prec))
    return series_params(field, ("x",), cap, (level,))


def test_homotopy_factor_already_low_level():
    params = tower_params()
    x = TateSeries.variable(params, "x")
    sys = _linear_system(params)
    res = homotopy_factor(sys, (x,), (x,), 6)
    report = verify_homotopy(res, (x,), (x,))
    assert report["near_face_equals_input"]
    assert report["far_face_within_level"]
    assert res.level == 0
    # s is already at level 0, so the homotopy is constant in chi
    sig1, tau1 = res.face(1)
    assert sig1 == (x,)
    assert tau1 == (x,)


def _linear_system(ambient_params, p_char=None):
    field = ambient_params.field
    params = series_params(field, ("s", "t"), ambient_params.degree_cap, (0, 0))
    s = TateSeries.variable(params, "s")
    t = TateSeries.variable(params, "t")
    coef = params.without("s").without("t")
    zero = TateSeries.zero(coef)
    return PolySystem(("s",), ("t",), (t - s,), (zero,), (zero,))


def test_homotopy_factor_drops_deep_term():
    params = tower_params()
    x = TateSeries.variable(params, "x")
    deep = TateSeries.monomial(
        params, {"x": Fraction(1, 4)},
        FieldElement.pi_power(params.field, Fraction(3)),
    )
    s = x + deep
    sys = _linear_system(params)
    res = homotopy_factor(sys, (s,), (s,), 6)
    report = verify_homotopy(res, (s,), (s,))
    assert report["near_face_equals_input"]
    assert report["far_face_within_level"]
    # the valuation-3 level-2 term clears the radius threshold 0, so the
    # minimal admissible truncation is level 0 and both faces verify
    assert res.level == 0
    sig1, _ = res.face(1)
    assert sig1 == (x,)
    # H is affine in chi with a nonzero chi part
    assert res.h_sigma[0].face_restrict(res.chi, 1) != res.h_sigma[0].face_restrict(res.chi, 0)


def test_homotopy_factor_epsilon_forces_level():
    params = tower_params()
    x = TateSeries.variable(params, "x")
    deep = TateSeries.monomial(
        params, {"x": Fraction(1, 4)},
        FieldElement.pi_power(params.field, Fraction(3)),
    )
    s = x + deep
    sys = _linear_system(params)
    res = homotopy_factor(sys, (s,), (s,), 6, epsilon=Fraction(3))
    # now v = 3 is not strictly above the threshold: the deep term stays
    assert res.level == 2
    sig1, tau1 = res.face(1)
    assert sig1 == (s,)


def test_homotopy_factor_nonlinear_faces():
    # far-face residual is O(delta^(D+1)) = O(pi^18); cap 16 truncates it
    # to structural zero, which is the below-precision exactness contract
    params = tower_params(p=2, level=2, prec=16, cap=8)
    field = params.field
    x = TateSeries.variable(params, "x")
    pi2 = FieldElement.pi_power(field, Fraction(2))
    s = x + TateSeries.monomial(params, {"x": Fraction(1, 2)}, pi2)
    # solve t = s + t^2 at the moving center: t0 with t0 = s + t0^2
    sys_params = series_params(field, ("s", "t"), params.degree_cap, (0, 0))
    sv = TateSeries.variable(sys_params, "s")
    tv = TateSeries.variable(sys_params, "t")
    poly = tv - sv - tv * tv
    coef = sys_params.without("s").without("t")
    zero = TateSeries.zero(coef)
    base = PolySystem(("s",), ("t",), (poly,), (zero,), (zero,))
    # center tau: iterate t = s + t^2 over the ambient ring; fractional
    # exponents step the degree filtration by 1/2, so run past 2 * cap
    t_center = TateSeries.zero(params)
    for _ in range(20):
        t_center = s + t_center * t_center
    res = homotopy_factor(base, (s,), (t_center,), 8)
    report = verify_homotopy(res, (s,), (t_center,))
    assert report["near_face_equals_input"]
    assert report["far_face_within_level"]
    sig1, tau1 = res.face(1)
    # far face satisfies the system exactly below precision
    for comp, arg in zip(tau1, sig1):
        resid = comp - arg - comp * comp
        assert resid.is_zero()


def test_homotopy_rejects_unbounded_data():
    params = tower_params(p=2, level=1, prec=12, cap=6)
    x = TateSeries.variable(params, "x")
    bad = x.scalar_mul(FieldElement.pi_power(params.field, Fraction(1)).invert())
    sys = _linear_system(params)
    with pytest.raises(IntegrityError):
        homotopy_factor(sys, (bad,), (bad,), 4)


def test_homotopy_level_budget_exhausted():
    # a level budget below the needed truncation level fails cleanly
    params = tower_params(p=2, level=3, prec=16, cap=8)
    x = TateSeries.variable(params, "x")
    deep = TateSeries.monomial(
        params, {"x": Fraction(1, 8)},
        FieldElement.pi_power(params.field, Fraction(1)),
    )
    s = x + deep
    sys = _linear_system(params)
    with pytest.raises(ApproximationError):
        homotopy_factor(sys, (s,), (s,), 6, epsilon=Fraction(2), max_level=1)


def test_solver_deterministic_under_reordering():
    sys = catalan_system(D=10)
    nsys = normalize_system(sys)
    F1 = solve_formal(nsys, 8)
    from dataclasses import replace
    shuffled = replace(nsys, coeffs=tuple(tuple(reversed(row)) for row in nsys.coeffs))
    F2 = solve_formal(shuffled, 8)
    assert F1.parts == F2.parts
