from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from venereau import gallery
from venereau.exactpoly import (
    IntegralityError, NotDivisibleError, ParseError, Poly, PolyError, RingMismatchError, RingSpec,
    coeff_in, eval_at, exact_div, format_poly, format_ring, jacobian2, monomial_ideal_member,
    parse_poly, parse_ring, partial_derivative, reduce_mod_monomials, substitute,
)
from venereau.endomap import X4, X4_LOC, PolyMap

from conftest import PLANE, R4, R4L, poly_st

x, y, z, u = X4.gens()
W = z ** 2 + y * u


def P(text, ring=X4):
    return parse_poly(text, ring)


class TestRingSpec:
    def test_duplicate_names(self):
        with pytest.raises(PolyError):
            RingSpec.of("x x")

    def test_laurent_unknown(self):
        with pytest.raises(PolyError):
            RingSpec.of("x y", laurent="z")

    def test_negative_exponent_needs_flag(self):
        with pytest.raises(IntegralityError):
            Poly(X4, {(-1, 0, 0, 0): 1})
        assert Poly(X4_LOC, {(-1, 0, 0, 0): 1}).is_unit

    def test_ring_line_roundtrip(self):
        for ring in (X4, X4_LOC, RingSpec.of("c2 z u", laurent="c2")):
            assert parse_ring(format_ring(ring)) == ring


class TestCanonical:
    def test_zero_coefficients_dropped(self):
        p = Poly(X4, {(1, 0, 0, 0): 2, (0, 1, 0, 0): 0})
        assert p.terms == [(2, (1, 0, 0, 0))]

    def test_graded_lex_order(self):
        p = P("x + y^2 + x*z + 3")
        assert [e for _, e in p.terms] == [(1, 0, 1, 0), (0, 2, 0, 0), (1, 0, 0, 0), (0, 0, 0, 0)]

    def test_equal_means_same_terms(self):
        assert P("x*y + 1") == P("1 + y*x")
        assert hash(P("x*y + 1")) == hash(P("1 + y*x"))


class TestArithmetic:
    def test_additive_identity(self):
        assert W + X4.zero() == W

    def test_w_from_generators(self):
        assert z * z + y * u == P("z^2 + y*u")

    def test_t_expanded(self):
        t = x * z + y * W
        assert t == P("x*z + y*z^2 + y^2*u")

    def test_ring_mismatch(self):
        with pytest.raises(RingMismatchError):
            W + PLANE.var("x")

    def test_negative_power_only_for_units(self):
        xl = X4_LOC.var("x")
        assert xl ** -2 * xl ** 2 == 1
        with pytest.raises(PolyError):
            (xl + 1) ** -1

    def test_int_coercion(self):
        assert 3 - x == -(x - 3)
        assert 2 * x == x + x


class TestSubstitute:
    def test_scaling_g(self):
        xl, yl, zl, ul = X4_LOC.gens()
        g = PolyMap.from_images(X4_LOC, {"y": xl ** -2 * yl, "z": xl * zl, "u": xl ** 4 * ul})
        assert substitute(W.to_ring(X4_LOC), g) == xl ** 2 * W.to_ring(X4_LOC)

    def test_identity(self):
        assert substitute(W, PolyMap.identity(X4)) == W

    def test_t0_under_g(self):
        # t0 = z + y w, so t0(x^-2 y, x z, x^4 u) = x z + y w
        xl, yl, zl, ul = X4_LOC.gens()
        w = W.to_ring(X4_LOC)
        t0 = zl + yl * w
        g = PolyMap.from_images(X4_LOC, {"y": xl ** -2 * yl, "z": xl * zl, "u": xl ** 4 * ul})
        assert substitute(t0, g) == xl * zl + yl * w

    def test_dict_images_into_other_ring(self):
        c2, zz, uu = RingSpec.of("c2 z u", laurent="c2").gens()
        got = substitute(W, {"x": 0 * c2, "y": c2, "z": zz, "u": uu}, target=c2.ring)
        assert got == zz ** 2 + c2 * uu


class TestDerivatives:
    def test_power_rule(self):
        t = PLANE.var("t")
        assert partial_derivative(t ** 3, "t") == 3 * t ** 2

    def test_p3(self):
        xx, v, t, _ = PLANE.gens()
        assert partial_derivative(v * t ** 2 - xx ** 2 * t, "t") == 2 * v * t - xx ** 2

    def test_laurent(self):
        R = RingSpec.of("x t", laurent="x")
        xx, t = R.gens()
        assert partial_derivative(xx ** -1 * t, "x") == -(xx ** -2) * t

    def test_jacobian_identity(self):
        t, xi = PLANE.var("t"), PLANE.var("xi")
        assert jacobian2(t, xi, "t", "xi") == 1

    def test_jacobian_sol(self):
        a, b0 = gallery.make("a_tilde"), gallery.make("b0")
        assert jacobian2(a, b0, "t", "xi") == PLANE.var("x") ** 3


class TestExactDiv:
    def test_zeta_prime(self):
        G = gallery.Gallery()
        v1, eta, t, s = G.make("v", 1), G.make("eta"), G.make("t"), G.make("s")
        assert exact_div(v1 * eta + t ** 2, x) == x * (v1 * u + z ** 2) + s * t

    def test_not_divisible(self):
        with pytest.raises(NotDivisibleError):
            exact_div(y, x)

    def test_theta3(self):
        G = gallery.Gallery()
        v3, t, z3 = G.make("v", 3), G.make("t"), G.make("zeta", 3)
        assert exact_div(t + x * z3 - v3 * z3 ** 2, v3 ** 2) == G.make("theta", 3)

    def test_laurent_monomial_gcd(self):
        xl, yl = X4_LOC.var("x"), X4_LOC.var("y")
        p = xl ** -2 * (yl + xl) * (yl - 1)
        assert exact_div(p, xl ** -1 * (yl - 1)) == xl ** -1 * (yl + xl)

    def test_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            exact_div(x, X4.zero())


class TestMonomialIdeals:
    def test_p3_not_member(self):
        xx, v, t, _ = PLANE.gens()
        assert not monomial_ideal_member(v * t ** 2 - xx ** 2 * t, [("x", 3), ("v", 2)])

    def test_member(self):
        xx, v, t, xi = PLANE.gens()
        assert monomial_ideal_member(xx ** 3 * t + v ** 2 * xi, [("x", 3), ("v", 2)])

    def test_p2_of_a_tilde(self):
        from venereau.bundle import TransitionFunction
        pa = TransitionFunction.for_n(2).apply(gallery.make("a_tilde"))
        assert monomial_ideal_member(pa, [("x", 3), ("v", 2)])

    def test_reduce_generic(self):
        # p_2(a) mod (x, v^2) = a00^2 v
        from venereau.bundle import TransitionFunction
        xx, v, t, xi = PLANE.gens()
        a00, a10, a01 = t + xi, xi ** 2 - t, 3 * t
        a = a00 + xx * a10 + v * a01
        pa = TransitionFunction.for_n(2).apply(a)
        assert reduce_mod_monomials(pa, [("x", 1), ("v", 2)]) == a00 ** 2 * v

    def test_reduce_when_a00_zero(self):
        from venereau.bundle import TransitionFunction
        xx, v, t, xi = PLANE.gens()
        a10, a01 = xi - t, t * xi
        a = xx * a10 + v * a01
        pa = TransitionFunction.for_n(2).apply(a)
        assert reduce_mod_monomials(pa, [("x", 3), ("v", 2)]) == (a10 ** 2 - a01) * xx ** 2 * v

    def test_reduce_drops_divisible(self):
        xx, t = PLANE.var("x"), PLANE.var("t")
        assert reduce_mod_monomials(xx ** 3 * t, [("x", 3)]).is_zero


class TestCoeffEval:
    def test_coefficients_of_a_tilde(self):
        a = gallery.make("a_tilde")
        a00 = coeff_in(a, {"x": 0, "v": 0})
        a10 = coeff_in(a, {"x": 1, "v": 0})
        a01 = coeff_in(a, {"x": 0, "v": 1})
        xi = a10.ring.var("xi")
        assert a00.is_zero and a10 == -xi and a01 == xi ** 2 == a10 ** 2

    def test_eval_w(self):
        assert eval_at(W, {"y": 1, "z": 2, "u": 3}) == 7

    def test_eval_v1(self):
        # x y^2 u + y + x^2 z + x y z^2 has four terms, so the all-ones value is 4
        assert eval_at(gallery.make("v", 1), dict(x=1, y=1, z=1, u=1)) == 4

    def test_eval_rel1(self):
        G = gallery.Gallery()
        r = y * G.make("s") + G.make("t") ** 2 - x ** 2 * z ** 2
        assert eval_at(r, dict(x=4, y=-3, z=7, u=11)) == 0

    def test_eval_rational(self):
        xl = X4_LOC.var("x")
        assert eval_at(xl ** -2 + 1, {"x": 2}) == Fraction(5, 4)

    def test_eval_missing_variable(self):
        with pytest.raises(PolyError):
            eval_at(W, {"y": 1})


class TestFormatParse:
    def test_format_examples(self):
        assert format_poly(X4.zero()) == "0"
        assert format_poly(-x + 1) == "-x + 1"
        xl = X4_LOC.var("x")
        assert format_poly(3 * xl ** -2 * X4_LOC.var("y")) == "3*x^-2*y"

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as ei:
            parse_poly("x + * y", X4, lineno=4)
        assert ei.value.line == 4 and ei.value.column == 5

    def test_parse_unknown_variable(self):
        with pytest.raises(ParseError) as ei:
            parse_poly("x + q", X4)
        assert ei.value.column == 5

    def test_parse_negative_exponent_in_polynomial_ring(self):
        with pytest.raises(PolyError):
            parse_poly("x^-1", X4)

    def test_gallery_roundtrip(self):
        G = gallery.Gallery()
        for sym in gallery.SYMBOLS:
            ns = [None] if sym not in ("v", "p", "zeta", "zeta_prime", "b1", "theta") else (
                [3, 4, 5] if sym == "theta" else [1, 2, 3, 4, 5])
            for n in ns:
                p = G.make(sym, n)
                assert parse_poly(format_poly(p), p.ring) == p


# -- properties ----------------------------------------------------------

polys = poly_st(R4)
lpolys = poly_st(R4L, min_exp=-2)


@given(lpolys, lpolys)
def test_canonical_add_sub(p, q):
    assert ((p + q) - q).terms == p.terms


small = poly_st(R4, max_terms=3, max_exp=2, coeff=5)


@given(small, small, small, small, small)
def test_substitute_is_homomorphism(p, q, a, b, c):
    m = PolyMap.from_images(R4, {"y": a, "z": b, "u": c})
    assert substitute(p + q, m) == substitute(p, m) + substitute(q, m)
    assert substitute(p * q, m) == substitute(p, m) * substitute(q, m)


@given(lpolys, lpolys, st.sampled_from("xyzu"))
def test_leibniz(p, q, var):
    d = partial_derivative
    assert d(p * q, var) == p * d(q, var) + q * d(p, var)


@given(lpolys, lpolys)
def test_exact_div_roundtrip(q, h):
    if q.is_zero:
        return
    assert exact_div(q * h, q) == h


@given(polys, polys)
def test_exact_div_result_multiplies_back(p, q):
    if q.is_zero:
        return
    try:
        h = exact_div(p, q)
    except NotDivisibleError:
        return
    assert q * h == p


@given(poly_st(R4, max_exp=5), st.lists(st.tuples(st.sampled_from("xyzu"), st.integers(0, 4)),
                                        min_size=1, max_size=3))
def test_member_iff_reduces_to_zero(p, gens):
    assert monomial_ideal_member(p, gens) == reduce_mod_monomials(p, gens).is_zero


@given(lpolys, lpolys, polys,
       st.tuples(*[st.integers(-5, 5).filter(bool) for _ in range(4)]))
def test_eval_homomorphism(p, q, r, pt):
    at = dict(zip("xyzu", pt))
    assert eval_at(p + q, at) == eval_at(p, at) + eval_at(q, at)
    assert eval_at(p * q, at) == eval_at(p, at) * eval_at(q, at)
    m = PolyMap.from_images(R4L, {"z": r.to_ring(R4L)})
    inner = {**at, "z": eval_at(r, at)}
    assert eval_at(substitute(p, m), at) == eval_at(p, inner)


@given(lpolys)
def test_print_parse_roundtrip(p):
    assert parse_poly(format_poly(p), p.ring) == p
