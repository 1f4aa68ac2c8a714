import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nilfix.fields import (PLANE, SPHERE, TORUS, ChartError, FieldError, PolyVectorField,
                           Surface, TransportError, euler_characteristic, eval_field,
                           field_bracket, jacobian, transport)
from nilfix.poly import Poly2, X, Y
from nilfix.regions import Circle, Region

from oracles import from_sympy, sx, sy, sympy_bracket, to_sympy

coef = st.fractions(min_value=-4, max_value=4, max_denominator=5)
monomial = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monomial, coef, max_size=6).map(Poly2)


# Poly2 ------------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(polys, polys)
def test_arithmetic_matches_sympy(p, q):
    P, Q = to_sympy(p), to_sympy(q)
    assert p + q == from_sympy(P + Q)
    assert p - q == from_sympy(P - Q)
    assert p * q == from_sympy(P * Q)
    assert p.diff(0) == from_sympy(sp.diff(P, sx))
    assert p.diff(1) == from_sympy(sp.diff(P, sy))
    assert (p ** 2) == p * p


@settings(max_examples=80, deadline=None)
@given(polys, st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4))
def test_exact_and_float_evaluation(p, x, y):
    exact = p.subs_exact(x, y)
    assert exact == to_sympy(p).subs({sx: sp.Rational(x.numerator, x.denominator),
                                      sy: sp.Rational(y.numerator, y.denominator)})
    size = float(sum(abs(c) * 3 ** (i + j) for (i, j), c in p.terms.items()))
    assert abs(float(p(float(x), float(y))) - float(exact)) <= 1e-13 * (1 + size)


@settings(max_examples=80, deadline=None)
@given(polys)
def test_division_by_s(p):
    q, r = p.divmod_s()
    assert q * (X * X + Y * Y) + r == p
    assert all(i < 2 for i, _ in r.terms)


@settings(max_examples=60, deadline=None)
@given(polys, st.floats(-2, 2), st.floats(-2, 2), st.floats(1e-3, 0.5))
def test_taylor_tail_bounds_variation_on_box(p, cx, cy, h):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-h, h, size=(400, 2))
    pts = np.vstack([pts, [[h, h], [-h, h], [h, -h], [-h, -h]]])
    var = np.abs(p(cx + pts[:, 0], cy + pts[:, 1]) - p(cx, cy))
    tail = float(np.asarray(p.taylor_tail(np.array([cx]), np.array([cy]), np.array([h])))[0])
    assert np.all(var <= tail * (1 + 1e-9) + 1e-12)


def test_poly_basics():
    p = X * X - Y + 3
    assert p.degree == 2 and Poly2().degree < 0 and Poly2().is_zero()
    assert Poly2.from_list(p.to_list()) == p
    assert Poly2({(1, 0): 0}).terms == {}
    assert hash(X + Y) == hash(Y + X)


# fields ------------------------------------------------------------------------


def test_eval_examples():
    assert np.allclose(eval_field(PolyVectorField.plane(-Y, X), "plane", (1, 0)), (0, 1))
    assert np.allclose(eval_field(PolyVectorField.plane(X * X - Y * Y, 2 * X * Y), "plane",
                                  (1, 1)), (0, 2))
    assert np.allclose(eval_field(PolyVectorField.plane(X, Y), "plane", (0, 0)), (0, 0))
    with pytest.raises(ChartError):
        eval_field(PolyVectorField.plane(X, Y), "plane", (math.nan, 0))
    with pytest.raises(ChartError):
        eval_field(PolyVectorField.torus(1, 0), "torus", (1.5, 0.2))
    with pytest.raises(ChartError):
        eval_field(PolyVectorField.plane(X, Y), "N", (0, 0))


def test_bracket_examples():
    assert field_bracket(PolyVectorField.plane(1, 0), PolyVectorField.plane(0, X)) \
        == PolyVectorField.plane(0, 1)
    rot, rad = PolyVectorField.plane(-Y, X), PolyVectorField.plane(X, Y)
    assert field_bracket(rot, rot).is_zero()
    assert field_bracket(rot, rad).is_zero()


fields2 = st.tuples(polys, polys).map(lambda pq: PolyVectorField.plane(*pq))


@settings(max_examples=40, deadline=None)
@given(fields2, fields2)
def test_bracket_matches_sympy_and_is_antisymmetric(a, b):
    A = tuple(map(to_sympy, a.components()))
    B = tuple(map(to_sympy, b.components()))
    ref = sympy_bracket(A, B)
    got = field_bracket(a, b)
    assert got.components() == tuple(from_sympy(e) for e in ref)
    assert (field_bracket(b, a) + got).is_zero()


@settings(max_examples=25, deadline=None)
@given(fields2, fields2, fields2)
def test_field_bracket_jacobi(a, b, c):
    total = (field_bracket(a, field_bracket(b, c)) + field_bracket(b, field_bracket(c, a))
             + field_bracket(c, field_bracket(a, b)))
    assert total.is_zero()


def test_jacobian_examples():
    assert np.array_equal(jacobian(PolyVectorField.plane(X, -Y), "plane", (0, 0)),
                          [[1, 0], [0, -1]])
    assert np.array_equal(jacobian(PolyVectorField.plane(-Y, X), "plane", (0, 0)),
                          [[0, -1], [1, 0]])
    assert np.array_equal(jacobian(PolyVectorField.plane(X * X, Y), "plane", (0, 0)),
                          [[0, 0], [0, 1]])


# sphere charts -----------------------------------------------------------------


def test_transport_examples():
    assert transport((-Y, X), "N", "S") == (-Y, X)
    assert transport((Poly2(), Poly2()), "N", "S") == (Poly2(), Poly2())
    assert transport((X, Y), "N", "S") == (-X, -Y)
    # d/dx in N vanishes to second order at the S origin: -(u^2 - v^2), -2uv
    assert transport((Poly2.const(1), Poly2()), "N", "S") == (Y * Y - X * X, -2 * X * Y)
    with pytest.raises(TransportError):
        transport((X * X, Y), "N", "S")


holomorphic = st.tuples(coef, coef, coef, coef, coef, coef).map(
    lambda c: (c[0] + c[2] * X - c[3] * Y + c[4] * (X * X - Y * Y) - c[5] * 2 * X * Y,
               c[1] + c[3] * X + c[2] * Y + c[5] * (X * X - Y * Y) + c[4] * 2 * X * Y))


@settings(max_examples=40, deadline=None)
@given(holomorphic)
def test_transport_is_an_involution(pq):
    there = transport(pq, "N", "S")
    assert transport(there, "S", "N") == pq


@settings(max_examples=20, deadline=None)
@given(holomorphic)
def test_chart_representations_agree_on_overlap(pq):
    f = PolyVectorField.sphere(*pq)
    rng = np.random.default_rng(1)
    r = rng.uniform(0.3, 3.0, 100)
    th = rng.uniform(0, 2 * math.pi, 100)
    p = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    w = SPHERE.transition("N", "S", p)
    vN = eval_field(f, "N", p)
    vS = eval_field(f, "S", w)
    s = np.sum(p ** 2, axis=1)
    # Jacobian of p -> p / |p|^2 is (s I - 2 p p^T) / s^2
    J = (s[:, None, None] * np.eye(2) - 2 * p[:, :, None] * p[:, None, :]) / s[:, None, None] ** 2
    pushed = np.einsum("nij,nj->ni", J, vN)
    scale = np.maximum(np.linalg.norm(pushed, axis=1), 1e-300)
    assert np.all(np.linalg.norm(pushed - vS, axis=1) <= 1e-10 * np.maximum(scale, 1.0))


def test_transition_is_involutive():
    p = np.array([[0.3, -2.0], [5.0, 1.0]])
    assert np.allclose(SPHERE.transition("S", "N", SPHERE.transition("N", "S", p)), p)
    with pytest.raises(ChartError):
        SPHERE.transition("N", "S", (0.0, 0.0))


def test_sphere_fields_check_consistency():
    with pytest.raises(FieldError):
        PolyVectorField(SPHERE, {"N": (-Y, X), "S": (X, Y)})
    assert PolyVectorField(SPHERE, {"N": (X, Y), "S": (-X, -Y)}) == PolyVectorField.sphere(X, Y)
    assert PolyVectorField.sphere(-X, -Y, chart="S") == PolyVectorField.sphere(X, Y)


def test_torus_fields_are_constant():
    PolyVectorField.torus(1, Fraction(1, 3))
    with pytest.raises(FieldError):
        PolyVectorField(TORUS, {"torus": (X, Y)})


def test_euler_characteristic():
    assert euler_characteristic(SPHERE) == 2
    assert euler_characteristic(TORUS) == 0
    holes = (Circle(-0.5, 0, 0.2), Circle(0.5, 0, 0.2))
    assert euler_characteristic(PLANE, Region(Circle(0, 0, 1), holes)) == -1
    with pytest.raises(FieldError):
        Surface("klein")
