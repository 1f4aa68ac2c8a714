import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilfix.config import DEFAULT
from nilfix.fields import PolyVectorField
from nilfix.index import (BoundaryZeroError, DegenerateZeroError, RefinementError,
                          block_index, closed_surface_zeros, d5_index, ph_index_at_zero,
                          total_index_closed_surface, winding_number)
from nilfix.poly import X, Y
from nilfix.regions import Circle, PolygonCurve, Region
from nilfix.zeros import find_zeros

from oracles import FIXTURES, R2, UNIT, oracle_winding


def plane(P, Q):
    return PolyVectorField.plane(P, Q)


def test_winding_examples():
    assert winding_number(plane(X, Y), Circle(0, 0, 1)).value == 1
    assert winding_number(plane(X, -Y), Circle(0, 0, 1)).value == -1
    assert winding_number(plane(X * X - Y * Y, 2 * X * Y), Circle(0, 0, 1)).value == 2
    res = winding_number(plane(X, Y), Circle(0, 0, 1))
    assert res.certified and res.max_angle_step < math.pi / 2
    assert res.min_modulus_on_boundary == pytest.approx(1.0)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_winding_matches_angle_sum_oracle(name):
    field, region, expected = FIXTURES[name]
    res = block_index(field, region)
    assert res.certified
    assert res.value == oracle_winding(field, region.outer) == expected


def test_callable_evaluator():
    res = winding_number(lambda p: np.stack([p[:, 0], -p[:, 1]], -1), Circle(0, 0, 1))
    assert res.value == -1 and res.certified


def test_boundary_zero_and_budget_errors():
    with pytest.raises(BoundaryZeroError):
        block_index(plane(X * X - 1, Y), UNIT)
    # a zero just off the curve forces refinement past a tiny budget
    near = plane(X - 1.000001, Y)
    with pytest.raises(RefinementError):
        winding_number(near, Circle(0, 0, 1), DEFAULT.with_(sample_budget=70))
    assert winding_number(near, Circle(0, 0, 1)).value == 0


def test_block_index_examples():
    assert block_index(plane(X * X - 1, Y), R2).value == 0
    assert block_index(plane(-Y, X), UNIT).value == 1
    assert block_index(plane(1, 0), Region.disk(5, 5, 3)).value == 0
    annulus = Region(Circle(0, 0, 2), (Circle(0, 0, 0.5),))
    assert block_index(plane(-Y, X), annulus).value == 0
    two_holes = Region(Circle(0, 0, 2), (Circle(-1, 0, 0.5), Circle(1, 0, 0.5)))
    assert block_index(plane(X * X - 1, Y), two_holes).value == 0
    square = Region(PolygonCurve(((-1, -1), (1, -1), (1, 1), (-1, 1))))
    assert block_index(FIXTURES["z3"][0], square).value == 3


def test_additivity_over_subdisks():
    f = plane(X * X - 1, Y)
    left = block_index(f, Region.disk(-1, 0, 0.5)).value
    right = block_index(f, Region.disk(1, 0, 0.5)).value
    assert (left, right) == (-1, 1)
    assert block_index(f, R2).value == left + right
    # the annulus between the big disk and the two small ones carries no index
    rest = Region(Circle(0, 0, 2), (Circle(-1, 0, 0.5), Circle(1, 0, 0.5)))
    assert block_index(f, rest).value == 0


@pytest.mark.parametrize("name", sorted(FIXTURES))
@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 1.0))
def test_excision_under_shrinking(name, frac):
    field, region, expected = FIXTURES[name]
    zs = find_zeros(field, region)
    outer = region.outer
    reach = max((math.hypot(*z.location) + z.radius for z in zs), default=0.0)
    r = reach + frac * (outer.r - reach) * 0.99
    if r > reach:
        assert block_index(field, Region.disk(0, 0, r)).value == expected


def test_homotopy_invariance():
    pairs = [(plane(X, Y), plane(X + Y, Y - X)),
             (plane(X, -Y), plane(2 * X + Fraction(1, 2) * Y, -Y)),
             (plane(X * X - Y * Y, 2 * X * Y),
              plane(X * X - Y * Y + Fraction(1, 10) * X, 2 * X * Y))]
    c = Circle(0, 0, 1)
    for a, b in pairs:
        for k in range(33):
            s = k / 32
            h = a.scale(1 - s) + b.scale(s)
            res = winding_number(h, c)
            assert res.min_modulus_on_boundary > DEFAULT.modulus_floor
        assert block_index(a, UNIT).value == block_index(b, UNIT).value


def test_ph_index_examples():
    for field, expected in [(plane(X, -Y), -1), (plane(X, Y), 1), (plane(-Y, X), 1)]:
        (z,) = find_zeros(field, UNIT)
        assert ph_index_at_zero(field, z) == expected
    (z,) = find_zeros(FIXTURES["z2"][0], UNIT)
    with pytest.raises(DegenerateZeroError):
        ph_index_at_zero(FIXTURES["z2"][0], z)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_ph_index_matches_isolation_winding(name):
    field, region, _ = FIXTURES[name]
    for z in find_zeros(field, region):
        if not z.degenerate:
            circle = Circle(z.location[0], z.location[1], z.radius)
            assert ph_index_at_zero(field, z) == oracle_winding(field, circle)


def test_d5_examples():
    assert d5_index([2, 3]) == 1
    assert d5_index([2, 0.5]) == -1
    assert d5_index([0.5, 1 / 3]) == 1
    assert d5_index([complex(1.2, 0.3), complex(1.2, -0.3)]) == 1
    assert d5_index([2.0, 2.0]) == -1  # distinct values counted once
    with pytest.raises(DegenerateZeroError):
        d5_index([1 + 1e-12, 3])


def test_closed_surfaces():
    sphere_cases = {
        "rotation": (PolyVectorField.sphere(-Y, X), [1, 1]),
        "source_sink": (PolyVectorField.sphere(X, Y), [1, 1]),
        "two_sources": (PolyVectorField.sphere(X * X - Y * Y - 1, 2 * X * Y), [1, 1]),
        "dipole": (PolyVectorField.sphere(1, 0), [2]),
    }
    for name, (field, per_zero) in sphere_cases.items():
        total, terms = closed_surface_zeros(field)
        assert total == 2 == total_index_closed_surface(field)
        assert sorted(v for _, v in terms) == per_zero, name
        for cluster, v in terms:
            circle = Circle(cluster.location[0], cluster.location[1], cluster.radius)
            assert oracle_winding(field, circle, cluster.chart) == v
    assert total_index_closed_surface(PolyVectorField.torus(1, 0)) == 0


def test_zero_on_assignment_circle_is_handled():
    # zeros at +-1 sit exactly on the default assignment circle |p| = 1
    field = PolyVectorField.sphere(X * X - Y * Y - 1, 2 * X * Y)
    total, terms = closed_surface_zeros(field, assignment_radius=1.0)
    assert total == 2 and len(terms) == 2


def test_indices_do_not_depend_on_thread_count(monkeypatch):
    region = Region(Circle(0, 0, 2), (Circle(-1, 0, 0.5), Circle(1, 0, 0.5)))
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("NILFIX_THREADS", n)
        out.append(block_index(plane(X * X - 1, Y), region))
    assert out[0] == out[1]
