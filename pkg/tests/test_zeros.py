import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilfix.config import DEFAULT
from nilfix.fields import PolyVectorField
from nilfix.poly import X, Y
from nilfix.regions import Circle, Region
from nilfix.zeros import System, ZeroSearchIncomplete, find_zeros, zero_search

from oracles import FIXTURES, R2, UNIT, field_fn


def test_examples():
    zs = find_zeros(PolyVectorField.plane(X * X - 1, Y), R2)
    assert [tuple(np.round(z.location, 12)) for z in zs] == [(-1.0, 0.0), (1.0, 0.0)]
    assert find_zeros(PolyVectorField.plane(1, 0), Region.disk(3, -1, 5)) == []
    (z,) = find_zeros(PolyVectorField.plane(-Y, X), UNIT)
    assert np.allclose(z.location, 0, atol=1e-14) and not z.degenerate
    assert np.allclose(z.jacobian, [[0, -1], [1, 0]])


def test_degenerate_flags():
    (z,) = find_zeros(FIXTURES["z3"][0], UNIT)
    assert z.degenerate
    (f,) = find_zeros(PolyVectorField.plane(X * X, Y), UNIT)
    assert f.degenerate
    (s,) = find_zeros(PolyVectorField.plane(X, -Y), UNIT)
    assert not s.degenerate


def test_curve_of_zeros_is_reported_not_dropped():
    with pytest.raises(ZeroSearchIncomplete) as info:
        find_zeros(PolyVectorField.plane(0, X), UNIT)
    assert info.value.uncertified


def test_budget_exhaustion_is_reported():
    opts = DEFAULT.with_(cell_budget=50)
    with pytest.raises(ZeroSearchIncomplete):
        find_zeros(PolyVectorField.plane(X * X - 1, Y), R2, opts)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_isolation_circles_certified_by_dense_sampling(name):
    field, region, _ = FIXTURES[name]
    fn = field_fn(field)
    for z in find_zeros(field, region):
        pts = Circle(z.location[0], z.location[1], z.radius).points(np.arange(4096) / 4096)
        assert np.hypot(*fn(pts).T).min() > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(0.2, 3.0))
def test_translated_zero_is_located(a, b, k):
    f = PolyVectorField.plane(k * (X - a) - (Y - b), (X - a) + k * (Y - b))
    (z,) = find_zeros(f, Region.disk(0, 0, 1.2))
    assert np.allclose(z.location, (a, b), atol=1e-12)


def test_common_zeros_of_a_system():
    rot, rad = PolyVectorField.plane(-Y, X), PolyVectorField.plane(X, Y - 0.5)
    res = zero_search(System.of([rot, rad]), UNIT)
    assert res.complete and res.clusters == []
    res = zero_search(System.of([PolyVectorField.plane(X * X - 1, Y),
                                 PolyVectorField.plane(X - 1, Y)]), R2)
    assert [tuple(np.round(c.location, 12)) for c in res.clusters] == [(1.0, 0.0)]


def test_zero_on_region_edge_excluded_by_containment():
    zs = find_zeros(PolyVectorField.plane(X * X - 1, Y), Region.disk(1.2, 0, 0.5))
    assert [tuple(np.round(z.location, 12)) for z in zs] == [(1.0, 0.0)]
