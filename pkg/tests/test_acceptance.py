"""Acceptance gate: one test per numbered criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
each criterion as PASS or FAIL with its wall time.
"""

import math
import os
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from nilfix.action import NOT_APPLICABLE, NOT_ESSENTIAL, VERIFIED, build_action, verify_main
from nilfix.fields import PLANE, PolyVectorField
from nilfix.flow import tau_probe
from nilfix.index import block_index, closed_surface_zeros, d5_index, total_index_closed_surface
from nilfix.lie import (Subspace, abelian, affine_line, codim1_ideal_containing,
                        euclidean_plane, filiform4, heisenberg, heisenberg5, is_ideal,
                        is_nilpotent, is_subalgebra, nilpotent5, nullspace)
from nilfix.poly import Poly2, X, Y
from nilfix.regions import PolygonCurve, Region
from nilfix.zeros import find_zeros

from oracles import FIXTURES, UNIT, oracle_winding

SCEN = Path(__file__).resolve().parent.parent / "scenarios"
F = PolyVectorField.plane
criterion = pytest.mark.criterion


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@criterion(1, "sphere rotation field has total index 2")
def test_c01_sphere_poincare_hopf():
    with Clock() as clock:
        total = total_index_closed_surface(PolyVectorField.sphere(-Y, X))
    assert total == 2
    assert clock.elapsed < 1.0


@criterion(2, "torus constant field: no zeros, block indices 0")
def test_c02_torus_constant_field():
    field = PolyVectorField.torus(1, Fraction(1, 3))
    regions = [Region(PolygonCurve(((0, 0), (1, 0), (1, 1), (0, 1))), chart="torus"),
               Region.disk(0.5, 0.5, 0.4, chart="torus"),
               Region.disk(0.2, 0.7, 0.15, chart="torus")]
    with Clock() as clock:
        total, terms = closed_surface_zeros(field)
        indices = [block_index(field, r) for r in regions]
    assert total == 0 and terms == []
    assert all(res.value == 0 for res in indices if res.certified)
    assert all(res.certified for res in indices)
    assert clock.elapsed < 1.0


@criterion(3, "adaptive winding equals the 4096-sample oracle on 12 fixtures")
def test_c03_winding_oracle():
    assert len(FIXTURES) == 12
    with Clock() as clock:
        got = {name: block_index(f, r).value for name, (f, r, _) in FIXTURES.items()}
    for name, (field, region, _) in FIXTURES.items():
        assert got[name] == oracle_winding(field, region.outer), name
    assert clock.elapsed < 5.0


@criterion(4, "additivity for the pitchfork: 0 = (+1) + (-1)")
def test_c04_additivity():
    f = F(X * X - 1, Y)
    whole = block_index(f, Region.disk(0, 0, 2)).value
    left = block_index(f, Region.disk(-1, 0, 0.5)).value
    right = block_index(f, Region.disk(1, 0, 0.5)).value
    assert (whole, left, right) == (0, -1, 1)


@criterion(5, "excision: 50 random shrinks per fixture")
def test_c05_excision():
    rng = np.random.default_rng(2024)
    for name, (field, region, expected) in FIXTURES.items():
        zs = find_zeros(field, region)
        outer = region.outer
        reach = max((math.hypot(*z.location) + z.radius for z in zs), default=0.0)
        for r in rng.uniform(reach, outer.r, size=50):
            r = max(r, reach + 1e-3)
            assert block_index(field, Region.disk(0, 0, r)).value == expected, (name, r)


def _random_hyperbolic(rng):
    while True:
        a, b, c, d = (Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))
                      for _ in range(4))
        tr, det = a + d, a * d - b * c
        disc = tr * tr - 4 * det
        if det == 0 or abs(disc) < Fraction(1, 10):
            continue  # singular, or repeated eigenvalue (scalar matrices included)
        lam = np.linalg.eigvals(np.array([[a, b], [c, d]], dtype=float))
        if np.min(np.abs(lam.real)) < 0.1:
            continue  # too close to the imaginary axis
        return a, b, c, d, det


@criterion(6, "d5 index of exp(tA) = sign det A = block index, 100 matrices")
def test_c06_d5_consistency():
    rng = np.random.default_rng(6)
    t = 0.01
    with Clock() as clock:
        for _ in range(100):
            a, b, c, d, det = _random_hyperbolic(rng)
            m = np.array([[a, b], [c, d]], dtype=float)
            sign = 1 if det > 0 else -1
            assert d5_index(np.linalg.eigvals(expm(t * m))) == sign
            assert block_index(F(a * X + b * Y, c * X + d * Y), UNIT).value == sign
    assert clock.elapsed < 10.0


@criterion(7, "displacement index of the time-t map equals block index")
def test_c07_displacement_index():
    for name, (field, region, expected) in FIXTURES.items():
        rep = tau_probe(field, region, [0.2, 0.1, 0.05, 0.01])
        certified = [e.index for e in rep.entries if e.certified]
        assert certified, name
        assert set(certified) == {expected} and rep.block_index == expected, name


def _sup_bound(poly: Poly2, reach: float) -> float:
    return sum(abs(float(c)) * reach ** (i + j) for (i, j), c in poly.terms.items())


@criterion(8, "20 small perturbations preserve every fixture block index")
def test_c08_stability():
    rng = np.random.default_rng(8)
    monomials = [(i, j) for i in range(3) for j in range(3 - i)]
    for name, (field, region, expected) in FIXTURES.items():
        base = block_index(field, region)
        outer = region.outer
        reach = math.hypot(outer.cx, outer.cy) + outer.r
        for _ in range(20):
            comps = [Poly2({m: Fraction(int(rng.integers(-9, 10)), 9) for m in monomials})
                     for _ in range(2)]
            bound = max(_sup_bound(p, reach) for p in comps) * math.sqrt(2)
            if bound == 0:
                continue
            s = Fraction(math.floor(0.49 * base.min_modulus_on_boundary / bound * 1e6), 10 ** 6)
            perturbed = field + F(s * comps[0], s * comps[1])
            assert block_index(perturbed, region).value == expected, name


def _random_vector(rng, d):
    while True:
        v = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(d)]
        if any(v):
            return v


@criterion(9, "codimension-one ideals through 100 random elements of h3, n4, n5")
def test_c09_covering():
    rng = np.random.default_rng(9)
    for alg in (heisenberg(), filiform4(), nilpotent5()):
        for _ in range(100):
            y = _random_vector(rng, alg.dim)
            s = codim1_ideal_containing(alg, y)
            assert s.codim == 1 and s.contains(y) and is_ideal(alg, s)


@criterion(10, "200 random codimension-one subalgebras are ideals")
def test_c10_codim1_subalgebras_are_ideals():
    rng = np.random.default_rng(10)
    algebras = [heisenberg(), filiform4(), nilpotent5(), heisenberg5(), abelian(3)]
    assert all(is_nilpotent(a) for a in algebras)
    found, tries = 0, 0
    while found < 200:
        tries += 1
        assert tries < 100_000
        alg = algebras[found % len(algebras)]
        d = alg.dim
        f = [int(v) if rng.random() < 0.5 else 0 for v in rng.integers(-2, 3, size=d)]
        if not any(f):
            continue
        hyperplane = Subspace(d, nullspace([f], d))
        if is_subalgebra(alg, hyperplane):
            assert is_ideal(alg, hyperplane), (alg.basis_names, f)
            found += 1


@criterion(11, "abelian and degenerate h3 actions: VERIFIED at the origin, index +1")
def test_c11_main_theorem_desk_check():
    actions = [
        (build_action(abelian(2), PLANE, [F(-Y, X), F(X, Y)]), [1, 0]),
        (build_action(heisenberg(), PLANE,
                      [F(-Y, X), F(X, Y), PolyVectorField.zero(PLANE)]), [1, 0, 0]),
    ]
    for action, x in actions:
        with Clock() as clock:
            rep = verify_main(action, x, UNIT)
        assert rep.status == VERIFIED and rep.index.value == 1
        assert math.hypot(*rep.witness) < 1e-9
        assert clock.elapsed < 2.0


@criterion(12, "negative controls: aff and e(2) not applicable, h3 plane not essential")
def test_c12_negative_controls():
    aff = build_action(affine_line(), PLANE, [F(X, Y), F(X * X, X * Y)])
    e2 = build_action(euclidean_plane(), PLANE, [F(Y, -X), F(1, 0), F(0, 1)])
    for action, x in ((aff, [1, 0]), (e2, [1, 0, 0])):
        assert not is_nilpotent(action.algebra)
        assert verify_main(action, x, UNIT).status == NOT_APPLICABLE
    h3 = build_action(heisenberg(), PLANE, [F(1, 0), F(0, X), F(0, 1)])
    assert verify_main(h3, [1, 0, 0], UNIT).status == NOT_ESSENTIAL


def _run_all(outdir: Path, threads: str):
    env = dict(os.environ, NILFIX_THREADS=threads)
    outdir.mkdir()
    for scen in sorted(SCEN.glob("*.json")):
        subprocess.run([sys.executable, "-m", "nilfix.cli", "run", str(scen),
                        "-o", str(outdir / scen.name)], env=env, capture_output=True)
    return {p.name: p.read_bytes() for p in sorted(outdir.iterdir())}


@criterion(13, "reports and SVGs byte-identical across runs and thread counts")
def test_c13_determinism(tmp_path):
    first = _run_all(tmp_path / "a", "1")
    assert any(name.endswith(".svg") for name in first)
    assert len([n for n in first if n.endswith(".json")]) == len(list(SCEN.glob("*.json")))
    assert _run_all(tmp_path / "b", "1") == first
    assert _run_all(tmp_path / "c", "4") == first
