"""Integer fixed-point indices in the plane.

The workhorse is :func:`winding_number`: the total turning of a vector field
along a closed curve, accumulated from oriented angles between consecutive
samples.  The parameter mesh is bisected until every increment is below
pi/2; for polynomial fields each piece of curve is additionally covered by
a box on which the centered-form bound proves the field keeps within pi/2 of
its value at the piece's midpoint, which pins every increment to its
principal branch.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .config import DEFAULT, Options, parallel_map
from .fields import PolyVectorField, euler_characteristic
from .regions import Circle, PolygonCurve, Region
from .zeros import System, ZeroCluster, segment_boxes, zero_search

HALF_PI = 0.5 * math.pi


class IndexComputationError(RuntimeError):
    pass


class BoundaryZeroError(IndexComputationError):
    """The field (nearly) vanishes on the curve: the curve does not isolate."""


class RefinementError(IndexComputationError):
    """Sample budget exhausted before the angle increments were resolved."""


class DegenerateZeroError(IndexComputationError):
    pass


@dataclass(frozen=True)
class IndexResult:
    value: int
    min_modulus_on_boundary: float
    max_angle_step: float
    samples_used: int
    certified: bool

    def to_json(self):
        return asdict(self)


Evaluator = Callable[[np.ndarray], np.ndarray]


def _evaluator(field, chart: Optional[str]):
    if isinstance(field, PolyVectorField):
        system = System.of([field], chart)
        P, Q = system.pairs[0]

        def ev(pts):
            return np.stack([np.asarray(P(pts[:, 0], pts[:, 1]), float),
                             np.asarray(Q(pts[:, 0], pts[:, 1]), float)], -1)
        return ev, system
    return field, None


def winding_number(field: Union[PolyVectorField, Evaluator], curve, opts: Options = DEFAULT,
                   chart: Optional[str] = None) -> IndexResult:
    """Number of turns of the field along the oriented closed curve.

    ``field`` is a :class:`PolyVectorField` (evaluated in ``chart``) or any
    callable mapping an ``(n, 2)`` array of points to ``(n, 2)`` vectors.
    """
    ev, system = _evaluator(field, chart)
    n0 = max(4, opts.initial_samples)
    s = np.arange(n0 + 1) / n0
    pts = curve.points(s[:-1])
    V = ev(pts)
    V = np.vstack([V, V[:1]])
    proven = np.zeros(n0, dtype=bool)
    total_samples = n0
    while True:
        mod = np.hypot(V[:, 0], V[:, 1])
        if not np.all(np.isfinite(mod)):
            raise IndexComputationError("field not finite on the curve")
        kmin = int(np.argmin(mod))
        if mod[kmin] < opts.modulus_floor:
            p = curve.points(s[kmin:kmin + 1])[0]
            raise BoundaryZeroError(
                f"|X| = {mod[kmin]:.3e} below floor {opts.modulus_floor:.1e} "
                f"at ({p[0]:.6g}, {p[1]:.6g})")
        a, b = V[:-1], V[1:]
        ang = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
                         a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1])
        bad = np.abs(ang) >= HALF_PI
        if system is not None:
            check = ~bad & ~proven
            if check.any():
                idx = np.nonzero(check)[0]
                mid, half = segment_boxes(curve, s[idx], s[idx + 1])
                ok = _turn_bounded(system, mid, half)
                proven[idx[ok]] = True
                bad[idx[~ok]] = True
        if not bad.any():
            break
        lengths = (s[1:] - s[:-1])[bad] * curve.length
        if lengths.min() < opts.min_segment * max(1.0, curve.length):
            raise BoundaryZeroError("angle increments do not resolve: zero on or near the curve")
        idx = np.nonzero(bad)[0]
        if total_samples + len(idx) > opts.sample_budget:
            raise RefinementError(f"sample budget {opts.sample_budget} exhausted")
        mids = 0.5 * (s[idx] + s[idx + 1])
        newV = ev(curve.points(mids))
        total_samples += len(idx)
        s = np.insert(s, idx + 1, mids)
        V = np.insert(V, idx + 1, newV, axis=0)
        proven = np.insert(proven, idx + 1, False)

    turns = float(np.sum(ang)) / (2 * math.pi)
    value = int(round(turns))
    max_step = float(np.max(np.abs(ang)))
    min_mod = float(mod.min())
    certified = (abs(turns - value) < opts.rounding_guard and max_step < HALF_PI
                 and min_mod > opts.modulus_floor)
    return IndexResult(value, min_mod, max_step, total_samples, certified)


def _turn_bounded(system: System, mid: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Field provably within a quarter turn of its midpoint value on each box."""
    P, Q = system.pairs[0]
    vp, vq = P(mid[:, 0], mid[:, 1]), Q(mid[:, 0], mid[:, 1])
    tp, tq = P.taylor_tail(mid[:, 0], mid[:, 1], half), Q.taylor_tail(mid[:, 0], mid[:, 1], half)
    margin = 1e-12 * (P.abs_bound_terms(mid[:, 0], mid[:, 1])
                      + Q.abs_bound_terms(mid[:, 0], mid[:, 1]) + tp + tq)
    # |X(p) - X(m)| < |X(m)| / sqrt(2) keeps the angle below pi/4 on the box
    return np.hypot(vp, vq) > math.sqrt(2) * (np.hypot(tp, tq) * (1 + 1e-9) + margin)


def combine(results: Sequence[IndexResult]) -> IndexResult:
    return IndexResult(
        value=sum(r.value for r in results),
        min_modulus_on_boundary=min(r.min_modulus_on_boundary for r in results),
        max_angle_step=max(r.max_angle_step for r in results),
        samples_used=sum(r.samples_used for r in results),
        certified=all(r.certified for r in results),
    )


def block_index(field: Union[PolyVectorField, Evaluator], region: Region,
                opts: Options = DEFAULT) -> IndexResult:
    """Index of the field over the region: windings of outer boundary plus (clockwise) holes."""
    chart = region.chart if isinstance(field, PolyVectorField) else None
    parts = parallel_map(lambda c: winding_number(field, c, opts, chart), region.curves())
    return combine(parts)


def ph_index_at_zero(field: PolyVectorField, cluster: ZeroCluster,
                     opts: Options = DEFAULT) -> int:
    """Sign of det J at a nondegenerate zero, cross-checked against the isolation circle."""
    if cluster.degenerate:
        raise DegenerateZeroError(
            "degenerate zero: use block_index on its isolation circle instead")
    det = float(np.linalg.det(np.array(cluster.jacobian)))
    value = 1 if det > 0 else -1
    circle = Circle(cluster.location[0], cluster.location[1], cluster.radius)
    check = winding_number(field, circle, opts, cluster.chart)
    if check.value != value:
        raise IndexComputationError(
            f"sign det J = {value} but isolation-circle winding = {check.value}")
    return value


def d5_index(eigenvalues: Sequence[complex], tol: float = 1e-9) -> int:
    """``(-1)**nu`` with nu the number of distinct real eigenvalues greater than 1.

    Non-real eigenvalues do not count.  Duplicates are merged only when
    exactly equal, so a matrix with a repeated real eigenvalue above 1 counts
    it once.
    """
    reals = set()
    for lam in eigenvalues:
        lam = complex(lam)
        if abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)):
            if abs(lam.real - 1.0) <= tol:
                raise DegenerateZeroError(f"eigenvalue {lam.real!r} is within {tol} of 1")
            if lam.real > 1.0:
                reals.add(lam.real)
    return -1 if len(reals) % 2 else 1


def total_index_closed_surface(field: PolyVectorField, opts: Options = DEFAULT,
                               assignment_radius: float = 1.0) -> int:
    """Sum of the indices of all zeros of a field on the sphere or torus.

    On the sphere a zero belongs to chart N when ``|p| <= rho`` and to chart S
    otherwise.  A zero sitting on that circle is ambiguous; the assignment
    radius is then perturbed and the computation repeated.  The total is
    checked against the Euler characteristic.
    """
    return closed_surface_zeros(field, opts, assignment_radius)[0]


def closed_surface_zeros(field: PolyVectorField, opts: Options = DEFAULT,
                         assignment_radius: float = 1.0):
    """``(total, [(cluster, index), ...])`` for a field on the sphere or torus."""
    kind = field.surface.kind
    if kind == "torus":
        terms = _torus_terms(field, opts)
    elif kind == "sphere":
        terms = None
        for rho in (assignment_radius, assignment_radius * 1.25, assignment_radius / 1.25):
            terms = _sphere_terms(field, opts, rho)
            if terms is not None:
                break
        if terms is None:
            raise IndexComputationError("zeros on every tried chart-assignment circle")
    else:
        raise IndexComputationError("closed-surface index needs the sphere or the torus")
    total = sum(v for _, v in terms)
    chi = euler_characteristic(field.surface)
    if total != chi:
        raise IndexComputationError(f"total index {total} != Euler characteristic {chi}")
    return total, terms


def _cluster_index(field, cluster: ZeroCluster, opts: Options) -> int:
    circle = Circle(cluster.location[0], cluster.location[1], cluster.radius)
    res = winding_number(field, circle, opts, cluster.chart)
    if not res.certified:
        raise IndexComputationError(f"uncertified index at {cluster.location}")
    return res.value


def _search(field, region, opts):
    from .zeros import ZeroSearchIncomplete
    result = zero_search(System.of([field], region.chart), region, opts, region.chart)
    if not result.complete:
        raise ZeroSearchIncomplete("zeros are not isolated", result.clusters,
                                   result.uncertified)
    return result.clusters


def _sphere_terms(field, opts, rho):
    tol = 1e-6
    north = _search(field, Region.disk(0, 0, rho * 1.05, chart="N"), opts)
    south = _search(field, Region.disk(0, 0, 1.05 / rho, chart="S"), opts)
    picked = []
    for c in north:
        r = math.hypot(*c.location)
        if abs(r - rho) <= tol * rho + c.radius:
            return None
        if r <= rho:
            picked.append(c)
    for c in south:
        r = math.hypot(*c.location)
        if abs(r - 1 / rho) <= tol / rho + c.radius:
            return None
        if r < 1 / rho:
            picked.append(c)
    return parallel_map(lambda c: (c, _cluster_index(field, c, opts)), picked)


def _torus_terms(field, opts):
    square = Region(PolygonCurve(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))),
                    chart="torus")
    clusters = [c for c in _search(field, square, opts)
                if 0 <= c.location[0] < 1 and 0 <= c.location[1] < 1]
    return [(c, _cluster_index(field, c, opts)) for c in clusters]
