"""Local actions of Lie algebras by polynomial fields, their fixed sets and stabilizers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT, Options, parallel_map
from .fields import PolyVectorField, Surface, field_bracket
from .flow import Escaped, FlowMap, advance
from .index import (BoundaryZeroError, IndexComputationError, IndexResult,
                    block_index)
from .lie import (LieAlgebra, Subspace, is_ideal, is_nilpotent, nullspace,
                  subalgebra_closure)
from .poly import Poly2
from .regions import Region
from .zeros import System, ZeroCluster, ZeroSearchIncomplete, zero_search

VERIFIED = "VERIFIED"
INCONCLUSIVE = "INCONCLUSIVE"
NOT_APPLICABLE = "NOT_APPLICABLE"
NOT_ESSENTIAL = "NOT_ESSENTIAL"


class ActionError(ValueError):
    pass


class HomomorphismError(ActionError):
    """``[X_i, X_j]`` differs from the image of ``[e_i, e_j]``."""

    def __init__(self, pair: Tuple[int, int], residual: PolyVectorField, names=None):
        i, j = pair
        label = f"({names[i]}, {names[j]})" if names else f"({i}, {j})"
        chart = residual.surface.charts[0]
        P, Q = residual.components(chart)
        super().__init__(f"bracket of pair {label} violates the homomorphism identity; "
                         f"residual in chart {chart}: ({P}, {Q})")
        self.pair = pair
        self.residual = residual


@dataclass(frozen=True)
class ActionSpec:
    algebra: LieAlgebra
    surface: Surface
    generator_fields: Tuple[PolyVectorField, ...]

    @property
    def dim(self) -> int:
        return self.algebra.dim


def _combination(alg: LieAlgebra, fields: Sequence[PolyVectorField], coeffs) -> PolyVectorField:
    out = PolyVectorField.zero(fields[0].surface)
    for c, f in zip(coeffs, fields):
        if c:
            out = out + f.scale(c)
    return out


def homomorphism_residual(algebra: LieAlgebra, fields: Sequence[PolyVectorField],
                          i: int, j: int) -> PolyVectorField:
    """``[X_i, X_j] - sum_k c_ij^k X_k``, exactly."""
    return field_bracket(fields[i], fields[j]) - _combination(
        algebra, fields, algebra.structure[i][j])


def build_action(algebra: LieAlgebra, surface: Surface,
                 generator_fields: Sequence[PolyVectorField]) -> ActionSpec:
    if isinstance(surface, str):
        surface = Surface(surface)
    fields = tuple(generator_fields)
    if len(fields) != algebra.dim:
        raise ActionError(f"{len(fields)} generator fields for a {algebra.dim}-dimensional algebra")
    for k, f in enumerate(fields):
        if f.surface != surface:
            raise ActionError(f"generator {k} lives on the {f.surface.kind}, "
                              f"not the {surface.kind}")
    for i in range(algebra.dim):
        for j in range(i + 1, algebra.dim):
            res = homomorphism_residual(algebra, fields, i, j)
            if not res.is_zero():
                raise HomomorphismError((i, j), res, algebra.basis_names)
    return ActionSpec(algebra, surface, fields)


def element_field(action: ActionSpec, a: Sequence) -> PolyVectorField:
    coeffs = action.algebra.check(a)
    return _combination(action.algebra, action.generator_fields, coeffs)


# fixed sets ------------------------------------------------------------------


def _system(fields: Sequence[PolyVectorField], chart: str) -> Optional[System]:
    live = [f for f in fields if not f.is_zero()]
    return System.of(live, chart) if live else None


def _residuals(fields: Sequence[PolyVectorField], chart: str, p) -> Tuple[float, ...]:
    out = []
    for f in fields:
        P, Q = f.components(chart)
        out.append(float(math.hypot(P(p[0], p[1]), Q(p[0], p[1]))))
    return tuple(out)


def _fix_search(fields, region: Region, opts: Options):
    chart = region.chart
    system = _system(fields, chart)
    if system is None:
        raise ZeroSearchIncomplete("every generator is the zero field: the whole region is fixed",
                                   [], [])
    result = zero_search(system, region, opts, chart)
    clusters = [ZeroCluster(c.location, c.radius, c.jacobian, c.degenerate, c.chart,
                            _residuals(fields, chart, c.location))
                for c in result.clusters]
    return clusters, result


def fix_set(action: ActionSpec, region: Region, opts: Options = DEFAULT) -> List[ZeroCluster]:
    """Common zeros of all generator fields in the region.

    Each cluster carries ``|X_i|`` at its location for every generator.
    Raises :class:`ZeroSearchIncomplete` when some cells are neither excluded
    nor isolated.
    """
    clusters, result = _fix_search(action.generator_fields, region, opts)
    if not result.complete:
        raise ZeroSearchIncomplete(
            f"{len(result.uncertified)} cells neither excluded nor isolated",
            clusters, result.uncertified)
    return clusters


# stabilizers -----------------------------------------------------------------


@dataclass(frozen=True)
class Stabilizer:
    kernel: Subspace
    subalgebra: Subspace
    enlarged: bool
    numerical_rank: int


def _evaluation_matrix(action: ActionSpec, p, chart: str) -> np.ndarray:
    cols = []
    for f in action.generator_fields:
        P, Q = f.components(chart)
        cols.append([float(P(p[0], p[1])), float(Q(p[0], p[1]))])
    return np.array(cols, dtype=float).T


def stabilizer_at(action: ActionSpec, p, chart: Optional[str] = None,
                  opts: Options = DEFAULT) -> Stabilizer:
    """Elements whose fields vanish at ``p``, closed under brackets.

    The kernel of ``a -> X_a(p)`` is computed exactly at the rational value
    of ``p``; when that is rank-deficient only up to rounding (the float
    singular values fall below ``opts.rank_cutoff`` times the largest) the
    numerical kernel is used instead, rounded to small rationals.
    """
    chart = chart or action.surface.charts[0]
    d = action.dim
    M = _evaluation_matrix(action, p, chart)
    sv = np.linalg.svd(M, compute_uv=False)
    top = float(sv.max()) if sv.size else 0.0
    num_rank = int(np.sum(sv > opts.rank_cutoff * top)) if top > 0 else 0

    px, py = Fraction(float(p[0])), Fraction(float(p[1]))
    rows = [[f.components(chart)[r].subs_exact(px, py) for f in action.generator_fields]
            for r in range(2)]
    exact = nullspace(rows, d)
    if d - len(exact) > num_rank:
        _, _, vt = np.linalg.svd(M)
        kernel_rows = vt[num_rank:]
        exact = [[Fraction(float(v)).limit_denominator(10 ** 6) for v in row]
                 for row in kernel_rows]
    kernel = Subspace(d, exact)
    closed = subalgebra_closure(action.algebra, kernel)
    return Stabilizer(kernel, closed, closed != kernel, num_rank)


# invariance ------------------------------------------------------------------


@dataclass
class InvarianceReport:
    fixed: List[ZeroCluster]
    max_drift: float
    trajectories: int
    escaped: int
    complete: bool

    def to_json(self):
        return {"fixed": [c.to_json() for c in self.fixed], "max_drift": self.max_drift,
                "trajectories": self.trajectories, "escaped": self.escaped,
                "complete": self.complete}


def invariance_probe(action: ActionSpec, ideal: Subspace, region: Region,
                     opts: Options = DEFAULT,
                     times: Sequence[float] = (0.1, 0.5, 1.0)) -> InvarianceReport:
    """Check that the fixed set of an ideal is carried into itself by every generator flow."""
    if not is_ideal(action.algebra, ideal):
        raise ActionError("probe needs an ideal")
    sub = [element_field(action, v) for v in ideal.basis]
    chart = region.chart
    if not sub or all(f.is_zero() for f in sub):
        raise ActionError("the ideal acts trivially; its fixed set is the whole region")
    clusters, result = _fix_search(sub, region, opts)
    jobs = [(c, g, t) for c in clusters for g in action.generator_fields for t in times]

    def run(job):
        c, g, t = job
        end = advance(FlowMap.of(g, t, opts), c.location, chart)
        if isinstance(end, Escaped):
            return None
        return max(_residuals(sub, chart, end), default=0.0)

    drifts = parallel_map(run, jobs)
    good = [x for x in drifts if x is not None]
    return InvarianceReport(clusters, max(good, default=0.0), len(jobs),
                            sum(x is None for x in drifts), result.complete)


# main verification -----------------------------------------------------------


@dataclass
class VerificationReport:
    status: str
    block_region: Region
    index: Optional[IndexResult]
    essential: bool
    nilpotent: bool
    witness: Optional[Tuple[float, float]] = None
    residuals: Tuple[float, ...] = ()
    certification: Dict[str, object] = dc_field(default_factory=dict)

    def to_json(self):
        return {
            "status": self.status,
            "index": None if self.index is None else self.index.value,
            "witness": None if self.witness is None else list(self.witness),
            "residuals": list(self.residuals),
            "certification": {
                "nilpotent": self.nilpotent,
                "essential": self.essential,
                "region": self.block_region.to_json(),
                "index": None if self.index is None else self.index.to_json(),
                **self.certification,
            },
        }


def _seeds(action, x_field, region: Region, opts: Options, seed: int) -> np.ndarray:
    chart = region.chart
    pts = []
    try:
        sys_x = System.of([x_field], chart)
        pts.extend(c.location for c in zero_search(sys_x, region, opts, chart).clusters)
    except ZeroSearchIncomplete:
        pass
    x0, y0, x1, y1 = region.bbox()
    n = opts.seed_grid
    gx, gy = np.meshgrid(x0 + (np.arange(n) + 0.5) * (x1 - x0) / n,
                         y0 + (np.arange(n) + 0.5) * (y1 - y0) / n, indexing="ij")
    pts.extend(zip(gx.ravel(), gy.ravel()))
    rng = np.random.default_rng(seed)
    extra = rng.uniform([x0, y0], [x1, y1], size=(n, 2))
    pts.extend(map(tuple, extra))
    arr = np.array(pts, dtype=float)
    return arr[np.asarray(region.contains(arr[:, 0], arr[:, 1]), dtype=bool)]


def verify_main(action: ActionSpec, x: Sequence, region: Region,
                opts: Options = DEFAULT, seed: int = 0) -> VerificationReport:
    """Look for a common fixed point inside an essential block of ``x``.

    Never reports the statement false: failure to locate the guaranteed point
    is INCONCLUSIVE.  Raises :class:`BoundaryZeroError` when the region does
    not isolate the zeros of ``x``'s field.
    """
    if not is_nilpotent(action.algebra):
        return VerificationReport(NOT_APPLICABLE, region, None, False, False)
    x_field = element_field(action, x)
    try:
        idx = block_index(x_field, region, opts)
    except BoundaryZeroError:
        raise
    except IndexComputationError as exc:
        return VerificationReport(NOT_ESSENTIAL, region, None, False, True,
                                  certification={"index_error": str(exc)})
    if not idx.certified or idx.value == 0:
        return VerificationReport(NOT_ESSENTIAL, region, idx, False, True)

    fields = action.generator_fields
    chart = region.chart
    candidates = []
    notes: Dict[str, object] = {"witness_tol": opts.witness_tol}
    try:
        clusters, result = _fix_search(fields, region, opts)
        notes["fix_search_complete"] = result.complete
        candidates.extend(c.location for c in clusters)
    except ZeroSearchIncomplete:
        # every generator vanishes identically: any point of the region is fixed
        notes["fix_search_complete"] = True
        candidates.extend(map(tuple, _seeds(action, x_field, region, opts, seed)[:1]))
    system = _system(fields, chart)
    if system is not None:
        seeds = _seeds(action, x_field, region, opts, seed)
        notes["seeds"] = int(len(seeds))
        pts, _ = system.newton(seeds, opts.newton_tol, opts.newton_max_iter)
        ok = np.all(np.isfinite(pts), axis=1)
        pts = pts[ok]
        inside = np.asarray(region.contains(pts[:, 0], pts[:, 1]), dtype=bool)
        candidates.extend(map(tuple, pts[inside]))
    good = []
    for c in candidates:
        res = _residuals(fields, chart, c)
        if max(res, default=0.0) < opts.witness_tol:
            good.append((tuple(float(v) for v in c), res))
    if not good:
        return VerificationReport(INCONCLUSIVE, region, idx, True, True, certification=notes)
    witness, res = min(good, key=lambda g: g[0])
    return VerificationReport(VERIFIED, region, idx, True, True, witness, res, notes)
