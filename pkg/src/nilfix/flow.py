"""Local flows of polynomial fields and the fixed-point index of time-t maps.

Integration is Dormand-Prince 5(4) with per-point step-size control.  A batch
of starting points is advanced together but every row keeps its own time,
step and error estimate, so the result for a point does not depend on which
other points share the batch.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field as dc_field
from typing import List, Optional, Sequence

import numpy as np

from .config import DEFAULT, Options, parallel_map
from .fields import PolyVectorField
from .index import (IndexComputationError, IndexResult, block_index, combine,
                    winding_number)
from .regions import Circle, Region

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

OK, ESCAPED, BUDGET = 0, 1, 2
SWITCH_RADIUS = 2.0
DISPLACEMENT_FLOOR = 1e3  # multiple of the integrator tolerance


class EscapeError(IndexComputationError):
    """Some trajectory left the chart's working domain before time t."""


@dataclass(frozen=True)
class Escaped:
    """Trajectory left the domain of the local flow before the requested time."""
    time: float
    reason: str = "left working box"


@dataclass(frozen=True)
class FlowMap:
    field: PolyVectorField
    t: float
    rel_tol: float = DEFAULT.rel_tol
    abs_tol: float = DEFAULT.abs_tol
    max_step: float = DEFAULT.max_step
    max_steps: int = DEFAULT.max_steps
    working_box: float = DEFAULT.working_box

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("flow time must be finite")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("tolerances and max_step must be positive")

    @classmethod
    def of(cls, field: PolyVectorField, t: float, opts: Options = DEFAULT) -> "FlowMap":
        return cls(field, float(t), opts.rel_tol, opts.abs_tol, opts.max_step,
                   opts.max_steps, opts.working_box)


def _rhs(field: PolyVectorField, y: np.ndarray, chart: np.ndarray, sign: float) -> np.ndarray:
    names = field.surface.charts
    out = np.empty_like(y)
    for k, name in enumerate(names):
        m = chart == k
        if not m.any():
            continue
        P, Q = field.charts[name]
        out[m, 0] = P(y[m, 0], y[m, 1])
        out[m, 1] = Q(y[m, 0], y[m, 1])
    return sign * out


def advance_many(flow: FlowMap, pts, chart: Optional[str] = None):
    """Advance every row of ``pts`` (shape (n, 2)) to time ``flow.t``.

    Returns ``(points, status, reached)``: final coordinates in the starting
    chart, a status code per row (OK, ESCAPED or BUDGET) and the time
    actually reached.
    """
    field = flow.field
    names = field.surface.charts
    start = names.index(chart if chart is not None else names[0])
    y = np.array(pts, dtype=float).reshape(-1, 2)
    n = len(y)
    ch = np.full(n, start, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    T = abs(flow.t)
    sign = 1.0 if flow.t >= 0 else -1.0
    tau = np.zeros(n)
    h = np.full(n, min(flow.max_step, T if T > 0 else 1.0) * 0.1)
    steps = np.zeros(n, dtype=np.int64)
    active = np.full(n, T > 0)
    kind = field.surface.kind

    while active.any():
        idx = np.nonzero(active)[0]
        yi, ci = y[idx], ch[idx]
        hi = np.minimum(np.minimum(h[idx], flow.max_step), T - tau[idx])
        k = [None] * 7
        k[0] = _rhs(field, yi, ci, sign)
        for s in range(1, 7):
            acc = yi.copy()
            for j, a in enumerate(_A[s]):
                if a:
                    acc = acc + (hi * a)[:, None] * k[j]
            k[s] = _rhs(field, acc, ci, sign)
        ynew = yi.copy()
        err = np.zeros_like(yi)
        for j in range(7):
            if _B[j]:
                ynew = ynew + (hi * _B[j])[:, None] * k[j]
            if _E[j]:
                err = err + (hi * _E[j])[:, None] * k[j]
        scale = flow.abs_tol + flow.rel_tol * np.maximum(np.abs(yi), np.abs(ynew))
        enorm = np.max(np.abs(err) / scale, axis=1)
        finite = np.all(np.isfinite(ynew), axis=1) & np.isfinite(enorm)
        accept = finite & (enorm <= 1.0)
        fac = np.where(enorm > 0, 0.9 * np.power(np.where(enorm > 0, enorm, 1.0), -0.2), 5.0)
        fac = np.clip(np.where(finite, fac, 0.2), 0.2, 5.0)
        acc_idx = idx[accept]
        y[acc_idx] = ynew[accept]
        tau[acc_idx] = np.where(hi[accept] >= T - tau[acc_idx], T, tau[acc_idx] + hi[accept])
        h[idx] = hi * np.where(accept, np.minimum(fac, 5.0), np.minimum(fac, 1.0))
        steps[idx] += 1

        if kind == "sphere":
            r2 = np.sum(y[acc_idx] ** 2, axis=1)
            flip = r2 > SWITCH_RADIUS ** 2
            if flip.any():
                f_idx = acc_idx[flip]
                y[f_idx] = y[f_idx] / r2[flip][:, None]
                ch[f_idx] = 1 - ch[f_idx]
        elif kind == "torus":
            y[acc_idx] = np.mod(y[acc_idx], 1.0)
        else:
            out = np.max(np.abs(y[acc_idx]), axis=1) > flow.working_box
            status[acc_idx[out]] = ESCAPED
        bad = idx[~finite & (hi < 1e-14 * max(T, 1.0))]
        status[bad] = ESCAPED
        status[idx[(steps[idx] >= flow.max_steps) & (status[idx] == OK)
                   & (tau[idx] < T)]] = BUDGET
        active = (status == OK) & (tau < T)

    if kind == "sphere":
        back = (ch != start) & (status == OK)
        if back.any():
            r2 = np.sum(y[back] ** 2, axis=1)
            y[back] = y[back] / np.where(r2 > 0, r2, np.nan)[:, None]
            ch[back] = start
            lost = back.copy()
            lost[back] = ~np.isfinite(y[back]).all(axis=1)
            status[lost] = ESCAPED
    return y, status, sign * tau


def advance(flow: FlowMap, p, chart: Optional[str] = None):
    """Point reached from ``p`` at time ``flow.t``, or :class:`Escaped`."""
    y, status, reached = advance_many(flow, np.asarray(p, dtype=float).reshape(1, 2), chart)
    if status[0] == ESCAPED:
        return Escaped(float(reached[0]))
    if status[0] == BUDGET:
        raise RuntimeError(f"step budget {flow.max_steps} exhausted at t={reached[0]:.6g}")
    return y[0]


def displacement(field: PolyVectorField, t: float, opts: Options = DEFAULT,
                 chart: Optional[str] = None):
    """Callable ``p -> phi_t(p) - p`` on point arrays; raises EscapeError when undefined."""
    flow = FlowMap.of(field, t, opts)

    def ev(pts):
        end, status, _ = advance_many(flow, pts, chart)
        if np.any(status == BUDGET):
            raise IndexComputationError("integration step budget exhausted on the boundary")
        if np.any(status == ESCAPED):
            raise EscapeError(f"flow for t={t} leaves the domain from a boundary point")
        return end - pts
    return ev


def _check_single_chart(field: PolyVectorField, region: Region):
    if field.surface.kind == "sphere":
        outer = region.outer
        if isinstance(outer, Circle):
            reach = math.hypot(outer.cx, outer.cy) + outer.r
        else:
            reach = max(math.hypot(x, y) for x, y in outer.vertices)
        if reach >= SWITCH_RADIUS:
            raise ValueError("region reaches the chart-switching circle; "
                             "displacement index needs a region inside one chart")


def flow_displacement_index(field: PolyVectorField, region: Region, t: float,
                            opts: Options = DEFAULT) -> IndexResult:
    """Index of the time-t map over the region: boundary winding of ``phi_t(p) - p``."""
    _check_single_chart(field, region)
    ev = displacement(field, t, opts, region.chart)
    # displacements at the level of integration error carry no information
    x0, y0, x1, y1 = region.bbox()
    reach = math.hypot(max(abs(x0), abs(x1)), max(abs(y0), abs(y1)))
    floor = max(opts.modulus_floor, DISPLACEMENT_FLOOR * (opts.abs_tol + opts.rel_tol * reach))
    dopts = opts.with_(modulus_floor=floor)
    return combine([winding_number(ev, c, dopts) for c in region.curves()])


@dataclass
class TauEntry:
    t: float
    index: Optional[int]
    min_displacement: Optional[float]
    certified: bool
    error: Optional[str] = None


@dataclass
class TauReport:
    block_index: Optional[int]
    entries: List[TauEntry] = dc_field(default_factory=list)
    stable_prefix: int = 0
    tau: Optional[float] = None

    def to_json(self):
        return asdict(self)


def tau_probe(field: PolyVectorField, region: Region, t_list: Sequence[float],
              opts: Options = DEFAULT) -> TauReport:
    """Index of the time-t map for each t, compared with the block index.

    ``stable_prefix`` counts the leading t values whose certified index equals
    the block index; ``tau`` is the largest listed t such that every listed
    t' <= t agrees.
    """
    t_list = list(t_list)
    if not t_list:
        return TauReport(None)
    ref = block_index(field, region, opts)

    def probe(t):
        try:
            r = flow_displacement_index(field, region, t, opts)
            return TauEntry(t, r.value, r.min_modulus_on_boundary, r.certified)
        except (IndexComputationError, ValueError) as exc:
            return TauEntry(t, None, None, False, f"{type(exc).__name__}: {exc}")

    entries = parallel_map(probe, t_list)
    good = [e.certified and ref.certified and e.index == ref.value for e in entries]
    prefix = 0
    while prefix < len(good) and good[prefix]:
        prefix += 1
    tau = None
    for e, ok in sorted(zip(entries, good), key=lambda p: p[0].t):
        if not ok:
            break
        tau = e.t
    return TauReport(ref.value if ref.certified else None, entries, prefix, tau)


@dataclass
class FundAEntry:
    k: int
    index: Optional[int]
    certified: bool
    error: Optional[str] = None


@dataclass
class FundAReport:
    flow_index: Optional[int]
    entries: List[FundAEntry]
    first_certified: Optional[int]
    agrees: bool

    def to_json(self):
        return asdict(self)


def fundA_check(field: PolyVectorField, perturbations: Sequence[PolyVectorField],
                region: Region, opts: Options = DEFAULT) -> FundAReport:
    """Compare block indices of approximating fields with the time-t map index of ``field``.

    ``perturbations[k - 1]`` is the k-th approximating field.  Agreement is
    required for every k from the first one whose boundary certifies.
    """
    ref = flow_displacement_index(field, region, opts.flow_t, opts)
    entries = []
    for k, fk in enumerate(perturbations, 1):
        try:
            r = block_index(fk, region, opts)
            entries.append(FundAEntry(k, r.value, r.certified))
        except IndexComputationError as exc:
            entries.append(FundAEntry(k, None, False, f"{type(exc).__name__}: {exc}"))
    first = next((e.k for e in entries if e.certified), None)
    agrees = ref.certified and first is not None and all(
        e.certified and e.index == ref.value for e in entries if e.k >= first)
    return FundAReport(ref.value if ref.certified else None, entries, first, agrees)
