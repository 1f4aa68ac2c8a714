"""Zero localisation for systems of polynomial planar fields.

A cell (square of half-width ``h`` about ``c``) is discarded when some field
of the system is provably nonzero on it.  The proof is a centered form: the
Taylor expansion of each component about ``c`` bounds ``|P(c + d) - P(c)|``
by ``sum |b_kl| h**(k + l)`` over the non-constant coefficients, so the
field cannot vanish on the cell when its value at ``c`` is larger than that
bound.  Cells that survive to the finest level are grouped into connected
clusters, polished with damped Gauss-Newton, and each cluster receives an
isolation circle on which the same bound certifies that no common zero lies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT, Options
from .fields import PolyVectorField, jacobian_polys
from .poly import Poly2
from .regions import Circle, Region

_REL = 1e-9
_ROUND = 1e-12


class ZeroSearchIncomplete(RuntimeError):
    """Some cells could be neither excluded nor certified as isolated zeros."""

    def __init__(self, message, clusters, uncertified):
        super().__init__(message)
        self.clusters = clusters
        self.uncertified = uncertified


@dataclass(frozen=True)
class ZeroCluster:
    location: Tuple[float, float]
    radius: float
    jacobian: Tuple[Tuple[float, float], Tuple[float, float]]
    degenerate: bool
    chart: str = "plane"
    residuals: Tuple[float, ...] = ()

    def to_json(self):
        return {
            "chart": self.chart,
            "location": list(self.location),
            "radius": self.radius,
            "jacobian": [list(r) for r in self.jacobian],
            "degenerate": self.degenerate,
            "residuals": list(self.residuals),
        }


class System:
    """A list of component pairs ``(P, Q)`` in one chart, searched for common zeros."""

    def __init__(self, pairs: Sequence[Tuple[Poly2, Poly2]]):
        self.pairs = [tuple(p) for p in pairs]
        if not self.pairs:
            raise ValueError("empty system")
        self.jac = [((P.diff(0), P.diff(1)), (Q.diff(0), Q.diff(1))) for P, Q in self.pairs]

    @classmethod
    def of(cls, fields: Sequence[PolyVectorField], chart: Optional[str] = None) -> "System":
        return cls([f.components(chart) for f in fields])

    def values(self, x, y) -> np.ndarray:
        """Shape ``x.shape + (m, 2)``."""
        return np.stack([np.stack([np.asarray(P(x, y), float), np.asarray(Q(x, y), float)], -1)
                         for P, Q in self.pairs], -2)

    def moduli(self, x, y) -> np.ndarray:
        v = self.values(x, y)
        return np.hypot(v[..., 0], v[..., 1])

    def residual(self, x, y) -> np.ndarray:
        """Largest field modulus (the stacked residual)."""
        return self.moduli(x, y).max(axis=-1)

    def excluded(self, cx, cy, h) -> np.ndarray:
        """True where some field is certified nonvanishing on the square."""
        cx = np.asarray(cx, float)
        cy = np.asarray(cy, float)
        out = np.zeros(np.broadcast(cx, cy, h).shape, dtype=bool)
        for P, Q in self.pairs:
            vp, vq = np.abs(P(cx, cy)), np.abs(Q(cx, cy))
            tp, tq = P.taylor_tail(cx, cy, h), Q.taylor_tail(cx, cy, h)
            mp = _ROUND * (P.abs_bound_terms(cx, cy) + tp)
            mq = _ROUND * (Q.abs_bound_terms(cx, cy) + tq)
            ok = vp > tp * (1 + _REL) + mp
            ok |= vq > tq * (1 + _REL) + mq
            ok |= np.hypot(vp, vq) > np.hypot(tp, tq) * (1 + _REL) + np.hypot(mp, mq)
            out |= ok
        return out

    def jacobian(self, x: float, y: float, k: int) -> np.ndarray:
        return np.array([[float(d(x, y)) for d in row] for row in self.jac[k]])

    def newton(self, pts: np.ndarray, tol: float, max_iter: int) -> Tuple[np.ndarray, np.ndarray]:
        """Damped Gauss-Newton (Levenberg-regularised) on the stacked system, row by row."""
        x = np.array(pts, dtype=float).reshape(-1, 2)
        res = self._stacked_norm(x)
        active = res > 0
        for _ in range(max_iter):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            step = self._gn_step(x[idx])
            lam = np.ones(len(idx))
            improved = np.zeros(len(idx), dtype=bool)
            trial = x[idx].copy()
            trial_res = res[idx].copy()
            for _ in range(40):
                todo = ~improved
                if not todo.any():
                    break
                cand = x[idx][todo] + lam[todo, None] * step[todo]
                cres = self._stacked_norm(cand)
                better = cres < res[idx][todo]
                sub = np.nonzero(todo)[0]
                trial[sub[better]] = cand[better]
                trial_res[sub[better]] = cres[better]
                improved[sub[better]] = True
                lam[sub[~better]] *= 0.5
            moved = np.hypot(*(trial - x[idx]).T)
            x[idx] = trial
            res[idx] = trial_res
            # stop on stagnation or a negligible step; multiple roots converge
            # only linearly, so the residual alone stops them too early
            active[idx] = improved & (trial_res > 0) & (
                moved > tol * (1 + np.hypot(*trial.T)))
        return x, res

    def _stacked(self, x: np.ndarray):
        F = self.values(x[:, 0], x[:, 1]).reshape(len(x), -1)
        J = np.stack([np.stack([np.stack([np.asarray(d(x[:, 0], x[:, 1]), float)
                                          for d in row], -1) for row in jac], -2)
                      for jac in self.jac], -3).reshape(len(x), -1, 2)
        return F, J

    def _stacked_norm(self, x: np.ndarray) -> np.ndarray:
        F = self.values(x[:, 0], x[:, 1]).reshape(len(x), -1)
        return np.sqrt(np.sum(F * F, axis=-1))

    def _gn_step(self, x: np.ndarray) -> np.ndarray:
        F, J = self._stacked(x)
        a = np.sum(J[:, :, 0] * J[:, :, 0], -1)
        b = np.sum(J[:, :, 0] * J[:, :, 1], -1)
        d = np.sum(J[:, :, 1] * J[:, :, 1], -1)
        g0 = -np.sum(J[:, :, 0] * F, -1)
        g1 = -np.sum(J[:, :, 1] * F, -1)
        # column scaling keeps the regularisation relative to each coordinate
        sa = np.sqrt(a)
        sd = np.sqrt(d)
        sa = np.where(sa > 0, sa, 1.0)
        sd = np.where(sd > 0, sd, 1.0)
        a, b, d = a / (sa * sa) + 1e-14, b / (sa * sd), d / (sd * sd) + 1e-14
        g0, g1 = g0 / sa, g1 / sd
        det = a * d - b * b
        det = np.where(det == 0, 1e-300, det)
        return np.stack([(d * g0 - b * g1) / det / sa, (a * g1 - b * g0) / det / sd], -1)


# ---------------------------------------------------------------------------
# curve certification


def segment_boxes(curve, a: np.ndarray, b: np.ndarray):
    """Square boxes (centre, half-width) each containing the curve piece over [a, b]."""
    mid = curve.points(0.5 * (a + b))
    half = 0.5 * (b - a) * curve.length * (1 + 1e-12)
    return mid, half


def certify_curve(system: System, curve, min_fraction: float = 1e-7,
                  initial: int = 64) -> bool:
    """Prove that the system has no common zero on the curve (adaptive box cover)."""
    a = np.arange(initial) / initial
    b = a + 1.0 / initial
    while len(a):
        mid, half = segment_boxes(curve, a, b)
        bad = ~system.excluded(mid[:, 0], mid[:, 1], half)
        if not bad.any():
            return True
        a, b = a[bad], b[bad]
        if (b - a).min() < min_fraction or len(a) > 1 << 16:
            return False
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
    return True


# ---------------------------------------------------------------------------
# search


@dataclass
class ZeroSearch:
    clusters: List[ZeroCluster]
    uncertified: List[Tuple[float, float, float]] = field(default_factory=list)
    cells: int = 0

    @property
    def complete(self) -> bool:
        return not self.uncertified


def _coef_norm(p: Poly2) -> float:
    return math.sqrt(sum(float(c) ** 2 for c in p.terms.values()))


def scaled_det(J: np.ndarray, pair) -> float:
    """det J with each row divided by the coefficient norm of its component.

    Invariant under rescaling P or Q, but (unlike normalising the rows of J
    itself) still small near a degenerate zero.
    """
    n = np.array([_coef_norm(pair[0]), _coef_norm(pair[1])])
    if np.any(n == 0):
        return 0.0
    return float(np.linalg.det(J / n[:, None]))


def _components(cells: Dict[Tuple[int, int], int]) -> List[List[Tuple[int, int]]]:
    seen = set()
    comps = []
    for start in sorted(cells):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = []
        while stack:
            i, j = stack.pop()
            comp.append((i, j))
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    nb = (i + di, j + dj)
                    if nb in cells and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        comps.append(sorted(comp))
    return comps


def zero_search(system: System, region: Region, opts: Options = DEFAULT,
                chart: str = "plane") -> ZeroSearch:
    """Common zeros of ``system`` in ``region`` (never raises on incompleteness)."""
    x0, y0, x1, y1 = region.bbox()
    half = 0.5 * max(x1 - x0, y1 - y0) * (1 + 1e-6) + 1e-12
    ox, oy = 0.5 * (x0 + x1) - half, 0.5 * (y0 + y1) - half
    ii = np.zeros(1, dtype=np.int64)
    jj = np.zeros(1, dtype=np.int64)
    used = 0
    level = 0
    uncertified: List[Tuple[float, float, float]] = []
    while True:
        size = 2 * half / (1 << level)
        cx = ox + (ii + 0.5) * size
        cy = oy + (jj + 0.5) * size
        h = 0.5 * size
        used += len(ii)
        keep = region.may_meet_box(cx, cy, h) & ~system.excluded(cx, cy, h)
        ii, jj = ii[keep], jj[keep]
        if level == opts.max_depth or not len(ii):
            break
        if used + 4 * len(ii) > opts.cell_budget:
            uncertified = [(float(a), float(b), h) for a, b in zip(cx[keep], cy[keep])]
            return ZeroSearch([], uncertified, used)
        ii = (2 * ii[:, None] + np.array([0, 1, 0, 1])).ravel()
        jj = (2 * jj[:, None] + np.array([0, 0, 1, 1])).ravel()
        order = np.lexsort((jj, ii))
        ii, jj = ii[order], jj[order]
        level += 1

    size = 2 * half / (1 << level)
    h = 0.5 * size
    cells = {(int(a), int(b)): k for k, (a, b) in enumerate(zip(ii, jj))}
    comps = _components(cells)

    found: List[Tuple[np.ndarray, List[Tuple[int, int]], float]] = []
    for comp in comps:
        arr = np.array(comp, dtype=float)
        cxs = ox + (arr[:, 0] + 0.5) * size
        cys = oy + (arr[:, 1] + 0.5) * size
        res = system.residual(cxs, cys)
        k = int(np.argmin(res))
        seed = np.array([[cxs[k], cys[k]]])
        pt, r = system.newton(seed, opts.newton_tol, opts.newton_max_iter)
        pt = pt[0]
        lo = np.array([cxs.min(), cys.min()]) - 3 * size
        hi = np.array([cxs.max(), cys.max()]) + 3 * size
        if not (np.all(pt >= lo) and np.all(pt <= hi)) or not np.isfinite(r[0]):
            pt, r = seed[0], res[k:k + 1]
        extent = float(np.max(np.hypot(cxs - pt[0], cys - pt[1]))) + h * math.sqrt(2)
        if any(np.hypot(*(pt - q)) < opts.merge_distance for q, _, _ in found):
            continue
        found.append((pt, comp, extent))

    clusters: List[ZeroCluster] = []
    for n, (pt, comp, extent) in enumerate(found):
        others = [float(np.min(np.hypot(ox + (np.array(c)[:, 0] + 0.5) * size - pt[0],
                                        oy + (np.array(c)[:, 1] + 0.5) * size - pt[1])))
                  - h * math.sqrt(2)
                  for m, (_, c, _) in enumerate(found) if m != n]
        limit = min(others, default=math.inf)
        radius = None
        r = extent + 2 * size
        for _ in range(10):
            if r >= limit - size:
                break
            if certify_curve(system, Circle(float(pt[0]), float(pt[1]), r)):
                radius = r
                break
            r *= 1.5
        if radius is None:
            uncertified.extend((ox + (i + 0.5) * size, oy + (j + 0.5) * size, h) for i, j in comp)
            continue
        if not region.contains(pt[0], pt[1]):
            continue
        mods = system.moduli(pt[0], pt[1])
        dets = [abs(scaled_det(system.jacobian(pt[0], pt[1], k), system.pairs[k]))
                for k in range(len(system.pairs))]
        best = int(np.argmax(dets))
        J = system.jacobian(pt[0], pt[1], best)
        clusters.append(ZeroCluster(
            location=(float(pt[0]), float(pt[1])),
            radius=float(radius),
            jacobian=((float(J[0, 0]), float(J[0, 1])), (float(J[1, 0]), float(J[1, 1]))),
            degenerate=bool(dets[best] < opts.degenerate_tol),
            chart=chart,
            residuals=tuple(float(m) for m in np.atleast_1d(mods)),
        ))
    clusters.sort(key=lambda c: c.location)
    return ZeroSearch(clusters, uncertified, used)


def find_zeros(field: PolyVectorField, region: Region, opts: Options = DEFAULT) -> List[ZeroCluster]:
    """Isolated zeros of ``field`` in ``region``, each with a certified isolation circle.

    Raises :class:`ZeroSearchIncomplete` (carrying the certified clusters and
    the unresolved cells) when the budget runs out or some cluster cannot be
    isolated, e.g. along a curve of zeros.
    """
    result = zero_search(System.of([field], region.chart), region, opts, region.chart)
    if not result.complete:
        raise ZeroSearchIncomplete(
            f"{len(result.uncertified)} cells neither excluded nor isolated",
            result.clusters, result.uncertified)
    return result.clusters
