"""Polynomial vector fields on the plane, the 2-sphere and the flat torus.

A field is stored chart by chart as a pair ``(P, Q)`` meaning
``P d/dx + Q d/dy``.  The sphere is covered by two stereographic charts
``N`` and ``S`` glued by the inversion ``(u, v) -> (u, v) / (u**2 + v**2)``;
the torus by the unit square with period-1 wraparound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Tuple

import numpy as np

from .poly import Poly2, X, Y

Components = Tuple[Poly2, Poly2]

CHARTS = {"plane": ("plane",), "sphere": ("N", "S"), "torus": ("torus",)}


class FieldError(ValueError):
    pass


class ChartError(FieldError):
    pass


class TransportError(FieldError):
    """The pushed-forward field is not polynomial in the target chart."""


@dataclass(frozen=True)
class Surface:
    kind: str

    def __post_init__(self):
        if self.kind not in CHARTS:
            raise FieldError(f"unknown surface kind {self.kind!r}")

    @property
    def charts(self) -> Tuple[str, ...]:
        return CHARTS[self.kind]

    def transition(self, src: str, dst: str, p):
        """Coordinates in chart ``dst`` of the point with coordinates ``p`` in ``src``."""
        p = np.asarray(p, dtype=float)
        if src == dst:
            return p
        if self.kind != "sphere":
            raise ChartError(f"{self.kind} has a single chart")
        s = p[..., 0] ** 2 + p[..., 1] ** 2
        if np.any(s == 0):
            raise ChartError("the chart origin is not in the overlap")
        return p / s[..., None]


PLANE = Surface("plane")
SPHERE = Surface("sphere")
TORUS = Surface("torus")


def _to_poly(p) -> Poly2:
    return p if isinstance(p, Poly2) else Poly2.const(p)


def transport(components: Components, src: str = "N", dst: str = "S") -> Components:
    """Push a field through the stereographic inversion.

    With ``w`` the target coordinate and ``s = |w|**2`` the pushforward is
    ``(s I - 2 w w^T) X(w / s)``.  Writing ``X(w / s) = N(w) / s**n`` with
    ``n`` the degree of X, the result is ``(s I - 2 w w^T) N / s**n`` and is
    polynomial exactly when that division by ``s**n`` leaves no remainder.
    """
    if {src, dst} != {"N", "S"}:
        raise ChartError(f"no stereographic transition {src} -> {dst}")
    P, Q = map(_to_poly, components)
    n = max(P.degree, Q.degree)
    if n < 0:
        return Poly2(), Poly2()
    s = X * X + Y * Y
    num = []
    for comp in (P, Q):
        acc = Poly2()
        for (i, j), c in comp.terms.items():
            acc = acc + c * X ** i * Y ** j * s ** (n - i - j)
        num.append(acc)
    radial = X * num[0] + Y * num[1]
    out = [s * num[0] - 2 * X * radial, s * num[1] - 2 * Y * radial]
    for _ in range(n):
        divided = []
        for comp in out:
            q, r = comp.divmod_s()
            if r:
                raise TransportError(
                    f"field is not polynomial in chart {dst}: remainder {r} over x**2+y**2")
            divided.append(q)
        out = divided
    return out[0], out[1]


class PolyVectorField:
    """Polynomial vector field on a :class:`Surface`, one component pair per chart."""

    __slots__ = ("surface", "charts")

    def __init__(self, surface: Surface, charts: Dict[str, Sequence]):
        if isinstance(surface, str):
            surface = Surface(surface)
        comps: Dict[str, Components] = {}
        for name, pair in charts.items():
            if name not in surface.charts:
                raise ChartError(f"chart {name!r} not on the {surface.kind}")
            P, Q = pair
            comps[name] = (_to_poly(P), _to_poly(Q))
        if surface.kind == "sphere":
            if not comps:
                raise FieldError("sphere field needs at least one chart")
            if "N" in comps and "S" in comps:
                if transport(comps["N"], "N", "S") != comps["S"]:
                    raise FieldError("chart representations N and S disagree on the overlap")
            elif "N" in comps:
                comps["S"] = transport(comps["N"], "N", "S")
            else:
                comps["N"] = transport(comps["S"], "S", "N")
        else:
            (only,) = surface.charts
            if only not in comps:
                raise FieldError(f"missing components for chart {only!r}")
            if surface.kind == "torus":
                for comp in comps[only]:
                    if comp.degree > 0:
                        raise FieldError("a polynomial field on the torus must be constant "
                                         "(periodic polynomials are constant)")
        self.surface = surface
        self.charts = {c: comps[c] for c in surface.charts}

    # constructors ------------------------------------------------------

    @classmethod
    def plane(cls, P, Q) -> "PolyVectorField":
        return cls(PLANE, {"plane": (P, Q)})

    @classmethod
    def sphere(cls, P, Q, chart: str = "N") -> "PolyVectorField":
        return cls(SPHERE, {chart: (P, Q)})

    @classmethod
    def torus(cls, a, b) -> "PolyVectorField":
        return cls(TORUS, {"torus": (Fraction(a), Fraction(b))})

    @classmethod
    def zero(cls, surface: Surface) -> "PolyVectorField":
        return cls(surface, {c: (Poly2(), Poly2()) for c in surface.charts})

    @classmethod
    def linear(cls, A, surface: Surface = PLANE) -> "PolyVectorField":
        (a, b), (c, d) = A
        return cls(surface, {surface.charts[0]: (a * X + b * Y, c * X + d * Y)})

    # algebra -------------------------------------------------------------

    def components(self, chart: str | None = None) -> Components:
        if chart is None:
            chart = self.surface.charts[0]
        try:
            return self.charts[chart]
        except KeyError:
            raise ChartError(f"chart {chart!r} not on the {self.surface.kind}") from None

    def _combine(self, other: "PolyVectorField", fn) -> "PolyVectorField":
        if other.surface != self.surface:
            raise FieldError("fields live on different surfaces")
        out = {c: (fn(self.charts[c][0], other.charts[c][0]),
                   fn(self.charts[c][1], other.charts[c][1])) for c in self.charts}
        return PolyVectorField._trusted(self.surface, out)

    @classmethod
    def _trusted(cls, surface, charts) -> "PolyVectorField":
        obj = cls.__new__(cls)
        obj.surface = surface
        obj.charts = charts
        return obj

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c) -> "PolyVectorField":
        c = Fraction(c)
        return PolyVectorField._trusted(
            self.surface, {k: (p * c, q * c) for k, (p, q) in self.charts.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, PolyVectorField) and self.surface == other.surface
                and self.charts == other.charts)

    def __hash__(self):
        return hash((self.surface, tuple(self.charts.items())))

    def is_zero(self) -> bool:
        return all(p.is_zero() and q.is_zero() for p, q in self.charts.values())

    def __repr__(self):
        body = ", ".join(f"{c}: ({p}, {q})" for c, (p, q) in self.charts.items())
        return f"PolyVectorField<{self.surface.kind}>({body})"


def _check_point(field: PolyVectorField, chart: str, p):
    x, y = np.asarray(p, dtype=float)[..., 0], np.asarray(p, dtype=float)[..., 1]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ChartError("point is not finite")
    if field.surface.kind == "torus" and (np.any(x < 0) or np.any(x > 1)
                                          or np.any(y < 0) or np.any(y > 1)):
        raise ChartError("torus chart is the closed unit square")
    return x, y


def eval_field(field: PolyVectorField, chart: str | None, p) -> np.ndarray:
    """Value of the field at ``p`` (shape (2,) or (..., 2)) in the given chart."""
    P, Q = field.components(chart)
    x, y = _check_point(field, chart, p)
    return np.stack([np.asarray(P(x, y), dtype=float), np.asarray(Q(x, y), dtype=float)],
                    axis=-1)


def field_bracket(A: PolyVectorField, B: PolyVectorField) -> PolyVectorField:
    """``[A, B]^i = sum_j A^j d_j B^i - B^j d_j A^i`` chart by chart, exactly."""
    if A.surface != B.surface:
        raise FieldError("fields live on different surfaces")
    out = {}
    for c in A.charts:
        a, b = A.charts[c], B.charts[c]
        out[c] = tuple(
            a[0] * b[i].diff(0) + a[1] * b[i].diff(1)
            - b[0] * a[i].diff(0) - b[1] * a[i].diff(1)
            for i in range(2))
    return PolyVectorField._trusted(A.surface, out)


def jacobian_polys(field: PolyVectorField, chart: str | None = None):
    P, Q = field.components(chart)
    return ((P.diff(0), P.diff(1)), (Q.diff(0), Q.diff(1)))


def jacobian(field: PolyVectorField, chart: str | None, p) -> np.ndarray:
    x, y = _check_point(field, chart, p)
    rows = jacobian_polys(field, chart)
    return np.array([[float(d(x, y)) for d in row] for row in rows])


def euler_characteristic(surface: Surface, region=None) -> int:
    """sphere -> 2, torus -> 0; a chart region (a disk with holes) -> 1 - holes."""
    if region is not None:
        return 1 - len(region.holes)
    if surface.kind == "sphere":
        return 2
    if surface.kind == "torus":
        return 0
    return 1
