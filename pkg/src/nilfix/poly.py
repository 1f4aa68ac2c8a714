"""Sparse bivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np

Monomial = Tuple[int, int]


class Poly2:
    """``sum c[i, j] x**i y**j`` with Fraction coefficients; zeros never stored."""

    __slots__ = ("terms", "_compiled")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: Dict[Monomial, Fraction] = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in monomial {(i, j)}")
            c = Fraction(c)
            if c:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), Fraction(0)) + c
        self.terms = {k: v for k, v in sorted(clean.items()) if v}
        self._compiled = None

    # construction helpers ------------------------------------------------

    @classmethod
    def const(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @classmethod
    def from_list(cls, items: Iterable) -> "Poly2":
        """From ``[i, j, numerator, denominator]`` rows."""
        terms: Dict[Monomial, Fraction] = {}
        for i, j, num, den in items:
            key = (int(i), int(j))
            terms[key] = terms.get(key, Fraction(0)) + Fraction(int(num), int(den))
        return cls(terms)

    def to_list(self) -> List[List[int]]:
        return [[i, j, c.numerator, c.denominator] for (i, j), c in self.terms.items()]

    # algebra -------------------------------------------------------------

    def __add__(self, other) -> "Poly2":
        other = _lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "Poly2":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "Poly2":
        return _lift(other) - self

    def __mul__(self, other) -> "Poly2":
        other = _lift(other)
        out: Dict[Monomial, Fraction] = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                key = (i + k, j + l)
                out[key] = out.get(key, Fraction(0)) + a * b
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly2":
        out = Poly2.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly2.const(other)
        return isinstance(other, Poly2) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def diff(self, var: int) -> "Poly2":
        """Partial derivative in x (var=0) or y (var=1)."""
        out = {}
        for (i, j), c in self.terms.items():
            if var == 0 and i:
                out[(i - 1, j)] = c * i
            elif var == 1 and j:
                out[(i, j - 1)] = c * j
        return Poly2(out)

    def subs_exact(self, x, y) -> Fraction:
        x, y = Fraction(x), Fraction(y)
        return sum((c * x ** i * y ** j for (i, j), c in self.terms.items()), Fraction(0))

    def divmod_s(self) -> Tuple["Poly2", "Poly2"]:
        """Division by ``s = x**2 + y**2`` treating s as monic in x.

        Returns ``(q, r)`` with ``self = q*s + r`` and every monomial of r
        having x-degree below 2.
        """
        rem = dict(self.terms)
        quo: Dict[Monomial, Fraction] = {}
        while True:
            top = [k for k, v in rem.items() if v and k[0] >= 2]
            if not top:
                break
            i, j = max(top)
            c = rem.pop((i, j))
            quo[(i - 2, j)] = quo.get((i - 2, j), Fraction(0)) + c
            rem[(i - 2, j + 2)] = rem.get((i - 2, j + 2), Fraction(0)) - c
        return Poly2(quo), Poly2(rem)

    # floating evaluation --------------------------------------------------

    def _compile(self):
        if self._compiled is None:
            deg_x = max((i for i, _ in self.terms), default=0)
            rows = []
            for i in range(deg_x + 1):
                ys = {j: float(c) for (a, j), c in self.terms.items() if a == i}
                dy = max(ys, default=0)
                rows.append([ys.get(j, 0.0) for j in range(dy + 1)])
            self._compiled = rows
        return self._compiled

    def __call__(self, x, y):
        """Float evaluation (scalars or numpy arrays), nested Horner: x outer, y inner."""
        rows = self._compile()
        out = None
        for coeffs in reversed(rows):
            inner = 0.0
            for c in reversed(coeffs):
                inner = inner * y + c
            out = inner if out is None else out * x + inner
        if out is None:
            out = 0.0
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, y).shape).copy()
        return float(out)

    def abs_bound_terms(self, x, y):
        """``sum |c| |x|**i |y|**j``: magnitude scale for round-off margins."""
        ax, ay = np.abs(x), np.abs(y)
        out = np.zeros(np.broadcast(ax, ay).shape)
        for (i, j), c in self.terms.items():
            out = out + abs(float(c)) * ax ** i * ay ** j
        return out

    def taylor_tail(self, cx, cy, h):
        """Upper bound of ``|P(c + d) - P(c)|`` over the box ``|d|_inf <= h``.

        Expands P about c and sums the absolute values of every non-constant
        Taylor coefficient times ``h**(k + l)``.
        """
        cx = np.asarray(cx, dtype=float)
        cy = np.asarray(cy, dtype=float)
        h = np.asarray(h, dtype=float)
        out = np.zeros(np.broadcast(cx, cy, h).shape)
        for (k, l), contrib in self._shift_table().items():
            if k == 0 and l == 0:
                continue
            b = np.zeros_like(out)
            for coef, p, q in contrib:
                b = b + coef * cx ** p * cy ** q
            out = out + np.abs(b) * h ** (k + l)
        return out

    def _shift_table(self):
        table: Dict[Monomial, list] = {}
        for (i, j), c in self.terms.items():
            for k in range(i + 1):
                for l in range(j + 1):
                    table.setdefault((k, l), []).append(
                        (float(c) * comb(i, k) * comb(j, l), i - k, j - l))
        return table

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in self.terms.items():
            mon = "*".join(([f"x**{i}" if i > 1 else "x"] if i else [])
                           + ([f"y**{j}" if j > 1 else "y"] if j else []))
            parts.append(f"{c}*{mon}" if mon else str(c))
        return " + ".join(parts)


def _lift(p) -> Poly2:
    return p if isinstance(p, Poly2) else Poly2.const(p)


X = Poly2.x()
Y = Poly2.y()
