"""Finite-dimensional real Lie algebras with rational structure constants.

Everything here is exact: vectors are tuples of :class:`fractions.Fraction`
and every membership question (ideal, subalgebra, spanning) is answered by
rational row reduction, never by a tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple

Vector = Tuple[Fraction, ...]


class LieAlgebraError(ValueError):
    """Invalid structure constants, or an operation whose hypotheses fail."""


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    return Fraction(x)


def vec(coords: Iterable) -> Vector:
    return tuple(_q(c) for c in coords)


def unit(d: int, i: int) -> Vector:
    return tuple(Fraction(int(k == i)) for k in range(d))


def zero_vector(d: int) -> Vector:
    return (Fraction(0),) * d


# ---------------------------------------------------------------------------
# rational row reduction


def rref(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None):
    """Reduced row echelon form.

    Returns ``(rows, pivots)`` where ``rows`` holds only the nonzero rows,
    each normalised to a leading 1, and ``pivots`` their pivot columns.
    """
    m = [list(map(_q, r)) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        if p != 1:
            m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None) -> int:
    return len(rref(rows, ncols)[0])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[Vector]:
    """Basis of ``{x : A x = 0}`` for the matrix with the given rows."""
    red, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


class Subspace:
    """Linear subspace of Q^d stored by its canonical (RREF) basis.

    Any spanning list may be passed; dependent vectors are discarded, so two
    Subspace objects are equal exactly when they span the same space.
    """

    __slots__ = ("parent_dim", "basis", "pivots")

    def __init__(self, parent_dim: int, vectors: Iterable[Sequence] = ()):
        vs = [vec(v) for v in vectors]
        for v in vs:
            if len(v) != parent_dim:
                raise LieAlgebraError(
                    f"vector of length {len(v)} in subspace of Q^{parent_dim}")
        basis, pivots = rref(vs, parent_dim) if vs else ([], [])
        self.parent_dim = parent_dim
        self.basis: Tuple[Vector, ...] = tuple(basis)
        self.pivots: Tuple[int, ...] = tuple(pivots)

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(d, [unit(d, i) for i in range(d)])

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(d, [])

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.parent_dim - self.dim

    def reduce(self, v: Sequence) -> Vector:
        """Remainder of ``v`` after eliminating the pivot columns."""
        x = list(vec(v))
        for row, p in zip(self.basis, self.pivots):
            f = x[p]
            if f:
                x = [a - f * b for a, b in zip(x, row)]
        return tuple(x)

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def __le__(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(self.parent_dim, self.basis + other.basis)

    def __and__(self, other: "Subspace") -> "Subspace":
        return self.intersection(other)

    def intersection(self, other: "Subspace") -> "Subspace":
        m, n = self.dim, other.dim
        if m == 0 or n == 0:
            return Subspace.zero(self.parent_dim)
        # sum a_i u_i - sum b_j w_j = 0
        cols = list(self.basis) + [tuple(-x for x in w) for w in other.basis]
        rows = [[c[k] for c in cols] for k in range(self.parent_dim)]
        out = []
        for coeffs in nullspace(rows, m + n):
            v = [Fraction(0)] * self.parent_dim
            for a, u in zip(coeffs[:m], self.basis):
                if a:
                    v = [x + a * y for x, y in zip(v, u)]
            out.append(v)
        return Subspace(self.parent_dim, out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subspace) and self.parent_dim == other.parent_dim
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.parent_dim, self.basis))

    def __repr__(self):
        rows = ", ".join("(" + ", ".join(str(x) for x in b) + ")" for b in self.basis)
        return f"Subspace(dim={self.dim}/{self.parent_dim}, [{rows}])"


# ---------------------------------------------------------------------------
# the algebra


def structure_problems(c) -> List[str]:
    """Antisymmetry and Jacobi violations of a structure-constant array."""
    d = len(c)
    problems = []
    for i, j, k in product(range(d), repeat=3):
        if c[i][j][k] != -c[j][i][k]:
            problems.append(f"antisymmetry: c[{i}][{j}][{k}]={c[i][j][k]} "
                            f"but c[{j}][{i}][{k}]={c[j][i][k]}")
            if len(problems) > 20:
                return problems
    if problems:
        return problems

    def br(a, b):
        out = [Fraction(0)] * d
        for p in range(d):
            if not a[p]:
                continue
            for q in range(d):
                if not b[q]:
                    continue
                f = a[p] * b[q]
                row = c[p][q]
                for r in range(d):
                    if row[r]:
                        out[r] += f * row[r]
        return out

    e = [unit(d, i) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                s = [x + y + z for x, y, z in zip(
                    br(br(e[i], e[j]), e[k]),
                    br(br(e[j], e[k]), e[i]),
                    br(br(e[k], e[i]), e[j]))]
                if any(s):
                    problems.append(f"Jacobi fails on basis triple ({i}, {j}, {k})")
    return problems


class LieAlgebra:
    """Real Lie algebra with ``[e_i, e_j] = sum_k c[i][j][k] e_k``.

    The constructor rejects structure constants that are not antisymmetric
    or violate the Jacobi identity (pass ``validate=False`` to inspect an
    invalid table with :func:`structure_problems`).
    """

    __slots__ = ("dim", "basis_names", "structure")

    def __init__(self, structure, basis_names: Optional[Sequence[str]] = None,
                 validate: bool = True):
        d = len(structure)
        if d < 1:
            raise LieAlgebraError("dimension must be positive")
        c = tuple(tuple(tuple(_q(x) for x in structure[i][j]) for j in range(d))
                  for i in range(d))
        if any(len(c[i]) != d or any(len(row) != d for row in c[i]) for i in range(d)):
            raise LieAlgebraError("structure constants must form a d x d x d array")
        names = tuple(basis_names) if basis_names is not None else tuple(
            f"e{i + 1}" for i in range(d))
        if len(names) != d or len(set(names)) != d:
            raise LieAlgebraError("need d distinct basis names")
        if validate:
            problems = structure_problems(c)
            if problems:
                raise LieAlgebraError("; ".join(problems[:5]))
        self.dim = d
        self.basis_names = names
        self.structure = c

    @classmethod
    def from_brackets(cls, names: Sequence[str], brackets: dict, validate=True):
        """Build from ``{(a, b): {c: coeff}}`` keyed by basis names.

        Only one of each antisymmetric pair need be given.
        """
        d = len(names)
        idx = {n: i for i, n in enumerate(names)}
        c = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for (a, b), out in brackets.items():
            i, j = idx[a], idx[b]
            for name, coeff in out.items():
                k = idx[name]
                c[i][j][k] = _q(coeff)
                c[j][i][k] = -_q(coeff)
        return cls(c, names, validate=validate)

    @classmethod
    def from_entries(cls, dim: int, entries, names=None, validate=True):
        """Build from ``[i, j, k, num, den]`` entries (0-based), taken literally."""
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for i, j, k, num, den in entries:
            c[i][j][k] = Fraction(int(num), int(den))
        return cls(c, names, validate=validate)

    def entries(self) -> List[List[int]]:
        out = []
        for i, j, k in product(range(self.dim), repeat=3):
            x = self.structure[i][j][k]
            if x:
                out.append([i, j, k, x.numerator, x.denominator])
        return out

    def check(self, v: Sequence) -> Vector:
        v = vec(v)
        if len(v) != self.dim:
            raise LieAlgebraError(
                f"element has {len(v)} coordinates, algebra has dimension {self.dim}")
        return v

    def bracket(self, a: Sequence, b: Sequence) -> Vector:
        a, b = self.check(a), self.check(b)
        d = self.dim
        out = [Fraction(0)] * d
        for i in range(d):
            if not a[i]:
                continue
            for j in range(d):
                if not b[j]:
                    continue
                f = a[i] * b[j]
                row = self.structure[i][j]
                for k in range(d):
                    if row[k]:
                        out[k] += f * row[k]
        return tuple(out)

    def basis(self) -> List[Vector]:
        return [unit(self.dim, i) for i in range(self.dim)]

    def ad(self, a: Sequence) -> List[Vector]:
        """Matrix of ``ad a`` as rows: entry [k][j] is the e_k-coefficient of [a, e_j]."""
        cols = [self.bracket(a, e) for e in self.basis()]
        return [tuple(col[k] for col in cols) for k in range(self.dim)]

    def __eq__(self, other):
        return (isinstance(other, LieAlgebra) and self.structure == other.structure
                and self.basis_names == other.basis_names)

    def __hash__(self):
        return hash((self.structure, self.basis_names))

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim}, basis={list(self.basis_names)})"


def bracket(a: Sequence, b: Sequence, alg: LieAlgebra) -> Vector:
    return alg.bracket(a, b)


def bracket_space(alg: LieAlgebra, s: Subspace, t: Subspace) -> Subspace:
    """Span of all brackets [u, w] with u in s and w in t."""
    return Subspace(alg.dim, [alg.bracket(u, w) for u in s.basis for w in t.basis])


def lower_central_series(alg: LieAlgebra) -> List[Subspace]:
    """g, [g, g], [g, [g, g]], ... up to (and including) the first term that repeats.

    The repeated term itself is not listed twice, so a nilpotent algebra ends
    with the zero subspace and a non-nilpotent one with a nonzero term.
    """
    g = Subspace.full(alg.dim)
    series = [g]
    while series[-1].dim > 0:
        nxt = bracket_space(alg, g, series[-1])
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_nilpotent(alg: LieAlgebra) -> bool:
    return lower_central_series(alg)[-1].dim == 0


def center(alg: LieAlgebra) -> Subspace:
    """Kernel of ``a -> ad a``."""
    d = alg.dim
    c = alg.structure
    # row (j, k), column i: coefficient of e_k in [e_i, e_j]
    rows = [[c[i][j][k] for i in range(d)] for j in range(d) for k in range(d)]
    return Subspace(d, nullspace(rows, d))


def is_ideal(alg: LieAlgebra, s: Subspace) -> bool:
    return all(s.contains(alg.bracket(e, v)) for e in alg.basis() for v in s.basis)


def is_subalgebra(alg: LieAlgebra, s: Subspace) -> bool:
    return all(s.contains(alg.bracket(u, v))
               for i, u in enumerate(s.basis) for v in s.basis[i + 1:])


def subalgebra_closure(alg: LieAlgebra, s: Subspace) -> Subspace:
    """Smallest subalgebra containing ``s``."""
    while True:
        nxt = s + bracket_space(alg, s, s)
        if nxt.dim == s.dim:
            return s
        s = nxt


def abh_check(alg: LieAlgebra, u: Subspace, w: Subspace) -> bool:
    """True iff u + w is the whole algebra."""
    return (u + w).dim == alg.dim


class Projection:
    """Quotient map ``g -> g / ideal`` in coordinates of a standard complement.

    The complement is spanned by the basis vectors at the non-pivot columns of
    the ideal's RREF basis, in increasing order.
    """

    def __init__(self, parent_dim: int, ideal: Subspace):
        self.parent_dim = parent_dim
        self.ideal = ideal
        self.complement = tuple(i for i in range(parent_dim) if i not in ideal.pivots)

    @property
    def dim(self) -> int:
        return len(self.complement)

    def __call__(self, v: Sequence) -> Vector:
        r = self.ideal.reduce(v)
        return tuple(r[i] for i in self.complement)

    def lift(self, u: Sequence) -> Vector:
        v = [Fraction(0)] * self.parent_dim
        for x, i in zip(vec(u), self.complement):
            v[i] = x
        return tuple(v)

    def pullback(self, f: Subspace) -> Subspace:
        return Subspace(self.parent_dim,
                        [self.lift(b) for b in f.basis] + list(self.ideal.basis))


def quotient(alg: LieAlgebra, ideal: Subspace):
    """Quotient algebra and its projection. Raises if ``ideal`` is not an ideal."""
    if ideal.parent_dim != alg.dim:
        raise LieAlgebraError("subspace lives in a different dimension")
    if not is_ideal(alg, ideal):
        raise LieAlgebraError("quotient by a subspace that is not an ideal")
    pi = Projection(alg.dim, ideal)
    m = pi.dim
    if m == 0:
        raise LieAlgebraError("quotient by the whole algebra is the zero algebra")
    lifts = [unit(alg.dim, i) for i in pi.complement]
    c = [[list(pi(alg.bracket(lifts[a], lifts[b]))) for b in range(m)] for a in range(m)]
    names = [alg.basis_names[i] for i in pi.complement]
    return LieAlgebra(c, names), pi


def codim1_ideal_containing(alg: LieAlgebra, y: Sequence) -> Subspace:
    """A codimension-one ideal containing ``y`` (the algebra must be nilpotent).

    Induction on dimension: divide out a one-dimensional central ideal,
    solve in the quotient and pull the answer back. In dimension 2 the
    algebra is abelian and any line through ``y`` will do.
    """
    y = alg.check(y)
    if alg.dim < 2:
        raise LieAlgebraError("need dimension at least 2")
    if not is_nilpotent(alg):
        raise LieAlgebraError("algebra is not nilpotent")
    return _codim1(alg, y)


def _codim1(alg: LieAlgebra, y: Vector) -> Subspace:
    d = alg.dim
    if d == 2:
        return Subspace(2, [y] if any(y) else [unit(2, 0)])
    z = center(alg).basis[0]
    quo, pi = quotient(alg, Subspace(d, [z]))
    return pi.pullback(_codim1(quo, pi(y)))


# ---------------------------------------------------------------------------
# standard algebras used as fixtures


def abelian(d: int, names=None) -> LieAlgebra:
    return LieAlgebra([[[0] * d for _ in range(d)] for _ in range(d)], names)


def heisenberg() -> LieAlgebra:
    """h3: [X, Y] = Z with Z central."""
    return LieAlgebra.from_brackets(["X", "Y", "Z"], {("X", "Y"): {"Z": 1}})


def filiform4() -> LieAlgebra:
    """n4: [e1, e2] = e3, [e1, e3] = e4."""
    names = ["e1", "e2", "e3", "e4"]
    return LieAlgebra.from_brackets(names, {("e1", "e2"): {"e3": 1},
                                            ("e1", "e3"): {"e4": 1}})


def nilpotent5() -> LieAlgebra:
    """Five-dimensional filiform algebra with an extra bracket [e2, e3] = e5."""
    names = ["e1", "e2", "e3", "e4", "e5"]
    return LieAlgebra.from_brackets(names, {
        ("e1", "e2"): {"e3": 1},
        ("e1", "e3"): {"e4": 1},
        ("e1", "e4"): {"e5": 1},
        ("e2", "e3"): {"e5": 1},
    })


def heisenberg5() -> LieAlgebra:
    names = ["x1", "y1", "x2", "y2", "z"]
    return LieAlgebra.from_brackets(names, {("x1", "y1"): {"z": 1},
                                            ("x2", "y2"): {"z": 1}})


def affine_line() -> LieAlgebra:
    """aff(R): [A, B] = B. Solvable, not nilpotent."""
    return LieAlgebra.from_brackets(["A", "B"], {("A", "B"): {"B": 1}})


def euclidean_plane() -> LieAlgebra:
    """e(2): [J, Tx] = Ty, [J, Ty] = -Tx. Solvable, not nilpotent."""
    return LieAlgebra.from_brackets(["J", "Tx", "Ty"], {("J", "Tx"): {"Ty": 1},
                                                         ("J", "Ty"): {"Tx": -1}})
