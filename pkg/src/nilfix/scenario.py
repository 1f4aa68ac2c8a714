"""JSON scenario files: an algebra, a surface, named fields and regions, and tasks.

Rationals cross the file boundary as ``[numerator, denominator]`` pairs (a
bare integer is also accepted) so that structure constants and polynomial
coefficients stay exact.  A minimal file::

    {
      "schema_version": 1,
      "algebra": {"dim": 2, "names": ["R", "D"], "structure": []},
      "surface": {"kind": "plane"},
      "fields": {
        "R": {"plane": {"P": [[0, 1, -1, 1]], "Q": [[1, 0, 1, 1]]}},
        "D": {"plane": {"P": [[1, 0, 1, 1]], "Q": [[0, 1, 1, 1]]}}
      },
      "generators": ["R", "D"],
      "regions": {"unit": {"chart": "plane", "circle": [0, 0, 1]}},
      "tasks": [{"command": "verify-main", "field": "R", "region": "unit"}]
    }

Polynomial terms are ``[i, j, num, den]`` for ``num/den * x**i * y**j``.
Structure entries ``[i, j, k, num, den]`` (0-based) set ``c[i][j][k]`` and
are taken literally: both ``[i, j, ...]`` and ``[j, i, ...]`` must be listed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

from .fields import CHARTS, FieldError, PolyVectorField, Surface
from .lie import LieAlgebra, LieAlgebraError, structure_problems
from .poly import Poly2
from .regions import Region, RegionError, region_from_json

SCHEMA_VERSION = 1
COMMANDS = ("check-algebra", "check-action", "index", "verify-main", "plot")


class ScenarioError(ValueError):
    """The file does not parse or some reference does not resolve."""


def _rational(v, where: str) -> Fraction:
    if isinstance(v, bool):
        raise ScenarioError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, int) for t in v):
        if v[1] == 0:
            raise ScenarioError(f"{where}: zero denominator")
        return Fraction(v[0], v[1])
    raise ScenarioError(f"{where}: expected an integer or [num, den], got {v!r}")


def _rational_json(q: Fraction) -> list:
    return [q.numerator, q.denominator]


def _poly(items, where: str) -> Poly2:
    if not isinstance(items, list):
        raise ScenarioError(f"{where}: expected a list of terms")
    terms: Dict = {}
    for t in items:
        if not (isinstance(t, list) and len(t) in (3, 4)
                and all(isinstance(v, int) and not isinstance(v, bool) for v in t)):
            raise ScenarioError(f"{where}: term must be [i, j, num, den], got {t!r}")
        i, j = t[0], t[1]
        if i < 0 or j < 0:
            raise ScenarioError(f"{where}: negative exponent in {t!r}")
        c = _rational(t[2:] if len(t) == 4 else t[2], where)
        terms[(i, j)] = terms.get((i, j), Fraction(0)) + c
    return Poly2(terms)


@dataclass
class Scenario:
    surface: Surface
    algebra: Optional[LieAlgebra] = None
    algebra_problems: List[str] = dc_field(default_factory=list)
    fields: Dict[str, PolyVectorField] = dc_field(default_factory=dict)
    field_charts: Dict[str, List[str]] = dc_field(default_factory=dict)
    generators: List[str] = dc_field(default_factory=list)
    elements: Dict[str, List[Fraction]] = dc_field(default_factory=dict)
    regions: Dict[str, Region] = dc_field(default_factory=dict)
    tasks: List[dict] = dc_field(default_factory=list)

    # lookups -----------------------------------------------------------------

    def field(self, name: str) -> PolyVectorField:
        try:
            return self.fields[name]
        except KeyError:
            raise ScenarioError(f"unknown field {name!r}; have {sorted(self.fields)}") from None

    def region(self, name: str) -> Region:
        try:
            return self.regions[name]
        except KeyError:
            raise ScenarioError(f"unknown region {name!r}; have {sorted(self.regions)}") from None

    def element(self, name: str) -> List[Fraction]:
        """Algebra coordinates of a generator name or a named element."""
        if self.algebra is None:
            raise ScenarioError("scenario has no algebra block")
        if name in self.elements:
            return self.elements[name]
        if name in self.generators:
            k = self.generators.index(name)
            return [Fraction(int(i == k)) for i in range(self.algebra.dim)]
        raise ScenarioError(f"{name!r} is neither a generator nor a named element")

    def valid_algebra(self) -> LieAlgebra:
        if self.algebra is None:
            raise ScenarioError("scenario has no algebra block")
        if self.algebra_problems:
            raise ScenarioError("invalid algebra: " + "; ".join(self.algebra_problems[:3]))
        return self.algebra

    # serialization -------------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"schema_version": SCHEMA_VERSION, "surface": {"kind": self.surface.kind}}
        if self.algebra is not None:
            out["algebra"] = {
                "dim": self.algebra.dim,
                "names": list(self.algebra.basis_names),
                "structure": self.algebra.entries(),
            }
        out["fields"] = {
            name: {c: {"P": f.charts[c][0].to_list(), "Q": f.charts[c][1].to_list()}
                   for c in self.field_charts.get(name, f.surface.charts)}
            for name, f in self.fields.items()
        }
        if self.generators:
            out["generators"] = list(self.generators)
        if self.elements:
            out["elements"] = {k: [_rational_json(q) for q in v] for k, v in self.elements.items()}
        out["regions"] = {name: r.to_json() for name, r in self.regions.items()}
        out["tasks"] = list(self.tasks)
        return out


def _algebra(obj) -> tuple:
    if not isinstance(obj, dict) or not isinstance(obj.get("dim"), int):
        raise ScenarioError("algebra: need an integer 'dim'")
    d = obj["dim"]
    if d < 1:
        raise ScenarioError("algebra: dim must be positive")
    names = obj.get("names")
    if names is not None and (not isinstance(names, list) or len(names) != d
                              or len(set(names)) != d):
        raise ScenarioError("algebra: 'names' must list d distinct names")
    c = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
    for e in obj.get("structure", []):
        if not (isinstance(e, list) and len(e) in (4, 5)
                and all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise ScenarioError(f"algebra: structure entry must be [i, j, k, num, den], got {e!r}")
        i, j, k = e[:3]
        if not all(0 <= v < d for v in (i, j, k)):
            raise ScenarioError(f"algebra: index out of range in {e!r}")
        c[i][j][k] = _rational(e[3:] if len(e) == 5 else e[3], "algebra")
    try:
        alg = LieAlgebra(c, names, validate=False)
    except LieAlgebraError as exc:
        raise ScenarioError(f"algebra: {exc}") from None
    return alg, structure_problems(alg.structure)


def parse(obj) -> Scenario:
    """Build and validate a :class:`Scenario` from decoded JSON."""
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    kind = (obj.get("surface") or {}).get("kind", "plane")
    try:
        surface = Surface(kind)
    except FieldError as exc:
        raise ScenarioError(str(exc)) from None
    sc = Scenario(surface)
    if "algebra" in obj:
        sc.algebra, sc.algebra_problems = _algebra(obj["algebra"])

    for name, charts in (obj.get("fields") or {}).items():
        if not isinstance(charts, dict) or not charts:
            raise ScenarioError(f"field {name!r}: expected {{chart: {{'P': ..., 'Q': ...}}}}")
        comps = {}
        for chart, pq in charts.items():
            if chart not in CHARTS[kind]:
                raise ScenarioError(f"field {name!r}: chart {chart!r} not on the {kind}")
            if not isinstance(pq, dict) or set(pq) != {"P", "Q"}:
                raise ScenarioError(f"field {name!r}: chart {chart!r} needs exactly 'P' and 'Q'")
            comps[chart] = (_poly(pq["P"], f"field {name!r}.P"), _poly(pq["Q"], f"field {name!r}.Q"))
        try:
            sc.fields[name] = PolyVectorField(surface, comps)
        except FieldError as exc:
            raise ScenarioError(f"field {name!r}: {exc}") from None
        sc.field_charts[name] = [c for c in surface.charts if c in comps]

    gens = obj.get("generators", [])
    if gens:
        if sc.algebra is None:
            raise ScenarioError("generators given without an algebra")
        if len(gens) != sc.algebra.dim:
            raise ScenarioError(f"{len(gens)} generators for a {sc.algebra.dim}-dimensional algebra")
        for g in gens:
            sc.field(g)
        sc.generators = list(gens)
    for name, coords in (obj.get("elements") or {}).items():
        if sc.algebra is None or not isinstance(coords, list) or len(coords) != sc.algebra.dim:
            raise ScenarioError(f"element {name!r}: need one coefficient per basis vector")
        sc.elements[name] = [_rational(v, f"element {name!r}") for v in coords]

    for name, robj in (obj.get("regions") or {}).items():
        if not isinstance(robj, dict):
            raise ScenarioError(f"region {name!r}: expected an object")
        try:
            region = region_from_json(robj, surface.charts[0])
            if region.chart not in surface.charts:
                raise ScenarioError(f"region {name!r}: chart {region.chart!r} not on the {kind}")
            region.validate()
        except (RegionError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"region {name!r}: {exc}") from None
        sc.regions[name] = region

    tasks = obj.get("tasks", [])
    if not isinstance(tasks, list):
        raise ScenarioError("tasks must be a list")
    for t in tasks:
        if not isinstance(t, dict) or t.get("command") not in COMMANDS:
            raise ScenarioError(f"task {t!r}: 'command' must be one of {COMMANDS}")
        if "field" in t:
            sc.field(t["field"])
        if "region" in t:
            sc.region(t["region"])
    sc.tasks = tasks
    return sc


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return parse(obj)
