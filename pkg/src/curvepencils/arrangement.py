"""Curve arrangements in the plane and the topology of their complements.

An arrangement is a list of labeled, pairwise distinct irreducible-looking
forms; one degree-1 component may be designated as the line at infinity.
This module carries the first-homology model, detection of multiple points
that span local pencils, and exponent subtori pulled back from a pencil
base.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import TYPE_CHECKING, Iterable, Sequence

from .exactalg import (
    IntMatrix,
    QmodZ,
    integer_kernel_basis,
    lattice_key,
    saturate_lattice,
    smith_normal_form,
)
from .polyform import (
    PolyParseError,
    ProjLine,
    ProjPoint,
    TernaryForm,
    intersect_lines,
)

if TYPE_CHECKING:  # pragma: no cover
    from .pencil import PencilClassification

__all__ = [
    "ArrangementError",
    "CurveComponent",
    "Arrangement",
    "TorsionCharacter",
    "H1Model",
    "h1_model",
    "MultiplePoint",
    "local_pencil_points",
    "ExponentSubtorus",
    "pullback_subtorus",
]


class ArrangementError(ValueError):
    """Raised when an arrangement violates a structural requirement."""


@dataclass(frozen=True)
class CurveComponent:
    """One irreducible component: a label and a primitive integral form."""

    label: str
    form: TernaryForm

    @property
    def degree(self) -> int:
        return self.form.degree


class Arrangement:
    """A plane curve arrangement with an optional line at infinity."""

    def __init__(
        self,
        components: Sequence[CurveComponent],
        infinity_index: int | None = None,
        extra_points: Sequence[ProjPoint] = (),
    ):
        comps = tuple(
            CurveComponent(c.label, c.form.primitive()) for c in components
        )
        if not comps:
            raise ArrangementError("arrangement needs at least one component")
        labels = [c.label for c in comps]
        if len(set(labels)) != len(labels):
            raise ArrangementError("component labels must be unique")
        for c in comps:
            if c.form.is_zero() or c.form.is_constant():
                raise ArrangementError(f"component {c.label!r} is not a curve")
        for a, b in itertools.combinations(comps, 2):
            if a.form.proportional_to(b.form):
                raise ArrangementError(f"components {a.label!r} and {b.label!r} coincide")
        if infinity_index is not None:
            if not 0 <= infinity_index < len(comps):
                raise ArrangementError("infinity index out of range")
            if comps[infinity_index].degree != 1:
                raise ArrangementError("the line at infinity must have degree 1")
        self.components = comps
        self.infinity_index = infinity_index
        self.extra_points = tuple(extra_points)

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_json(cls, doc: dict) -> "Arrangement":
        try:
            entries = doc["components"]
        except (TypeError, KeyError):
            raise ArrangementError("arrangement document needs a 'components' list") from None
        comps = []
        for entry in entries:
            try:
                label, text = entry["label"], entry["poly"]
            except (TypeError, KeyError):
                raise ArrangementError("each component needs 'label' and 'poly'") from None
            try:
                form = TernaryForm.parse(text)
            except PolyParseError as exc:
                raise ArrangementError(f"component {label!r}: {exc}") from None
            comps.append(CurveComponent(str(label), form))
        infinity = None
        if doc.get("infinity") is not None:
            labels = [c.label for c in comps]
            if doc["infinity"] not in labels:
                raise ArrangementError(f"infinity label {doc['infinity']!r} not among components")
            infinity = labels.index(doc["infinity"])
        extra = []
        for triple in doc.get("extra_points", ()):
            if not (isinstance(triple, (list, tuple)) and len(triple) == 3):
                raise ArrangementError("extra_points entries must be integer triples")
            extra.append(ProjPoint(tuple(int(v) for v in triple)))
        return cls(comps, infinity, extra)

    @classmethod
    def from_file(cls, path: str) -> "Arrangement":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ArrangementError(f"invalid JSON: {exc}") from None
        return cls.from_json(doc)

    def to_json(self) -> dict:
        doc: dict = {
            "components": [
                {"label": c.label, "poly": str(c.form)} for c in self.components
            ]
        }
        if self.infinity_index is not None:
            doc["infinity"] = self.components[self.infinity_index].label
        if self.extra_points:
            doc["extra_points"] = [list(p.coords) for p in self.extra_points]
        return doc

    def with_infinity(self, index: int) -> "Arrangement":
        return Arrangement(self.components, index, self.extra_points)

    # -- queries ---------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(c.degree for c in self.components)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.components)

    def index_of(self, label: str) -> int:
        for i, c in enumerate(self.components):
            if c.label == label:
                return i
        raise KeyError(label)

    def affine_indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.size) if j != self.infinity_index)

    def line_indices(self) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.components) if c.degree == 1)

    def is_line_arrangement(self) -> bool:
        return all(c.degree == 1 for c in self.components)

    def irreducibility_warnings(self) -> list[str]:
        """Linear factors found on degree >= 2 components, as warnings.

        A bounded probe only; silence is not a proof of irreducibility.
        """
        from .polyform import exact_divide, line_through

        out = []
        for c in self.components:
            if c.degree < 2:
                continue
            pts = _rational_points_on_curve(c.form, want=6)
            for p, q in itertools.combinations(pts, 2):
                try:
                    line = line_through(p, q)
                except ValueError:
                    continue
                if exact_divide(c.form, line.form) is not None:
                    out.append(
                        f"component {c.label!r} has linear factor {line.form}"
                    )
                    break
        return out

    def __repr__(self) -> str:
        inf = "" if self.infinity_index is None else f", infinity={self.components[self.infinity_index].label!r}"
        return f"Arrangement({[c.label for c in self.components]!r}{inf})"


def _rational_points_on_curve(form: TernaryForm, want: int) -> list[ProjPoint]:
    """A few rational points of the curve, found by slicing with lines."""
    from .exactalg import rational_roots

    found: list[ProjPoint] = []
    probes = [
        ProjLine.from_coefficients(a, b, c)
        for a, b, c in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (1, -1, 0), (1, 2, -1), (2, -1, 3)]
    ]
    for line in probes:
        bf = form.restrict(line)
        if bf.is_zero():
            continue
        poly = bf.dehomogenized()
        if bf.formal_degree - poly.degree > 0:
            pt = line.point_at(1, 0)
            if pt not in found:
                found.append(pt)
        if poly.degree >= 1:
            for root, _ in rational_roots(poly).roots:
                pt = line.point_at(1, root)
                if pt not in found:
                    found.append(pt)
        if len(found) >= want:
            break
    return found[:want]


# ---------------------------------------------------------------------------
# characters of the homology torus


class TorsionCharacter:
    """A character of H_1 of the complement, as exponents in Q/Z per component."""

    __slots__ = ("exponents",)

    def __init__(self, exponents: Iterable[QmodZ | Fraction | int]) -> None:
        self.exponents = tuple(
            e if isinstance(e, QmodZ) else QmodZ(e) for e in exponents
        )

    def is_trivial(self) -> bool:
        return all(e.is_zero() for e in self.exponents)

    @property
    def order(self) -> int:
        out = 1
        for e in self.exponents:
            out = out * e.order // gcd(out, e.order)
        return out

    def satisfies_degree_relation(self, degrees: Sequence[int]) -> bool:
        total = QmodZ(0)
        for d, e in zip(degrees, self.exponents):
            total = total + d * e
        return total.is_zero()

    def value_strings(self) -> tuple[str, ...]:
        return tuple(e.character_string() for e in self.exponents)

    def sort_key(self) -> tuple[Fraction, ...]:
        return tuple(e.value for e in self.exponents)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TorsionCharacter) and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash(("TorsionCharacter", self.exponents))

    def __repr__(self) -> str:
        return f"TorsionCharacter({[str(e) for e in self.exponents]})"

    def __str__(self) -> str:
        return "(" + ",".join(self.value_strings()) + ")"


# ---------------------------------------------------------------------------
# first homology


@dataclass(frozen=True)
class H1Model:
    """H_1 of the complement: Z^r modulo the single degree relation.

    ``change`` is unimodular with change * degrees = (pi0_order, 0, ..., 0),
    so the new coordinates split H_1 into Z/pi0_order plus a free part.
    """

    degrees: tuple[int, ...]
    rank: int
    pi0_order: int
    change: IntMatrix


def h1_model(arr: Arrangement) -> H1Model:
    d = IntMatrix([[deg] for deg in arr.degrees])
    snf = smith_normal_form(d)
    g = snf.D.entry(0, 0)
    return H1Model(arr.degrees, arr.size - 1, g, snf.U)


# ---------------------------------------------------------------------------
# multiple points and local pencils


@dataclass(frozen=True)
class MultiplePoint:
    """Components of one degree meeting at one point."""

    point: ProjPoint
    degree: int
    incident: tuple[int, ...]
    span_dim: int

    @property
    def count(self) -> int:
        return len(self.incident)

    @property
    def yields_local_pencil(self) -> bool:
        # a point pencil contributes positive dimension only past two members
        return self.count >= 3 and self.span_dim == 2


def local_pencil_points(
    arr: Arrangement, extra_points: Sequence[ProjPoint] = ()
) -> list[MultiplePoint]:
    """All multiple points of the arrangement, grouped by component degree.

    Candidate points are pairwise intersections of the line components plus
    any caller-supplied points (needed when no two lines meet there).
    """
    lines = {j: ProjLine(arr.components[j].form) for j in arr.line_indices()}
    candidates: set[ProjPoint] = set(extra_points)
    for i, j in itertools.combinations(sorted(lines), 2):
        try:
            candidates.add(intersect_lines(lines[i], lines[j]))
        except ValueError:
            continue
    out: list[MultiplePoint] = []
    for pt in sorted(candidates, key=lambda p: p.sort_key()):
        incident = [
            j for j, c in enumerate(arr.components) if c.form.evaluate(pt.coords) == 0
        ]
        by_degree: dict[int, list[int]] = {}
        for j in incident:
            by_degree.setdefault(arr.components[j].degree, []).append(j)
        for degree in sorted(by_degree):
            group = by_degree[degree]
            if len(group) < 2:
                continue
            vectors = [arr.components[j].form.coefficient_vector() for j in group]
            from .exactalg import fraction_rref

            _, pivots = fraction_rref(vectors)
            out.append(MultiplePoint(pt, degree, tuple(group), len(pivots)))
    return out


# ---------------------------------------------------------------------------
# exponent subtori


@dataclass(frozen=True)
class ExponentSubtorus:
    """An algebraic subtorus of the character torus, by exponent columns.

    Row j gives the exponents of component j in the torus parameters; the
    subtorus is the image of (s_1, ..., s_m) -> (prod s_i^{E[j][i]})_j.
    """

    rows: tuple[tuple[int, ...], ...]
    parameter_points: tuple = ()
    eliminated_point: object = None

    @property
    def dimension(self) -> int:
        return len(self.rows[0]) if self.rows and self.rows[0] else 0

    @property
    def size(self) -> int:
        return len(self.rows)

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(r[i] for r in self.rows) for i in range(self.dimension)]

    def zero_rows(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.rows) if all(e == 0 for e in r))

    def saturated_key(self) -> tuple:
        """Canonical key of the saturated exponent lattice; the dedup identity."""
        cols = self.columns()
        return lattice_key(saturate_lattice(cols, self.size), self.size)

    def perp_lattice_key(self) -> tuple:
        """Canonical key of the lattice of characters constant on the subtorus."""
        E = IntMatrix.from_columns(self.columns(), self.size)
        perp = integer_kernel_basis(E.transpose())
        return lattice_key(perp.columns(), self.size)

    def monomial_strings(self) -> tuple[str, ...]:
        """Row j as a monomial in the parameters, e.g. ``t^2`` or ``s*t^-1``."""
        names = ["t"] if self.dimension == 1 else [f"t{i+1}" for i in range(self.dimension)]
        out = []
        for row in self.rows:
            parts = []
            for name, e in zip(names, row):
                if e == 0:
                    continue
                parts.append(name if e == 1 else f"{name}^{e}")
            out.append("*".join(parts) if parts else "1")
        return tuple(out)

    def contains_character_direction(self, vector: Sequence[int]) -> bool:
        cols = self.columns()
        key_with = lattice_key(list(cols) + [tuple(vector)], self.size)
        return key_with == lattice_key(cols, self.size)


def pullback_subtorus(arr: Arrangement, classification: "PencilClassification") -> ExponentSubtorus:
    """Exponent subtorus pulled back from the base of the pencil.

    One parameter per base point except the last in canonical order, which
    is eliminated against the product-is-constant relation.  Every column
    satisfies the degree relation sum_j d_j E[j][i] = 0.
    """
    B = classification.base_points
    if len(B) < 2:
        raise ArrangementError("pullback needs at least two fully-arrangement fibers")
    eliminated = B[-1]
    params = B[:-1]
    rows = [[0] * len(params) for _ in range(arr.size)]
    for j, placement in enumerate(classification.placements):
        if placement.kind != "type1":
            continue
        if placement.point == eliminated:
            for i in range(len(params)):
                rows[j][i] = -placement.multiplicity
        else:
            i = params.index(placement.point)
            rows[j][i] = placement.multiplicity
    degrees = arr.degrees
    for i in range(len(params)):
        assert sum(degrees[j] * rows[j][i] for j in range(arr.size)) == 0, (
            "degree relation failed on a subtorus column"
        )
    return ExponentSubtorus(
        tuple(tuple(r) for r in rows),
        parameter_points=tuple(params),
        eliminated_point=eliminated,
    )
