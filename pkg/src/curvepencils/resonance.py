"""Residue classes, cup-product isotropy, and pencil reconstruction.

Degree-one cohomology classes of the complement are written as residue
vectors: one rational entry per component, summing to zero against the
component degrees.  For line arrangements with a designated infinity line
the cup product is available through `CupStructure`, and isotropy of a
subspace can be decided exactly; reconstruction of a pencil from a
subspace and of a map from a single ray work for any arrangement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd, lcm
from typing import NamedTuple, Optional, Sequence

from .arrangement import Arrangement, local_pencil_points
from .exactalg import fraction_kernel, fraction_rref, solve_fraction_system
from .pencil import Pencil, PencilClassification, PencilError
from .polyform import TernaryForm

__all__ = [
    "ResonanceError",
    "ResidueVector",
    "CupStructure",
    "IsotropyFlags",
    "IsotropicSubspace",
    "RayMap",
    "cup_product",
    "is_maximal_isotropic",
    "subspace_from_pencil",
    "pencil_from_subspace",
    "ray_to_map",
]


class ResonanceError(ValueError):
    """Raised when a residue-class computation is not available."""


@dataclass(frozen=True)
class ResidueVector:
    """Rational residues along the components, one entry per component."""

    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(Fraction(e) for e in self.entries))

    def degree_pairing(self, degrees: Sequence[int]) -> Fraction:
        return sum((d * a for d, a in zip(degrees, self.entries)), Fraction(0))

    def scaled(self, c: Fraction | int) -> "ResidueVector":
        return ResidueVector(tuple(Fraction(c) * a for a in self.entries))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def proportional_to(self, other: "ResidueVector") -> bool:
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return all(
            a * d == b * c
            for (a, b), (c, d) in itertools.combinations(
                zip(self.entries, other.entries), 2
            )
        )


class IsotropyFlags(NamedTuple):
    isotropic: bool
    maximal: bool


@dataclass(frozen=True)
class IsotropicSubspace:
    """A subspace of residue classes with its isotropy flags.

    Flags stay None when no cup structure is available (curve components,
    or no designated infinity line).
    """

    basis: tuple[ResidueVector, ...]
    isotropic: Optional[bool] = None
    maximal: Optional[bool] = None

    @property
    def dimension(self) -> int:
        rows = [v.entries for v in self.basis]
        _, pivots = fraction_rref(rows)
        return len(pivots)


# -- cup product on an affine line complement ---------------------------------


class CupStructure:
    """Degree-two relations of the complement of an affine line arrangement.

    Wedge coordinates run over pairs of affine lines.  A pair meeting on
    the designated infinity line wedges to zero; three lines through a
    common affine point impose the standard triple relation.
    """

    def __init__(self, arr: Arrangement) -> None:
        if not arr.is_line_arrangement():
            raise ResonanceError("cup product implemented for line arrangements only")
        if arr.infinity_index is None:
            raise ResonanceError("no line designated as infinity")
        self.arrangement = arr
        self.affine_indices = arr.affine_indices()
        self._slot = {j: i for i, j in enumerate(self.affine_indices)}
        n = len(self.affine_indices)
        self.pairs = tuple(itertools.combinations(range(n), 2))
        self._pair_slot = {p: i for i, p in enumerate(self.pairs)}

        parallel: list[tuple[int, ...]] = []
        concurrent: list[tuple[int, ...]] = []
        for mp in local_pencil_points(arr):
            if arr.infinity_index in mp.incident:
                affine = tuple(j for j in mp.incident if j != arr.infinity_index)
                if len(affine) >= 2:
                    parallel.append(affine)
            elif len(mp.incident) >= 2:
                concurrent.append(mp.incident)
        self.parallel_classes = tuple(parallel)
        self.concurrency_classes = tuple(concurrent)

        rows: list[list[Fraction]] = []
        for group in parallel:
            for i, j in itertools.combinations(sorted(self._slot[g] for g in group), 2):
                row = [Fraction(0)] * len(self.pairs)
                row[self._pair_slot[(i, j)]] = Fraction(1)
                rows.append(row)
        for group in concurrent:
            slots = sorted(self._slot[g] for g in group)
            for i, j, k in itertools.combinations(slots, 3):
                row = [Fraction(0)] * len(self.pairs)
                row[self._pair_slot[(i, j)]] = Fraction(1)
                row[self._pair_slot[(i, k)]] = Fraction(-1)
                row[self._pair_slot[(j, k)]] = Fraction(1)
                rows.append(row)
        self._relation_rref, self._relation_pivots = fraction_rref(rows)

    def _affine_part(self, v: ResidueVector) -> list[Fraction]:
        if len(v.entries) != self.arrangement.size:
            raise ResonanceError(
                f"residue vector has {len(v.entries)} entries, expected {self.arrangement.size}"
            )
        return [v.entries[j] for j in self.affine_indices]

    def _reduce(self, coords: list[Fraction]) -> tuple[Fraction, ...]:
        for row, pivot in zip(self._relation_rref, self._relation_pivots):
            c = coords[pivot]
            if c:
                coords = [a - c * b for a, b in zip(coords, row)]
        return tuple(coords)

    def wedge_class(self, v: ResidueVector, w: ResidueVector) -> tuple[Fraction, ...]:
        x, y = self._affine_part(v), self._affine_part(w)
        coords = [x[i] * y[j] - x[j] * y[i] for i, j in self.pairs]
        return self._reduce(coords)

    def rank_two_dimension(self) -> int:
        return len(self.pairs) - len(self._relation_pivots)


def cup_product(
    cs: CupStructure, v: ResidueVector, w: ResidueVector
) -> tuple[Fraction, ...]:
    """Class of v wedge w in degree two, in reduced coordinates."""
    return cs.wedge_class(v, w)


def is_maximal_isotropic(cs: CupStructure, subspace: IsotropicSubspace) -> IsotropyFlags:
    """Decide whether all products vanish and whether the annihilator is no bigger."""
    basis = subspace.basis
    isotropic = all(
        not any(cs.wedge_class(v, w))
        for v, w in itertools.combinations(basis, 2)
    )
    if not isotropic:
        return IsotropyFlags(False, False)
    # annihilator of the subspace inside the affine coordinates
    n = len(cs.affine_indices)
    rows: list[list[Fraction]] = []
    for v in basis:
        y = cs._affine_part(v)
        unit_classes = []
        for a in range(n):
            coords = [Fraction(0)] * len(cs.pairs)
            for p, (i, j) in enumerate(cs.pairs):
                if i == a:
                    coords[p] = y[j]
                elif j == a:
                    coords[p] = -y[i]
            unit_classes.append(cs._reduce(coords))
        for p in range(len(cs.pairs)):
            rows.append([unit_classes[a][p] for a in range(n)])
    annihilator = fraction_kernel(rows, n)
    span_rows = [cs._affine_part(v) for v in basis]
    _, pivots = fraction_rref(span_rows)
    maximal = len(annihilator) == len(pivots)
    return IsotropyFlags(True, maximal)


# -- pencils and subspaces ------------------------------------------------------


def subspace_from_pencil(
    arr: Arrangement, classification: PencilClassification
) -> IsotropicSubspace:
    """Pullback of degree-one classes of the punctured target line.

    One basis vector per base point past the first: positive member
    multiplicities on that fiber, negative ones on the reference fiber.
    Isotropy flags are filled in whenever a cup structure exists.
    """
    base = classification.base_points
    if len(base) < 2:
        raise ResonanceError("need at least two fully-arrangement fibers")
    reference = base[0]
    vectors = []
    for b in base[1:]:
        entries = [Fraction(0)] * arr.size
        for j, m in classification.fiber_members(b):
            entries[j] = Fraction(m)
        for j, m in classification.fiber_members(reference):
            entries[j] = Fraction(-m)
        vectors.append(ResidueVector(tuple(entries)))
    for v in vectors:
        assert v.degree_pairing(arr.degrees) == 0
    subspace = IsotropicSubspace(tuple(vectors))
    if arr.is_line_arrangement() and arr.infinity_index is not None:
        flags = is_maximal_isotropic(CupStructure(arr), subspace)
        subspace = replace(subspace, isotropic=flags.isotropic, maximal=flags.maximal)
    return subspace


def _coprime_positive(ratios: Sequence[Fraction]) -> Optional[list[int]]:
    if any(r <= 0 for r in ratios):
        return None
    scale = lcm(*(r.denominator for r in ratios))
    nums = [int(r * scale) for r in ratios]
    g = gcd(*nums)
    return [v // g for v in nums]


def pencil_from_subspace(arr: Arrangement, subspace: IsotropicSubspace) -> Pencil:
    """Reconstruct the pencil whose pullback subspace was given.

    Components are grouped by proportionality of their residue functionals
    (the per-component coordinate evaluations on the subspace basis);
    proportionality ratios give the fiber multiplicities, and the fiber
    products of the first two groups span the pencil.
    """
    basis = subspace.basis
    if len(basis) < 2 or subspace.dimension < 2:
        raise ResonanceError("not a pencil subspace: dimension below two")
    functionals = [
        tuple(v.entries[j] for v in basis) for j in range(arr.size)
    ]
    blocks: list[tuple[list[int], list[Fraction]]] = []
    for j, func in enumerate(functionals):
        if not any(func):
            continue
        placed = False
        for members, ratios in blocks:
            rep = functionals[members[0]]
            pivot = next(i for i, e in enumerate(rep) if e)
            ratio = func[pivot] / rep[pivot]
            if all(a == ratio * b for a, b in zip(func, rep)):
                members.append(j)
                ratios.append(ratio)
                placed = True
                break
        if not placed:
            blocks.append(([j], [Fraction(1)]))
    if len(blocks) < 3:
        raise ResonanceError("not a pencil subspace: fewer than three fiber groups")
    block_mults: list[list[int]] = []
    block_degrees: list[int] = []
    for members, ratios in blocks:
        mults = _coprime_positive(ratios)
        if mults is None:
            raise ResonanceError("not a pencil subspace: mixed signs inside a fiber group")
        block_mults.append(mults)
        block_degrees.append(
            sum(arr.components[j].degree * m for j, m in zip(members, mults))
        )
    # the per-group ratios only fix multiplicities up to a group scalar;
    # equal fiber degrees pin the scalars down
    degree = lcm(*block_degrees)
    forms: list[TernaryForm] = []
    for (members, _ratios), mults, block_degree in zip(blocks, block_mults, block_degrees):
        scale = degree // block_degree
        form = TernaryForm.constant(1)
        for j, m in zip(members, mults):
            form = form * arr.components[j].form.power(m * scale)
        forms.append(form)
    try:
        pencil = Pencil(forms[0], forms[1])
    except PencilError as exc:
        raise ResonanceError(f"not a pencil subspace: {exc}") from exc
    rows = [
        [forms[0].coefficient_vector(degree)[i], forms[1].coefficient_vector(degree)[i]]
        for i in range(len(forms[0].coefficient_vector(degree)))
    ]
    for form in forms[2:]:
        if solve_fraction_system(rows, form.coefficient_vector(degree)) is None:
            raise ResonanceError("not a pencil subspace: fiber groups do not span a pencil")
    return pencil


# -- single rays -----------------------------------------------------------------


@dataclass(frozen=True)
class RayMap:
    """A formal product of component equations with coprime exponents."""

    exponents: tuple[int, ...]
    numerator: TernaryForm
    denominator: TernaryForm
    description: str
    note: str


def ray_to_map(
    arr: Arrangement, direction: ResidueVector | Sequence[Fraction | int]
) -> RayMap:
    """Scale a rational ray to coprime integers and form the defining map.

    The sign is fixed by making the first nonzero exponent positive; the
    note records why the generic fiber of the resulting map is connected.
    """
    entries = (
        direction.entries
        if isinstance(direction, ResidueVector)
        else tuple(Fraction(e) for e in direction)
    )
    if len(entries) != arr.size:
        raise ResonanceError(
            f"direction has {len(entries)} entries, expected {arr.size}"
        )
    if not any(entries):
        raise ResonanceError("zero direction does not define a map")
    if sum(d * a for d, a in zip(arr.degrees, entries)):
        raise ResonanceError("direction must pair to zero with the component degrees")
    scale = lcm(*(a.denominator for a in entries))
    nums = [int(a * scale) for a in entries]
    g = gcd(*nums)
    exponents = [v // g for v in nums]
    first = next(v for v in exponents if v)
    if first < 0:
        exponents = [-v for v in exponents]
    numerator = TernaryForm.constant(1)
    denominator = TernaryForm.constant(1)
    up, down = [], []
    for j, m in enumerate(exponents):
        label = arr.components[j].label
        if m > 0:
            numerator = numerator * arr.components[j].form.power(m)
            up.append(label if m == 1 else f"{label}^{m}")
        elif m < 0:
            denominator = denominator * arr.components[j].form.power(-m)
            down.append(label if m == -1 else f"{label}^{-m}")
    description = " * ".join(up) + " / (" + " * ".join(down) + ")"
    return RayMap(
        exponents=tuple(exponents),
        numerator=numerator,
        denominator=denominator,
        description=description,
        note="connectivity of the generic fiber follows from Bertini's theorem",
    )
