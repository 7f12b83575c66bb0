"""Pencils of plane curves relative to an arrangement.

A pencil is spanned by two forms of equal degree; the fiber over the base
point (b0 : b1) is b1*P - b0*Q.  Components of the arrangement either fill
whole fibers (type 1), sit inside fibers with non-arrangement parts
(type 2), or map onto the base (horizontal).  Special fibers outside the
fully-arrangement set B are located through the discriminant of a probe
line restriction and profiled on further probes; everything is exact.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

from .arrangement import Arrangement, ArrangementError
from .exactalg import (
    UniPoly,
    fraction_matrix_determinant,
    lagrange_interpolate,
    rational_roots,
)
from .polyform import (
    BinaryForm,
    P1Point,
    PolyParseError,
    ProjLine,
    ProjPoint,
    TernaryForm,
    binary_multiplicity_profile,
    divisibility_multiplicity,
    exact_divide,
    intersect_lines,
    member_of_pencil_dividing,
)

__all__ = [
    "PencilError",
    "ProbeDegeneracyError",
    "Pencil",
    "ComponentPlacement",
    "FiberData",
    "SpecialPoint",
    "PencilClassification",
    "classify",
    "detect_special_fibers",
    "FYReport",
    "fy_identities",
    "BlowupCluster",
    "SelfIntersectionReport",
    "self_intersection",
    "SearchResult",
    "pencil_search",
]


class PencilError(ValueError):
    """Raised when a pencil violates a structural requirement."""


class ProbeDegeneracyError(RuntimeError):
    """Probe lines kept disagreeing; the input is degenerate for probing."""


@dataclass(frozen=True)
class Pencil:
    """Two independent forms of equal degree spanning a pencil of curves."""

    P: TernaryForm
    Q: TernaryForm

    def __post_init__(self) -> None:
        if self.P.is_zero() or self.Q.is_zero():
            raise PencilError("pencil generators must be nonzero")
        if self.P.degree != self.Q.degree:
            raise PencilError(
                f"generators have degrees {self.P.degree} and {self.Q.degree}"
            )
        if self.P.proportional_to(self.Q):
            raise PencilError("degenerate pencil: proportional generators")

    @property
    def degree(self) -> int:
        return self.P.degree

    def fiber(self, b: P1Point) -> TernaryForm:
        b0, b1 = b.coords
        return self.P.scale(b1) - self.Q.scale(b0)

    @classmethod
    def from_json(cls, doc: dict, arr: Arrangement | None = None) -> "Pencil":
        if "P" in doc and "Q" in doc:
            try:
                return cls(TernaryForm.parse(doc["P"]), TernaryForm.parse(doc["Q"]))
            except PolyParseError as exc:
                raise PencilError(str(exc)) from None
        if "blocks" in doc:
            if arr is None:
                raise PencilError("block form of a pencil file needs the arrangement")
            blocks = doc["blocks"]
            if len(blocks) < 2:
                raise PencilError("need at least two blocks")
            forms = []
            for block in blocks[:2]:
                try:
                    members, mults = block["members"], block["multiplicities"]
                except (TypeError, KeyError):
                    raise PencilError(
                        "each block needs 'members' and 'multiplicities'"
                    ) from None
                if len(members) != len(mults):
                    raise PencilError("members and multiplicities differ in length")
                form = TernaryForm.constant(1)
                for label, m in zip(members, mults):
                    try:
                        j = arr.index_of(label)
                    except KeyError:
                        raise PencilError(f"unknown component label {label!r}") from None
                    if int(m) < 1:
                        raise PencilError("multiplicities must be >= 1")
                    form = form * arr.components[j].form.power(int(m))
                forms.append(form)
            return cls(forms[0], forms[1])
        raise PencilError("pencil file needs either P/Q or blocks")

    def to_json(self) -> dict:
        return {"P": str(self.P), "Q": str(self.Q)}


def validate_pencil(arr: Arrangement, pencil: Pencil) -> None:
    """Reject pencils sharing an arrangement component with both generators."""
    for c in arr.components:
        if (
            divisibility_multiplicity(pencil.P, c.form) >= 1
            and divisibility_multiplicity(pencil.Q, c.form) >= 1
        ):
            raise PencilError(
                f"degenerate pencil: common factor {c.label!r} in both generators"
            )


@dataclass(frozen=True)
class ComponentPlacement:
    """Where one arrangement component sits relative to the pencil."""

    kind: str  # "type1" | "type2" | "horizontal"
    point: P1Point | None = None
    multiplicity: int | None = None


@dataclass(frozen=True)
class FiberData:
    """Arrangement members of the fiber over one base point."""

    point: P1Point
    members: tuple[tuple[int, int], ...]  # (component index, multiplicity)
    cofactor: TernaryForm

    @property
    def is_full(self) -> bool:
        return self.cofactor.is_constant()


@dataclass(frozen=True)
class SpecialPoint:
    """One point of C(f): a special fiber outside B, with its (f2) data."""

    point: P1Point
    members: tuple[tuple[int, int], ...]
    m_prime: int
    m_dprime: int
    new_part_profile: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PencilClassification:
    arrangement: Arrangement
    pencil: Pencil
    placements: tuple[ComponentPlacement, ...]
    fibers: dict[P1Point, FiberData]
    base_points: tuple[P1Point, ...]
    type2_points: tuple[P1Point, ...]
    minimal: bool
    special: bool
    special_points: tuple[SpecialPoint, ...] | None = None
    incidental_points: tuple[P1Point, ...] = ()
    warnings: tuple[str, ...] = ()
    conditional: bool = False

    @property
    def k(self) -> int:
        return len(self.base_points)

    def fiber_members(self, b: P1Point) -> tuple[tuple[int, int], ...]:
        data = self.fibers.get(b)
        return data.members if data else ()

    def divisor_string(self, b: P1Point) -> str:
        labels = self.arrangement.labels
        parts = []
        for j, m in self.fiber_members(b):
            parts.append(labels[j] if m == 1 else f"{m}*{labels[j]}")
        return " + ".join(parts) if parts else "(none)"


def classify(arr: Arrangement, pencil: Pencil) -> PencilClassification:
    """Place every component and decompose the distinguished fibers."""
    validate_pencil(arr, pencil)
    hits: list[tuple[int, P1Point, int]] = []
    placements: list[ComponentPlacement | None] = [None] * arr.size
    for j, comp in enumerate(arr.components):
        found = member_of_pencil_dividing(comp.form, pencil.P, pencil.Q)
        if found is None:
            placements[j] = ComponentPlacement("horizontal")
        else:
            b, e = found
            hits.append((j, b, e))
    return _finish_classification(arr, pencil, placements, hits)


def _finish_classification(
    arr: Arrangement,
    pencil: Pencil,
    placements: list[ComponentPlacement | None],
    hits: list[tuple[int, P1Point, int]],
    constant_cofactor_points: frozenset[P1Point] = frozenset(),
) -> PencilClassification:
    by_point: dict[P1Point, list[tuple[int, int]]] = {}
    for j, b, e in hits:
        by_point.setdefault(b, []).append((j, e))
    fibers: dict[P1Point, FiberData] = {}
    for b, members in sorted(by_point.items(), key=lambda kv: kv[0].sort_key()):
        members.sort()
        if b in constant_cofactor_points:
            cofactor = TernaryForm.constant(1)
        else:
            cofactor = pencil.fiber(b)
            for j, e in members:
                for _ in range(e):
                    nxt = exact_divide(cofactor, arr.components[j].form)
                    assert nxt is not None, "member multiplicity inconsistent"
                    cofactor = nxt
        data = FiberData(b, tuple(members), cofactor)
        fibers[b] = data
        kind = "type1" if data.is_full else "type2"
        for j, e in members:
            placements[j] = ComponentPlacement(kind, b, e)
    done = tuple(p for p in placements if p is not None)
    assert len(done) == arr.size
    B = tuple(sorted((b for b, d in fibers.items() if d.is_full), key=lambda p: p.sort_key()))
    type2 = tuple(
        sorted((b for b, d in fibers.items() if not d.is_full), key=lambda p: p.sort_key())
    )
    D = pencil.degree
    for b in B:
        total = sum(arr.components[j].degree * m for j, m in fibers[b].members)
        assert total == D, "fiber degrees failed to add up"
    minimal = all(p.kind == "type1" for p in done)
    special = any(p.kind == "type2" for p in done)
    return PencilClassification(
        arrangement=arr,
        pencil=pencil,
        placements=done,
        fibers=fibers,
        base_points=B,
        type2_points=type2,
        minimal=minimal,
        special=special,
    )


# ---------------------------------------------------------------------------
# deterministic probe sequences


class ProbeSequence:
    """Reproducible pseudo-random probe lines and points, seeded by the input."""

    def __init__(self, *seed_parts: str) -> None:
        digest = hashlib.sha256("|".join(seed_parts).encode()).digest()
        self._rng = random.Random(int.from_bytes(digest[:8], "big"))

    def lines(self) -> Iterator[ProjLine]:
        while True:
            coeffs = [self._rng.randint(-9, 9) for _ in range(3)]
            if any(c != 0 for c in coeffs):
                yield ProjLine.from_coefficients(*coeffs)

    def points(self) -> Iterator[ProjPoint]:
        while True:
            coords = [self._rng.randint(-9, 9) for _ in range(3)]
            if any(c != 0 for c in coords):
                yield ProjPoint(coords)


def _probe_seed(arr: Arrangement, pencil: Pencil) -> list[str]:
    return [str(c.form) for c in arr.components] + [str(pencil.P), str(pencil.Q)]


# ---------------------------------------------------------------------------
# special fibers


def detect_special_fibers(
    arr: Arrangement,
    pencil: Pencil,
    classification: PencilClassification,
    retries: int = 5,
) -> PencilClassification:
    """Fill in C(f): special fibers outside B with their m', m'' data.

    Candidates are the type-2 fiber points plus rational roots of the
    discriminant of a probe-line restriction of the fiber family.  Each
    candidate fiber is profiled on two independent probe lines; fibers that
    carry arrangement members or a non-reduced new part enter C(f), reduced
    non-arrangement singular fibers are reported as incidental only.
    Irrational discriminant roots leave a warning and mark the result
    conditional.  Special fibers are recognized by this algebraic proxy;
    Milnor-number jumps concentrated at base points are not examined.
    """
    probes = ProbeSequence(*_probe_seed(arr, pencil), "discriminant")
    warnings: list[str] = []
    conditional = False
    candidates: set[P1Point] = set(classification.type2_points)

    D = pencil.degree
    if D >= 2:
        # one probe's discriminant also vanishes where the probe is merely
        # tangent to a fiber; non-reduced fibers vanish for every probe, so
        # the gcd across probes strips the probe-specific factors
        common: UniPoly | None = None
        stable = 0
        for _ in range(retries + 3):
            disc = _family_discriminant(pencil, probes, retries)
            if disc is None:
                raise ProbeDegeneracyError(
                    "probe degeneracy: no valid discriminant probe found"
                )
            if common is None:
                common = disc.monic()
            else:
                new = common.gcd(disc)
                stable = stable + 1 if new.degree == common.degree else 0
                common = new
            if common.degree <= 0 or stable >= 2:
                break
        assert common is not None
        if common.degree >= 1:
            rr = rational_roots(common)
            for root, _ in rr.roots:
                candidates.add(P1Point(1, root))
            if rr.remaining_degree > 0:
                warnings.append(
                    f"discriminant keeps a degree-{rr.remaining_degree} factor "
                    "without rational roots; possible special fibers over "
                    "irrational points"
                )
                conditional = True
    # the chart c -> (1:c) misses (0:1) and the degree count misses nothing
    # else, but both end fibers deserve a direct look when not already placed
    for endpoint in (P1Point(0, 1), P1Point(1, 0)):
        if endpoint not in classification.base_points:
            candidates.add(endpoint)

    profile_probes = ProbeSequence(*_probe_seed(arr, pencil), "profiles")
    specials: list[SpecialPoint] = []
    incidental: list[P1Point] = []
    for pt in sorted(candidates, key=lambda p: p.sort_key()):
        if pt in classification.base_points:
            continue
        members = classification.fiber_members(pt)
        data = classification.fibers.get(pt)
        cofactor = data.cofactor if data else pencil.fiber(pt)
        if cofactor.is_constant():
            continue
        profile = _stable_profile(cofactor, profile_probes, retries)
        m_prime = 0
        for _, m in members:
            m_prime = gcd(m_prime, m)
        m_dprime = 0
        for m, _ in profile:
            m_dprime = gcd(m_dprime, m)
        if members or m_dprime >= 2:
            specials.append(SpecialPoint(pt, members, m_prime, m_dprime, profile))
        else:
            incidental.append(pt)
    return replace(
        classification,
        special_points=tuple(specials),
        incidental_points=tuple(incidental),
        warnings=classification.warnings + tuple(warnings),
        conditional=classification.conditional or conditional,
    )


def _family_discriminant(
    pencil: Pencil, probes: ProbeSequence, retries: int
) -> UniPoly | None:
    """Discriminant in c of the probe restriction of c*P - Q.

    Built as the Sylvester determinant of the restriction and its
    t-derivative at formal degree D, sampled at enough values of c and
    interpolated; vanishing identifies every fiber with a repeated or
    degree-dropping restriction, a superset of the special parameters.
    """
    D = pencil.degree
    tries = 0
    for line in probes.lines():
        tries += 1
        if tries > 40 * (retries + 1):
            return None
        p_coeffs = pencil.P.restrict(line).coeffs
        q_coeffs = pencil.Q.restrict(line).coeffs
        if len(p_coeffs) != D + 1 or len(q_coeffs) != D + 1:
            continue
        # the point parametrized by (0:1) must avoid the base locus, else
        # every fiber drops formal degree on this probe
        if p_coeffs[D] == 0 and q_coeffs[D] == 0:
            continue
        size = 2 * D - 1
        degree_bound = 2 * D - 1

        def sample(c: Fraction) -> Fraction:
            g = [c * p - q for p, q in zip(p_coeffs, q_coeffs)]
            dg = [k * g[k] for k in range(1, D + 1)]
            rows = []
            for i in range(D - 1):
                row = [Fraction(0)] * size
                for k in range(D + 1):
                    row[i + k] = g[D - k]
                rows.append(row)
            for i in range(D):
                row = [Fraction(0)] * size
                for k in range(D):
                    row[i + k] = dg[D - 1 - k]
                rows.append(row)
            return fraction_matrix_determinant(rows)

        points = [(Fraction(c), sample(Fraction(c))) for c in range(degree_bound + 1)]
        disc = lagrange_interpolate(points)
        extra = Fraction(degree_bound + 1)
        if disc.evaluate(extra) != sample(extra):
            continue  # degree bound violated; probe unusable
        if disc.is_zero():
            continue  # every fiber degenerate on this probe; try another
        return disc
    return None


def _stable_profile(
    form: TernaryForm, probes: ProbeSequence, retries: int
) -> tuple[tuple[int, int], ...]:
    """Multiplicity profile of a form, agreed on two independent probe lines."""
    attempts = 0
    line_iter = probes.lines()
    while attempts <= retries:
        attempts += 1
        profiles = []
        used: list[ProjLine] = []
        for line in line_iter:
            if any(line.form == u.form for u in used):
                continue
            bf = form.restrict(line)
            if bf.is_zero():
                continue
            prof = binary_multiplicity_profile(bf)
            if sum(m * d for m, d in prof) != form.degree:
                continue
            profiles.append(prof)
            used.append(line)
            if len(profiles) == 2:
                break
        if len(profiles) == 2 and profiles[0] == profiles[1]:
            return profiles[0]
    raise ProbeDegeneracyError("probe degeneracy: multiplicity profiles disagree")


# ---------------------------------------------------------------------------
# base locus identities


@dataclass(frozen=True)
class FYReport:
    """Outcome of the three base-locus counting identities."""

    degree: int
    k: int
    constant_multiplicity: bool  # (i): fiber multiplicity at p independent of b
    total: int  # sum of n_p
    total_expected: int  # D^2
    member_degree_sum: int
    member_degree_expected: int  # k * D
    point_table: tuple[tuple[ProjPoint, int], ...] | None  # exact path: (p, n_p)
    profile: tuple[tuple[int, int], ...] | None  # resultant path: (n_p, count)

    @property
    def passed(self) -> bool:
        return (
            self.constant_multiplicity
            and self.total == self.total_expected
            and self.member_degree_sum == self.member_degree_expected
        )


def fy_identities(arr: Arrangement, classification: PencilClassification) -> FYReport:
    """Check the base-locus identities of the classification.

    (i) every base point meets all fibers with one multiplicity, (ii) the
    local intersection numbers add up to D^2, (iii) weighted member degrees
    add up to k*D.  Entirely linear fibers are handled by exact point
    enumeration; once a member has degree >= 2 the n_p multiset is read off
    resultants with respect to two generic projection centers.
    """
    if any(p.kind == "type2" for p in classification.placements):
        raise PencilError(
            "type-2 members present: fiber decompositions are incomplete"
        )
    B = classification.base_points
    if len(B) < 2:
        raise PencilError("base-locus identities need at least two full fibers")
    D = classification.pencil.degree
    k = len(B)
    member_sum = sum(
        arr.components[j].degree * m
        for b in B
        for j, m in classification.fiber_members(b)
    )
    all_lines = all(
        arr.components[j].degree == 1
        for b in B
        for j, _ in classification.fiber_members(b)
    )
    if all_lines:
        table, constant = _fy_exact_points(arr, classification)
        total = sum(n for _, n in table)
        return FYReport(
            degree=D,
            k=k,
            constant_multiplicity=constant,
            total=total,
            total_expected=D * D,
            member_degree_sum=member_sum,
            member_degree_expected=k * D,
            point_table=tuple(table),
            profile=None,
        )
    profile, constant = _fy_resultant_profile(arr, classification)
    total = sum(n * count for n, count in profile)
    return FYReport(
        degree=D,
        k=k,
        constant_multiplicity=constant,
        total=total,
        total_expected=D * D,
        member_degree_sum=member_sum,
        member_degree_expected=k * D,
        point_table=None,
        profile=profile,
    )


def _fy_exact_points(
    arr: Arrangement, classification: PencilClassification
) -> tuple[list[tuple[ProjPoint, int]], bool]:
    B = classification.base_points
    lines: dict[int, ProjLine] = {}
    fiber_lines: dict[P1Point, list[tuple[ProjLine, int]]] = {}
    for b in B:
        entries = []
        for j, m in classification.fiber_members(b):
            line = lines.setdefault(j, ProjLine(arr.components[j].form))
            entries.append((line, m))
        fiber_lines[b] = entries
    points: set[ProjPoint] = set()
    for b1, b2 in itertools.combinations(B, 2):
        for (l1, _), (l2, _) in itertools.product(fiber_lines[b1], fiber_lines[b2]):
            try:
                points.add(intersect_lines(l1, l2))
            except ValueError:
                continue
    table: list[tuple[ProjPoint, int]] = []
    constant = True
    for p in sorted(points, key=lambda q: q.sort_key()):
        mults = []
        for b in B:
            m_at = sum(
                m for line, m in fiber_lines[b] if line.form.evaluate(p.coords) == 0
            )
            mults.append(m_at)
        if len(set(mults)) != 1:
            constant = False
        table.append((p, mults[0] * mults[1]))
    return table, constant


def _fy_resultant_profile(
    arr: Arrangement, classification: PencilClassification
) -> tuple[tuple[tuple[int, int], ...], bool]:
    """Multiset {n_p} read from resultants against two generic centers."""
    B = classification.base_points
    pencil = classification.pencil
    D = pencil.degree
    probes = ProbeSequence(*_probe_seed(arr, pencil), "fy-centers")
    fibers = [pencil.fiber(b) for b in B]
    profiles: list[tuple[tuple[int, int], ...]] = []
    centers_used = 0
    for center in probes.points():
        if centers_used >= 2 + 10:
            break
        if any(f.evaluate(center.coords) == 0 for f in fibers):
            continue
        change = _unimodular_with_last_column(center.coords)
        moved = [_substitute_linear(f, change) for f in fibers]
        pair_profiles = []
        ok = True
        for f1, f2 in itertools.combinations(moved, 2):
            prof = _projected_resultant_profile(f1, f2, D)
            if prof is None:
                ok = False
                break
            pair_profiles.append(prof)
        if not ok:
            continue
        centers_used += 1
        profiles.append(tuple(pair_profiles))
        if len(profiles) == 2:
            break
    if len(profiles) < 2:
        raise ProbeDegeneracyError("probe degeneracy: no usable projection centers")
    if profiles[0] != profiles[1]:
        raise ProbeDegeneracyError("probe degeneracy: projection centers disagree")
    pair_profiles = profiles[0]
    constant = len(set(pair_profiles)) == 1
    counted: dict[int, int] = {}
    for mult, deg in pair_profiles[0]:
        counted[mult] = counted.get(mult, 0) + deg
    return tuple(sorted(counted.items())), constant


def _unimodular_with_last_column(col: Sequence[int]) -> list[list[int]]:
    """A unimodular integer 3x3 matrix whose last column is the given vector."""
    from .exactalg import IntMatrix, smith_normal_form

    v = IntMatrix([[c] for c in col])
    snf = smith_normal_form(v)
    assert abs(snf.D.entry(0, 0)) == 1, "column must be primitive"
    # U * v = e1, so U^{-1} has v as first column; rotate columns to the back
    inv = _int_inverse_3x3(snf.U.to_lists())
    rotated = [[row[1], row[2], row[0]] for row in inv]
    return rotated


def _int_inverse_3x3(m: list[list[int]]) -> list[list[int]]:
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    assert det in (1, -1)
    cof = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[x * det for x in row] for row in cof]


def _substitute_linear(form: TernaryForm, m: list[list[int]]) -> TernaryForm:
    """form(M * (x,y,z)), exact."""
    images = [
        TernaryForm(
            {
                (1, 0, 0): Fraction(m[idx][0]),
                (0, 1, 0): Fraction(m[idx][1]),
                (0, 0, 1): Fraction(m[idx][2]),
            }
        )
        for idx in range(3)
    ]
    out = TernaryForm.zero()
    for (a, b, c), coef in form.terms.items():
        term = TernaryForm.constant(coef)
        for e, idx in ((a, 0), (b, 1), (c, 2)):
            if e:
                term = term * images[idx].power(e)
        out = out + term
    return out


def _projected_resultant_profile(
    f1: TernaryForm, f2: TernaryForm, D: int
) -> tuple[tuple[int, int], ...] | None:
    """Profile of Res_z(f1, f2) as a binary form in (x, y).

    Both forms must have nonzero z^D coefficient (center off both curves),
    keeping the formal z-degree constant across samples.
    """
    if f1.coefficient((0, 0, D)) == 0 or f2.coefficient((0, 0, D)) == 0:
        return None
    from .exactalg import resultant as uni_resultant

    bound = D * D

    def z_poly(form: TernaryForm, t: Fraction) -> UniPoly:
        coeffs = [Fraction(0)] * (D + 1)
        for (a, b, c), coef in form.terms.items():
            coeffs[c] += coef * t**b
        return UniPoly(coeffs)

    samples = []
    for i in range(bound + 2):
        t = Fraction(i)
        r = uni_resultant(z_poly(f1, t), z_poly(f2, t))
        samples.append((t, r))
    poly = lagrange_interpolate(samples[: bound + 1])
    if poly.evaluate(samples[bound + 1][0]) != samples[bound + 1][1]:
        return None
    if poly.is_zero():
        return None
    drop = bound - poly.degree
    entries = (
        list(_profile_of_unipoly(poly)) if poly.degree >= 1 else []
    )
    if drop:
        entries.append((drop, 1))
    # A root in the dropped direction shows up as a separate entry; merge by
    # multiplicity so the profile does not depend on the projection frame.
    merged: dict[int, int] = {}
    for mult, deg in entries:
        merged[mult] = merged.get(mult, 0) + deg
    return tuple(sorted(merged.items()))


def _profile_of_unipoly(poly: UniPoly) -> tuple[tuple[int, int], ...]:
    from .exactalg import squarefree_multiplicity_profile

    return squarefree_multiplicity_profile(poly)


# ---------------------------------------------------------------------------
# self-intersection after resolving the base locus


@dataclass(frozen=True)
class BlowupCluster:
    """One infinitely-near cluster point with the multiplicity of C there."""

    multiplicity: int
    point: ProjPoint | None = None

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            raise ValueError("cluster multiplicity must be >= 1")


@dataclass(frozen=True)
class SelfIntersectionReport:
    value: int
    curve_degree: int
    clusters: tuple[BlowupCluster, ...]

    @property
    def non_positive(self) -> bool:
        return self.value <= 0


def self_intersection(
    arr: Arrangement,
    classification: PencilClassification,
    clusters: Sequence[BlowupCluster] | str = "auto",
) -> SelfIntersectionReport:
    """(deg C)^2 minus the cluster multiplicities squared, C the type-1 union.

    With clusters="auto" the base points are enumerated exactly; this needs
    every type-1 member to be a line (one blow-up per base point resolves).
    """
    type1 = [
        (j, p) for j, p in enumerate(classification.placements) if p.kind == "type1"
    ]
    deg_c = sum(arr.components[j].degree for j, _ in type1)
    if isinstance(clusters, str):
        if clusters != "auto":
            raise ValueError(f"unknown cluster mode {clusters!r}")
        if any(arr.components[j].degree != 1 for j, _ in type1):
            raise PencilError(
                "auto clusters need every fiber member to be a line; "
                "supply the blow-up cluster multiplicities"
            )
        lines = {j: ProjLine(arr.components[j].form) for j, _ in type1}
        by_fiber: dict[P1Point, list[int]] = {}
        for j, p in type1:
            by_fiber.setdefault(p.point, []).append(j)
        pts: set[ProjPoint] = set()
        for b1, b2 in itertools.combinations(sorted(by_fiber, key=lambda p: p.sort_key()), 2):
            for i in by_fiber[b1]:
                for j in by_fiber[b2]:
                    try:
                        pts.add(intersect_lines(lines[i], lines[j]))
                    except ValueError:
                        continue
        cluster_list = []
        for p in sorted(pts, key=lambda q: q.sort_key()):
            mult = sum(
                1 for j, _ in type1 if arr.components[j].form.evaluate(p.coords) == 0
            )
            cluster_list.append(BlowupCluster(mult, p))
    else:
        cluster_list = list(clusters)
    value = deg_c * deg_c - sum(c.multiplicity**2 for c in cluster_list)
    return SelfIntersectionReport(value, deg_c, tuple(cluster_list))


# ---------------------------------------------------------------------------
# pencil search


@dataclass(frozen=True)
class SearchResult:
    pencil: Pencil
    classification: PencilClassification
    partition: tuple[tuple[tuple[int, int], ...], ...]  # per fiber: (index, mult)

    @property
    def k(self) -> int:
        return self.classification.k


@dataclass(frozen=True)
class _Block:
    mask: int
    indices: tuple[int, ...]
    mults: tuple[int, ...]
    degree: int


class _SearchTables:
    """Per-arrangement precomputation shared across all candidate pairs."""

    def __init__(self, arr: Arrangement):
        self.arr = arr
        self.points: list[list[ProjPoint]] = []
        for c in arr.components:
            if c.degree == 1:
                # four points: membership votes survive two of them being
                # base points of the pair under test
                self.points.append(list(ProjLine(c.form).rational_points(4)))
            else:
                from .arrangement import _rational_points_on_curve

                self.points.append(_rational_points_on_curve(c.form, want=2))
        # values[j][i] = list of evaluations of component i at the points of j
        self.values: list[list[list[Fraction]]] = []
        for j in range(arr.size):
            row = []
            for i in range(arr.size):
                row.append(
                    [arr.components[i].form.evaluate(p.coords) for p in self.points[j]]
                )
            self.values.append(row)
        self._forms: dict[tuple[int, tuple[int, ...]], TernaryForm] = {}
        self._values_cache: dict[tuple[int, tuple[int, ...], int], list[Fraction]] = {}

    def block_values_at(self, block: _Block, j: int) -> list[Fraction]:
        """Evaluations of the block product at the stored points of component j."""
        key = (block.mask, block.mults, j)
        cached = self._values_cache.get(key)
        if cached is not None:
            return cached
        out = []
        for pi in range(len(self.points[j])):
            acc = Fraction(1)
            for idx, m in zip(block.indices, block.mults):
                acc *= self.values[j][idx][pi] ** m
            out.append(acc)
        self._values_cache[key] = out
        return out

    def block_form(self, block: _Block) -> TernaryForm:
        key = (block.mask, block.mults)
        form = self._forms.get(key)
        if form is None:
            form = TernaryForm.constant(1)
            for idx, m in zip(block.indices, block.mults):
                form = form * self.arr.components[idx].form.power(m)
            self._forms[key] = form
        return form


def _enumerate_blocks(arr: Arrangement, max_multiplicity: int) -> dict[int, list[_Block]]:
    """All multiplicity-weighted blocks, grouped by total degree."""
    degrees = arr.degrees
    r = arr.size
    by_degree: dict[int, list[_Block]] = {}
    indices = list(range(r))
    for mask in range(1, 1 << r):
        members = tuple(j for j in indices if mask >> j & 1)
        for mults in itertools.product(range(1, max_multiplicity + 1), repeat=len(members)):
            degree = sum(degrees[j] * m for j, m in zip(members, mults))
            by_degree.setdefault(degree, []).append(_Block(mask, members, mults, degree))
    return by_degree


def _span_key(v1: Sequence[Fraction], v2: Sequence[Fraction]) -> tuple:
    """Canonical key of the plane spanned by two coefficient vectors."""
    from .exactalg import fraction_rref

    rref, pivots = fraction_rref([list(v1), list(v2)])
    assert len(pivots) == 2, "generators collapsed to a single line"
    return tuple(tuple(row) for row in rref[:2])


def iter_block_pairs(
    arr: Arrangement, max_multiplicity: int
) -> Iterator[tuple[_Block, _Block]]:
    """Unordered pairs of disjoint equal-degree blocks with coprime content.

    Blocks whose combined multiplicity vector has content > 1 generate
    non-primitive maps (powers of a smaller pencil) and are dropped.
    """
    by_degree = _enumerate_blocks(arr, max_multiplicity)
    for degree in sorted(by_degree):
        blocks = by_degree[degree]
        for a, b in itertools.combinations(blocks, 2):
            if a.mask & b.mask:
                continue
            content = 0
            for m in a.mults + b.mults:
                content = gcd(content, m)
            if content != 1:
                continue
            yield a, b


def _partition_saturated(
    partition: Sequence[Sequence[tuple[int, int]]], size: int
) -> bool:
    """Whether the partition's exponent columns span a saturated lattice.

    A primitive pencil has connected generic fiber, hence surjects on first
    homology of the punctured base; that surjectivity is exactly saturation
    of the column lattice.  Failures certify a composed map (the pencil
    factors through a cover of the line) and are not genuine partitions.
    """
    from .exactalg import lattice_key, saturate_lattice

    last = dict(partition[-1])
    cols = []
    for fiber in partition[:-1]:
        col = [0] * size
        for j, m in fiber:
            col[j] = m
        for j, m in last.items():
            col[j] = -m
        cols.append(tuple(col))
    return lattice_key(cols, size) == lattice_key(
        saturate_lattice(cols, size), size
    )


def _classify_pair(
    arr: Arrangement, tables: _SearchTables, a: _Block, b: _Block
) -> PencilClassification | None:
    """Exact classification of the pencil spanned by two block products.

    Vote-based screening keeps the exact calls to the components that can
    actually divide a fiber; disagreeing votes certify horizontality.
    """
    P = tables.block_form(a)
    Q = tables.block_form(b)
    try:
        pencil = Pencil(P, Q)
    except PencilError:
        return None
    placements: list[ComponentPlacement | None] = [None] * arr.size
    hits: list[tuple[int, P1Point, int]] = []
    for j, m in zip(a.indices, a.mults):
        hits.append((j, P1Point(0, 1), m))
    for j, m in zip(b.indices, b.mults):
        hits.append((j, P1Point(1, 0), m))
    union = a.mask | b.mask
    for j in range(arr.size):
        if union >> j & 1:
            continue
        vote = _member_vote(tables, a, b, j)
        if vote == "horizontal":
            placements[j] = ComponentPlacement("horizontal")
        elif isinstance(vote, P1Point):
            # membership is only possible over the voted point
            fiber = pencil.fiber(vote)
            e = divisibility_multiplicity(fiber, arr.components[j].form)
            if e >= 1:
                hits.append((j, vote, e))
            else:
                placements[j] = ComponentPlacement("horizontal")
        else:
            found = member_of_pencil_dividing(arr.components[j].form, P, Q)
            if found is None:
                placements[j] = ComponentPlacement("horizontal")
            else:
                hits.append((j, found[0], found[1]))
    return _finish_classification(
        arr,
        pencil,
        placements,
        hits,
        constant_cofactor_points=frozenset((P1Point(0, 1), P1Point(1, 0))),
    )


def _member_vote(
    tables: _SearchTables, a: _Block, b: _Block, j: int
) -> P1Point | str | None:
    """Cheap verdict on component j against the pencil of two blocks.

    A point p on C_j inside the fiber over b evaluates to (P(p):Q(p)) = b,
    so disagreeing nonzero votes certify horizontality and agreeing ones
    single out the only possible fiber.  Base points and components without
    stored rational points stay undecided (None).
    """
    va = tables.block_values_at(a, j)
    vb = tables.block_values_at(b, j)
    votes = [
        P1Point(pv, qv) for pv, qv in zip(va, vb) if not (pv == 0 and qv == 0)
    ]
    if not votes:
        return None
    first = votes[0]
    if any(v != first for v in votes[1:]):
        return "horizontal"
    return first


def pencil_search(
    arr: Arrangement,
    max_multiplicity: int = 3,
    max_blocks: int = 4,
    min_blocks: int = 2,
) -> list[SearchResult]:
    """All pencils realizing partitions of components into full fibers.

    Enumerates pairs of disjoint equal-degree multiplicity blocks, spans
    each pair, and keeps the pencils whose count k of fully-arrangement
    fibers lies in [min_blocks, max_blocks] with every fiber multiplicity
    within the cap.  Results are deduplicated as 2-dimensional spans; every
    emitted pencil classifies back to the partition that produced it.
    """
    if min_blocks < 2:
        raise ValueError("min_blocks must be >= 2")
    tables = _SearchTables(arr)
    seen: set[tuple] = set()
    results: list[SearchResult] = []
    for a, b in iter_block_pairs(arr, max_multiplicity):
        if min_blocks >= 3:
            # a third full fiber needs a component that could still divide
            # one; all-horizontal votes pin k = 2 without building forms
            union = a.mask | b.mask
            if all(
                _member_vote(tables, a, b, j) == "horizontal"
                for j in range(arr.size)
                if not (union >> j & 1)
            ):
                continue
        fa = tables.block_form(a)
        fb = tables.block_form(b)
        # disjoint supports of irreducibles are never proportional
        key = _span_key(
            fa.coefficient_vector(a.degree), fb.coefficient_vector(b.degree)
        )
        if key in seen:
            continue
        seen.add(key)
        classification = _classify_pair(arr, tables, a, b)
        if classification is None:
            continue
        k = classification.k
        if not (min_blocks <= k <= max_blocks):
            continue
        if any(
            m > max_multiplicity
            for bp in classification.base_points
            for _, m in classification.fiber_members(bp)
        ):
            continue
        partition = tuple(
            classification.fiber_members(bp) for bp in classification.base_points
        )
        if not _partition_saturated(partition, arr.size):
            continue
        results.append(SearchResult(classification.pencil, classification, partition))
    results.sort(
        key=lambda res: (
            res.k,
            tuple(
                str(v)
                for row in _span_key(
                    res.pencil.P.coefficient_vector(),
                    res.pencil.Q.coefficient_vector(),
                )
                for v in row
            ),
        )
    )
    return results
