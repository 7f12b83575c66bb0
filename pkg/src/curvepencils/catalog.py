"""Catalog of positive-dimensional components of the character variety.

Three sources feed the catalog: pencils of curves through a multiple point
(local), pencils found by the block-partition search with three or more
fully-arrangement fibers (global), and translated components detected
through the torsion quotient of a pencil map.  Records carry the exponent
subtorus, the translation character, coordinate/essential flags, and the
expected generic first Betti number along the component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Union

from .arrangement import (
    Arrangement,
    ExponentSubtorus,
    MultiplePoint,
    TorsionCharacter,
    local_pencil_points,
    pullback_subtorus,
)
from .exactalg import QmodZ, UniPoly, fraction_rref, lattice_key, rational_roots, saturate_lattice
from .pencil import (
    Pencil,
    PencilClassification,
    PencilError,
    classify,
    detect_special_fibers,
    iter_block_pairs,
    pencil_search,
)
from .polyform import ProjLine, ProjPoint, TernaryForm, intersect_lines
from .resonance import subspace_from_pencil
from .torsion import (
    characters_of_Tf,
    compute_Tf,
    epsilon_count,
    kernel_fstar,
    lift_character,
    theta,
)

__all__ = [
    "CatalogError",
    "ComponentRecord",
    "Catalog",
    "build_catalog",
]


class CatalogError(ValueError):
    """Raised when the catalog cannot be assembled for the arrangement."""


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class ComponentRecord:
    """One positive-dimensional component of the first character variety.

    ``source`` is the multiple point (local records) or the pencil
    classification (global and translated records) that produced the
    component; ``torsion`` is the trivial character unless the record is
    translated.  ``flags`` carries ``"coordinate component"`` and/or
    ``"translated coordinate component"`` (one per kind of vanishing
    exponent row), or ``"essential"`` when neither applies, plus exactly
    one certification flag, ``"certified"`` or ``"candidate"``, followed
    in parentheses by the hypothesis that was checked or failed.
    """

    kind: str
    dimension: int
    source: Union[MultiplePoint, PencilClassification]
    subtorus: ExponentSubtorus
    torsion: TorsionCharacter
    flags: tuple[str, ...]
    witness: Optional[str]
    expected_generic_h1: int
    exceptional_note: str

    @property
    def certified(self) -> bool:
        return any(f.startswith("certified") for f in self.flags)

    def source_string(self) -> str:
        if isinstance(self.source, MultiplePoint):
            return f"point pencil at {self.source.point}"
        cl = self.source
        return " | ".join(cl.divisor_string(b) for b in cl.base_points)

    def describe(self) -> str:
        parts = [f"{self.kind} dim {self.dimension}", self.source_string()]
        if not self.torsion.is_trivial():
            parts.append("torsion (" + ", ".join(self.torsion.value_strings()) + ")")
        parts.extend(self.flags)
        if self.witness is not None:
            parts.append(f"witness {self.witness}")
        parts.append(f"expected generic h1 = {self.expected_generic_h1}")
        return "; ".join(parts)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "source": self.source_string(),
            "subtorus": [list(row) for row in self.subtorus.rows],
            "monomials": list(self.subtorus.monomial_strings()),
            "torsion": list(self.torsion.value_strings()),
            "flags": list(self.flags),
            "witness": self.witness,
            "expected_generic_h1": self.expected_generic_h1,
            "exceptional_note": self.exceptional_note,
        }


@dataclass(frozen=True)
class Catalog:
    """All records found for one arrangement, in deterministic order."""

    arrangement: Arrangement
    records: tuple[ComponentRecord, ...]
    warnings: tuple[str, ...]

    def by_kind(self, kind: str) -> tuple[ComponentRecord, ...]:
        return tuple(r for r in self.records if r.kind == kind)

    def to_json(self) -> dict:
        return {
            "labels": list(self.arrangement.labels),
            "records": [r.to_json() for r in self.records],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# probe lines for the translated sweep

_ROOT_PRIMES = (7, 11)


def _probe_lines(arr: Arrangement) -> list[tuple[TernaryForm, tuple[int, ...], tuple[int, ...]]]:
    """Two probe lines with integer parametrizations q(s) = s*q0 + q1.

    Each probe misses every pairwise intersection of the line components,
    both parametrization points avoid all components (so restrictions keep
    full degree), and the two probes meet away from the arrangement.
    """
    lines = [ProjLine(arr.components[j].form) for j in arr.line_indices()]
    points: set[tuple[int, ...]] = set()
    for l1, l2 in itertools.combinations(lines, 2):
        try:
            points.add(intersect_lines(l1, l2).sort_key())
        except ValueError:
            continue
    x, y, z = (TernaryForm.variable(v) for v in "xyz")

    candidates = []
    for a in range(1, 24):
        for b in range(-a, a + 1):
            for c in range(-a - abs(b), a + abs(b) + 2):
                candidates.append((a, b, c))
    candidates.sort(key=lambda t: (abs(t[0]) + abs(t[1]) + abs(t[2]), t))

    chosen: list[tuple[TernaryForm, tuple[int, ...], tuple[int, ...]]] = []
    for a, b, c in candidates:
        if gcd(gcd(a, abs(b)), abs(c)) != 1:
            continue
        form = x.scale(a) + y.scale(b) + z.scale(c)
        if any(cp.form.proportional_to(form) for cp in arr.components):
            continue
        if any(form.evaluate(p) == 0 for p in points):
            continue
        if chosen:
            met = intersect_lines(ProjLine(form), ProjLine(chosen[0][0]))
            if any(cp.form.evaluate(met.coords) == 0 for cp in arr.components):
                continue
        good: list[tuple[int, ...]] = []
        for p in ProjLine(form).rational_points(80):
            if all(cp.form.evaluate(p.coords) != 0 for cp in arr.components):
                good.append(tuple(int(v) for v in p.coords))
                if len(good) == 2:
                    break
        if len(good) < 2:
            continue
        chosen.append((form, good[0], good[1]))
        if len(chosen) == 2:
            return chosen
    raise CatalogError("no probe line avoids the arrangement")


def _integer_restrictions(
    arr: Arrangement, q0: Sequence[int], q1: Sequence[int]
) -> list[tuple[int, ...]]:
    """Component forms on the probe as integer coefficient tuples in s."""
    from .exactalg import lagrange_interpolate

    out = []
    for cp in arr.components:
        d = cp.degree
        samples = [
            (
                Fraction(s),
                Fraction(cp.form.evaluate(tuple(s * a + b for a, b in zip(q0, q1)))),
            )
            for s in range(d + 1)
        ]
        poly = lagrange_interpolate(samples)
        coeffs = [poly.coefficient(k) for k in range(d + 1)]
        den = 1
        for cf in coeffs:
            den = den * cf.denominator // gcd(den, cf.denominator)
        tup = tuple(int(cf * den) for cf in coeffs)
        assert tup[-1] != 0, "parametrization point lies on a component"
        out.append(tup)
    return out


# ---------------------------------------------------------------------------
# the multiple-fiber prefilter

# A fiber with a repeated component meets every probe line in a repeated
# root, away from the blocks.  On a probe the repeated-root locus of the
# family v - lambda*w is cut out by the logarithmic Wronskian
#   sum_j c_j * R_j' * prod_{i != j} R_i,
# with c the block multiplicity ray and R_j the component restrictions;
# its degree is bounded by the support degree, independent of the
# multiplicities, and its rational roots give the only rational parameters
# that can carry a repeated root.  Agreement across two probes is required.


def _conv(u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                out[i + j] += a * b
    return tuple(out)


def _derivative(u: Sequence[int]) -> tuple[int, ...]:
    return tuple(i * u[i] for i in range(1, len(u))) or (0,)


def _eval_fraction(u: Sequence[int], at: Fraction) -> Fraction:
    acc = Fraction(0)
    for a in reversed(u):
        acc = acc * at + a
    return acc


def _has_projective_root_mod_p(coeffs: Sequence[int], p: int) -> bool:
    reduced = [c % p for c in coeffs]
    if reduced[-1] == 0:
        return True
    for s in range(p):
        acc = 0
        for c in reversed(reduced):
            acc = (acc * s + c) % p
        if acc == 0:
            return True
    return False


def _log_wronskian(
    ray: dict[int, int], restrictions: Sequence[tuple[int, ...]]
) -> tuple[tuple[int, ...], int]:
    """Numerator of the restricted Wronskian and the support degree."""
    support = sorted(ray)
    k = len(support)
    prefix: list[tuple[int, ...]] = [(1,)] * (k + 1)
    for i in range(k):
        prefix[i + 1] = _conv(prefix[i], restrictions[support[i]])
    suffix: list[tuple[int, ...]] = [(1,)] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = _conv(restrictions[support[i]], suffix[i + 1])
    degree_e = len(prefix[k]) - 1
    acc = [0] * max(degree_e, 1)
    for i, j in enumerate(support):
        term = _conv(_conv(prefix[i], suffix[i + 1]), _derivative(restrictions[j]))
        c = ray[j]
        for t, val in enumerate(term):
            acc[t] += c * val
    while acc and acc[-1] == 0:
        acc.pop()
    return tuple(acc), degree_e


def _fiber_value(
    block: Sequence[tuple[int, int]], restrictions: Sequence[tuple[int, ...]], at: Fraction
) -> Fraction:
    out = Fraction(1)
    for j, m in block:
        out *= _eval_fraction(restrictions[j], at) ** m
    return out


def _candidate_parameters(
    blocks: tuple[Sequence[tuple[int, int]], Sequence[tuple[int, int]]],
    restrictions: Sequence[tuple[int, ...]],
) -> Optional[list[Fraction]]:
    """Rational parameters that can carry a repeated root on this probe.

    None marks a degenerate probe (identically vanishing Wronskian); the
    caller must keep the pair in that case.
    """
    blk_a, blk_b = blocks
    ray: dict[int, int] = {}
    for j, m in blk_a:
        ray[j] = ray.get(j, 0) + m
    for j, m in blk_b:
        ray[j] = ray.get(j, 0) - m
    ray = {j: c for j, c in ray.items() if c}
    wron, degree_e = _log_wronskian(ray, restrictions)
    if not wron:
        return None
    content = 0
    for c in wron:
        content = gcd(content, c)
    wron = tuple(c // content for c in wron)

    found: set[Fraction] = set()
    # finite repeated-root positions are rational roots of the Wronskian
    if len(wron) > 1 and all(_has_projective_root_mod_p(wron, p) for p in _ROOT_PRIMES):
        for rho, _ in rational_roots(UniPoly([Fraction(c) for c in wron])).roots:
            va = _fiber_value(blk_a, restrictions, rho)
            vb = _fiber_value(blk_b, restrictions, rho)
            if va == 0 and vb == 0:
                return None  # probe hits a base point; decide downstream
            if va == 0 or vb == 0:
                continue  # the repeated root sits inside a block fiber
            found.add(va / vb)
    # a repeated root at the parametrization's infinity shows as an extra
    # degree drop past the one forced by the equal block degrees
    if len(wron) - 1 < degree_e - 2:
        la = Fraction(1)
        lb = Fraction(1)
        for j, m in blk_a:
            la *= Fraction(restrictions[j][-1]) ** m
        for j, m in blk_b:
            lb *= Fraction(restrictions[j][-1]) ** m
        found.add(la / lb)
    return sorted(found)


def _repeated_root_at(
    blocks: tuple[Sequence[tuple[int, int]], Sequence[tuple[int, int]]],
    restrictions: Sequence[tuple[int, ...]],
    lam: Fraction,
) -> bool:
    blk_a, blk_b = blocks
    va: tuple[int, ...] = (1,)
    vb: tuple[int, ...] = (1,)
    for j, m in blk_a:
        for _ in range(m):
            va = _conv(va, restrictions[j])
    for j, m in blk_b:
        for _ in range(m):
            vb = _conv(vb, restrictions[j])
    u = [lam.denominator * a - lam.numerator * b for a, b in zip(va, vb)]
    while u and u[-1] == 0:
        u.pop()
    if not u:
        return True
    poly = UniPoly([Fraction(c) for c in u])
    return poly.gcd(poly.derivative()).degree > 0


def _lines_concurrent(arr: Arrangement, support: Sequence[int]) -> bool:
    coeffs = []
    for j in support:
        if arr.components[j].degree != 1:
            return False
        form = arr.components[j].form
        coeffs.append(tuple(form.coefficient(e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))))
    if len(coeffs) < 3:
        return True
    (a1, b1, c1), (a2, b2, c2) = coeffs[0], coeffs[1]
    p = (b1 * c2 - c1 * b2, c1 * a2 - a1 * c2, a1 * b2 - b1 * a2)
    return all(a * p[0] + b * p[1] + c * p[2] == 0 for a, b, c in coeffs[2:])


# ---------------------------------------------------------------------------
# dedup and flags


def _span_key(pencil: Pencil) -> tuple:
    degree = pencil.degree
    rows = [pencil.P.coefficient_vector(degree), pencil.Q.coefficient_vector(degree)]
    rref, _ = fraction_rref([list(r) for r in rows])
    return tuple(tuple(row) for row in rref)


def _character_in_subtorus(subtorus: ExponentSubtorus, character: TorsionCharacter) -> bool:
    """Whether the torsion character is a torsion point of the subtorus."""
    order = character.order
    if order == 1:
        return True
    size = subtorus.size
    scaled = tuple(int(e.value * order) % order for e in character.exponents)
    cols = [list(col) for col in saturate_lattice(subtorus.columns(), size)]
    for j in range(size):
        unit = [0] * size
        unit[j] = order
        cols.append(unit)
    base = lattice_key(cols, size)
    return lattice_key(cols + [list(scaled)], size) == base


def _component_flags(
    arr: Arrangement, subtorus: ExponentSubtorus, torsion: TorsionCharacter
) -> tuple[list[str], Optional[str]]:
    plain = []
    translated = []
    for j in subtorus.zero_rows():
        if torsion.exponents[j].is_zero():
            plain.append(j)
        else:
            translated.append(j)
    flags: list[str] = []
    witness: Optional[str] = None
    if plain:
        flags.append("coordinate component")
    if translated:
        flags.append("translated coordinate component")
        witness = arr.labels[min(translated)]
    if not flags:
        flags.append("essential")
    return flags, witness


def _exceptional_note(dimension: int) -> str:
    note = "h1 exceeds the generic value at only finitely many characters"
    if dimension >= 2:
        note += "; the exceptions pull back from the quotient of the subtorus"
    return note


# ---------------------------------------------------------------------------
# building the catalog


def _local_record(arr: Arrangement, mp: MultiplePoint) -> ComponentRecord:
    k = mp.count
    rows = [[0] * (k - 1) for _ in range(arr.size)]
    for i, j in enumerate(mp.incident[:-1]):
        rows[j][i] = 1
    rows[mp.incident[-1]] = [-1] * (k - 1)
    subtorus = ExponentSubtorus(tuple(tuple(r) for r in rows))
    trivial = TorsionCharacter([0] * arr.size)
    flags, witness = _component_flags(arr, subtorus, trivial)
    flags.append("certified")
    return ComponentRecord(
        kind="local",
        dimension=k - 1,
        source=mp,
        subtorus=subtorus,
        torsion=trivial,
        flags=tuple(flags),
        witness=witness,
        expected_generic_h1=k - 2,
        exceptional_note=_exceptional_note(k - 1),
    )


def _untranslated_record(
    arr: Arrangement, cl: PencilClassification, subtorus: ExponentSubtorus
) -> ComponentRecord:
    trivial = TorsionCharacter([0] * arr.size)
    flags, witness = _component_flags(arr, subtorus, trivial)
    flags.append("certified")
    dimension = cl.k - 1
    return ComponentRecord(
        kind="global",
        dimension=dimension,
        source=cl,
        subtorus=subtorus,
        torsion=trivial,
        flags=tuple(flags),
        witness=witness,
        expected_generic_h1=dimension - 1,
        exceptional_note=_exceptional_note(dimension),
    )


def _translated_certification(
    arr: Arrangement, cl: PencilClassification, maximal: Optional[bool]
) -> str:
    if cl.conditional:
        return "candidate (special fiber list is conditional)"
    if cl.k >= 3:
        return "certified"
    if not (arr.is_line_arrangement() and arr.infinity_index is not None):
        return "candidate (no cup-product structure on this arrangement)"
    if any(sp.m_prime != 1 for sp in cl.special_points):
        return "candidate (a special fiber has m'(c) != 1)"
    if maximal is not True:
        return "candidate (pullback rays are not maximal isotropic)"
    # the m'(c) hypothesis is checked over C(f), the detected special fibers
    return "certified (m'(c) = 1 for all c in C(f))"


def _translated_records(
    arr: Arrangement, cl: PencilClassification, maximal: Optional[bool]
) -> list[ComponentRecord]:
    kernel = kernel_fstar(arr, cl)
    data = theta(arr, cl, kernel)
    tf = compute_Tf(data)
    if tf.group.is_trivial():
        return []
    subtorus = pullback_subtorus(arr, cl)
    certification = _translated_certification(arr, cl, maximal)
    out = []
    for chi in characters_of_Tf(tf):
        if all(c.is_zero() for c in chi):
            continue
        lifted = lift_character(arr, cl, tf, chi)
        rho = lifted.rho
        if _character_in_subtorus(subtorus, rho):
            continue  # not translated: the lift already sits on the subtorus
        flags, witness = _component_flags(arr, subtorus, rho)
        flags.append(certification)
        dimension = cl.k - 1
        out.append(
            ComponentRecord(
                kind="translated",
                dimension=dimension,
                source=cl,
                subtorus=subtorus,
                torsion=rho,
                flags=tuple(flags),
                witness=witness,
                expected_generic_h1=cl.k - 2 + epsilon_count(cl, rho),
                exceptional_note=_exceptional_note(dimension),
            )
        )
    return out


def _block_form(arr: Arrangement, block: Sequence[tuple[int, int]]) -> TernaryForm:
    form = TernaryForm.constant(1)
    for j, m in block:
        form = form * arr.components[j].form.power(m)
    return form


def _saturated_pair(arr: Arrangement, blocks) -> bool:
    cols = []
    for block in blocks:
        col = [0] * arr.size
        for j, m in block:
            col[j] = m
        cols.append(col)
    sat = saturate_lattice(cols, arr.size)
    return lattice_key(sat, arr.size) == lattice_key(cols, arr.size)


def build_catalog(
    arr: Arrangement,
    max_multiplicity: int = 2,
    max_blocks: int = 3,
    extra_points: Sequence[ProjPoint] = (),
) -> Catalog:
    """Assemble the component catalog of the arrangement.

    The partition caps bound the search for global components exactly as in
    `pencil_search`; raising them widens both the global stage and the pool
    of two-block pencils swept for translated components.  The translated
    sweep needs a designated infinity line; when the arrangement has none,
    the first line component is used and a warning records the choice.  The
    sweep finds translated components whose repeated fiber part meets a
    probe line rationally (every repeated line does); k = 2 rays that fail
    maximal isotropy are dropped when the cup structure exists.
    """
    warnings: list[str] = []

    # --- Step 1: arrange for an infinity line ---
    work = arr
    if arr.infinity_index is None:
        lines = arr.line_indices()
        if lines:
            work = arr.with_infinity(lines[0])
            warnings.append(
                f"no designated infinity line; torsion sweep uses {arr.labels[lines[0]]}"
            )
        else:
            work = None
            warnings.append("no line component; translated sweep skipped")
    base_arr = work if work is not None else arr

    # --- Step 2: local components from multiple points ---
    points = tuple(base_arr.extra_points) + tuple(extra_points)
    locals_: list[ComponentRecord] = []
    for mp in local_pencil_points(base_arr, points):
        if mp.yields_local_pencil:
            locals_.append(_local_record(base_arr, mp))
    known_keys = {rec.subtorus.saturated_key() for rec in locals_}

    # --- Step 3: global components from the partition search ---
    results = pencil_search(
        base_arr, max_multiplicity=max_multiplicity, max_blocks=max_blocks, min_blocks=3
    )
    globals_: list[ComponentRecord] = []
    searched_spans: set[tuple] = set()
    for res in results:
        searched_spans.add(_span_key(res.pencil))
        subtorus = pullback_subtorus(base_arr, res.classification)
        key = subtorus.saturated_key()
        if key in known_keys:
            continue  # the point pencil of a multiple point, already listed
        known_keys.add(key)
        globals_.append(_untranslated_record(base_arr, res.classification, subtorus))

    # --- Step 4: translated sweep over the found pencils ---
    translated: list[ComponentRecord] = []
    seen_classes: list[tuple[tuple, TorsionCharacter, ExponentSubtorus]] = []
    if work is not None:
        candidates: list[PencilClassification] = []
        for res in results:
            cl = detect_special_fibers(work, res.pencil, res.classification)
            candidates.append(cl)

        probes = _probe_lines(work)
        restrictions = [
            _integer_restrictions(work, q0, q1) for _, q0, q1 in probes
        ]
        survivor_spans: set[tuple] = set()
        for blk_a, blk_b in iter_block_pairs(work, max_multiplicity):
            if blk_a.degree == 1:
                continue  # every fiber of a line pencil is reduced
            support = sorted(blk_a.indices + blk_b.indices)
            if _lines_concurrent(work, support):
                continue  # composed with the point pencil: not connected
            blocks = (
                tuple(zip(blk_a.indices, blk_a.mults)),
                tuple(zip(blk_b.indices, blk_b.mults)),
            )
            params = _candidate_parameters(blocks, restrictions[0])
            if params is not None:
                if not params:
                    continue
                confirmed = [
                    lam for lam in params if _repeated_root_at(blocks, restrictions[1], lam)
                ]
                if not confirmed:
                    continue
            try:
                pencil = Pencil(_block_form(work, blocks[0]), _block_form(work, blocks[1]))
            except PencilError:
                continue
            span = _span_key(pencil)
            if span in searched_spans or span in survivor_spans:
                continue
            survivor_spans.add(span)
            if not _saturated_pair(work, blocks):
                continue  # the two fibers do not span the homology cokernel
            cl = classify(work, pencil)
            cl = detect_special_fibers(work, pencil, cl)
            candidates.append(cl)

        for cl in candidates:
            for w in cl.warnings:
                if w not in warnings:
                    warnings.append(w)
            maximal: Optional[bool] = None
            if work.is_line_arrangement():
                subspace = subspace_from_pencil(work, cl)
                maximal = subspace.maximal
                if cl.k == 2 and maximal is False:
                    continue
            for rec in _translated_records(work, cl, maximal):
                duplicate = False
                for key, rho, sub in seen_classes:
                    if key != rec.subtorus.saturated_key():
                        continue
                    diff = TorsionCharacter(
                        [a - b for a, b in zip(rec.torsion.exponents, rho.exponents)]
                    )
                    if _character_in_subtorus(sub, diff):
                        duplicate = True
                        break
                if duplicate:
                    continue
                seen_classes.append((rec.subtorus.saturated_key(), rec.torsion, rec.subtorus))
                translated.append(rec)

    # --- Step 5: cross-reference and deterministic order ---
    for rec in translated:
        if rec.dimension >= 2 and rec.subtorus.saturated_key() not in known_keys:
            known_keys.add(rec.subtorus.saturated_key())
            globals_.append(_untranslated_record(base_arr, rec.source, rec.subtorus))

    locals_.sort(key=lambda r: (r.source.point.sort_key(), r.source.degree))
    translated.sort(key=lambda r: (r.subtorus.saturated_key(), r.torsion.sort_key()))
    records = tuple(locals_ + globals_ + translated)
    return Catalog(arrangement=base_arr, records=records, warnings=tuple(warnings))
