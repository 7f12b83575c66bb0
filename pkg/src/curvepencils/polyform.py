"""Homogeneous polynomials in x, y, z over Q, and small projective geometry.

Forms are stored as monomial dictionaries and always kept homogeneous; the
text grammar is signed sums of terms ``c*x^a*y^b*z^c`` with rational
coefficients.  Division of one form by another is decided exactly by a
linear solve over the unknown cofactor coefficients, organized as repeated
leading-term elimination.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Sequence

from .exactalg import UniPoly, squarefree_multiplicity_profile

__all__ = [
    "PolyParseError",
    "TernaryForm",
    "BinaryForm",
    "ProjPoint",
    "P1Point",
    "ProjLine",
    "line_through",
    "intersect_lines",
    "exact_divide",
    "divisibility_multiplicity",
    "member_of_pencil_dividing",
    "rational_points_on_line",
    "binary_multiplicity_profile",
]

_VARS = ("x", "y", "z")


class PolyParseError(ValueError):
    """Raised when polynomial text violates the input grammar."""


def _monomial_key(exps: tuple[int, int, int]) -> tuple[int, int, int]:
    # descending lex with x > y > z
    return (-exps[0], -exps[1], -exps[2])


class TernaryForm:
    """A homogeneous polynomial in x, y, z with Fraction coefficients."""

    __slots__ = ("terms", "degree")

    def __init__(self, terms: dict[tuple[int, int, int], Fraction]) -> None:
        clean = {k: Fraction(v) for k, v in terms.items() if v != 0}
        degs = {sum(k) for k in clean}
        if len(degs) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degs)}")
        self.terms = clean
        self.degree = degs.pop() if degs else -1

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "TernaryForm":
        return cls({})

    @classmethod
    def constant(cls, c: Fraction | int) -> "TernaryForm":
        return cls({(0, 0, 0): Fraction(c)})

    @classmethod
    def variable(cls, name: str) -> "TernaryForm":
        if name not in _VARS:
            raise ValueError(f"unknown variable {name!r}")
        e = [0, 0, 0]
        e[_VARS.index(name)] = 1
        return cls({tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, exps: tuple[int, int, int], c: Fraction | int = 1) -> "TernaryForm":
        return cls({exps: Fraction(c)})

    @classmethod
    def parse(cls, text: str) -> "TernaryForm":
        """Parse the grammar: signed sums of terms ``c*x^a*y^b*z^c``."""
        s = text.replace(" ", "").replace("\t", "")
        if not s:
            raise PolyParseError("empty polynomial")
        # split into signed chunks
        chunks: list[str] = []
        cur = ""
        for i, ch in enumerate(s):
            if ch in "+-" and i > 0 and s[i - 1] not in "+-/^*":
                chunks.append(cur)
                cur = ch
            else:
                cur += ch
        chunks.append(cur)
        terms: dict[tuple[int, int, int], Fraction] = {}
        for chunk in chunks:
            if not chunk or chunk in "+-":
                raise PolyParseError(f"empty term in {text!r}")
            coeff, exps = cls._parse_term(chunk)
            key = tuple(exps)
            terms[key] = terms.get(key, Fraction(0)) + coeff
        try:
            return cls(terms)
        except ValueError as exc:
            raise PolyParseError(f"{exc} in {text!r}") from None

    @staticmethod
    def _parse_term(chunk: str) -> tuple[Fraction, list[int]]:
        sign = 1
        while chunk and chunk[0] in "+-":
            if chunk[0] == "-":
                sign = -sign
            chunk = chunk[1:]
        if not chunk:
            raise PolyParseError("sign with no term")
        coeff = Fraction(sign)
        exps = [0, 0, 0]
        for factor in chunk.split("*"):
            if not factor:
                raise PolyParseError(f"empty factor in term {chunk!r}")
            if factor[0] in _VARS:
                var = factor[0]
                rest = factor[1:]
                if rest == "":
                    power = 1
                elif rest.startswith("^"):
                    if not rest[1:].isdigit():
                        raise PolyParseError(f"bad exponent in {factor!r}")
                    power = int(rest[1:])
                else:
                    raise PolyParseError(f"bad factor {factor!r}")
                exps[_VARS.index(var)] += power
            else:
                try:
                    coeff *= Fraction(factor)
                except (ValueError, ZeroDivisionError):
                    raise PolyParseError(f"bad coefficient {factor!r}") from None
        return coeff, exps

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return self.degree <= 0

    def sorted_terms(self) -> list[tuple[tuple[int, int, int], Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: _monomial_key(kv[0]))

    def coefficient(self, exps: tuple[int, int, int]) -> Fraction:
        return self.terms.get(exps, Fraction(0))

    def leading_term(self) -> tuple[tuple[int, int, int], Fraction]:
        if not self.terms:
            raise ValueError("zero form has no leading term")
        key = min(self.terms, key=_monomial_key)
        return key, self.terms[key]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "TernaryForm") -> "TernaryForm":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return TernaryForm(out)

    def __sub__(self, other: "TernaryForm") -> "TernaryForm":
        return self + (-other)

    def __neg__(self) -> "TernaryForm":
        return TernaryForm({k: -v for k, v in self.terms.items()})

    def __mul__(self, other: "TernaryForm") -> "TernaryForm":
        out: dict[tuple[int, int, int], Fraction] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                out[k] = out.get(k, Fraction(0)) + v1 * v2
        return TernaryForm(out)

    def scale(self, c: Fraction | int) -> "TernaryForm":
        c = Fraction(c)
        if c == 0:
            return TernaryForm.zero()
        return TernaryForm({k: v * c for k, v in self.terms.items()})

    def power(self, n: int) -> "TernaryForm":
        out = TernaryForm.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def evaluate(self, point: Sequence[Fraction | int]) -> Fraction:
        px, py, pz = (Fraction(c) for c in point)
        total = Fraction(0)
        for (a, b, c), coef in self.terms.items():
            total += coef * px**a * py**b * pz**c
        return total

    # -- normalization -------------------------------------------------------

    def primitive(self) -> "TernaryForm":
        """Canonical scalar multiple: integer, content 1, leading sign positive."""
        if self.is_zero():
            return self
        den = 1
        for v in self.terms.values():
            den = den * v.denominator // gcd(den, v.denominator)
        nums = [int(v * den) for v in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, abs(n))
        scale = Fraction(den, g)
        if self.leading_term()[1] < 0:
            scale = -scale
        return self.scale(scale)

    def proportional_to(self, other: "TernaryForm") -> bool:
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self.primitive() == other.primitive()

    # -- linear algebra views -------------------------------------------------

    @staticmethod
    def monomials_of_degree(d: int) -> list[tuple[int, int, int]]:
        out = [
            (a, b, d - a - b)
            for a in range(d, -1, -1)
            for b in range(d - a, -1, -1)
        ]
        return sorted(out, key=_monomial_key)

    def coefficient_vector(self, degree: int | None = None) -> tuple[Fraction, ...]:
        d = self.degree if degree is None else degree
        if not self.is_zero() and d != self.degree:
            raise ValueError("degree mismatch")
        return tuple(self.coefficient(m) for m in self.monomials_of_degree(d))

    # -- restriction ----------------------------------------------------------

    def restrict(self, line: "ProjLine") -> "BinaryForm":
        """Restriction to the line, in the parameters of its base points."""
        p, q = line.span
        if self.is_zero():
            return BinaryForm(())
        d = self.degree
        out = [Fraction(0)] * (d + 1)
        # expand prod (p_i s + q_i t)^e_i via binary-form multiplication
        for (a, b, c), coef in self.terms.items():
            factor = BinaryForm((coef,))
            for e, i in ((a, 0), (b, 1), (c, 2)):
                lin = BinaryForm((Fraction(p[i]), Fraction(q[i])))
                for _ in range(e):
                    factor = factor.mul(lin)
            for k, v in enumerate(factor.coeffs):
                out[k] += v
        return BinaryForm(out)

    # -- dunder ----------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TernaryForm) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"TernaryForm.parse({str(self)!r})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts: list[str] = []
        for exps, coef in self.sorted_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}"
                for v, e in zip(_VARS, exps)
                if e > 0
            )
            mag = abs(coef)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(body if coef > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coef > 0 else f"- {body}")
        return " ".join(parts)


class BinaryForm:
    """A homogeneous binary form in s, t; coeffs[i] multiplies s^(d-i) t^i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int]) -> None:
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @property
    def formal_degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def mul(self, other: "BinaryForm") -> "BinaryForm":
        if not self.coeffs or not other.coeffs:
            return BinaryForm(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return BinaryForm(out)

    def dehomogenized(self) -> UniPoly:
        """The polynomial f(1, t); degree drop records a root at t = infinity."""
        return UniPoly(self.coeffs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BinaryForm) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"BinaryForm({[str(c) for c in self.coeffs]})"


def binary_multiplicity_profile(bf: BinaryForm) -> tuple[tuple[int, int], ...]:
    """Multiset of (multiplicity, degree) of the distinct factors of a binary form.

    The root at t = infinity (a power of s) is folded into the profile, so
    the total weighted degree always equals the formal degree.
    """
    if bf.is_zero():
        raise ValueError("zero binary form has no profile")
    poly = bf.dehomogenized()
    drop = bf.formal_degree - poly.degree
    entries = list(squarefree_multiplicity_profile(poly)) if poly.degree >= 1 else []
    if drop:
        entries.append((drop, 1))
    return tuple(sorted(entries))


# ---------------------------------------------------------------------------
# projective points and lines


def _normalize_coords(coords: Sequence[Fraction | int]) -> tuple[int, ...]:
    fracs = [Fraction(c) for c in coords]
    if all(c == 0 for c in fracs):
        raise ValueError("projective coordinates cannot all vanish")
    den = 1
    for c in fracs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return tuple(ints)


class ProjPoint:
    """A point of the projective plane with primitive integer coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[Fraction | int]) -> None:
        if len(coords) != 3:
            raise ValueError("plane points have three coordinates")
        self.coords = _normalize_coords(coords)

    def sort_key(self) -> tuple[int, ...]:
        return self.coords

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProjPoint) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(("ProjPoint", self.coords))

    def __lt__(self, other: "ProjPoint") -> bool:
        return self.coords < other.coords

    def __repr__(self) -> str:
        return f"ProjPoint({self.coords!r})"

    def __str__(self) -> str:
        return "(" + ":".join(str(c) for c in self.coords) + ")"


class P1Point:
    """A point of the projective line, written (b0 : b1)."""

    __slots__ = ("coords",)

    def __init__(self, b0: Fraction | int, b1: Fraction | int) -> None:
        self.coords = _normalize_coords((b0, b1))

    def sort_key(self) -> tuple[int, ...]:
        return self.coords

    def __eq__(self, other: object) -> bool:
        return isinstance(other, P1Point) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(("P1Point", self.coords))

    def __lt__(self, other: "P1Point") -> bool:
        return self.coords < other.coords

    def __repr__(self) -> str:
        return f"P1Point{self.coords!r}"

    def __str__(self) -> str:
        return f"({self.coords[0]}:{self.coords[1]})"


class ProjLine:
    """A line in the plane, as a linear form plus a rational parametrization."""

    __slots__ = ("form", "span")

    def __init__(self, form: TernaryForm) -> None:
        if form.degree != 1:
            raise ValueError("a line needs a degree-1 form")
        self.form = form.primitive()
        self.span = self._two_points()

    @classmethod
    def from_coefficients(cls, a: int, b: int, c: int) -> "ProjLine":
        return cls(
            TernaryForm({(1, 0, 0): Fraction(a), (0, 1, 0): Fraction(b), (0, 0, 1): Fraction(c)})
        )

    def _two_points(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        a = [self.form.coefficient(e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
        candidates = []
        # cross products of the coefficient vector with the standard basis
        for i in range(3):
            e = [0, 0, 0]
            e[i] = 1
            v = (
                a[1] * e[2] - a[2] * e[1],
                a[2] * e[0] - a[0] * e[2],
                a[0] * e[1] - a[1] * e[0],
            )
            if any(c != 0 for c in v):
                candidates.append(_normalize_coords(v))
        uniq: list[tuple[int, ...]] = []
        for c in candidates:
            if c not in uniq:
                uniq.append(c)
        return uniq[0], uniq[1]

    def point_at(self, s: Fraction | int, t: Fraction | int) -> ProjPoint:
        p, q = self.span
        s, t = Fraction(s), Fraction(t)
        return ProjPoint(tuple(s * a + t * b for a, b in zip(p, q)))

    def rational_points(self, count: int) -> Iterator[ProjPoint]:
        """Distinct rational points, walking the parametrization."""
        seen: set[ProjPoint] = set()
        for s, t in itertools.chain([(1, 0), (0, 1)], ((1, k) for k in itertools.count(1))):
            pt = self.point_at(s, t)
            if pt not in seen:
                seen.add(pt)
                yield pt
                if len(seen) >= count:
                    return

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProjLine) and self.form == other.form

    def __hash__(self) -> int:
        return hash(("ProjLine", self.form))

    def __repr__(self) -> str:
        return f"ProjLine({self.form!r})"


def line_through(p: ProjPoint, q: ProjPoint) -> ProjLine:
    a, b = p.coords, q.coords
    v = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    if all(c == 0 for c in v):
        raise ValueError("coincident points span no line")
    return ProjLine.from_coefficients(*v)


def intersect_lines(l1: ProjLine, l2: ProjLine) -> ProjPoint:
    a = [int(l1.form.coefficient(e)) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    b = [int(l2.form.coefficient(e)) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    v = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    if all(c == 0 for c in v):
        raise ValueError("coincident lines")
    return ProjPoint(v)


def rational_points_on_line(form: TernaryForm, count: int) -> list[ProjPoint]:
    return list(ProjLine(form).rational_points(count))


# ---------------------------------------------------------------------------
# exact division


def exact_divide(f: TernaryForm, g: TernaryForm) -> TernaryForm | None:
    """The cofactor h with f = g * h, or None when g does not divide f.

    Solves the linear system on the unknown coefficients of h by repeated
    leading-term elimination; any step without a matching quotient monomial
    certifies a nonzero remainder.
    """
    if g.is_zero():
        raise ZeroDivisionError("division by the zero form")
    if f.is_zero():
        return TernaryForm.zero()
    if f.degree < g.degree:
        return None
    g_lead, g_coef = g.leading_term()
    work = f
    quotient: dict[tuple[int, int, int], Fraction] = {}
    while not work.is_zero():
        w_lead, w_coef = work.leading_term()
        diff = tuple(a - b for a, b in zip(w_lead, g_lead))
        if any(e < 0 for e in diff):
            return None
        c = w_coef / g_coef
        quotient[diff] = quotient.get(diff, Fraction(0)) + c
        work = work - TernaryForm.monomial(diff, c) * g
    return TernaryForm(quotient)


def divisibility_multiplicity(f: TernaryForm, g: TernaryForm) -> int:
    """Largest e with g^e dividing f."""
    if g.is_constant():
        raise ValueError("multiplicity against a constant is undefined")
    e = 0
    work = f
    while not work.is_zero():
        nxt = exact_divide(work, g)
        if nxt is None:
            break
        work = nxt
        e += 1
    return e


def member_of_pencil_dividing(
    fj: TernaryForm, P: TernaryForm, Q: TernaryForm
) -> tuple[P1Point, int] | None:
    """The fiber of span(P, Q) divisible by fj, with the multiplicity.

    The fiber over (b0 : b1) is b1*P - b0*Q.  Returns None when no member is
    divisible.  P and Q must be independent forms of equal degree.
    """
    if P.is_zero() or Q.is_zero() or P.degree != Q.degree:
        raise ValueError("pencil generators must be nonzero of equal degree")
    if P.proportional_to(Q):
        raise ValueError("degenerate pencil: proportional generators")
    if fj.is_constant():
        raise ValueError("members are nonconstant forms")
    if fj.degree > P.degree:
        return None

    if fj.degree == 1:
        return _line_member(fj, P, Q)

    # joint linear solve: b1*P - b0*Q = fj * h over unknowns (b1, b0, h)
    D = P.degree
    cod = D - fj.degree
    monos = TernaryForm.monomials_of_degree(cod)
    target = TernaryForm.monomials_of_degree(D)
    index = {m: i for i, m in enumerate(target)}
    cols: list[list[Fraction]] = []
    cols.append(list(P.coefficient_vector(D)))
    cols.append([-c for c in Q.coefficient_vector(D)])
    for m in monos:
        prod = TernaryForm.monomial(m) * fj
        col = [Fraction(0)] * len(target)
        for k, v in prod.terms.items():
            col[index[k]] = -v
        cols.append(col)
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(target))]
    from .exactalg import fraction_kernel

    kernel = fraction_kernel(rows, len(cols))
    for vec in kernel:
        b1, b0 = vec[0], vec[1]
        if b1 == 0 and b0 == 0:
            continue
        b = P1Point(b0, b1)
        fiber = P.scale(b.coords[1]) - Q.scale(b.coords[0])
        e = divisibility_multiplicity(fiber, fj)
        if e >= 1:
            return b, e
    return None


def _line_member(fj: TernaryForm, P: TernaryForm, Q: TernaryForm) -> tuple[P1Point, int] | None:
    # two points of the line away from the base locus pin the only candidate
    line = ProjLine(fj)
    votes: list[P1Point] = []
    # the base locus is finite, so a short walk always finds two good points
    for pt in line.rational_points(80):
        pv, qv = P.evaluate(pt.coords), Q.evaluate(pt.coords)
        if pv == 0 and qv == 0:
            continue  # base point, uninformative
        votes.append(P1Point(pv, qv))
        if len(votes) == 2:
            break
    if len(votes) < 2 or votes[0] != votes[1]:
        return None
    b = votes[0]
    fiber = P.scale(b.coords[1]) - Q.scale(b.coords[0])
    e = divisibility_multiplicity(fiber, fj)
    return (b, e) if e >= 1 else None
