"""Exact arithmetic kernels shared by every other module.

Integer lattices (Hermite and Smith forms with transform matrices), finite
abelian groups presented by invariant factors, rationals modulo 1, rational
linear algebra, and dense univariate polynomials over Q.  No floating point
enters any code path.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

__all__ = [
    "QmodZ",
    "IntMatrix",
    "SmithDecomposition",
    "smith_normal_form",
    "integer_kernel_basis",
    "integer_rank",
    "integer_determinant",
    "hermite_column_form",
    "lattice_key",
    "saturate_lattice",
    "FinAbelianGroup",
    "product_relation_lattice",
    "UniPoly",
    "yun_squarefree",
    "squarefree_multiplicity_profile",
    "RationalRoots",
    "rational_roots",
    "resultant",
    "fraction_matrix_determinant",
    "fraction_rref",
    "fraction_kernel",
    "solve_fraction_system",
    "lagrange_interpolate",
]


# ---------------------------------------------------------------------------
# rationals modulo 1


class QmodZ:
    """A rational residue modulo 1, stored in [0, 1).

    These are exponents of unit-circle character values: the residue p/q
    stands for the value e^(2*pi*i*p/q).
    """

    __slots__ = ("value",)

    def __init__(self, value: Fraction | int | str = 0) -> None:
        self.value = Fraction(value) % 1

    @property
    def order(self) -> int:
        """Smallest n >= 1 with n * self == 0."""
        return self.value.denominator

    def is_zero(self) -> bool:
        return self.value == 0

    def __add__(self, other: "QmodZ") -> "QmodZ":
        if not isinstance(other, QmodZ):
            return NotImplemented
        return QmodZ(self.value + other.value)

    def __sub__(self, other: "QmodZ") -> "QmodZ":
        if not isinstance(other, QmodZ):
            return NotImplemented
        return QmodZ(self.value - other.value)

    def __neg__(self) -> "QmodZ":
        return QmodZ(-self.value)

    def __mul__(self, n: int) -> "QmodZ":
        if not isinstance(n, int):
            return NotImplemented
        return QmodZ(self.value * n)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QmodZ) and self.value == other.value

    def __hash__(self) -> int:
        return hash(("QmodZ", self.value))

    def __lt__(self, other: "QmodZ") -> bool:
        return self.value < other.value

    def __repr__(self) -> str:
        return f"QmodZ({self.value})"

    def __str__(self) -> str:
        return str(self.value)

    def character_string(self) -> str:
        """Render the unit-circle value: ``1``, ``-1``, or ``e(p/q)``."""
        if self.value == 0:
            return "1"
        if self.value == Fraction(1, 2):
            return "-1"
        return f"e({self.value})"


# ---------------------------------------------------------------------------
# integer matrices


class IntMatrix:
    """Immutable dense matrix over the integers."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable[int]]) -> None:
        data = tuple(tuple(int(e) for e in row) for row in rows)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ValueError("ragged rows")
        self.rows = data

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int | None = None) -> "IntMatrix":
        cols = [tuple(int(e) for e in c) for c in columns]
        if not cols:
            if nrows is None:
                raise ValueError("empty column list needs an explicit row count")
            return cls([[] for _ in range(nrows)])
        n = len(cols[0])
        if nrows is not None and nrows != n:
            raise ValueError("row count mismatch")
        return cls([[c[i] for c in cols] for i in range(n)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.rows[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)])

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        ot = other.transpose().rows
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in ot] for row in self.rows]
        )

    def mul_vector(self, vec: Sequence[int]) -> tuple[int, ...]:
        if self.ncols != len(vec):
            raise ValueError("shape mismatch")
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.rows)

    def is_zero(self) -> bool:
        return all(e == 0 for row in self.rows for e in row)

    def to_lists(self) -> list[list[int]]:
        return [list(row) for row in self.rows]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"IntMatrix({self.to_lists()!r})"


class SmithDecomposition(NamedTuple):
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        n = min(self.D.nrows, self.D.ncols)
        return tuple(self.D.entry(i, i) for i in range(n))


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Decompose U * A * V = D with U, V unimodular.

    D is diagonal with nonnegative entries forming a divisibility chain
    d1 | d2 | ... ; trailing entries may be zero.  Pivots are chosen smallest
    in absolute value, which keeps intermediate entries modest.
    """
    m, n = A.nrows, A.ncols
    M = [list(row) for row in A.rows]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        M[i], M[k] = M[k], M[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for row in M:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        M[dst] = [a + q * b for a, b in zip(M[dst], M[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in M:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        # --- Step 1: locate the smallest nonzero entry of the trailing block ---
        best = None
        for i in range(t, m):
            for j in range(t, n):
                e = M[i][j]
                if e != 0 and (best is None or abs(e) < abs(best[2])):
                    best = (i, j, e)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])

        # --- Step 2: clear row and column t by Euclidean steps ---
        while True:
            dirty = False
            for i in range(t + 1, m):
                if M[i][t] == 0:
                    continue
                q = M[i][t] // M[t][t]
                add_row(i, t, -q)
                if M[i][t] != 0:
                    swap_rows(i, t)
                    dirty = True
            for j in range(t + 1, n):
                if M[t][j] == 0:
                    continue
                q = M[t][j] // M[t][t]
                add_col(j, t, -q)
                if M[t][j] != 0:
                    swap_cols(j, t)
                    dirty = True
            if not dirty and all(M[i][t] == 0 for i in range(t + 1, m)) and all(
                M[t][j] == 0 for j in range(t + 1, n)
            ):
                break

        # --- Step 3: force divisibility of the trailing block by the pivot ---
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if M[i][j] % M[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            add_row(t, offender, 1)
            continue  # redo elimination at the same t

        if M[t][t] < 0:
            M[t] = [-e for e in M[t]]
            U[t] = [-e for e in U[t]]
        t += 1

    Um, Dm, Vm = IntMatrix(U), IntMatrix(M), IntMatrix(V)
    assert Um.mul(A).mul(Vm) == Dm, "smith decomposition broke"
    return SmithDecomposition(Um, Dm, Vm)


def integer_determinant(A: IntMatrix) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n = A.nrows
    if n != A.ncols:
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    M = [list(row) for row in A.rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def integer_rank(A: IntMatrix) -> int:
    return sum(1 for d in smith_normal_form(A).invariant_factors if d != 0)


def integer_kernel_basis(A: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel {x : A x = 0}, as matrix columns.

    The basis is put in column Hermite form, so equal kernels produce equal
    matrices regardless of reduction history.
    """
    snf = smith_normal_form(A)
    cols = []
    for j in range(A.ncols):
        d = snf.D.entry(j, j) if j < min(A.nrows, A.ncols) else 0
        if d == 0:
            cols.append(snf.V.column(j))
    reduced = hermite_column_form(cols, A.ncols)
    return IntMatrix.from_columns(reduced, A.ncols)


def hermite_column_form(columns: Sequence[Sequence[int]], nrows: int) -> list[tuple[int, ...]]:
    """Canonical column Hermite form of the lattice spanned by the columns.

    Pivots are positive and sit on strictly increasing rows; entries of
    earlier columns in a pivot row are reduced into [0, pivot).  Zero columns
    are dropped, so the result is a canonical basis usable as a dict key.
    """
    active = [list(c) for c in columns if any(e != 0 for e in c)]
    placed: list[list[int]] = []
    pivot_rows: list[int] = []
    for r in range(nrows):
        live = [c for c in active if c[r] != 0]
        if not live:
            continue
        # gcd-combine all columns with a nonzero entry at row r into one
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[r]))
            small = live[0]
            for c in live[1:]:
                q = c[r] // small[r]
                for i in range(nrows):
                    c[i] -= q * small[i]
            live = [c for c in active if c[r] != 0]
        piv = live[0]
        active.remove(piv)
        if piv[r] < 0:
            piv = [-e for e in piv]
        placed.append(piv)
        pivot_rows.append(r)
    # normalize entries above later pivots
    for l in range(len(placed)):
        r = pivot_rows[l]
        for j in range(l):
            q = placed[j][r] // placed[l][r]
            if q:
                placed[j] = [a - q * b for a, b in zip(placed[j], placed[l])]
    return [tuple(c) for c in placed]


def lattice_key(columns: Sequence[Sequence[int]], nrows: int) -> tuple:
    """Hashable canonical key for the lattice spanned by the columns."""
    return tuple(hermite_column_form(columns, nrows))


def saturate_lattice(columns: Sequence[Sequence[int]], nrows: int) -> list[tuple[int, ...]]:
    """Saturation: all integer vectors some multiple of which lies in the span."""
    cols = [c for c in columns if any(e != 0 for e in c)]
    if not cols:
        return []
    C = IntMatrix.from_columns(cols, nrows)
    relations = integer_kernel_basis(C.transpose())
    if relations.ncols == 0:
        return [tuple(c) for c in IntMatrix.identity(nrows).columns()]
    sat = integer_kernel_basis(relations.transpose())
    return sat.columns()


# ---------------------------------------------------------------------------
# finite abelian groups


class FinAbelianGroup:
    """Finite abelian group given by invariant factors d1 | d2 | ..., each >= 2."""

    __slots__ = ("invariant_factors",)

    def __init__(self, invariant_factors: Iterable[int] = ()) -> None:
        factors = tuple(int(d) for d in invariant_factors)
        for d in factors:
            if d < 2:
                raise ValueError("invariant factors must be >= 2")
        for a, b in zip(factors, factors[1:]):
            if b % a != 0:
                raise ValueError("invariant factors must form a divisibility chain")
        self.invariant_factors = factors

    @classmethod
    def trivial(cls) -> "FinAbelianGroup":
        return cls(())

    @classmethod
    def from_moduli(cls, moduli: Iterable[int]) -> "FinAbelianGroup":
        """Structure of the direct sum of Z/m over the given moduli."""
        ms = [int(m) for m in moduli if int(m) != 1]
        if any(m < 1 for m in ms):
            raise ValueError("moduli must be >= 1")
        if not ms:
            return cls.trivial()
        diag = IntMatrix([[ms[i] if i == j else 0 for j in range(len(ms))] for i in range(len(ms))])
        snf = smith_normal_form(diag)
        return cls(d for d in snf.invariant_factors if d > 1)

    @classmethod
    def quotient_structure(cls, relations: IntMatrix) -> "FinAbelianGroup":
        """Structure of Z^n / (column span), which must be finite."""
        n = relations.nrows
        snf = smith_normal_form(relations)
        factors = [snf.D.entry(i, i) for i in range(min(n, relations.ncols))]
        if len(factors) < n or any(d == 0 for d in factors):
            raise ValueError("quotient is infinite")
        return cls(d for d in factors if d > 1)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def characters(self) -> Iterator[tuple[QmodZ, ...]]:
        """All characters, as exponent tuples on the invariant-factor generators."""
        ranges = [
            [QmodZ(Fraction(a, d)) for a in range(d)] for d in self.invariant_factors
        ]
        return (tuple(combo) for combo in itertools.product(*ranges))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinAbelianGroup) and self.invariant_factors == other.invariant_factors

    def __hash__(self) -> int:
        return hash(("FinAbelianGroup", self.invariant_factors))

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "trivial"
        return " x ".join(f"Z/{d}" for d in self.invariant_factors)

    def __repr__(self) -> str:
        return f"FinAbelianGroup({list(self.invariant_factors)!r})"


def product_relation_lattice(moduli: Sequence[int], generators: Sequence[Sequence[int]]) -> IntMatrix:
    """Relation lattice of the listed generators inside the product of Z/m.

    Returns an s x s matrix whose columns span {x : sum x_i g_i = 0}, where s
    is the number of generators.  The quotient of Z^s by these columns is the
    subgroup the generators span.
    """
    s = len(generators)
    c = len(moduli)
    if s == 0:
        return IntMatrix([[]])
    rows = []
    for i in range(c):
        row = [int(g[i]) for g in generators] + [moduli[k] if k == i else 0 for k in range(c)]
        rows.append(row)
    kernel = integer_kernel_basis(IntMatrix(rows))
    proj = [kernel.column(j)[:s] for j in range(kernel.ncols)]
    basis = hermite_column_form(proj, s)
    return IntMatrix.from_columns(basis, s)


# ---------------------------------------------------------------------------
# rational linear algebra


def fraction_rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot column list."""
    M = [[Fraction(e) for e in row] for row in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for j in range(ncols):
        pivot_row = None
        for i in range(r, len(M)):
            if M[i][j] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        M[r], M[pivot_row] = M[pivot_row], M[r]
        pv = M[r][j]
        M[r] = [e / pv for e in M[r]]
        for i in range(len(M)):
            if i != r and M[i][j] != 0:
                f = M[i][j]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(j)
        r += 1
        if r == len(M):
            break
    return M, pivots


def fraction_kernel(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of the rational kernel of the row system."""
    rref, pivots = fraction_rref(rows)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -rref[r][f]
        basis.append(tuple(vec))
    return basis


def solve_fraction_system(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> tuple[Fraction, ...] | None:
    """One rational solution of rows * x = rhs, or None if inconsistent.

    Free coordinates are set to zero.
    """
    if not rows:
        return ()
    ncols = len(rows[0])
    aug = [list(row) + [Fraction(r)] for row, r in zip(rows, rhs)]
    rref, pivots = fraction_rref(aug)
    for r in range(len(rref)):
        if all(e == 0 for e in rref[r][:ncols]) and rref[r][ncols] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for r, p in enumerate(pivots):
        if p == ncols:
            return None
        sol[p] = rref[r][ncols]
    return tuple(sol)


def fraction_matrix_determinant(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant over Q by Gaussian elimination."""
    n = len(rows)
    M = [[Fraction(e) for e in row] for row in rows]
    if any(len(row) != n for row in M):
        raise ValueError("determinant needs a square matrix")
    det = Fraction(1)
    for k in range(n):
        pivot_row = None
        for i in range(k, n):
            if M[i][k] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            M[k], M[pivot_row] = M[pivot_row], M[k]
            det = -det
        det *= M[k][k]
        inv = 1 / M[k][k]
        for i in range(k + 1, n):
            if M[i][k] != 0:
                f = M[i][k] * inv
                M[i] = [a - f * b for a, b in zip(M[i], M[k])]
    return det


# ---------------------------------------------------------------------------
# univariate polynomials over Q


class UniPoly:
    """Dense univariate polynomial over Fraction, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int | str] = ()) -> None:
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "UniPoly":
        return cls(())

    @classmethod
    def constant(cls, c: Fraction | int) -> "UniPoly":
        return cls((c,))

    @classmethod
    def variable(cls) -> "UniPoly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(self.coefficient(k) + other.coefficient(k) for k in range(n))

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(self.coefficient(k) - other.coefficient(k) for k in range(n))

    def __neg__(self) -> "UniPoly":
        return UniPoly(-c for c in self.coeffs)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if self.is_zero() or other.is_zero():
            return UniPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    def scale(self, c: Fraction | int) -> "UniPoly":
        c = Fraction(c)
        return UniPoly(a * c for a in self.coeffs)

    def shift_up(self, k: int) -> "UniPoly":
        """Multiply by t^k."""
        if self.is_zero():
            return self
        return UniPoly((Fraction(0),) * k + self.coeffs)

    def evaluate(self, x: Fraction | int) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly(k * c for k, c in enumerate(self.coeffs) if k >= 1)

    def divide(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        """Quotient and remainder."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        d = other.degree
        lead = other.leading
        for k in range(len(rem) - 1, d - 1, -1):
            if rem[k] == 0:
                continue
            f = rem[k] / lead
            q[k - d] = f
            for j, b in enumerate(other.coeffs):
                rem[k - d + j] -= f * b
        return UniPoly(q), UniPoly(rem)

    def exact_divide(self, other: "UniPoly") -> "UniPoly":
        q, r = self.divide(other)
        if not r.is_zero():
            raise ValueError("division is not exact")
        return q

    def gcd(self, other: "UniPoly") -> "UniPoly":
        """Monic greatest common divisor."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divide(b)[1]
        if a.is_zero():
            return a
        return a.scale(1 / a.leading)

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(1 / self.leading)

    def primitive_integer(self) -> tuple[Fraction, tuple[int, ...]]:
        """Factor self = scale * (primitive integer polynomial)."""
        if self.is_zero():
            return Fraction(0), ()
        from math import gcd as _g

        den = 1
        for c in self.coeffs:
            den = den * c.denominator // _g(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = _g(g, abs(v))
        sign = -1 if ints[-1] < 0 else 1
        g *= sign
        return Fraction(g, den), tuple(v // g for v in ints)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(("UniPoly", self.coeffs))

    def __repr__(self) -> str:
        return f"UniPoly({[str(c) for c in self.coeffs]})"


def yun_squarefree(f: UniPoly) -> list[tuple[UniPoly, int]]:
    """Squarefree decomposition f = c * prod a_i^i by Yun's algorithm.

    Returns the nonconstant monic factors a_i with their multiplicities i.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no squarefree decomposition")
    f = f.monic()
    if f.degree < 1:
        return []
    df = f.derivative()
    a = f.gcd(df)
    b = f.exact_divide(a)
    c = df.exact_divide(a)
    d = c - b.derivative()
    out: list[tuple[UniPoly, int]] = []
    i = 1
    while b.degree > 0:
        ai = b.gcd(d)
        if ai.degree > 0:
            out.append((ai, i))
        b = b.exact_divide(ai)
        c = d.exact_divide(ai)
        d = c - b.derivative()
        i += 1
    return out


def squarefree_multiplicity_profile(f: UniPoly) -> tuple[tuple[int, int], ...]:
    """Multiset of (multiplicity, degree) over the squarefree decomposition.

    Sorted ascending, so equal profiles compare equal as tuples.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no multiplicity profile")
    return tuple(sorted((mult, part.degree) for part, mult in yun_squarefree(f)))


class RationalRoots(NamedTuple):
    roots: tuple[tuple[Fraction, int], ...]
    remaining_degree: int


# -- integer factorization helpers for the rational root test ---------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    from math import gcd as _g

    if n % 2 == 0:
        return 2
    x0, c = 2, 1
    while True:
        x, y, d = x0, x0, 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = _g(abs(x - y), n)
        if d != n:
            return d
        x0 += 1
        c += 2


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    if n < 0:
        n = -n
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in _factor(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def rational_roots(f: UniPoly) -> RationalRoots:
    """All rational roots with multiplicities, plus the leftover degree.

    ``remaining_degree`` counts the rootless factor; it is zero exactly when
    f splits over Q into linear factors.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has every root")
    roots: list[tuple[Fraction, int]] = []
    g = f
    k = 0
    while g.coefficient(0) == 0 and g.degree >= 1:
        g = UniPoly(g.coeffs[1:])
        k += 1
    if k:
        roots.append((Fraction(0), k))
    if g.degree >= 1:
        _, ints = g.primitive_integer()
        a0, an = abs(ints[0]), abs(ints[-1])
        g1 = sum(ints)
        gm1 = sum(c if i % 2 == 0 else -c for i, c in enumerate(ints))
        for p in _divisors(a0):
            for q in _divisors(an):
                from math import gcd as _g

                if _g(p, q) != 1:
                    continue
                for sign in (1, -1):
                    # cheap screens: (t - r) | g forces (q - s*p) | g(1), (q + s*p) | g(-1)
                    if g1 != 0 and (q - sign * p) != 0 and g1 % (q - sign * p) != 0:
                        continue
                    if gm1 != 0 and (q + sign * p) != 0 and gm1 % (q + sign * p) != 0:
                        continue
                    r = Fraction(sign * p, q)
                    if g.evaluate(r) != 0:
                        continue
                    lin = UniPoly((-r, 1))
                    mult = 0
                    while True:
                        quo, rem = g.divide(lin)
                        if not rem.is_zero():
                            break
                        g = quo
                        mult += 1
                    roots.append((r, mult))
    roots.sort(key=lambda rm: rm[0])
    return RationalRoots(tuple(roots), g.degree if g.degree >= 1 else 0)


def resultant(f: UniPoly, g: UniPoly) -> Fraction:
    """Resultant of f and g via a Euclidean remainder sequence."""
    if f.is_zero() or g.is_zero():
        return Fraction(0)
    a, b = f, g
    acc = Fraction(1)
    sign = 1
    while b.degree > 0:
        r = a.divide(b)[1]
        if r.is_zero():
            return Fraction(0)
        if (a.degree % 2) and (b.degree % 2):
            sign = -sign
        acc *= b.leading ** (a.degree - r.degree)
        a, b = b, r
    # b is a nonzero constant
    acc *= b.leading**a.degree
    return sign * acc


def lagrange_interpolate(points: Sequence[tuple[Fraction, Fraction]]) -> UniPoly:
    """The unique polynomial of degree < len(points) through the given points."""
    xs = [Fraction(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    # Newton form: build divided differences, then expand
    ys = [Fraction(y) for _, y in points]
    n = len(points)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = UniPoly.zero()
    basis = UniPoly.constant(1)
    for j in range(n):
        poly = poly + basis.scale(coef[j])
        basis = basis * UniPoly((-xs[j], 1))
    return poly
