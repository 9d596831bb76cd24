"""Exact integer linear algebra.

Matrices are tuples of row tuples of Python ints, so entries never overflow.
Lattices are stored by a canonical column Hermite normal form: basis columns
are ordered by the row of their lowest nonzero entry (the pivot), pivots are
positive, and entries of a pivot row to the right of the pivot are reduced
into ``[0, pivot)``.  Two generating sets of the same lattice therefore
produce identical ``Lattice`` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

Matrix = tuple  # tuple[tuple[int, ...], ...]
Vector = tuple  # tuple[int, ...]


# -- small helpers ---------------------------------------------------------

def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(m: int, n: int) -> Matrix:
    return tuple((0,) * n for _ in range(m))


def shape(a: Matrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def columns(a: Matrix) -> list[tuple]:
    return [tuple(c) for c in zip(*a)]


def from_columns(cols: Sequence[Sequence], nrows: int) -> Matrix:
    if not cols:
        return tuple(() for _ in range(nrows))
    return tuple(zip(*cols))


def det(a: Matrix) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b == g == gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


# -- Smith normal form -----------------------------------------------------

def _snf_core(a: Matrix, track: bool):
    m, n = shape(a)
    d = [list(r) for r in a]
    u = [list(r) for r in identity(m)] if track else None
    v = [list(r) for r in identity(n)] if track else None

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        if track:
            u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        if track:
            for row in v:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        rs, rd = d[src], d[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        if track:
            us, ud = u[src], u[dst]
            for k in range(m):
                if us[k]:
                    ud[k] += q * us[k]

    def add_col(src, dst, q):  # col_dst += q * col_src
        for row in d:
            if row[src]:
                row[dst] += q * row[src]
        if track:
            for row in v:
                if row[src]:
                    row[dst] += q * row[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = d[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = d[t][t]
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(t, i, -(d[i][t] // p))
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(t, j, -(d[t][j] // p))
            # remainders smaller than the pivot become the next pivot
            best = None
            for i in range(t + 1, m):
                x = d[i][t]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, "r")
            for j in range(t + 1, n):
                x = d[t][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), j, "c")
            if best is not None:
                if best[2] == "r":
                    swap_rows(t, best[1])
                else:
                    swap_cols(t, best[1])
                continue
            bad = None
            for i in range(t + 1, m):
                row = d[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            if track:
                u[t] = [-x for x in u[t]]
    if track:
        return as_matrix(u), as_matrix(d), as_matrix(v)
    return as_matrix(d)


def snf(a: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``(u, d, v)`` with ``u @ a @ v == d``.

    ``u`` and ``v`` are unimodular, ``d`` is diagonal with nonnegative
    entries forming a divisibility chain.  Pivots are chosen by least
    nonzero magnitude.
    """
    return _snf_core(a, True)


def invariant_factors(a: Matrix) -> list[int]:
    """Nonzero diagonal of the Smith form, without computing transforms."""
    if not a or not a[0]:
        return []
    m, n = shape(a)
    if n > m:
        # shrink the column count first, HNF is cheap on wide matrices
        h = hnf_columns(columns(a), m)
        if not h:
            return []
        a = from_columns(h, m)
    d = _snf_core(a, False)
    return [d[i][i] for i in range(min(shape(d))) if d[i][i]]


# -- abelian groups --------------------------------------------------------

@dataclass(frozen=True)
class AbelianInvariants:
    """``Z^free_rank + Z/d_1 + ... + Z/d_k`` with ``d_1 | d_2 | ... | d_k``."""

    torsion: tuple = ()
    free_rank: int = 0

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"not a divisibility chain: {self.torsion}")
        if any(d < 2 for d in self.torsion):
            raise ValueError(f"invariant factors must be >= 2: {self.torsion}")
        if self.free_rank < 0:
            raise ValueError("negative free rank")

    @classmethod
    def from_factors(cls, factors: Iterable[int], free_rank: int = 0) -> "AbelianInvariants":
        """Normalize an arbitrary list of cyclic orders (0 means infinite)."""
        factors = list(factors)
        free = free_rank + sum(1 for f in factors if f == 0)
        primes: dict[int, list[int]] = {}
        for f in factors:
            f = abs(f)
            if f <= 1:
                continue
            p = 2
            while p * p <= f:
                if f % p == 0:
                    q = 1
                    while f % p == 0:
                        f //= p
                        q *= p
                    primes.setdefault(p, []).append(q)
                p += 1
            if f > 1:
                primes.setdefault(f, []).append(f)
        k = max((len(v) for v in primes.values()), default=0)
        chain = [1] * k
        for powers in primes.values():
            powers.sort()
            for i, q in enumerate(powers):
                chain[k - len(powers) + i] *= q
        return cls(tuple(chain), free)

    @property
    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def is_trivial(self) -> bool:
        return not self.torsion and not self.free_rank

    def __str__(self) -> str:
        parts = [f"Z_{d}" for d in self.torsion]
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        return " x ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {"torsion": list(self.torsion), "free_rank": self.free_rank}


def cokernel_invariants(a: Matrix, nrows: Optional[int] = None) -> AbelianInvariants:
    """Invariants of ``Z^rows / (column span of a)``."""
    m = len(a) if nrows is None else nrows
    diag = invariant_factors(a) if a and a[0] else []
    return AbelianInvariants(tuple(x for x in diag if x != 1), m - len(diag))


# -- Hermite normal form and lattices ----------------------------------------

def hnf_columns(gens: Iterable[Sequence[int]], n: int, extra: int = 0):
    """Column HNF of the lattice spanned by ``gens`` (each of length n+extra).

    Only the first ``n`` coordinates take part in the elimination; the
    trailing ``extra`` coordinates ride along (used to record transforms).
    Returns (basis, zero_part): the pivot columns in canonical order and the
    columns whose first n coordinates vanished.
    """
    remaining = [list(g) for g in gens]
    pivots = []
    zero_part = [c for c in remaining if not any(c[:n])]
    remaining = [c for c in remaining if any(c[:n])]
    for i in range(n - 1, -1, -1):
        nz = [c for c in remaining if c[i]]
        if not nz:
            continue
        rest = [c for c in remaining if not c[i]]
        while len(nz) > 1:
            p = min(nz, key=lambda c: abs(c[i]))
            nxt = [p]
            for c in nz:
                if c is p:
                    continue
                q = c[i] // p[i]
                for k in range(len(c)):
                    if p[k]:
                        c[k] -= q * p[k]
                if c[i]:
                    nxt.append(c)
                elif any(c[:n]):
                    rest.append(c)
                else:
                    zero_part.append(c)
            nz = nxt
        p = nz[0]
        if p[i] < 0:
            p[:] = [-x for x in p]
        pivots.append((i, p))
        remaining = rest
    pivots.reverse()  # ascending pivot row
    for jj in range(len(pivots) - 1, -1, -1):
        r, pc = pivots[jj]
        for kk in range(jj + 1, len(pivots)):
            c = pivots[kk][1]
            q = c[r] // pc[r]
            if q:
                for k in range(len(c)):
                    if pc[k]:
                        c[k] -= q * pc[k]
    if extra:
        return [tuple(c) for _, c in pivots], [tuple(c) for c in zero_part]
    return [tuple(c) for _, c in pivots]


def hnf(a: Matrix) -> Matrix:
    """Column Hermite normal form of ``a`` (zero columns dropped)."""
    m = len(a)
    return from_columns(hnf_columns(columns(a), m), m)


def kernel(a: Matrix, ncols: Optional[int] = None) -> list[tuple]:
    """A Z-basis (canonical HNF) of ``{x in Z^cols : a x = 0}``."""
    m = len(a)
    n = len(a[0]) if a else (ncols or 0)
    aug = []
    for j in range(n):
        col = [a[i][j] for i in range(m)] + [1 if k == j else 0 for k in range(n)]
        aug.append(col)
    _, zero = hnf_columns(aug, m, extra=n)
    vecs = [c[m:] for c in zero]
    return hnf_columns(vecs, n)


def solve_integer(a: Matrix, b: Sequence[int]) -> Optional[tuple]:
    """Some integer x with ``a x == b``, or None if no such x exists."""
    m, n = shape(a)
    if m == 0:
        return (0,) * n
    if n == 0:
        return () if not any(b) else None
    u, d, v = snf(a)
    ub = matvec(u, b)
    y = [0] * n
    for i in range(m):
        di = d[i][i] if i < n else 0
        if di == 0:
            if ub[i]:
                return None
        else:
            q, r = divmod(ub[i], di)
            if r:
                return None
            y[i] = q
    return matvec(v, y)


@dataclass(frozen=True)
class Lattice:
    """A subgroup of Z^ambient_rank, stored by canonical HNF basis columns."""

    ambient_rank: int
    basis: tuple  # tuple of column tuples

    @classmethod
    def from_generators(cls, gens: Iterable[Sequence[int]], ambient_rank: int) -> "Lattice":
        gens = [tuple(int(x) for x in g) for g in gens]
        for g in gens:
            if len(g) != ambient_rank:
                raise ValueError("generator length does not match ambient rank")
        return cls(ambient_rank, tuple(hnf_columns(gens, ambient_rank)))

    @classmethod
    def standard(cls, n: int, scale: int = 1) -> "Lattice":
        return cls.from_generators([tuple(scale if i == j else 0 for i in range(n)) for j in range(n)], n)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def matrix(self) -> Matrix:
        return from_columns(self.basis, self.ambient_rank)

    def is_full_rank(self) -> bool:
        return self.rank == self.ambient_rank

    def determinant(self) -> int:
        """Index in Z^n (full rank lattices only)."""
        if not self.is_full_rank():
            raise ValueError("lattice is not of full rank")
        return abs(det(self.matrix()))

    def coordinates(self, x: Sequence) -> Optional[tuple]:
        """Integer coordinates of x in the stored basis, None if x not in L."""
        if not self.basis:
            return () if not any(x) else None
        return solve_integer(self.matrix(), x)

    def __contains__(self, x) -> bool:
        return self.coordinates(x) is not None

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(c in self for c in other.basis)

    def image(self, a: Matrix) -> "Lattice":
        return Lattice.from_generators([matvec(a, c) for c in self.basis], len(a))

    def is_stable(self, a: Matrix) -> bool:
        return all(matvec(a, c) in self for c in self.basis)

    def scaled(self, k: int) -> "Lattice":
        return Lattice.from_generators([tuple(k * x for x in c) for c in self.basis], self.ambient_rank)

    def to_json(self) -> list:
        return [[str(x) for x in c] for c in self.basis]


def _check_ambient(l1: Lattice, l2: Lattice) -> None:
    if l1.ambient_rank != l2.ambient_rank:
        raise ValueError("lattices live in different ambient spaces")


def lattice_sum(l1: Lattice, l2: Lattice) -> Lattice:
    _check_ambient(l1, l2)
    return Lattice.from_generators(l1.basis + l2.basis, l1.ambient_rank)


def lattice_intersection(l1: Lattice, l2: Lattice) -> Lattice:
    _check_ambient(l1, l2)
    n = l1.ambient_rank
    k1 = l1.rank
    if k1 == 0 or l2.rank == 0:
        return Lattice(n, ())
    # B1 a = B2 b  <=>  [B1 | -B2] (a, b) = 0
    cols = list(l1.basis) + [tuple(-x for x in c) for c in l2.basis]
    rel = kernel(from_columns(cols, n))
    gens = [matvec(l1.matrix(), r[:k1]) for r in rel]
    return Lattice.from_generators(gens, n)


def relative_matrix(sub: Lattice, sup: Lattice) -> Matrix:
    """Columns: coordinates of sub's basis vectors in sup's basis."""
    coords = []
    for c in sub.basis:
        x = sup.coordinates(c)
        if x is None:
            raise ValueError("not a sublattice")
        coords.append(x)
    return from_columns(coords, sup.rank)


def quotient_invariants(sub: Lattice, sup: Lattice) -> AbelianInvariants:
    """Invariant factors of ``sup / sub``; requires equal rank."""
    _check_ambient(sub, sup)
    if sub.rank != sup.rank:
        raise ValueError("rank mismatch: quotient is infinite")
    if sup.rank == 0:
        return AbelianInvariants()
    rel = relative_matrix(sub, sup)
    return cokernel_invariants(rel)


def index(sub: Lattice, sup: Lattice) -> int:
    return quotient_invariants(sub, sup).order


# -- rational linear algebra -------------------------------------------------

def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rational_rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def rational_nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of the right nullspace over Q."""
    red, piv = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rational_inverse(a: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def primitive(v: Sequence[Fraction]) -> tuple:
    """Scale a rational vector to a primitive integer vector."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints) if g else tuple(ints)
