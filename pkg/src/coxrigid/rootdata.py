"""Root data of the finite crystallographic types.

Two coordinate models are used.  Types B, C and D live in the orthonormal
epsilon basis with every coordinate doubled (``ambient_scale`` 2), which
makes the half-integer weights integral.  The other types use
fundamental-weight coordinates (``ambient_scale`` 1), where the weight
lattice is Z^n: A, E6, E7 and G2 have no full-rank epsilon model, and the
doubled epsilon lattice is not stable under the E8 and F4 reflections.

In both models the invariant form is normalized so that long roots have
squared length 2, hence every coroot is an integer multiple of its root and
all of Q, Qv and P are sublattices of the ambient Z^n.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional

from .graphs import finite_graph, coxeter_matrix
from .linalg import (AbelianInvariants, Lattice, Matrix, as_matrix, identity, matmul, matvec,
                     quotient_invariants, rational_inverse, snf, index)

_EPSILON_KINDS = ("B", "C", "D")
_MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 4}
_FIXED = {"E6": 6, "E7": 7, "E8": 8, "F4": 4, "G2": 2}


def _check_kind(kind: str, rank: int) -> None:
    if kind in _FIXED:
        if rank != _FIXED[kind]:
            raise ValueError(f"{kind} has rank {_FIXED[kind]}, not {rank}")
    elif kind in _MIN_RANK:
        if rank < _MIN_RANK[kind]:
            raise ValueError(f"{kind}{rank} is not admissible (rank >= {_MIN_RANK[kind]})")
    else:
        raise ValueError(f"unknown finite type {kind!r}")


def _bilinear(g, x, y) -> Fraction:
    return sum(Fraction(g[i][j]) * x[i] * y[j] for i in range(len(x)) for j in range(len(y)) if x[i] and y[j])


def _simple_roots(kind: str, n: int):
    """(simple roots, Gram matrix, ambient_scale, model) for the chosen model."""
    if kind in _EPSILON_KINDS:
        gram = [[Fraction(int(i == j), 4) for j in range(n)] for i in range(n)]

        def eps(*pairs):
            v = [0] * n
            for i, c in pairs:
                v[i] += 2 * c
            return tuple(v)

        if kind in ("B", "C"):
            roots = [eps((i, 1), (i + 1, -1)) for i in range(n - 1)]
            roots.append(eps((n - 1, 1)) if kind == "B" else eps((n - 1, 2)))
        else:
            roots = [eps((i, 1), (i + 1, -1)) for i in range(n - 1)]
            roots.append(eps((n - 2, 1), (n - 1, 1)))
        return roots, gram, 2, "epsilon"
    # fundamental weight model: alpha_j is column j of the Cartan matrix
    cartan = [[0] * n for _ in range(n)]
    for i in range(n):
        cartan[i][i] = 2
    cm = coxeter_matrix(finite_graph(kind, n))
    for i in range(n):
        for j in range(n):
            if i != j and cm[i][j] == 3:
                cartan[i][j] = -1
    if kind == "G2":  # alpha_1 short, alpha_2 long
        cartan = [[2, -3], [-1, 2]]
        d = [Fraction(1, 3), Fraction(1)]
    elif kind == "F4":  # alpha_1, alpha_2 long
        cartan[1][2], cartan[2][1] = -1, -2
        d = [Fraction(1), Fraction(1), Fraction(1, 2), Fraction(1, 2)]
    else:
        d = [Fraction(1)] * n
    inv = rational_inverse(cartan)
    gram = [[d[i] * inv[i][j] for j in range(n)] for i in range(n)]
    roots = [tuple(cartan[i][j] for i in range(n)) for j in range(n)]
    return roots, gram, 1, "weight"


@dataclass(frozen=True)
class RootDatum:
    kind: str
    rank: int
    model: str
    ambient_scale: int
    gram: tuple  # rational Gram matrix of the ambient basis
    simple_roots: tuple
    simple_coroots: tuple
    cartan: Matrix  # cartan[i][j] = <alpha_j, alpha_i^vee>
    weyl_gens: tuple
    Q: Lattice
    Qv: Lattice
    P: Lattice

    @property
    def name(self) -> str:
        return self.kind if self.kind[0] in "EFG" else f"{self.kind}{self.rank}"

    def pairing(self, x, i: int) -> Fraction:
        """<x, alpha_i^vee>."""
        a = self.simple_roots[i]
        return 2 * _bilinear(self.gram, x, a) / _bilinear(self.gram, a, a)

    def coxeter_orders(self) -> Matrix:
        n = self.rank
        table = {0: 2, 1: 3, 2: 4, 3: 6}
        return tuple(tuple(1 if i == j else table[self.cartan[i][j] * self.cartan[j][i]]
                           for j in range(n)) for i in range(n))

    def to_json(self) -> dict:
        return {
            "type": self.name,
            "model": self.model,
            "ambient_scale": self.ambient_scale,
            "cartan": [list(r) for r in self.cartan],
            "weyl_generators": [[list(r) for r in m] for m in self.weyl_gens],
            "simple_roots": [list(r) for r in self.simple_roots],
            "simple_coroots": [list(r) for r in self.simple_coroots],
            "lattices": {"Q": self.Q.to_json(), "Qv": self.Qv.to_json(), "P": self.P.to_json()},
        }


def _reflection(gram, root) -> Matrix:
    n = len(root)
    rr = _bilinear(gram, root, root)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = [0] * n
            e[j] = 1
            c = 2 * _bilinear(gram, e, root) / rr
            val = Fraction(int(i == j)) - c * root[i]
            if val.denominator != 1:
                raise ArithmeticError("reflection is not integral in this model")
            row.append(int(val))
        rows.append(tuple(row))
    return tuple(rows)


def matrix_order(m: Matrix, bound: int = 64) -> int:
    n = len(m)
    ident = identity(n)
    p = m
    for k in range(1, bound + 1):
        if p == ident:
            return k
        p = matmul(p, m)
    raise ValueError("matrix order exceeds bound")


def build_root_datum(kind: str, rank: int) -> RootDatum:
    _check_kind(kind, rank)
    n = rank
    roots, gram, scale, model = _simple_roots(kind, n)
    gram = tuple(tuple(r) for r in gram)
    norms = [_bilinear(gram, a, a) for a in roots]
    coroots = []
    for a, nn in zip(roots, norms):
        c = [Fraction(2) * x / nn for x in a]
        if any(x.denominator != 1 for x in c):
            raise ArithmeticError("coroot not integral")
        coroots.append(tuple(int(x) for x in c))
    cartan = as_matrix([[2 * _bilinear(gram, roots[j], roots[i]) / norms[i] for j in range(n)] for i in range(n)])
    gens = tuple(_reflection(gram, a) for a in roots)
    Q = Lattice.from_generators(roots, n)
    Qv = Lattice.from_generators(coroots, n)
    # P = {x : <x, alpha_i^vee> in Z}; columns of the inverse of the pairing matrix
    pair = [[2 * _bilinear(gram, [int(k == j) for k in range(n)], a) / nn for j in range(n)]
            for a, nn in zip(roots, norms)]
    inv = rational_inverse(pair)
    pcols = []
    for j in range(n):
        col = [inv[i][j] for i in range(n)]
        if any(x.denominator != 1 for x in col):
            raise ArithmeticError("weight lattice not contained in the ambient lattice")
        pcols.append(tuple(int(x) for x in col))
    P = Lattice.from_generators(pcols, n)
    rd = RootDatum(kind, n, model, scale, gram, tuple(roots), tuple(coroots), cartan, gens, Q, Qv, P)
    verify_root_datum(rd)
    return rd


def verify_root_datum(rd: RootDatum) -> None:
    """Raise AssertionError unless involutions, braid relations and lattice stability hold."""
    n = rd.rank
    ident = identity(n)
    orders = rd.coxeter_orders()
    for i, m in enumerate(rd.weyl_gens):
        assert matmul(m, m) == ident, f"generator {i} is not an involution"
        for lat in (rd.Q, rd.Qv, rd.P):
            assert lat.is_stable(m), f"generator {i} does not stabilize a lattice"
    for i in range(n):
        for j in range(i + 1, n):
            prod = matmul(rd.weyl_gens[i], rd.weyl_gens[j])
            assert matrix_order(prod) == orders[i][j], f"braid relation fails for ({i}, {j})"
    assert rd.P.contains_lattice(rd.Q), "Q is not contained in P"


def fundamental_quotient(rd: RootDatum) -> AbelianInvariants:
    return quotient_invariants(rd.Q, rd.P)


class LatticeQuotient:
    """The finite group sup/sub with explicit coordinates."""

    def __init__(self, sub: Lattice, sup: Lattice):
        from .linalg import relative_matrix
        if sub.rank != sup.rank:
            raise ValueError("rank mismatch: quotient is infinite")
        self.sub, self.sup = sub, sup
        rel = relative_matrix(sub, sup)
        u, d, v = snf(rel)
        k = sup.rank
        diag = [d[i][i] for i in range(k)]
        self._keep = [i for i in range(k) if diag[i] != 1]
        self.moduli = tuple(diag[i] for i in self._keep)
        self._u = u
        uinv = rational_inverse(u)
        self._uinv = tuple(tuple(int(x) for x in row) for row in uinv)

    @property
    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    def invariants(self) -> AbelianInvariants:
        return AbelianInvariants(self.moduli)

    def residue(self, x) -> tuple:
        c = self.sup.coordinates(x)
        if c is None:
            raise ValueError("vector not in the ambient lattice of the quotient")
        uc = matvec(self._u, c)
        return tuple(uc[i] % m for i, m in zip(self._keep, self.moduli))

    def lift(self, r) -> tuple:
        full = [0] * self.sup.rank
        for i, x in zip(self._keep, r):
            full[i] = x
        c = matvec(self._uinv, full)
        return matvec(self.sup.matrix(), c)

    def elements(self) -> list[tuple]:
        out = [()]
        for m in self.moduli:
            out = [e + (x,) for e in out for x in range(m)]
        return out


def intermediate_invariant_lattices(rd: RootDatum, gens=None) -> list[Lattice]:
    """All lattices Q <= L <= P stable under the Weyl generators."""
    gens = rd.weyl_gens if gens is None else gens
    return invariant_lattices_between(rd.Q, rd.P, gens)


def invariant_lattices_between(lo: Lattice, hi: Lattice, gens) -> list[Lattice]:
    quo = LatticeQuotient(lo, hi)
    elems = quo.elements()
    mod = quo.moduli

    def add(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, mod))

    def closure(gs):
        seen = {tuple(0 for _ in mod)}
        frontier = list(seen)
        while frontier:
            nxt = []
            for e in frontier:
                for g in gs:
                    f = add(e, g)
                    if f not in seen:
                        seen.add(f)
                        nxt.append(f)
            frontier = nxt
        return frozenset(seen)

    subgroups = {closure([])}
    frontier = list(subgroups)
    while frontier:
        nxt = []
        for s in frontier:
            for e in elems:
                if e not in s:
                    t = closure(list(s) + [e])
                    if t not in subgroups:
                        subgroups.add(t)
                        nxt.append(t)
        frontier = nxt
    out = []
    for s in subgroups:
        lat = Lattice.from_generators(list(lo.basis) + [quo.lift(e) for e in s], lo.ambient_rank)
        if all(lat.is_stable(g) for g in gens):
            out.append(lat)
    out.sort(key=lambda l: (index(lo, l), l.basis))
    return out


def weyl_action_trivial_on_quotient(rd: RootDatum) -> bool:
    quo = LatticeQuotient(rd.Q, rd.P)
    for g in rd.weyl_gens:
        for b in rd.P.basis:
            if quo.residue(matvec(g, b)) != quo.residue(b):
                return False
    return True


def count_subgroups_abelian(moduli) -> int:
    """Number of subgroups of the finite abelian group with the given cyclic factors."""
    elems = [()]
    for m in moduli:
        elems = [e + (x,) for e in elems for x in range(m)]
    zero = tuple(0 for _ in moduli)

    def add(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, moduli))

    def closure(gs):
        seen = {zero}
        stack = [zero]
        while stack:
            e = stack.pop()
            for g in gs:
                f = add(e, g)
                if f not in seen:
                    seen.add(f)
                    stack.append(f)
        return frozenset(seen)

    subs = {closure([])}
    frontier = list(subs)
    while frontier:
        nxt = []
        for s in frontier:
            for e in elems:
                if e not in s:
                    t = closure(list(s) + [e])
                    if t not in subs:
                        subs.add(t)
                        nxt.append(t)
        frontier = nxt
    return len(subs)


# -- the B/C chain -------------------------------------------------------------

@dataclass(frozen=True)
class LatticeChain:
    lattices: tuple
    quotients: tuple  # invariants of L_{i+1}/L_i

    @classmethod
    def of(cls, lattices) -> "LatticeChain":
        lattices = tuple(lattices)
        quots = []
        for a, b in zip(lattices, lattices[1:]):
            q = quotient_invariants(a, b)
            if q.is_trivial():
                raise ValueError("chain inclusions must be strict")
            quots.append(q)
        return cls(lattices, tuple(quots))


def bc_chain(n: int) -> LatticeChain:
    """L1 (even coordinate sum) < L2 = Z^n < L3 = Z^n + (1/2)(1,...,1).

    Coordinates are epsilon coordinates doubled, as in the B_n datum.
    """
    if n < 2:
        raise ValueError("the B/C chain needs n >= 2")
    e = [tuple(2 * int(i == j) for i in range(n)) for j in range(n)]
    l2 = Lattice.from_generators(e, n)
    l1 = Lattice.from_generators([tuple(a - b for a, b in zip(e[i], e[i + 1])) for i in range(n - 1)]
                                 + [tuple(2 * x for x in e[0])], n)
    l3 = Lattice.from_generators(e + [(1,) * n], n)
    chain = LatticeChain.of([l1, l2, l3])
    w = build_root_datum("B", n).weyl_gens
    for lat in chain.lattices:
        if not all(lat.is_stable(g) for g in w):
            raise AssertionError("chain lattice not stable under W(B_n)")
    return chain


# -- comparison of Q and Qv ------------------------------------------------------

def duality_permutation(rd: RootDatum) -> Optional[tuple]:
    """A permutation p with cartan^T[i][j] == cartan[p i][p j], if any."""
    n = rd.rank
    c = rd.cartan
    for p in permutations(range(n)):
        if all(c[j][i] == c[p[i]][p[j]] for i in range(n) for j in range(n)):
            return p
    return None


def simply_laced_coincidence(rd: RootDatum) -> bool:
    """Whether the coroot lattice agrees with the root lattice.

    Exact equality of stored lattices decides the simply laced types.  For
    self-dual diagrams (B2, F4, G2) the lattices agree after the rescaling
    that sends each simple root to the matching simple coroot; that map is
    constructed and checked to normalize the Weyl generators.
    """
    if rd.Q == rd.Qv:
        return True
    if rd.rank > 8:
        return False
    p = duality_permutation(rd)
    if p is None:
        return False
    n = rd.rank
    r = [[rd.simple_roots[j][i] for j in range(n)] for i in range(n)]
    cv = [[rd.simple_coroots[p[j]][i] for j in range(n)] for i in range(n)]
    rinv = rational_inverse(r)
    phi = [[sum(Fraction(cv[i][k]) * rinv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    phinv = rational_inverse(phi)
    for i, g in enumerate(rd.weyl_gens):
        conj = [[sum(phi[a][b] * g[b][c] * phinv[c][d] for b in range(n) for c in range(n))
                 for d in range(n)] for a in range(n)]
        if conj != [[Fraction(x) for x in row] for row in rd.weyl_gens[p[i]]]:
            return False
    return True


def root_system(rd: RootDatum):
    """All (root, coroot, reflection) triples, generated from the simple ones."""
    seen = {}
    frontier = []
    for a, c, m in zip(rd.simple_roots, rd.simple_coroots, rd.weyl_gens):
        if a not in seen:
            seen[a] = (c, m)
            frontier.append(a)
    while frontier:
        nxt = []
        for a in frontier:
            c, m = seen[a]
            for g in rd.weyl_gens:
                b = matvec(g, a)
                if b not in seen:
                    seen[b] = (matvec(g, c), matmul(matmul(g, m), g))
                    nxt.append(b)
        frontier = nxt
    return [(a, c, m) for a, (c, m) in seen.items()]


def highest_root(rd: RootDatum):
    """(theta, theta coroot, reflection matrix) for the highest root."""
    n = rd.rank
    r = [[rd.simple_roots[j][i] for j in range(n)] for i in range(n)]
    rinv = rational_inverse(r)
    best = None
    for a, c, m in root_system(rd):
        coeff = [sum(rinv[i][k] * a[k] for k in range(n)) for i in range(n)]
        h = sum(coeff)
        if best is None or h > best[0]:
            best = (h, a, c, m)
    return best[1], best[2], best[3]
