"""First cohomology with lattice coefficients and conjugacy classes of finite subgroups.

A finite subgroup of G maps isomorphically onto a subgroup H of the point
group, and is the image of a splitting over H.  Splittings over H form a
torsor under the integral cocycles Z^1(H; Z^n); conjugating by translations
moves them by coboundaries, and the normalizer of H in P acts on what is
left.  Orbits of that action are the conjugacy classes lying over H.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .crystal import (AffineElement, BudgetExceeded, CrystalGroup, _mat_inv_int, evaluate_word)
from .finite import FiniteGroup, cayley_presentation, isomorphic_finite
from .linalg import (AbelianInvariants, Lattice, as_matrix, identity, kernel, matmul,
                     quotient_invariants, solve_integer)
from .rootdata import LatticeQuotient


def _fox_matrix(relators, mats: Sequence, n: int) -> list:
    """Rows of the linear map x -> (f(r))_r on generator values x (n*k columns)."""
    k = len(mats)
    invs = [_mat_inv_int(m) for m in mats]
    rows = []
    for r in relators:
        block = [[0] * (n * k) for _ in range(n)]
        prefix = identity(n)
        for g, e in r:
            coef = prefix if e == 1 else tuple(tuple(-x for x in row) for row in matmul(prefix, invs[g]))
            for i in range(n):
                for j in range(n):
                    block[i][g * n + j] += coef[i][j]
            prefix = matmul(prefix, mats[g] if e == 1 else invs[g])
        rows.extend(block)
    return rows


def _coboundary_generators(mats: Sequence, n: int) -> list:
    gens = []
    for v in range(n):
        col = []
        for m in mats:
            col.extend(m[i][v] - int(i == v) for i in range(n))
        gens.append(tuple(col))
    return gens


def cocycle_lattices(relators, mats: Sequence, n: int):
    """(Fox matrix rows, Z^1 lattice, B^1 lattice) inside Z^{n k}."""
    k = len(mats)
    fox = _fox_matrix(relators, mats, n)
    z1 = kernel(as_matrix(fox), n * k) if fox else [tuple(int(i == j) for j in range(n * k)) for i in range(n * k)]
    Z = Lattice.from_generators(z1, n * k)
    B = Lattice.from_generators(_coboundary_generators(mats, n), n * k)
    return fox, Z, B


def h1(group: FiniteGroup, gen_matrices: Sequence, relators=None) -> AbelianInvariants:
    """H^1(H; Z^n) for H acting through the given generator matrices.

    ``gen_matrices[j]`` is the action of ``group.generators[j]``; relators
    default to the Cayley-graph presentation of the table.
    """
    mats = [as_matrix(m) for m in gen_matrices]
    n = len(mats[0])
    if len(mats) != len(group.generators):
        raise ValueError("one matrix per designated generator is required")
    rels = relators if relators is not None else cayley_presentation(group).relators
    _, Z, B = cocycle_lattices(rels, mats, n)
    if not B.contains_lattice(B) or not Z.contains_lattice(B):
        raise AssertionError("coboundaries are not cocycles")
    return quotient_invariants(B, Z)


def h1_of_matrices(gens: Sequence) -> AbelianInvariants:
    """H^1 of the finite matrix group generated by ``gens`` acting on Z^n."""
    from .crystal import PointGroup
    pg = PointGroup(gens)
    table = [[pg.mul(i, j) for j in range(pg.order)] for i in range(pg.order)]
    fg = FiniteGroup(table, pg.gen_indices)
    return h1(fg, [pg.matrix(i) for i in pg.gen_indices])


# -- finite subgroups -----------------------------------------------------------

@dataclass
class CFClass:
    point_subgroup: tuple  # sorted point element indices
    generators: tuple  # AffineElement generators of the representative
    order: int
    label: str


@dataclass
class CFPoset:
    classes: list
    relation: set  # (i, j) meaning class i <= class j
    complete: bool = True
    notes: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"classes": sorted([c.order, c.label] for c in self.classes),
                "relation_count": len(self.relation), "complete": self.complete}


def _point_table(g: CrystalGroup) -> list:
    pg = g.point
    return [[pg.mul(i, j) for j in range(pg.order)] for i in range(pg.order)]


def _closure(table, gens) -> frozenset:
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = table[x][s]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def all_subgroups(table) -> list:
    n = len(table)
    cyclic = {_closure(table, [x]) for x in range(n)}
    subs = set(cyclic)
    frontier = list(subs)
    while frontier:
        nxt = []
        for s in frontier:
            for c in cyclic:
                if not c <= s:
                    t = _closure(table, list(s | c))
                    if t not in subs:
                        subs.add(t)
                        nxt.append(t)
        frontier = nxt
    return sorted(subs, key=lambda s: (len(s), sorted(s)))


def _inverse_table(table) -> list:
    return [row.index(0) for row in table]


def subgroup_classes(table) -> list:
    """Conjugacy class representatives (lexicographically least member)."""
    inv = _inverse_table(table)
    n = len(table)
    reps = {}
    for s in all_subgroups(table):
        conj = [tuple(sorted(table[table[c][x]][inv[c]] for x in s)) for c in range(n)]
        reps.setdefault(min(conj), None)
    return sorted(reps, key=lambda s: (len(s), s))


def _generators_of(table, s) -> list:
    out = []
    span = frozenset([0])
    for x in sorted(s):
        if x not in span:
            out.append(x)
            span = _closure(table, out)
    return out


def _words(table, gens, elems) -> dict:
    parent = {0: None}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for j, s in enumerate(gens):
            y = table[x][s]
            if y not in parent:
                parent[y] = (x, j)
                queue.append(y)
    words = {}
    for x in elems:
        w, y = [], x
        while parent[y] is not None:
            y, j = parent[y]
            w.append((j, 1))
        words[x] = tuple(reversed(w))
    return words


def _sub_relators(table, gens, elems) -> list:
    words = _words(table, gens, elems)
    rels = []
    for x in elems:
        for j, s in enumerate(gens):
            y = table[x][s]
            w = list(words[x]) + [(j, 1)] + [(a, -e) for a, e in reversed(words[y])]
            from .crystal import _free_reduce
            w = _free_reduce(w)
            if w:
                rels.append(tuple(w))
    return rels


def _label(table, s) -> str:
    orders = []
    for x in s:
        k, y = 1, x
        while y:
            y = table[y][x]
            k += 1
        orders.append(k)
    stats = ",".join(f"{o}^{c}" for o, c in sorted(Counter(orders).items()))
    return f"order {len(s)} [{stats}]"


class _SubgroupLifts:
    """Splittings of G over a point subgroup H, modulo translation conjugacy."""

    def __init__(self, g: CrystalGroup, table, s):
        self.g = g
        self.n = n = g.rank
        self.table = table
        self.elems = sorted(s)
        self.gens = _generators_of(table, s)
        self.words = _words(table, self.gens, self.elems)
        pg = g.point
        tau = g.vector_system
        self.mats = [pg.matrix(x) for x in self.gens]
        self.rels = _sub_relators(table, self.gens, self.elems)
        self.base = [AffineElement(pg.matrix(x), tau[x]) for x in self.gens]
        fox, self.Z, self.B = cocycle_lattices(self.rels, self.mats, n)
        k = len(self.gens)
        if not self.gens:
            self.x0 = ()
            self.quo = None
            return
        e = []
        for r in self.rels:
            val = evaluate_word(r, self.base, n)
            e.extend(-x for x in val.translation)
        if any(Fraction(x).denominator != 1 for x in e):
            raise AssertionError("vector system fails the cocycle condition")
        self.x0 = solve_integer(as_matrix(fox), [int(x) for x in e]) if fox else (0,) * (n * k)
        self.quo = LatticeQuotient(self.B, self.Z) if self.x0 is not None else None

    @property
    def splits(self) -> bool:
        return self.x0 is not None

    def lifts_for(self, x) -> list:
        n = self.n
        return [AffineElement(b.point, tuple(t + x[j * n + i] for i, t in enumerate(b.translation)))
                for j, b in enumerate(self.base)]

    def residue(self, x) -> tuple:
        if self.quo is None:
            return ()
        return self.quo.residue(tuple(a - b for a, b in zip(x, self.x0)))

    def element_of(self, r) -> tuple:
        if self.quo is None:
            return self.x0
        v = self.quo.lift(r)
        return tuple(a + b for a, b in zip(self.x0, v))

    def residues(self) -> list:
        return self.quo.elements() if self.quo is not None else [()]

    def evaluate(self, lifts, h) -> AffineElement:
        return evaluate_word(self.words[h], lifts, self.n)

    def conjugated_residue(self, r, p: int) -> tuple:
        """Residue of G_p S G_p^-1 where S is the splitting with residue r."""
        g, pg, table = self.g, self.g.point, self.table
        lifts = self.lifts_for(self.element_of(r))
        gp = g.lift(p)
        gpi = gp.inverse()
        pinv = pg.inverse(p)
        x = []
        for j, h in enumerate(self.gens):
            hp = table[table[pinv][h]][p]
            img = gp * self.evaluate(lifts, hp) * gpi
            if img.point != self.mats[j]:
                raise AssertionError("conjugation does not normalize the point subgroup")
            x.extend(int(a - b) for a, b in zip(img.translation, self.base[j].translation))
        return self.residue(tuple(x))


def finite_subgroup_classes(g: CrystalGroup, budget: int = 200) -> CFPoset:
    """Conjugacy classes of finite subgroups with the order [A] <= [B] iff A is
    contained in a conjugate of B.

    ``budget`` bounds the point group order.  Containment is decided exactly:
    for each point conjugator the remaining translation part solves an
    integer linear system.
    """
    pg = g.point
    if pg.order > budget:
        raise BudgetExceeded(f"point group order {pg.order} exceeds the CF budget {budget}")
    table = _point_table(g)
    inv = _inverse_table(table)
    P = len(table)
    classes = []
    data = []
    for s in subgroup_classes(table):
        sl = _SubgroupLifts(g, table, s)
        if not sl.splits:
            continue
        sset = set(s)
        normalizer = [p for p in range(P) if all(table[table[p][h]][inv[p]] in sset for h in s)]
        seen = set()
        for r in sorted(sl.residues()):
            if r in seen:
                continue
            orbit = {r}
            queue = [r]
            while queue:
                a = queue.pop()
                for p in normalizer:
                    b = sl.conjugated_residue(a, p)
                    if b not in orbit:
                        orbit.add(b)
                        queue.append(b)
            seen |= orbit
            rep = min(orbit)
            lifts = sl.lifts_for(sl.element_of(rep))
            classes.append(CFClass(tuple(s), tuple(lifts), len(s), _label(table, s)))
            data.append((sl, lifts))
    relation = set()
    for i, (sa, la) in enumerate(data):
        for j, (sb, lb) in enumerate(data):
            if classes[i].order > classes[j].order or classes[j].order % classes[i].order:
                continue
            if _contained_up_to_conjugacy(g, table, inv, sa, la, sb, lb):
                relation.add((i, j))
    return CFPoset(classes, relation, True, {"point_order_budget": budget})


def _contained_up_to_conjugacy(g, table, inv, sa, la, sb, lb) -> bool:
    n = g.rank
    hb = set(sb.elems)
    for p in range(len(table)):
        # g = G_p T_v ; g^-1 A g = T_-v (G_p^-1 A G_p) T_v must lie in B
        pts = [table[table[inv[p]][h]][p] for h in sa.gens]
        if any(x not in hb for x in pts):
            continue
        gp = g.lift(p)
        gpi = gp.inverse()
        rows, rhs = [], []
        for h, lift in zip(pts, la):
            a = gpi * lift * gp
            cb = sb.evaluate(lb, h)
            diff = [x - y for x, y in zip(a.translation, cb.translation)]
            m = a.point
            for i in range(n):
                rows.append(tuple(int(i == k) - m[i][k] for k in range(n)))
            rhs.extend(diff)
        if not rows:
            return True
        if any(Fraction(x).denominator != 1 for x in rhs):
            continue
        if solve_integer(as_matrix(rows), [int(x) for x in rhs]) is not None:
            return True
    return False


def _subgroup_finite_group(g: CrystalGroup, cls: CFClass) -> FiniteGroup:
    pg = g.point
    elems = list(cls.point_subgroup)
    idx = {x: i for i, x in enumerate(elems)}
    table = [[idx[pg.mul(a, b)] for b in elems] for a in elems]
    gens = [idx[x] for x in elems]
    return FiniteGroup(table, gens, check=False)


def cf_equal(a: CFPoset, b: CFPoset, ga: Optional[CrystalGroup] = None,
             gb: Optional[CrystalGroup] = None) -> bool:
    """Poset isomorphism matching class labels (and abstract isomorphism when
    the groups are supplied)."""
    if not (a.complete and b.complete):
        raise BudgetExceeded("cannot compare incomplete CF posets")
    if len(a.classes) != len(b.classes) or len(a.relation) != len(b.relation):
        return False
    if sorted(c.label for c in a.classes) != sorted(c.label for c in b.classes):
        return False
    na = len(a.classes)
    cands = [[j for j, cb in enumerate(b.classes) if cb.label == ca.label] for ca in a.classes]
    iso_cache = {}

    def iso_ok(i, j):
        if ga is None or gb is None:
            return True
        if (i, j) not in iso_cache:
            iso_cache[(i, j)] = isomorphic_finite(_subgroup_finite_group(ga, a.classes[i]),
                                                  _subgroup_finite_group(gb, b.classes[j]))
        return iso_cache[(i, j)]

    phi = [None] * na
    used = set()

    def rec(i):
        if i == na:
            return True
        for j in cands[i]:
            if j in used:
                continue
            ok = all(((i, k) in a.relation) == ((j, phi[k]) in b.relation)
                     and ((k, i) in a.relation) == ((phi[k], j) in b.relation) for k in range(i))
            ok = ok and (((i, i) in a.relation) == ((j, j) in b.relation))
            if ok and iso_ok(i, j):
                phi[i] = j
                used.add(j)
                if rec(i + 1):
                    return True
                used.discard(j)
        return False

    return rec(0)
