"""Finite groups by multiplication table, lattice quotients and homomorphism search."""
from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

from .crystal import BudgetExceeded, CrystalGroup, _free_reduce
from .graphs import FinPres
from .linalg import Lattice, matvec
from .rootdata import LatticeQuotient


class FiniteGroup:
    """Elements 0..order-1 with 0 the identity, a full multiplication table and
    designated generators.

    Associativity is proved by Light's test (it suffices to check
    ``(x g) y == x (g y)`` for generators g) up to order 512, and spot-checked
    on pseudo-random triples above that.
    """

    def __init__(self, table: Sequence[Sequence[int]], generators: Sequence[int],
                 labels: Optional[Sequence[str]] = None, check: bool = True):
        self.table = [list(r) for r in table]
        self.order = len(self.table)
        self.generators = tuple(generators)
        self.labels = list(labels) if labels is not None else None
        if check:
            self._validate()
        self.inverse = [0] * self.order
        for i in range(self.order):
            row = self.table[i]
            for j in range(self.order):
                if row[j] == 0:
                    self.inverse[i] = j
                    break
        self._orders = None

    def _validate(self) -> None:
        n = self.order
        t = self.table
        if n == 0 or any(len(r) != n for r in t):
            raise ValueError("multiplication table must be square and nonempty")
        if t[0] != list(range(n)) or [r[0] for r in t] != list(range(n)):
            raise ValueError("element 0 must be the identity")
        for r in t:
            if sorted(r) != list(range(n)):
                raise ValueError("table rows must be permutations (inverse law)")
        for c in range(n):
            if sorted(r[c] for r in t) != list(range(n)):
                raise ValueError("table columns must be permutations (inverse law)")
        if len(self.subgroup(self.generators)) != n:
            raise ValueError("designated generators do not generate the group")
        if n <= 512:
            for g in self.generators:
                for x in range(n):
                    xg = t[x][g]
                    row = t[xg]
                    tx = t[x]
                    for y in range(n):
                        if row[y] != tx[t[g][y]]:
                            raise ValueError("table is not associative")
        else:
            rng = random.Random(0)
            for _ in range(20000):
                a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
                if t[t[a][b]][c] != t[a][t[b][c]]:
                    raise ValueError("table is not associative")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def element_order(self, a: int) -> int:
        if self._orders is None:
            self._orders = [0] * self.order
        if not self._orders[a]:
            k, x = 1, a
            while x:
                x = self.table[x][a]
                k += 1
            self._orders[a] = k
        return self._orders[a]

    def order_statistics(self) -> list:
        return sorted(Counter(self.element_order(i) for i in range(self.order)).items())

    def subgroup(self, gens: Sequence[int]) -> set:
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = self.table[x][g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen

    def conjugate(self, c: int, x: int) -> int:
        return self.table[self.table[c][x]][self.inverse[c]]

    def small_generating_set(self) -> list:
        out = []
        span = {0}
        for g in self.generators:
            if g not in span:
                out.append(g)
                span = self.subgroup(out)
                if len(span) == self.order:
                    break
        return out

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a] for a in self.generators for b in self.generators)

    def to_json(self) -> dict:
        out = {"order": self.order, "table": self.table, "generators": list(self.generators)}
        if self.labels is not None:
            out["labels"] = self.labels
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteGroup":
        return cls(doc["table"], doc["generators"], doc.get("labels"))

    # standard examples ------------------------------------------------------------
    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls([[(a + b) % n for b in range(n)] for a in range(n)], [1 % n] if n > 1 else [0])

    @classmethod
    def abelian(cls, moduli: Sequence[int]) -> "FiniteGroup":
        elems = [()]
        for m in moduli:
            elems = [e + (x,) for e in elems for x in range(m)]
        index = {e: i for i, e in enumerate(elems)}
        table = [[index[tuple((x + y) % m for x, y, m in zip(a, b, moduli))] for b in elems] for a in elems]
        gens = [index[tuple(int(i == j) for j in range(len(moduli)))] for i in range(len(moduli))]
        return cls(table, gens or [0])

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]]) -> "FiniteGroup":
        deg = len(gens[0])
        ident = tuple(range(deg))
        elems = [ident]
        index = {ident: 0}
        queue = deque([ident])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = tuple(g[x[i]] for i in range(deg))  # x then g
                if y not in index:
                    index[y] = len(elems)
                    elems.append(y)
                    queue.append(y)
        comp = lambda a, b: tuple(b[a[i]] for i in range(deg))  # a then b
        table = [[index[comp(a, b)] for b in elems] for a in elems]
        return cls(table, [index[tuple(g)] for g in gens])

    @classmethod
    def symmetric(cls, n: int) -> "FiniteGroup":
        if n < 2:
            return cls([[0]], [0])
        gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
        return cls.from_permutations(gens)


def direct_product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    nb = b.order
    table = [[a.table[i // nb][j // nb] * nb + b.table[i % nb][j % nb]
              for j in range(a.order * nb)] for i in range(a.order * nb)]
    gens = [g * nb for g in a.generators] + list(b.generators)
    return FiniteGroup(table, gens)


# -- quotients of crystallographic groups -----------------------------------------------

def quotient_by_sublattice(g: CrystalGroup, sub: Lattice) -> FiniteGroup:
    """The finite group G / sub for a point-stable sublattice of finite index.

    ``sub`` is given in ambient coordinates.  Element ``p * R + r`` is the
    coset of the lift of point element p shifted by residue r of
    ``Z^n / sub`` (lattice coordinates), so the identity is element 0.
    """
    n = g.rank
    coords = []
    for c in sub.basis:
        x = g.lattice.coordinates(c)
        if x is None:
            raise ValueError("sublattice is not contained in the translation lattice")
        coords.append(x)
    if len(coords) != n:
        raise ValueError("sublattice does not have finite index")
    lsub = Lattice.from_generators(coords, n)
    for m in g.gens:
        if not lsub.is_stable(m):
            raise ValueError("sublattice is not stable under the point group")
    quo = LatticeQuotient(lsub, Lattice.standard(n))
    res_list = quo.elements()
    res_index = {r: i for i, r in enumerate(res_list)}
    R = len(res_list)
    mod = quo.moduli

    def res(v) -> int:
        return res_index[quo.residue(tuple(int(x) for x in v))]

    pg = g.point
    P = pg.order
    tau = g.vector_system
    lifts = [quo.lift(r) for r in res_list]
    add = [[res_index[tuple((x + y) % m for x, y, m in zip(a, b, mod))] for b in res_list] for a in res_list]
    act = [[res(matvec(pg.matrix(p), lifts[s])) for s in range(R)] for p in range(P)]
    table = [[0] * (P * R) for _ in range(P * R)]
    for p in range(P):
        mp = pg.matrix(p)
        for q in range(P):
            pq = pg.mul(p, q)
            z = [a + b - c for a, b, c in zip(tau[p], matvec(mp, tau[q]), tau[pq])]
            if any(x.denominator != 1 for x in z):
                raise ValueError("vector system fails the cocycle condition")
            zr = res(z)
            base = pq * R
            actp = act[p]
            for r in range(R):
                row = table[p * R + r]
                addr = add[r]
                for s in range(R):
                    row[q * R + s] = base + add[addr[actp[s]]][zr]
    gens = []
    for j, gi in enumerate(pg.gen_indices):
        diff = [a - b for a, b in zip(g.taus[j], tau[gi])]
        gens.append(gi * R + res(diff))
    gens += [res(tuple(int(i == k) for k in range(n))) for i in range(n)]
    labels = [f"p{p}+r{res_list[r]}" for p in range(P) for r in range(R)]
    return FiniteGroup(table, gens, labels)


# -- homomorphism search -------------------------------------------------------------------

@dataclass(frozen=True)
class Hom:
    images: tuple  # target element index per source generator

    def to_json(self) -> list:
        return list(self.images)


def evaluate_in(t: FiniteGroup, word, images) -> int:
    x = 0
    tab, inv = t.table, t.inverse
    for gi, e in word:
        y = images[gi]
        x = tab[x][y if e == 1 else inv[y]]
    return x


def is_hom(p: FinPres, t: FiniteGroup, images) -> bool:
    return all(evaluate_in(t, r, images) == 0 for r in p.relators)


def is_surjective(t: FiniteGroup, images) -> bool:
    return len(t.subgroup(list(images))) == t.order


def _power_constraints(p: FinPres) -> dict:
    """gen -> m such that the image order must divide m (from relators g^m)."""
    out = {}
    for r in p.relators:
        w = _free_reduce(list(r))
        gens = {x for x, _ in w}
        if len(gens) == 1 and w:
            gi = w[0][0]
            m = abs(sum(e for _, e in w))
            if m:
                out[gi] = gcd(out.get(gi, 0), m)
    return out


class HomSearch:
    """Backtracking over generator images in generator order, candidates ascending.

    Pruning: image orders restricted by power relators, each relator is
    evaluated as soon as all its generators are assigned, and a generator
    occurring once in a relator whose other generators are assigned is
    solved for directly.  With ``break_symmetry`` a candidate must be the
    least element of its orbit under the centralizer of the images already
    chosen; since the solution set is closed under conjugation this keeps the
    lexicographically least solution.
    """

    def __init__(self, p: FinPres, t: FiniteGroup, budget: int = 10 ** 7,
                 surjective: bool = True, break_symmetry: bool = True):
        self.p, self.t = p, t
        self.budget = budget
        self.surjective = surjective
        self.break_symmetry = break_symmetry
        self.nodes = 0
        self.complete = False
        k = len(p.generators)
        self.k = k
        self.check_at = [[] for _ in range(k)]
        self.force_at = [[] for _ in range(k)]
        for r in p.relators:
            w = _free_reduce(list(r))
            if not w:
                continue
            top = max(x for x, _ in w)
            self.check_at[top].append(w)
            occ = [i for i, (x, _) in enumerate(w) if x == top]
            if len(occ) == 1:
                i = occ[0]
                self.force_at[top].append((w[:i], w[i][1], w[i + 1:]))
        cons = _power_constraints(p)
        self.candidates = []
        for gi in range(k):
            m = cons.get(gi)
            if m is None:
                self.candidates.append(list(range(t.order)))
            else:
                self.candidates.append([x for x in range(t.order) if m % t.element_order(x) == 0])

    def _forced(self, d: int, images) -> Optional[int]:
        t = self.t
        for u, e, v in self.force_at[d]:
            a = evaluate_in(t, u, images)
            b = evaluate_in(t, v, images)
            val = t.mul(t.inverse[a], t.inverse[b])
            return val if e == 1 else t.inverse[val]
        return None

    def run(self, first_only: bool) -> list:
        t, k = self.t, self.k
        images = [0] * k
        found = []
        if k == 0:
            self.complete = True
            ok = (not self.surjective) or t.order == 1
            return [Hom(())] if ok and all(not r for r in self.p.relators) else []
        cand_set = [set(c) for c in self.candidates]

        def rec(d: int, cent: list) -> bool:
            forced = self._forced(d, images)
            if forced is not None:
                cands = [forced] if forced in cand_set[d] else []
            else:
                cands = self.candidates[d]
            for x in cands:
                self.nodes += 1
                if self.nodes > self.budget:
                    raise BudgetExceeded(f"search exceeded {self.budget} nodes")
                if self.break_symmetry and any(t.conjugate(c, x) < x for c in cent):
                    continue
                images[d] = x
                if any(evaluate_in(t, w, images) != 0 for w in self.check_at[d]):
                    continue
                if d + 1 == k:
                    if not self.surjective or is_surjective(t, images):
                        found.append(Hom(tuple(images)))
                        if first_only:
                            return True
                    continue
                nxt = [c for c in cent if t.conjugate(c, x) == x] if self.break_symmetry else cent
                if rec(d + 1, nxt):
                    return True
            images[d] = 0
            return False

        rec(0, list(range(t.order)) if self.break_symmetry else [])
        self.complete = True
        return found


def epimorphism_exists(p: FinPres, t: FiniteGroup, budget: int = 10 ** 7) -> Optional[Hom]:
    """The lexicographically least surjective homomorphism, or None if none exists.

    Raises ``BudgetExceeded`` when the node budget runs out first, which is
    inconclusive and distinct from a proof of nonexistence.
    """
    res = HomSearch(p, t, budget).run(first_only=True)
    return res[0] if res else None


def all_homs(p: FinPres, t: FiniteGroup, budget: int = 10 ** 7) -> list:
    return HomSearch(p, t, budget, surjective=False, break_symmetry=False).run(first_only=False)


def isomorphic_finite(a: FiniteGroup, b: FiniteGroup, budget: int = 10 ** 7) -> bool:
    """Generator-image backtracking with element-order pruning."""
    if a.order != b.order or a.order_statistics() != b.order_statistics():
        return False
    if a.is_abelian() != b.is_abelian():
        return False
    gens = a.small_generating_set()
    if not gens:
        return True
    by_order = {}
    for x in range(b.order):
        by_order.setdefault(b.element_order(x), []).append(x)
    cands = [by_order.get(a.element_order(g), []) for g in gens]
    pair = {(i, j): a.element_order(a.mul(gens[i], gens[j])) for i in range(len(gens)) for j in range(i)}
    # BFS tree of a over the chosen generators
    parent = {0: None}
    order = [0]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for j, g in enumerate(gens):
            y = a.mul(x, g)
            if y not in parent:
                parent[y] = (x, j)
                order.append(y)
                queue.append(y)
    chosen = []
    nodes = 0

    def extend() -> bool:
        phi = {0: 0}
        for y in order[1:]:
            x, j = parent[y]
            phi[y] = b.mul(phi[x], chosen[j])
        if len(set(phi.values())) != a.order:
            return False
        return all(phi[a.mul(x, g)] == b.mul(phi[x], chosen[j])
                   for x in range(a.order) for j, g in enumerate(gens))

    def rec(d: int) -> bool:
        nonlocal nodes
        if d == len(gens):
            return extend()
        for c in cands[d]:
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("isomorphism search exceeded its budget")
            if all(b.element_order(b.mul(c, chosen[j])) == pair[(d, j)] for j in range(d)):
                chosen.append(c)
                if rec(d + 1):
                    return True
                chosen.pop()
        return False

    return rec(0)


def cayley_presentation(t: FiniteGroup) -> FinPres:
    """Presentation of a finite group from its Cayley graph on the designated generators."""
    gens = list(t.generators)
    parent = {0: None}
    order = [0]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for j, g in enumerate(gens):
            y = t.mul(x, g)
            if y not in parent:
                parent[y] = (x, j)
                order.append(y)
                queue.append(y)

    def word(x):
        out = []
        while parent[x] is not None:
            x, j = parent[x]
            out.append(j)
        return out[::-1]

    rels = []
    for x in order:
        for j, g in enumerate(gens):
            y = t.mul(x, g)
            if parent[y] == (x, j):
                continue
            w = [(a, 1) for a in word(x)] + [(j, 1)] + [(a, -1) for a in reversed(word(y))]
            w = _free_reduce(w)
            if w:
                rels.append(tuple(w))
    return FinPres(tuple(f"g{j + 1}" for j in range(len(gens))), tuple(rels))
