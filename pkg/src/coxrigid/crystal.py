"""Crystallographic groups ``1 -> Z^n -> G -> P -> 1`` in lattice coordinates.

A group is given by a full-rank translation lattice inside an ambient
``Z^n``, generators of the point group (ambient matrices that stabilize the
lattice) and the translation parts of the chosen generator lifts.  All
computations happen in the coordinates of the lattice basis, where the
translation subgroup is exactly ``Z^n`` and the point matrices are integral.

Faithfulness of the point action is the computable form of the
crystallographic criterion: the kernel of the action of a group with a
finite-index free abelian normal subgroup is a finite normal subgroup, and
conversely a finite normal subgroup centralizes the translations, so its
point parts act trivially.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import groupby, product
from math import lcm
from typing import Optional, Sequence

from .graphs import (INF, ComponentType, CoxeterGraph, FinPres, affine_graph,
                     coxeter_presentation)
from .linalg import (AbelianInvariants, Lattice, Matrix, as_matrix, cokernel_invariants,
                     columns, from_columns, hnf_columns, identity, kernel, matmul, matvec,
                     rational_inverse, rational_nullspace, rational_rank, solve_integer,
                     transpose)
from .rootdata import RootDatum, build_root_datum, highest_root, root_system


class BudgetExceeded(RuntimeError):
    """A bounded search or enumeration stopped before completion."""


class UndecidedError(ArithmeticError):
    """A decision procedure could not settle the instance."""


def _mat_inv_int(m: Matrix) -> Matrix:
    inv = rational_inverse(m)
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular")
    return tuple(tuple(int(x) for x in row) for row in inv)


def _trace(m: Matrix) -> int:
    return sum(m[i][i] for i in range(len(m)))


# -- point groups ----------------------------------------------------------------

def enumerate_point_group(gens: Sequence[Matrix], budget: int = 100000) -> list:
    """All elements of the matrix group generated by ``gens``, sorted."""
    gens = [as_matrix(g) for g in gens]
    if not gens:
        raise ValueError("at least one generator is needed to fix the degree")
    n = len(gens[0])
    seen = {identity(n)}
    frontier = [identity(n)]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = matmul(x, g)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > budget:
                        raise BudgetExceeded(f"point group has more than {budget} elements")
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


class PointGroup:
    """A finite group with a matrix for each element; element 0 is the identity.

    Built either lazily from generator matrices (the matrix group itself, so
    faithful by construction) or from an explicit multiplication table, which
    may describe an unfaithful action.
    """

    def __init__(self, gens: Sequence[Matrix], budget: int = 100000):
        self.gens_matrices = tuple(as_matrix(g) for g in gens)
        if not self.gens_matrices:
            raise ValueError("point group needs at least one generator")
        self.degree = len(self.gens_matrices[0])
        self.budget = budget
        self._table = None
        self._built = False

    @classmethod
    def from_table(cls, matrices: Sequence[Matrix], table: Sequence[Sequence[int]],
                   gens: Sequence[int]) -> "PointGroup":
        pg = cls.__new__(cls)
        pg.gens_matrices = tuple(as_matrix(matrices[i]) for i in gens)
        pg.degree = len(matrices[0])
        pg.budget = len(matrices)
        pg._table = [list(r) for r in table]
        pg._gen_idx = tuple(gens)
        pg._mats = [as_matrix(m) for m in matrices]
        pg._index = None
        pg._built = False
        pg._build_from_table()
        return pg

    # construction ------------------------------------------------------------
    def _build(self) -> None:
        if self._built:
            return
        n = self.degree
        ident = identity(n)
        order = [ident]
        index = {ident: 0}
        rmul = [[None] * len(self.gens_matrices)]
        parent = [None]
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j, g in enumerate(self.gens_matrices):
                y = matmul(order[i], g)
                k = index.get(y)
                if k is None:
                    k = len(order)
                    if k >= self.budget:
                        raise BudgetExceeded(f"point group has more than {self.budget} elements")
                    index[y] = k
                    order.append(y)
                    rmul.append([None] * len(self.gens_matrices))
                    parent.append((i, j))
                    queue.append(k)
                rmul[i][j] = k
        # canonical order: identity first, then lexicographic
        perm = [0] + sorted(range(1, len(order)), key=lambda i: order[i])
        new_of = {old: new for new, old in enumerate(perm)}
        self._mats = [order[i] for i in perm]
        self._index = {m: i for i, m in enumerate(self._mats)}
        self._rmul = [[new_of[rmul[old][j]] for j in range(len(self.gens_matrices))] for old in perm]
        self._gen_idx = tuple(self._index[g] for g in self.gens_matrices)
        self._bfs_tree()
        self._built = True

    def _build_from_table(self) -> None:
        t = self._table
        self._rmul = [[t[i][g] for g in self._gen_idx] for i in range(len(t))]
        self._bfs_tree()
        self._built = True

    def _bfs_tree(self) -> None:
        size = len(self._mats)
        parent = [None] * size
        depth = [0] * size
        seen = [False] * size
        seen[0] = True
        order = [0]
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in range(len(self._gen_idx)):
                k = self._rmul[i][j]
                if not seen[k]:
                    seen[k] = True
                    parent[k] = (i, j)
                    depth[k] = depth[i] + 1
                    order.append(k)
                    queue.append(k)
        if not all(seen):
            raise ValueError("designated generators do not generate the group")
        self._parent = parent
        self._bfs_order = order

    # queries -------------------------------------------------------------------
    @property
    def order(self) -> int:
        self._build()
        return len(self._mats)

    @property
    def matrices(self) -> list:
        self._build()
        return self._mats

    @property
    def gen_indices(self) -> tuple:
        self._build()
        return self._gen_idx

    @property
    def ngens(self) -> int:
        return len(self.gens_matrices)

    def matrix(self, i: int) -> Matrix:
        self._build()
        return self._mats[i]

    def index_of(self, m: Matrix) -> int:
        self._build()
        if self._index is None:
            self._index = {}
            for i, x in enumerate(self._mats):
                self._index.setdefault(x, i)
        return self._index[as_matrix(m)]

    def right_gen(self, i: int, j: int) -> int:
        self._build()
        return self._rmul[i][j]

    def mul(self, i: int, j: int) -> int:
        self._build()
        if self._table is not None:
            return self._table[i][j]
        if self._index is None:
            raise RuntimeError("table-free group without index")
        return self._index[matmul(self._mats[i], self._mats[j])]

    def inverse(self, i: int) -> int:
        self._build()
        if self._table is not None:
            return next(j for j in range(self.order) if self._table[i][j] == 0)
        return self._index[_mat_inv_int(self._mats[i])]

    def word(self, i: int) -> tuple:
        """Generator indices w with element i = g_w[0] g_w[1] ..."""
        self._build()
        out = []
        while self._parent[i] is not None:
            i, j = self._parent[i]
            out.append(j)
        return tuple(reversed(out))

    def element_order(self, i: int) -> int:
        k, x = 1, i
        while x != 0:
            x = self.mul(x, i)
            k += 1
        return k

    def cayley_relators(self) -> list:
        """Relators ``word(g) s word(g s)^-1`` for the non-tree edges."""
        self._build()
        rels = []
        for i in range(self.order):
            for j in range(self.ngens):
                k = self._rmul[i][j]
                if self._parent[k] == (i, j):
                    continue
                w = [(a, 1) for a in self.word(i)] + [(j, 1)] + [(a, -1) for a in reversed(self.word(k))]
                rels.append(tuple(_free_reduce(w)))
        return [r for r in rels if r]

    def is_faithful(self) -> bool:
        self._build()
        return len(set(self._mats)) == len(self._mats)

    def table_consistent(self) -> bool:
        """Whether the element matrices form a homomorphic image of the table."""
        self._build()
        if self._table is None:
            return True
        m = self._mats
        return all(matmul(m[i], m[j]) == m[self._table[i][j]]
                   for i in range(self.order) for j in range(self.order))

    def character_data(self) -> list:
        """Sorted list of (element order, trace, multiplicity)."""
        c = Counter((self.element_order(i), _trace(self._mats[i])) for i in range(self.order))
        return sorted((o, t, k) for (o, t), k in c.items())


def _free_reduce(word) -> list:
    out = []
    for letter in word:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return out


# -- affine elements ---------------------------------------------------------------

@dataclass(frozen=True)
class AffineElement:
    """The map ``x -> point x + translation`` in lattice coordinates."""

    point: Matrix
    translation: tuple  # Fractions

    @classmethod
    def make(cls, point, translation) -> "AffineElement":
        return cls(as_matrix(point), tuple(Fraction(x) for x in translation))

    @classmethod
    def identity(cls, n: int) -> "AffineElement":
        return cls(identity(n), (Fraction(0),) * n)

    @classmethod
    def pure_translation(cls, t) -> "AffineElement":
        return cls(identity(len(t)), tuple(Fraction(x) for x in t))

    def __mul__(self, other: "AffineElement") -> "AffineElement":
        t = matvec(self.point, other.translation)
        return AffineElement(matmul(self.point, other.point),
                             tuple(a + b for a, b in zip(self.translation, t)))

    def inverse(self) -> "AffineElement":
        inv = _mat_inv_int(self.point)
        return AffineElement(inv, tuple(-x for x in matvec(inv, self.translation)))

    def __pow__(self, k: int) -> "AffineElement":
        base = self if k >= 0 else self.inverse()
        if base.is_translation():
            return AffineElement(base.point, tuple(abs(k) * x for x in base.translation))
        out = AffineElement.identity(len(self.point))
        k = abs(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_identity(self) -> bool:
        return self.point == identity(len(self.point)) and not any(self.translation)

    def is_translation(self) -> bool:
        return self.point == identity(len(self.point))

    def order(self, bound: int = 1000):
        """Order of the element, or INF when some power is a nonzero translation."""
        x = self
        for k in range(1, bound + 1):
            if x.is_translation():
                return k if not any(x.translation) else INF
            x = x * self
        raise BudgetExceeded("element order exceeds bound")

    def apply(self, v) -> tuple:
        return tuple(a + b for a, b in zip(matvec(self.point, v), self.translation))

    def to_json(self) -> dict:
        return {"point": [list(r) for r in self.point], "translation": [str(x) for x in self.translation]}


def evaluate_word(word, images: Sequence[AffineElement], n: int) -> AffineElement:
    """Product of the images along the word; runs of one letter become a single power."""
    out = AffineElement.identity(n)
    for (g, e), run in groupby(word):
        out = out * images[g] ** (e * len(list(run)))
    return out


# -- the group ------------------------------------------------------------------------

@dataclass(eq=False)
class CrystalGroup:
    """Translation lattice, point generators and generator lift translations.

    ``point_gens`` and ``tau_gens`` are in ambient coordinates; the derived
    attributes ``gens`` and ``taus`` are in lattice coordinates.
    ``point_relators`` optionally gives words in the point generators known to
    present the point group (for example Coxeter relators of a Weyl group).
    """

    lattice: Lattice
    point_gens: tuple
    tau_gens: tuple
    point_relators: Optional[tuple] = None
    known_point_order: Optional[int] = None
    provenance: dict = field(default_factory=lambda: {"source": "manual"})
    source_presentation: Optional[FinPres] = None
    source_images: Optional[tuple] = None
    budget: int = 100000
    _table_point: Optional[PointGroup] = None

    def __post_init__(self):
        if not self.lattice.is_full_rank() or self.lattice.rank == 0:
            raise ValueError("translation lattice must have full rank >= 1")
        n = self.lattice.rank
        self.point_gens = tuple(as_matrix(m) for m in self.point_gens)
        if not self.point_gens:
            self.point_gens = (identity(n),)
            self.tau_gens = ((0,) * n,)
        self.tau_gens = tuple(tuple(Fraction(x) for x in t) for t in self.tau_gens)
        if len(self.tau_gens) != len(self.point_gens):
            raise ValueError("one translation part per point generator is required")
        for m in self.point_gens:
            if len(m) != n or any(len(r) != n for r in m):
                raise ValueError("point generator has the wrong size")
            if not self.lattice.is_stable(m):
                raise ValueError("point generator does not stabilize the translation lattice")
        b = self.lattice.matrix()
        binv = rational_inverse(b)
        self._b, self._binv = b, binv
        self.gens = tuple(self._to_lattice_matrix(m) for m in self.point_gens)
        self.taus = tuple(tuple(sum(binv[i][k] * t[k] for k in range(n)) for i in range(n))
                          for t in self.tau_gens)
        mod = 1
        for t in self.taus:
            for x in t:
                mod = lcm(mod, x.denominator)
        self.modulus = mod
        self._tau_all = None
        self._cocycle_ok = None

    def _to_lattice_matrix(self, m: Matrix) -> Matrix:
        n = self.rank
        bm = matmul(m, self._b)
        out = [[sum(self._binv[i][k] * bm[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        return as_matrix(out)

    def to_ambient(self, x: AffineElement) -> tuple:
        """(ambient matrix, ambient translation) of a lattice-coordinate element."""
        n = self.rank
        m = matmul(matmul(self._b, x.point), tuple(tuple(row) for row in self._binv))
        t = tuple(sum(self._b[i][k] * x.translation[k] for k in range(n)) for i in range(n))
        return tuple(tuple(Fraction(v) for v in r) for r in m), t

    @property
    def rank(self) -> int:
        return self.lattice.rank

    @property
    def point(self) -> PointGroup:
        if self._table_point is not None:
            return self._table_point
        if not hasattr(self, "_point"):
            self._point = PointGroup(self.gens, self.budget)
        return self._point

    def generator_lifts(self) -> list:
        return [AffineElement(m, t) for m, t in zip(self.gens, self.taus)]

    def translation(self, i: int) -> AffineElement:
        return AffineElement.pure_translation([int(k == i) for k in range(self.rank)])

    @property
    def vector_system(self) -> list:
        """tau(p) for every point element (lattice coordinates, Fractions)."""
        if self._tau_all is None:
            self._compute_tau()
        return self._tau_all

    def _compute_tau(self) -> None:
        pg = self.point
        n = self.rank
        size = pg.order
        tau = [None] * size
        tau[0] = (Fraction(0),) * n
        for k in pg._bfs_order[1:]:
            i, j = pg._parent[k]
            tau[k] = tuple(a + b for a, b in zip(tau[i], matvec(pg.matrix(i), self.taus[j])))
        ok = all(x.denominator == 1 for x in self._relator_translation_check(tau))
        self._tau_all = tau
        self._cocycle_ok = ok

    def _relator_translation_check(self, tau) -> list:
        pg = self.point
        out = []
        for i in range(pg.order):
            for j in range(pg.ngens):
                k = pg.right_gen(i, j)
                lhs = tuple(a + b for a, b in zip(tau[i], matvec(pg.matrix(i), self.taus[j])))
                out.extend(a - b for a, b in zip(lhs, tau[k]))
        return out

    def lift(self, p: int) -> AffineElement:
        return AffineElement(self.point.matrix(p), self.vector_system[p])

    def cocycle_holds(self) -> bool:
        self.vector_system
        return bool(self._cocycle_ok)

    def point_order(self) -> int:
        if self._table_point is None and self.known_point_order is not None and not hasattr(self, "_point"):
            return self.known_point_order
        return self.point.order

    def point_presentation_relators(self) -> list:
        if self.point_relators is not None:
            return list(self.point_relators)
        return self.point.cayley_relators()

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "lattice": self.lattice.to_json(),
            "point_generators": [[[str(x) for x in r] for r in m] for m in self.point_gens],
            "vector_system": [[str(x) for x in t] for t in self.tau_gens],
            "provenance": self.provenance,
        }


def group_from_json(doc: dict, budget: int = 100000) -> CrystalGroup:
    try:
        n = int(doc["rank"])
        lat = Lattice.from_generators([[int(x) for x in c] for c in doc["lattice"]], n)
        gens = [[[int(x) for x in r] for r in m] for m in doc["point_generators"]]
        taus = doc.get("vector_system") or [[0] * n for _ in gens]
        taus = [[Fraction(x) for x in t] for t in taus]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed group document: {exc}") from exc
    return CrystalGroup(lat, tuple(gens), tuple(taus), provenance=doc.get("provenance", {"source": "manual"}),
                        budget=budget)


def crystal_from_table(lattice: Lattice, matrices: Sequence[Matrix], table, gens: Sequence[int],
                       taus: Sequence) -> CrystalGroup:
    """A group whose point group is given abstractly by a multiplication table.

    ``matrices[i]`` is the (ambient) action of element i and ``taus`` gives the
    translation parts of the generator lifts.  Used for data whose point
    action might not be faithful.
    """
    g = CrystalGroup(lattice, tuple(matrices[i] for i in gens), tuple(taus))
    lat_mats = [g._to_lattice_matrix(as_matrix(m)) for m in matrices]
    g._table_point = PointGroup.from_table(lat_mats, table, gens)
    return g


# -- constructors ----------------------------------------------------------------

def semidirect(lattice: Lattice, point_gens: Sequence[Matrix], point_relators=None,
               known_point_order=None, provenance=None, budget: int = 100000) -> CrystalGroup:
    """The split extension ``lattice x| <point_gens>``."""
    for m in point_gens:
        if not lattice.is_stable(as_matrix(m)):
            raise ValueError("point generator does not stabilize the lattice")
    n = lattice.ambient_rank
    g = CrystalGroup(lattice, tuple(point_gens), tuple((0,) * n for _ in point_gens),
                     point_relators=point_relators, known_point_order=known_point_order,
                     provenance=provenance or {"source": "manual"}, budget=budget)
    if known_point_order is None and point_relators is None:
        g.point.order  # enforce the enumeration budget now
    return g


def translation_group(n: int) -> CrystalGroup:
    return semidirect(Lattice.standard(n), [identity(n)], point_relators=(((0, 1),),),
                      known_point_order=1, provenance={"source": "manual", "name": f"Z^{n}"})


def weyl_order(kind: str, n: int) -> int:
    from math import factorial
    if kind == "A":
        return factorial(n + 1)
    if kind in ("B", "C"):
        return 2 ** n * factorial(n)
    if kind == "D":
        return 2 ** (n - 1) * factorial(n)
    return {"E6": 51840, "E7": 2903040, "E8": 696729600, "F4": 1152, "G2": 12}[kind]


def weyl_relators(rd: RootDatum) -> tuple:
    orders = rd.coxeter_orders()
    rels = [((i, 1), (i, 1)) for i in range(rd.rank)]
    for i in range(rd.rank):
        for j in range(i + 1, rd.rank):
            rels.append(((i, 1), (j, 1)) * orders[i][j])
    return tuple(rels)


def _finite_kind(t: ComponentType) -> tuple:
    if t.kind == "I1":
        return "A", 1
    return t.kind, t.rank


def build_affine_coxeter(t: ComponentType):
    """(crystal model, Coxeter presentation, generator dictionary) for an affine type.

    The model is ``Qv x| W`` in the root datum's ambient; the extra Coxeter
    generator is the affine reflection in the highest root.  The dictionary
    maps each vertex of the template graph to an ``AffineElement`` in lattice
    coordinates; relators and generation are verified before returning.
    """
    if t.family != "affine":
        raise ValueError("build_affine_coxeter needs an affine type")
    kind, n = _finite_kind(t)
    rd = build_root_datum(kind, n)
    group = semidirect(rd.Qv, rd.weyl_gens, point_relators=weyl_relators(rd),
                       known_point_order=weyl_order(kind, n),
                       provenance={"source": "graph", "type": t.name})
    theta, theta_v, s_theta = highest_root(rd)
    lifts = group.generator_lifts()
    if theta_v not in rd.Qv:
        raise AssertionError("highest coroot is not a translation of the model")
    tc = rd.Qv.coordinates(theta_v)
    s0 = AffineElement(group._to_lattice_matrix(s_theta), tuple(Fraction(x) for x in tc))
    elements = {"s0": s0}
    for i in range(n):
        elements[f"s{i + 1}"] = lifts[i]
    derived = _derived_graph(elements)
    template = affine_graph(t)
    mapping = _prefer_identity(derived, template)
    if mapping is None:
        raise AssertionError(f"affine generators do not realize the {t.name} graph")
    images = {mapping[v]: elements[v] for v in elements}
    pres = coxeter_presentation(template)
    for r in pres.relators:
        if not evaluate_word(r, [images[v] for v in pres.generators], n).is_identity():
            raise AssertionError(f"relator {pres.word_str(r)} fails in the model")
    # generation: W from the simple reflections; translations from s0 s_theta^-1
    # and its W-conjugates, which are the coroots of the long roots
    trans = s0 * AffineElement(s0.point, (Fraction(0),) * n).inverse()
    if not trans.is_translation() or tuple(trans.translation) != tuple(Fraction(x) for x in tc):
        raise AssertionError("s0 is not the highest-root reflection")
    theta_len = _sqnorm(rd, theta)
    orbit = [c for a, c, m in root_system(rd) if _sqnorm(rd, a) == theta_len]
    if Lattice.from_generators(orbit, n) != rd.Qv:
        raise AssertionError("translations from the affine generator do not span the lattice")
    group.source_presentation = pres
    group.source_images = tuple(images[v] for v in pres.generators)
    return group, pres, images


def _sqnorm(rd: RootDatum, v) -> Fraction:
    g = rd.gram
    return sum(Fraction(g[i][j]) * v[i] * v[j] for i in range(len(v)) for j in range(len(v)))


def _derived_graph(elements: dict) -> CoxeterGraph:
    names = sorted(elements)
    edges = []
    for i, u in enumerate(names):
        for v in names[i + 1:]:
            o = (elements[u] * elements[v]).order()
            if o is INF or o >= 3:
                edges.append((u, v, o))
    return CoxeterGraph.build(names, edges)


def _prefer_identity(g: CoxeterGraph, h: CoxeterGraph) -> Optional[dict]:
    if g == h:
        return {v: v for v in g.vertices}
    from networkx.algorithms.isomorphism import GraphMatcher
    gm = GraphMatcher(g.to_networkx(), h.to_networkx(), edge_match=lambda a, b: a["m"] == b["m"])
    best = None
    for m in gm.isomorphisms_iter():
        key = (m.get("s0") != "s0", sum(a != b for a, b in m.items()))
        if best is None or key < best[0]:
            best = (key, dict(m))
    return None if best is None else best[1]


# -- presentations and abelianization ---------------------------------------------------

def _translation_word(c, offset: int) -> list:
    w = []
    for i, x in enumerate(c):
        x = int(x)
        w += [(offset + i, 1 if x > 0 else -1)] * abs(x)
    return w


def _inverse_word(w) -> list:
    return [(g, -e) for g, e in reversed(w)]


def presentation(g: CrystalGroup) -> FinPres:
    """Presentation on point generator lifts w1..wk followed by translations t1..tn.

    Relators: commutators of translations, point relators corrected by their
    translation values, and conjugation relators ``w t_i w^-1 = t^(M e_i)``.
    Every relator is checked by evaluation in the group.
    """
    n, k = g.rank, len(g.gens)
    names = tuple(f"w{j + 1}" for j in range(k)) + tuple(f"t{i + 1}" for i in range(n))
    lifts = g.generator_lifts()
    images = lifts + [g.translation(i) for i in range(n)]
    rels = []
    for i in range(n):
        for j in range(i + 1, n):
            rels.append(((k + i, 1), (k + j, 1), (k + i, -1), (k + j, -1)))
    for r in g.point_presentation_relators():
        val = evaluate_word(r, lifts, n)
        if not val.is_translation() or any(x.denominator != 1 for x in val.translation):
            raise ValueError("point relator does not evaluate to a lattice translation")
        word = list(r) + _inverse_word(_translation_word(val.translation, k))
        rels.append(tuple(word))
    for j, m in enumerate(g.gens):
        for i in range(n):
            img = [m[a][i] for a in range(n)]
            word = [(j, 1), (k + i, 1), (j, -1)] + _inverse_word(_translation_word(img, k))
            rels.append(tuple(word))
    rels += _expression_relators(g, k)
    reduced = (tuple(_free_reduce(r)) for r in rels)
    pres = FinPres(names, tuple(r for r in reduced if r))
    for r in pres.relators:
        if not evaluate_word(r, images, n).is_identity():
            raise AssertionError(f"relator {pres.word_str(r)} fails")
    return pres


_EXPRESSION_MAX_LENGTH = 64


def _expression_relators(g: CrystalGroup, k: int) -> list:
    """Consequence relators writing t_i through conjugates of t_1 and earlier t_j.

    They add nothing to the group but let a homomorphism search solve for
    each later translation image once the point images and t_1 are fixed.
    """
    n = g.rank
    if n < 2 or g.point_order() > 5000:
        return []
    pg = g.point
    orbit = {}
    for p in range(pg.order):
        v = tuple(row[0] for row in pg.matrix(p))
        if v not in orbit:
            orbit[v] = p
    vecs = sorted(orbit)
    rels = []
    for i in range(1, n):
        cols = vecs + [tuple(int(a == j) for a in range(n)) for j in range(1, i)]
        sol = solve_integer(from_columns(cols, n), [int(a == i) for a in range(n)])
        if sol is None:
            continue
        word = []
        for c, v in zip(sol, cols[:len(vecs)]):
            w = [(a, 1) for a in pg.word(orbit[v])]
            piece = w + [(k, 1)] + _inverse_word(w)
            word += (piece if c > 0 else _inverse_word(piece)) * abs(c)
        for c, j in zip(sol[len(vecs):], range(1, i)):
            word += [(k + j, 1 if c > 0 else -1)] * abs(c)
        word = _free_reduce(word + [(k + i, -1)])
        if len(word) <= _EXPRESSION_MAX_LENGTH * n:
            rels.append(tuple(word))
    return rels


def presentation_images(g: CrystalGroup) -> list:
    return g.generator_lifts() + [g.translation(i) for i in range(g.rank)]


def relation_matrix(p: FinPres) -> Matrix:
    """Exponent sums: one column per relator, one row per generator."""
    k = len(p.generators)
    cols = []
    for r in p.relators:
        c = [0] * k
        for gi, e in r:
            c[gi] += e
        if any(c):
            cols.append(tuple(c))
    return from_columns(cols, k)


def abelianization(p: FinPres) -> AbelianInvariants:
    k = len(p.generators)
    if k == 0:
        return AbelianInvariants()
    cols = columns(relation_matrix(p)) if p.relators else []
    if not cols:
        return AbelianInvariants((), k)
    # shrink to a square-ish HNF basis of the relation lattice first
    basis = hnf_columns(cols, k)
    if not basis:
        return AbelianInvariants((), k)
    return cokernel_invariants(from_columns(basis, k), k)


# -- invariants -----------------------------------------------------------------------

def fixed_lattice(g: CrystalGroup) -> Lattice:
    """Point-fixed translations, in ambient coordinates."""
    n = g.rank
    rows = []
    for m in g.gens:
        for i in range(n):
            rows.append(tuple(m[i][j] - int(i == j) for j in range(n)))
    vecs = kernel(as_matrix(rows), n)
    b = g._b
    return Lattice.from_generators([matvec(b, v) for v in vecs], n)


def fixed_lattice_coordinates(g: CrystalGroup) -> list:
    n = g.rank
    rows = [tuple(m[i][j] - int(i == j) for j in range(n)) for m in g.gens for i in range(n)]
    return kernel(as_matrix(rows), n)


def centre_rank(g: CrystalGroup) -> int:
    return fixed_lattice(g).rank


def _coboundary_matrix(g: CrystalGroup) -> Matrix:
    """Stacked ``(I - M_j)`` for the point generators (nk x n)."""
    n = g.rank
    rows = []
    for m in g.gens:
        for i in range(n):
            rows.append(tuple(int(i == j) - m[i][j] for j in range(n)))
    return as_matrix(rows)


def symmorphic_by_coboundary(g: CrystalGroup) -> bool:
    """Is (tau(s_j))_j in (I - M_j) Q^n + Z^{nk}?"""
    phi = _coboundary_matrix(g)
    tau = [x for t in g.taus for x in t]
    if not any(tau):
        return True
    left = kernel(transpose(phi), len(phi))  # rows y with y phi = 0
    if not left:
        return True
    kmat = as_matrix(left)
    ktau = [sum(Fraction(a) * b for a, b in zip(row, tau)) for row in kmat]
    if any(x.denominator != 1 for x in ktau):
        return False
    return solve_integer(kmat, [int(x) for x in ktau]) is not None


def _power_sum(m: Matrix, order: int) -> Matrix:
    n = len(m)
    acc = [[0] * n for _ in range(n)]
    p = identity(n)
    for _ in range(order):
        for i in range(n):
            for j in range(n):
                acc[i][j] += p[i][j]
        p = matmul(p, m)
    return as_matrix(acc)


def _int_range(lo: Fraction, hi: Fraction) -> range:
    """Integers x with lo < x < hi, widened to include the closed ends."""
    from math import ceil, floor
    return range(ceil(lo), floor(hi) + 1)


def symmorphic_by_subgroup(g: CrystalGroup, node_budget: int = 200000) -> Optional[list]:
    """Search for lifts of the point generators spanning a copy of P.

    A finite subgroup fixes a point b, which may be moved into [0, 1)^n by a
    lattice translation; the generator lifts are then ``(M_j, (I - M_j) b)``,
    which bounds each lift's translation inside an explicit window.  The
    search runs in a reduced basis, where those windows are small.
    Returns the lifts found (lattice coordinates of g), or None when the
    exhaustive search fails.
    """
    red, u = _reduction(g)
    found = _complement_search(red, node_budget)
    if found is None:
        return None
    uinv = _mat_inv_int(u)
    return [AffineElement(matmul(matmul(uinv, e.point), u), matvec(uinv, e.translation)) for e in found]


def _complement_search(g: CrystalGroup, node_budget: int) -> Optional[list]:
    n, pg = g.rank, g.point
    per_gen = []
    for j, (m, t) in enumerate(zip(g.gens, g.taus)):
        d = [[int(i == k) - m[i][k] for k in range(n)] for i in range(n)]
        ranges = []
        for i in range(n):
            lo = sum(min(0, x) for x in d[i]) - t[i]
            hi = sum(max(0, x) for x in d[i]) - t[i]
            ranges.append(_int_range(lo, hi))
        o = pg.element_order(pg.gen_indices[j])
        nsum = _power_sum(m, o)
        cands = []
        for ell in product(*ranges):
            c = tuple(a + b for a, b in zip(t, ell))
            if not any(matvec(nsum, c)):
                cands.append(AffineElement(m, c))
        cands.sort(key=lambda e: (sum(abs(x) for x in e.translation), e.translation))
        per_gen.append(cands)
    rels = g.point_presentation_relators()
    by_max = {}
    for r in rels:
        by_max.setdefault(max(x for x, _ in r), []).append(r)
    k = len(per_gen)
    chosen = [None] * k
    nodes = 0

    def rec(d):
        nonlocal nodes
        if d == k:
            return True
        for c in per_gen[d]:
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded("symmorphic subgroup search exceeded its budget")
            chosen[d] = c
            if all(evaluate_word(r, chosen, n).is_identity() for r in by_max.get(d, [])):
                if rec(d + 1):
                    return True
        chosen[d] = None
        return False

    return list(chosen) if rec(0) else None


def is_symmorphic(g: CrystalGroup, cross_check: Optional[bool] = None) -> bool:
    """Coboundary test; the subgroup search is run as a second route when affordable."""
    a = symmorphic_by_coboundary(g)
    if cross_check is None:
        cross_check = g.rank <= 4 and g.point_order() <= 1152
    if cross_check:
        b = symmorphic_by_subgroup(g) is not None
        if a != b:
            raise AssertionError("symmorphic routes disagree")
    return a


def _prime_order_elements(pg: PointGroup) -> list:
    out = []
    for i in range(1, pg.order):
        o = pg.element_order(i)
        if all(o % p for p in range(2, int(o ** 0.5) + 1)):
            out.append((i, o))
    return out


def _has_finite_lift(g: CrystalGroup, m: Matrix, t, order: int) -> bool:
    nsum = _power_sum(m, order)
    rhs = [-x for x in matvec(nsum, t)]
    if any(Fraction(x).denominator != 1 for x in rhs):
        return False
    return solve_integer(nsum, [int(x) for x in rhs]) is not None


def is_torsion_free(g: CrystalGroup) -> bool:
    """No nontrivial point element admits a lift of finite order."""
    pg = g.point
    # cheap screen: generator lifts themselves
    for j, (m, t) in enumerate(zip(g.gens, g.taus)):
        i = pg.gen_indices[j]
        if i != 0 and _has_finite_lift(g, m, t, pg.element_order(i)):
            return False
    tau = g.vector_system
    for i, o in _prime_order_elements(pg):
        if _has_finite_lift(g, pg.matrix(i), tau[i], o):
            return False
    return True


# -- rational irreducibility -------------------------------------------------------------

def commutant_basis(mats: Sequence[Matrix]) -> list:
    n = len(mats[0])
    rows = []
    for m in mats:
        for i in range(n):
            for j in range(n):
                row = [0] * (n * n)
                # (M X - X M)_{ij}
                for k in range(n):
                    row[k * n + j] += m[i][k]
                    row[i * n + k] -= m[k][j]
                rows.append(row)
    basis = rational_nullspace(rows, n * n)
    return [[[v[i * n + j] for j in range(n)] for i in range(n)] for v in basis]


def _qmatmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def minimal_polynomial(x) -> list:
    """Coefficients (constant first, monic) of the minimal polynomial of a rational matrix."""
    n = len(x)
    powers = [[[Fraction(int(i == j)) for j in range(n)] for i in range(n)]]
    while True:
        flat = [[v for row in p for v in row] for p in powers]
        nxt = _qmatmul(powers[-1], x)
        target = [v for row in nxt for v in row]
        # solve sum c_i flat_i = target
        cols = list(zip(*flat))
        aug = [list(c) + [t] for c, t in zip(cols, target)]
        from .linalg import rref
        red, piv = rref(aug)
        if len(flat) not in piv:
            coeff = [Fraction(0)] * len(flat)
            for row, p in zip(red, piv):
                coeff[p] = row[-1]
            return [-c for c in coeff] + [Fraction(1)]
        powers.append(nxt)


def _factor(coeffs: list) -> list:
    import sympy
    x = sympy.Symbol("x")
    poly = sum(sympy.Rational(c.numerator, c.denominator) * x ** i for i, c in enumerate(coeffs))
    _, factors = sympy.factor_list(poly, x)
    return [[Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1]))
             for c in reversed(sympy.Poly(f, x).all_coeffs())] for f, _ in factors]


def _poly_at(coeffs, x):
    n = len(x)
    out = [[Fraction(0)] * n for _ in range(n)]
    for c in reversed(coeffs):
        out = _qmatmul(out, x)
        for i in range(n):
            out[i][i] += c
    return out


def is_q_irreducible(mats: Sequence[Matrix]) -> bool:
    """Whether the rational representation has no proper nonzero invariant subspace.

    The commutant C is semisimple; the module is irreducible exactly when C
    is a division algebra.  dim C = 1 settles irreducibility, any nonzero
    singular element of C (found directly or as a factor of a minimal
    polynomial evaluated at a basis element) gives an invariant kernel, and a
    commutative C is decided through a primitive element.
    """
    n = len(mats[0])
    if n > 9:
        raise ValueError("irreducibility test supports dimension <= 9")
    basis = commutant_basis(mats)
    if len(basis) == 1:
        return True
    for x in basis:
        if rational_rank(x) < n:
            return False
    for x in basis:
        mp = minimal_polynomial(x)
        facs = _factor(mp)
        if len(facs) > 1 or (facs and len(facs[0]) < len(mp)):
            return False
    commutative = all(_qmatmul(a, b) == _qmatmul(b, a) for a in basis for b in basis)
    coeff_ranges = [range(-2, 3)] * len(basis)
    for coeffs in product(*coeff_ranges):
        if not any(coeffs):
            continue
        y = [[sum(c * b[i][j] for c, b in zip(coeffs, basis)) for j in range(n)] for i in range(n)]
        if rational_rank(y) < n:
            return False
        mp = minimal_polynomial(y)
        facs = _factor(mp)
        if len(facs) > 1:
            return False
        if commutative and len(mp) - 1 == len(basis):
            return True
    raise UndecidedError("could not decide rational irreducibility of the point action")


def is_just_infinite(g: CrystalGroup) -> bool:
    return is_q_irreducible(g.gens)


# -- Q-classes ---------------------------------------------------------------------------------

def _as_point_group(x) -> PointGroup:
    return x.point if isinstance(x, CrystalGroup) else x


def qclass_equivalent(a, b, budget: int = 1000000) -> bool:
    """Whether an isomorphism of the point groups preserves all traces.

    For finite groups, rational representations with equal characters are
    conjugate in GL_n(Q), so this decides Q-class equality.
    """
    pa, pb = _as_point_group(a), _as_point_group(b)
    if pa.degree != pb.degree or pa.order != pb.order:
        return False
    if set(pa.matrices) == set(pb.matrices):
        return True
    if pa.character_data() != pb.character_data():
        return False
    iso = find_isomorphism_traces(pa, pb, budget)
    return iso is not None


def _signature(pg: PointGroup, i: int) -> tuple:
    return pg.element_order(i), _trace(pg.matrix(i))


def find_isomorphism_traces(pa: PointGroup, pb: PointGroup, budget: int = 1000000,
                            match_traces: bool = True) -> Optional[list]:
    """Images of pa's generators defining a (trace preserving) isomorphism onto pb."""
    gens = pa.gen_indices
    sig = (lambda pg, i: _signature(pg, i)) if match_traces else (lambda pg, i: (pg.element_order(i),))
    by_sig = {}
    for i in range(pb.order):
        by_sig.setdefault(sig(pb, i), []).append(i)
    cands = [by_sig.get(sig(pa, gi), []) for gi in gens]
    pair_sig = {}
    for x in range(len(gens)):
        for y in range(x + 1, len(gens)):
            pair_sig[(x, y)] = sig(pa, pa.mul(gens[x], gens[y]))
    nodes = 0
    chosen = []

    def extend() -> Optional[list]:
        mapping = [None] * pa.order
        mapping[0] = 0
        for k in pa._bfs_order[1:]:
            i, j = pa._parent[k]
            mapping[k] = pb.mul(mapping[i], chosen[j])
        if len(set(mapping)) != pa.order:
            return None
        for i in range(pa.order):
            for j in range(len(gens)):
                if mapping[pa.right_gen(i, j)] != pb.mul(mapping[i], chosen[j]):
                    return None
        if match_traces and any(_trace(pa.matrix(i)) != _trace(pb.matrix(mapping[i])) for i in range(pa.order)):
            return None
        return mapping

    def rec(d):
        nonlocal nodes
        if d == len(gens):
            return extend() is not None
        for c in cands[d]:
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("isomorphism search exceeded its budget")
            if all(sig(pb, pb.mul(chosen[x], c)) == pair_sig[(x, d)] for x in range(d)):
                chosen.append(c)
                if rec(d + 1):
                    return True
                chosen.pop()
        return False

    return list(chosen) if rec(0) else None


# -- transfer ---------------------------------------------------------------------------------

def transfer(g: CrystalGroup, x: AffineElement) -> tuple:
    """Transfer to the translation subgroup, using the lifts (p, tau(p)) as coset representatives."""
    pg = g.point
    tau = g.vector_system
    n = g.rank
    a = pg.index_of(x.point)
    total = [Fraction(0)] * n
    for p in range(pg.order):
        ap = pg.mul(a, p)
        inner = [u + v - w for u, v, w in zip(x.translation, matvec(x.point, tau[p]), tau[ap])]
        ni = matvec(_mat_inv_int(pg.matrix(ap)), inner)
        total = [s + v for s, v in zip(total, ni)]
    if any(v.denominator != 1 for v in total):
        raise AssertionError("transfer produced a non-lattice vector")
    return tuple(int(v) for v in total)


def check_crystallographic(g: CrystalGroup) -> bool:
    """Faithful point action, consistent table, and the cocycle condition."""
    pg = g.point
    if not pg.table_consistent():
        return False
    if not pg.is_faithful():
        return False
    return g.cocycle_holds()


def change_basis(g: CrystalGroup, u: Matrix) -> CrystalGroup:
    """The same abstract group with lattice coordinates changed by a unimodular u.

    The lattice becomes Z^n with basis columns ``B u^-1`` pulled back to
    standard coordinates, that is, point matrices ``u M u^-1`` and
    translations ``u t`` in the new lattice coordinates.
    """
    n = g.rank
    u = as_matrix(u)
    uinv = _mat_inv_int(u)
    gens = [matmul(matmul(u, m), uinv) for m in g.gens]
    taus = [matvec(u, t) for t in g.taus]
    rel = g.point_relators
    return CrystalGroup(Lattice.standard(n), tuple(gens), tuple(taus), point_relators=rel,
                        known_point_order=g.known_point_order,
                        provenance={"source": "basis-change", "of": g.provenance})


def lll_reduce(basis: Sequence[Sequence[int]], gram: Matrix, delta: Fraction = Fraction(3, 4)) -> list:
    """LLL reduction of integer column vectors with respect to a positive definite form."""
    b = [list(v) for v in basis]
    k = len(b)

    def form(x, y):
        return sum(x[i] * gram[i][j] * y[j] for i in range(len(x)) for j in range(len(y)))

    def gso():
        star, mu = [], [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(form(b[i], star[j])) / form(star[j], star[j])
                v = [a - mu[i][j] * c for a, c in zip(v, star[j])]
            star.append(v)
        return star, mu

    star, mu = gso()
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            q = round(mu[i][j])
            if q:
                b[i] = [a - q * c for a, c in zip(b[i], b[j])]
                star, mu = gso()
        if form(star[i], star[i]) >= (delta - mu[i][i - 1] ** 2) * form(star[i - 1], star[i - 1]):
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            star, mu = gso()
            i = max(i - 1, 1)
    return b


def reduced_form(g: CrystalGroup) -> CrystalGroup:
    """Same group in a lattice basis that is LLL-reduced for a point-invariant form.

    Generator lifts are also moved by lattice translations so their
    translation parts lie in [0, 1)^n.  Short bases keep conjugation relators
    sparse and search windows small.
    """
    return _reduction(g)[0]


def _reduction(g: CrystalGroup):
    """(reduced group, u) where new lattice coordinates are u times the old ones."""
    n = g.rank
    pg = g.point
    gram = [[sum(m[a][i] * m[a][j] for m in pg.matrices for a in range(n)) for j in range(n)]
            for i in range(n)]
    vecs = lll_reduce([[int(i == j) for i in range(n)] for j in range(n)], gram)
    vecs.sort(key=lambda v: (form_value(v, gram), [-x for x in v]))
    u = _mat_inv_int(from_columns(vecs, n))
    h = change_basis(g, u)
    taus = tuple(tuple(x - (x.numerator // x.denominator) for x in t) for t in h.taus)
    red = CrystalGroup(Lattice.standard(n), h.gens, taus, point_relators=g.point_relators,
                       known_point_order=g.known_point_order, provenance=g.provenance, budget=g.budget)
    return red, u


def form_value(v, gram) -> int:
    return sum(v[i] * gram[i][j] * v[j] for i in range(len(v)) for j in range(len(v)))

