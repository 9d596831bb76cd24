"""Fingerprints, pairwise distinguishing, lattice scans and product matching."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial
from typing import Optional

from .cohomology import finite_subgroup_classes
from .crystal import (BudgetExceeded, CrystalGroup, UndecidedError, abelianization,
                      build_affine_coxeter, centre_rank, is_just_infinite, is_symmorphic,
                      is_torsion_free, presentation, qclass_equivalent, reduced_form, semidirect, weyl_order,
                      weyl_relators)
from .finite import (FiniteGroup, cayley_presentation, epimorphism_exists, is_hom, is_surjective,
                     quotient_by_sublattice)
from .graphs import (CoxeterGraph, classify_component, components, coxeter_presentation)
from .linalg import AbelianInvariants, Lattice, as_matrix, index, quotient_invariants
from .rootdata import bc_chain, build_root_datum, intermediate_invariant_lattices

DEFAULT_SEARCH_BUDGET = 10 ** 7
DEFAULT_POINT_BUDGET = 100000
CF_MAX_RANK = 2
CF_MAX_ORDER = 100
BATTERY_MAX_RANK = 4


# -- fingerprints ------------------------------------------------------------------

@dataclass
class Fingerprint:
    dimension: int
    point_group_order: int
    point_character_data: Optional[list]
    abelianization: AbelianInvariants
    centre_rank: int
    torsion_free: bool
    symmorphic: bool
    just_infinite: Optional[bool]
    cf_summary: dict
    quotient_tests: list = field(default_factory=list)

    def __post_init__(self):
        if self.centre_rank != self.abelianization.free_rank:
            raise AssertionError("centre rank differs from the free rank of the abelianization")

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "point_group_order": self.point_group_order,
            "point_character_data": self.point_character_data,
            "abelianization": self.abelianization.to_json(),
            "abelianization_str": str(self.abelianization),
            "centre_rank": self.centre_rank,
            "torsion_free": self.torsion_free,
            "symmorphic": self.symmorphic,
            "just_infinite": self.just_infinite,
            "cf_summary": self.cf_summary,
            "quotient_tests": self.quotient_tests,
        }


def search_presentation(g: CrystalGroup):
    """The presentation used for quotient searches: Coxeter if known, else semidirect in a reduced basis."""
    return g.source_presentation if g.source_presentation is not None else presentation(reduced_form(g))


def _character_data(g: CrystalGroup, point_budget: int):
    if g.point_order() > point_budget:
        return None
    try:
        return [list(x) for x in g.point.character_data()]
    except BudgetExceeded:
        return None


def _just_infinite(g: CrystalGroup):
    try:
        return is_just_infinite(g)
    except UndecidedError:
        return None


def _cf_summary(g: CrystalGroup, cf: Optional[bool], point_budget: int) -> dict:
    want = cf if cf is not None else (g.rank <= CF_MAX_RANK and g.point_order() <= CF_MAX_ORDER)
    if not want:
        return {"skipped": f"computed by default only for rank <= {CF_MAX_RANK} and point order <= {CF_MAX_ORDER}"}
    try:
        return finite_subgroup_classes(g, budget=max(point_budget, CF_MAX_ORDER)).summary()
    except BudgetExceeded as exc:
        return {"skipped": str(exc)}


def fingerprint(g: CrystalGroup, budget: int = DEFAULT_SEARCH_BUDGET, cf: Optional[bool] = None,
                point_budget: int = DEFAULT_POINT_BUDGET, battery: Optional[bool] = None) -> Fingerprint:
    """Every invariant field; CF and the quotient battery are recorded as skipped when not run."""
    ab = abelianization(search_presentation(g))
    if battery is None:
        battery = g.rank <= 3
    tests = quotient_battery(g, budget) if battery else []
    return Fingerprint(
        dimension=g.rank,
        point_group_order=g.point_order(),
        point_character_data=_character_data(g, point_budget),
        abelianization=ab,
        centre_rank=centre_rank(g),
        torsion_free=is_torsion_free(g),
        symmorphic=is_symmorphic(g),
        just_infinite=_just_infinite(g),
        cf_summary=_cf_summary(g, cf, point_budget),
        quotient_tests=tests,
    )


# -- the B/C quotient battery --------------------------------------------------------

_BN_CACHE: dict = {}


def _bn_models(n: int):
    if n not in _BN_CACHE:
        rd = build_root_datum("B", n)
        chain = bc_chain(n)
        groups = [semidirect(l, rd.weyl_gens, point_relators=weyl_relators(rd),
                             known_point_order=2 ** n * factorial(n),
                             provenance={"source": "chain", "lattice": f"L{i + 1}", "rank": n})
                  for i, l in enumerate(chain.lattices)]
        _BN_CACHE[n] = (rd, chain, groups, {})
    return _BN_CACHE[n]


def battery_target(n: int, i: int) -> FiniteGroup:
    """(L_i x| W(B_n)) / L_1 for the chain lattices, i in 1..3."""
    rd, chain, groups, targets = _bn_models(n)
    if i not in targets:
        targets[i] = quotient_by_sublattice(groups[i - 1], chain.lattices[0])
    return targets[i]


def chain_group(n: int, i: int) -> CrystalGroup:
    return _bn_models(n)[2][i - 1]


def is_qclass_bn(g: CrystalGroup, point_budget: int = DEFAULT_POINT_BUDGET) -> bool:
    n = g.rank
    if n < 2 or g.point_order() != 2 ** n * factorial(n) or g.point_order() > point_budget:
        return False
    return qclass_equivalent(g, chain_group(n, 2))


def quotient_battery(g: CrystalGroup, budget: int = DEFAULT_SEARCH_BUDGET,
                     max_rank: int = BATTERY_MAX_RANK) -> list:
    """Epimorphism tests onto the chain quotients when the point group is Q-class W(B_n)."""
    n = g.rank
    if n > max_rank or not is_qclass_bn(g):
        return []
    pres = search_presentation(g)
    out = []
    for i in (3, 2, 1):
        t = battery_target(n, i)
        desc = f"(L{i}/L1) x| W(B{n})" if i > 1 else f"W(B{n})"
        try:
            hom = epimorphism_exists(pres, t, budget)
            exists = hom is not None
            if hom is not None and not (is_hom(pres, t, hom.images) and is_surjective(t, hom.images)):
                raise AssertionError("search returned an invalid witness")
        except BudgetExceeded:
            exists = None
        out.append({"target": desc, "order": t.order, "exists": exists, "budget": budget})
    return out


# -- distinguishing ------------------------------------------------------------------

FIELD_ORDER = ("dimension", "point_group_order", "q_class", "abelianization", "centre_rank",
               "torsion_free", "symmorphic", "just_infinite", "cf", "quotient_tests")


@dataclass
class DistinguishReport:
    inputs: tuple
    verdict: dict
    transcript: list

    @property
    def distinguished(self) -> bool:
        return self.verdict["kind"] == "distinguished"

    @property
    def field(self) -> Optional[str]:
        return self.verdict.get("field")

    def to_json(self) -> dict:
        return {"inputs": list(self.inputs), "verdict": self.verdict, "transcript": self.transcript}


def describe(g: CrystalGroup) -> str:
    p = g.provenance
    return p.get("type") or p.get("name") or (f"L{p['lattice'][1:]} x| W(B{p['rank']})" if "lattice" in p else "group")


def distinguish(g: CrystalGroup, h: CrystalGroup, budget: int = DEFAULT_SEARCH_BUDGET,
                point_budget: int = DEFAULT_POINT_BUDGET, cf: Optional[bool] = None) -> DistinguishReport:
    """Compare invariants cheapest first; the first difference decides."""
    transcript = []

    def stop(name, a, b):
        transcript.append({"field": name, "values": [a, b], "equal": False})
        return DistinguishReport((describe(g), describe(h)),
                                 {"kind": "distinguished", "field": name, "values": [a, b]}, transcript)

    def same(name, a, b):
        transcript.append({"field": name, "values": [a, b], "equal": True})

    def skip(name, why):
        transcript.append({"field": name, "skipped": why})

    steps = [
        ("dimension", lambda x: x.rank),
        ("point_group_order", lambda x: x.point_order()),
    ]
    for name, fn in steps:
        a, b = fn(g), fn(h)
        if a != b:
            return stop(name, a, b)
        same(name, a, b)
    if g.point_order() <= point_budget:
        if g is h:
            same("q_class", "identical input", "identical input")
        else:
            ca, cb = _character_data(g, point_budget), _character_data(h, point_budget)
            if ca != cb or not qclass_equivalent(g, h):
                return stop("q_class", ca, cb)
            same("q_class", "equivalent", "equivalent")
    else:
        skip("q_class", "point group above enumeration budget")
    pa, pb = search_presentation(g), search_presentation(h)
    lazy = [
        ("abelianization", lambda x, p: str(abelianization(p))),
        ("centre_rank", lambda x, p: centre_rank(x)),
        ("torsion_free", lambda x, p: is_torsion_free(x)),
        ("symmorphic", lambda x, p: is_symmorphic(x)),
        ("just_infinite", lambda x, p: _just_infinite(x)),
    ]
    for name, fn in lazy:
        a, b = fn(g, pa), fn(h, pb)
        if a != b:
            return stop(name, a, b)
        same(name, a, b)
    ca, cb = _cf_summary(g, cf, point_budget), _cf_summary(h, cf, point_budget)
    if "skipped" in ca or "skipped" in cb:
        skip("cf", ca.get("skipped") or cb.get("skipped"))
    elif ca != cb:
        return stop("cf", ca, cb)
    else:
        same("cf", ca, cb)
    if g.rank <= BATTERY_MAX_RANK and is_qclass_bn(g, point_budget) and is_qclass_bn(h, point_budget):
        qa, qb = quotient_battery(g, budget), quotient_battery(h, budget)
        for ta, tb in zip(qa, qb):
            if ta["exists"] is not None and tb["exists"] is not None and ta["exists"] != tb["exists"]:
                return stop("quotient_tests", ta, tb)
        same("quotient_tests", qa, qb)
    else:
        skip("quotient_tests", "battery applies only to Q-class W(B_n) pairs")
    return DistinguishReport((describe(g), describe(h)),
                             {"kind": "indistinguishable_at_budget", "budget": budget}, transcript)


# -- Feit scan ------------------------------------------------------------------

def feit_scan(kind: str, rank: int) -> list:
    """Abelianization of L x| W for every W-invariant lattice Q <= L <= P.

    Asserts that the root lattice is the only row with abelianization Z_2.
    """
    k = {"E": f"E{rank}"}.get(kind, kind)
    if k not in ("A", "D", "E6", "E7", "E8") or (k == "A" and not 1 <= rank <= 8) or (k == "D" and not 4 <= rank <= 8):
        raise ValueError(f"feit_scan supports types A, D, E (rank <= 8), not {kind}{rank}")
    rd = build_root_datum(k, rank)
    lattices = intermediate_invariant_lattices(rd)
    rows = []
    for i, lat in enumerate(lattices):
        g = semidirect(lat, rd.weyl_gens, point_relators=weyl_relators(rd),
                       known_point_order=weyl_order(k, rank))
        ab = abelianization(presentation(g))
        if lat == rd.Q:
            label = "Q"
        elif lat == rd.P:
            label = "P"
        else:
            label = f"L{i}"
        rows.append({"lattice": label, "index_over_Q": index(rd.Q, lat), "abelianization": str(ab),
                     "basis": lat.to_json(), "is_z2": ab == AbelianInvariants((2,))})
    hits = [r for r in rows if r["is_z2"]]
    if len(hits) != 1 or hits[0]["lattice"] != "Q":
        raise AssertionError(f"Z_2 abelianization is not unique to the root lattice: {rows}")
    return rows


# -- B/C report -------------------------------------------------------------------------

def bc_case_report(n: int, search_max: int = 4, algebraic_max: int = 6,
                   search_budget: int = DEFAULT_SEARCH_BUDGET) -> dict:
    """Check, in order, every computable claim behind the B/C separation."""
    if n < 2:
        raise ValueError("rank must be at least 2")
    if n > algebraic_max:
        raise ValueError(f"rank {n} above the supported maximum {algebraic_max}")
    claims = []

    def claim(name, status, **witness):
        claims.append({"claim": name, "status": status, **witness})

    def ok(b):
        return "pass" if b else "fail"

    b_rd, c_rd = build_root_datum("B", n), build_root_datum("C", n)
    claim("W(B_n) = W(C_n)", ok(set(b_rd.weyl_gens) == set(c_rd.weyl_gens)),
          note="identical generator matrices in the common ambient")
    chain = bc_chain(n)
    idx = [index(a, b) for a, b in zip(chain.lattices, chain.lattices[1:])]
    claim("|L_i / L_(i-1)| = 2", ok(idx == [2, 2]), indices=idx)
    q31 = quotient_invariants(chain.lattices[0], chain.lattices[2])
    expect = AbelianInvariants((4,)) if n % 2 else AbelianInvariants((2, 2))
    claim("L3/L1 structure", ok(q31 == expect), value=str(q31), expected=str(expect))
    from .graphs import affine_type
    c_model, c_pres, _ = build_affine_coxeter(affine_type("C", n))
    c_ab = abelianization(c_pres)
    claim("abelianization of W(~C_n) is Z_2^3", ok(c_ab == AbelianInvariants((2, 2, 2))), value=str(c_ab))
    claim("W(~C_n) lattice is L2", ok(c_model.lattice == chain.lattices[1]))
    b_pres = None
    if n >= 3:
        b_model, b_pres, _ = build_affine_coxeter(affine_type("B", n))
        b_ab = abelianization(b_pres)
        claim("abelianization of W(~B_n) is Z_2^2", ok(b_ab == AbelianInvariants((2, 2))), value=str(b_ab))
        claim("W(~B_n) lattice is L1", ok(b_model.lattice == chain.lattices[0]))
    else:
        claim("abelianization of W(~B_n) is Z_2^2", "not applicable", note="~B_n needs n >= 3")
    if n > search_max:
        claim("searches", "skipped", note=f"search phase limited to n <= {search_max}")
        return {"rank": n, "claims": claims, "all_passed": all(c["status"] in ("pass", "not applicable", "skipped") for c in claims)}
    t2 = battery_target(n, 2)
    z2cubed = FiniteGroup.abelian([2, 2, 2])
    try:
        hom = epimorphism_exists(cayley_presentation(t2), z2cubed, search_budget)
        claim("(L2 x| W)/L1 surjects onto Z_2^3", ok(hom is not None),
              witness=None if hom is None else list(hom.images))
    except BudgetExceeded:
        claim("(L2 x| W)/L1 surjects onto Z_2^3", "inconclusive", budget=search_budget)
    t3 = battery_target(n, 3)
    searches = [("~C_n", c_pres)] + ([("~B_n", b_pres)] if b_pres is not None else [])
    for name, pres in searches:
        t0 = time.time()
        try:
            hom = epimorphism_exists(pres, t3, search_budget)
            claim(f"W({name}) has no quotient (L3/L1) x| W", ok(hom is None),
                  target_order=t3.order, seconds=round(time.time() - t0, 3),
                  witness=None if hom is None else list(hom.images))
        except BudgetExceeded:
            claim(f"W({name}) has no quotient (L3/L1) x| W", "inconclusive", budget=search_budget)
    g3 = chain_group(n, 3)
    p3 = presentation(g3)
    t0 = time.time()
    try:
        hom = epimorphism_exists(p3, t3, search_budget)
        good = hom is not None and is_hom(p3, t3, hom.images) and is_surjective(t3, hom.images)
        claim("L3 x| W surjects onto (L3/L1) x| W", ok(good), seconds=round(time.time() - t0, 3),
              witness=None if hom is None else list(hom.images))
    except BudgetExceeded:
        claim("L3 x| W surjects onto (L3/L1) x| W", "inconclusive", budget=search_budget)
    return {"rank": n, "claims": claims,
            "all_passed": all(c["status"] in ("pass", "not applicable", "skipped") for c in claims)}


# -- direct products ---------------------------------------------------------------

def direct_product_group(groups, presentations=None) -> CrystalGroup:
    """Block-diagonal product of crystallographic groups."""
    n = sum(g.rank for g in groups)
    basis, gens, taus, rels = [], [], [], []
    off = 0
    goff = 0
    known = 1
    gen_ranges = []
    for g in groups:
        for c in g.lattice.basis:
            basis.append((0,) * off + tuple(c) + (0,) * (n - off - g.rank))
        for m, t in zip(g.point_gens, g.tau_gens):
            big = [[0] * n for _ in range(n)]
            for i in range(n):
                big[i][i] = 1
            for i in range(g.rank):
                for j in range(g.rank):
                    big[off + i][off + j] = m[i][j]
            gens.append(as_matrix(big))
            taus.append((0,) * off + tuple(t) + (0,) * (n - off - g.rank))
        pr = g.point_presentation_relators()
        rels += [tuple((a + goff, e) for a, e in r) for r in pr]
        gen_ranges.append(range(goff, goff + len(g.point_gens)))
        known *= g.point_order()
        off += g.rank
        goff += len(g.point_gens)
    for x in range(len(gen_ranges)):
        for y in range(x + 1, len(gen_ranges)):
            for a in gen_ranges[x]:
                for b in gen_ranges[y]:
                    rels.append(((a, 1), (b, 1), (a, -1), (b, -1)))
    return CrystalGroup(Lattice.from_generators(basis, n), tuple(gens), tuple(taus),
                        point_relators=tuple(rels), known_point_order=known,
                        provenance={"source": "product", "factors": [describe(g) for g in groups]})


@dataclass
class ProductDecomposition:
    factors: list  # (component graph, component type, CrystalGroup)
    dictionaries: list = field(default_factory=list)  # template vertex -> AffineElement

    def names(self) -> list:
        return [t.name for _, t, _ in self.factors]


def decompose_product(g: CoxeterGraph) -> ProductDecomposition:
    factors, dicts = [], []
    for comp in components(g):
        t = classify_component(comp)
        if t.family != "affine":
            raise ValueError(f"component {list(comp.vertices)} is of type {t.name}, not affine")
        model, _, images = build_affine_coxeter(t)
        factors.append((comp, t, model))
        dicts.append(images)
    return ProductDecomposition(factors, dicts)


def group_from_graph(g: CoxeterGraph) -> CrystalGroup:
    """Crystal model of an affine Coxeter group, with its Coxeter presentation attached."""
    dec = decompose_product(g)
    if len(dec.factors) == 1:
        model = dec.factors[0][2]
    else:
        model = direct_product_group([m for _, _, m in dec.factors])
    return _with_graph_presentation(model, dec, g)


def _with_graph_presentation(model: CrystalGroup, dec: ProductDecomposition, g: CoxeterGraph) -> CrystalGroup:
    """Attach the presentation of g, with images verified in the model."""
    from .crystal import AffineElement, evaluate_word
    from .graphs import find_isomorphism, affine_graph
    n = model.rank
    images = {}
    off = 0
    for (comp, t, m), dictionary in zip(dec.factors, dec.dictionaries):
        iso = find_isomorphism(comp, affine_graph(t))
        for v in comp.vertices:
            e = dictionary[iso[v]]
            k = m.rank
            big = [[int(i == j) for j in range(n)] for i in range(n)]
            for i in range(k):
                for j in range(k):
                    big[off + i][off + j] = e.point[i][j]
            tr = [0] * n
            for i in range(k):
                tr[off + i] = e.translation[i]
            images[v] = AffineElement.make(big, tr)
        off += m.rank
    pres = coxeter_presentation(g)
    imgs = [images[v] for v in pres.generators]
    for r in pres.relators:
        if not evaluate_word(r, imgs, n).is_identity():
            raise AssertionError("graph relator fails in the product model")
    model.source_presentation = pres
    model.source_images = tuple(imgs)
    model.provenance = {"source": "graph", "type": " x ".join(t.name for _, t, _ in dec.factors)}
    return model


def match_factors(a: ProductDecomposition, b: ProductDecomposition, budget: int = DEFAULT_SEARCH_BUDGET):
    """sigma with fingerprint(a_i) == fingerprint(b_sigma(i)), lowest index first; None if impossible."""
    if len(a.factors) != len(b.factors):
        return None
    fa = [fingerprint(m, budget).to_json() for _, _, m in a.factors]
    fb = [fingerprint(m, budget).to_json() for _, _, m in b.factors]
    sigma, used = [], set()
    for x in fa:
        j = next((j for j, y in enumerate(fb) if j not in used and y == x), None)
        if j is None:
            return None
        used.add(j)
        sigma.append(j)
    return sigma
