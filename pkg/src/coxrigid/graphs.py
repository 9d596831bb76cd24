"""Labeled Coxeter graphs, Coxeter matrices and presentations.

An edge label is an int >= 3 or the distinguished value ``INF``; a missing
edge means the pair commutes (label 2).  Vertex names are kept in
lexicographic order, and every matrix produced here uses that order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Label = Union[int, _Infinity]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class CoxeterGraph:
    vertices: tuple
    edges: tuple  # sorted tuple of ((u, v), label) with u < v

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        if list(self.vertices) != sorted(self.vertices):
            raise GraphError("vertices must be in lexicographic order")
        seen = set()
        vs = set(self.vertices)
        for (u, v), m in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in vs or v not in vs:
                raise GraphError(f"edge {u}-{v} uses an unknown vertex")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge {u}-{v}")
            seen.add((u, v))
            if m is not INF and (not isinstance(m, int) or m < 3):
                raise GraphError(f"edge {u}-{v} has label {m!r}; labels are >= 3 or inf")

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[tuple]) -> "CoxeterGraph":
        """Build from (u, v, label) triples in any order."""
        es = {}
        for u, v, m in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            key = (u, v) if u < v else (v, u)
            if key in es:
                raise GraphError(f"duplicate edge {key[0]}-{key[1]}")
            es[key] = m
        return cls(tuple(sorted(vertices)), tuple(sorted(es.items(), key=lambda kv: kv[0])))

    def label(self, u: str, v: str) -> Label:
        """The Coxeter matrix entry m(u, v)."""
        if u == v:
            return 1
        key = (u, v) if u < v else (v, u)
        for k, m in self.edges:
            if k == key:
                return m
        return 2

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for (u, v), m in self.edges:
            g.add_edge(u, v, m=m)
        return g

    def subgraph(self, verts: Iterable[str]) -> "CoxeterGraph":
        vs = set(verts)
        return CoxeterGraph(tuple(sorted(vs)),
                            tuple(e for e in self.edges if e[0][0] in vs and e[0][1] in vs))

    def relabel(self, mapping: dict) -> "CoxeterGraph":
        return CoxeterGraph.build((mapping[v] for v in self.vertices),
                                  ((mapping[u], mapping[v], m) for (u, v), m in self.edges))

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"u": u, "v": v, "m": "inf" if m is INF else m} for (u, v), m in self.edges],
        }


def parse_graph(text: str) -> CoxeterGraph:
    """Parse the JSON graph document format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed document: {exc}") from exc
    return graph_from_json(doc)


def graph_from_json(doc) -> CoxeterGraph:
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise GraphError("malformed document: expected an object with 'vertices'")
    verts = doc["vertices"]
    if not isinstance(verts, list) or not all(isinstance(v, str) for v in verts):
        raise GraphError("malformed document: 'vertices' must be a list of strings")
    if len(set(verts)) != len(verts):
        raise GraphError("duplicate vertex names")
    triples = []
    for i, e in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        if not isinstance(e, dict) or not {"u", "v", "m"} <= set(e):
            raise GraphError(f"{where}: expected keys u, v, m")
        m = e["m"]
        if m == "inf":
            m = INF
        elif isinstance(m, bool) or not isinstance(m, int):
            raise GraphError(f"{where}: label must be an integer >= 3 or \"inf\"")
        elif m < 3:
            raise GraphError(f"{where}: label {m} < 3 (a missing edge already means 2)")
        if e["u"] not in verts or e["v"] not in verts:
            raise GraphError(f"{where}: unknown vertex")
        triples.append((e["u"], e["v"], m))
    try:
        return CoxeterGraph.build(verts, triples)
    except GraphError as exc:
        raise GraphError(f"{exc} (in edges)") from exc


def coxeter_matrix(g: CoxeterGraph) -> tuple:
    return tuple(tuple(g.label(u, v) for v in g.vertices) for u in g.vertices)


def components(g: CoxeterGraph) -> list[CoxeterGraph]:
    nxg = g.to_networkx()
    comps = [g.subgraph(c) for c in nx.connected_components(nxg)]
    return sorted(comps, key=lambda c: c.vertices[0])


# -- presentations ------------------------------------------------------------

@dataclass(frozen=True)
class FinPres:
    """Finite presentation; a relator is a tuple of (generator index, +1/-1)."""

    generators: tuple
    relators: tuple = field(default=())

    def __post_init__(self):
        k = len(self.generators)
        for r in self.relators:
            for g, e in r:
                if not 0 <= g < k or e not in (1, -1):
                    raise ValueError(f"relator {r} references an undeclared generator")

    def word_str(self, word) -> str:
        return " ".join(self.generators[g] + ("" if e == 1 else "^-1") for g, e in word) or "1"

    def to_json(self) -> dict:
        return {"generators": list(self.generators),
                "relators": [[[g, e] for g, e in r] for r in self.relators]}


def power_word(word, m: int) -> tuple:
    return tuple(word) * m


def coxeter_presentation(g: CoxeterGraph) -> FinPres:
    vs = g.vertices
    rels = [((i, 1), (i, 1)) for i in range(len(vs))]
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            m = g.label(vs[i], vs[j])
            if m is not INF:
                rels.append(power_word(((i, 1), (j, 1)), m))
    return FinPres(tuple(vs), tuple(rels))


# -- classification -------------------------------------------------------------

@dataclass(frozen=True)
class ComponentType:
    family: str  # "affine", "finite" or "other"
    kind: Optional[str] = None  # e.g. "A", "B", "E6", "I1"
    rank: Optional[int] = None

    @property
    def name(self) -> str:
        if self.family == "other":
            return "Other"
        base = self.kind if self.kind in _FIXED_RANK else f"{self.kind}{self.rank}"
        return ("~" + base) if self.family == "affine" else base

    def __str__(self) -> str:
        return self.name

    def to_json(self) -> dict:
        return {"family": self.family, "kind": self.kind, "rank": self.rank, "name": self.name}


AFFINE_KINDS = ("I1", "A", "B", "C", "D", "E6", "E7", "E8", "F4", "G2")
FINITE_KINDS = ("A", "B", "D", "E6", "E7", "E8", "F4", "G2")
_FIXED_RANK = {"I1": 1, "E6": 6, "E7": 7, "E8": 8, "F4": 4, "G2": 2}


def affine_type(kind: str, rank: Optional[int] = None) -> ComponentType:
    rank = _FIXED_RANK.get(kind, rank)
    lo = {"A": 2, "B": 3, "C": 2, "D": 4}.get(kind)
    if kind not in AFFINE_KINDS or rank is None or (lo is not None and rank < lo):
        raise ValueError(f"no affine type {kind} of rank {rank}")
    return ComponentType("affine", kind, rank)


def _path(names, labels=None):
    labels = labels or {}
    return [(names[i], names[i + 1], labels.get(i, 3)) for i in range(len(names) - 1)]


def affine_graph(t: ComponentType) -> CoxeterGraph:
    """Figure-1 template for an affine type; the extra node is ``s0``.

    The remaining vertices ``s1..sn`` follow the Bourbaki numbering of the
    finite diagram.
    """
    if t.family != "affine":
        raise ValueError("not an affine type")
    k, n = t.kind, t.rank
    s = [f"s{i}" for i in range(n + 1)]
    if k == "I1":
        edges = [("s0", "s1", INF)]
    elif k == "A":
        edges = _path(s[1:]) + [("s0", "s1", 3), ("s0", s[n], 3)]
    elif k == "B":
        # s1 - s2 - ... - s_{n-1} =4= s_n, with s0 attached to s2
        edges = _path(s[1:], {n - 2: 4}) + [("s0", "s2", 3)]
    elif k == "C":
        edges = _path(s[1:], {n - 2: 4}) + [("s0", "s1", 4)]
    elif k == "D":
        edges = _path(s[1:n - 1]) + [(s[n - 2], s[n - 1], 3), (s[n - 2], s[n], 3), ("s0", "s2", 3)]
    elif k == "E6":
        edges = [("s1", "s3", 3), ("s3", "s4", 3), ("s4", "s5", 3), ("s5", "s6", 3),
                 ("s2", "s4", 3), ("s0", "s2", 3)]
    elif k == "E7":
        edges = _path(["s1", "s3", "s4", "s5", "s6", "s7"]) + [("s2", "s4", 3), ("s0", "s1", 3)]
    elif k == "E8":
        edges = _path(["s1", "s3", "s4", "s5", "s6", "s7", "s8"]) + [("s2", "s4", 3), ("s0", "s8", 3)]
    elif k == "F4":
        edges = _path(["s0", "s1", "s2", "s3", "s4"], {2: 4})
    elif k == "G2":
        edges = [("s0", "s2", 3), ("s2", "s1", 6)]
    else:  # pragma: no cover - guarded by affine_type
        raise ValueError(k)
    return CoxeterGraph.build(s, edges)


def finite_graph(kind: str, n: int) -> CoxeterGraph:
    """Template for a finite crystallographic type, vertices s1..sn."""
    s = [f"s{i}" for i in range(1, n + 1)]
    if kind == "A":
        edges = _path(s)
    elif kind in ("B", "C"):
        edges = _path(s, {n - 2: 4})
    elif kind == "D":
        edges = _path(s[:n - 1]) + [(s[n - 3], s[n - 1], 3)]
    elif kind == "E6" or kind == "E7" or kind == "E8":
        edges = _path(["s1", "s3"] + s[3:]) + [("s2", "s4", 3)]
    elif kind == "F4":
        edges = _path(s, {1: 4})
    elif kind == "G2":
        edges = [("s1", "s2", 6)]
    else:
        raise ValueError(kind)
    return CoxeterGraph.build(s, edges)


def _finite_candidates(n: int):
    out = [("A", n)] if n >= 1 else []
    if n >= 2:
        out.append(("B", n))
    if n >= 4:
        out.append(("D", n))
    out += [(k, r) for k, r in (("E6", 6), ("E7", 7), ("E8", 8), ("F4", 4), ("G2", 2)) if r == n]
    return out


def _affine_candidates(nv: int):
    r = nv - 1
    out = []
    for k in AFFINE_KINDS:
        try:
            out.append(affine_type(k, r))
        except ValueError:
            pass
    return [t for t in out if t.rank == r]


def _edge_match(a, b):
    return a["m"] == b["m"]


def find_isomorphism(g: CoxeterGraph, h: CoxeterGraph) -> Optional[dict]:
    """A label-preserving vertex bijection g -> h, or None."""
    if len(g.vertices) != len(h.vertices) or len(g.edges) != len(h.edges):
        return None
    gm = GraphMatcher(g.to_networkx(), h.to_networkx(), edge_match=_edge_match)
    for mapping in gm.isomorphisms_iter():
        return dict(mapping)
    return None


def classify_component(g: CoxeterGraph) -> ComponentType:
    if not g.vertices:
        raise GraphError("empty graph")
    if len(components(g)) != 1:
        raise GraphError("graph is not connected")
    nv = len(g.vertices)
    for t in _affine_candidates(nv):
        if find_isomorphism(g, affine_graph(t)) is not None:
            return t
    for kind, r in _finite_candidates(nv):
        if find_isomorphism(g, finite_graph(kind, r)) is not None:
            return ComponentType("finite", kind, r)
    return ComponentType("other")


def odd_components(g: CoxeterGraph) -> int:
    """Vertex classes under connectivity through odd-labeled edges."""
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from(e for e, m in g.edges if m is not INF and m % 2 == 1)
    return nx.number_connected_components(h)


def disjoint_union(*graphs: CoxeterGraph, prefixes: Optional[Iterable[str]] = None) -> CoxeterGraph:
    prefixes = list(prefixes) if prefixes is not None else [f"g{i}_" for i in range(len(graphs))]
    verts, edges = [], []
    for p, g in zip(prefixes, graphs):
        verts += [p + v for v in g.vertices]
        edges += [(p + u, p + v, m) for (u, v), m in g.edges]
    return CoxeterGraph.build(verts, edges)
