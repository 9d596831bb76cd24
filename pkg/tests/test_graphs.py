import json
import random

import networkx as nx
import pytest

from coxrigid.graphs import (INF, ComponentType, CoxeterGraph, GraphError, affine_graph, affine_type,
                             classify_component, components, coxeter_matrix, coxeter_presentation,
                             disjoint_union, odd_components, parse_graph)

ALL_AFFINE = ([("I1", None)] + [("A", n) for n in range(2, 9)] + [("B", n) for n in range(3, 9)]
              + [("C", n) for n in range(2, 9)] + [("D", n) for n in range(4, 9)]
              + [(k, None) for k in ("E6", "E7", "E8", "F4", "G2")])


def doc(vertices, edges):
    return json.dumps({"vertices": vertices, "edges": [{"u": u, "v": v, "m": m} for u, v, m in edges]})


def test_parse_examples():
    g = parse_graph(doc(["s0", "s1"], [("s0", "s1", "inf")]))
    assert g.label("s0", "s1") is INF
    assert classify_component(g) == ComponentType("affine", "I1", 1)
    single = parse_graph(doc(["s"], []))
    assert single.vertices == ("s",)
    with pytest.raises(GraphError):
        parse_graph(doc(["a", "b"], [("a", "b", 2)]))


@pytest.mark.parametrize("text", ["[", "{}", '{"vertices": [1]}', '{"vertices": ["a", "a"]}',
                                  '{"vertices": ["a"], "edges": [{"u": "a", "v": "b", "m": 3}]}',
                                  '{"vertices": ["a", "b"], "edges": [{"u": "a", "v": "b", "m": 3.5}]}'])
def test_parse_rejects_malformed(text):
    with pytest.raises(GraphError):
        parse_graph(text)


def test_coxeter_matrix_examples():
    tri = parse_graph(doc(["a", "b", "c"], [("a", "b", 3), ("b", "c", 3), ("a", "c", 3)]))
    assert coxeter_matrix(tri) == ((1, 3, 3), (3, 1, 3), (3, 3, 1))
    two = parse_graph(doc(["a", "b"], []))
    assert coxeter_matrix(two) == ((1, 2), (2, 1))
    assert coxeter_matrix(affine_graph(affine_type("I1"))) == ((1, INF), (INF, 1))


@pytest.mark.parametrize("kind,rank", ALL_AFFINE)
def test_matrix_symmetric_with_unit_diagonal(kind, rank):
    m = coxeter_matrix(affine_graph(affine_type(kind, rank)))
    n = len(m)
    assert all(m[i][i] == 1 for i in range(n))
    assert all(m[i][j] == m[j][i] for i in range(n) for j in range(n))


@pytest.mark.parametrize("kind,rank", ALL_AFFINE)
def test_templates_round_trip(kind, rank):
    t = affine_type(kind, rank)
    assert classify_component(affine_graph(t)) == t


@pytest.mark.parametrize("kind,rank", ALL_AFFINE)
def test_classification_ignores_names_and_edge_order(kind, rank):
    rng = random.Random(f"{kind}{rank}")
    g = affine_graph(affine_type(kind, rank))
    names = list(g.vertices)
    fresh = [f"v{i}" for i in range(len(names))]
    rng.shuffle(fresh)
    mapping = dict(zip(names, fresh))
    edges = [(mapping[u], mapping[v], m) for (u, v), m in g.edges]
    rng.shuffle(edges)
    h = CoxeterGraph.build(sorted(fresh, reverse=True), [(v, u, m) if rng.random() < 0.5 else (u, v, m)
                                                          for u, v, m in edges])
    assert classify_component(h) == affine_type(kind, rank)


def test_classification_examples():
    tri = parse_graph(doc(["a", "b", "c"], [("a", "b", 3), ("b", "c", 3), ("a", "c", 3)]))
    assert classify_component(tri) == affine_type("A", 2)
    path = parse_graph(doc(["a", "b", "c"], [("a", "b", 4), ("b", "c", 4)]))
    assert classify_component(path) == affine_type("C", 2)
    five = parse_graph(doc(["a", "b"], [("a", "b", 5)]))
    assert classify_component(five).family == "other"
    finite = parse_graph(doc(["a", "b"], [("a", "b", 6)]))
    assert classify_component(finite) == ComponentType("finite", "G2", 2)


def test_components():
    u = disjoint_union(affine_graph(affine_type("A", 2)), affine_graph(affine_type("G2")))
    parts = components(u)
    assert [classify_component(p).name for p in parts] == ["~A2", "~G2"]
    g = affine_graph(affine_type("A", 3))
    assert components(g) == [g]
    assert components(CoxeterGraph.build([], [])) == []


def test_presentation_examples():
    assert coxeter_presentation(parse_graph(doc(["s"], []))).relators == (((0, 1), (0, 1)),)
    inf = coxeter_presentation(affine_graph(affine_type("I1")))
    assert len(inf.relators) == 2
    two = coxeter_presentation(parse_graph(doc(["s", "t"], [])))
    assert len(two.relators) == 3
    assert ((0, 1), (1, 1), (0, 1), (1, 1)) in two.relators


@pytest.mark.parametrize("kind,rank", ALL_AFFINE)
def test_relator_count(kind, rank):
    g = affine_graph(affine_type(kind, rank))
    m = coxeter_matrix(g)
    n = len(m)
    finite_pairs = sum(1 for i in range(n) for j in range(i + 1, n) if m[i][j] is not INF)
    assert len(coxeter_presentation(g).relators) == n + finite_pairs


@pytest.mark.parametrize("kind,rank", ALL_AFFINE)
def test_odd_components_oracle(kind, rank):
    """Count classes of vertices joined by odd labels with networkx directly."""
    g = affine_graph(affine_type(kind, rank))
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from((u, v) for (u, v), m in g.edges if m is not INF and m % 2)
    assert odd_components(g) == nx.number_connected_components(h)


def test_affine_type_rank_limits():
    for kind, rank in [("A", 1), ("B", 2), ("C", 1), ("D", 3), ("X", 3)]:
        with pytest.raises(ValueError):
            affine_type(kind, rank)
