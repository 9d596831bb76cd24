import pytest

from _suite import affine, glide_group, pm_group, split_glide_group
from coxrigid.crystal import abelianization, change_basis, presentation, translation_group
from coxrigid.engine import (bc_case_report, chain_group, decompose_product, distinguish, feit_scan,
                             fingerprint, group_from_graph, is_qclass_bn, match_factors)
from coxrigid.graphs import CoxeterGraph, affine_graph, affine_type, disjoint_union
from coxrigid.linalg import AbelianInvariants


def _product(*types):
    g = CoxeterGraph.build([], [])
    for t in types:
        g = disjoint_union(g, affine_graph(affine_type(*t)))
    return g


def test_fingerprint_examples():
    b3 = fingerprint(affine("B", 3))
    assert b3.abelianization == AbelianInvariants((2, 2))
    assert b3.centre_rank == 0 and b3.symmorphic and b3.just_infinite is True
    assert fingerprint(affine("C", 3)).abelianization == AbelianInvariants((2, 2, 2))
    z3 = fingerprint(translation_group(3))
    assert z3.abelianization == AbelianInvariants((), 3)
    assert z3.centre_rank == 3 and z3.torsion_free and z3.just_infinite is False


def test_fingerprint_is_deterministic_and_records_skips():
    a = fingerprint(affine("A", 3)).to_json()
    assert a == fingerprint(affine("A", 3)).to_json()
    assert "skipped" in a["cf_summary"]
    assert "skipped" not in fingerprint(affine("G2")).to_json()["cf_summary"]
    assert fingerprint(affine("A", 4), battery=False).quotient_tests == []


def test_fingerprint_survives_basis_change():
    g = pm_group()
    h = change_basis(g, [[2, 1], [1, 1]])
    assert fingerprint(g).to_json() == fingerprint(h).to_json()


def test_distinguish_examples():
    r = distinguish(affine("B", 3), affine("C", 3))
    assert r.distinguished and r.field == "abelianization"
    assert r.verdict["values"] == ["Z_2 x Z_2", "Z_2 x Z_2 x Z_2"]
    r = distinguish(affine("C", 3), chain_group(3, 3))
    assert r.distinguished and r.field == "quotient_tests"
    a, b = r.verdict["values"]
    assert a["exists"] is False and b["exists"] is True
    same = distinguish(affine("A", 2), affine("A", 2))
    assert not same.distinguished and same.verdict["kind"] == "indistinguishable_at_budget"


def test_distinguish_follows_the_fixed_field_order():
    fields = [t["field"] for t in distinguish(affine("A", 2), affine("A", 2)).transcript]
    assert fields == ["dimension", "point_group_order", "q_class", "abelianization", "centre_rank",
                      "torsion_free", "symmorphic", "just_infinite", "cf", "quotient_tests"]
    assert distinguish(affine("A", 2), affine("A", 3)).field == "dimension"
    assert distinguish(affine("A", 2), affine("C", 2)).field == "point_group_order"
    assert distinguish(pm_group(), split_glide_group()).field == "q_class"
    # Z x Z_2^2 against Z x Z_2
    assert distinguish(split_glide_group(), glide_group()).field == "abelianization"


@pytest.mark.parametrize("g,h", [(affine("A", 2), affine("G2")), (pm_group(), translation_group(2)),
                                 (glide_group(), split_glide_group()), (affine("B", 3), affine("C", 3))])
def test_distinguish_is_symmetric(g, h):
    a, b = distinguish(g, h), distinguish(h, g)
    assert a.field == b.field
    assert a.verdict["values"] == list(reversed(b.verdict["values"]))


def test_qclass_bn_detection():
    assert is_qclass_bn(affine("B", 3)) and is_qclass_bn(affine("C", 3)) and is_qclass_bn(chain_group(3, 2))
    assert not is_qclass_bn(affine("A", 3))


@pytest.mark.parametrize("kind,rank,rows", [("A", 4, 2), ("D", 4, 5), ("E", 8, 1), ("E", 7, 2)])
def test_feit_scan_examples(kind, rank, rows):
    table = feit_scan(kind, rank)
    assert len(table) == rows
    z2 = [r for r in table if r["abelianization"] == "Z_2"]
    assert [r["lattice"] for r in z2] == ["Q"]
    assert all(r["index_over_Q"] >= 1 for r in table)


@pytest.mark.parametrize("kind,rank", [("B", 3), ("A", 9), ("D", 3), ("F", 4)])
def test_feit_scan_rejects_unsupported(kind, rank):
    with pytest.raises(ValueError):
        feit_scan(kind, rank)


def _status(report):
    return {c["claim"]: c["status"] for c in report["claims"]}


def test_bc_case_report_rank_3():
    rep = bc_case_report(3)
    assert rep["all_passed"]
    claims = {c["claim"]: c for c in rep["claims"]}
    assert claims["L3/L1 structure"]["value"] == "Z_4"
    assert all(s == "pass" for s in _status(rep).values())


def test_bc_case_report_rank_4():
    rep = bc_case_report(4)
    assert rep["all_passed"]
    claims = {c["claim"]: c for c in rep["claims"]}
    assert claims["L3/L1 structure"]["value"] == "Z_2 x Z_2"
    assert all(s == "pass" for s in _status(rep).values())


def test_bc_case_report_limits():
    with pytest.raises(ValueError):
        bc_case_report(1)
    with pytest.raises(ValueError):
        bc_case_report(7)
    rep = bc_case_report(6)
    assert rep["all_passed"] and _status(rep)["searches"] == "skipped"


def test_bc_case_report_budget_is_inconclusive():
    rep = bc_case_report(3, search_budget=20)
    statuses = _status(rep)
    assert "inconclusive" in statuses.values()
    assert not rep["all_passed"]


def test_match_factors_examples():
    ag = decompose_product(_product(("A", 2), ("G2",)))
    ga = decompose_product(_product(("G2",), ("A", 2)))
    assert match_factors(ag, ga) == [1, 0]
    aa = decompose_product(_product(("A", 2), ("A", 2)))
    assert match_factors(aa, aa) == [0, 1]
    assert match_factors(aa, ag) is None
    assert match_factors(aa, decompose_product(affine_graph(affine_type("A", 2)))) is None


def test_decompose_product():
    dec = decompose_product(_product(("A", 2), ("C", 2), ("I1",)))
    assert dec.names() == ["~A2", "~C2", "~I1"]
    assert [m.rank for _, _, m in dec.factors] == [2, 2, 1]
    finite = CoxeterGraph.build(["a", "b"], [("a", "b", 3)])
    with pytest.raises(ValueError):
        decompose_product(disjoint_union(affine_graph(affine_type("A", 2)), finite))


def test_product_group_abelianization_is_the_product():
    g = group_from_graph(_product(("A", 2), ("I1",)))
    assert g.rank == 3 and g.point_order() == 12
    assert abelianization(g.source_presentation) == AbelianInvariants((2, 2, 2))
    assert abelianization(presentation(g)) == AbelianInvariants((2, 2, 2))
