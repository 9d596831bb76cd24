import json

import pytest

from coxrigid.cli import main
from coxrigid.graphs import affine_graph, affine_type


def _graph_doc(kind, rank=None):
    return affine_graph(affine_type(kind, rank)).to_json()


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)
    return write


def test_classify(files, capsys):
    assert main(["classify", files("a2.json", _graph_doc("A", 2))]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["components"][0]["type"]["family"] == "affine"
    five = {"vertices": ["a", "b"], "edges": [{"u": "a", "v": "b", "m": 5}]}
    assert main(["classify", files("h2.json", five)]) == 2


def test_classify_infinite_edge(files, capsys):
    assert main(["classify", files("i1.json", _graph_doc("I1"))]) == 0
    assert "~I1" in capsys.readouterr().out


def test_fingerprint_graph_and_group(files, capsys):
    assert main(["--seed", "7", "fingerprint", files("c2.json", _graph_doc("C", 2))]) == 0
    first = capsys.readouterr().out
    assert json.loads(first)["abelianization_str"] == "Z_2 x Z_2 x Z_2"
    assert main(["fingerprint", files("c2.json", _graph_doc("C", 2)), "--seed", "3"]) == 0
    assert capsys.readouterr().out == first
    z2 = {"rank": 2, "lattice": [[1, 0], [0, 1]], "point_generators": [[[-1, 0], [0, -1]]]}
    assert main(["fingerprint", files("pm.json", z2), "--cf"]) == 0
    fp = json.loads(capsys.readouterr().out)
    assert fp["point_group_order"] == 2 and len(fp["cf_summary"]["classes"]) == 5


def test_distinguish_exit_codes(files, capsys):
    b3, c3 = files("b3.json", _graph_doc("B", 3)), files("c3.json", _graph_doc("C", 3))
    assert main(["distinguish", b3, c3]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"]["field"] == "abelianization"
    a2 = files("a2.json", _graph_doc("A", 2))
    assert main(["distinguish", a2, a2]) == 3


def test_feit_scan(capsys):
    assert main(["feit-scan", "--type", "D", "--rank", "4"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 5
    assert main(["feit-scan", "--type", "A", "--rank", "4", "--pretty"]) == 0
    assert "<- Z_2" in capsys.readouterr().out


def test_bc_report(capsys):
    assert main(["bc-report", "--rank", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["all_passed"]
    assert main(["bc-report", "--rank", "3", "--search-budget", "20"]) == 1
    assert main(["bc-report", "--rank", "1"]) == 1
    assert "error" in capsys.readouterr().err


def test_match_products(files, capsys):
    def union(*docs):
        out = {"vertices": [], "edges": []}
        for i, d in enumerate(docs):
            ren = {v: f"{v}_{i}" for v in d["vertices"]}
            out["vertices"] += [ren[v] for v in d["vertices"]]
            out["edges"] += [{"u": ren[e["u"]], "v": ren[e["v"]], "m": e["m"]} for e in d["edges"]]
        return out
    ag = files("ag.json", union(_graph_doc("A", 2), _graph_doc("G2")))
    ga = files("ga.json", union(_graph_doc("G2"), _graph_doc("A", 2)))
    aa = files("aa.json", union(_graph_doc("A", 2), _graph_doc("A", 2)))
    assert main(["match-products", ag, ga]) == 0
    assert json.loads(capsys.readouterr().out)["sigma"] == [1, 0]
    assert main(["match-products", aa, ag]) == 0
    assert capsys.readouterr().out.strip() == "no matching"


def test_errors_go_to_stderr(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["classify", str(bad)]) == 1
    assert main(["fingerprint", str(tmp_path / "missing.json")]) == 1
    assert main(["fingerprint", files("g.json", {"rank": 2})]) == 1
    err = capsys.readouterr().err
    assert err.count("error:") == 3
