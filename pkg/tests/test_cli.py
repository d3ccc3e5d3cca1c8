import json

import pytest

from ggqtree import dump_query, initial_query
from ggqtree.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, social):
    graph, labels = social.write(tmp_path)
    return tmp_path, graph, labels


def test_induce_summary(capsys, tmp_path):
    tree = tmp_path / "tree.json"
    dot = tmp_path / "tree.dot"
    code, out, _ = run(capsys, "induce", "--fixture", "social", "--out", str(tree), "--dot", str(dot))
    assert code == 0
    assert json.loads(out) == {"depth": 3, "leaves": 4, "training_accuracy": 1.0}
    assert json.loads(tree.read_text())["format"] == "ggq-tree"
    text = dot.read_text()
    assert text.count("subgraph cluster_") == 3 and text.count("shape=box") == 4


def test_induce_max_depth(capsys):
    code, out, _ = run(capsys, "induce", "--fixture", "social", "--max-depth", "1")
    assert code == 0 and json.loads(out)["depth"] == 1 and json.loads(out)["leaves"] == 2


def test_induce_from_files(capsys, files):
    _, graph, labels = files
    code, out, _ = run(capsys, "induce", "--graph", str(graph), "--labels", str(labels),
                       "--exclude-key", "gender")
    assert code == 0 and json.loads(out)["training_accuracy"] == 1.0


def test_missing_labels_file(capsys, files):
    tmp, graph, _ = files
    missing = tmp / "nope.json"
    code, _, err = run(capsys, "induce", "--graph", str(graph), "--labels", str(missing))
    assert code == 2 and str(missing) in err


def test_bad_graph_document(capsys, tmp_path, files):
    _, _, labels = files
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": [}')
    code, _, err = run(capsys, "induce", "--graph", str(bad), "--labels", str(labels))
    assert code == 1 and "line 1" in err


def test_classify(capsys, tmp_path):
    tree = tmp_path / "tree.json"
    run(capsys, "induce", "--fixture", "social", "--out", str(tree))
    code, out, _ = run(capsys, "classify", "--tree", str(tree), "--fixture", "social",
                       "--subgraph", "p2", "--subgraph", "u1", "--subgraph", "u3")
    assert code == 0
    assert out.splitlines() == ["p2\tNone", "u1\tF", "u3\tM"]


def test_classify_paths(capsys, tmp_path):
    tree = tmp_path / "tree.json"
    run(capsys, "induce", "--fixture", "social", "--out", str(tree))
    _, out, _ = run(capsys, "classify", "--tree", str(tree), "--fixture", "social", "--paths")
    rows = [line.split("\t") for line in out.splitlines()]
    assert [r[:2] for r in rows] == [["p1", "None"], ["p2", "None"], ["u1", "F"],
                                     ["u2", "M"], ["u3", "M"]]
    assert "type=publish" in rows[2][2]


def test_match(capsys, tmp_path):
    from test_query import f_leaf_query
    q = tmp_path / "q.json"
    q.write_text(dump_query(f_leaf_query()))
    code, out, _ = run(capsys, "match", "--fixture", "social", "--query", str(q),
                       "--subgraph", "u1", "--subgraph", "u2")
    assert code == 0 and out.splitlines() == ["u1\ttrue", "u2\tfalse"]
    _, out, _ = run(capsys, "match", "--fixture", "social", "--subgraph", "u1",
                    "--subgraph", "p1,p2,u1,u2,u3")
    assert out.splitlines() == ["u1\ttrue", "p1,p2,u1,u2,u3\tfalse"]


def test_refine_listing(capsys):
    code, out, _ = run(capsys, "refine", "--fixture", "social")
    assert code == 0
    first = out.splitlines()[0].split("\t")
    assert first[1] == "add_edge(edge_sign=+, source=n0, target=n1)"
    assert abs(float(first[0]) - 0.9710) <= 1e-3
    assert run(capsys, "refine", "--fixture", "social")[1] == out


def test_refine_pure(capsys, tmp_path, files):
    _, graph, _ = files
    labels = tmp_path / "pure.json"
    labels.write_text(json.dumps({"pairs": [{"nodes": ["u2"], "edges": [], "label": "M"},
                                            {"nodes": ["u3"], "edges": [], "label": "M"}]}))
    code, out, _ = run(capsys, "refine", "--graph", str(graph), "--labels", str(labels))
    assert code == 0 and out.startswith("pure:") and len(out.splitlines()) == 1


def test_dot_query(capsys, tmp_path):
    q = tmp_path / "q0.json"
    q.write_text(dump_query(initial_query()))
    code, out, _ = run(capsys, "dot", "--query", str(q))
    assert code == 0 and out.count(" color=black") == 2


def test_export_dot_alias_for_tree(capsys, tmp_path):
    tree = tmp_path / "tree.json"
    run(capsys, "induce", "--fixture", "social", "--out", str(tree))
    code, out, _ = run(capsys, "export-dot", "--tree", str(tree))
    assert code == 0 and out.count("shape=box") == 4


def test_fixture_command(capsys, tmp_path):
    code, out, _ = run(capsys, "fixture", "hobbit_like", "--out-dir", str(tmp_path))
    assert code == 0
    paths = json.loads(out)
    first = open(paths["graph"]).read()
    run(capsys, "fixture", "hobbit_like", "--out-dir", str(tmp_path))
    assert open(paths["graph"]).read() == first


def test_fixture_and_graph_conflict(capsys, files):
    _, graph, _ = files
    code, _, err = run(capsys, "induce", "--fixture", "social", "--graph", str(graph))
    assert code == 2 and "--fixture" in err
