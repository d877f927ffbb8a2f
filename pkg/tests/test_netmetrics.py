import random
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_variables_dataset
from netmetrics import (
    CROSS_FIELD,
    SAME_FIELD,
    NetworkError,
    NetworkScope,
    VariableNetwork,
    betweenness_centrality,
    build_network,
    build_networks,
    centrality_table,
    dataset_variable_index,
    degree_centrality,
    jaccard,
    network_to_dict,
    variable_scores,
)

UNIVERSE = list(range(12))


def _network(graph: nx.Graph) -> VariableNetwork:
    return VariableNetwork(scope=NetworkScope.cross_field(), graph=graph, dataset_ids=[])


def _oracle_betweenness(graph: nx.Graph):
    """枚举所有最短路径的介数"""
    scores = {node: 0.0 for node in graph.nodes}
    for s, t in combinations(list(graph.nodes), 2):
        paths = list(nx.all_shortest_paths(graph, s, t))
        for node in graph.nodes:
            if node in (s, t):
                continue
            through = sum(1 for path in paths if node in path)
            scores[node] += through / len(paths)
    return scores


def _random_connected_graph(rng: random.Random) -> nx.Graph:
    n = rng.randint(2, 8)
    order = [f"v{i}" for i in range(n)]
    rng.shuffle(order)
    graph = nx.Graph()
    graph.add_nodes_from(order)
    for i in range(1, n):
        graph.add_edge(order[i], order[rng.randrange(i)])
    for u, v in combinations(order, 2):
        if rng.random() < 0.3:
            graph.add_edge(u, v)
    return graph


@settings(max_examples=1000, deadline=None)
@given(st.sets(st.sampled_from(UNIVERSE)), st.sets(st.sampled_from(UNIVERSE)))
def test_jaccard_matches_brute_force(a, b):
    both = sum(1 for x in UNIVERSE if x in a and x in b)
    either = sum(1 for x in UNIVERSE if x in a or x in b)
    expected = both / either if either else 0.0
    assert jaccard(a, b) == expected
    assert jaccard(a, b) == jaccard(b, a)


def test_jaccard_identities():
    assert jaccard({1, 2}, {1, 2}) == 1.0
    assert jaccard({1, 2}, set()) == 0.0
    assert jaccard(set(), set()) == 0.0


def test_betweenness_matches_path_enumeration():
    rng = random.Random(20240101)
    for _ in range(600):
        graph = _random_connected_graph(rng)
        expected = _oracle_betweenness(graph)
        actual = betweenness_centrality(_network(graph))
        for node in graph.nodes:
            assert actual[node] == pytest.approx(expected[node], abs=1e-9)


def test_betweenness_fixtures():
    path = nx.path_graph(["a", "b", "c"])
    assert betweenness_centrality(_network(path)) == {"a": 0.0, "b": 1.0, "c": 0.0}
    assert betweenness_centrality(_network(path), normalized=True)["b"] == 1.0

    star = nx.star_graph(3)
    assert betweenness_centrality(_network(star))[0] == 3.0
    assert betweenness_centrality(_network(star), normalized=True)[0] == 1.0


def test_betweenness_small_graphs():
    graph = nx.Graph()
    graph.add_edge("a", "b")
    assert betweenness_centrality(_network(graph), normalized=True) == {"a": 0.0, "b": 0.0}


def _catalog():
    return [
        make_variables_dataset("D1", ["a", "b"], "f1"),
        make_variables_dataset("D2", ["a", "c"], "f1"),
        make_variables_dataset("D3", ["a", "b"], "f1"),
        make_variables_dataset("W1", ["b", "x"], "f2"),
    ]


def test_build_network_weights():
    network = build_network(_catalog(), NetworkScope.same_field("f1"))
    graph = network.graph
    assert network.dataset_ids == ["D1", "D2", "D3"]
    assert sorted(graph.nodes) == ["a", "b", "c"]
    assert graph["a"]["b"]["weight"] == pytest.approx(2 / 3)
    assert graph["a"]["c"]["weight"] == pytest.approx(1 / 3)
    assert not graph.has_edge("b", "c")
    assert graph.nodes["a"]["occurrence_count"] == 3
    assert graph.nodes["b"]["dataset_ids"] == ["D1", "D3"]
    assert network.occurrence_fraction("c") == pytest.approx(1 / 3)


def test_build_network_is_order_independent():
    catalog = _catalog()
    forward = network_to_dict(build_network(catalog, NetworkScope.cross_field()), seed=3)
    backward = network_to_dict(build_network(list(reversed(catalog)), NetworkScope.cross_field()), seed=3)
    assert forward == backward


def test_empty_scope():
    with pytest.raises(NetworkError):
        build_network(_catalog(), NetworkScope.same_field("nowhere"))


def test_degree_centrality():
    degrees = degree_centrality(build_network(_catalog(), NetworkScope.same_field("f1")))
    assert degrees["a"]["degree_centrality"] == 1.0
    assert degrees["b"]["degree_centrality"] == 0.5
    assert degrees["a"]["weighted_degree"] == pytest.approx(1.0)

    single = degree_centrality(build_network([make_variables_dataset("S", ["only"])], NetworkScope.cross_field()))
    assert single == {"only": {"degree_centrality": 0.0, "weighted_degree": 0.0}}


def test_build_networks_scopes():
    networks = build_networks(_catalog())
    assert [n.scope.label for n in networks] == [f"{SAME_FIELD}:f1", f"{SAME_FIELD}:f2", CROSS_FIELD]


def test_variable_scores():
    scores = variable_scores(_catalog(), "D2")
    assert set(scores) == {"a", "c"}
    assert scores["a"].occurrence_fraction == 1.0
    assert scores["a"].rarity == 0.0
    assert scores["c"].rarity == pytest.approx(2 / 3)
    assert scores["a"].universality == 1.0
    # 跨领域网络为路径 c-a-b-x
    cross = variable_scores(_catalog(), "W1")
    assert cross["b"].betweenness == 2.0
    assert cross["x"].betweenness == 0.0
    assert cross["b"].linkage == pytest.approx(2.0 / 3.0)


def test_variable_scores_without_peers():
    scores = variable_scores(_catalog(), "W1")
    assert scores["x"].rarity is None
    assert scores["x"].universality is None
    assert scores["x"].linkage == 0.0


def test_unknown_dataset():
    with pytest.raises(NetworkError):
        variable_scores(_catalog(), "missing")


def test_dataset_variable_index():
    table = centrality_table(_catalog())
    assert list(table) == ["D1", "D2", "D3", "W1"]
    assert dataset_variable_index(table["D2"], "rarity") == pytest.approx((0.0 + 2 / 3) / 2)
    assert dataset_variable_index(table["W1"], "rarity") is None


def test_network_to_dict():
    payload = network_to_dict(build_network(_catalog(), NetworkScope.same_field("f1")), seed=42)
    assert payload["scope"] == SAME_FIELD
    assert payload["field_label"] == "f1"
    assert [n["id"] for n in payload["nodes"]] == ["a", "b", "c"]
    assert [(e["source"], e["target"]) for e in payload["edges"]] == [("a", "b"), ("a", "c")]
    assert all(round(n["x"], 4) == n["x"] for n in payload["nodes"])
    assert payload == network_to_dict(build_network(_catalog(), NetworkScope.same_field("f1")), seed=42)


def _ranking(scores, key):
    return sorted(scores, key=lambda node: (-scores[node][key], node))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_weight_rescaling_keeps_centrality(seed, factor):
    rng = random.Random(seed)
    graph = _random_connected_graph(rng)
    for u, v in graph.edges:
        graph[u][v]["weight"] = rng.randint(1, 10)
    scaled = graph.copy()
    for u, v in scaled.edges:
        scaled[u][v]["weight"] *= factor

    assert betweenness_centrality(_network(scaled)) == betweenness_centrality(_network(graph))
    before = degree_centrality(_network(graph))
    after = degree_centrality(_network(scaled))
    for node in graph.nodes:
        assert after[node]["degree_centrality"] == before[node]["degree_centrality"]
        assert after[node]["weighted_degree"] == before[node]["weighted_degree"] * factor
    for key in ("degree_centrality", "weighted_degree"):
        assert _ranking(after, key) == _ranking(before, key)
